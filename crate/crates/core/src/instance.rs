//! Market instances and their JSON file format.
//!
//! ```json
//! {"seller_neighbors":[0],
//!  "buyers":[{"id":0,"valuation":2.0,"neighbors":[1]},
//!            {"id":1,"valuation":10.0,"neighbors":[]}]}
//! ```
//!
//! Valuations may be JSON numbers or decimal/fraction strings; they are
//! written back as strings so no precision is lost. `name` and `seed` are
//! optional metadata.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::Money;
use crate::network::{BuyerId, Report, ReportProfile, SocialGraph, TrueType};

/// A social graph together with every buyer's true valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: Option<String>,
    pub seed: Option<u64>,
    graph: SocialGraph,
    valuations: Vec<Money>,
}

impl Instance {
    pub fn new(graph: SocialGraph, valuations: Vec<Money>) -> Result<Self> {
        if valuations.len() != graph.buyer_count() {
            return Err(Error::ProfileSize { expected: graph.buyer_count(), got: valuations.len() });
        }
        if let Some(v) = valuations.iter().find(|v| v.is_negative()) {
            return Err(Error::NegativeAmount(v.to_string()));
        }
        Ok(Instance { name: None, seed: None, graph, valuations })
    }

    pub fn graph(&self) -> &SocialGraph {
        &self.graph
    }

    pub fn valuations(&self) -> &[Money] {
        &self.valuations
    }

    pub fn valuation(&self, buyer: BuyerId) -> Money {
        self.valuations[buyer.index()]
    }

    pub fn buyer_count(&self) -> usize {
        self.graph.buyer_count()
    }

    pub fn true_type(&self, buyer: BuyerId) -> TrueType {
        TrueType { valuation: self.valuation(buyer), neighbors: self.graph.neighbors(buyer).clone() }
    }

    /// The truthful report of `buyer`: her valuation and all her neighbors.
    pub fn truthful_report(&self, buyer: BuyerId) -> Report {
        Report::Bid { bid: self.valuation(buyer), diffusion: self.graph.neighbors(buyer).clone() }
    }

    /// Everyone reports truthfully (before the diffusion closure is applied).
    pub fn truthful_profile(&self) -> ReportProfile {
        let reports = self.graph.buyers().map(|b| self.truthful_report(b)).collect();
        ReportProfile::new(&self.graph, reports).expect("truthful reports are feasible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        file.into_instance()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub seller_neighbors: Vec<u32>,
    pub buyers: Vec<BuyerEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuyerEntry {
    pub id: u32,
    pub valuation: Money,
    pub neighbors: Vec<u32>,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        let n = self.buyers.len();
        let mut slots: Vec<Option<BuyerEntry>> = vec![None; n];
        for entry in self.buyers {
            let id = entry.id as usize;
            if id >= n {
                return Err(Error::BuyerIds { expected: n, detail: format!("found id {id}") });
            }
            if slots[id].is_some() {
                return Err(Error::BuyerIds { expected: n, detail: format!("id {id} appears twice") });
            }
            slots[id] = Some(entry);
        }
        let entries: Vec<BuyerEntry> = slots.into_iter().map(|e| e.expect("dense ids")).collect();
        let lists: Vec<Vec<u32>> = entries.iter().map(|e| e.neighbors.clone()).collect();
        let graph = SocialGraph::from_lists(&self.seller_neighbors, &lists)?;
        let mut instance = Instance::new(graph, entries.iter().map(|e| e.valuation).collect())?;
        instance.name = self.name;
        instance.seed = self.seed;
        Ok(instance)
    }
}

impl From<&Instance> for InstanceFile {
    fn from(instance: &Instance) -> Self {
        let graph = instance.graph();
        InstanceFile {
            name: instance.name.clone(),
            seed: instance.seed,
            seller_neighbors: graph.seller_neighbors().iter().map(|b| b.0).collect(),
            buyers: graph
                .buyers()
                .map(|b| BuyerEntry {
                    id: b.0,
                    valuation: instance.valuation(b),
                    neighbors: graph.neighbors(b).iter().map(|n| n.0).collect(),
                })
                .collect(),
        }
    }
}
