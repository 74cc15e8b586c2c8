//! Seeded random instances.
//!
//! Networks are undirected: every generated link appears in both buyers'
//! neighbor lists (a link to the seller only in the seller's list). Every
//! buyer is reachable from the seller under full diffusion. Valuations are
//! drawn uniformly from the verifier's bid grid, so the truthful report is
//! always one of the probes.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::money::Money;
use crate::network::SocialGraph;

const MAX_GNP_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphModel {
    /// Random recursive tree rooted at the seller.
    Tree,
    /// Each pair of nodes (seller included) linked with probability `p`,
    /// redrawn until connected from the seller.
    Gnp { p: f64 },
    /// Even seeds draw a tree, odd seeds a `Gnp { p }` graph.
    Mixed { p: f64 },
}

impl fmt::Display for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphModel::Tree => f.write_str("tree"),
            GraphModel::Gnp { p } => write!(f, "gnp(p={p})"),
            GraphModel::Mixed { p } => write!(f, "mixed(p={p})"),
        }
    }
}

impl FromStr for GraphModel {
    type Err = Error;

    /// `tree`, `gnp` or `mixed`; the latter two default to `p = 0.4`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(GraphModel::Tree),
            "gnp" => Ok(GraphModel::Gnp { p: 0.4 }),
            "mixed" => Ok(GraphModel::Mixed { p: 0.4 }),
            other => Err(Error::BadGenerator(format!("unknown graph model `{other}`"))),
        }
    }
}

impl GraphModel {
    pub fn with_p(self, p: f64) -> Self {
        match self {
            GraphModel::Tree => GraphModel::Tree,
            GraphModel::Gnp { .. } => GraphModel::Gnp { p },
            GraphModel::Mixed { .. } => GraphModel::Mixed { p },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub min_buyers: usize,
    pub max_buyers: usize,
    pub model: GraphModel,
    pub valuation_grid: Vec<Money>,
}

impl GeneratorParams {
    pub fn new(buyers: usize, model: GraphModel, valuation_grid: Vec<Money>) -> Self {
        GeneratorParams { min_buyers: buyers, max_buyers: buyers, model, valuation_grid }
    }

    fn validate(&self) -> Result<()> {
        if self.min_buyers == 0 {
            return Err(Error::BadGenerator("a market needs at least one buyer".into()));
        }
        if self.min_buyers > self.max_buyers {
            return Err(Error::BadGenerator("min_buyers exceeds max_buyers".into()));
        }
        if self.valuation_grid.is_empty() || self.valuation_grid.iter().any(Money::is_negative) {
            return Err(Error::BadGenerator("valuation grid must be nonempty and nonnegative".into()));
        }
        if let GraphModel::Gnp { p } | GraphModel::Mixed { p } = self.model {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::BadGenerator(format!("edge probability {p} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Adjacency over nodes `0..=n`, node 0 being the seller.
fn tree_edges(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize)> {
    (1..=n).map(|k| (rng.gen_range(0..k), k)).collect()
}

fn gnp_edges(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..=n {
        for v in u + 1..=n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> SocialGraph {
    let mut seller = Vec::new();
    let mut lists = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u == 0 {
            seller.push(v as u32 - 1);
        } else {
            lists[u - 1].push(v as u32 - 1);
            lists[v - 1].push(u as u32 - 1);
        }
    }
    for l in &mut lists {
        l.sort_unstable();
    }
    SocialGraph::from_lists(&seller, &lists).expect("generated edges are simple")
}

pub fn generate_instance(params: &GeneratorParams, seed: u64) -> Result<Instance> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(params.min_buyers..=params.max_buyers);
    let model = match params.model {
        GraphModel::Mixed { p } if seed % 2 == 1 => GraphModel::Gnp { p },
        GraphModel::Mixed { .. } => GraphModel::Tree,
        m => m,
    };
    let graph = match model {
        GraphModel::Gnp { p } => {
            let mut attempt = 0;
            loop {
                let g = graph_from_edges(n, &gnp_edges(&mut rng, n, p));
                if g.reachable_from_seller().len() == n {
                    break g;
                }
                attempt += 1;
                if attempt == MAX_GNP_ATTEMPTS {
                    return Err(Error::BadGenerator(format!(
                        "no seller-connected graph with n={n}, p={p} after {MAX_GNP_ATTEMPTS} draws"
                    )));
                }
            }
        }
        _ => graph_from_edges(n, &tree_edges(&mut rng, n)),
    };
    let valuations = (0..n)
        .map(|_| *params.valuation_grid.choose(&mut rng).expect("grid is nonempty"))
        .collect();
    let mut instance = Instance::new(graph, valuations)?;
    instance.name = Some(format!("{model}-n{n}-seed{seed}"));
    instance.seed = Some(seed);
    Ok(instance)
}

/// `count` instances with seeds `seed, seed + 1, …`.
pub fn generate_instances(params: &GeneratorParams, count: usize, seed: u64) -> Result<Vec<Instance>> {
    (0..count as u64).map(|k| generate_instance(params, seed.wrapping_add(k))).collect()
}
