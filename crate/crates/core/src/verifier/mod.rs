//! Exhaustive certification of incentive properties on concrete instances.
//!
//! Every check fixes an [`Instance`], lets one buyer at a time range over a
//! finite probe set of bids crossed with every subset of her neighbors, keeps
//! the others truthful, and recomputes the diffusion closure for each choice.
//! For comparison-based policies whose competitors bid on the grid, the probe
//! set ([`CheckConfig::probe_bids`]) contains a representative of every
//! interval on which the mechanism outcome is constant, so a clean scan is a
//! certificate rather than a sample.
//!
//! The enumeration order is fixed (buyers ascending, then bids ascending,
//! then subsets by bitmask) and the first violation found becomes the
//! witness.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::money::Money;
use crate::network::{BuyerSet, Report, DEFAULT_SUBSET_CAP};

mod certify;
mod checks;
mod witness;

pub use certify::{certify_mechanism, CertificationReport, EvaluationError};
pub use checks::{
    check_alloc_monotonic, check_budget_balance, check_critical_bid_monotonic,
    check_decoupled_properties, check_feasibility, check_ic, check_ir, check_revenue_dominance,
    check_value_monotonic, revenue_comparison, RevenueComparison, RevenueRow,
};
pub use witness::Witness;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Property {
    /// Value-monotonic allocation.
    P1,
    /// Bid-independent decoupled payments.
    P2,
    /// Win payment minus lose payment equals the critical bid.
    P3,
    /// Decoupled payments never increase with the diffusion set.
    P4,
    /// Lose payment with empty diffusion is at most zero.
    P5,
    IC,
    IR,
    BudgetBalance,
    AllocMonotonic,
    CriticalBidMonotonic,
    RevenueDominance,
    Feasibility,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// How the quantifiers over bids and diffusion sets are made finite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub bid_grid: Vec<Money>,
    #[serde(default = "default_true")]
    pub include_midpoints: bool,
    /// Whether declining to participate counts as an IC deviation.
    #[serde(default = "default_true")]
    pub include_nil: bool,
    #[serde(default = "default_cap")]
    pub neighbor_subset_cap: usize,
}

fn default_true() -> bool {
    true
}

fn default_cap() -> usize {
    DEFAULT_SUBSET_CAP
}

impl CheckConfig {
    pub fn new(bid_grid: Vec<Money>) -> Result<Self> {
        let config = CheckConfig { bid_grid, include_midpoints: true, include_nil: true, neighbor_subset_cap: DEFAULT_SUBSET_CAP };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bid_grid.is_empty() {
            return Err(Error::BadConfig("bid grid is empty".into()));
        }
        if self.bid_grid.iter().any(Money::is_negative) {
            return Err(Error::BadConfig("bid grid has a negative value".into()));
        }
        if !self.bid_grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::BadConfig("bid grid must be sorted and distinct".into()));
        }
        Ok(())
    }

    /// The bids a deviating buyer tries, ascending.
    ///
    /// With midpoints enabled this is the grid, every midpoint between
    /// consecutive grid values, half the minimum (when the minimum is
    /// positive) and the maximum plus one.
    pub fn probe_bids(&self) -> Vec<Money> {
        let grid = &self.bid_grid;
        if !self.include_midpoints {
            return grid.clone();
        }
        let mut bids = Vec::with_capacity(2 * grid.len() + 1);
        let lowest = grid[0];
        if !lowest.is_zero() {
            bids.push(lowest.midpoint(Money::ZERO));
        }
        for (k, &g) in grid.iter().enumerate() {
            bids.push(g);
            match grid.get(k + 1) {
                Some(&next) => bids.push(g.midpoint(next)),
                None => bids.push(g + Money::ONE),
            }
        }
        bids
    }

    /// Every true valuation must be a probe so the truthful report is among
    /// the enumerated ones.
    pub(crate) fn require_valuations(&self, instance: &Instance) -> Result<()> {
        for buyer in instance.graph().buyers() {
            let v = instance.valuation(buyer);
            if self.bid_grid.binary_search(&v).is_err() {
                return Err(Error::GridMissingValuation { buyer, valuation: v.to_string() });
            }
        }
        Ok(())
    }
}

/// Result of one property check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub holds: bool,
    /// Number of elementary predicate evaluations performed.
    pub checked: u64,
    /// Index of the offending instance, in aggregated reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<usize>,
    pub witness: Option<Witness>,
}

impl PropertyReport {
    pub(crate) fn new(property: Property) -> Self {
        PropertyReport { property, holds: true, checked: 0, instance: None, witness: None }
    }

    pub(crate) fn refute(&mut self, witness: Witness) {
        if self.holds {
            self.holds = false;
            self.witness = Some(witness);
        }
    }
}

pub(crate) fn bid_report(bid: Money, diffusion: &BuyerSet) -> Report {
    Report::Bid { bid, diffusion: diffusion.clone() }
}

/// Analytic deviation count for [`check_ic`]: `|probes|·2^|r_i| + 1` per
/// buyer, without the `+ 1` when nil is excluded.
pub fn expected_deviation_count(instance: &Instance, config: &CheckConfig) -> u64 {
    let probes = config.probe_bids().len() as u64;
    let nil = u64::from(config.include_nil);
    instance
        .graph()
        .buyers()
        .map(|b| probes * (1u64 << instance.graph().neighbors(b).len()) + nil)
        .sum()
}
