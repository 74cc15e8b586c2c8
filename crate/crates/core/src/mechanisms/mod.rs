//! Allocation policies, critical bids, decoupled payment rules and mechanism
//! execution.
//!
//! A mechanism is a pair of an [`AllocationPolicy`] (who gets the item) and a
//! [`PaymentRule`]. Payment rules are expressed in decoupled form: for each
//! buyer they produce what she would pay if she wins and what she would pay if
//! she loses, and the realized payment picks one of the two according to the
//! allocation.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::Money;
use crate::network::{effective_profile, BuyerId, BuyerSet, Report, ReportProfile, SocialGraph, TrueType};

pub mod controls;
mod payment;
mod policy;
pub mod registry;

pub use payment::{AlphaFamilyPayment, CriticalAnchors, OptimalPayment, VcgPayment, critical_anchors};
pub use policy::{DepthBoundedPolicy, EfficientPolicy, NeighborOnlyPolicy, highest_bidder};

/// Minimum winning bid for a fixed diffusion choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtendedBid {
    /// The buyer cannot win with any bid.
    Infinite,
    /// The buyer wins strictly above `value`, and also at `value` when
    /// `inclusive` is set.
    Finite { value: Money, inclusive: bool },
}

impl ExtendedBid {
    pub fn value(&self) -> Option<Money> {
        match self {
            ExtendedBid::Infinite => None,
            ExtendedBid::Finite { value, .. } => Some(*value),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedBid::Infinite)
    }

    /// Whether a bid of `bid` wins according to this threshold.
    pub fn wins_at(&self, bid: Money) -> bool {
        match *self {
            ExtendedBid::Infinite => false,
            ExtendedBid::Finite { value, inclusive } => bid > value || (inclusive && bid == value),
        }
    }

    /// Numeric `<=` with infinity as the top element; the flag is ignored.
    pub fn numeric_le(&self, other: &ExtendedBid) -> bool {
        match (self.value(), other.value()) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(a), Some(b)) => a <= b,
        }
    }
}

impl fmt::Display for ExtendedBid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedBid::Infinite => f.write_str("inf"),
            ExtendedBid::Finite { value, inclusive: true } => write!(f, "{value} (inclusive)"),
            ExtendedBid::Finite { value, inclusive: false } => write!(f, "{value} (exclusive)"),
        }
    }
}

/// Chooses at most one winner from an effective report profile.
///
/// Implementations must be deterministic and must only pick a buyer whose
/// report is not nil.
pub trait AllocationPolicy: Send + Sync {
    /// Registry name, e.g. `efficient` or `depth:2`.
    fn name(&self) -> String;

    /// True when the winner depends only on how bids compare with each other,
    /// never on their magnitudes. Required by [`probe_critical_bid`].
    fn comparison_based(&self) -> bool {
        true
    }

    /// `profile` is already effective: uninformed buyers are nil.
    fn allocate(&self, graph: &SocialGraph, profile: &ReportProfile) -> Option<BuyerId>;

    /// Critical bid of `buyer` when she diffuses to `diffusion`, holding the
    /// other reports in `profile` fixed. `buyer`'s own report in `profile` is
    /// ignored.
    fn critical_bid(
        &self,
        graph: &SocialGraph,
        profile: &ReportProfile,
        buyer: BuyerId,
        diffusion: &BuyerSet,
    ) -> Result<ExtendedBid> {
        if !self.comparison_based() {
            return Err(Error::UnsupportedPolicy(self.name()));
        }
        Ok(probe_critical_bid(self, graph, profile, buyer, diffusion))
    }
}

/// Runs the diffusion closure on `profile` and then the policy.
pub fn allocate<P: AllocationPolicy + ?Sized>(
    policy: &P,
    graph: &SocialGraph,
    profile: &ReportProfile,
) -> Option<BuyerId> {
    policy.allocate(graph, &effective_profile(graph, profile))
}

/// Candidate-set critical bid for comparison-based policies.
///
/// With `buyer` reporting `(·, diffusion)`, the others' effective bids plus
/// zero form the candidate set `c_0 < … < c_k`. Between two consecutive
/// candidates the ordering of bids does not change, so probing each candidate,
/// each midpoint and one point above `c_k` decides the allocation on the whole
/// half-line. The result is the least probe above which `buyer` always wins.
pub fn probe_critical_bid<P: AllocationPolicy + ?Sized>(
    policy: &P,
    graph: &SocialGraph,
    profile: &ReportProfile,
    buyer: BuyerId,
    diffusion: &BuyerSet,
) -> ExtendedBid {
    let probe = profile.with_report(buyer, Report::Bid { bid: Money::ZERO, diffusion: diffusion.clone() });
    let mut effective = effective_profile(graph, &probe);
    if effective.get(buyer).is_nil() {
        return ExtendedBid::Infinite;
    }

    let mut candidates: Vec<Money> = effective
        .iter()
        .filter(|(b, _)| *b != buyer)
        .filter_map(|(_, r)| r.bid_value())
        .collect();
    candidates.push(Money::ZERO);
    candidates.sort();
    candidates.dedup();

    // (probe point, candidate it belongs to, is the candidate itself)
    let mut points = Vec::with_capacity(2 * candidates.len());
    for (k, &c) in candidates.iter().enumerate() {
        points.push((c, c, true));
        let above = match candidates.get(k + 1) {
            Some(&next) => c.midpoint(next),
            None => c + Money::ONE,
        };
        points.push((above, c, false));
    }

    let mut threshold = ExtendedBid::Infinite;
    for &(point, candidate, exact) in points.iter().rev() {
        effective.set_bid_unchecked(buyer, point);
        if policy.allocate(graph, &effective) != Some(buyer) {
            break;
        }
        threshold = ExtendedBid::Finite { value: candidate, inclusive: exact };
    }
    threshold
}

/// A buyer's payment if she wins and if she loses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct DecoupledPayment {
    pub on_win: Money,
    pub on_lose: Money,
}

impl DecoupledPayment {
    pub const ZERO: DecoupledPayment = DecoupledPayment { on_win: Money::ZERO, on_lose: Money::ZERO };

    pub fn realized(&self, wins: bool) -> Money {
        if wins {
            self.on_win
        } else {
            self.on_lose
        }
    }
}

/// Computes decoupled payments for one buyer.
pub trait PaymentRule: Send + Sync {
    /// Registry name, e.g. `optimal` or `alpha:0.5`.
    fn name(&self) -> String;

    /// `profile` is effective. Buyers with a nil report pay nothing.
    fn decoupled(
        &self,
        policy: &dyn AllocationPolicy,
        graph: &SocialGraph,
        profile: &ReportProfile,
        buyer: BuyerId,
    ) -> Result<DecoupledPayment>;
}

/// What one buyer experiences in a mechanism run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuyerOutcome {
    pub wins: bool,
    pub payment: Money,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MechanismOutcome {
    pub winner: Option<BuyerId>,
    pub payments: BTreeMap<BuyerId, Money>,
    pub revenue: Money,
    pub welfare: Money,
}

impl MechanismOutcome {
    pub fn wins(&self, buyer: BuyerId) -> bool {
        self.winner == Some(buyer)
    }

    pub fn payment(&self, buyer: BuyerId) -> Money {
        self.payments.get(&buyer).copied().unwrap_or(Money::ZERO)
    }
}

fn checked_winner(
    policy: &dyn AllocationPolicy,
    graph: &SocialGraph,
    effective: &ReportProfile,
) -> Result<Option<BuyerId>> {
    let winner = policy.allocate(graph, effective);
    if let Some(w) = winner {
        if w.index() >= effective.len() || effective.get(w).is_nil() {
            return Err(Error::InfeasibleAllocation { policy: policy.name(), winner: w });
        }
    }
    Ok(winner)
}

/// Full mechanism run on a raw (not yet effective) profile.
pub fn run_mechanism(
    policy: &dyn AllocationPolicy,
    payment: &dyn PaymentRule,
    graph: &SocialGraph,
    profile: &ReportProfile,
) -> Result<MechanismOutcome> {
    let effective = effective_profile(graph, profile);
    let winner = checked_winner(policy, graph, &effective)?;
    let mut payments = BTreeMap::new();
    for (buyer, report) in effective.iter() {
        let amount = if report.is_nil() {
            Money::ZERO
        } else {
            payment.decoupled(policy, graph, &effective, buyer)?.realized(winner == Some(buyer))
        };
        payments.insert(buyer, amount);
    }
    let revenue = payments.values().sum();
    let welfare = winner
        .and_then(|w| effective.get(w).bid_value())
        .unwrap_or(Money::ZERO);
    Ok(MechanismOutcome { winner, payments, revenue, welfare })
}

/// Allocation and payment of a single buyer, skipping everyone else's
/// payments.
pub fn evaluate_buyer(
    policy: &dyn AllocationPolicy,
    payment: &dyn PaymentRule,
    graph: &SocialGraph,
    profile: &ReportProfile,
    buyer: BuyerId,
) -> Result<BuyerOutcome> {
    let effective = effective_profile(graph, profile);
    let winner = checked_winner(policy, graph, &effective)?;
    let wins = winner == Some(buyer);
    if effective.get(buyer).is_nil() {
        return Ok(BuyerOutcome { wins, payment: Money::ZERO });
    }
    let pay = payment.decoupled(policy, graph, &effective, buyer)?.realized(wins);
    Ok(BuyerOutcome { wins, payment: pay })
}

/// Quasilinear utility: true valuation if she wins, minus her payment.
pub fn utility(truth: &TrueType, outcome: &MechanismOutcome, buyer: BuyerId) -> Money {
    buyer_utility(truth.valuation, BuyerOutcome { wins: outcome.wins(buyer), payment: outcome.payment(buyer) })
}

pub fn buyer_utility(valuation: Money, outcome: BuyerOutcome) -> Money {
    let value = if outcome.wins { valuation } else { Money::ZERO };
    value - outcome.payment
}
