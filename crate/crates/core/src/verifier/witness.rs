use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::instance::Instance;
use crate::mechanisms::{
    allocate, buyer_utility, evaluate_buyer, run_mechanism, AllocationPolicy, DecoupledPayment,
    ExtendedBid, PaymentRule,
};
use crate::money::Money;
use crate::network::{compare_types, effective_profile, BuyerId, BuyerSet, Report, TypeOrdering};

/// A concrete counterexample. Replaying it against the same instance,
/// policy and payment rule reproduces the violation exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// IC: the deviation earns strictly more than the truthful report.
    Deviation {
        buyer: BuyerId,
        valuation: Money,
        truthful: Report,
        deviation: Report,
        truthful_utility: Money,
        truthful_payment: Money,
        deviation_utility: Money,
        deviation_payment: Money,
    },
    /// IR: a truthful bid with this diffusion set earns negative utility.
    NegativeUtility { buyer: BuyerId, valuation: Money, report: Report, payment: Money, utility: Money },
    /// P1 / allocation monotonicity: `loses_at ⪰ wins_at`, yet the buyer
    /// wins only at `wins_at`.
    Allocation { buyer: BuyerId, wins_at: Report, loses_at: Report },
    /// P2: same diffusion set, different bids, different decoupled payments.
    BidDependence {
        buyer: BuyerId,
        first: Report,
        first_payment: DecoupledPayment,
        second: Report,
        second_payment: DecoupledPayment,
    },
    /// P3: win minus lose payment differs from the critical bid.
    CriticalDifference { buyer: BuyerId, report: Report, payment: DecoupledPayment, critical: ExtendedBid },
    /// P4: the smaller diffusion set has a strictly smaller payment component.
    DiffusionMonotonicity {
        buyer: BuyerId,
        smaller: Report,
        smaller_payment: DecoupledPayment,
        larger: Report,
        larger_payment: DecoupledPayment,
    },
    /// P5: positive lose payment under empty diffusion.
    LoseAnchor { buyer: BuyerId, report: Report, on_lose: Money },
    /// Critical bid larger for the smaller diffusion set.
    CriticalBid {
        buyer: BuyerId,
        smaller: BuyerSet,
        smaller_bid: ExtendedBid,
        larger: BuyerSet,
        larger_bid: ExtendedBid,
    },
    /// Negative revenue under truthful reports.
    Deficit { revenue: Money },
    /// Winner with a nil effective report when `buyer` reports `report`.
    Infeasible { buyer: BuyerId, report: Report, winner: BuyerId },
    /// Rule A earns strictly less than rule B on `instance`.
    Revenue { instance: usize, revenue_a: Money, revenue_b: Money },
}

impl Witness {
    pub fn buyer(&self) -> Option<BuyerId> {
        match self {
            Witness::Deviation { buyer, .. }
            | Witness::NegativeUtility { buyer, .. }
            | Witness::Allocation { buyer, .. }
            | Witness::BidDependence { buyer, .. }
            | Witness::CriticalDifference { buyer, .. }
            | Witness::DiffusionMonotonicity { buyer, .. }
            | Witness::LoseAnchor { buyer, .. }
            | Witness::CriticalBid { buyer, .. }
            | Witness::Infeasible { buyer, .. } => Some(*buyer),
            Witness::Deficit { .. } | Witness::Revenue { .. } => None,
        }
    }

    /// Re-evaluates the counterexample. `Ok(true)` means the violation and
    /// every recorded number were reproduced. Revenue witnesses need two
    /// payment rules; use [`Witness::replay_dominance`].
    pub fn replay(
        &self,
        instance: &Instance,
        policy: &dyn AllocationPolicy,
        payment: &dyn PaymentRule,
    ) -> Result<bool> {
        let graph = instance.graph();
        let truthful = instance.truthful_profile();
        let decoupled = |buyer: BuyerId, report: &Report| -> Result<DecoupledPayment> {
            let raw = truthful.with_report(buyer, report.clone());
            payment.decoupled(policy, graph, &effective_profile(graph, &raw), buyer)
        };
        let wins = |buyer: BuyerId, report: &Report| {
            allocate(policy, graph, &truthful.with_report(buyer, report.clone())) == Some(buyer)
        };
        Ok(match self {
            Witness::Deviation {
                buyer,
                valuation,
                truthful: t,
                deviation,
                truthful_utility,
                truthful_payment,
                deviation_utility,
                deviation_payment,
            } => {
                let honest = evaluate_buyer(policy, payment, graph, &truthful.with_report(*buyer, t.clone()), *buyer)?;
                let lie = evaluate_buyer(policy, payment, graph, &truthful.with_report(*buyer, deviation.clone()), *buyer)?;
                let (u_t, u_d) = (buyer_utility(*valuation, honest), buyer_utility(*valuation, lie));
                *valuation == instance.valuation(*buyer)
                    && *t == instance.truthful_report(*buyer)
                    && u_t == *truthful_utility
                    && u_d == *deviation_utility
                    && honest.payment == *truthful_payment
                    && lie.payment == *deviation_payment
                    && u_d > u_t
            }
            Witness::NegativeUtility { buyer, valuation, report, payment: paid, utility } => {
                let out = evaluate_buyer(policy, payment, graph, &truthful.with_report(*buyer, report.clone()), *buyer)?;
                let u = buyer_utility(*valuation, out);
                report.bid_value() == Some(*valuation) && out.payment == *paid && u == *utility && u.is_negative()
            }
            Witness::Allocation { buyer, wins_at, loses_at } => {
                matches!(compare_types(loses_at, wins_at)?, TypeOrdering::GreaterEqual | TypeOrdering::Equal)
                    && wins(*buyer, wins_at)
                    && !wins(*buyer, loses_at)
            }
            Witness::BidDependence { buyer, first, first_payment, second, second_payment } => {
                let a = decoupled(*buyer, first)?;
                let b = decoupled(*buyer, second)?;
                first.diffusion() == second.diffusion()
                    && a == *first_payment
                    && b == *second_payment
                    && a != b
            }
            Witness::CriticalDifference { buyer, report, payment: recorded, critical } => {
                let d = decoupled(*buyer, report)?;
                let diffusion = report.diffusion().cloned().unwrap_or_default();
                let crit = policy.critical_bid(graph, &truthful, *buyer, &diffusion)?;
                d == *recorded
                    && crit == *critical
                    && crit.value().is_some_and(|v| d.on_win - d.on_lose != v)
            }
            Witness::DiffusionMonotonicity { buyer, smaller, smaller_payment, larger, larger_payment } => {
                let s = decoupled(*buyer, smaller)?;
                let l = decoupled(*buyer, larger)?;
                let nested = match (smaller.diffusion(), larger.diffusion()) {
                    (Some(a), Some(b)) => a.is_subset(b),
                    _ => false,
                };
                nested
                    && smaller.bid_value() == larger.bid_value()
                    && s == *smaller_payment
                    && l == *larger_payment
                    && (s.on_win < l.on_win || s.on_lose < l.on_lose)
            }
            Witness::LoseAnchor { buyer, report, on_lose } => {
                let d = decoupled(*buyer, report)?;
                report.diffusion().is_some_and(BuyerSet::is_empty) && d.on_lose == *on_lose && on_lose > &Money::ZERO
            }
            Witness::CriticalBid { buyer, smaller, smaller_bid, larger, larger_bid } => {
                let s = policy.critical_bid(graph, &truthful, *buyer, smaller)?;
                let l = policy.critical_bid(graph, &truthful, *buyer, larger)?;
                smaller.is_subset(larger)
                    && s == *smaller_bid
                    && l == *larger_bid
                    && !s.numeric_le(&l)
            }
            Witness::Deficit { revenue } => {
                let out = run_mechanism(policy, payment, graph, &truthful)?;
                out.revenue == *revenue && revenue.is_negative()
            }
            Witness::Infeasible { buyer, report, winner } => {
                let raw = truthful.with_report(*buyer, report.clone());
                let eff = effective_profile(graph, &raw);
                policy.allocate(graph, &eff) == Some(*winner)
                    && (winner.index() >= eff.len() || eff.get(*winner).is_nil())
            }
            Witness::Revenue { .. } => false,
        })
    }

    /// Replays a [`Witness::Revenue`] against the instance it names.
    pub fn replay_dominance(
        &self,
        instances: &[Instance],
        policy: &dyn AllocationPolicy,
        rule_a: &dyn PaymentRule,
        rule_b: &dyn PaymentRule,
    ) -> Result<bool> {
        let Witness::Revenue { instance, revenue_a, revenue_b } = self else {
            return Ok(false);
        };
        let Some(inst) = instances.get(*instance) else {
            return Ok(false);
        };
        let truthful = inst.truthful_profile();
        let a = run_mechanism(policy, rule_a, inst.graph(), &truthful)?.revenue;
        let b = run_mechanism(policy, rule_b, inst.graph(), &truthful)?.revenue;
        Ok(a == *revenue_a && b == *revenue_b && a < b)
    }
}
