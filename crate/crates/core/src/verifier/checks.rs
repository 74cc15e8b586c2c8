use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::instance::Instance;
use crate::mechanisms::{
    buyer_utility, evaluate_buyer, run_mechanism, AllocationPolicy, DecoupledPayment, ExtendedBid,
    MechanismOutcome, PaymentRule,
};
use crate::money::Money;
use crate::network::{
    deviations, effective_profile, neighbor_subsets, BuyerId, BuyerSet, ReportProfile, SocialGraph,
};
use crate::verifier::{bid_report, CheckConfig, Property, PropertyReport, Witness};

/// Removing element `j` of the sorted neighbor list from the subset encoded
/// by `mask` gives `mask ^ (1 << j)`.
fn covered_masks(mask: usize, width: usize) -> impl Iterator<Item = usize> {
    (0..width).filter(move |j| mask >> j & 1 == 1).map(move |j| mask ^ (1 << j))
}

/// `wins[k]`: whether `buyer` wins when bidding `bids[k]` with `diffusion`,
/// others truthful.
fn win_row(
    policy: &dyn AllocationPolicy,
    graph: &SocialGraph,
    truthful: &ReportProfile,
    buyer: BuyerId,
    diffusion: &BuyerSet,
    bids: &[Money],
) -> Vec<bool> {
    let raw = truthful.with_report(buyer, bid_report(Money::ZERO, diffusion));
    let mut eff = effective_profile(graph, &raw);
    if eff.get(buyer).is_nil() {
        return vec![false; bids.len()];
    }
    bids.iter()
        .map(|&b| {
            eff.set_bid_unchecked(buyer, b);
            policy.allocate(graph, &eff) == Some(buyer)
        })
        .collect()
}

/// P1: with the diffusion set fixed, raising the bid never turns a win into
/// a loss.
pub fn check_value_monotonic(
    policy: &dyn AllocationPolicy,
    instance: &Instance,
    config: &CheckConfig,
) -> Result<PropertyReport> {
    config.validate()?;
    let graph = instance.graph();
    let truthful = instance.truthful_profile();
    let bids = config.probe_bids();
    let mut report = PropertyReport::new(Property::P1);
    for buyer in graph.buyers() {
        for diffusion in neighbor_subsets(graph, buyer, config.neighbor_subset_cap)? {
            let row = win_row(policy, graph, &truthful, buyer, &diffusion, &bids);
            report.checked += row.len() as u64;
            let Some(first) = row.iter().position(|&w| w) else { continue };
            if let Some(off) = row[first..].iter().position(|&w| !w) {
                report.refute(Witness::Allocation {
                    buyer,
                    wins_at: bid_report(bids[first], &diffusion),
                    loses_at: bid_report(bids[first + off], &diffusion),
                });
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// Monotonic allocation: a winning report stays winning under any report
/// with a weakly higher bid and a weakly smaller diffusion set. Checked on
/// covering pairs (next probe bid, or one neighbor dropped), which generate
/// the whole order.
pub fn check_alloc_monotonic(
    policy: &dyn AllocationPolicy,
    instance: &Instance,
    config: &CheckConfig,
) -> Result<PropertyReport> {
    config.validate()?;
    let graph = instance.graph();
    let truthful = instance.truthful_profile();
    let bids = config.probe_bids();
    let mut report = PropertyReport::new(Property::AllocMonotonic);
    for buyer in graph.buyers() {
        let sets = neighbor_subsets(graph, buyer, config.neighbor_subset_cap)?;
        let width = graph.neighbors(buyer).len();
        let table: Vec<Vec<bool>> =
            sets.iter().map(|s| win_row(policy, graph, &truthful, buyer, s, &bids)).collect();
        for k in 0..bids.len() {
            for (mask, set) in sets.iter().enumerate() {
                if !table[mask][k] {
                    continue;
                }
                let higher = (k + 1 < bids.len()).then_some((mask, k + 1));
                for (m2, k2) in higher.into_iter().chain(covered_masks(mask, width).map(|m| (m, k))) {
                    report.checked += 1;
                    if !table[m2][k2] {
                        report.refute(Witness::Allocation {
                            buyer,
                            wins_at: bid_report(bids[k], set),
                            loses_at: bid_report(bids[k2], &sets[m2]),
                        });
                        return Ok(report);
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Critical bids never decrease as the diffusion set grows (infinity on
/// top).
pub fn check_critical_bid_monotonic(
    policy: &dyn AllocationPolicy,
    instance: &Instance,
    config: &CheckConfig,
) -> Result<PropertyReport> {
    let graph = instance.graph();
    let truthful = instance.truthful_profile();
    let mut report = PropertyReport::new(Property::CriticalBidMonotonic);
    for buyer in graph.buyers() {
        let sets = neighbor_subsets(graph, buyer, config.neighbor_subset_cap)?;
        let width = graph.neighbors(buyer).len();
        let crit: Vec<ExtendedBid> = sets
            .iter()
            .map(|s| policy.critical_bid(graph, &truthful, buyer, s))
            .collect::<Result<_>>()?;
        for (mask, larger) in sets.iter().enumerate() {
            for smaller in covered_masks(mask, width) {
                report.checked += 1;
                if !crit[smaller].numeric_le(&crit[mask]) {
                    report.refute(Witness::CriticalBid {
                        buyer,
                        smaller: sets[smaller].clone(),
                        smaller_bid: crit[smaller],
                        larger: larger.clone(),
                        larger_bid: crit[mask],
                    });
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// At most one winner, and the winner participates, for the truthful
/// profile and every single-buyer deviation.
pub fn check_feasibility(
    policy: &dyn AllocationPolicy,
    instance: &Instance,
    config: &CheckConfig,
) -> Result<PropertyReport> {
    config.validate()?;
    let graph = instance.graph();
    let truthful = instance.truthful_profile();
    let bids = config.probe_bids();
    let mut report = PropertyReport::new(Property::Feasibility);
    for buyer in graph.buyers() {
        for deviation in deviations(graph, buyer, &bids, config.neighbor_subset_cap)? {
            report.checked += 1;
            let eff = effective_profile(graph, &truthful.with_report(buyer, deviation.clone()));
            if let Some(winner) = policy.allocate(graph, &eff) {
                if winner.index() >= eff.len() || eff.get(winner).is_nil() {
                    report.refute(Witness::Infeasible { buyer, report: deviation, winner });
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// Dominant-strategy incentive compatibility: no single-buyer deviation,
/// including declining to participate unless `config.include_nil` is off,
/// earns strictly more than reporting the true type. Others keep their truthful reports; buyers cut off by the
/// deviation drop out through the diffusion closure.
pub fn check_ic(
    policy: &dyn AllocationPolicy,
    payment: &dyn PaymentRule,
    instance: &Instance,
    config: &CheckConfig,
) -> Result<PropertyReport> {
    config.validate()?;
    config.require_valuations(instance)?;
    let graph = instance.graph();
    let truthful = instance.truthful_profile();
    let bids = config.probe_bids();
    let mut report = PropertyReport::new(Property::IC);
    for buyer in graph.buyers() {
        let valuation = instance.valuation(buyer);
        let honest = evaluate_buyer(policy, payment, graph, &truthful, buyer)?;
        let honest_utility = buyer_utility(valuation, honest);
        for deviation in deviations(graph, buyer, &bids, config.neighbor_subset_cap)? {
            if deviation.is_nil() && !config.include_nil {
                continue;
            }
            report.checked += 1;
            let out = evaluate_buyer(policy, payment, graph, &truthful.with_report(buyer, deviation.clone()), buyer)?;
            let u = buyer_utility(valuation, out);
            if u > honest_utility {
                report.refute(Witness::Deviation {
                    buyer,
                    valuation,
                    truthful: instance.truthful_report(buyer),
                    deviation,
                    truthful_utility: honest_utility,
                    truthful_payment: honest.payment,
                    deviation_utility: u,
                    deviation_payment: out.payment,
                });
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// Individual rationality: bidding the true valuation with any diffusion
/// subset never yields negative utility.
pub fn check_ir(
    policy: &dyn AllocationPolicy,
    payment: &dyn PaymentRule,
    instance: &Instance,
    config: &CheckConfig,
) -> Result<PropertyReport> {
    let graph = instance.graph();
    let truthful = instance.truthful_profile();
    let mut report = PropertyReport::new(Property::IR);
    for buyer in graph.buyers() {
        let valuation = instance.valuation(buyer);
        for diffusion in neighbor_subsets(graph, buyer, config.neighbor_subset_cap)? {
            report.checked += 1;
            let r = bid_report(valuation, &diffusion);
            let out = evaluate_buyer(policy, payment, graph, &truthful.with_report(buyer, r.clone()), buyer)?;
            let u = buyer_utility(valuation, out);
            if u.is_negative() {
                report.refute(Witness::NegativeUtility {
                    buyer,
                    valuation,
                    report: r,
                    payment: out.payment,
                    utility: u,
                });
                return Ok(report);
            }
        }
    }
    Ok(report)
}

/// P2–P5 on the decoupled payments, in that order.
///
/// Buyers the others never inform are skipped: they cannot participate and
/// every rule charges them nothing.
pub fn check_decoupled_properties(
    policy: &dyn AllocationPolicy,
    payment: &dyn PaymentRule,
    instance: &Instance,
    config: &CheckConfig,
) -> Result<Vec<PropertyReport>> {
    config.validate()?;
    let graph = instance.graph();
    let truthful = instance.truthful_profile();
    let informed = crate::network::informed_mask(graph, &truthful);
    let bids = config.probe_bids();
    let mut p2 = PropertyReport::new(Property::P2);
    let mut p3 = PropertyReport::new(Property::P3);
    let mut p4 = PropertyReport::new(Property::P4);
    let mut p5 = PropertyReport::new(Property::P5);

    for buyer in graph.buyers() {
        let sets = neighbor_subsets(graph, buyer, config.neighbor_subset_cap)?;
        if !informed[buyer.index()] {
            continue;
        }
        let width = graph.neighbors(buyer).len();
        // pay[mask][k]: decoupled payment at (bids[k], sets[mask])
        let mut pay: Vec<Vec<DecoupledPayment>> = Vec::with_capacity(sets.len());
        for diffusion in &sets {
            let row = bids
                .iter()
                .map(|&b| {
                    let raw = truthful.with_report(buyer, bid_report(b, diffusion));
                    payment.decoupled(policy, graph, &effective_profile(graph, &raw), buyer)
                })
                .collect::<Result<Vec<_>>>()?;
            pay.push(row);
        }

        for (mask, diffusion) in sets.iter().enumerate() {
            let row = &pay[mask];
            for k in 1..row.len() {
                p2.checked += 1;
                if row[k] != row[0] {
                    p2.refute(Witness::BidDependence {
                        buyer,
                        first: bid_report(bids[0], diffusion),
                        first_payment: row[0],
                        second: bid_report(bids[k], diffusion),
                        second_payment: row[k],
                    });
                }
            }

            let critical = policy.critical_bid(graph, &truthful, buyer, diffusion)?;
            if let Some(v) = critical.value() {
                for (k, d) in row.iter().enumerate() {
                    p3.checked += 1;
                    if d.on_win - d.on_lose != v {
                        p3.refute(Witness::CriticalDifference {
                            buyer,
                            report: bid_report(bids[k], diffusion),
                            payment: *d,
                            critical,
                        });
                    }
                }
            }

            for smaller in covered_masks(mask, width) {
                for (k, larger_pay) in row.iter().enumerate() {
                    p4.checked += 1;
                    let smaller_pay = pay[smaller][k];
                    if smaller_pay.on_win < larger_pay.on_win || smaller_pay.on_lose < larger_pay.on_lose {
                        p4.refute(Witness::DiffusionMonotonicity {
                            buyer,
                            smaller: bid_report(bids[k], &sets[smaller]),
                            smaller_payment: smaller_pay,
                            larger: bid_report(bids[k], diffusion),
                            larger_payment: *larger_pay,
                        });
                    }
                }
            }
        }

        for (k, d) in pay[0].iter().enumerate() {
            p5.checked += 1;
            if d.on_lose > Money::ZERO {
                p5.refute(Witness::LoseAnchor {
                    buyer,
                    report: bid_report(bids[k], &sets[0]),
                    on_lose: d.on_lose,
                });
            }
        }
    }
    Ok(vec![p2, p3, p4, p5])
}

/// Weak budget balance of a single outcome.
pub fn check_budget_balance(outcome: &MechanismOutcome) -> PropertyReport {
    let mut report = PropertyReport::new(Property::BudgetBalance);
    report.checked = 1;
    if outcome.revenue.is_negative() {
        report.refute(Witness::Deficit { revenue: outcome.revenue });
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevenueRow {
    pub instance: usize,
    pub revenue_a: Money,
    pub revenue_b: Money,
    /// `revenue_a - revenue_b`
    pub margin: Money,
}

/// Truthful-profile revenues of two payment rules side by side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevenueComparison {
    pub policy: String,
    pub payment_a: String,
    pub payment_b: String,
    pub rows: Vec<RevenueRow>,
    /// A earns at least as much as B on every row.
    pub a_dominates: bool,
    /// ... and strictly more on at least one.
    pub strict: bool,
}

pub fn revenue_comparison(
    policy: &dyn AllocationPolicy,
    rule_a: &dyn PaymentRule,
    rule_b: &dyn PaymentRule,
    instances: &[Instance],
) -> Result<RevenueComparison> {
    let mut rows = Vec::with_capacity(instances.len());
    for (index, inst) in instances.iter().enumerate() {
        let truthful = inst.truthful_profile();
        let revenue_a = run_mechanism(policy, rule_a, inst.graph(), &truthful)?.revenue;
        let revenue_b = run_mechanism(policy, rule_b, inst.graph(), &truthful)?.revenue;
        rows.push(RevenueRow { instance: index, revenue_a, revenue_b, margin: revenue_a - revenue_b });
    }
    let a_dominates = rows.iter().all(|r| !r.margin.is_negative());
    let strict = a_dominates && rows.iter().any(|r| r.margin > Money::ZERO);
    Ok(RevenueComparison {
        policy: policy.name(),
        payment_a: rule_a.name(),
        payment_b: rule_b.name(),
        rows,
        a_dominates,
        strict,
    })
}

/// Rule A dominates rule B in revenue on every instance of the set.
pub fn check_revenue_dominance(
    policy: &dyn AllocationPolicy,
    rule_a: &dyn PaymentRule,
    rule_b: &dyn PaymentRule,
    instances: &[Instance],
) -> Result<PropertyReport> {
    let table = revenue_comparison(policy, rule_a, rule_b, instances)?;
    let mut report = PropertyReport::new(Property::RevenueDominance);
    report.checked = table.rows.len() as u64;
    if let Some(row) = table.rows.iter().find(|r| r.margin.is_negative()) {
        report.instance = Some(row.instance);
        report.refute(Witness::Revenue { instance: row.instance, revenue_a: row.revenue_a, revenue_b: row.revenue_b });
    }
    Ok(report)
}
