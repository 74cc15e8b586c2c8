//! Test-only oracles and fixtures. Nothing here calls the crate's critical-bid
//! or payment code.

#![allow(dead_code)]

use dak::generate::{generate_instances, GeneratorParams, GraphModel};
use dak::mechanisms::{AllocationPolicy, ExtendedBid};
use dak::verifier::CheckConfig;
use dak::{BuyerId, BuyerSet, Instance, Money, Report, ReportProfile, SocialGraph};

pub fn m(s: &str) -> Money {
    s.parse().unwrap()
}

pub fn int(v: i64) -> Money {
    Money::from_integer(v)
}

pub fn set(ids: &[u32]) -> BuyerSet {
    ids.iter().map(|&i| BuyerId(i)).collect()
}

pub fn instance(seller: &[u32], buyers: &[(i64, &[u32])]) -> Instance {
    let lists: Vec<Vec<u32>> = buyers.iter().map(|(_, n)| n.to_vec()).collect();
    let graph = SocialGraph::from_lists(seller, &lists).unwrap();
    Instance::new(graph, buyers.iter().map(|(v, _)| int(*v)).collect()).unwrap()
}

/// s → a(0) → b(1), v = (2, 10)
pub fn line() -> Instance {
    instance(&[0], &[(2, &[1]), (10, &[])])
}

/// s → {a(0), b(1)}, a → c(2), v = (3, 1, 5)
pub fn fork() -> Instance {
    instance(&[0, 1], &[(3, &[2]), (1, &[]), (5, &[])])
}

pub fn grid4() -> Vec<Money> {
    [1, 2, 3, 4].map(int).to_vec()
}

pub fn config4() -> CheckConfig {
    CheckConfig::new(grid4()).unwrap()
}

/// Seeded random instances with 1..=max_n buyers, trees and G(n, 0.4)
/// graphs alternating, valuations on {1, 2, 3, 4}.
pub fn random_instances(count: usize, max_n: usize, seed: u64) -> Vec<Instance> {
    let params = GeneratorParams {
        min_buyers: 1,
        max_buyers: max_n,
        model: GraphModel::Mixed { p: 0.4 },
        valuation_grid: grid4(),
    };
    generate_instances(&params, count, seed).unwrap()
}

/// Naive fixed-point iteration of the diffusion closure.
pub fn oracle_informed(graph: &SocialGraph, reports: &[Report]) -> Vec<bool> {
    let mut informed = vec![false; reports.len()];
    for b in graph.seller_neighbors() {
        informed[b.index()] = true;
    }
    loop {
        let mut changed = false;
        for (i, r) in reports.iter().enumerate() {
            if !informed[i] {
                continue;
            }
            if let Report::Bid { diffusion, .. } = r {
                for d in diffusion {
                    if !informed[d.index()] {
                        informed[d.index()] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return informed;
        }
    }
}

pub fn oracle_effective(graph: &SocialGraph, reports: &[Report]) -> Vec<Report> {
    let informed = oracle_informed(graph, reports);
    reports
        .iter()
        .zip(informed)
        .map(|(r, ok)| if ok { r.clone() } else { Report::Nil })
        .collect()
}

/// Does `buyer` win with `report` while the others report truthfully?
pub fn oracle_wins(policy: &dyn AllocationPolicy, inst: &Instance, buyer: BuyerId, report: &Report) -> bool {
    let mut reports: Vec<Report> = inst.graph().buyers().map(|b| inst.truthful_report(b)).collect();
    reports[buyer.index()] = report.clone();
    let eff = oracle_effective(inst.graph(), &reports);
    let profile = ReportProfile::new(inst.graph(), eff).unwrap();
    policy.allocate(inst.graph(), &profile) == Some(buyer)
}

/// Critical bid by dense scan over `0, step, 2·step, …, top`, assuming every
/// competing bid is an integer multiple of `lattice` and `step` divides
/// `lattice` at least twice over. The first point of the final winning run
/// decides: on the lattice it is an inclusive threshold, otherwise the
/// threshold is the lattice point just below it, exclusive.
pub fn oracle_critical_bid(
    policy: &dyn AllocationPolicy,
    inst: &Instance,
    buyer: BuyerId,
    diffusion: &BuyerSet,
    lattice: Money,
    step: Money,
    top: Money,
) -> ExtendedBid {
    let mut points = vec![Money::ZERO];
    while *points.last().unwrap() < top {
        let next = *points.last().unwrap() + step;
        points.push(next);
    }
    let wins: Vec<bool> = points
        .iter()
        .map(|&b| oracle_wins(policy, inst, buyer, &Report::Bid { bid: b, diffusion: diffusion.clone() }))
        .collect();
    if !wins.last().unwrap() {
        return ExtendedBid::Infinite;
    }
    let mut j = points.len() - 1;
    while j > 0 && wins[j - 1] {
        j -= 1;
    }
    let first = points[j];
    let ratio = first * Money::from_ratio(lattice.denom() as i64, lattice.numer() as i64);
    if ratio.denom() == 1 {
        ExtendedBid::Finite { value: first, inclusive: true }
    } else {
        let below = Money::from_integer((ratio.numer().div_euclid(ratio.denom())) as i64) * lattice;
        ExtendedBid::Finite { value: below, inclusive: false }
    }
}

/// Integer-lattice dense scan used by the examples: step 1/4 up to max+2.
pub fn oracle_critical_int(
    policy: &dyn AllocationPolicy,
    inst: &Instance,
    buyer: BuyerId,
    diffusion: &BuyerSet,
) -> ExtendedBid {
    let top = inst.valuations().iter().copied().max().unwrap_or(Money::ZERO) + int(2);
    oracle_critical_bid(policy, inst, buyer, diffusion, Money::ONE, m("0.25"), top)
}

/// Optimal payments from oracle critical bids: winner pays v*(∅), a loser
/// pays v*(∅) − v*(r), unlucky and uninformed buyers pay 0.
pub fn oracle_optimal_payments(policy: &dyn AllocationPolicy, inst: &Instance) -> Vec<Money> {
    let graph = inst.graph();
    let reports: Vec<Report> = graph.buyers().map(|b| inst.truthful_report(b)).collect();
    let eff = oracle_effective(graph, &reports);
    let profile = ReportProfile::new(graph, eff.clone()).unwrap();
    let winner = policy.allocate(graph, &profile);
    graph
        .buyers()
        .map(|b| {
            if eff[b.index()].is_nil() {
                return Money::ZERO;
            }
            let empty = oracle_critical_int(policy, inst, b, &BuyerSet::new());
            let full = oracle_critical_int(policy, inst, b, graph.neighbors(b));
            match (empty.value(), full.value()) {
                (Some(e), Some(f)) => {
                    if winner == Some(b) {
                        e
                    } else {
                        e - f
                    }
                }
                _ => Money::ZERO,
            }
        })
        .collect()
}
