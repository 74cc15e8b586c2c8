//! Social graph, reports, and the diffusion closure.
//!
//! A seller starts the sale by telling her direct neighbors. Every informed
//! buyer who participates reports a bid together with the subset of her own
//! neighbors she passes the information on to. The set of informed buyers is
//! therefore a fixed point of the reported diffusion sets, and every buyer
//! outside that fixed point is treated as reporting nothing (`nil`).

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::money::Money;

/// Default bound on neighbor-set size for subset enumeration.
pub const DEFAULT_SUBSET_CAP: usize = 12;

/// A buyer node. Ids are dense `0..n`; the seller has no id.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BuyerId(pub u32);

impl BuyerId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for BuyerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for BuyerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub type BuyerSet = BTreeSet<BuyerId>;

/// Directed reachability structure: who the seller can inform directly and
/// who each buyer could inform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    seller_neighbors: BuyerSet,
    neighbors: Vec<BuyerSet>,
}

impl SocialGraph {
    pub fn new(seller_neighbors: BuyerSet, neighbors: Vec<BuyerSet>) -> Result<Self> {
        let n = neighbors.len();
        let check = |id: &BuyerId| {
            if id.index() < n {
                Ok(())
            } else {
                Err(Error::UnknownBuyer(id.0, n))
            }
        };
        seller_neighbors.iter().try_for_each(check)?;
        for (i, set) in neighbors.iter().enumerate() {
            set.iter().try_for_each(check)?;
            let me = BuyerId(i as u32);
            if set.contains(&me) {
                return Err(Error::SelfLoop(me));
            }
        }
        Ok(SocialGraph { seller_neighbors, neighbors })
    }

    /// Builds a graph from raw id lists, rejecting duplicate entries.
    pub fn from_lists(seller_neighbors: &[u32], neighbors: &[Vec<u32>]) -> Result<Self> {
        fn collect(owner: &str, ids: &[u32]) -> Result<BuyerSet> {
            let mut set = BuyerSet::new();
            for &id in ids {
                if !set.insert(BuyerId(id)) {
                    return Err(Error::DuplicateNeighbor {
                        owner: owner.to_string(),
                        neighbor: BuyerId(id),
                    });
                }
            }
            Ok(set)
        }
        let seller = collect("the seller", seller_neighbors)?;
        let lists = neighbors
            .iter()
            .enumerate()
            .map(|(i, ids)| collect(&format!("buyer {i}"), ids))
            .collect::<Result<Vec<_>>>()?;
        SocialGraph::new(seller, lists)
    }

    pub fn buyer_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn buyers(&self) -> impl Iterator<Item = BuyerId> {
        (0..self.neighbors.len() as u32).map(BuyerId)
    }

    pub fn seller_neighbors(&self) -> &BuyerSet {
        &self.seller_neighbors
    }

    /// The true neighbor set of `buyer`.
    pub fn neighbors(&self, buyer: BuyerId) -> &BuyerSet {
        &self.neighbors[buyer.index()]
    }

    /// Buyers reachable from the seller when everyone diffuses to everyone.
    pub fn reachable_from_seller(&self) -> BuyerSet {
        let mut seen = vec![false; self.buyer_count()];
        let mut queue: VecDeque<BuyerId> = self.seller_neighbors.iter().copied().collect();
        for b in &queue {
            seen[b.index()] = true;
        }
        while let Some(b) = queue.pop_front() {
            for &next in self.neighbors(b) {
                if !seen[next.index()] {
                    seen[next.index()] = true;
                    queue.push_back(next);
                }
            }
        }
        self.buyers().filter(|b| seen[b.index()]).collect()
    }
}

/// A buyer's private type: her valuation and her true neighbor set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrueType {
    pub valuation: Money,
    pub neighbors: BuyerSet,
}

/// What a buyer submits: nothing, or a bid plus the neighbors she informs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Option<BidReport>", into = "Option<BidReport>")]
pub enum Report {
    Nil,
    Bid { bid: Money, diffusion: BuyerSet },
}

#[derive(Serialize, Deserialize)]
struct BidReport {
    bid: Money,
    diffusion: BuyerSet,
}

impl From<Option<BidReport>> for Report {
    fn from(value: Option<BidReport>) -> Self {
        match value {
            None => Report::Nil,
            Some(BidReport { bid, diffusion }) => Report::Bid { bid, diffusion },
        }
    }
}

impl From<Report> for Option<BidReport> {
    fn from(value: Report) -> Self {
        match value {
            Report::Nil => None,
            Report::Bid { bid, diffusion } => Some(BidReport { bid, diffusion }),
        }
    }
}

impl Report {
    pub fn bid(bid: Money, diffusion: BuyerSet) -> Result<Self> {
        if bid.is_negative() {
            return Err(Error::NegativeAmount(bid.to_string()));
        }
        Ok(Report::Bid { bid, diffusion })
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Report::Nil)
    }

    pub fn bid_value(&self) -> Option<Money> {
        match self {
            Report::Nil => None,
            Report::Bid { bid, .. } => Some(*bid),
        }
    }

    pub fn diffusion(&self) -> Option<&BuyerSet> {
        match self {
            Report::Nil => None,
            Report::Bid { diffusion, .. } => Some(diffusion),
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Report::Nil => f.write_str("nil"),
            Report::Bid { bid, diffusion } => {
                write!(f, "({bid}, {{")?;
                for (k, b) in diffusion.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{b}")?;
                }
                f.write_str("})")
            }
        }
    }
}

/// One report per buyer, indexed by [`BuyerId`], feasible for a given graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ReportProfile {
    reports: Vec<Report>,
}

impl ReportProfile {
    /// Validates every report against `graph`: nonnegative bids and diffusion
    /// sets drawn from the buyer's true neighbors.
    pub fn new(graph: &SocialGraph, reports: Vec<Report>) -> Result<Self> {
        if reports.len() != graph.buyer_count() {
            return Err(Error::ProfileSize { expected: graph.buyer_count(), got: reports.len() });
        }
        let profile = ReportProfile { reports };
        for buyer in graph.buyers() {
            check_report(graph, buyer, profile.get(buyer))?;
        }
        Ok(profile)
    }

    /// Everyone nil.
    pub fn empty(graph: &SocialGraph) -> Self {
        ReportProfile { reports: vec![Report::Nil; graph.buyer_count()] }
    }

    pub fn len(&self) -> usize {
        self.reports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reports.is_empty()
    }

    pub fn get(&self, buyer: BuyerId) -> &Report {
        &self.reports[buyer.index()]
    }

    pub fn reports(&self) -> &[Report] {
        &self.reports
    }

    pub fn iter(&self) -> impl Iterator<Item = (BuyerId, &Report)> {
        self.reports.iter().enumerate().map(|(i, r)| (BuyerId(i as u32), r))
    }

    /// Replaces one buyer's report after validating it.
    pub fn set(&mut self, graph: &SocialGraph, buyer: BuyerId, report: Report) -> Result<()> {
        check_report(graph, buyer, &report)?;
        self.reports[buyer.index()] = report;
        Ok(())
    }

    /// A copy with `buyer`'s report replaced; `report` must already be feasible.
    pub(crate) fn with_report(&self, buyer: BuyerId, report: Report) -> Self {
        let mut next = self.clone();
        next.reports[buyer.index()] = report;
        next
    }

    pub(crate) fn set_bid_unchecked(&mut self, buyer: BuyerId, value: Money) {
        if let Report::Bid { bid, .. } = &mut self.reports[buyer.index()] {
            *bid = value;
        }
    }
}

fn check_report(graph: &SocialGraph, buyer: BuyerId, report: &Report) -> Result<()> {
    if let Report::Bid { bid, diffusion } = report {
        if bid.is_negative() {
            return Err(Error::NegativeAmount(bid.to_string()));
        }
        let allowed = graph.neighbors(buyer);
        if let Some(&target) = diffusion.iter().find(|t| !allowed.contains(t)) {
            return Err(Error::InfeasibleDiffusion { buyer, target });
        }
    }
    Ok(())
}

/// Informed flags indexed by buyer.
pub(crate) fn informed_mask(graph: &SocialGraph, profile: &ReportProfile) -> Vec<bool> {
    let mut informed = vec![false; graph.buyer_count()];
    let mut queue = VecDeque::with_capacity(graph.buyer_count());
    for &b in graph.seller_neighbors() {
        informed[b.index()] = true;
        queue.push_back(b);
    }
    while let Some(b) = queue.pop_front() {
        if let Report::Bid { diffusion, .. } = profile.get(b) {
            for &next in diffusion {
                if !informed[next.index()] {
                    informed[next.index()] = true;
                    queue.push_back(next);
                }
            }
        }
    }
    informed
}

/// Least fixed point of the diffusion closure: the seller's neighbors, plus
/// anyone named in the diffusion set of an informed, participating buyer.
pub fn informed_set(graph: &SocialGraph, profile: &ReportProfile) -> BuyerSet {
    let mask = informed_mask(graph, profile);
    graph.buyers().filter(|b| mask[b.index()]).collect()
}

/// Sets every uninformed buyer's report to nil.
pub fn effective_profile(graph: &SocialGraph, profile: &ReportProfile) -> ReportProfile {
    let mask = informed_mask(graph, profile);
    let reports = profile
        .reports
        .iter()
        .zip(mask)
        .map(|(r, informed)| if informed { r.clone() } else { Report::Nil })
        .collect();
    ReportProfile { reports }
}

/// All subsets of `set`, ordered by their bitmask over the sorted elements
/// (so the empty set comes first and `set` itself last).
pub fn subsets(set: &BuyerSet) -> Vec<BuyerSet> {
    let items: Vec<BuyerId> = set.iter().copied().collect();
    (0u64..1 << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, b)| *b)
                .collect()
        })
        .collect()
}

/// [`subsets`] of `buyer`'s true neighbors, refusing sets larger than `cap`.
pub fn neighbor_subsets(graph: &SocialGraph, buyer: BuyerId, cap: usize) -> Result<Vec<BuyerSet>> {
    let size = graph.neighbors(buyer).len();
    if size > cap {
        return Err(Error::EnumerationCap { buyer, size, cap });
    }
    Ok(subsets(graph.neighbors(buyer)))
}

/// Every feasible report of `buyer`: each candidate bid crossed with each
/// subset of her true neighbors (bid-major order), followed by nil.
pub fn deviations(
    graph: &SocialGraph,
    buyer: BuyerId,
    bid_candidates: &[Money],
    cap: usize,
) -> Result<Vec<Report>> {
    let valid = !bid_candidates.is_empty()
        && !bid_candidates[0].is_negative()
        && bid_candidates.windows(2).all(|w| w[0] < w[1]);
    if !valid {
        return Err(Error::BadBidCandidates);
    }
    let sets = neighbor_subsets(graph, buyer, cap)?;
    let mut out = Vec::with_capacity(bid_candidates.len() * sets.len() + 1);
    for &bid in bid_candidates {
        for diffusion in &sets {
            out.push(Report::Bid { bid, diffusion: diffusion.clone() });
        }
    }
    out.push(Report::Nil);
    Ok(out)
}

/// Outcome of comparing two reports under the type order
/// "higher bid and smaller diffusion set".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TypeOrdering {
    GreaterEqual,
    LessEqual,
    Equal,
    Incomparable,
}

/// `t1 ⪰ t2` iff `bid1 >= bid2` and `diffusion1 ⊆ diffusion2`.
pub fn compare_types(t1: &Report, t2: &Report) -> Result<TypeOrdering> {
    let (Report::Bid { bid: b1, diffusion: d1 }, Report::Bid { bid: b2, diffusion: d2 }) = (t1, t2)
    else {
        return Err(Error::NilComparison);
    };
    let ge = b1 >= b2 && d1.is_subset(d2);
    let le = b2 >= b1 && d2.is_subset(d1);
    Ok(match (ge, le) {
        (true, true) => TypeOrdering::Equal,
        (true, false) => TypeOrdering::GreaterEqual,
        (false, true) => TypeOrdering::LessEqual,
        (false, false) => TypeOrdering::Incomparable,
    })
}
