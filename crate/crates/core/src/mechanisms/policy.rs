use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::mechanisms::AllocationPolicy;
use crate::network::{BuyerId, Report, ReportProfile, SocialGraph};

/// Highest non-nil bid among eligible buyers; ties go to the smallest id.
pub fn highest_bidder(profile: &ReportProfile, eligible: impl Fn(BuyerId) -> bool) -> Option<BuyerId> {
    let mut best = None;
    for (buyer, report) in profile.iter() {
        let Some(bid) = report.bid_value() else { continue };
        if !eligible(buyer) {
            continue;
        }
        match best {
            Some((_, top)) if bid <= top => {}
            _ => best = Some((buyer, bid)),
        }
    }
    best.map(|(b, _)| b)
}

/// Highest bid among all informed participants wins.
#[derive(Debug, Clone, Copy, Default)]
pub struct EfficientPolicy;

impl AllocationPolicy for EfficientPolicy {
    fn name(&self) -> String {
        "efficient".into()
    }

    fn allocate(&self, _graph: &SocialGraph, profile: &ReportProfile) -> Option<BuyerId> {
        highest_bidder(profile, |_| true)
    }
}

/// Only the seller's direct neighbors are eligible, which reduces the sale to
/// an ordinary single-item auction among them.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeighborOnlyPolicy;

impl AllocationPolicy for NeighborOnlyPolicy {
    fn name(&self) -> String {
        "neighbor-only".into()
    }

    fn allocate(&self, graph: &SocialGraph, profile: &ReportProfile) -> Option<BuyerId> {
        let neighbors = graph.seller_neighbors();
        highest_bidder(profile, |b| neighbors.contains(&b))
    }
}

/// Highest bidder among buyers within `depth` diffusion hops of the seller.
/// The seller's neighbors sit at depth 1.
#[derive(Debug, Clone, Copy)]
pub struct DepthBoundedPolicy {
    depth: u64,
}

impl DepthBoundedPolicy {
    pub fn new(depth: u64) -> Result<Self> {
        if depth < 1 {
            return Err(Error::BadDepth(depth));
        }
        Ok(DepthBoundedPolicy { depth })
    }

    pub fn depth(&self) -> u64 {
        self.depth
    }
}

/// Hop distance from the seller along reported diffusion edges of
/// participating buyers; `None` for uninformed buyers.
pub(crate) fn diffusion_depths(graph: &SocialGraph, profile: &ReportProfile) -> Vec<Option<u64>> {
    let mut depth = vec![None; graph.buyer_count()];
    let mut queue = VecDeque::new();
    for &b in graph.seller_neighbors() {
        depth[b.index()] = Some(1);
        queue.push_back(b);
    }
    while let Some(b) = queue.pop_front() {
        let d = depth[b.index()].expect("queued buyers have a depth");
        if let Report::Bid { diffusion, .. } = profile.get(b) {
            for &next in diffusion {
                if depth[next.index()].is_none() {
                    depth[next.index()] = Some(d + 1);
                    queue.push_back(next);
                }
            }
        }
    }
    depth
}

impl AllocationPolicy for DepthBoundedPolicy {
    fn name(&self) -> String {
        format!("depth:{}", self.depth)
    }

    fn allocate(&self, graph: &SocialGraph, profile: &ReportProfile) -> Option<BuyerId> {
        let depths = diffusion_depths(graph, profile);
        highest_bidder(profile, |b| depths[b.index()].is_some_and(|d| d <= self.depth))
    }
}
