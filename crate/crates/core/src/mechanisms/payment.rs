use crate::error::{Error, Result};
use crate::mechanisms::{AllocationPolicy, DecoupledPayment, PaymentRule};
use crate::money::Money;
use crate::network::{effective_profile, BuyerId, BuyerSet, Report, ReportProfile, SocialGraph};

/// The two critical bids every critical-bid payment rule is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalAnchors {
    /// The buyer reports nil; she pays nothing.
    Absent,
    /// Infinite critical bid for every diffusion choice; she pays nothing.
    Unlucky,
    Finite {
        /// Critical bid when diffusing to nobody.
        empty: Money,
        /// Critical bid under her reported diffusion set.
        reported: Money,
    },
}

/// Critical bids of `buyer` under an empty diffusion set and under her
/// reported one.
pub fn critical_anchors(
    policy: &dyn AllocationPolicy,
    graph: &SocialGraph,
    profile: &ReportProfile,
    buyer: BuyerId,
) -> Result<CriticalAnchors> {
    let Some(diffusion) = profile.get(buyer).diffusion() else {
        return Ok(CriticalAnchors::Absent);
    };
    let empty = policy.critical_bid(graph, profile, buyer, &BuyerSet::new())?;
    let reported = if diffusion.is_empty() {
        empty
    } else {
        policy.critical_bid(graph, profile, buyer, diffusion)?
    };
    match (empty.value(), reported.value()) {
        (None, None) => Ok(CriticalAnchors::Unlucky),
        (None, Some(_)) => Err(Error::NonMonotonic { policy: policy.name(), buyer }),
        (Some(_), None) => Err(Error::UnboundedPayment { policy: policy.name(), buyer }),
        (Some(empty), Some(reported)) => Ok(CriticalAnchors::Finite { empty, reported }),
    }
}

/// Revenue-optimal payment for monotonic policies: the winner pays her
/// critical bid under empty diffusion, a loser pays the (usually negative)
/// difference between that and her critical bid under her reported diffusion.
#[derive(Debug, Clone, Copy, Default)]
pub struct OptimalPayment;

impl PaymentRule for OptimalPayment {
    fn name(&self) -> String {
        "optimal".into()
    }

    fn decoupled(
        &self,
        policy: &dyn AllocationPolicy,
        graph: &SocialGraph,
        profile: &ReportProfile,
        buyer: BuyerId,
    ) -> Result<DecoupledPayment> {
        Ok(match critical_anchors(policy, graph, profile, buyer)? {
            CriticalAnchors::Absent | CriticalAnchors::Unlucky => DecoupledPayment::ZERO,
            CriticalAnchors::Finite { empty, reported } => {
                DecoupledPayment { on_win: empty, on_lose: empty - reported }
            }
        })
    }
}

/// One-parameter family of IC and IR payments:
///
/// * win:  `-α·v*(r') + (1+α)·v*(∅)`
/// * lose: `-(1+α)·v*(r') + (1+α)·v*(∅)`
///
/// `α = 0` is [`OptimalPayment`].
#[derive(Debug, Clone, Copy)]
pub struct AlphaFamilyPayment {
    alpha: Money,
}

impl AlphaFamilyPayment {
    pub fn new(alpha: Money) -> Result<Self> {
        if alpha.is_negative() {
            return Err(Error::NegativeAlpha(alpha.to_string()));
        }
        Ok(AlphaFamilyPayment { alpha })
    }

    pub fn alpha(&self) -> Money {
        self.alpha
    }
}

impl PaymentRule for AlphaFamilyPayment {
    fn name(&self) -> String {
        format!("alpha:{}", self.alpha)
    }

    fn decoupled(
        &self,
        policy: &dyn AllocationPolicy,
        graph: &SocialGraph,
        profile: &ReportProfile,
        buyer: BuyerId,
    ) -> Result<DecoupledPayment> {
        Ok(match critical_anchors(policy, graph, profile, buyer)? {
            CriticalAnchors::Absent | CriticalAnchors::Unlucky => DecoupledPayment::ZERO,
            CriticalAnchors::Finite { empty, reported } => {
                let scale = Money::ONE + self.alpha;
                let anchor = scale * empty;
                DecoupledPayment {
                    on_win: anchor - self.alpha * reported,
                    on_lose: anchor - scale * reported,
                }
            }
        })
    }
}

fn max_bid(profile: &ReportProfile, except: Option<BuyerId>) -> Money {
    profile
        .iter()
        .filter(|(b, _)| Some(*b) != except)
        .filter_map(|(_, r)| r.bid_value())
        .max()
        .unwrap_or(Money::ZERO)
}

/// VCG payments for the efficient policy, computed from welfare directly:
/// `W(without i) − (W − [i wins]·b_i)`. "Without i" means `i` reports nil, so
/// the buyers only she could inform drop out as well. The allocation policy
/// argument is not consulted.
#[derive(Debug, Clone, Copy, Default)]
pub struct VcgPayment;

impl PaymentRule for VcgPayment {
    fn name(&self) -> String {
        "vcg".into()
    }

    fn decoupled(
        &self,
        _policy: &dyn AllocationPolicy,
        graph: &SocialGraph,
        profile: &ReportProfile,
        buyer: BuyerId,
    ) -> Result<DecoupledPayment> {
        if profile.get(buyer).is_nil() {
            return Ok(DecoupledPayment::ZERO);
        }
        let without = effective_profile(graph, &profile.with_report(buyer, Report::Nil));
        let welfare_without = max_bid(&without, None);
        // If i loses, the welfare is the best bid among the others.
        let others_best = max_bid(profile, Some(buyer));
        Ok(DecoupledPayment { on_win: welfare_without, on_lose: welfare_without - others_best })
    }
}
