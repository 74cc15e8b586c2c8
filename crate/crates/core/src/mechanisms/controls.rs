//! Deliberately broken policies and payment rules.
//!
//! Each one violates exactly the property named in its doc comment, so the
//! verifier has something to refute. None of them should be used to sell
//! anything.

use crate::error::{Error, Result};
use crate::mechanisms::{
    critical_anchors, AllocationPolicy, AlphaFamilyPayment, CriticalAnchors, DecoupledPayment,
    OptimalPayment, PaymentRule,
};
use crate::money::Money;
use crate::network::{BuyerId, Report, ReportProfile, SocialGraph};

/// The second-highest participant wins (a lone participant wins outright).
/// Not value-monotonic.
#[derive(Debug, Clone, Copy, Default)]
pub struct SecondHighestPolicy;

impl AllocationPolicy for SecondHighestPolicy {
    fn name(&self) -> String {
        "second-highest".into()
    }

    fn allocate(&self, _graph: &SocialGraph, profile: &ReportProfile) -> Option<BuyerId> {
        let mut ranked: Vec<(Money, BuyerId)> =
            profile.iter().filter_map(|(b, r)| r.bid_value().map(|v| (v, b))).collect();
        // highest bid first, smaller id first among equal bids
        ranked.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        match ranked.len() {
            0 => None,
            1 => Some(ranked[0].1),
            _ => Some(ranked[1].1),
        }
    }
}

/// Highest bidder among participants who diffuse to at least one neighbor.
/// Value-monotonic but not monotonic in the diffusion set.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeedsDiffusionPolicy;

impl AllocationPolicy for NeedsDiffusionPolicy {
    fn name(&self) -> String {
        "needs-diffusion".into()
    }

    fn allocate(&self, _graph: &SocialGraph, profile: &ReportProfile) -> Option<BuyerId> {
        super::highest_bidder(profile, |b| {
            profile.get(b).diffusion().is_some_and(|d| !d.is_empty())
        })
    }
}

/// Winner pays her own bid, losers pay nothing. Bid-dependent.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstPricePayment;

impl PaymentRule for FirstPricePayment {
    fn name(&self) -> String {
        "first-price".into()
    }

    fn decoupled(
        &self,
        _policy: &dyn AllocationPolicy,
        _graph: &SocialGraph,
        profile: &ReportProfile,
        buyer: BuyerId,
    ) -> Result<DecoupledPayment> {
        Ok(match profile.get(buyer) {
            Report::Nil => DecoupledPayment::ZERO,
            Report::Bid { bid, .. } => DecoupledPayment { on_win: *bid, on_lose: Money::ZERO },
        })
    }
}

/// Lose payment `v*(r') − v*(∅)` (the optimal one with its sign flipped) and
/// win payment `lose + v*(r')`, so the critical-difference identity still
/// holds but payments grow with the diffusion set.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlippedLosePayment;

impl PaymentRule for FlippedLosePayment {
    fn name(&self) -> String {
        "flipped-lose".into()
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
                let on_lose = reported - empty;
                DecoupledPayment { on_win: on_lose + reported, on_lose }
            }
        })
    }
}

/// Optimal payment with `shift` added to the lose payment only. Breaks the
/// critical-difference identity (and the lose-payment anchor when positive).
#[derive(Debug, Clone, Copy)]
pub struct ShiftedLosePayment {
    pub shift: Money,
}

impl PaymentRule for ShiftedLosePayment {
    fn name(&self) -> String {
        format!("shifted-lose:{}", self.shift)
    }

    fn decoupled(
        &self,
        policy: &dyn AllocationPolicy,
        graph: &SocialGraph,
        profile: &ReportProfile,
        buyer: BuyerId,
    ) -> Result<DecoupledPayment> {
        let mut d = OptimalPayment.decoupled(policy, graph, profile, buyer)?;
        if !profile.get(buyer).is_nil() {
            d.on_lose += self.shift;
        }
        Ok(d)
    }
}

/// Optimal payment with `surcharge` added to both components. Keeps every
/// incentive property but charges losers who diffuse nothing.
#[derive(Debug, Clone, Copy)]
pub struct SurchargePayment {
    pub surcharge: Money,
}

impl PaymentRule for SurchargePayment {
    fn name(&self) -> String {
        format!("surcharge:{}", self.surcharge)
    }

    fn decoupled(
        &self,
        policy: &dyn AllocationPolicy,
        graph: &SocialGraph,
        profile: &ReportProfile,
        buyer: BuyerId,
    ) -> Result<DecoupledPayment> {
        let mut d = OptimalPayment.decoupled(policy, graph, profile, buyer)?;
        if !profile.get(buyer).is_nil() {
            d.on_win += self.surcharge;
            d.on_lose += self.surcharge;
        }
        Ok(d)
    }
}

/// The alpha family without its report-independent anchor term:
/// win `-α·v*(r')`, lose `-(1+α)·v*(r')`.
#[derive(Debug, Clone, Copy)]
pub struct UnanchoredAlphaPayment {
    alpha: Money,
}

impl UnanchoredAlphaPayment {
    pub fn new(alpha: Money) -> Result<Self> {
        AlphaFamilyPayment::new(alpha)?;
        Ok(UnanchoredAlphaPayment { alpha })
    }
}

impl PaymentRule for UnanchoredAlphaPayment {
    fn name(&self) -> String {
        format!("alpha-unanchored:{}", self.alpha)
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
            CriticalAnchors::Finite { reported, .. } => DecoupledPayment {
                on_win: -(self.alpha * reported),
                on_lose: -((Money::ONE + self.alpha) * reported),
            },
        })
    }
}

pub(crate) fn parse_amount(text: &str, err: impl Fn() -> Error) -> Result<Money> {
    text.parse().map_err(|_| err())
}
