//! Name-keyed construction of policies and payment rules.
//!
//! Policies: `efficient`, `neighbor-only`, `depth:<d>`, and the negative
//! controls `second-highest`, `needs-diffusion`.
//!
//! Payments: `optimal`, `alpha:<a>`, `vcg`, and the negative controls
//! `first-price`, `flipped-lose`, `shifted-lose:<c>`, `surcharge:<c>`,
//! `alpha-unanchored:<a>`.

use crate::error::{Error, Result};
use crate::mechanisms::controls::{
    parse_amount, FirstPricePayment, FlippedLosePayment, NeedsDiffusionPolicy, SecondHighestPolicy,
    ShiftedLosePayment, SurchargePayment, UnanchoredAlphaPayment,
};
use crate::mechanisms::{
    AllocationPolicy, AlphaFamilyPayment, DepthBoundedPolicy, EfficientPolicy, NeighborOnlyPolicy,
    OptimalPayment, PaymentRule, VcgPayment,
};

pub const POLICY_NAMES: &[&str] = &["efficient", "neighbor-only", "depth:<d>", "second-highest", "needs-diffusion"];

pub const PAYMENT_NAMES: &[&str] = &[
    "optimal",
    "alpha:<a>",
    "vcg",
    "first-price",
    "flipped-lose",
    "shifted-lose:<c>",
    "surcharge:<c>",
    "alpha-unanchored:<a>",
];

pub fn policy(name: &str) -> Result<Box<dyn AllocationPolicy>> {
    let unknown = || Error::UnknownPolicy(name.to_string());
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    Ok(match (head, arg) {
        ("efficient", None) => Box::new(EfficientPolicy),
        ("neighbor-only", None) => Box::new(NeighborOnlyPolicy),
        ("depth", Some(d)) => {
            let depth: u64 = d.parse().map_err(|_| unknown())?;
            Box::new(DepthBoundedPolicy::new(depth)?)
        }
        ("second-highest", None) => Box::new(SecondHighestPolicy),
        ("needs-diffusion", None) => Box::new(NeedsDiffusionPolicy),
        _ => return Err(unknown()),
    })
}

pub fn payment(name: &str) -> Result<Box<dyn PaymentRule>> {
    let unknown = || Error::UnknownPayment(name.to_string());
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    Ok(match (head, arg) {
        ("optimal", None) => Box::new(OptimalPayment),
        ("vcg", None) => Box::new(VcgPayment),
        ("alpha", Some(a)) => Box::new(AlphaFamilyPayment::new(parse_amount(a, unknown)?)?),
        ("first-price", None) => Box::new(FirstPricePayment),
        ("flipped-lose", None) => Box::new(FlippedLosePayment),
        ("shifted-lose", Some(c)) => Box::new(ShiftedLosePayment { shift: parse_amount(c, unknown)? }),
        ("surcharge", Some(c)) => Box::new(SurchargePayment { surcharge: parse_amount(c, unknown)? }),
        ("alpha-unanchored", Some(a)) => {
            Box::new(UnanchoredAlphaPayment::new(parse_amount(a, unknown)?)?)
        }
        _ => return Err(unknown()),
    })
}
