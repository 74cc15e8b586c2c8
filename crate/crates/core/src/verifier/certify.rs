use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::mechanisms::{run_mechanism, AllocationPolicy, PaymentRule};
use crate::verifier::{
    check_alloc_monotonic, check_budget_balance, check_critical_bid_monotonic,
    check_decoupled_properties, check_feasibility, check_ic, check_ir, check_value_monotonic,
    CheckConfig, Property, PropertyReport,
};

/// Order in which properties appear in a certification report.
const ORDER: [Property; 11] = [
    Property::Feasibility,
    Property::P1,
    Property::P2,
    Property::P3,
    Property::P4,
    Property::P5,
    Property::IC,
    Property::IR,
    Property::AllocMonotonic,
    Property::CriticalBidMonotonic,
    Property::BudgetBalance,
];

/// Properties the verdict depends on.
const VERDICT: [Property; 8] = [
    Property::Feasibility,
    Property::P1,
    Property::P2,
    Property::P3,
    Property::P4,
    Property::P5,
    Property::IC,
    Property::IR,
];

pub const CERTIFIED: &str = "IC+IR certified at desk scale";
pub const NOT_CERTIFIED: &str = "not certified";

/// A check that could not be evaluated because the mechanism itself is
/// ill-defined on that instance (e.g. unbounded payments).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationError {
    pub instance: usize,
    pub property: Property,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub policy: String,
    pub payment: String,
    pub instances: usize,
    pub certified: bool,
    pub verdict: String,
    pub properties: Vec<PropertyReport>,
    pub errors: Vec<EvaluationError>,
}

impl CertificationReport {
    pub fn property(&self, property: Property) -> Option<&PropertyReport> {
        self.properties.iter().find(|p| p.property == property)
    }

    pub fn holds(&self, property: Property) -> bool {
        self.property(property).is_some_and(|p| p.holds)
    }
}

/// Input problems abort the run; mechanism failures are recorded.
fn is_mechanism_failure(err: &Error) -> bool {
    matches!(
        err,
        Error::UnsupportedPolicy(_)
            | Error::NonMonotonic { .. }
            | Error::UnboundedPayment { .. }
            | Error::InfeasibleAllocation { .. }
    )
}

type Outcome = std::result::Result<PropertyReport, (Property, Error)>;

fn tag(property: Property, r: Result<PropertyReport>) -> Outcome {
    r.map_err(|e| (property, e))
}

fn check_instance(
    policy: &dyn AllocationPolicy,
    payment: &dyn PaymentRule,
    instance: &Instance,
    config: &CheckConfig,
) -> Vec<Outcome> {
    let mut out = vec![
        tag(Property::Feasibility, check_feasibility(policy, instance, config)),
        tag(Property::P1, check_value_monotonic(policy, instance, config)),
    ];
    match check_decoupled_properties(policy, payment, instance, config) {
        Ok(reports) => out.extend(reports.into_iter().map(Ok)),
        Err(e) => {
            for p in [Property::P2, Property::P3, Property::P4, Property::P5] {
                out.push(Err((p, e.clone())));
            }
        }
    }
    out.push(tag(Property::IC, check_ic(policy, payment, instance, config)));
    out.push(tag(Property::IR, check_ir(policy, payment, instance, config)));
    out.push(tag(Property::AllocMonotonic, check_alloc_monotonic(policy, instance, config)));
    out.push(tag(
        Property::CriticalBidMonotonic,
        check_critical_bid_monotonic(policy, instance, config),
    ));
    let budget = run_mechanism(policy, payment, instance.graph(), &instance.truthful_profile())
        .map(|o| check_budget_balance(&o));
    out.push(tag(Property::BudgetBalance, budget));
    out
}

/// Runs every property check on every instance and aggregates the results.
///
/// Instances are checked in parallel on the current rayon pool; merging is by
/// instance index, so the canonical witness of each property is the one from
/// the lowest-indexed failing instance.
pub fn certify_mechanism(
    policy: &dyn AllocationPolicy,
    payment: &dyn PaymentRule,
    instances: &[Instance],
    config: &CheckConfig,
) -> Result<CertificationReport> {
    config.validate()?;
    let per_instance: Vec<Vec<Outcome>> = instances
        .par_iter()
        .map(|inst| check_instance(policy, payment, inst, config))
        .collect();

    let mut merged: Vec<PropertyReport> = ORDER.iter().map(|&p| PropertyReport::new(p)).collect();
    let mut errors = Vec::new();
    for (index, outcomes) in per_instance.into_iter().enumerate() {
        for outcome in outcomes {
            match outcome {
                Ok(report) => {
                    let slot = merged
                        .iter_mut()
                        .find(|m| m.property == report.property)
                        .expect("every checked property is listed");
                    slot.checked += report.checked;
                    if !report.holds && slot.holds {
                        slot.holds = false;
                        slot.instance = Some(index);
                        slot.witness = report.witness;
                    }
                }
                Err((property, err)) if is_mechanism_failure(&err) => {
                    errors.push(EvaluationError { instance: index, property, message: err.to_string() });
                }
                Err((_, err)) => return Err(err),
            }
        }
    }

    let certified = errors.is_empty()
        && VERDICT
            .iter()
            .all(|p| merged.iter().any(|m| m.property == *p && m.holds));
    Ok(CertificationReport {
        policy: policy.name(),
        payment: payment.name(),
        instances: instances.len(),
        certified,
        verdict: if certified { CERTIFIED } else { NOT_CERTIFIED }.to_string(),
        properties: merged,
        errors,
    })
}
