mod common;

use std::sync::OnceLock;

use common::*;
use dak::mechanisms::{registry, run_mechanism, AllocationPolicy, EfficientPolicy, OptimalPayment, PaymentRule};
use dak::verifier::{
    certify_mechanism, check_alloc_monotonic, check_budget_balance, check_decoupled_properties, check_ic,
    check_ir, check_revenue_dominance, check_value_monotonic, expected_deviation_count, CertificationReport,
    CheckConfig, Property, PropertyReport, Witness,
};
use dak::{BuyerId, Error, Instance, Money, ReportProfile};

fn policy(name: &str) -> Box<dyn AllocationPolicy> {
    registry::policy(name).unwrap()
}

fn payment(name: &str) -> Box<dyn PaymentRule> {
    registry::payment(name).unwrap()
}

fn grid(values: &[i64]) -> CheckConfig {
    CheckConfig::new(values.iter().map(|&v| int(v)).collect()).unwrap()
}

fn replays(report: &PropertyReport, inst: &Instance, pol: &str, pay: &str) -> bool {
    assert!(!report.holds, "{} holds", report.property);
    report.witness.as_ref().expect("refuted without witness").replay(inst, &*policy(pol), &*payment(pay)).unwrap()
}

#[test]
fn value_monotonicity() {
    let pair = instance(&[0, 1], &[(1, &[]), (2, &[])]);
    let cfg = grid(&[1, 2, 3]);
    assert!(check_value_monotonic(&EfficientPolicy, &pair, &cfg).unwrap().holds);

    let report = check_value_monotonic(&*policy("second-highest"), &pair, &cfg).unwrap();
    assert!(replays(&report, &pair, "second-highest", "optimal"));
    let Some(Witness::Allocation { buyer, wins_at, loses_at }) = &report.witness else { panic!() };
    assert_eq!(*buyer, BuyerId(0));
    assert!(wins_at.bid_value().unwrap() < loses_at.bid_value().unwrap());

    let single = instance(&[0], &[(2, &[])]);
    let report = check_value_monotonic(&EfficientPolicy, &single, &cfg).unwrap();
    assert!(report.holds && report.checked >= 3);
}

#[test]
fn allocation_monotonicity() {
    let cfg = config4();
    for inst in random_instances(40, 6, 500) {
        assert!(check_alloc_monotonic(&EfficientPolicy, &inst, &cfg).unwrap().holds);
        assert!(check_alloc_monotonic(&*policy("neighbor-only"), &inst, &cfg).unwrap().holds);
    }
    let line = instance(&[0], &[(2, &[1]), (1, &[])]);
    let report = check_alloc_monotonic(&*policy("needs-diffusion"), &line, &config4()).unwrap();
    assert!(replays(&report, &line, "needs-diffusion", "optimal"));
}

#[test]
fn ic_on_the_line() {
    let line = line();
    let cfg = grid(&[0, 2, 10]);
    let report = check_ic(&EfficientPolicy, &OptimalPayment, &line, &cfg).unwrap();
    assert!(report.holds);
    assert_eq!(report.checked, expected_deviation_count(&line, &cfg));
    let out = run_mechanism(&EfficientPolicy, &OptimalPayment, line.graph(), &line.truthful_profile()).unwrap();
    assert_eq!(Money::ZERO - out.payment(BuyerId(0)), int(10));

    let report = check_ic(&EfficientPolicy, &*payment("first-price"), &line, &cfg).unwrap();
    assert!(replays(&report, &line, "efficient", "first-price"));
    // a hides b and wins alone at a price below her value.
    let Some(Witness::Deviation { buyer, deviation, deviation_utility, .. }) = &report.witness else { panic!() };
    assert_eq!(*buyer, BuyerId(0));
    assert_eq!(deviation.diffusion(), Some(&set(&[])));
    assert!(*deviation_utility > Money::ZERO);

    // b loses the tie at 2; with the lose payment raised by 1 she prefers to
    // outbid a and pay v*(∅) = 2.
    let tie = instance(&[0, 1], &[(2, &[]), (2, &[])]);
    let mut cfg = grid(&[1, 2, 3]);
    cfg.include_nil = false;
    let report = check_ic(&EfficientPolicy, &*payment("shifted-lose:1"), &tie, &cfg).unwrap();
    assert!(replays(&report, &tie, "efficient", "shifted-lose:1"));
    let Some(Witness::Deviation { buyer, deviation, .. }) = &report.witness else { panic!() };
    assert_eq!((*buyer, deviation.bid_value()), (BuyerId(1), Some(m("2.5"))));
}

#[test]
fn ic_requires_true_valuations_on_the_grid() {
    let err = check_ic(&EfficientPolicy, &OptimalPayment, &line(), &grid(&[1, 2])).unwrap_err();
    assert!(matches!(err, Error::GridMissingValuation { buyer: BuyerId(1), .. }));
}

#[test]
fn individual_rationality() {
    let cfg = config4();
    for inst in random_instances(40, 6, 900) {
        assert!(check_ir(&EfficientPolicy, &OptimalPayment, &inst, &cfg).unwrap().holds);
        // A zero anchor makes both payments nonpositive, so IR cannot fail.
        assert!(check_ir(&EfficientPolicy, &*payment("alpha-unanchored:1"), &inst, &cfg).unwrap().holds);
    }
    let zero = instance(&[0, 1], &[(0, &[]), (3, &[])]);
    let out = run_mechanism(&EfficientPolicy, &OptimalPayment, zero.graph(), &zero.truthful_profile()).unwrap();
    assert_eq!(out.payment(BuyerId(0)), Money::ZERO);
    assert!(check_ir(&EfficientPolicy, &OptimalPayment, &zero, &grid(&[0, 3])).unwrap().holds);

    let pair = instance(&[0, 1], &[(1, &[]), (2, &[])]);
    let report = check_ir(&EfficientPolicy, &*payment("surcharge:1"), &pair, &grid(&[1, 2])).unwrap();
    assert!(replays(&report, &pair, "efficient", "surcharge:1"));
}

#[test]
fn decoupled_properties() {
    let cfg = config4();
    let rules = ["optimal", "alpha:0", "alpha:0.5", "alpha:3"];
    for inst in random_instances(40, 6, 1300) {
        for rule in rules {
            let reports = check_decoupled_properties(&EfficientPolicy, &*payment(rule), &inst, &cfg).unwrap();
            let props: Vec<Property> = reports.iter().map(|r| r.property).collect();
            assert_eq!(props, [Property::P2, Property::P3, Property::P4, Property::P5]);
            assert!(reports.iter().all(|r| r.holds), "{rule}: {reports:?}");
        }
    }
    let line = line();
    let reports = check_decoupled_properties(&EfficientPolicy, &*payment("flipped-lose"), &line, &cfg).unwrap();
    assert!(replays(&reports[2], &line, "efficient", "flipped-lose"));
    let reports = check_decoupled_properties(&EfficientPolicy, &*payment("shifted-lose:1"), &line, &cfg).unwrap();
    assert!(replays(&reports[1], &line, "efficient", "shifted-lose:1"));
    assert!(replays(&reports[3], &line, "efficient", "shifted-lose:1"));
}

#[test]
fn budget_balance() {
    let line = line();
    let out = run_mechanism(&EfficientPolicy, &OptimalPayment, line.graph(), &line.truthful_profile()).unwrap();
    let report = check_budget_balance(&out);
    assert!(replays(&report, &line, "efficient", "optimal"));
    assert_eq!(report.witness, Some(Witness::Deficit { revenue: int(-8) }));

    let nbr = policy("neighbor-only");
    for inst in random_instances(60, 6, 40) {
        let out = run_mechanism(&*nbr, &OptimalPayment, inst.graph(), &inst.truthful_profile()).unwrap();
        assert!(check_budget_balance(&out).holds);
    }
    let empty = ReportProfile::empty(line.graph());
    let out = run_mechanism(&EfficientPolicy, &OptimalPayment, line.graph(), &empty).unwrap();
    assert_eq!(out.revenue, Money::ZERO);
    assert!(check_budget_balance(&out).holds);
}

#[test]
fn revenue_dominance() {
    let set = random_instances(100, 6, 2000);
    let opt = payment("optimal");
    assert!(check_revenue_dominance(&EfficientPolicy, &*opt, &*payment("alpha:0.5"), &set).unwrap().holds);
    let same = check_revenue_dominance(&EfficientPolicy, &*opt, &*opt, &set).unwrap();
    assert!(same.holds && same.checked == 100);

    let one = payment("alpha:1");
    let report = check_revenue_dominance(&EfficientPolicy, &*one, &*opt, &set).unwrap();
    assert!(!report.holds);
    let witness = report.witness.unwrap();
    assert!(witness.replay_dominance(&set, &EfficientPolicy, &*one, &*opt).unwrap());
}

#[test]
fn certification_verdicts() {
    let set = random_instances(100, 6, 7);
    let cfg = config4();
    let report = certify_mechanism(&EfficientPolicy, &OptimalPayment, &set, &cfg).unwrap();
    assert!(report.certified, "{report:?}");
    assert_eq!(report.verdict, "IC+IR certified at desk scale");
    assert!(!report.holds(Property::BudgetBalance));

    let report = certify_mechanism(&EfficientPolicy, &*payment("first-price"), &set, &cfg).unwrap();
    assert!(!report.certified);
    let ic = report.property(Property::IC).unwrap();
    assert!(replays(ic, &set[ic.instance.unwrap()], "efficient", "first-price"));

    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["properties"][6]["property"], "IC");
    assert_eq!(json["properties"][6]["holds"], false);
    assert!(json["properties"][6]["witness"]["kind"].is_string());
}

#[test]
fn unsupported_mechanisms_are_recorded_not_fatal() {
    let set = random_instances(30, 6, 3);
    let report = certify_mechanism(&*policy("needs-diffusion"), &OptimalPayment, &set, &config4()).unwrap();
    assert!(!report.certified);
    assert!(!report.errors.is_empty());
    assert!(!report.holds(Property::AllocMonotonic));
}

#[test]
fn deviation_count_is_analytic() {
    let cfg = config4();
    for inst in random_instances(50, 6, 11) {
        let report = check_ic(&EfficientPolicy, &OptimalPayment, &inst, &cfg).unwrap();
        assert_eq!(report.checked, expected_deviation_count(&inst, &cfg));
        let per_buyer: u64 = inst
            .graph()
            .buyers()
            .map(|b| 9 * (1u64 << inst.graph().neighbors(b).len()) + 1)
            .sum();
        assert_eq!(report.checked, per_buyer);
    }
}

const MATRIX_POLICIES: [&str; 5] = ["efficient", "neighbor-only", "depth:2", "second-highest", "needs-diffusion"];
const MATRIX_PAYMENTS: [&str; 10] = [
    "optimal",
    "alpha:0",
    "alpha:0.5",
    "alpha:1",
    "vcg",
    "first-price",
    "flipped-lose",
    "shifted-lose:1",
    "surcharge:1",
    "alpha-unanchored:1",
];

/// The base instances plus, for every buyer and every other grid value, a
/// copy where that buyer's valuation is replaced. Incentive properties
/// quantify over each buyer's true type, so every type on the grid is tried.
fn type_variants(base: &[Instance]) -> Vec<Instance> {
    let mut out = Vec::new();
    for inst in base {
        out.push(inst.clone());
        for b in inst.graph().buyers() {
            for g in grid4() {
                if g != inst.valuation(b) {
                    let mut vals = inst.valuations().to_vec();
                    vals[b.index()] = g;
                    out.push(Instance::new(inst.graph().clone(), vals).unwrap());
                }
            }
        }
    }
    out
}

struct Matrix {
    instances: Vec<Instance>,
    /// IC deviations exclude nil.
    typed: Vec<CertificationReport>,
    /// Whether IC holds on every instance when nil is a deviation, for the
    /// error-free entries of `typed`.
    ic_with_nil: Vec<Option<bool>>,
}

fn matrix() -> &'static Matrix {
    static M: OnceLock<Matrix> = OnceLock::new();
    M.get_or_init(|| {
        let instances = type_variants(&random_instances(30, 6, 31_337));
        let mut typed_cfg = config4();
        typed_cfg.include_nil = false;
        let (mut typed, mut ic_with_nil) = (Vec::new(), Vec::new());
        for pol in MATRIX_POLICIES {
            for pay in MATRIX_PAYMENTS {
                let (p, x) = (policy(pol), payment(pay));
                let report = certify_mechanism(&*p, &*x, &instances, &typed_cfg).unwrap();
                ic_with_nil.push(report.errors.is_empty().then(|| {
                    instances.iter().all(|inst| check_ic(&*p, &*x, inst, &config4()).unwrap().holds)
                }));
                typed.push(report);
            }
        }
        Matrix { instances, typed, ic_with_nil }
    })
}

fn holds_all(r: &CertificationReport, props: &[Property]) -> bool {
    props.iter().all(|&p| r.holds(p))
}

const P1_P4: [Property; 4] = [Property::P1, Property::P2, Property::P3, Property::P4];
const P1_P5: [Property; 5] = [Property::P1, Property::P2, Property::P3, Property::P4, Property::P5];

#[test]
fn every_witness_replays() {
    let m = matrix();
    for report in &m.typed {
        for p in &report.properties {
            if p.holds {
                continue;
            }
            let inst = &m.instances[p.instance.unwrap()];
            let ok = p.witness.as_ref().unwrap().replay(inst, &*policy(&report.policy), &*payment(&report.payment));
            assert!(ok.unwrap(), "({}, {}) {}", report.policy, report.payment, p.property);
        }
    }
}

#[test]
fn ic_iff_p1_to_p4() {
    let m = matrix();
    let mut evaluated = 0;
    for r in m.typed.iter().filter(|r| r.errors.is_empty()) {
        evaluated += 1;
        assert_eq!(r.holds(Property::IC), holds_all(r, &P1_P4), "({}, {})", r.policy, r.payment);
    }
    assert!(evaluated >= 30, "{evaluated}");
}

#[test]
fn ic_with_nil_iff_p1_to_p5() {
    let m = matrix();
    for (r, ic) in m.typed.iter().zip(&m.ic_with_nil) {
        if let Some(ic) = ic {
            assert_eq!(*ic, holds_all(r, &P1_P5), "({}, {})", r.policy, r.payment);
        }
    }
}

#[test]
fn ir_iff_p5_among_ic_mechanisms() {
    let m = matrix();
    let mut broken = 0;
    for r in m.typed.iter().filter(|r| r.errors.is_empty() && r.holds(Property::IC)) {
        assert_eq!(r.holds(Property::IR), r.holds(Property::P5), "({}, {})", r.policy, r.payment);
        broken += usize::from(!r.holds(Property::P5));
    }
    assert!(broken > 0);
}

#[test]
fn alloc_monotonic_iff_critical_bids_monotonic() {
    for r in &matrix().typed {
        let alloc = r.holds(Property::AllocMonotonic);
        let crit = r.holds(Property::CriticalBidMonotonic)
            && !r.errors.iter().any(|e| e.property == Property::CriticalBidMonotonic);
        if alloc {
            assert!(crit, "({}, {})", r.policy, r.payment);
        }
        if !crit {
            assert!(!alloc, "({}, {})", r.policy, r.payment);
        }
    }
}
