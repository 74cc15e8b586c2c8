//! C ABI over the `dak` library.
//!
//! Objects cross the boundary as opaque handles created by `dak_*` constructors
//! and released with the matching `*_free` function. Every fallible call
//! returns a [`DakStatus`]; on failure a message is available from
//! [`dak_last_error_message`] on the same thread. Money amounts are exchanged
//! as exact decimal or `p/q` strings, owned by the caller and released with
//! [`dak_string_free`].

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dak::mechanisms::{registry, run_mechanism, MechanismOutcome};
use dak::verifier::{certify_mechanism, CheckConfig};
use dak::{BuyerId, Error, Instance, Money};

/// A validated auction instance.
pub struct DakInstance(Instance);

/// The outcome of one mechanism run.
pub struct DakOutcome(MechanismOutcome);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DakStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed instance JSON or an invalid graph.
    InvalidInstance = 3,
    UnknownName = 4,
    /// The mechanism cannot be evaluated on this instance.
    Mechanism = 5,
    InvalidConfig = 6,
    OutOfRange = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

struct Failure(DakStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::UnknownPolicy(_) | Error::UnknownPayment(_) => DakStatus::UnknownName,
            Error::BadConfig(_)
            | Error::GridMissingValuation { .. }
            | Error::EnumerationCap { .. }
            | Error::InvalidMoney(_)
            | Error::NegativeAlpha(_)
            | Error::BadDepth(_) => DakStatus::InvalidConfig,
            Error::UnsupportedPolicy(_)
            | Error::NonMonotonic { .. }
            | Error::UnboundedPayment { .. }
            | Error::InfeasibleAllocation { .. } => DakStatus::Mechanism,
            _ => DakStatus::InvalidInstance,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DakStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DakStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DakStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DakStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DakStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON and money text contain no nul bytes").into_raw()
}

/// Message of the last failed call on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dak_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string obtained from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dak_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance from its JSON form.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dak_instance_from_json(json: *const c_char, out: *mut *mut DakInstance) -> DakStatus {
    guard(|| {
        let instance = Instance::from_json(text(json, "json")?)?;
        put(out, Box::into_raw(Box::new(DakInstance(instance))), "out")
    })
}

/// Serializes an instance to JSON.
///
/// # Safety
/// `instance` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dak_instance_to_json(instance: *const DakInstance, out: *mut *mut c_char) -> DakStatus {
    guard(|| {
        let instance = handle(instance, "instance")?;
        put(out, owned_string(instance.0.to_json()), "out")
    })
}

/// Number of buyers, or 0 for a null handle.
///
/// # Safety
/// `instance` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dak_instance_buyer_count(instance: *const DakInstance) -> usize {
    instance.as_ref().map_or(0, |i| i.0.buyer_count())
}

/// # Safety
/// `instance` must be null or a handle from [`dak_instance_from_json`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dak_instance_free(instance: *mut DakInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Runs the named mechanism on the instance's truthful profile.
///
/// # Safety
/// `instance` must be a live handle, `policy` and `payment` nul-terminated
/// strings and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dak_run(
    instance: *const DakInstance,
    policy: *const c_char,
    payment: *const c_char,
    out: *mut *mut DakOutcome,
) -> DakStatus {
    guard(|| {
        let instance = &handle(instance, "instance")?.0;
        let policy = registry::policy(text(policy, "policy")?)?;
        let payment = registry::payment(text(payment, "payment")?)?;
        let outcome = run_mechanism(policy.as_ref(), payment.as_ref(), instance.graph(), &instance.truthful_profile())?;
        put(out, Box::into_raw(Box::new(DakOutcome(outcome))), "out")
    })
}

/// # Safety
/// `outcome` must be null or a handle from [`dak_run`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dak_outcome_free(outcome: *mut DakOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

/// Winner id, or -1 when the item is not sold or the handle is null.
///
/// # Safety
/// `outcome` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dak_outcome_winner(outcome: *const DakOutcome) -> i64 {
    outcome
        .as_ref()
        .and_then(|o| o.0.winner)
        .map_or(-1, |w| i64::from(w.0))
}

/// Payment of `buyer` as an exact money string.
///
/// # Safety
/// `outcome` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dak_outcome_payment(
    outcome: *const DakOutcome,
    buyer: u32,
    out: *mut *mut c_char,
) -> DakStatus {
    guard(|| {
        let outcome = &handle(outcome, "outcome")?.0;
        let amount = outcome.payments.get(&BuyerId(buyer)).ok_or_else(|| {
            Failure(DakStatus::OutOfRange, format!("buyer {buyer} is not in the outcome"))
        })?;
        put(out, owned_string(amount.to_string()), "out")
    })
}

fn money_field(outcome: *const DakOutcome, out: *mut *mut c_char, field: fn(&MechanismOutcome) -> Money) -> DakStatus {
    guard(|| unsafe {
        let outcome = &handle(outcome, "outcome")?.0;
        put(out, owned_string(field(outcome).to_string()), "out")
    })
}

/// Seller revenue as an exact money string.
///
/// # Safety
/// `outcome` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dak_outcome_revenue(outcome: *const DakOutcome, out: *mut *mut c_char) -> DakStatus {
    money_field(outcome, out, |o| o.revenue)
}

/// Winner's reported value as an exact money string.
///
/// # Safety
/// `outcome` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dak_outcome_welfare(outcome: *const DakOutcome, out: *mut *mut c_char) -> DakStatus {
    money_field(outcome, out, |o| o.welfare)
}

/// The outcome as JSON with `winner`, `payments`, `revenue` and `welfare`.
///
/// # Safety
/// `outcome` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dak_outcome_to_json(outcome: *const DakOutcome, out: *mut *mut c_char) -> DakStatus {
    guard(|| {
        let outcome = &handle(outcome, "outcome")?.0;
        let json = serde_json::to_string(outcome).expect("outcome serializes");
        put(out, owned_string(json), "out")
    })
}

fn parse_grid(csv: &str) -> Result<Vec<Money>, Failure> {
    let mut grid = csv
        .split(',')
        .map(|s| s.trim().parse::<Money>())
        .collect::<Result<Vec<_>, _>>()?;
    grid.sort();
    grid.dedup();
    Ok(grid)
}

/// Certifies the named mechanism on `count` instances.
///
/// `grid` is a comma-separated bid grid; null uses the distinct valuations of
/// the instances. Writes the certification report as JSON to `out_json` and
/// whether IC and IR were certified to `out_certified`.
///
/// # Safety
/// `instances` must point to `count` live handles; string arguments must be
/// nul-terminated (or null for `grid`); the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn dak_verify(
    instances: *const *const DakInstance,
    count: usize,
    policy: *const c_char,
    payment: *const c_char,
    grid: *const c_char,
    out_json: *mut *mut c_char,
    out_certified: *mut bool,
) -> DakStatus {
    guard(|| {
        if instances.is_null() {
            return Err(null("instances"));
        }
        let instances: Vec<Instance> = std::slice::from_raw_parts(instances, count)
            .iter()
            .map(|&p| handle(p, "instance").map(|i| i.0.clone()))
            .collect::<Result<_, _>>()?;
        let policy = registry::policy(text(policy, "policy")?)?;
        let payment = registry::payment(text(payment, "payment")?)?;
        let bid_grid = if grid.is_null() {
            let set: BTreeSet<Money> = instances.iter().flat_map(|i| i.valuations().iter().copied()).collect();
            set.into_iter().collect()
        } else {
            parse_grid(text(grid, "grid")?)?
        };
        let config = CheckConfig::new(bid_grid)?;
        let report = certify_mechanism(policy.as_ref(), payment.as_ref(), &instances, &config)?;
        if out_json.is_null() || out_certified.is_null() {
            return Err(null("out_json or out_certified"));
        }
        put(out_certified, report.certified, "out_certified")?;
        put(out_json, owned_string(serde_json::to_string(&report).expect("report serializes")), "out_json")
    })
}
