//! C ABI over the twincf engine.
//!
//! Models are opaque handles created from JSON and released with their
//! `_free` function. Every fallible call returns a [`TwincfStatus`]; on
//! failure the message is available from [`twincf_last_error`] on the same
//! thread until the next failing call. Strings returned by the library are
//! released with [`twincf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use twincf::causation::{counterfactual_table, poc_exact, forbidden_residuals, CfTemplate, Source};
use twincf::learn::TwinModel;
use twincf::ordering::{check_cf_ordering, check_monotone, OrderingSpec};
use twincf::scm::{Cmp, Scm};
use twincf::twin::{counterfactual_aap, counterfactual_exact, counterfactual_mc, CounterfactualQuery, Estimate, EventSpec};
use twincf::Error;

/// Result codes. `Ok` is 0; codes from 10 up mirror engine error kinds.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwincfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Panic = 3,
    CycleDetected = 10,
    PartialMechanism = 11,
    BadDistribution = 12,
    UnknownVariable = 13,
    LatentIntervention = 14,
    ValueOutOfRange = 15,
    EnumerationTooLarge = 16,
    ZeroEvidence = 17,
    NoAcceptedSamples = 18,
    NonBinary = 19,
    NoMatch = 20,
    NonFiniteLoss = 21,
    DimensionMismatch = 22,
    InvalidSpec = 23,
    InvalidQuery = 24,
    InvalidOrdering = 25,
    InvalidData = 26,
    InvalidConfig = 27,
    Io = 28,
    Json = 29,
    Csv = 30,
}

impl From<&Error> for TwincfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::CycleDetected { .. } => TwincfStatus::CycleDetected,
            Error::PartialMechanism { .. } => TwincfStatus::PartialMechanism,
            Error::BadDistribution { .. } => TwincfStatus::BadDistribution,
            Error::UnknownVariable(_) => TwincfStatus::UnknownVariable,
            Error::LatentIntervention(_) => TwincfStatus::LatentIntervention,
            Error::ValueOutOfRange { .. } => TwincfStatus::ValueOutOfRange,
            Error::EnumerationTooLarge { .. } => TwincfStatus::EnumerationTooLarge,
            Error::ZeroEvidence { .. } => TwincfStatus::ZeroEvidence,
            Error::NoAcceptedSamples { .. } => TwincfStatus::NoAcceptedSamples,
            Error::NonBinary { .. } => TwincfStatus::NonBinary,
            Error::NoMatch { .. } => TwincfStatus::NoMatch,
            Error::NonFiniteLoss { .. } => TwincfStatus::NonFiniteLoss,
            Error::DimensionMismatch(_) => TwincfStatus::DimensionMismatch,
            Error::InvalidSpec(_) => TwincfStatus::InvalidSpec,
            Error::InvalidQuery(_) => TwincfStatus::InvalidQuery,
            Error::InvalidOrdering(_) => TwincfStatus::InvalidOrdering,
            Error::InvalidData(_) => TwincfStatus::InvalidData,
            Error::InvalidConfig(_) => TwincfStatus::InvalidConfig,
            Error::Io(_) => TwincfStatus::Io,
            Error::Json(_) => TwincfStatus::Json,
            Error::Csv(_) => TwincfStatus::Csv,
        }
    }
}

/// Opaque structural causal model.
pub struct TwincfScm(Scm);

/// Opaque trained twin network.
pub struct TwincfModel(TwinModel);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwincfEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_effective: u64,
}

impl From<Estimate> for TwincfEstimate {
    fn from(e: Estimate) -> Self {
        TwincfEstimate {
            value: e.value,
            stderr: e.stderr,
            n_effective: e.n_effective as u64,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TwincfPoc {
    pub pn: TwincfEstimate,
    pub ps: TwincfEstimate,
    pub pns: TwincfEstimate,
}

/// Comparison used by table targets.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwincfCmp {
    Eq = 0,
    Ge = 1,
    Le = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Status(TwincfStatus, String),
    Engine(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Engine(e)
    }
}

type FfiResult<T> = Result<T, Fail>;

fn null(what: &str) -> Fail {
    Fail::Status(TwincfStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status plus last-error
/// message.
fn guard<F: FnOnce() -> FfiResult<()>>(f: F) -> TwincfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TwincfStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Fail::Engine(e))) => {
            set_error(e.to_string());
            TwincfStatus::from(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            TwincfStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(TwincfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` is null or points to a live value of `T`.
unsafe fn deref<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` is null or valid for writes of `T`.
unsafe fn write<T>(p: *mut T, value: T, what: &str) -> FfiResult<()> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

/// Message of the last failing call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn twincf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn twincf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` is null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn twincf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an SCM from its JSON description into `*out`.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn twincf_scm_from_json(json: *const c_char, out: *mut *mut TwincfScm) -> TwincfStatus {
    guard(|| {
        let scm = Scm::from_json(text(json, "json")?)?;
        write(out, Box::into_raw(Box::new(TwincfScm(scm))), "out")
    })
}

/// # Safety
/// `scm` is null or a handle from [`twincf_scm_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn twincf_scm_free(scm: *mut TwincfScm) {
    if !scm.is_null() {
        drop(Box::from_raw(scm));
    }
}

/// Sets the latent-enumeration cap used by exact inference.
///
/// # Safety
/// `scm` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn twincf_scm_set_enum_cap(scm: *mut TwincfScm, cap: u64) -> TwincfStatus {
    guard(|| {
        let h = scm.as_mut().ok_or_else(|| null("scm"))?;
        h.0 = h.0.clone().with_enum_cap(cap);
        Ok(())
    })
}

/// Exact answer to a counterfactual query given as JSON.
///
/// # Safety
/// `scm` is a live handle, `query` a NUL-terminated string, `out` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn twincf_query_exact(
    scm: *const TwincfScm,
    query: *const c_char,
    out: *mut f64,
) -> TwincfStatus {
    guard(|| {
        let scm = &deref(scm, "scm")?.0;
        let q = CounterfactualQuery::from_json(text(query, "query")?)?;
        write(out, counterfactual_exact(scm, &q)?, "out")
    })
}

/// Twin-network rejection sampling with `n` draws.
///
/// # Safety
/// As for [`twincf_query_exact`].
#[no_mangle]
pub unsafe extern "C" fn twincf_query_mc(
    scm: *const TwincfScm,
    query: *const c_char,
    n: usize,
    seed: u64,
    out: *mut TwincfEstimate,
) -> TwincfStatus {
    guard(|| {
        let scm = &deref(scm, "scm")?.0;
        let q = CounterfactualQuery::from_json(text(query, "query")?)?;
        write(out, counterfactual_mc(scm, &q, n, seed)?.into(), "out")
    })
}

/// Abduction-action-prediction with `n` draws.
///
/// # Safety
/// As for [`twincf_query_exact`].
#[no_mangle]
pub unsafe extern "C" fn twincf_query_aap(
    scm: *const TwincfScm,
    query: *const c_char,
    n: usize,
    seed: u64,
    out: *mut TwincfEstimate,
) -> TwincfStatus {
    guard(|| {
        let scm = &deref(scm, "scm")?.0;
        let q = CounterfactualQuery::from_json(text(query, "query")?)?;
        write(out, counterfactual_aap(scm, &q, n, seed)?.into(), "out")
    })
}

/// Exact PN, PS and PNS for binary `treatment` and `outcome`.
///
/// # Safety
/// `scm` is a live handle, the names NUL-terminated strings, `out` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn twincf_poc_exact(
    scm: *const TwincfScm,
    treatment: *const c_char,
    outcome: *const c_char,
    out: *mut TwincfPoc,
) -> TwincfStatus {
    guard(|| {
        let scm = &deref(scm, "scm")?.0;
        let p = poc_exact(scm, text(treatment, "treatment")?, text(outcome, "outcome")?)?;
        let poc = TwincfPoc {
            pn: p.pn.into(),
            ps: p.ps.into(),
            pns: p.pns.into(),
        };
        write(out, poc, "out")
    })
}

/// Counts monotonicity and counterfactual-ordering violations under an
/// ordering given as JSON.
///
/// # Safety
/// `scm` is a live handle, `ordering` a NUL-terminated string, the outputs
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn twincf_check_ordering(
    scm: *const TwincfScm,
    ordering: *const c_char,
    monotone_violations: *mut usize,
    ordering_violations: *mut usize,
) -> TwincfStatus {
    guard(|| {
        let scm = &deref(scm, "scm")?.0;
        let ord = OrderingSpec::from_json(text(ordering, "ordering")?)?;
        let m = check_monotone(scm, &ord)?.len();
        let c = check_cf_ordering(scm, &ord)?.len();
        write(monotone_violations, m, "monotone_violations")?;
        write(ordering_violations, c, "ordering_violations")
    })
}

/// Exact counterfactual table `P(Y_{T'} op value | X = T, Y = evidence)` and
/// forbidden-conditional residuals as a JSON object
/// `{"table": ..., "residuals": ...}`. Free `*out` with
/// [`twincf_string_free`].
///
/// # Safety
/// `scm` is a live handle, `ordering` a NUL-terminated string, `out` valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn twincf_table_json(
    scm: *const TwincfScm,
    ordering: *const c_char,
    evidence: u32,
    op: TwincfCmp,
    value: u32,
    out: *mut *mut c_char,
) -> TwincfStatus {
    guard(|| {
        let scm = &deref(scm, "scm")?.0;
        let ord = OrderingSpec::from_json(text(ordering, "ordering")?)?;
        let op = match op {
            TwincfCmp::Eq => Cmp::Eq,
            TwincfCmp::Ge => Cmp::Ge,
            TwincfCmp::Le => Cmp::Le,
        };
        let template = CfTemplate {
            evidence_outcome: evidence,
            target: EventSpec { op, value },
        };
        let source = Source::Scm(scm);
        let table = counterfactual_table(&source, &template, &ord, 0, 0)?;
        let residuals = forbidden_residuals(&source, &ord, 0, 0)?;
        let json = serde_json::json!({"table": table, "residuals": residuals}).to_string();
        let c = CString::new(json).map_err(|e| Fail::Status(TwincfStatus::Json, e.to_string()))?;
        write(out, c.into_raw(), "out")
    })
}

/// Parses a trained model from JSON into `*out`.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is valid for writes.
#[no_mangle]
pub unsafe extern "C" fn twincf_model_from_json(json: *const c_char, out: *mut *mut TwincfModel) -> TwincfStatus {
    guard(|| {
        let model = TwinModel::from_json(text(json, "json")?)?;
        write(out, Box::into_raw(Box::new(TwincfModel(model))), "out")
    })
}

/// # Safety
/// `model` is null or a handle from [`twincf_model_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn twincf_model_free(model: *mut TwincfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Head distributions for one covariate vector and one noise sample.
/// `y` and `y_star` receive `n_outcomes` probabilities each.
///
/// # Safety
/// `model` is a live handle; `z` and `u` point to `z_len` and `u_len`
/// doubles (either may be null when its length is 0); `y` and `y_star`
/// have room for `n_outcomes` doubles.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn twincf_model_forward(
    model: *const TwincfModel,
    x: usize,
    x_star: usize,
    z: *const f64,
    z_len: usize,
    u: *const f64,
    u_len: usize,
    y: *mut f64,
    y_star: *mut f64,
    n_outcomes: usize,
) -> TwincfStatus {
    guard(|| {
        let model = &deref(model, "model")?.0;
        let slice = |p: *const f64, len: usize, what: &str| -> FfiResult<&[f64]> {
            match (p.is_null(), len) {
                (_, 0) => Ok(&[]),
                (true, _) => Err(null(what)),
                (false, _) => Ok(std::slice::from_raw_parts(p, len)),
            }
        };
        let (zs, us) = (slice(z, z_len, "z")?, slice(u, u_len, "u")?);
        if n_outcomes != model.config.n_outcomes {
            return Err(Error::DimensionMismatch(format!(
                "output buffers hold {n_outcomes} values, model has {} outcomes",
                model.config.n_outcomes
            ))
            .into());
        }
        if y.is_null() || y_star.is_null() {
            return Err(null("output buffer"));
        }
        let (p, ps) = model.forward(x, x_star, zs, us)?;
        std::slice::from_raw_parts_mut(y, n_outcomes).copy_from_slice(&p);
        std::slice::from_raw_parts_mut(y_star, n_outcomes).copy_from_slice(&ps);
        Ok(())
    })
}
