//! C ABI over `lifesurplus`.
//!
//! Objects are opaque heap handles created by `ls_*_new` functions and
//! released with the matching `ls_*_free`. Every function returns an
//! [`LsStatus`]; on failure the message is available from
//! [`ls_last_error`] until the next failing call on the same thread.
//! Results are written through out-pointers only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lifesurplus::{
    equivalence_premium, modeled_surplus, paidup_factor, solve_backward, solve_forward, total_surplus_epv,
    ActuarialBasis, CashflowSpec, Curve, Error, RateCurve, TechnicalBasis,
};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Numerical = 3,
    Degenerate = 4,
    Consistency = 5,
    Panic = 6,
}

/// Benefit shape of a contract.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsProduct {
    /// Pays the sum on death before the term.
    TermAssurance = 0,
    /// Pays the sum on death before the term or at the term on survival.
    Endowment = 1,
}

/// Interest and mortality intensities.
pub struct LsBasis(TechnicalBasis);

/// A technical basis together with contractual cashflows.
pub struct LsContract(ActuarialBasis);

/// Values on a uniform mesh.
pub struct LsCurve(Curve);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> LsStatus {
    match e {
        Error::Domain(_) => LsStatus::Domain,
        Error::NumericalInstability(_) => LsStatus::Numerical,
        Error::DegenerateContract(_) => LsStatus::Degenerate,
        Error::InternalConsistency(_) => LsStatus::Consistency,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), LsStatus>) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LsStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            LsStatus::Panic
        }
    }
}

fn fail(e: Error) -> LsStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> LsStatus {
    set_error(&format!("null pointer: {what}"));
    LsStatus::NullPointer
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, LsStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

fn check_out<T>(out: *mut T) -> Result<(), LsStatus> {
    if out.is_null() {
        Err(null("out"))
    } else {
        Ok(())
    }
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Basis with constant force of interest and Makeham mortality
/// `a + b c^(age + t)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ls_basis_new_makeham(
    delta: f64,
    a: f64,
    b: f64,
    c: f64,
    age: f64,
    out: *mut *mut LsBasis,
) -> LsStatus {
    guard(|| {
        check_out(out)?;
        let tb = TechnicalBasis::new("basis", RateCurve::constant(delta), RateCurve::makeham(a, b, c, age));
        tb.delta.validate().and(tb.mu.validate()).map_err(fail)?;
        put(out, LsBasis(tb));
        Ok(())
    })
}

/// Basis with constant force of interest and G82 males mortality from `age`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ls_basis_new_g82m(delta: f64, age: f64, out: *mut *mut LsBasis) -> LsStatus {
    guard(|| {
        check_out(out)?;
        let tb = TechnicalBasis::new("basis", RateCurve::constant(delta), RateCurve::g82m(age));
        tb.delta.validate().and(tb.mu.validate()).map_err(fail)?;
        put(out, LsBasis(tb));
        Ok(())
    })
}

/// New basis with interest times `delta_factor` and mortality times
/// `mu_factor`.
///
/// # Safety
/// `basis` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ls_basis_rescaled(
    basis: *const LsBasis,
    delta_factor: f64,
    mu_factor: f64,
    out: *mut *mut LsBasis,
) -> LsStatus {
    guard(|| {
        let b = get(basis, "basis")?;
        check_out(out)?;
        let tb = b.0.rescaled(b.0.label.clone(), delta_factor, mu_factor);
        tb.delta.validate().and(tb.mu.validate()).map_err(fail)?;
        put(out, LsBasis(tb));
        Ok(())
    })
}

/// # Safety
/// `basis` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ls_basis_free(basis: *mut LsBasis) {
    if !basis.is_null() {
        drop(Box::from_raw(basis));
    }
}

/// Contract of `term` years paying `sum` with level premium rate `premium`,
/// valued on `basis`. The basis is copied.
///
/// # Safety
/// `basis` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ls_contract_new(
    basis: *const LsBasis,
    product: LsProduct,
    term: f64,
    sum: f64,
    premium: f64,
    out: *mut *mut LsContract,
) -> LsStatus {
    guard(|| {
        let b = get(basis, "basis")?;
        check_out(out)?;
        let cf = match product {
            LsProduct::TermAssurance => CashflowSpec::term_assurance(term, sum, premium),
            LsProduct::Endowment => CashflowSpec::endowment(term, sum, premium),
        };
        cf.validate().map_err(fail)?;
        put(out, LsContract(ActuarialBasis::new("contract", b.0.clone(), cf)));
        Ok(())
    })
}

/// Same cashflows with another level premium rate.
///
/// # Safety
/// `contract` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ls_contract_with_premium(
    contract: *const LsContract,
    premium: f64,
    out: *mut *mut LsContract,
) -> LsStatus {
    guard(|| {
        let c = get(contract, "contract")?;
        check_out(out)?;
        put(out, LsContract(c.0.with_level_premium(premium)));
        Ok(())
    })
}

/// Same cashflows valued on another basis.
///
/// # Safety
/// Both handles must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ls_contract_on_basis(
    contract: *const LsContract,
    basis: *const LsBasis,
    out: *mut *mut LsContract,
) -> LsStatus {
    guard(|| {
        let c = get(contract, "contract")?;
        let b = get(basis, "basis")?;
        check_out(out)?;
        put(out, LsContract(ActuarialBasis::new("contract", b.0.clone(), c.0.cashflows.clone())));
        Ok(())
    })
}

/// # Safety
/// `contract` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ls_contract_free(contract: *mut LsContract) {
    if !contract.is_null() {
        drop(Box::from_raw(contract));
    }
}

/// Level premium rate making the contract's expected present value zero on
/// `basis`. The contract's own premium is ignored.
///
/// # Safety
/// Both handles must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ls_equivalence_premium(
    basis: *const LsBasis,
    contract: *const LsContract,
    h: f64,
    out: *mut f64,
) -> LsStatus {
    guard(|| {
        let b = get(basis, "basis")?;
        let c = get(contract, "contract")?;
        check_out(out)?;
        *out = equivalence_premium(&b.0, &c.0.cashflows, h).map_err(fail)?;
        Ok(())
    })
}

/// Prospective policy values on `0, h, ..., term` with value `terminal`
/// just after the term.
///
/// # Safety
/// `contract` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ls_policy_values(
    contract: *const LsContract,
    terminal: f64,
    h: f64,
    out: *mut *mut LsCurve,
) -> LsStatus {
    guard(|| {
        let c = get(contract, "contract")?;
        check_out(out)?;
        put(out, LsCurve(solve_backward(&c.0, terminal, h).map_err(fail)?));
        Ok(())
    })
}

/// Retrospective accumulation on `0, h, ..., term` starting from `initial`.
///
/// # Safety
/// `contract` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ls_accumulation(
    contract: *const LsContract,
    initial: f64,
    h: f64,
    out: *mut *mut LsCurve,
) -> LsStatus {
    guard(|| {
        let c = get(contract, "contract")?;
        check_out(out)?;
        put(out, LsCurve(solve_forward(&c.0, initial, h).map_err(fail)?));
        Ok(())
    })
}

/// Discounted modeled surplus when `valuation` reserves and `experience`
/// happens.
///
/// # Safety
/// Both handles must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ls_modeled_surplus(
    valuation: *const LsContract,
    experience: *const LsContract,
    h: f64,
    out: *mut *mut LsCurve,
) -> LsStatus {
    guard(|| {
        let v = get(valuation, "valuation")?;
        let e = get(experience, "experience")?;
        check_out(out)?;
        let r = modeled_surplus(&v.0, &e.0, h).map_err(fail)?;
        put(out, LsCurve(Curve::new(0.0, r.step, r.theta_discounted)));
        Ok(())
    })
}

/// Expected present value at 0 of all surplus emerging over the term.
///
/// # Safety
/// Both handles must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ls_total_surplus_epv(
    valuation: *const LsContract,
    experience: *const LsContract,
    h: f64,
    out: *mut f64,
) -> LsStatus {
    guard(|| {
        let v = get(valuation, "valuation")?;
        let e = get(experience, "experience")?;
        check_out(out)?;
        *out = total_surplus_epv(&v.0, &e.0, h).map_err(fail)?;
        Ok(())
    })
}

/// Paid-up factor at mesh node `t`.
///
/// # Safety
/// `contract` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ls_paidup_factor(contract: *const LsContract, t: f64, h: f64, out: *mut f64) -> LsStatus {
    guard(|| {
        let c = get(contract, "contract")?;
        check_out(out)?;
        *out = paidup_factor(&c.0, t, h).map_err(fail)?;
        Ok(())
    })
}

/// Number of values; 0 for a null handle.
///
/// # Safety
/// `curve` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn ls_curve_len(curve: *const LsCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.len())
}

/// Time of the first value and mesh step.
///
/// # Safety
/// `curve` must come from this library; the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_curve_grid(curve: *const LsCurve, origin: *mut f64, step: *mut f64) -> LsStatus {
    guard(|| {
        let c = get(curve, "curve")?;
        check_out(origin)?;
        check_out(step)?;
        *origin = c.0.origin;
        *step = c.0.step;
        Ok(())
    })
}

/// Copies up to `cap` values into `buf` and stores the count in `written`.
///
/// # Safety
/// `curve` must come from this library, `buf` valid for `cap` writes and
/// `written` valid for one.
#[no_mangle]
pub unsafe extern "C" fn ls_curve_values(
    curve: *const LsCurve,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> LsStatus {
    guard(|| {
        let c = get(curve, "curve")?;
        check_out(buf)?;
        check_out(written)?;
        let n = c.0.len().min(cap);
        ptr::copy_nonoverlapping(c.0.values.as_ptr(), buf, n);
        *written = n;
        Ok(())
    })
}

/// # Safety
/// `curve` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn ls_curve_free(curve: *mut LsCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}
