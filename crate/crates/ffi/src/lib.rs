//! C ABI over varactor-core.
//!
//! Every function returns a [`VaStatus`]; on failure the message is available from
//! [`va_last_error`] on the same thread. Handles are opaque and freed with the
//! matching `*_free` function.

use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use varactor_core::borel_lab::{borel_pade_laplace, BorelOptions, BorelSum, Precision};
use varactor_core::formal_expansion::{formal_orders, NonlinearitySpec, SeriesExpansion};
use varactor_core::fourier_core::{diophantine_scan, FrequencyVector, Mode, ProblemSpec, TrigSeries};
use varactor_core::ode_oracle::{find_periodic_orbit, OrbitOptions};
use varactor_core::resummation::{evaluate_solution, partial_sum, residual, resummed_orders};
use varactor_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Resonance = 4,
    BudgetExceeded = 5,
    NoRoot = 6,
    DegenerateRoot = 7,
    InvalidProblem = 8,
    PropagatorPole = 9,
    Divergence = 10,
    PadeDegenerate = 11,
    PoleOnPath = 12,
    LaplaceDomain = 13,
    TreeBudget = 14,
    Escape = 15,
    StepUnderflow = 16,
    NewtonFailed = 17,
    ZeroMomentum = 18,
    SingularPropagator = 19,
    Precondition = 20,
    Panic = 99,
}

impl From<&Error> for VaStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch { .. } => VaStatus::DimensionMismatch,
            Error::Resonance { .. } => VaStatus::Resonance,
            Error::BudgetExceeded { .. } => VaStatus::BudgetExceeded,
            Error::NoRoot { .. } => VaStatus::NoRoot,
            Error::DegenerateRoot { .. } => VaStatus::DegenerateRoot,
            Error::InvalidProblem { .. } => VaStatus::InvalidProblem,
            Error::PropagatorPole { .. } => VaStatus::PropagatorPole,
            Error::Divergence { .. } => VaStatus::Divergence,
            Error::PadeDegenerate { .. } => VaStatus::PadeDegenerate,
            Error::PoleOnPath { .. } => VaStatus::PoleOnPath,
            Error::LaplaceDomain { .. } => VaStatus::LaplaceDomain,
            Error::TreeBudget { .. } => VaStatus::TreeBudget,
            Error::Escape { .. } => VaStatus::Escape,
            Error::StepUnderflow { .. } => VaStatus::StepUnderflow,
            Error::NewtonFailed { .. } => VaStatus::NewtonFailed,
            Error::ZeroMomentum => VaStatus::ZeroMomentum,
            Error::SingularPropagator { .. } => VaStatus::SingularPropagator,
            Error::Precondition { .. } => VaStatus::Precondition,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VaNonlinearity {
    Quadratic = 0,
    Linear = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VaExpansionKind {
    Formal = 0,
    Resummed = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VaPrecision {
    Double = 0,
    Extended = 1,
}

/// Problem definition: forcing, frequencies, nonlinearity and ε.
pub struct VaProblem(ProblemSpec);

/// Computed orders x^(k) (formal) or x^[k] (resummed).
pub struct VaExpansion(SeriesExpansion);

/// Borel–Padé–Laplace sum of the formal series.
pub struct VaBorel(BorelSum);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct VaOrbit {
    pub x0: f64,
    pub v0: f64,
    pub period: f64,
    pub multiplier_re: [f64; 2],
    pub multiplier_im: [f64; 2],
    pub residual: f64,
    pub iterations: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard<F>(f: F) -> VaStatus
where
    F: FnOnce() -> Result<(), (VaStatus, String)>,
{
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            VaStatus::Panic
        }
    }
}

fn lift<T>(r: varactor_core::Result<T>) -> Result<T, (VaStatus, String)> {
    r.map_err(|e| (VaStatus::from(&e), e.to_string()))
}

fn null(what: &str) -> (VaStatus, String) {
    (VaStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: &str) -> (VaStatus, String) {
    (VaStatus::InvalidArgument, msg.to_string())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (VaStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut T, v: T, what: &str) -> Result<(), (VaStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn va_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn va_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// εẍ + ẋ + εx² = ε(α + β sin ωt).
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn va_problem_new_periodic(alpha: f64, beta: f64, omega: f64, eps: f64, out: *mut *mut VaProblem) -> VaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = lift(ProblemSpec::new(
            TrigSeries::alpha_beta_sin(alpha, beta),
            FrequencyVector::periodic(omega),
            NonlinearitySpec::quadratic(),
            Complex64::new(eps, 0.0),
        ))?;
        out.write(Box::into_raw(Box::new(VaProblem(spec))));
        Ok(())
    })
}

/// General problem. `modes` holds `n_terms * dim` integers (row per term) and
/// `re`/`im` the coefficients f_ν of one half of the spectrum; the conjugate
/// half is implied. C₀ is certified by scanning |ν| ≤ `scan_radius`.
///
/// # Safety
/// `omega` must point to `dim` doubles, `modes` to `n_terms * dim` ints, `re` and
/// `im` to `n_terms` doubles each, and `out` to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn va_problem_new(
    dim: usize,
    omega: *const f64,
    n_terms: usize,
    modes: *const i32,
    re: *const f64,
    im: *const f64,
    eps_re: f64,
    eps_im: f64,
    tau: f64,
    scan_radius: u32,
    nonlinearity: VaNonlinearity,
    out: *mut *mut VaProblem,
) -> VaStatus {
    guard(|| {
        if out.is_null() || omega.is_null() {
            return Err(null("out or omega"));
        }
        if dim == 0 {
            return Err(invalid("dim must be positive"));
        }
        if n_terms > 0 && (modes.is_null() || re.is_null() || im.is_null()) {
            return Err(null("modes, re or im"));
        }
        let omega = std::slice::from_raw_parts(omega, dim).to_vec();
        let mut pairs = Vec::with_capacity(n_terms);
        if n_terms > 0 {
            let modes = std::slice::from_raw_parts(modes, n_terms * dim);
            let re = std::slice::from_raw_parts(re, n_terms);
            let im = std::slice::from_raw_parts(im, n_terms);
            for j in 0..n_terms {
                pairs.push((Mode::new(&modes[j * dim..(j + 1) * dim]), Complex64::new(re[j], im[j])));
            }
        }
        let forcing = lift(TrigSeries::real_from_pairs(dim, pairs))?;
        let freq = if dim == 1 {
            FrequencyVector::periodic(omega[0])
        } else {
            let provisional = lift(FrequencyVector::new(omega.clone(), 1.0, tau))?;
            let (c0, _) = lift(diophantine_scan(&provisional, scan_radius))?;
            lift(FrequencyVector::new(omega, c0, tau))?
        };
        let g = match nonlinearity {
            VaNonlinearity::Quadratic => NonlinearitySpec::quadratic(),
            VaNonlinearity::Linear => NonlinearitySpec::linear(),
        };
        let spec = lift(ProblemSpec::new(forcing, freq, g, Complex64::new(eps_re, eps_im)))?;
        out.write(Box::into_raw(Box::new(VaProblem(spec))));
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a handle from `va_problem_new*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn va_problem_free(p: *mut VaProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live problem handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn va_problem_c0(p: *const VaProblem, out: *mut f64) -> VaStatus {
    guard(|| store(out, deref(p, "problem")?.0.c0(), "out"))
}

/// Orders 0…`order` of the formal or resummed series.
///
/// # Safety
/// `p` must be a live problem handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn va_expansion_new(p: *const VaProblem, kind: VaExpansionKind, order: usize, out: *mut *mut VaExpansion) -> VaStatus {
    guard(|| {
        let spec = &deref(p, "problem")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let e = match kind {
            VaExpansionKind::Formal => lift(formal_orders(spec, order))?,
            VaExpansionKind::Resummed => lift(resummed_orders(spec, order))?,
        };
        out.write(Box::into_raw(Box::new(VaExpansion(e))));
        Ok(())
    })
}

/// # Safety
/// `e` must be NULL or a handle from `va_expansion_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn va_expansion_free(e: *mut VaExpansion) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// # Safety
/// `e` must be a live expansion handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn va_expansion_max_order(e: *const VaExpansion, out: *mut usize) -> VaStatus {
    guard(|| store(out, deref(e, "expansion")?.0.max_order(), "out"))
}

/// Constant c_k.
///
/// # Safety
/// `e` must be a live expansion handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn va_expansion_constant(e: *const VaExpansion, k: usize, out: *mut f64) -> VaStatus {
    guard(|| {
        let e = &deref(e, "expansion")?.0;
        let c = *e.constants.get(k).ok_or_else(|| invalid("order out of range"))?;
        store(out, c, "out")
    })
}

/// Fourier coefficient of order `k` at the mode `nu[0..dim]`.
///
/// # Safety
/// `e` must be a live expansion handle, `nu` must point to `dim` ints, and
/// `re`/`im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn va_expansion_coeff(e: *const VaExpansion, k: usize, nu: *const i32, dim: usize, re: *mut f64, im: *mut f64) -> VaStatus {
    guard(|| {
        let e = &deref(e, "expansion")?.0;
        if nu.is_null() {
            return Err(null("nu"));
        }
        if dim != e.problem.dim() {
            return Err((VaStatus::DimensionMismatch, format!("mode has dimension {dim}, problem has {}", e.problem.dim())));
        }
        if k > e.max_order() {
            return Err(invalid("order out of range"));
        }
        let c = e.coeff(k, &Mode::new(std::slice::from_raw_parts(nu, dim)));
        store(re, c.re, "re")?;
        store(im, c.im, "im")
    })
}

/// x(t) = Σ μᵏ x^(k)(t) with a geometric tail estimate.
///
/// # Safety
/// `e` must be a live expansion handle; `value` and `error` must be writable.
#[no_mangle]
pub unsafe extern "C" fn va_expansion_evaluate(e: *const VaExpansion, t: f64, mu: f64, value: *mut f64, error: *mut f64) -> VaStatus {
    guard(|| {
        let v = lift(evaluate_solution(&deref(e, "expansion")?.0, t, mu))?;
        store(value, v.value, "value")?;
        store(error, v.error_estimate, "error")
    })
}

/// Sup norm of the equation residual of the full partial sum.
///
/// # Safety
/// `e` must be a live expansion handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn va_expansion_residual(e: *const VaExpansion, out: *mut f64) -> VaStatus {
    guard(|| {
        let e = &deref(e, "expansion")?.0;
        let r = lift(residual(&partial_sum(e, e.max_order(), 1.0), &e.problem))?;
        store(out, r, "out")
    })
}

/// Borel–Padé–Laplace sum of the formal series with orders 0…`order`.
///
/// # Safety
/// `p` must be a live problem handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn va_borel_new(p: *const VaProblem, order: usize, precision: VaPrecision, out: *mut *mut VaBorel) -> VaStatus {
    guard(|| {
        let spec = &deref(p, "problem")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let eps = spec.epsilon();
        if eps.im != 0.0 {
            return Err(invalid("Borel summation needs a real epsilon"));
        }
        let e = lift(formal_orders(spec, order))?;
        let precision = match precision {
            VaPrecision::Double => Precision::Double,
            VaPrecision::Extended => Precision::Extended,
        };
        let sum = lift(borel_pade_laplace(&e, eps.re, &BorelOptions { precision, ..BorelOptions::default() }))?;
        out.write(Box::into_raw(Box::new(VaBorel(sum))));
        Ok(())
    })
}

/// # Safety
/// `b` must be NULL or a handle from `va_borel_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn va_borel_free(b: *mut VaBorel) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Value at time `t` together with the sup-norm error bound.
///
/// # Safety
/// `b` and `p` must be live handles (the problem the sum was built from);
/// `value` and `error` must be writable.
#[no_mangle]
pub unsafe extern "C" fn va_borel_evaluate(b: *const VaBorel, p: *const VaProblem, t: f64, value: *mut f64, error: *mut f64) -> VaStatus {
    guard(|| {
        let b = &deref(b, "borel")?.0;
        let spec = &deref(p, "problem")?.0;
        store(value, b.evaluate(spec.freq(), t), "value")?;
        store(error, b.error_bound(), "error")
    })
}

/// Periodic orbit by Newton shooting on the stroboscopic map.
///
/// # Safety
/// `p` must be a live problem handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn va_orbit_find(p: *const VaProblem, tol: f64, out: *mut VaOrbit) -> VaStatus {
    guard(|| {
        let spec = &deref(p, "problem")?.0;
        if !(tol > 0.0) {
            return Err(invalid("tol must be positive"));
        }
        let orbit = lift(find_periodic_orbit(spec, &OrbitOptions { integration_tol: tol, ..OrbitOptions::default() }))?;
        let m = orbit.floquet_multipliers;
        store(
            out,
            VaOrbit {
                x0: orbit.initial_state[0],
                v0: orbit.initial_state[1],
                period: orbit.period,
                multiplier_re: [m[0].re, m[1].re],
                multiplier_im: [m[0].im, m[1].im],
                residual: orbit.residual,
                iterations: orbit.iterations as u32,
            },
            "out",
        )
    })
}
