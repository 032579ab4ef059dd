use std::ffi::CStr;
use std::ptr;
use varactor_ffi::*;

fn problem(alpha: f64, beta: f64, eps: f64) -> *mut VaProblem {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { va_problem_new_periodic(alpha, beta, 1.0, eps, &mut p) }, VaStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    let p = va_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn constants_through_the_abi() {
    let p = problem(2.0, 0.3, 0.05);
    let mut e = ptr::null_mut();
    unsafe {
        let mut c0 = 0.0;
        assert_eq!(va_problem_c0(p, &mut c0), VaStatus::Ok);
        assert!((c0 - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(va_expansion_new(p, VaExpansionKind::Formal, 6, &mut e), VaStatus::Ok);
        let mut k = 0;
        assert_eq!(va_expansion_max_order(e, &mut k), VaStatus::Ok);
        assert_eq!(k, 6);
        let mut c1 = 1.0;
        assert_eq!(va_expansion_constant(e, 1, &mut c1), VaStatus::Ok);
        assert_eq!(c1, 0.0);
        // x^(1)_1 = f_1/(iω) with f_1 = −iβ/2
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(va_expansion_coeff(e, 1, [1].as_ptr(), 1, &mut re, &mut im), VaStatus::Ok);
        assert!((re + 0.15).abs() < 1e-15 && im.abs() < 1e-15, "{re} {im}");
        assert_eq!(va_expansion_coeff(e, 1, [1, 0].as_ptr(), 2, &mut re, &mut im), VaStatus::DimensionMismatch);
        assert_eq!(va_expansion_constant(e, 7, &mut c1), VaStatus::InvalidArgument);
        va_expansion_free(e);
        va_problem_free(p);
    }
}

#[test]
fn three_methods_agree() {
    let p = problem(1.0, 0.5, 0.05);
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(va_expansion_new(p, VaExpansionKind::Resummed, 12, &mut e), VaStatus::Ok);
        let mut res = 1.0;
        assert_eq!(va_expansion_residual(e, &mut res), VaStatus::Ok);
        assert!(res < 1e-12, "{res}");
        let mut b = ptr::null_mut();
        assert_eq!(va_borel_new(p, 16, VaPrecision::Double, &mut b), VaStatus::Ok);
        let mut orbit = VaOrbit::default();
        assert_eq!(va_orbit_find(p, 1e-13, &mut orbit), VaStatus::Ok);
        assert!((orbit.period - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!(orbit.multiplier_re[0].hypot(orbit.multiplier_im[0]) < 1.0);
        let (mut xr, mut er, mut xb, mut eb) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(va_expansion_evaluate(e, 0.0, 1.0, &mut xr, &mut er), VaStatus::Ok);
        assert_eq!(va_borel_evaluate(b, p, 0.0, &mut xb, &mut eb), VaStatus::Ok);
        assert!((xr - orbit.x0).abs() < 1e-10, "{xr} {}", orbit.x0);
        assert!((xb - orbit.x0).abs() < 1e-10, "{xb} {}", orbit.x0);
        va_borel_free(b);
        va_expansion_free(e);
        va_problem_free(p);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut p = ptr::null_mut();
    unsafe {
        assert_eq!(va_problem_new_periodic(-1.0, 0.1, 1.0, 0.1, &mut p), VaStatus::InvalidProblem);
        assert!(p.is_null());
        assert!(last_error().contains("alpha"));
        assert_eq!(va_problem_new_periodic(1.0, 0.1, 1.0, 0.1, ptr::null_mut()), VaStatus::NullPointer);
        let mut c0 = 0.0;
        assert_eq!(va_problem_c0(ptr::null(), &mut c0), VaStatus::NullPointer);
        let ok = problem(1.0, 0.1, 0.1);
        assert_eq!(va_problem_c0(ok, &mut c0), VaStatus::Ok);
        assert!(va_last_error().is_null());
        va_problem_free(ok);
        va_problem_free(ptr::null_mut());
    }
}

#[test]
fn quasi_periodic_problem() {
    let omega = [1.0, (5f64.sqrt() - 1.0) / 2.0];
    let modes = [0, 0, 1, 0, 0, 1];
    let re = [1.0, 0.0, 0.0];
    let im = [0.0, -0.125, -0.125];
    let mut p = ptr::null_mut();
    unsafe {
        let s = va_problem_new(2, omega.as_ptr(), 3, modes.as_ptr(), re.as_ptr(), im.as_ptr(), 0.02, 0.0, 1.0, 50, VaNonlinearity::Quadratic, &mut p);
        assert_eq!(s, VaStatus::Ok);
        let mut e = ptr::null_mut();
        assert_eq!(va_expansion_new(p, VaExpansionKind::Resummed, 4, &mut e), VaStatus::Ok);
        let (mut re1, mut im1) = (0.0, 0.0);
        assert_eq!(va_expansion_coeff(e, 1, [0, 1].as_ptr(), 2, &mut re1, &mut im1), VaStatus::Ok);
        assert!(re1.hypot(im1) > 0.0);
        va_expansion_free(e);
        va_problem_free(p);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(va_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
