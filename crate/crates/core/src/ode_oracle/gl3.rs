//! Three-stage Gauss–Legendre collocation (order 6, A-stable) with
//! simplified Newton iterations and step-doubling error control.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], out: &mut [f64]);
    fn jacobian(&self, t: f64, y: &[f64]) -> DMatrix<f64>;
}

const S15: f64 = 3.872_983_346_207_417;

fn tableau() -> ([[f64; 3]; 3], [f64; 3], [f64; 3]) {
    let a = [
        [5.0 / 36.0, 2.0 / 9.0 - S15 / 15.0, 5.0 / 36.0 - S15 / 30.0],
        [5.0 / 36.0 + S15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - S15 / 24.0],
        [5.0 / 36.0 + S15 / 30.0, 2.0 / 9.0 + S15 / 15.0, 5.0 / 36.0],
    ];
    let b = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];
    let c = [0.5 - S15 / 10.0, 0.5, 0.5 + S15 / 10.0];
    (a, b, c)
}

pub const METHOD_ORDER: u32 = 6;

/// One GL3 step of size h; `None` when the Newton iteration fails to converge.
pub fn step<S: OdeSystem>(sys: &S, t: f64, y: &[f64], h: f64) -> Option<Vec<f64>> {
    let n = sys.dim();
    let (a, b, c) = tableau();
    let jac = sys.jacobian(t + 0.5 * h, y);
    let mut m = DMatrix::<f64>::identity(3 * n, 3 * n);
    for i in 0..3 {
        for j in 0..3 {
            for r in 0..n {
                for q in 0..n {
                    m[(i * n + r, j * n + q)] -= h * a[i][j] * jac[(r, q)];
                }
            }
        }
    }
    let lu = m.lu();
    let scale = 1.0 + y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut z = vec![0.0; 3 * n];
    let mut f = vec![0.0; 3 * n];
    let mut stage = vec![0.0; n];
    let mut prev = f64::INFINITY;
    let mut converged = false;
    for it in 0..25 {
        for j in 0..3 {
            for r in 0..n {
                stage[r] = y[r] + z[j * n + r];
            }
            sys.rhs(t + c[j] * h, &stage, &mut f[j * n..(j + 1) * n]);
        }
        let mut res = DVector::<f64>::zeros(3 * n);
        for i in 0..3 {
            for r in 0..n {
                let mut acc = -z[i * n + r];
                for j in 0..3 {
                    acc += h * a[i][j] * f[j * n + r];
                }
                res[i * n + r] = acc;
            }
        }
        let dz = lu.solve(&res)?;
        for (zi, d) in z.iter_mut().zip(dz.iter()) {
            *zi += d;
        }
        let d = dz.amax();
        if d <= 1e-16 * scale || (it > 1 && d >= 0.8 * prev && d <= 1e-12 * scale) {
            converged = true;
            break;
        }
        if it > 3 && d > prev {
            return None;
        }
        prev = d;
    }
    if !converged {
        return None;
    }
    for j in 0..3 {
        for r in 0..n {
            stage[r] = y[r] + z[j * n + r];
        }
        sys.rhs(t + c[j] * h, &stage, &mut f[j * n..(j + 1) * n]);
    }
    let mut out = y.to_vec();
    for j in 0..3 {
        for r in 0..n {
            out[r] += h * b[j] * f[j * n + r];
        }
    }
    Some(out)
}

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub tol: f64,
    pub escape: f64,
    pub h_init: f64,
    pub h_max: f64,
}

impl StepControl {
    pub fn new(tol: f64) -> Self {
        StepControl { tol, escape: 1e8, h_init: 0.05, h_max: 0.5 }
    }
}

fn max_norm(y: &[f64]) -> f64 {
    y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Adaptive integration from t0 to t1, calling `visit` after every accepted step.
/// Returns the final state and the last step size used.
pub fn drive<S: OdeSystem>(
    sys: &S,
    t0: f64,
    y0: &[f64],
    t1: f64,
    ctl: &StepControl,
    h_start: f64,
    mut visit: impl FnMut(f64, &[f64]),
) -> Result<(Vec<f64>, f64)> {
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = h_start.min(ctl.h_max);
    let mut last_h = h;
    while t < t1 {
        let remaining = t1 - t;
        let final_step = h >= remaining;
        let hs = if final_step { remaining } else { h };
        if hs < 1e-14 * (1.0 + t.abs()) {
            if final_step {
                break;
            }
            return Err(Error::StepUnderflow { t, h: hs });
        }
        let full = step(sys, t, &y, hs);
        let half = step(sys, t, &y, hs / 2.0).and_then(|m| step(sys, t + hs / 2.0, &m, hs / 2.0));
        let (full, half) = match (full, half) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                h = hs / 4.0;
                continue;
            }
        };
        let err = full.iter().zip(&half).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs())) / 63.0;
        let allowed = ctl.tol * (1.0 + max_norm(&half));
        if err <= allowed {
            t = if final_step { t1 } else { t + hs };
            y = half;
            let norm = max_norm(&y);
            if !norm.is_finite() || norm > ctl.escape {
                return Err(Error::Escape { t, norm });
            }
            visit(t, &y);
            if !final_step {
                last_h = hs;
            }
        }
        let fac = if err == 0.0 { 4.0 } else { 0.9 * (allowed / err).powf(1.0 / 7.0) };
        let proposed = hs * fac.clamp(0.2, 4.0);
        h = if final_step && err <= allowed { last_h.max(proposed.min(last_h * 4.0)) } else { proposed };
        h = h.min(ctl.h_max);
    }
    Ok((y, last_h))
}

/// Fixed-step integration with n steps (convergence studies).
pub fn fixed<S: OdeSystem>(sys: &S, t0: f64, y0: &[f64], t1: f64, n: usize) -> Result<Vec<f64>> {
    let h = (t1 - t0) / n as f64;
    let mut y = y0.to_vec();
    for i in 0..n {
        let t = t0 + i as f64 * h;
        y = step(sys, t, &y, h).ok_or(Error::StepUnderflow { t, h })?;
    }
    Ok(y)
}
