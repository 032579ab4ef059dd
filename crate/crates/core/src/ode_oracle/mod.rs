//! Direct time integration of ẍ + γẋ + g(x) = f(ωt), γ = 1/ε, and a shooting
//! periodic-orbit finder with Floquet multipliers.

mod gl3;

pub use gl3::{OdeSystem, StepControl, METHOD_ORDER};

use crate::error::{Error, Result};
use crate::formal_expansion::NonlinearitySpec;
use crate::fourier_core::{small_divisor, Mode, ProblemSpec, TrigSeries};
use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// The forced oscillator in first-order form, optionally augmented with the
/// variational equation for the 2×2 fundamental matrix.
pub struct Oscillator {
    gamma: f64,
    forcing: Vec<(f64, Complex64)>,
    g: NonlinearitySpec,
    variational: bool,
}

impl Oscillator {
    pub fn new(spec: &ProblemSpec, variational: bool) -> Result<Self> {
        let eps = spec.epsilon();
        if eps.im != 0.0 || eps.re == 0.0 || !eps.re.is_finite() {
            return Err(Error::precondition("time integration needs a real nonzero epsilon"));
        }
        let forcing = spec.forcing().iter().map(|(m, c)| (small_divisor(spec.freq(), m), *c)).collect();
        Ok(Oscillator { gamma: 1.0 / eps.re, forcing, g: spec.nonlinearity().clone(), variational })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn force(&self, t: f64) -> f64 {
        self.forcing.iter().map(|(w, c)| (c * Complex64::from_polar(1.0, w * t)).re).sum()
    }
}

impl OdeSystem for Oscillator {
    fn dim(&self) -> usize {
        if self.variational {
            6
        } else {
            2
        }
    }

    fn rhs(&self, t: f64, y: &[f64], out: &mut [f64]) {
        out[0] = y[1];
        out[1] = self.force(t) - self.gamma * y[1] - self.g.value(y[0]);
        if self.variational {
            let dg = self.g.derivative(y[0], 1);
            // Φ stored row-major in y[2..6]
            out[2] = y[4];
            out[3] = y[5];
            out[4] = -dg * y[2] - self.gamma * y[4];
            out[5] = -dg * y[3] - self.gamma * y[5];
        }
    }

    fn jacobian(&self, _t: f64, y: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let mut j = DMatrix::zeros(n, n);
        let dg = self.g.derivative(y[0], 1);
        j[(0, 1)] = 1.0;
        j[(1, 0)] = -dg;
        j[(1, 1)] = -self.gamma;
        if self.variational {
            let ddg = self.g.derivative(y[0], 2);
            j[(2, 4)] = 1.0;
            j[(3, 5)] = 1.0;
            j[(4, 0)] = -ddg * y[2];
            j[(4, 2)] = -dg;
            j[(4, 4)] = -self.gamma;
            j[(5, 0)] = -ddg * y[3];
            j[(5, 3)] = -dg;
            j[(5, 5)] = -self.gamma;
        }
        j
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepperMeta {
    pub method: &'static str,
    pub order: u32,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; 2]>,
    pub stepper: StepperMeta,
}

impl Trajectory {
    pub fn last(&self) -> [f64; 2] {
        *self.states.last().expect("trajectory holds the initial state")
    }
}

fn meta(tol: f64) -> StepperMeta {
    StepperMeta { method: "gauss-legendre-3", order: METHOD_ORDER, tol }
}

/// Adaptive integration over `t_span`, recording every accepted step.
pub fn integrate(spec: &ProblemSpec, state0: [f64; 2], t_span: (f64, f64), tol: f64) -> Result<Trajectory> {
    let sys = Oscillator::new(spec, false)?;
    let ctl = StepControl::new(tol);
    let mut times = vec![t_span.0];
    let mut states = vec![state0];
    gl3::drive(&sys, t_span.0, &state0, t_span.1, &ctl, ctl.h_init, |t, y| {
        times.push(t);
        states.push([y[0], y[1]]);
    })?;
    Ok(Trajectory { times, states, stepper: meta(tol) })
}

/// States at the requested (increasing) times; the first time is the initial one.
pub fn integrate_sampled(spec: &ProblemSpec, state0: [f64; 2], times: &[f64], tol: f64) -> Result<Trajectory> {
    let sys = Oscillator::new(spec, false)?;
    let ctl = StepControl::new(tol);
    let mut states = vec![state0];
    let mut y = state0.to_vec();
    let mut h = ctl.h_init;
    for w in times.windows(2) {
        let (next, last_h) = gl3::drive(&sys, w[0], &y, w[1], &ctl, h, |_, _| {})?;
        y = next;
        h = last_h;
        states.push([y[0], y[1]]);
    }
    Ok(Trajectory { times: times.to_vec(), states, stepper: meta(tol) })
}

/// Fixed-step integration with n steps, used for convergence studies.
pub fn integrate_fixed(spec: &ProblemSpec, state0: [f64; 2], t_span: (f64, f64), n: usize) -> Result<[f64; 2]> {
    let sys = Oscillator::new(spec, false)?;
    let y = gl3::fixed(&sys, t_span.0, &state0, t_span.1, n)?;
    Ok([y[0], y[1]])
}

/// Stroboscopic map over one forcing period together with its Jacobian.
pub fn stroboscopic_map(spec: &ProblemSpec, state0: [f64; 2], tol: f64) -> Result<([f64; 2], Matrix2<f64>)> {
    let sys = Oscillator::new(spec, true)?;
    let ctl = StepControl::new(tol);
    let y0 = [state0[0], state0[1], 1.0, 0.0, 0.0, 1.0];
    let (y, _) = gl3::drive(&sys, 0.0, &y0, period(spec)?, &ctl, ctl.h_init, |_, _| {})?;
    Ok(([y[0], y[1]], Matrix2::new(y[2], y[3], y[4], y[5])))
}

pub fn period(spec: &ProblemSpec) -> Result<f64> {
    if spec.dim() != 1 {
        return Err(Error::precondition("periodic orbits need a single forcing frequency"));
    }
    let w = spec.freq().omega()[0];
    if w == 0.0 {
        return Err(Error::precondition("zero forcing frequency"));
    }
    Ok(2.0 * PI / w.abs())
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodicOrbit {
    pub initial_state: [f64; 2],
    pub period: f64,
    pub floquet_multipliers: [Complex64; 2],
    pub residual: f64,
    pub iterations: usize,
    pub monodromy: [[f64; 2]; 2],
}

impl PeriodicOrbit {
    pub fn is_attracting(&self) -> bool {
        self.floquet_multipliers.iter().all(|m| m.norm() < 1.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OrbitOptions {
    pub tol: f64,
    pub integration_tol: f64,
    pub max_iterations: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions { tol: 1e-12, integration_tol: 1e-14, max_iterations: 40 }
    }
}

pub fn eigenvalues_2x2(m: &Matrix2<f64>) -> [Complex64; 2] {
    let tr = m.trace();
    let det = m.determinant();
    let disc = Complex64::new(tr * tr / 4.0 - det, 0.0).sqrt();
    [tr / 2.0 + disc, tr / 2.0 - disc]
}

/// Newton shooting on the stroboscopic section, seeded at (c₀, 0).
pub fn find_periodic_orbit(spec: &ProblemSpec, opts: &OrbitOptions) -> Result<PeriodicOrbit> {
    let t = period(spec)?;
    let mut y = Vector2::new(spec.c0(), 0.0);
    let eval = |y: &Vector2<f64>| -> Result<(Vector2<f64>, Matrix2<f64>)> {
        let (p, phi) = stroboscopic_map(spec, [y[0], y[1]], opts.integration_tol)?;
        Ok((Vector2::new(p[0], p[1]) - y, phi))
    };
    let (mut f, mut phi) = eval(&y)?;
    let mut res = f.amax();
    for it in 0..opts.max_iterations {
        if res <= opts.tol {
            return Ok(PeriodicOrbit {
                initial_state: [y[0], y[1]],
                period: t,
                floquet_multipliers: eigenvalues_2x2(&phi),
                residual: res,
                iterations: it,
                monodromy: [[phi[(0, 0)], phi[(0, 1)]], [phi[(1, 0)], phi[(1, 1)]]],
            });
        }
        let jac = phi - Matrix2::identity();
        let delta = jac.lu().solve(&(-f)).ok_or(Error::NewtonFailed { iterations: it, residual: res })?;
        let mut lambda = 1.0;
        loop {
            let cand = y + delta * lambda;
            match eval(&cand) {
                Ok((fc, pc)) if fc.amax() < res || lambda < 1e-3 => {
                    y = cand;
                    f = fc;
                    phi = pc;
                    break;
                }
                _ if lambda < 1e-3 => return Err(Error::NewtonFailed { iterations: it, residual: res }),
                _ => lambda *= 0.5,
            }
        }
        let new_res = f.amax();
        if new_res >= res && res < 1e3 * opts.tol {
            // at the noise floor of the integrator
            res = new_res.min(res);
            if res <= opts.tol {
                continue;
            }
            return Err(Error::NewtonFailed { iterations: it + 1, residual: res });
        }
        res = new_res;
    }
    Err(Error::NewtonFailed { iterations: opts.max_iterations, residual: res })
}

/// Fourier coefficients of x(t) on the orbit by the trapezoid rule over one period.
pub fn orbit_fourier(spec: &ProblemSpec, orbit: &PeriodicOrbit, samples: usize, nu_max: i32, tol: f64) -> Result<TrigSeries> {
    let t = orbit.period;
    let times: Vec<f64> = (0..=samples).map(|j| t * j as f64 / samples as f64).collect();
    let traj = integrate_sampled(spec, orbit.initial_state, &times, tol)?;
    let w = spec.freq().omega()[0];
    let mut pairs = Vec::new();
    for nu in 0..=nu_max {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..samples {
            acc += traj.states[j][0] * Complex64::from_polar(1.0, -(nu as f64) * w * times[j]);
        }
        pairs.push((Mode::scalar(nu), acc / samples as f64));
    }
    TrigSeries::real_from_pairs(1, pairs)
}

#[derive(Debug, Clone, Serialize)]
pub struct QpProbeReport {
    pub t_long: f64,
    pub samples: usize,
    pub initial_state: [f64; 2],
    pub sup_distance: f64,
    pub argmax_t: f64,
}

/// Integrates from the state predicted by `series` and measures the sup distance
/// between trajectory and series over [0, t_long].
pub fn quasi_periodic_probe(spec: &ProblemSpec, series: &TrigSeries, t_long: f64, samples: usize, tol: f64) -> Result<QpProbeReport> {
    let freq = spec.freq();
    let x = |t: f64| series.evaluate(freq, t).re;
    let v = |t: f64| {
        series
            .iter()
            .map(|(m, c)| (Complex64::new(0.0, small_divisor(freq, m)) * c * Complex64::from_polar(1.0, small_divisor(freq, m) * t)).re)
            .sum::<f64>()
    };
    let state0 = [x(0.0), v(0.0)];
    if spec.epsilon().norm() == 0.0 {
        // the constant c₀ is the exact solution in this limit
        let sup = (0..=samples)
            .map(|j| t_long * j as f64 / samples as f64)
            .map(|t| ((x(t) - spec.c0()).abs(), t))
            .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
        return Ok(QpProbeReport { t_long, samples, initial_state: state0, sup_distance: sup.0, argmax_t: sup.1 });
    }
    let times: Vec<f64> = (0..=samples).map(|j| t_long * j as f64 / samples as f64).collect();
    let traj = integrate_sampled(spec, state0, &times, tol)?;
    let mut sup = 0.0;
    let mut arg = 0.0;
    for (t, s) in times.iter().zip(&traj.states) {
        let d = (s[0] - x(*t)).abs();
        if d > sup {
            sup = d;
            arg = *t;
        }
    }
    Ok(QpProbeReport { t_long, samples, initial_state: state0, sup_distance: sup, argmax_t: arg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier_core::FrequencyVector;

    fn constant(alpha: f64, eps: f64) -> ProblemSpec {
        ProblemSpec::new(TrigSeries::constant(1, alpha), FrequencyVector::periodic(1.0), NonlinearitySpec::quadratic(), Complex64::new(eps, 0.0))
            .unwrap()
    }

    #[test]
    fn fixed_point_is_stationary() {
        let s = constant(2.0, 0.1);
        let traj = integrate(&s, [2f64.sqrt(), 0.0], (0.0, 100.0), 1e-12).unwrap();
        let drift = traj.states.iter().map(|st| (st[0] - 2f64.sqrt()).abs().max(st[1].abs())).fold(0.0, f64::max);
        assert!(drift < 1e-10, "{drift}");
    }

    #[test]
    fn damped_relaxation() {
        let s = constant(36.0, 0.1);
        let traj = integrate(&s, [6.1, 0.0], (0.0, 10.0), 1e-12).unwrap();
        let end = traj.last();
        assert!((end[0] - 6.0).abs().max(end[1].abs()) < 1e-6);
    }

    #[test]
    fn relaxation_rate_matches_linearization() {
        let s = constant(1.0, 0.1);
        let times: Vec<f64> = (0..=60).map(|j| j as f64).collect();
        let traj = integrate_sampled(&s, [1.1, 0.0], &times, 1e-12).unwrap();
        let d: Vec<f64> = traj.states.iter().map(|st| (st[0] - 1.0).abs()).collect();
        let slow = (10.0 - (100.0f64 - 8.0).sqrt()) / 2.0;
        let rate = (d[40] / d[50]).ln() / 10.0;
        assert!((rate - slow).abs() < 1e-3 * slow, "{rate} {slow}");
        // monotone approach on the tail
        assert!(d[5..].windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn complex_epsilon_rejected() {
        let s = constant(1.0, 0.1).with_epsilon(Complex64::new(0.1, 0.1));
        assert!(matches!(integrate(&s, [1.0, 0.0], (0.0, 1.0), 1e-10), Err(Error::Precondition { .. })));
    }

    #[test]
    fn fixed_point_multipliers() {
        let s = constant(1.0, 0.1);
        let orbit = find_periodic_orbit(&s, &OrbitOptions::default()).unwrap();
        assert!((orbit.initial_state[0] - 1.0).abs() < 1e-12);
        let gamma: f64 = 10.0;
        let disc = (gamma * gamma - 8.0).sqrt();
        let t = 2.0 * PI;
        let mut want = [((-gamma + disc) / 2.0 * t).exp(), ((-gamma - disc) / 2.0 * t).exp()];
        let mut got = [orbit.floquet_multipliers[0].re, orbit.floquet_multipliers[1].re];
        want.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        assert!((got[1] - want[1]).abs() < 1e-9 * want[1]);
        assert!(got[0].abs() < 1e-12);
        assert!(orbit.is_attracting());
    }
}
