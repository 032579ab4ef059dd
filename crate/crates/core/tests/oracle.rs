use num_complex::Complex64;
use std::f64::consts::PI;
use varactor_core::formal_expansion::NonlinearitySpec;
use varactor_core::fourier_core::*;
use varactor_core::multiscale_rg::*;
use varactor_core::ode_oracle::*;
use varactor_core::resummation::{partial_sum, resummed_orders};
use varactor_core::Error;

fn periodic(alpha: f64, beta: f64, eps: f64) -> ProblemSpec {
    ProblemSpec::alpha_beta_sin(alpha, beta, 1.0, eps).unwrap()
}

fn golden(beta: f64, eps: f64) -> ProblemSpec {
    let f = TrigSeries::real_from_pairs(
        2,
        [(Mode::zero(2), Complex64::new(1.0, 0.0)), (Mode::new(&[1, 0]), Complex64::new(0.0, -beta / 2.0)), (Mode::new(&[0, 1]), Complex64::new(0.0, -beta / 2.0))],
    )
    .unwrap();
    ProblemSpec::new(f, FrequencyVector::golden(50), NonlinearitySpec::quadratic(), Complex64::new(eps, 0.0)).unwrap()
}

#[test]
fn trajectory_times_increase() {
    let s = periodic(1.0, 0.5, 0.1);
    let traj = integrate(&s, [1.0, 0.0], (0.0, 30.0), 1e-12).unwrap();
    assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    assert!(traj.states.iter().all(|st| st[0].is_finite() && st[1].is_finite()));
    assert_eq!(traj.stepper.order, METHOD_ORDER);
}

#[test]
fn escape_is_reported() {
    let s = periodic(1.0, 0.0, 0.5);
    match integrate(&s, [-20.0, -5.0], (0.0, 50.0), 1e-10) {
        Err(Error::Escape { t, .. }) => assert!(t > 0.0 && t < 50.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn step_refinement_convergence_order() {
    let s = periodic(1.0, 0.5, 0.5);
    let run = |n| integrate_fixed(&s, [1.2, 0.1], (0.0, 4.0), n).unwrap()[0];
    let (a, b, c) = (run(20), run(40), run(80));
    let order = ((a - b).abs() / (b - c).abs()).log2();
    assert!((order - METHOD_ORDER as f64).abs() < 0.5, "{order}");
}

#[test]
fn variational_jacobian_matches_finite_differences() {
    let s = periodic(1.0, 0.5, 0.1);
    let y0 = [1.05, 0.02];
    let (_, phi) = stroboscopic_map(&s, y0, 1e-14).unwrap();
    let h = 1e-6;
    for j in 0..2 {
        let mut p = y0;
        let mut m = y0;
        p[j] += h;
        m[j] -= h;
        let (fp, _) = stroboscopic_map(&s, p, 1e-14).unwrap();
        let (fm, _) = stroboscopic_map(&s, m, 1e-14).unwrap();
        for i in 0..2 {
            let fd = (fp[i] - fm[i]) / (2.0 * h);
            let scale = phi.column(j).amax().max(1e-300);
            assert!((fd - phi[(i, j)]).abs() <= 1e-6 * scale, "({i},{j}) fd={fd} var={}", phi[(i, j)]);
        }
    }
}

#[test]
fn forced_orbit_is_attracting_and_near_c0() {
    let eps = 0.05;
    let s = periodic(1.0, 0.5, eps);
    let orbit = find_periodic_orbit(&s, &OrbitOptions::default()).unwrap();
    assert!(orbit.residual <= 1e-12);
    assert!((orbit.period - 2.0 * PI).abs() < 1e-15);
    assert!((orbit.initial_state[0] - 1.0).abs() < 10.0 * eps);
    assert!(orbit.is_attracting());
    // multipliers are the monodromy eigenvalues
    let m = orbit.monodromy;
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let [l1, l2] = orbit.floquet_multipliers;
    assert!(((l1 + l2).re - tr).abs() < 1e-12 && ((l1 * l2).re - det).abs() < 1e-12);
}

#[test]
fn time_shifted_forcing_shifts_the_orbit() {
    let s = periodic(1.0, 0.5, 0.05);
    let delta = 0.7;
    let shifted = TrigSeries::from_pairs(1, s.forcing().iter().map(|(m, c)| (m.clone(), c * Complex64::from_polar(1.0, m.components()[0] as f64 * delta))))
        .unwrap();
    let s2 = ProblemSpec::new(shifted, FrequencyVector::periodic(1.0), NonlinearitySpec::quadratic(), s.epsilon()).unwrap();
    let o1 = find_periodic_orbit(&s, &OrbitOptions::default()).unwrap();
    let o2 = find_periodic_orbit(&s2, &OrbitOptions::default()).unwrap();
    let moved = integrate_sampled(&s, o1.initial_state, &[0.0, delta], 1e-14).unwrap().last();
    assert!((moved[0] - o2.initial_state[0]).abs().max((moved[1] - o2.initial_state[1]).abs()) < 1e-8);
}

#[test]
fn orbit_fourier_matches_resummed_series() {
    let s = periodic(1.0, 0.5, 0.05);
    let orbit = find_periodic_orbit(&s, &OrbitOptions::default()).unwrap();
    let coeffs = orbit_fourier(&s, &orbit, 256, 5, 1e-14).unwrap();
    let e = resummed_orders(&s, 12).unwrap();
    let series = partial_sum(&e, 12, 1.0);
    for n in -5..=5 {
        let nu = Mode::scalar(n);
        let d = (coeffs.get(&nu) - series.get(&nu)).norm();
        assert!(d < 1e-8, "nu={n}: {d}");
    }
}

#[test]
fn probe_is_exact_at_zero_epsilon() {
    let s = golden(0.25, 0.0);
    let r = quasi_periodic_probe(&s, &TrigSeries::constant(2, 1.0), 200.0, 400, 1e-12).unwrap();
    assert_eq!(r.sup_distance, 0.0);
}

#[test]
fn probe_tightens_with_order() {
    let s = golden(0.25, 0.02);
    let part = ScalePartition::certified(&s, CutoffStyle::Sharp, 50).unwrap();
    let table = counterterms(&s, &part, 3).unwrap();
    let e = qp_resummed_orders(&s, &part, &table, 8).unwrap();
    let dist = |k| quasi_periodic_probe(&s, &partial_sum(&e, k, 1.0), 200.0, 4000, 1e-12).unwrap().sup_distance;
    let (d2, d4, d8) = (dist(2), dist(4), dist(8));
    assert!(d4 < d2 && d8 < d4, "{d2} {d4} {d8}");
    assert!(d8 <= 1e-5, "{d8}");
}
