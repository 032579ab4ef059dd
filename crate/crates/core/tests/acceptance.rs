//! Acceptance criteria: one PASS/FAIL line each, with timing.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};
use varactor_core::borel_lab::*;
use varactor_core::formal_expansion::*;
use varactor_core::fourier_core::*;
use varactor_core::multiscale_rg::*;
use varactor_core::ode_oracle::*;
use varactor_core::resummation::*;
use varactor_core::tree_engine::*;

type Outcome = Result<String, String>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ok<T, E: std::fmt::Debug>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| format!("{e:?}"))
}

fn max_diff(a: &TrigSeries, b: &TrigSeries) -> f64 {
    a.iter().map(|(m, z)| (z - b.get(m)).norm()).chain(b.iter().map(|(m, z)| (z - a.get(m)).norm())).fold(0.0, f64::max)
}

fn periodic(pairs: Vec<(Mode, Complex64)>, g: NonlinearitySpec, eps: f64) -> ProblemSpec {
    ProblemSpec::new(TrigSeries::real_from_pairs(1, pairs).unwrap(), FrequencyVector::periodic(1.0), g, c(eps)).unwrap()
}

fn golden(pairs: Vec<(Mode, Complex64)>, eps: f64) -> ProblemSpec {
    ProblemSpec::new(TrigSeries::real_from_pairs(2, pairs).unwrap(), FrequencyVector::golden(50), NonlinearitySpec::quadratic(), c(eps)).unwrap()
}

fn two_mode(eps: f64) -> ProblemSpec {
    golden(vec![(Mode::zero(2), c(1.0)), (Mode::new(&[1, 0]), Complex64::new(0.0, -0.125)), (Mode::new(&[0, 1]), Complex64::new(0.0, -0.125))], eps)
}

fn compatibility_constants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let alpha = rng.gen_range(0.1..10.0);
        let beta = rng.gen_range(0.0..1.0);
        let e = ok(formal_orders(&ok(ProblemSpec::alpha_beta_sin(alpha, beta, 1.0, 0.05))?, 4))?;
        worst = worst.max((e.constants[0] - f64::sqrt(alpha)).abs()).max(e.constants[1].abs());
    }
    ensure(worst <= 1e-14, format!("deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:e}"))
}

fn support_radius_bound() -> Outcome {
    let e = ok(formal_orders(&ok(ProblemSpec::alpha_beta_sin(1.0, 0.5, 1.0, 0.05))?, 10))?;
    for (k, s) in e.orders.iter().enumerate() {
        ensure(s.support_radius() as usize <= (k + 1) / 2, format!("order {k} reaches |nu| = {}", s.support_radius()))?;
    }
    Ok("K = 10".into())
}

fn tree_equivalence() -> Outcome {
    let spec = ok(ProblemSpec::alpha_beta_sin(1.0, 0.5, 1.0, 0.05))?;
    let mut trees = 0;
    let mut worst: f64 = 0.0;
    for kind in [ExpansionKind::Formal, ExpansionKind::Resummed] {
        let rec = match kind {
            ExpansionKind::Formal => ok(formal_orders(&spec, 5))?,
            ExpansionKind::Resummed => ok(resummed_orders(&spec, 5))?,
        };
        let mut nus = modes_within(1, 3);
        nus.push(Mode::scalar(0));
        for k in 1..=5 {
            for nu in &nus {
                let mut sum = c(0.0);
                for t in ok(enumerate(&spec, k, nu, kind, u32::MAX, EnumerationLimits::default()))? {
                    ok(lemma3_audit(&t))?;
                    sum += value(&t, &spec);
                    trees += 1;
                }
                let r = rec.coeff(k, nu);
                let d = (sum - r).norm();
                ensure(d <= 1e-12 * r.norm() || d == 0.0, format!("{kind:?} k={k} nu={nu:?}: {d:e}"))?;
                if r.norm() > 0.0 {
                    worst = worst.max(d / r.norm());
                }
            }
        }
    }
    Ok(format!("{trees} trees, max relative {worst:e}"))
}

fn growth_separation() -> Outcome {
    let pairs = (0..=12).map(|n| (Mode::scalar(n), c((-(n as f64)).exp()))).collect();
    let spec = periodic(pairs, NonlinearitySpec::quadratic(), 0.05);
    let g = ok(growth_diagnostic(&ok(formal_orders(&spec, 20))?))?;
    ensure(g.selected == GrowthModel::Factorial, format!("formal selected {:?}", g.selected))?;
    ensure((0.8..=1.2).contains(&g.sigma_hat), format!("sigma {}", g.sigma_hat))?;
    let r = ok(growth_diagnostic(&ok(resummed_orders(&spec, 20))?))?;
    ensure(r.selected == GrowthModel::Geometric, format!("resummed selected {:?}", r.selected))?;
    ensure(r.geometric_ratio < 0.9, format!("ratio {}", r.geometric_ratio))?;
    Ok(format!("sigma {:.3}, resummed ratio {:.3}", g.sigma_hat, r.geometric_ratio))
}

fn linear_exactness() -> Outcome {
    let f = vec![(Mode::scalar(1), Complex64::new(0.0, -0.5)), (Mode::scalar(2), c(0.3))];
    let spec = periodic(f, NonlinearitySpec::linear(), 0.1);
    let exact = ok(linear_exact(&spec))?;
    let e = ok(resummed_orders(&spec, 8))?;
    ensure(e.orders.iter().skip(2).all(|s| s.is_empty()), "nonzero order >= 2")?;
    let d = max_diff(&partial_sum(&e, 8, 1.0), &exact);
    ensure(d <= 1e-15, format!("series differs by {d:e}"))?;
    let r = ok(residual(&exact, &spec))?;
    ensure(r <= 1e-14, format!("residual {r:e}"))?;
    Ok(format!("residual {r:e}"))
}

fn three_way() -> Outcome {
    let eps = 0.05;
    let spec = ok(ProblemSpec::alpha_beta_sin(1.0, 0.5, 1.0, eps))?;
    let res = partial_sum(&ok(resummed_orders(&spec, 12))?, 12, 1.0);
    let borel = ok(borel_pade_laplace(&ok(formal_orders(&spec, 16))?, eps, &BorelOptions::default()))?;
    let orbit = ok(find_periodic_orbit(&spec, &OrbitOptions::default()))?;
    let times: Vec<f64> = (0..=256).map(|j| 2.0 * PI * j as f64 / 256.0).collect();
    let traj = ok(integrate_sampled(&spec, orbit.initial_state, &times, 1e-14))?;
    let (mut rb, mut ro, mut bo) = (0.0f64, 0.0f64, 0.0f64);
    for (t, st) in times.iter().zip(&traj.states) {
        let (a, b, o) = (res.evaluate_real(spec.freq(), *t), borel.evaluate(spec.freq(), *t), st[0]);
        rb = rb.max((a - b).abs());
        ro = ro.max((a - o).abs());
        bo = bo.max((b - o).abs());
    }
    ensure(rb.max(ro).max(bo) <= 1e-6, format!("resum-borel {rb:e}, resum-oracle {ro:e}, borel-oracle {bo:e}"))?;
    Ok(format!("resum-borel {rb:.1e}, resum-oracle {ro:.1e}, borel-oracle {bo:.1e}"))
}

fn asymptoticity() -> Outcome {
    let pairs: Vec<(Mode, Complex64)> = (0..=60).map(|n| (Mode::scalar(n), c(if n == 0 { 1.0 } else { 0.1 * (-0.25 * n as f64).exp() }))).collect();
    let mut reports = Vec::new();
    for eps in [0.02, 0.05, 0.1] {
        let spec = periodic(pairs.clone(), NonlinearitySpec::quadratic(), eps);
        let formal = ok(formal_orders(&spec, 30))?;
        let reference = partial_sum(&ok(resummed_orders(&spec, 40))?, 40, 1.0);
        let r = ok(asymptoticity_check(&formal, &reference, eps, 0..=31))?;
        ensure(r.dip_then_rise, format!("eps {eps}: no dip then rise"))?;
        ensure(r.factorial_preferred(), format!("eps {eps}: geometric fit preferred"))?;
        reports.push(r);
    }
    let n_star: Vec<usize> = reports.iter().map(|r| r.n_star).collect();
    let sweep = ok(AsymptoticSweep::from_reports(reports))?;
    ensure(sweep.n_star_decreasing(), format!("N* = {n_star:?}"))?;
    ensure(sweep.joint_factorial.aic < sweep.joint_geometric.aic, "joint geometric fit preferred")?;
    Ok(format!("N* = {n_star:?}, AIC {:.1} vs {:.1}", sweep.joint_factorial.aic, sweep.joint_geometric.aic))
}

fn propagator_domain() -> Outcome {
    let freq = FrequencyVector::periodic(1.0);
    let r = 0.2;
    ensure(4.0 * r < 1.0, "4 omega R >= 1")?;
    let grid = AuditGrid { radius: r, n_rho: 40, n_phi: 40, ..AuditGrid::default() };
    let mut worst = f64::INFINITY;
    for eps in grid.disc_points() {
        let rep = ok(lemma4_domain_check(eps, &freq, 50))?;
        ensure(rep.pass, format!("eps {eps}: min {}", rep.minimum))?;
        worst = worst.min(rep.minimum);
    }
    ensure(worst >= 0.5, format!("min {worst}"))?;
    Ok(format!("min {worst:.4} >= 0.5"))
}

fn quasi_periodic() -> Outcome {
    let eps = 0.02;
    let spec = two_mode(eps);
    let part = ok(ScalePartition::certified(&spec, CutoffStyle::Sharp, 100))?;
    let table = ok(counterterms(&spec, &part, 3))?;
    let lead = (table.leading - c(-2.0 * eps * spec.c0())).norm();
    ensure(lead <= 1e-12, format!("(a) leading term off by {lead:e}"))?;
    let m: Vec<f64> = (0..=6).map(|n| table.scale_value(n).norm()).collect();
    ensure(m.windows(2).all(|w| w[1] <= w[0]), format!("(b) M = {m:?}"))?;
    // strict decay where every scale is populated
    let mut rich: Vec<(Mode, Complex64)> =
        modes_within(2, 40).into_iter().filter(|m| m.is_canonical()).map(|m| (m.clone(), c(0.1 * (-0.5 * m.l1() as f64).exp()))).collect();
    rich.push((Mode::zero(2), c(1.0)));
    let rich = golden(rich, eps);
    let rich_part = ok(ScalePartition::certified(&rich, CutoffStyle::Sharp, 100))?;
    let rich_table = ok(counterterms(&rich, &rich_part, 3))?;
    let mr: Vec<f64> = (0..=4).map(|n| rich_table.scale_value(n).norm()).collect();
    ensure(mr.windows(2).all(|w| w[1] < w[0]), format!("(b) analytic forcing M = {mr:?}"))?;
    let e = ok(qp_resummed_orders(&spec, &part, &table, 8))?;
    let res: Vec<f64> = (1..=8).map(|k| residual(&partial_sum(&e, k, 1.0), &spec)).collect::<Result<_, _>>().map_err(|e| format!("{e:?}"))?;
    let rate = (res[res.len() - 1] / res[0]).powf(1.0 / (res.len() - 1) as f64);
    ensure(res.windows(2).all(|w| w[1] < w[0]) && rate < 0.5, format!("(c) residuals {res:?}"))?;
    let probe = ok(quasi_periodic_probe(&spec, &partial_sum(&e, 8, 1.0), 200.0, 4000, 1e-12))?;
    ensure(probe.sup_distance <= 1e-5, format!("(d) shadowing {:e}", probe.sup_distance))?;
    Ok(format!("residual rate {rate:.2e}, shadowing {:.1e}", probe.sup_distance))
}

fn eps_consistency() -> Outcome {
    let spec = ok(ProblemSpec::alpha_beta_sin(1.0, 0.5, 1.0, 0.05))?;
    let formal = ok(formal_orders(&spec, 8))?;
    let collected = collect_eps_orders(1, &ok(resummed_eps_jets::<9>(&spec, 8))?);
    let mut worst: f64 = 0.0;
    for j in 0..=8 {
        let d = max_diff(&collected[j], &formal.orders[j]) / formal.orders[j].max_abs().max(f64::MIN_POSITIVE);
        ensure(d <= 1e-10, format!("periodic eps^{j}: {d:e}"))?;
        worst = worst.max(d);
    }
    let qp = two_mode(0.02);
    let part = ok(ScalePartition::certified(&qp, CutoffStyle::Sharp, 100))?;
    let formal = ok(formal_orders(&qp, 5))?;
    let collected = collect_eps_orders(2, &ok(qp_eps_jets::<6>(&qp, &part, 3, 5))?);
    for j in 0..=5 {
        let d = max_diff(&collected[j], &formal.orders[j]) / formal.orders[j].max_abs().max(f64::MIN_POSITIVE);
        ensure(d <= 1e-10, format!("quasi-periodic eps^{j}: {d:e}"))?;
        worst = worst.max(d);
    }
    Ok(format!("max relative {worst:e}"))
}

fn bound_audits() -> Outcome {
    let spec = two_mode(0.02);
    let part = ok(ScalePartition::certified(&spec, CutoffStyle::Sharp, 100))?;
    let report = ok(bound_lemma_audit(&AuditGrid::default(), &part, &spec))?;
    for a in &report.audits {
        ensure(a.pass && a.min_ratio >= 1.0, format!("{} min ratio {}", a.lemma, a.min_ratio))?;
    }
    let s = &report.sharpness;
    ensure(s.outside_domain && s.ratio < 1.0, format!("sharpness probe ratio {}", s.ratio))?;
    let mins: Vec<String> = report.audits.iter().map(|a| format!("{} {:.2}", a.lemma, a.min_ratio)).collect();
    Ok(format!("{}; probe {:.1e}", mins.join(", "), s.ratio))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<u64>); 11] = [
        ("compatibility constants", compatibility_constants, Some(1)),
        ("support bound", support_radius_bound, Some(1)),
        ("tree-recursion equivalence", tree_equivalence, Some(60)),
        ("factorial vs geometric growth", growth_separation, Some(300)),
        ("linear exactness", linear_exactness, None),
        ("three-way periodic agreement", three_way, Some(120)),
        ("asymptoticity signature", asymptoticity, Some(120)),
        ("propagator domain audit", propagator_domain, Some(10)),
        ("quasi-periodic pipeline", quasi_periodic, Some(600)),
        ("epsilon-expansion consistency", eps_consistency, None),
        ("bound-lemma audits", bound_audits, Some(60)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if elapsed > Duration::from_secs(*b) => Err(format!("took {:.2}s, budget {b}s", elapsed.as_secs_f64())),
            (o, _) => o,
        };
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("AC{:<2} {tag} {name} ({:.2}s): {detail}", i + 1, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
