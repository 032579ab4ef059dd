use super::config::RunConfig;
use super::output::{ArtifactDir, Cell, Csv};
use super::{CliError, Command, RunFlags};
use crate::borel_lab::{asymptoticity_check, borel_pade_laplace, borel_transform, AsymptoticSweep, BorelOptions};
use crate::error::Error;
use crate::formal_expansion::{formal_orders, growth_diagnostic, support_check, ExpansionKind, SeriesExpansion};
use crate::fourier_core::{modes_within, Mode, ProblemSpec, TrigSeries};
use crate::multiscale_rg::{bound_lemma_audit, AuditGrid};
use crate::multiscale_rg::{
    assign_scale, counterterm_smallness, counterterms, fit_scale_decay, populated_divisors, qp_resummed_orders, ScalePartition,
};
use crate::ode_oracle::{find_periodic_orbit, integrate_sampled, orbit_fourier, period, quasi_periodic_probe, OrbitOptions};
use crate::resummation::{lemma4_domain_check, mu_radius_estimate, partial_sum, residual, resummed_orders};
use crate::tree_engine::{lemma3_audit, node_value, to_dot, EnumerationLimits, Tree, TreeGenerator};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::json;

pub(super) struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub spec: &'a ProblemSpec,
    pub flags: RunFlags,
}

type Outcome = Result<(), CliError>;

pub(super) fn dispatch(command: Command, ctx: &Context, dir: &mut ArtifactDir) -> Outcome {
    match command {
        Command::Formal => formal(ctx, dir),
        Command::Trees => trees(ctx, dir),
        Command::Resum => resum(ctx, dir),
        Command::Borel => borel(ctx, dir),
        Command::Oracle => oracle(ctx, dir),
        Command::Qp => qp(ctx, dir),
        Command::Compare => compare(ctx, dir),
        Command::Props => props(ctx, dir),
    }
}

fn mode_header(d: usize) -> Vec<String> {
    if d == 1 {
        vec!["nu".into()]
    } else {
        (1..=d).map(|j| format!("nu{j}")).collect()
    }
}

fn mode_cells(m: &Mode) -> Vec<Cell> {
    m.components().iter().map(|&c| Cell::from(c)).collect()
}

fn orders_csv(e: &SeriesExpansion) -> Vec<u8> {
    let d = e.problem.dim();
    let mut header = vec!["k".to_string()];
    header.extend(mode_header(d));
    header.extend(["re".into(), "im".into()]);
    let mut csv = Csv::new(&header);
    for (k, m, re, im) in e.rows() {
        let mut row = vec![Cell::from(k)];
        row.extend(mode_cells(&m));
        row.extend([Cell::from(re), Cell::from(im)]);
        csv.row(row);
    }
    csv.into_bytes()
}

fn constants_csv(e: &SeriesExpansion) -> Vec<u8> {
    let mut csv = Csv::new(&["k", "c_k"]);
    for (k, c) in e.constants.iter().enumerate() {
        csv.row(vec![k.into(), (*c).into()]);
    }
    csv.into_bytes()
}

fn series_csv(s: &TrigSeries) -> Vec<u8> {
    let mut header = mode_header(s.dim());
    header.extend(["re".into(), "im".into()]);
    let mut csv = Csv::new(&header);
    for (m, c) in s.iter() {
        let mut row = mode_cells(m);
        row.extend([Cell::from(c.re), Cell::from(c.im)]);
        csv.row(row);
    }
    csv.into_bytes()
}

fn real_eps(spec: &ProblemSpec) -> Result<f64, Error> {
    let eps = spec.epsilon();
    if eps.im != 0.0 {
        return Err(Error::InvalidProblem { reason: "this command needs a real epsilon".into() });
    }
    Ok(eps.re)
}

/// Equally spaced times over one period of the first frequency.
fn period_grid(spec: &ProblemSpec, samples: usize) -> Vec<f64> {
    let t = 2.0 * std::f64::consts::PI / spec.freq().omega()[0].abs();
    (0..samples).map(|j| t * j as f64 / samples as f64).collect()
}

fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn formal(ctx: &Context, dir: &mut ArtifactDir) -> Outcome {
    let e = formal_orders(ctx.spec, ctx.cfg.formal.order)?;
    dir.write("orders.csv", &orders_csv(&e))?;
    dir.write("constants.csv", &constants_csv(&e))?;
    let growth = growth_diagnostic(&e)?;
    let support = support_check(&e, ctx.spec.forcing_degree());
    let mut csv = Csv::new(&["k", "m_k"]);
    for (k, m) in e.order_norms().iter().enumerate() {
        csv.row(vec![k.into(), (*m).into()]);
    }
    dir.write("growth.csv", &csv.into_bytes())?;
    dir.write_json("growth.json", &json!({ "growth": growth, "support": support, "support_pass": support.all_pass() }))?;
    Ok(())
}

#[derive(Serialize)]
struct TreeCheck {
    expansion: ExpansionKind,
    classes: usize,
    trees: usize,
    max_relative_error: f64,
    lemma3_violations: usize,
}

fn trees(ctx: &Context, dir: &mut ArtifactDir) -> Outcome {
    let spec = ctx.spec;
    let tc = &ctx.cfg.trees;
    let limits = EnumerationLimits { k_max: tc.order, max_trees: tc.max_trees };
    let d = spec.dim();
    let mut header = vec!["expansion".to_string(), "k".into()];
    header.extend(mode_header(d));
    header.extend(["trees", "tree_re", "tree_im", "recursion_re", "recursion_im", "relative_error"].map(String::from));
    let mut csv = Csv::new(&header);
    let mut checks = Vec::new();
    let mut violations = Vec::new();
    for expansion in [ExpansionKind::Formal, ExpansionKind::Resummed] {
        let rec = match expansion {
            ExpansionKind::Formal => formal_orders(spec, tc.order)?,
            ExpansionKind::Resummed => resummed_orders(spec, tc.order)?,
        };
        let mut gen = TreeGenerator::new(spec, expansion, u32::MAX, limits);
        let mut check = TreeCheck { expansion, classes: 0, trees: 0, max_relative_error: 0.0, lemma3_violations: 0 };
        let label = match expansion {
            ExpansionKind::Formal => "formal",
            ExpansionKind::Resummed => "resummed",
        };
        for k in 1..=tc.order {
            for nu in modes_within(d, tc.mode_radius.max(0) as u32) {
                let class = gen.class(k, &nu)?;
                let sum: Complex64 = class.iter().map(|n| node_value(n, spec, expansion)).sum();
                for root in class.iter() {
                    let tree = Tree { root: root.clone(), k, nu: nu.clone(), expansion };
                    if let Err(v) = lemma3_audit(&tree) {
                        check.lemma3_violations += 1;
                        if violations.len() < 100 {
                            violations.push(v);
                        }
                    }
                }
                let r = rec.coeff(k, &nu);
                let rel = (sum - r).norm() / r.norm().max(f64::MIN_POSITIVE);
                let rel = if r.norm() == 0.0 && sum.norm() == 0.0 { 0.0 } else { rel };
                check.classes += 1;
                check.trees += class.len();
                check.max_relative_error = check.max_relative_error.max(rel);
                let mut row = vec![Cell::from(label), k.into()];
                row.extend(mode_cells(&nu));
                row.extend([class.len().into(), sum.re.into(), sum.im.into(), r.re.into(), r.im.into(), rel.into()]);
                csv.row(row);
            }
        }
        if tc.dot && tc.order >= 1 {
            let mut unit = vec![0; d];
            unit[0] = 1;
            let nu = Mode::new(&unit);
            let class = gen.class(tc.order, &nu)?;
            let dot: String = class
                .iter()
                .take(64)
                .map(|root| to_dot(&Tree { root: root.clone(), k: tc.order, nu: nu.clone(), expansion }))
                .collect::<Vec<_>>()
                .join("\n");
            dir.write(&format!("trees_{label}.dot"), dot.as_bytes())?;
        }
        checks.push(check);
    }
    dir.write("trees.csv", &csv.into_bytes())?;
    dir.write_json("trees.json", &json!({ "checks": checks, "violations": violations }))?;
    Ok(())
}

fn resum(ctx: &Context, dir: &mut ArtifactDir) -> Outcome {
    let spec = ctx.spec;
    let k = ctx.cfg.resum.order;
    let e = resummed_orders(spec, k)?;
    dir.write("orders.csv", &orders_csv(&e))?;
    dir.write("constants.csv", &constants_csv(&e))?;
    let res = residual(&partial_sum(&e, k, 1.0), spec)?;
    let domain = if spec.dim() == 1 { Some(lemma4_domain_check(spec.epsilon(), spec.freq(), ctx.cfg.resum.nu_max)?) } else { None };
    let radius = mu_radius_estimate(&e);
    dir.write_json(
        "summary.json",
        &json!({
            "epsilon": complex_pair(spec.epsilon()),
            "K": k,
            "radius_estimate": if radius.is_finite() { json!(radius) } else { json!("inf") },
            "residual": res,
            "domain_margin": domain.as_ref().map(|d| d.margin),
            "domain_check": domain,
        }),
    )?;
    Ok(())
}

fn borel(ctx: &Context, dir: &mut ArtifactDir) -> Outcome {
    let spec = ctx.spec;
    let bc = &ctx.cfg.borel;
    let eps = real_eps(spec)?;
    let e = formal_orders(spec, bc.order)?;
    let transform = borel_transform(&e)?;
    let mut header = vec!["k".to_string()];
    header.extend(mode_header(spec.dim()));
    header.extend(["re".into(), "im".into()]);
    let mut csv = Csv::new(&header);
    for (k, s) in transform.coeffs.iter().enumerate() {
        for (m, c) in s.iter() {
            let mut row = vec![Cell::from(k)];
            row.extend(mode_cells(m));
            row.extend([Cell::from(c.re), Cell::from(c.im)]);
            csv.row(row);
        }
    }
    dir.write("borel_coefficients.csv", &csv.into_bytes())?;

    let opts = BorelOptions { max_denominator: bc.max_denominator, precision: ctx.flags.precision.into(), ..BorelOptions::default() };
    let sum = borel_pade_laplace(&e, eps, &opts)?;
    let times = period_grid(spec, bc.samples);
    let mut csv = Csv::new(&["t", "x"]);
    let mut by_time = Vec::new();
    for &t in &times {
        let x = sum.evaluate(spec.freq(), t);
        csv.row(vec![t.into(), x.into()]);
        by_time.push([t, x]);
    }
    dir.write("laplace.csv", &csv.into_bytes())?;
    let modes: Vec<_> = sum
        .modes
        .iter()
        .map(|m| {
            json!({
                "mode": m.mode.components(),
                "leading_order": m.leading_order,
                "pade_orders": [m.pade_orders.0, m.pade_orders.1],
                "pole_locations": m.poles.iter().map(|p| complex_pair(*p)).collect::<Vec<_>>(),
                "deflated": m.deflated,
                "value": complex_pair(m.value),
                "error_estimate": m.error,
            })
        })
        .collect();
    dir.write_json(
        "borel.json",
        &json!({
            "epsilon": eps,
            "K_used": sum.k_used,
            "precision": ctx.flags.precision,
            "radius_estimate": transform.radius_est,
            "modes": modes,
            "laplace_value_by_time": by_time,
            "error_bound": sum.error_bound(),
        }),
    )?;

    let eps_list: Vec<f64> = if bc.epsilons.is_empty() { vec![eps] } else { bc.epsilons.iter().map(|r| r.0).collect() };
    let fe = formal_orders(spec, bc.asymptotic_order)?;
    let mut reports = Vec::new();
    let mut csv = Csv::new(&["epsilon", "N", "remainder"]);
    for &ep in &eps_list {
        let rspec = spec.with_epsilon(Complex64::new(ep, 0.0));
        let reference = partial_sum(&resummed_orders(&rspec, bc.reference_order)?, bc.reference_order, 1.0);
        let rep = asymptoticity_check(&fe, &reference, ep, 0..=bc.asymptotic_order)?;
        for row in &rep.rows {
            csv.row(vec![ep.into(), row.n.into(), row.remainder.into()]);
        }
        reports.push(rep);
    }
    dir.write("remainder.csv", &csv.into_bytes())?;
    if reports.len() >= 2 {
        let sweep = AsymptoticSweep::from_reports(reports)?;
        let decreasing = sweep.n_star_decreasing();
        dir.write_json("asymptoticity.json", &json!({ "sweep": sweep, "n_star_decreasing": decreasing }))?;
    } else {
        dir.write_json("asymptoticity.json", &json!({ "reports": reports }))?;
    }
    Ok(())
}

fn orbit_options(tol: f64) -> OrbitOptions {
    OrbitOptions { integration_tol: tol, ..OrbitOptions::default() }
}

fn oracle(ctx: &Context, dir: &mut ArtifactDir) -> Outcome {
    let spec = ctx.spec;
    let oc = &ctx.cfg.oracle;
    let tol = oc.tol.0;
    real_eps(spec)?;
    let n = oc.samples.max(1);
    let times: Vec<f64> = (0..=n).map(|j| oc.t_end.0 * j as f64 / n as f64).collect();
    let start = if spec.dim() == 1 {
        let orbit = find_periodic_orbit(spec, &orbit_options(tol))?;
        dir.write_json(
            "orbit.json",
            &json!({
                "x0": orbit.initial_state[0],
                "v0": orbit.initial_state[1],
                "period": orbit.period,
                "multipliers": orbit.floquet_multipliers.iter().map(|m| complex_pair(*m)).collect::<Vec<_>>(),
                "residual": orbit.residual,
                "iterations": orbit.iterations,
                "attracting": orbit.is_attracting(),
                "monodromy": orbit.monodromy,
            }),
        )?;
        let fourier = orbit_fourier(spec, &orbit, oc.samples, oc.nu_max, tol)?;
        dir.write("orbit_fourier.csv", &series_csv(&fourier))?;
        orbit.initial_state
    } else {
        [spec.c0(), 0.0]
    };
    let traj = integrate_sampled(spec, start, &times, tol)?;
    let mut csv = Csv::new(&["t", "x", "xdot"]);
    for (t, s) in traj.times.iter().zip(&traj.states) {
        csv.row(vec![(*t).into(), s[0].into(), s[1].into()]);
    }
    dir.write("trajectory.csv", &csv.into_bytes())?;
    Ok(())
}

fn qp(ctx: &Context, dir: &mut ArtifactDir) -> Outcome {
    let spec = ctx.spec;
    let qc = &ctx.cfg.qp;
    let scan = ctx.cfg.problem.diophantine_radius.unwrap_or(50);
    let part = ScalePartition::certified(spec, qc.cutoff, scan)?;
    let table = counterterms(spec, &part, qc.k_m)?;
    let mut csv = Csv::new(&["n", "abs_m", "re_m", "im_m", "cumulative_re", "cumulative_im"]);
    for n in 0..=part.n_max {
        let m = table.scale_value(n);
        let c = table.cumulative(n);
        csv.row(vec![n.into(), m.norm().into(), m.re.into(), m.im.into(), c.re.into(), c.im.into()]);
    }
    dir.write("scale_decay.csv", &csv.into_bytes())?;
    let decay = fit_scale_decay(&table, spec.freq().tau());
    dir.write_json("counterterms.json", &json!({ "partition": part, "table": table, "decay_fit": decay }))?;

    let e = qp_resummed_orders(spec, &part, &table, qc.order)?;
    dir.write("orders.csv", &orders_csv(&e))?;
    let mut csv = Csv::new(&["K", "residual"]);
    for k in 0..=qc.order {
        csv.row(vec![k.into(), residual(&partial_sum(&e, k, 1.0), spec)?.into()]);
    }
    dir.write("residuals.csv", &csv.into_bytes())?;

    let xs = populated_divisors(&e);
    let mut csv = Csv::new(&["x", "scale"]);
    for &x in &xs {
        csv.row(vec![x.into(), assign_scale(x, &part)?.into()]);
    }
    dir.write("scales.csv", &csv.into_bytes())?;
    let smallness = counterterm_smallness(&xs, &table, &part)?;

    let grid = AuditGrid { radius: qc.audit_radius.0, mode_radius: qc.audit_mode_radius, k_m: qc.k_m, ..AuditGrid::default() };
    let audit = bound_lemma_audit(&grid, &part, spec)?;
    let pass = audit.all_pass();
    let probe = if spec.epsilon().im == 0.0 {
        Some(quasi_periodic_probe(spec, &partial_sum(&e, qc.order, 1.0), qc.t_long.0, qc.probe_samples, qc.tol.0)?)
    } else {
        None
    };
    dir.write_json(
        "audits.json",
        &json!({ "bounds": audit, "all_pass": pass, "counterterm_smallness": smallness, "shadowing": probe }),
    )?;
    Ok(())
}

fn compare(ctx: &Context, dir: &mut ArtifactDir) -> Outcome {
    let spec = ctx.spec;
    let cc = &ctx.cfg.compare;
    let eps = real_eps(spec)?;
    period(spec)?;
    let resummed = partial_sum(&resummed_orders(spec, cc.resum_order)?, cc.resum_order, 1.0);
    let opts = BorelOptions { precision: ctx.flags.precision.into(), ..BorelOptions::default() };
    let borel = borel_pade_laplace(&formal_orders(spec, cc.borel_order)?, eps, &opts)?;
    let tol = ctx.cfg.oracle.tol.0;
    let orbit = find_periodic_orbit(spec, &orbit_options(tol))?;
    let times = period_grid(spec, cc.samples.max(2));
    let traj = integrate_sampled(spec, orbit.initial_state, &times, tol)?;

    let names = ["resummed", "borel", "oracle"];
    let mut csv = Csv::new(&["t", names[0], names[1], names[2]]);
    let mut worst = [[0.0f64; 3]; 3];
    for (t, s) in times.iter().zip(&traj.states) {
        let v = [resummed.evaluate_real(spec.freq(), *t), borel.evaluate(spec.freq(), *t), s[0]];
        for i in 0..3 {
            for j in 0..3 {
                worst[i][j] = worst[i][j].max((v[i] - v[j]).abs());
            }
        }
        csv.row(vec![(*t).into(), v[0].into(), v[1].into(), v[2].into()]);
    }
    dir.write("comparison.csv", &csv.into_bytes())?;
    let mut csv = Csv::new(&["method", names[0], names[1], names[2]]);
    for i in 0..3 {
        csv.row(vec![names[i].into(), worst[i][0].into(), worst[i][1].into(), worst[i][2].into()]);
    }
    dir.write("discrepancy.csv", &csv.into_bytes())?;
    let max = worst.iter().flatten().cloned().fold(0.0, f64::max);
    dir.write_json(
        "compare.json",
        &json!({
            "epsilon": eps,
            "methods": names,
            "discrepancy": worst,
            "max_discrepancy": max,
            "borel_error_bound": borel.error_bound(),
            "orbit_residual": orbit.residual,
        }),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct PropCase {
    alpha: f64,
    beta: f64,
    c0_error: f64,
    c1: f64,
    support_pass: bool,
    tree_relative_error: f64,
}

/// c₀ = √α, c₁ = 0, the support bound and the tree identity on random α + β sin t.
fn props(ctx: &Context, dir: &mut ArtifactDir) -> Outcome {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(ctx.flags.seed);
    let eps = ctx.spec.epsilon();
    let mut cases = Vec::new();
    let mut csv = Csv::new(&["case", "alpha", "beta", "c0_error", "c1", "support_pass", "tree_relative_error"]);
    for i in 0..ctx.cfg.props.cases {
        let alpha = rng.gen_range(0.1..10.0);
        let beta = rng.gen_range(0.0..1.0);
        let spec = ProblemSpec::new(
            TrigSeries::alpha_beta_sin(alpha, beta),
            crate::fourier_core::FrequencyVector::periodic(1.0),
            crate::formal_expansion::NonlinearitySpec::quadratic(),
            eps,
        )?;
        let e = formal_orders(&spec, 6)?;
        let support_pass = support_check(&e, 1).all_pass();
        let mut gen = TreeGenerator::new(&spec, ExpansionKind::Formal, u32::MAX, EnumerationLimits::default());
        let nu = Mode::scalar(1);
        let sum: Complex64 = gen.class(4, &nu)?.iter().map(|n| node_value(n, &spec, ExpansionKind::Formal)).sum();
        let r = e.coeff(4, &nu);
        let case = PropCase {
            alpha,
            beta,
            c0_error: (e.constants[0] - alpha.sqrt()).abs(),
            c1: e.constants[1],
            support_pass,
            tree_relative_error: (sum - r).norm() / r.norm().max(f64::MIN_POSITIVE),
        };
        csv.row(vec![
            i.into(),
            alpha.into(),
            beta.into(),
            case.c0_error.into(),
            case.c1.into(),
            if support_pass { "true" } else { "false" }.into(),
            case.tree_relative_error.into(),
        ]);
        cases.push(case);
    }
    dir.write("props.csv", &csv.into_bytes())?;
    let failures = cases
        .iter()
        .filter(|c| c.c0_error > 1e-14 * c.alpha.sqrt().max(1.0) || c.c1.abs() > 1e-14 || !c.support_pass || c.tree_relative_error > 1e-12)
        .count();
    dir.write_json("props.json", &json!({ "seed": ctx.flags.seed, "cases": cases.len(), "failures": failures }))?;
    if failures > 0 {
        return Err(CliError::Domain(Error::Precondition { reason: format!("{failures} property cases failed") }));
    }
    Ok(())
}
