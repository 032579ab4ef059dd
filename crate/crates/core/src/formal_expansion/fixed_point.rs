use super::nonlinearity::NonlinearitySpec;
use crate::error::{Error, Result};

const SCAN_CELLS: usize = 4000;

/// Solves g(c₀) = f₀ with g'(c₀) ≠ 0.
///
/// The quadratic model takes the positive branch c₀ = √f₀. Otherwise the
/// configured interval (default `[0, 10(1+|f₀|)]`) is scanned for sign changes;
/// among simple roots one with g' > 0 is preferred, then the smallest.
pub fn fixed_point_solve(g: &NonlinearitySpec, f0: f64) -> Result<f64> {
    if g.is_linear() {
        return Err(Error::precondition("the linear model has no fixed-point condition"));
    }
    if g.is_quadratic() {
        if !(f0 > 0.0) {
            return Err(Error::invalid(format!(
                "quadratic model needs alpha = f0 > 0 (got {f0}): c0 = sqrt(alpha) must be nonzero so that g'(c0) != 0"
            )));
        }
        return Ok(f0.sqrt());
    }
    let (lo, hi) = g.search_interval().unwrap_or((0.0, 10.0 * (1.0 + f0.abs())));
    if !(hi > lo) {
        return Err(Error::invalid("empty root search interval"));
    }
    let h = |x: f64| g.value(x) - f0;
    let dg = |x: f64| g.derivative(x, 1);
    let scale = 1.0 + f0.abs();
    let step = (hi - lo) / SCAN_CELLS as f64;
    let grid: Vec<f64> = (0..=SCAN_CELLS).map(|i| lo + step * i as f64).collect();

    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ha, hb) = (h(a), h(b));
        if ha == 0.0 {
            roots.push(a);
        } else if ha.signum() != hb.signum() && hb != 0.0 {
            roots.push(bisect(&h, a, b));
        }
    }
    if h(hi) == 0.0 {
        roots.push(hi);
    }

    let mut simple: Vec<(f64, f64)> = Vec::new();
    let mut degenerate: Option<(f64, f64)> = None;
    for r in roots {
        let d = dg(r);
        if d.abs() > 1e-8 * scale {
            simple.push((r, d));
        } else if degenerate.is_none() {
            degenerate = Some((r, d));
        }
    }
    if simple.is_empty() {
        // touching roots: h has an extremum at a critical point of g with value ~ 0
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            if dg(a).signum() != dg(b).signum() || dg(a) == 0.0 {
                let xc = if dg(a) == 0.0 { a } else { bisect(&dg, a, b) };
                if h(xc).abs() <= 1e-12 * scale {
                    degenerate.get_or_insert((xc, dg(xc)));
                }
            }
        }
        return Err(match degenerate {
            Some((x, derivative)) => Error::DegenerateRoot { x, derivative },
            None => Error::NoRoot { f0, lo, hi },
        });
    }
    simple.sort_by(|a, b| (b.1 > 0.0).cmp(&(a.1 > 0.0)).then(a.0.total_cmp(&b.0)));
    let root = polish(&h, &dg, simple[0].0);
    Ok(root)
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    if f(a).abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

fn polish(h: &dyn Fn(f64) -> f64, dh: &dyn Fn(f64) -> f64, mut x: f64) -> f64 {
    for _ in 0..3 {
        let d = dh(x);
        if d == 0.0 {
            break;
        }
        let next = x - h(x) / d;
        if h(next).abs() < h(x).abs() {
            x = next;
        } else {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_positive_branch() {
        assert_eq!(fixed_point_solve(&NonlinearitySpec::quadratic(), 4.0).unwrap(), 2.0);
    }

    #[test]
    fn quadratic_rejects_nonpositive_alpha() {
        assert!(matches!(
            fixed_point_solve(&NonlinearitySpec::quadratic(), 0.0),
            Err(Error::InvalidProblem { .. })
        ));
    }

    #[test]
    fn cubic_root() {
        let g = NonlinearitySpec::polynomial(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let c0 = fixed_point_solve(&g, 8.0).unwrap();
        assert!((c0 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn touching_root_is_degenerate() {
        let g = NonlinearitySpec::polynomial(vec![0.0, 0.0, 3.0, -2.0]).unwrap();
        match fixed_point_solve(&g, 1.0) {
            Err(Error::DegenerateRoot { x, .. }) => assert!((x - 1.0).abs() < 1e-6),
            other => panic!("expected degenerate root, got {other:?}"),
        }
    }

    #[test]
    fn missing_root() {
        let g = NonlinearitySpec::polynomial(vec![1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(fixed_point_solve(&g, 0.5), Err(Error::NoRoot { .. })));
    }

    #[test]
    fn prefers_increasing_branch() {
        // g = x² − 2x has roots of g = 3 at −1 (g' < 0) and 3 (g' > 0)
        let g = NonlinearitySpec::polynomial(vec![0.0, -2.0, 1.0]).unwrap().with_search_interval(-5.0, 5.0);
        let c0 = fixed_point_solve(&g, 3.0).unwrap();
        assert!((c0 - 3.0).abs() < 1e-14);
    }
}
