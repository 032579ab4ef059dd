use super::expansion::{ExpansionKind, SeriesExpansion};
use crate::error::{Error, Result};
use crate::fourier_core::sparse::{add_terms, terms_of, zero_mode_pairing, PowerTable, SparseMap};
use crate::fourier_core::{convolve_terms, diophantine_scan, small_divisor, Mode, ProblemSpec, TrigSeries};
use num_complex::Complex64;
use std::collections::BTreeMap;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest |ν| the order-K coefficients can populate for trig-polynomial forcing.
pub fn support_bound(k: usize, degree: u32) -> u32 {
    (((k + 1) / 2) as u32) * degree
}

/// Resonance and Diophantine certification up to the support reachable at order `k_max`.
pub(crate) fn certify(spec: &ProblemSpec, k_max: usize) -> Result<()> {
    let freq = spec.freq();
    if freq.dim() == 1 {
        if freq.omega()[0] == 0.0 {
            return Err(Error::Resonance { mode: vec![1] });
        }
        return Ok(());
    }
    let radius = support_bound(k_max, spec.forcing_degree()).max(1);
    diophantine_scan(freq, radius).map(|_| ())
}

fn divisor(spec: &ProblemSpec, nu: &Mode) -> Result<Complex64> {
    let x = small_divisor(spec.freq(), nu);
    if x == 0.0 {
        return Err(Error::Resonance { mode: nu.components().to_vec() });
    }
    Ok(I * x)
}

fn finish(spec: &ProblemSpec, maps: Vec<SparseMap<Complex64>>, constants: Vec<f64>, kind: ExpansionKind) -> SeriesExpansion {
    let real = spec.forcing().is_real_valued();
    let orders = maps
        .into_iter()
        .map(|m| TrigSeries::from_map_unchecked(spec.dim(), m, real))
        .collect();
    SeriesExpansion { orders, constants, kind, problem: spec.clone() }
}

fn order_one(spec: &ProblemSpec) -> Result<SparseMap<Complex64>> {
    let mut x1 = BTreeMap::new();
    for (nu, f) in spec.forcing().iter() {
        if nu.is_zero() {
            continue;
        }
        x1.insert(nu.clone(), f / divisor(spec, nu)?);
    }
    Ok(x1)
}

fn zero_order(spec: &ProblemSpec) -> SparseMap<Complex64> {
    let mut x0 = BTreeMap::new();
    x0.insert(Mode::zero(spec.dim()), Complex64::new(spec.c0(), 0.0));
    x0
}

/// Formal coefficients x^(k), k = 0…K.
///
/// The quadratic model uses the two-term recursion directly; other
/// nonlinearities go through the Taylor expansion of g around c₀.
pub fn formal_orders(spec: &ProblemSpec, k_max: usize) -> Result<SeriesExpansion> {
    if spec.nonlinearity().is_quadratic() {
        formal_quadratic(spec, k_max)
    } else {
        formal_via_taylor(spec, k_max)
    }
}

fn formal_quadratic(spec: &ProblemSpec, k_max: usize) -> Result<SeriesExpansion> {
    if k_max < 1 {
        return Err(Error::precondition("K >= 1 required"));
    }
    certify(spec, k_max)?;
    let dim = spec.dim();
    let c0 = spec.c0();
    let zero = Mode::zero(dim);
    let mut orders: Vec<SparseMap<Complex64>> = vec![zero_order(spec), order_one(spec)?];
    let mut constants = vec![c0, 0.0];
    let mut terms: Vec<Vec<(Mode, Complex64)>> = orders.iter().map(terms_of).collect();

    for k in 2..=k_max {
        // S = Σ_{k1+k2=k−1} x^(k1) ⊛ x^(k2), using the symmetry of the pair sum
        let mut s: SparseMap<Complex64> = BTreeMap::new();
        for k1 in 0..=(k - 1) / 2 {
            let k2 = k - 1 - k1;
            let mut prod = convolve_terms(dim, &terms[k1], &terms[k2]);
            if k1 != k2 {
                for (_, c) in prod.iter_mut() {
                    *c *= 2.0;
                }
            }
            add_terms(&mut s, &prod);
        }
        let prev = &orders[k - 1];
        let mut xk: SparseMap<Complex64> = BTreeMap::new();
        for nu in s.keys().chain(prev.keys()) {
            if nu.is_zero() || xk.contains_key(nu) {
                continue;
            }
            let d = divisor(spec, nu)?;
            let sv = s.get(nu).copied().unwrap_or_default();
            let pv = prev.get(nu).copied().unwrap_or_default();
            xk.insert(nu.clone(), -d * pv - sv / d);
        }
        // c_k = −(1/2c₀) Σ_{k'=1}^{k−1} Σ_ν x^(k−k')_ν x^(k')_{−ν}
        let mut pair = Complex64::new(0.0, 0.0);
        for kp in 1..k {
            pair += zero_mode_pairing(&terms[k - kp], &orders[kp]);
        }
        let ck = -pair.re / (2.0 * c0);
        if ck != 0.0 {
            xk.insert(zero.clone(), Complex64::new(ck, 0.0));
        }
        constants.push(ck);
        terms.push(terms_of(&xk));
        orders.push(xk);
    }
    Ok(finish(spec, orders, constants, ExpansionKind::Formal))
}

/// Formal coefficients through the Taylor expansion g(x) = Σ (g_p/p!)(x − c₀)^p,
/// for any nonlinearity, including the quadratic one.
pub fn formal_via_taylor(spec: &ProblemSpec, k_max: usize) -> Result<SeriesExpansion> {
    let g = spec.nonlinearity();
    if g.is_linear() {
        return Err(Error::precondition("formal expansion needs a nonlinearity; use linear_exact for g = 0"));
    }
    if k_max < 1 {
        return Err(Error::precondition("K >= 1 required"));
    }
    certify(spec, k_max)?;
    let dim = spec.dim();
    let c0 = spec.c0();
    let taylor = g.taylor_at(c0);
    let g1 = taylor[1];
    let max_power = g.degree().min(k_max + 1).max(2);
    let zero = Mode::zero(dim);

    let mut powers: PowerTable<Complex64> = PowerTable::new(dim, max_power);
    let mut orders: Vec<SparseMap<Complex64>> = vec![zero_order(spec)];
    let mut constants = vec![c0];
    let x1 = order_one(spec)?;
    powers.prepare(1);
    powers.set_linear(1, terms_of(&x1));
    orders.push(x1);
    constants.push(0.0);

    for k in 2..=k_max {
        // [g]^(k−1) = Σ_p (g_p/p!) P_p^(k−1)
        let mut gk: SparseMap<Complex64> = BTreeMap::new();
        for p in 1..=max_power.min(k - 1) {
            let coef = taylor.get(p).copied().unwrap_or(0.0);
            if coef == 0.0 {
                continue;
            }
            let scaled: Vec<(Mode, Complex64)> =
                powers.power(p, k - 1).iter().map(|(m, c)| (m.clone(), c * coef)).collect();
            add_terms(&mut gk, &scaled);
        }
        let prev = &orders[k - 1];
        let mut xk: SparseMap<Complex64> = BTreeMap::new();
        for nu in gk.keys().chain(prev.keys()) {
            if nu.is_zero() || xk.contains_key(nu) {
                continue;
            }
            let d = divisor(spec, nu)?;
            let gv = gk.get(nu).copied().unwrap_or_default();
            let pv = prev.get(nu).copied().unwrap_or_default();
            xk.insert(nu.clone(), -gv / d - d * pv);
        }
        // [g]^(k)_0 = 0 fixes c_k
        powers.prepare(k);
        let mut nonlinear = Complex64::new(0.0, 0.0);
        for p in 2..=max_power.min(k) {
            let coef = taylor.get(p).copied().unwrap_or(0.0);
            if coef == 0.0 {
                continue;
            }
            if let Some((_, v)) = powers.power(p, k).iter().find(|(m, _)| m.is_zero()) {
                nonlinear += v * coef;
            }
        }
        let ck = -nonlinear.re / g1;
        if ck != 0.0 {
            xk.insert(zero.clone(), Complex64::new(ck, 0.0));
        }
        constants.push(ck);
        powers.set_linear(k, terms_of(&xk));
        orders.push(xk);
    }
    Ok(finish(spec, orders, constants, ExpansionKind::Formal))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_orders_for_alpha_beta_sin() {
        let (alpha, beta) = (2.0, 0.6);
        let spec = ProblemSpec::alpha_beta_sin(alpha, beta, 1.0, 0.1).unwrap();
        let e = formal_orders(&spec, 3).unwrap();
        assert_eq!(e.constants[0], alpha.sqrt());
        assert_eq!(e.constants[1], 0.0);
        for n in [1, -1] {
            assert!((e.coeff(1, &Mode::scalar(n)) - Complex64::new(-beta / 2.0, 0.0)).norm() < 1e-15);
        }
        assert!((e.constants[2] + beta * beta / (4.0 * alpha.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn taylor_path_matches_quadratic_path() {
        let spec = ProblemSpec::alpha_beta_sin(1.3, 0.7, 1.0, 0.1).unwrap();
        let a = formal_orders(&spec, 8).unwrap();
        let b = formal_via_taylor(&spec, 8).unwrap();
        for k in 0..=8 {
            let scale = a.orders[k].max_abs().max(1e-300);
            for (m, c) in a.orders[k].iter() {
                assert!((b.coeff(k, m) - c).norm() <= 1e-13 * scale, "k={k} m={m:?}");
            }
            assert_eq!(a.orders[k].len(), b.orders[k].len());
        }
    }
}
