use crate::error::{Error, Result};
use crate::fourier_core::sparse::{add_terms, terms_of, PowerTable, SparseMap};
use crate::fourier_core::{Coeff, Mode, ProblemSpec};
use crate::formal_expansion::certify;
use num_complex::Complex64;
use std::collections::BTreeMap;

/// Propagator data on a line of momentum ν ≠ 0: the dressed inverse G = 1/(D − 𝓜)
/// and the counterterm 𝓜 that was moved into the denominator.
pub struct LineFactors<T> {
    pub propagator: T,
    pub counterterm: Option<T>,
}

/// Coefficients of the μ-expansion over an arbitrary coefficient field.
pub struct EngineOutput<T: Coeff> {
    pub orders: Vec<SparseMap<T>>,
    pub constants: Vec<T>,
}

/// Runs x^[k]_ν = G_ν [ s f_ν δ_{k1} − ε[g]^[k−1]_ν − 𝓜_ν x^[k−1]_ν ] for ν ≠ 0 and
/// fixes the zero modes by [g]^[k]_0 = 0.
///
/// `s` is ε for the nonlinear model and 1 for the linear one. With 𝓜 ≡ 0 this is
/// the plain resummed recursion; a nonzero 𝓜 only regroups terms, so the sum
/// at μ = 1 solves the same equation.
pub fn run_engine<T, F>(spec: &ProblemSpec, k_max: usize, eps: T, mut line: F) -> Result<EngineOutput<T>>
where
    T: Coeff,
    F: FnMut(&Mode) -> Result<LineFactors<T>>,
{
    if k_max < 1 {
        return Err(Error::precondition("K >= 1 required"));
    }
    certify(spec, k_max)?;
    let dim = spec.dim();
    let g = spec.nonlinearity();
    let linear = g.is_linear();
    let c0 = spec.c0();
    let zero = Mode::zero(dim);
    let source = if linear { T::from_re(1.0) } else { eps };

    let mut cache: BTreeMap<Mode, LineFactors<T>> = BTreeMap::new();
    let mut factors = |nu: &Mode, cache: &mut BTreeMap<Mode, LineFactors<T>>| -> Result<(T, Option<T>)> {
        if let Some(f) = cache.get(nu) {
            return Ok((f.propagator, f.counterterm));
        }
        let f = line(nu)?;
        let out = (f.propagator, f.counterterm);
        cache.insert(nu.clone(), f);
        Ok(out)
    };

    let mut orders: Vec<SparseMap<T>> = Vec::with_capacity(k_max + 1);
    let mut constants: Vec<T> = Vec::with_capacity(k_max + 1);
    let mut x0 = BTreeMap::new();
    if !linear {
        x0.insert(zero.clone(), T::from_re(c0));
    }
    orders.push(x0);
    constants.push(T::from_re(c0));

    let mut x1 = BTreeMap::new();
    for (nu, f) in spec.forcing().iter() {
        if nu.is_zero() {
            continue;
        }
        let (gp, _) = factors(nu, &mut cache)?;
        x1.insert(nu.clone(), gp * source.scale(*f));
    }
    orders.push(x1);
    constants.push(T::zero());

    if linear {
        for _ in 2..=k_max {
            orders.push(BTreeMap::new());
            constants.push(T::zero());
        }
        return Ok(EngineOutput { orders, constants });
    }

    let taylor = g.taylor_at(c0);
    let g1 = taylor[1];
    let max_power = g.degree().min(k_max + 1).max(2);
    let mut powers: PowerTable<T> = PowerTable::new(dim, max_power);
    powers.prepare(1);
    powers.set_linear(1, terms_of(&orders[1]));

    for k in 2..=k_max {
        let mut gk: SparseMap<T> = BTreeMap::new();
        for p in 1..=max_power.min(k - 1) {
            let coef = taylor.get(p).copied().unwrap_or(0.0);
            if coef == 0.0 {
                continue;
            }
            let c = Complex64::new(coef, 0.0);
            let scaled: Vec<(Mode, T)> = powers.power(p, k - 1).iter().map(|(m, v)| (m.clone(), v.scale(c))).collect();
            add_terms(&mut gk, &scaled);
        }
        let prev = &orders[k - 1];
        let mut xk: SparseMap<T> = BTreeMap::new();
        let keys: Vec<Mode> = gk.keys().chain(prev.keys()).filter(|m| !m.is_zero()).cloned().collect();
        for nu in keys {
            if xk.contains_key(&nu) {
                continue;
            }
            let (gp, counter) = factors(&nu, &mut cache)?;
            let mut rhs = T::zero();
            if let Some(v) = gk.get(&nu) {
                rhs = rhs - eps * *v;
            }
            if let (Some(m), Some(v)) = (counter, prev.get(&nu)) {
                rhs = rhs - m * *v;
            }
            xk.insert(nu, gp * rhs);
        }
        powers.prepare(k);
        let mut nonlinear = T::zero();
        for p in 2..=max_power.min(k) {
            let coef = taylor.get(p).copied().unwrap_or(0.0);
            if coef == 0.0 {
                continue;
            }
            if let Some((_, v)) = powers.power(p, k).iter().find(|(m, _)| m.is_zero()) {
                nonlinear += v.scale(Complex64::new(coef, 0.0));
            }
        }
        let ck = nonlinear.scale(Complex64::new(-1.0 / g1, 0.0));
        if !ck.is_exact_zero() {
            xk.insert(zero.clone(), ck);
        }
        constants.push(ck);
        powers.set_linear(k, terms_of(&xk));
        orders.push(xk);
    }
    Ok(EngineOutput { orders, constants })
}
