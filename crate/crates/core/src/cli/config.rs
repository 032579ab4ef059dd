//! TOML run configuration.

use crate::error::{Error, Result};
use crate::formal_expansion::NonlinearitySpec;
use crate::fourier_core::text::{format_hexf64, parse_float};
use crate::fourier_core::{diophantine_scan, FrequencyVector, Mode, ProblemSpec, TrigSeries};
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::path::PathBuf;

/// A float that may also be written as a decimal or hexfloat string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            F(f64),
            I(i64),
            S(String),
        }
        match Repr::deserialize(d)? {
            Repr::F(x) => Ok(Real(x)),
            Repr::I(i) => Ok(Real(i as f64)),
            Repr::S(s) => parse_float(&s).map(Real).ok_or_else(|| serde::de::Error::custom(format!("not a number: {s:?}"))),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&format_hexf64(self.0))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityKind {
    #[default]
    Quadratic,
    Linear,
    Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingTerm {
    pub mode: Vec<i32>,
    pub re: Real,
    #[serde(default = "zero")]
    pub im: Real,
}

fn zero() -> Real {
    Real(0.0)
}

fn default_omega() -> Vec<Real> {
    vec![Real(1.0)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// Mean forcing f₀.
    pub alpha: Real,
    /// Amplitude of sin ψ_j for each frequency when no explicit forcing is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Real>,
    #[serde(default = "default_omega")]
    pub omega: Vec<Real>,
    pub epsilon: Real,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_im: Option<Real>,
    #[serde(default)]
    pub nonlinearity: NonlinearityKind,
    /// g(x) = Σ a_j x^j for the polynomial kind.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<Real>,
    /// Canonical-half coefficients f_ν; the conjugate half is implied.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forcing: Vec<ForcingTerm>,
    /// Forcing in the plain-text series format (overrides `alpha`/`beta`/`forcing`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diophantine_radius: Option<u32>,
}

macro_rules! section {
    ($name:ident { $($field:ident : $ty:ty = $default:expr),* $(,)? }) => {
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields, default)]
        pub struct $name {
            $(pub $field: $ty,)*
        }

        impl Default for $name {
            fn default() -> Self {
                $name { $($field: $default,)* }
            }
        }
    };
}

section!(FormalConfig { order: usize = 10 });
section!(TreesConfig { order: usize = 5, mode_radius: i32 = 3, max_trees: usize = 5_000_000, dot: bool = false });
section!(ResumConfig { order: usize = 12, nu_max: u32 = 50 });
section!(BorelConfig {
    order: usize = 16,
    max_denominator: usize = 6,
    samples: usize = 64,
    asymptotic_order: usize = 30,
    reference_order: usize = 40,
    epsilons: Vec<Real> = vec![],
});
section!(OracleConfig { tol: Real = Real(1e-14), samples: usize = 256, nu_max: i32 = 5, t_end: Real = Real(20.0) });
section!(QpConfig {
    order: usize = 8,
    k_m: u32 = 3,
    cutoff: crate::multiscale_rg::CutoffStyle = crate::multiscale_rg::CutoffStyle::Sharp,
    t_long: Real = Real(200.0),
    probe_samples: usize = 4000,
    audit_radius: Real = Real(0.2),
    audit_mode_radius: u32 = 40,
    tol: Real = Real(1e-12),
});
section!(CompareConfig { resum_order: usize = 12, borel_order: usize = 16, samples: usize = 64 });
section!(PropsConfig { cases: usize = 64 });

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub formal: FormalConfig,
    #[serde(default)]
    pub trees: TreesConfig,
    #[serde(default)]
    pub resum: ResumConfig,
    #[serde(default)]
    pub borel: BorelConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub qp: QpConfig,
    #[serde(default)]
    pub compare: CompareConfig,
    #[serde(default)]
    pub props: PropsConfig,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> std::result::Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn echo(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    fn validate(&self) -> std::result::Result<(), ConfigError> {
        let p = &self.problem;
        let bad = |m: &str| Err(ConfigError(format!("problem: {m}")));
        if p.omega.is_empty() {
            return bad("omega must list at least one frequency");
        }
        if p.omega.iter().any(|w| !w.0.is_finite() || w.0 == 0.0) {
            return bad("frequencies must be finite and nonzero");
        }
        if !p.epsilon.0.is_finite() {
            return bad("epsilon must be finite");
        }
        if p.nonlinearity == NonlinearityKind::Quadratic && p.alpha.0 <= 0.0 && p.forcing_file.is_none() {
            return bad("alpha must be positive for the quadratic nonlinearity");
        }
        if p.nonlinearity == NonlinearityKind::Polynomial && p.coefficients.len() < 3 {
            return bad("polynomial nonlinearity needs coefficients up to at least x^2");
        }
        if p.forcing.iter().any(|t| t.mode.len() != p.omega.len()) {
            return bad("forcing mode dimension differs from omega");
        }
        if !(self.qp.k_m == 1 || self.qp.k_m == 3) {
            return Err(ConfigError("qp: k_m must be 1 or 3".into()));
        }
        if self.oracle.tol.0 <= 0.0 || self.qp.tol.0 <= 0.0 {
            return Err(ConfigError("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn forcing(&self, base: &std::path::Path) -> Result<TrigSeries> {
        let p = &self.problem;
        let d = p.omega.len();
        if let Some(file) = &p.forcing_file {
            let path = if file.is_absolute() { file.clone() } else { base.join(file) };
            let text = std::fs::read_to_string(&path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
            return crate::fourier_core::text::from_text(&text);
        }
        let mut pairs = vec![(Mode::zero(d), Complex64::new(p.alpha.0, 0.0))];
        if p.forcing.is_empty() {
            let beta = p.beta.map(|b| b.0).unwrap_or(0.0);
            for j in 0..d {
                let mut m = vec![0; d];
                m[j] = 1;
                pairs.push((Mode::new(&m), Complex64::new(0.0, -beta / 2.0)));
            }
        } else {
            for t in &p.forcing {
                pairs.push((Mode::new(&t.mode), Complex64::new(t.re.0, t.im.0)));
            }
        }
        TrigSeries::real_from_pairs(d, pairs)
    }

    pub fn frequency(&self) -> Result<FrequencyVector> {
        let p = &self.problem;
        let omega: Vec<f64> = p.omega.iter().map(|w| w.0).collect();
        if omega.len() == 1 {
            return Ok(FrequencyVector::periodic(omega[0]));
        }
        let tau = p.tau.map(|t| t.0).unwrap_or((omega.len() - 1) as f64);
        let provisional = FrequencyVector::new(omega.clone(), 1.0, tau)?;
        let (c0, _) = diophantine_scan(&provisional, p.diophantine_radius.unwrap_or(50))?;
        FrequencyVector::new(omega, c0, tau)
    }

    pub fn nonlinearity(&self) -> Result<NonlinearitySpec> {
        match self.problem.nonlinearity {
            NonlinearityKind::Quadratic => Ok(NonlinearitySpec::quadratic()),
            NonlinearityKind::Linear => Ok(NonlinearitySpec::linear()),
            NonlinearityKind::Polynomial => NonlinearitySpec::polynomial(self.problem.coefficients.iter().map(|c| c.0).collect()),
        }
    }

    pub fn problem(&self, base: &std::path::Path) -> Result<ProblemSpec> {
        let eps = Complex64::new(self.problem.epsilon.0, self.problem.epsilon_im.map(|e| e.0).unwrap_or(0.0));
        ProblemSpec::new(self.forcing(base)?, self.frequency()?, self.nonlinearity()?, eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[problem]
alpha = 1.0
beta = "0x1p-1"
epsilon = 0.05

[formal]
order = 8
"#;

    #[test]
    fn parse_and_echo() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.problem.beta, Some(Real(0.5)));
        assert_eq!(cfg.formal.order, 8);
        let again = RunConfig::parse(&cfg.echo()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_key_named() {
        let err = RunConfig::parse("[problem]\nalpha = 1.0\nepsilon = 0.1\nbogus = 3\n").unwrap_err();
        assert!(err.0.contains("bogus"), "{}", err.0);
        assert!(err.0.contains("line 4"), "{}", err.0);
    }

    #[test]
    fn default_forcing_is_alpha_beta_sin() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        let spec = cfg.problem(std::path::Path::new(".")).unwrap();
        assert_eq!(spec.forcing().get(&Mode::scalar(1)), Complex64::new(0.0, -0.25));
        assert_eq!(spec.c0(), 1.0);
    }
}
