//! Experiment configuration: one TOML file, unknown keys rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use degenpara_core::coeff::{dh_model_field, heston_field, CoefficientField, FieldMeta};
use degenpara_core::expr::{Expr, ExprJet};
use degenpara_core::func::smooth;
use degenpara_core::grid::{Grid, GridSpec, Spacing};
use degenpara_core::solver::{exact_solution, CauchyProblem, Scheme};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Solve,
    ValidateCoeffs,
    Norms,
    VerifyMaxprin,
    VerifyBarriers,
    VerifyInterp,
    VerifySchauder,
    Reduce,
    Convergence,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::Solve,
        Kind::ValidateCoeffs,
        Kind::Norms,
        Kind::VerifyMaxprin,
        Kind::VerifyBarriers,
        Kind::VerifyInterp,
        Kind::VerifySchauder,
        Kind::Reduce,
        Kind::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Solve => "solve",
            Kind::ValidateCoeffs => "validate-coeffs",
            Kind::Norms => "norms",
            Kind::VerifyMaxprin => "verify-maxprin",
            Kind::VerifyBarriers => "verify-barriers",
            Kind::VerifyInterp => "verify-interp",
            Kind::VerifySchauder => "verify-schauder",
            Kind::Reduce => "reduce",
            Kind::Convergence => "convergence",
        }
    }

    pub fn parse(s: &str) -> Result<Kind> {
        Kind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::UnknownKind(s.to_string()))
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiments run by `degenpara run`.
    #[serde(default)]
    pub kinds: Vec<Kind>,
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub norms: NormsConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemConfig {
    DhModel {
        nu: f64,
        #[serde(default = "default_dim")]
        d: usize,
    },
    Heston {
        kappa: f64,
        theta: f64,
        sigma: f64,
        rho: f64,
        r: f64,
        #[serde(default)]
        q: f64,
    },
    /// Constant coefficients: `a` row-major, `b`, `c`.
    Constant { a: Vec<Vec<f64>>, b: Vec<f64>, c: f64 },
    /// Expression coefficients in `t, x1, ..., xd` with declared constants.
    Custom {
        a: Vec<Vec<String>>,
        b: Vec<String>,
        c: String,
        delta: f64,
        k: f64,
        nu: f64,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
}

fn default_dim() -> usize {
    2
}

fn default_alpha() -> f64 {
    0.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    /// Source `f` as an expression.
    pub source: String,
    /// Initial datum `g` as an expression in `x` only.
    pub initial: String,
    /// Registered exact solution name, or an expression, for convergence runs.
    pub exact: Option<String>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            source: "0".into(),
            initial: "1".into(),
            exact: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpacingConfig {
    Uniform,
    Graded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub t_max: f64,
    pub x_half_width: f64,
    pub y_max: f64,
    pub n_lateral: usize,
    pub n_normal: usize,
    pub n_t: usize,
    pub spacing: SpacingConfig,
    pub theta: f64,
    /// Refuse non-monotone assemblies. Correlated fields need `false`.
    pub certify: bool,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            t_max: 1.0,
            x_half_width: 2.0,
            y_max: 2.0,
            n_lateral: 17,
            n_normal: 17,
            n_t: 10,
            spacing: SpacingConfig::Graded,
            theta: 1.0,
            certify: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl Default for NormsConfig {
    fn default() -> Self {
        NormsConfig {
            alpha: 0.5,
            p: 1.0,
            q: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChecksConfig {
    pub sup_slack: f64,
    pub weighted_slack: f64,
    pub assumption_slack: f64,
    pub barrier_drifts: Vec<f64>,
    pub barrier_gamma: f64,
    pub barrier_samples: usize,
    pub interp_eps: Vec<f64>,
    pub schauder_threshold: f64,
    pub min_space_order: f64,
    /// Grid levels for the convergence and Schauder ladders.
    pub ladder_levels: usize,
    pub pair_samples: usize,
    pub write_grids: bool,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        ChecksConfig {
            sup_slack: 1.02,
            weighted_slack: 1.05,
            assumption_slack: 1.05,
            barrier_drifts: vec![-2.0, 0.0, 2.0],
            barrier_gamma: 0.5,
            barrier_samples: 1000,
            interp_eps: vec![0.5, 0.25, 0.1],
            schauder_threshold: 0.25,
            min_space_order: 0.9,
            ladder_levels: 3,
            pair_samples: 50_000,
            write_grids: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let n = &self.norms;
        if !(n.alpha > 0.0 && n.alpha < 1.0) {
            return Err(CliError::Config("norms.alpha must lie in (0, 1)".into()));
        }
        if !(n.p >= 0.0) || !(n.q >= 0.0) {
            return Err(CliError::Config("norms.p and norms.q must be nonnegative".into()));
        }
        let t = self.domain.theta;
        if !(0.5..=1.0).contains(&t) {
            return Err(CliError::Config("domain.theta must lie in [1/2, 1]".into()));
        }
        if self.checks.ladder_levels < 3 {
            return Err(CliError::Config("checks.ladder_levels must be at least 3".into()));
        }
        self.field()?;
        self.grid()?;
        self.source()?;
        self.initial()?;
        if let Some(e) = &self.data.exact {
            self.exact_expr(e)?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match &self.problem {
            ProblemConfig::DhModel { d, .. } => *d,
            ProblemConfig::Heston { .. } => 2,
            ProblemConfig::Constant { b, .. } => b.len(),
            ProblemConfig::Custom { b, .. } => b.len(),
        }
    }

    pub fn field(&self) -> Result<CoefficientField> {
        Ok(match &self.problem {
            ProblemConfig::DhModel { nu, d } => dh_model_field(*nu, *d)?,
            ProblemConfig::Heston {
                kappa,
                theta,
                sigma,
                rho,
                r,
                q,
            } => heston_field(*kappa, *theta, *sigma, *rho, *r, *q)?,
            ProblemConfig::Constant { a, b, c } => {
                let d = b.len();
                if a.len() != d || a.iter().any(|row| row.len() != d) {
                    return Err(CliError::Config("problem.a must be a d x d matrix matching b".into()));
                }
                let m = DMatrix::from_fn(d, d, |i, j| a[i][j]);
                CoefficientField::constant(&m, &DVector::from_column_slice(b), *c, self.norms.alpha)?
            }
            ProblemConfig::Custom {
                a,
                b,
                c,
                delta,
                k,
                nu,
                alpha,
            } => {
                let d = b.len();
                if a.len() != d || a.iter().any(|row| row.len() != d) {
                    return Err(CliError::Config("problem.a must be a d x d matrix matching b".into()));
                }
                let parse = |s: &String| Expr::parse(s);
                let a = a
                    .iter()
                    .flatten()
                    .map(parse)
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                let b = b.iter().map(parse).collect::<std::result::Result<Vec<_>, _>>()?;
                let meta = FieldMeta {
                    delta: *delta,
                    k: *k,
                    nu: *nu,
                    alpha: *alpha,
                };
                CoefficientField::new(d, a, b, Expr::parse(c)?, meta)?
            }
        })
    }

    pub fn grid_spec(&self, level: usize) -> GridSpec {
        let d = &self.domain;
        let refine = |n: usize| (n - 1) * (1 << level) + 1;
        GridSpec {
            d: self.dim(),
            t_max: d.t_max,
            n_t: d.n_t * (1 << level),
            x_half_width: d.x_half_width,
            n_lateral: refine(d.n_lateral),
            y_max: d.y_max,
            n_normal: refine(d.n_normal),
            spacing: match d.spacing {
                SpacingConfig::Uniform => Spacing::Uniform,
                SpacingConfig::Graded => Spacing::Graded,
            },
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.grid_spec(0))?)
    }

    pub fn scheme(&self) -> Scheme {
        Scheme {
            theta: self.domain.theta,
            certify: self.domain.certify,
            ..Scheme::default()
        }
    }

    pub fn source(&self) -> Result<Arc<ExprJet>> {
        Ok(smooth(Expr::parse(&self.data.source)?, self.dim()))
    }

    pub fn initial(&self) -> Result<Arc<ExprJet>> {
        Ok(smooth(Expr::parse(&self.data.initial)?, self.dim()))
    }

    fn exact_expr(&self, e: &str) -> Result<Expr> {
        match exact_solution(e, self.dim()) {
            Some(x) => Ok(x),
            None => Ok(Expr::parse(e)?),
        }
    }

    pub fn exact(&self) -> Result<Arc<ExprJet>> {
        let e = self
            .data
            .exact
            .as_deref()
            .ok_or_else(|| CliError::Config("data.exact is required for convergence runs".into()))?;
        Ok(smooth(self.exact_expr(e)?, self.dim()))
    }

    pub fn problem(&self) -> Result<CauchyProblem> {
        let mut p = CauchyProblem::new(self.field()?, self.source()?, self.initial()?, self.domain.t_max)?;
        p.p = self.norms.p;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 1
[problem]
preset = "dh-model"
nu = 1.0
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.dim(), 2);
        assert_eq!(c.norms.alpha, 0.5);
        assert_eq!(c.grid_spec(1).n_lateral, 33);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let text = format!("{MINIMAL}\nmu = 2.0\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = MINIMAL.replace("nu = 1.0", "nu = 1.0\nnuu = 3.0");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = format!("{MINIMAL}\n[domain]\nt_maxx = 1.0\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn seed_is_mandatory() {
        assert!(ExperimentConfig::from_toml(&MINIMAL.replace("seed = 1", "")).is_err());
    }

    #[test]
    fn unknown_preset_and_kind_rejected() {
        assert!(ExperimentConfig::from_toml(&MINIMAL.replace("dh-model", "black-scholes")).is_err());
        let text = format!("kinds = [\"solve\", \"dance\"]\n{MINIMAL}");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        assert!(matches!(Kind::parse("dance"), Err(CliError::UnknownKind(_))));
    }

    #[test]
    fn parameter_ranges() {
        let text = format!("{MINIMAL}\n[norms]\nalpha = 1.5\np = 1.0\nq = 1.0\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = format!("{MINIMAL}\n[norms]\nalpha = 0.5\np = -1.0\nq = 1.0\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn constant_and_custom_presets() {
        let text = r#"
seed = 3
[problem]
preset = "constant"
a = [[2.0, 1.0], [1.0, 1.0]]
b = [1.0, 2.0]
c = 0.0
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert!(c.field().unwrap().is_constant());
        let text = r#"
seed = 3
[problem]
preset = "custom"
a = [["1", "0"], ["0", "1 + 0.1*sin(x1)"]]
b = ["0", "1"]
c = "0"
delta = 0.9
k = 2.0
nu = 1.0
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        assert!(!c.field().unwrap().is_constant());
    }
}
