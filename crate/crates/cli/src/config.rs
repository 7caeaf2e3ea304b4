//! Run configuration.

use std::f64::consts::PI;
use std::fs::File;
use std::path::{Path, PathBuf};

use hypoell::mixedfft::{DECAY_THRESHOLD, MAX_DECAY_ORDER};
use hypoell::solve::SolveOptions;
use hypoell::witness::Variant;
use hypoell::{CylinderGrid, Field, OperatorSpec, TorusFunction, C64};
use serde::Deserialize;

use crate::expr;
use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub operator: Option<OperatorConfig>,
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub rhs: Option<String>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub witness: WitnessConfig,
    /// Field CSV read by `report`.
    pub field: Option<PathBuf>,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub c: Coefficient,
    pub q: Coefficient,
}

/// Either an expression string or the `{k_max, re, im}` coefficient form.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Expr(String),
    Series(TorusFunction),
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_t: usize,
    pub n_x: usize,
    #[serde(rename = "X")]
    pub half_width: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub residual_factor: f64,
    pub defect_factor: f64,
    pub condition_limit: f64,
    pub decay_threshold: f64,
    pub n_max: usize,
    /// Singular frequencies are listed up to this `|ξ|`.
    pub xi_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = SolveOptions::default();
        Tolerances {
            residual_factor: s.residual_factor,
            defect_factor: s.defect_factor,
            condition_limit: s.condition_limit,
            decay_threshold: DECAY_THRESHOLD,
            n_max: 8,
            xi_max: hypoell::classify::SEARCH_XI,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WitnessConfig {
    pub variant: VariantName,
    pub xi_min: f64,
    pub xi_max: f64,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Sgh,
    Gs,
}

impl From<VariantName> for Variant {
    fn from(v: VariantName) -> Self {
        match v {
            VariantName::Sgh => Variant::Sgh,
            VariantName::Gs => Variant::Gs,
        }
    }
}

impl Default for WitnessConfig {
    fn default() -> Self {
        WitnessConfig {
            variant: VariantName::Sgh,
            xi_min: 10.0,
            xi_max: 1e3,
            count: 40,
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let file = File::open(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_reader(file).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.tolerances.validate()?;
        cfg.witness.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn grid(&self) -> Result<CylinderGrid, CliError> {
        let g = self.grid.ok_or_else(|| bad("missing \"grid\" block"))?;
        CylinderGrid::new(g.n_t, g.n_x, g.half_width).map_err(|e| bad(e.to_string()))
    }

    pub fn operator(&self) -> Result<OperatorSpec, CliError> {
        let op = self
            .operator
            .as_ref()
            .ok_or_else(|| bad("missing \"operator\" block"))?;
        let c = op.c.to_function().map_err(|e| bad(format!("operator.c: {e}")))?;
        let q = op.q.to_function().map_err(|e| bad(format!("operator.q: {e}")))?;
        Ok(OperatorSpec::new(c, q))
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            residual_factor: self.tolerances.residual_factor,
            defect_factor: self.tolerances.defect_factor,
            condition_limit: self.tolerances.condition_limit,
            ..SolveOptions::default()
        }
    }

    /// The right-hand side: a builtin or a field CSV on the configured grid.
    pub fn rhs(&self, grid: CylinderGrid) -> Result<Field, CliError> {
        let spec = self.rhs.as_deref().unwrap_or("gaussian").trim();
        if let Some(f) = builtin_rhs(spec, grid)? {
            return Ok(f);
        }
        let path = self.resolve(Path::new(spec));
        let file = File::open(&path).map_err(|e| bad(format!("rhs {}: {e}", path.display())))?;
        let f = hypoell::io::read_field(file)?;
        if f.grid.n_t != grid.n_t
            || f.grid.n_x != grid.n_x
            || (f.grid.half_width - grid.half_width).abs() > 1e-9 * grid.half_width
        {
            return Err(hypoell::Error::DimensionMismatch {
                expected: format!("{}x{} grid on [-{}, {})", grid.n_t, grid.n_x, grid.half_width, grid.half_width),
                got: format!(
                    "{}x{} grid on [-{}, {})",
                    f.grid.n_t,
                    f.grid.n_x,
                    f.grid.half_width,
                    f.grid.half_width
                ),
            }
            .into());
        }
        Ok(f)
    }
}

impl Coefficient {
    fn to_function(&self) -> Result<TorusFunction, String> {
        match self {
            Coefficient::Expr(s) => expr::parse(s).map_err(|e| e.to_string()),
            Coefficient::Series(f) => Ok(f.clone()),
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("residual_factor", self.residual_factor),
            ("defect_factor", self.defect_factor),
            ("condition_limit", self.condition_limit),
            ("decay_threshold", self.decay_threshold),
            ("xi_max", self.xi_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("tolerances.{name} must be positive, got {v}")));
            }
        }
        if self.n_max == 0 || self.n_max > MAX_DECAY_ORDER {
            return Err(bad(format!("tolerances.n_max must lie in 1..={MAX_DECAY_ORDER}")));
        }
        Ok(())
    }
}

impl WitnessConfig {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.xi_min > 0.0 && self.xi_max > self.xi_min && self.xi_max.is_finite()) {
            return Err(bad("witness range needs 0 < xi_min < xi_max"));
        }
        if self.count < 3 {
            return Err(bad("witness.count must be at least 3"));
        }
        Ok(())
    }
}

/// Probabilists' Hermite polynomial.
fn hermite(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `gaussian`: `e^{−x²/2}`. `hermite(n)`: `He_n(x)e^{−x²/2}e^{int}`.
/// `bump`: `exp(−1/(1−y²))`, `y = x/4`, on `|x| < 4` times `1 + sin(t)/2`.
fn builtin_rhs(spec: &str, grid: CylinderGrid) -> Result<Option<Field>, CliError> {
    let field = match spec {
        "gaussian" => Field::from_fn(grid, |_, x| C64::new((-x * x / 2.0).exp(), 0.0)),
        "bump" => Field::from_fn(grid, |t, x| {
            let y = x / 4.0;
            let v = if y.abs() < 1.0 {
                (-1.0 / (1.0 - y * y)).exp()
            } else {
                0.0
            };
            C64::new(v * (1.0 + 0.5 * t.sin()), 0.0)
        }),
        _ => {
            let Some(arg) = spec
                .strip_prefix("hermite(")
                .and_then(|r| r.strip_suffix(')'))
            else {
                return Ok(None);
            };
            let n: usize = arg
                .trim()
                .parse()
                .map_err(|_| bad(format!("hermite order must be a non-negative integer: {arg}")))?;
            if n > 20 {
                return Err(bad("hermite order above 20 does not fit typical grids"));
            }
            let norm = (2.0 * PI).sqrt();
            Field::from_fn(grid, move |t, x| {
                C64::from_polar(hermite(n, x) * (-x * x / 2.0).exp() / norm, n as f64 * t)
            })
        }
    };
    Ok(Some(field))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_recurrence() {
        assert_eq!(hermite(0, 3.0), 1.0);
        assert_eq!(hermite(2, 3.0), 8.0);
        assert_eq!(hermite(3, 2.0), 2.0);
    }

    #[test]
    fn parses_expression_and_series_coefficients() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"operator": {"c": "i*sin(t)+i", "q": {"k_max": 0, "re": [0.0], "im": [0.5]}},
                "grid": {"n_t": 16, "n_x": 64, "X": 10}}"#,
        )
        .unwrap();
        let op = cfg.operator().unwrap();
        assert!((op.q0() - C64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((op.b0() - 1.0).abs() < 1e-15);
        assert_eq!(cfg.grid().unwrap().n_x, 64);
    }

    #[test]
    fn builtins_resolve() {
        let grid = CylinderGrid::new(8, 128, 15.0).unwrap();
        for name in ["gaussian", "bump", "hermite(3)"] {
            let f = builtin_rhs(name, grid).unwrap().unwrap();
            assert!(f.check_boundary().is_ok(), "{name}");
        }
        assert!(builtin_rhs("data.csv", grid).unwrap().is_none());
        assert!(builtin_rhs("hermite(x)", grid).is_err());
    }
}
