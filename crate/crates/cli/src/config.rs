//! Run configuration: a versioned TOML document.

use std::path::{Path, PathBuf};

use induction_sbp::{BoundaryMode, DtRule, Grid2D, InitialData, Order, ProblemSpec, Rect, VelocityField};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    pub scheme: Scheme,
    pub final_time: f64,
    pub initial: Initial,
    pub boundary: Boundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Times at which field snapshots are written by `run`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<f64>,
    pub grid: GridSize,
    pub domain: Domain,
    pub velocity: Velocity,
    pub dt: Dt,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<Converge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<Stability>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Run,
    Converge,
    Stability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "SBP2")]
    Sbp2,
    #[serde(rename = "SBP4")]
    Sbp4,
}

impl From<Scheme> for Order {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Sbp2 => Order::Sbp2,
            Scheme::Sbp4 => Order::Sbp4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    GaussianHump,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Zero,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSize {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub ax: f64,
    pub bx: f64,
    pub ay: f64,
    pub by: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Velocity {
    Rotation,
    Shear,
    Constant { a: f64, b: f64 },
    Oscillating { a: f64, b: f64, omega: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dt {
    Fixed { value: f64 },
    Scaled { power: f64, constant: f64 },
    /// `Δx²` for SBP2, `Δx³` for SBP4.
    Convergence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Converge {
    /// `[nx, ny]` pairs, doubling from one entry to the next.
    pub grids: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stability {
    /// Absolute step sizes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dt: Vec<f64>,
    /// Step sizes as multiples of the larger grid spacing.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dx_multiples: Vec<f64>,
    /// Largest admissible `K` in `growth ≤ 1 + K Δt`.
    pub max_k: f64,
}

fn bad(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {msg}"))
}

fn positive(path: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(path, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn order(&self) -> Order {
        self.scheme.into()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return Err(bad("final_time", format!("must be non-negative, got {}", self.final_time)));
        }
        self.check_grid("grid", self.grid.nx, self.grid.ny)?;
        Rect::new(self.domain.ax, self.domain.bx, self.domain.ay, self.domain.by)
            .map_err(|e| bad("domain", e))?;
        match self.dt {
            Dt::Fixed { value } => positive("dt.value", value)?,
            Dt::Scaled { power, constant } => {
                positive("dt.constant", constant)?;
                if !power.is_finite() {
                    return Err(bad("dt.power", "must be finite"));
                }
            }
            Dt::Convergence => {}
        }
        for (k, &t) in self.snapshots.iter().enumerate() {
            if !(0.0..=self.final_time).contains(&t) {
                return Err(bad(&format!("snapshots[{k}]"), format!("{t} is outside [0, final_time]")));
            }
        }
        if self.boundary == Boundary::Exact && self.velocity != Velocity::Rotation {
            return Err(bad("boundary", "exact boundary data needs the rotation velocity"));
        }
        if let Some(c) = &self.converge {
            if c.grids.is_empty() {
                return Err(bad("converge.grids", "must not be empty"));
            }
            for (k, g) in c.grids.iter().enumerate() {
                self.check_grid(&format!("converge.grids[{k}]"), g[0], g[1])?;
                if k > 0 {
                    let p = c.grids[k - 1];
                    if g[0] != 2 * p[0] || g[1] != 2 * p[1] {
                        return Err(bad(
                            &format!("converge.grids[{k}]"),
                            format!("{}x{} does not double {}x{}", g[0], g[1], p[0], p[1]),
                        ));
                    }
                }
            }
        }
        if let Some(s) = &self.stability {
            for (k, &dt) in s.dt.iter().enumerate() {
                positive(&format!("stability.dt[{k}]"), dt)?;
            }
            for (k, &m) in s.dx_multiples.iter().enumerate() {
                positive(&format!("stability.dx_multiples[{k}]"), m)?;
            }
            if s.dt.is_empty() && s.dx_multiples.is_empty() {
                return Err(bad("stability", "needs at least one of dt, dx_multiples"));
            }
            if s.max_k.is_nan() || s.max_k < 0.0 {
                return Err(bad("stability.max_k", format!("must be non-negative, got {}", s.max_k)));
            }
        }
        Ok(())
    }

    fn check_grid(&self, path: &str, nx: usize, ny: usize) -> Result<(), CliError> {
        let min = self.order().min_points();
        if nx < min || ny < min {
            return Err(bad(path, format!("{nx}x{ny} is below the {} minimum of {min}", self.order())));
        }
        Ok(())
    }

    /// Rejects a config written for a different experiment.
    pub fn expect(&self, experiment: Experiment) -> Result<(), CliError> {
        match self.experiment {
            Some(e) if e != experiment => Err(bad(
                "experiment",
                format!("config is for {e:?}, not {experiment:?}").to_lowercase(),
            )),
            _ => Ok(()),
        }
    }

    pub fn domain(&self) -> Rect {
        Rect::new(self.domain.ax, self.domain.bx, self.domain.ay, self.domain.by).expect("validated")
    }

    pub fn grid_of(&self, nx: usize, ny: usize) -> Result<Grid2D, CliError> {
        Grid2D::new(self.order(), nx, ny, self.domain()).map_err(|e| bad("grid", e))
    }

    pub fn grid(&self) -> Result<Grid2D, CliError> {
        self.grid_of(self.grid.nx, self.grid.ny)
    }

    pub fn problem(&self) -> ProblemSpec {
        ProblemSpec {
            velocity: match self.velocity {
                Velocity::Rotation => VelocityField::Rotation,
                Velocity::Shear => VelocityField::Shear,
                Velocity::Constant { a, b } => VelocityField::Constant { a, b },
                Velocity::Oscillating { a, b, omega } => VelocityField::Oscillating { a, b, omega },
            },
            initial: match self.initial {
                Initial::GaussianHump => InitialData::GaussianHump,
                Initial::Zero => InitialData::Zero,
            },
            boundary: match self.boundary {
                Boundary::Zero => BoundaryMode::ZeroG,
                Boundary::Exact => BoundaryMode::ExactG,
            },
            domain: self.domain(),
            final_time: self.final_time,
        }
    }

    pub fn dt_rule(&self) -> DtRule {
        match self.dt {
            Dt::Fixed { value } => DtRule::Fixed(value),
            Dt::Scaled { power, constant } => DtRule::Scaled { power, constant },
            Dt::Convergence => DtRule::convergence(self.order()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema_version = 1
scheme = "SBP4"
final_time = 6.283185307179586
initial = "gaussian_hump"
boundary = "zero"
snapshots = [3.141592653589793, 6.283185307179586]

[grid]
nx = 40
ny = 40

[domain]
ax = -1.0
bx = 1.0
ay = -1.0
by = 1.0

[velocity]
kind = "rotation"

[dt]
rule = "fixed"
value = 0.01
"#;

    fn with(extra: &str) -> String {
        format!("{BASE}\n{extra}")
    }

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_toml(BASE).unwrap();
        assert_eq!(cfg.scheme, Scheme::Sbp4);
        assert_eq!(cfg.dt_rule(), DtRule::Fixed(0.01));
        let once = cfg.to_toml();
        let again = RunConfig::from_toml(&once).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_toml(), once);
    }

    #[test]
    fn round_trips_every_section() {
        let text = with(
            "[converge]\ngrids = [[40, 40], [80, 80]]\n\n[stability]\ndx_multiples = [1.0, 10.0]\nmax_k = 0.5\n",
        )
        .replace("kind = \"rotation\"", "kind = \"oscillating\"\na = 1.0\nb = -0.5\nomega = 2.0");
        let cfg = RunConfig::from_toml(&text).unwrap();
        assert_eq!(cfg.velocity, Velocity::Oscillating { a: 1.0, b: -0.5, omega: 2.0 });
        let once = cfg.to_toml();
        assert_eq!(RunConfig::from_toml(&once).unwrap().to_toml(), once);
    }

    fn err(text: &str) -> String {
        match RunConfig::from_toml(text) {
            Err(CliError::Config(m)) => m,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn reports_field_paths() {
        assert!(err(&BASE.replace("nx = 40", "nx = 8")).starts_with("grid:"));
        assert!(err(&BASE.replace("schema_version = 1", "schema_version = 2")).starts_with("schema_version:"));
        assert!(err(&BASE.replace("value = 0.01", "value = -1.0")).starts_with("dt.value:"));
        assert!(err(&BASE.replace("bx = 1.0", "bx = -2.0")).starts_with("domain:"));
        assert!(err(&with("[converge]\ngrids = [[40, 40], [60, 60]]\n")).starts_with("converge.grids[1]:"));
        assert!(err(&BASE.replace("snapshots = [3.141592653589793", "snapshots = [7.0")).starts_with("snapshots[0]:"));
        assert!(err(&BASE.replace("boundary = \"zero\"", "boundary = \"exact\"").replace("\"rotation\"", "\"shear\""))
            .starts_with("boundary:"));
        assert!(err(&with("unknown = 3\n")).contains("unknown"));
        assert!(err(&BASE.replace("\"SBP4\"", "\"SBP6\"")).contains("SBP6"));
    }

    #[test]
    fn experiment_must_match() {
        let cfg = RunConfig::from_toml(&format!("experiment = \"converge\"\n{BASE}")).unwrap();
        assert!(cfg.expect(Experiment::Converge).is_ok());
        assert!(cfg.expect(Experiment::Run).is_err());
        let cfg = RunConfig::from_toml(BASE).unwrap();
        assert!(cfg.expect(Experiment::Stability).is_ok());
    }
}
