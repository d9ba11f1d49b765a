//! Scenario configuration files.
//!
//! TOML with fixed sections; unknown keys are rejected so that a mistyped
//! tolerance cannot silently fall back to a default.
//!
//! ```toml
//! [scenario]
//! kind = "solitary_wave"   # equilibrium | solitary_wave | gaussian_hump | rough_data
//! a = 0.2
//!
//! [grid]
//! length = 80.0
//! n = 1024
//!
//! [integrator]
//! dt = "auto"              # or a number
//! final_time = 10.0
//!
//! [output]
//! directory = "out"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{GnError, Result};
use crate::grid::PeriodicGrid;
use crate::integrate::{IntegratorConfig, Method};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Equilibrium,
    SolitaryWave,
    GaussianHump,
    RoughData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    /// Solitary-wave amplitude.
    #[serde(default = "defaults::a")]
    pub a: f64,
    /// Gaussian hump height.
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    /// Gaussian hump width.
    #[serde(default = "defaults::width")]
    pub width: f64,
    /// Regularity index of rough data: `h₀ - 1 ∈ H^σ`, `u₀ ∈ H^{σ+1}`.
    #[serde(default = "defaults::sigma")]
    pub sigma: f64,
    /// Rough-data amplitude in the respective Sobolev norms.
    #[serde(default = "defaults::amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    /// Flips the sign of the initial velocity.
    #[serde(default)]
    pub negate_velocity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub length: f64,
    pub n: usize,
}

/// `dt = "auto"` or a positive number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtSetting {
    Fixed(f64),
    Named(String),
}

impl Default for DtSetting {
    fn default() -> Self {
        Self::Named("auto".into())
    }
}

impl DtSetting {
    pub fn resolve(&self) -> Result<Option<f64>> {
        match self {
            Self::Fixed(dt) if dt.is_finite() && *dt > 0.0 => Ok(Some(*dt)),
            Self::Fixed(dt) => Err(GnError::InvalidArgument(format!("dt must be positive, got {dt}"))),
            Self::Named(s) if s == "auto" => Ok(None),
            Self::Named(s) => Err(GnError::InvalidArgument(format!("dt must be a number or \"auto\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default)]
    pub dt: DtSetting,
    pub final_time: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "defaults::cfl_safety")]
    pub cfl_safety: f64,
    #[serde(default = "defaults::max_steps")]
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Artifact {
    Fields,
    Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "defaults::directory")]
    pub directory: PathBuf,
    #[serde(default = "defaults::stride")]
    pub stride: usize,
    /// CSV artifacts to emit; `summary.json` is always written.
    #[serde(default = "defaults::formats")]
    pub formats: Vec<Artifact>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: defaults::directory(), stride: defaults::stride(), formats: defaults::formats() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    /// σ for the `‖h - 1‖_{H^σ}` and `‖u‖_{H^{σ+1}}` columns.
    #[serde(default = "defaults::diagnostics_sigma")]
    pub sigma: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self { sigma: defaults::diagnostics_sigma() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    /// Pass threshold on the sup-norm differences of h and u.
    #[serde(default = "defaults::tolerance")]
    pub tolerance: f64,
    #[serde(default = "defaults::dealias")]
    pub dealias: bool,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self { tolerance: defaults::tolerance(), dealias: defaults::dealias() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderKind {
    /// dt ladder against a finer Richardson reference.
    Time,
    /// Grid ladder for the Lagrangian solver against the exact solitary wave.
    Space,
    /// Grid ladder of the manufactured elliptic solve.
    Elliptic,
    /// Grid ladder of the Lagrangian-vs-Eulerian difference.
    Cross,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub kind: LadderKind,
    /// Grid sizes for spatial ladders.
    #[serde(default)]
    pub resolutions: Vec<usize>,
    /// Number of dt levels for the time ladder (each halves the previous).
    #[serde(default = "defaults::levels")]
    pub levels: usize,
    /// Reference step is the finest ladder step divided by this factor.
    #[serde(default = "defaults::reference_factor")]
    pub reference_factor: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub grid: GridSection,
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeSection>,
}

mod defaults {
    use super::Artifact;
    use std::path::PathBuf;

    pub fn a() -> f64 {
        0.2
    }
    pub fn epsilon() -> f64 {
        0.1
    }
    pub fn width() -> f64 {
        2.0
    }
    pub fn sigma() -> f64 {
        0.6
    }
    pub fn amplitude() -> f64 {
        0.05
    }
    pub fn cfl_safety() -> f64 {
        0.5
    }
    pub fn max_steps() -> usize {
        1_000_000
    }
    pub fn directory() -> PathBuf {
        PathBuf::from("gnflow-out")
    }
    pub fn stride() -> usize {
        10
    }
    pub fn formats() -> Vec<Artifact> {
        vec![Artifact::Fields, Artifact::Diagnostics]
    }
    pub fn diagnostics_sigma() -> f64 {
        1.0
    }
    pub fn tolerance() -> f64 {
        1e-4
    }
    pub fn dealias() -> bool {
        true
    }
    pub fn levels() -> usize {
        3
    }
    pub fn reference_factor() -> usize {
        4
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| GnError::InvalidArgument(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GnError::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable as TOML")
    }

    pub fn grid(&self) -> Result<PeriodicGrid> {
        PeriodicGrid::new(self.grid.length, self.grid.n)
    }

    pub fn integrator(&self) -> Result<IntegratorConfig> {
        let cfg = IntegratorConfig {
            dt: self.integrator.dt.resolve()?,
            final_time: self.integrator.final_time,
            method: self.integrator.method,
            cfl_safety: self.integrator.cfl_safety,
            max_steps: self.integrator.max_steps,
            stride: self.output.stride,
            sigma: self.diagnostics.sigma,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.integrator()?;
        let s = &self.scenario;
        match s.kind {
            ScenarioKind::SolitaryWave if !(s.a > 0.0 && s.a < 2.0) => {
                return Err(GnError::InvalidArgument(format!("scenario.a must lie in (0, 2), got {}", s.a)));
            }
            ScenarioKind::GaussianHump if !(s.epsilon > -1.0 && s.epsilon.is_finite() && s.width > 0.0) => {
                return Err(GnError::InvalidArgument(
                    "gaussian_hump needs epsilon > -1 and width > 0".into(),
                ));
            }
            ScenarioKind::RoughData if !(s.sigma > 0.0 && s.amplitude >= 0.0 && s.amplitude.is_finite()) => {
                return Err(GnError::InvalidArgument("rough_data needs sigma > 0 and amplitude >= 0".into()));
            }
            _ => {}
        }
        if !(self.compare.tolerance > 0.0) {
            return Err(GnError::InvalidArgument("compare.tolerance must be positive".into()));
        }
        if let Some(c) = &self.converge {
            match c.kind {
                LadderKind::Time if c.levels < 2 => {
                    return Err(GnError::InvalidArgument("converge.levels must be at least 2".into()));
                }
                LadderKind::Time if c.reference_factor < 2 => {
                    return Err(GnError::InvalidArgument("converge.reference_factor must be at least 2".into()));
                }
                LadderKind::Space | LadderKind::Elliptic | LadderKind::Cross => {
                    if c.resolutions.len() < 2 {
                        return Err(GnError::InvalidArgument(
                            "converge.resolutions needs at least two grid sizes".into(),
                        ));
                    }
                    for &n in &c.resolutions {
                        PeriodicGrid::new(self.grid.length, n)?;
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scenario]
kind = "solitary_wave"
a = 0.2

[grid]
length = 80.0
n = 256

[integrator]
final_time = 1.0
"#;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.scenario.kind, ScenarioKind::SolitaryWave);
        assert_eq!(c.integrator.dt, DtSetting::Named("auto".into()));
        assert_eq!(c.integrator().unwrap().dt, None);
        assert_eq!(c.output.stride, 10);
    }

    #[test]
    fn numeric_dt() {
        let text = MINIMAL.replace("final_time = 1.0", "final_time = 1.0\ndt = 0.01");
        let c = ScenarioConfig::from_toml(&text).unwrap();
        assert_eq!(c.integrator().unwrap().dt, Some(0.01));
        let bad = MINIMAL.replace("final_time = 1.0", "final_time = 1.0\ndt = \"fast\"");
        assert!(ScenarioConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("a = 0.2", "a = 0.2\ntolerence = 1e-3");
        assert!(ScenarioConfig::from_toml(&text).is_err());
        let text = format!("{MINIMAL}\n[extras]\nfoo = 1\n");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        assert!(ScenarioConfig::from_toml(&MINIMAL.replace("a = 0.2", "a = 2.5")).is_err());
        assert!(ScenarioConfig::from_toml(&MINIMAL.replace("n = 256", "n = 10")).is_err());
        let single = format!("{MINIMAL}\n[converge]\nkind = \"space\"\nresolutions = [256]\n");
        assert!(ScenarioConfig::from_toml(&single).is_err());
    }

    #[test]
    fn rough_data_below_half_is_accepted() {
        let text = MINIMAL.replace("kind = \"solitary_wave\"\na = 0.2", "kind = \"rough_data\"\nsigma = 0.4");
        assert!(ScenarioConfig::from_toml(&text).is_ok());
    }

    #[test]
    fn round_trips_through_toml() {
        let c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        let again = ScenarioConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }
}
