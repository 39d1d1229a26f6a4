use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calculus::MultiplierFunction;
use crate::error::{Error, Result};
use crate::space::{parse_mask, DEFAULT_POINT_CAP};

/// Largest number of samples allowed on a norm grid.
pub const GRID_POINT_CAP: usize = 4096;

pub(crate) fn config_error(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// A scenario run: one table per module plus grids and output paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub space: SpaceConfig,
    #[serde(default)]
    pub operator: OperatorConfig,
    #[serde(default)]
    pub multiplier: MultiplierConfig,
    #[serde(default)]
    pub norms: NormsConfig,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub grids: GridsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpaceConfig {
    /// `torus`, `segment` or `mask`.
    pub builder: String,
    /// Size ladder: side length for tori, radius for segments.
    pub sizes: Vec<usize>,
    pub dim: usize,
    /// Text grid of `#`/`.` cells for the `mask` builder.
    pub mask: Option<String>,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        Self {
            builder: "torus".into(),
            sizes: vec![32, 64, 128],
            dim: 1,
            mask: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OperatorConfig {
    /// `laplacian`, `schrodinger` or `dirichlet`.
    pub builder: String,
    /// Schrödinger potentials are drawn uniformly from `[0, potential_max]`.
    pub potential_max: f64,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self {
            builder: "laplacian".into(),
            potential_max: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultiplierConfig {
    /// `riesz_mean` (dilates over `grids.t`) or `presets`.
    pub family: String,
    pub delta: f64,
    pub presets: Vec<String>,
    /// Apply to `L^{1/m}` instead of `L`.
    pub root: bool,
    pub trials: usize,
    /// `M` in `A_r = I - (I - e^{-r^m L})^M`.
    pub smoothing_m: u32,
    pub p0: f64,
    pub balls: usize,
}

impl Default for MultiplierConfig {
    fn default() -> Self {
        Self {
            family: "riesz_mean".into(),
            delta: 2.0,
            presets: Vec::new(),
            root: false,
            trials: 16,
            smoothing_m: 2,
            p0: 1.0,
            balls: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    pub s: Vec<f64>,
    pub q: Vec<f64>,
    pub grid_points: usize,
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self {
            s: vec![1.5],
            q: vec![f64::INFINITY],
            grid_points: GRID_POINT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsConfig {
    pub p: Vec<f64>,
    /// Power-weight exponents `max(|x|, 1/2)^β`.
    pub beta: Vec<f64>,
    pub tau: f64,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        Self {
            p: vec![4.0],
            beta: vec![0.5],
            tau: crate::verify::DEFAULT_TAU,
        }
    }
}

/// Finite grids replacing sups over continuous parameters. Empty grids
/// fall back to scenario defaults derived from the spectrum.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridsConfig {
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub tau: Vec<f64>,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// File stem; defaults to the scenario name.
    pub stem: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("hlab-out"),
            stem: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn stem(&self) -> &str {
        self.output.stem.as_deref().unwrap_or(&self.scenario)
    }

    /// Number of points of the space built for ladder entry `size`.
    pub fn point_count(&self, size: usize) -> Result<usize> {
        match self.space.builder.as_str() {
            "torus" => size.checked_pow(self.space.dim as u32).ok_or_else(|| {
                config_error(
                    "space.sizes",
                    format!("{size}^{} overflows", self.space.dim),
                )
            }),
            "segment" => Ok(2 * size + 1),
            "mask" => {
                let text =
                    self.space.mask.as_deref().ok_or_else(|| {
                        config_error("space.mask", "the mask builder needs a mask")
                    })?;
                let (_, _, cells) =
                    parse_mask(text).map_err(|e| config_error("space.mask", e.to_string()))?;
                Ok(cells.iter().filter(|c| **c).count())
            }
            other => Err(config_error(
                "space.builder",
                format!("unknown builder `{other}`"),
            )),
        }
    }

    /// Checks every field before any computation runs.
    pub fn validate(&self) -> Result<()> {
        if !super::scenarios::SCENARIOS
            .iter()
            .any(|s| s.name == self.scenario)
        {
            return Err(Error::Unknown {
                kind: "scenario",
                name: self.scenario.clone(),
            });
        }
        if self.space.builder != "mask" && self.space.sizes.is_empty() {
            return Err(config_error("space.sizes", "at least one size is required"));
        }
        if self.space.builder == "torus" && !(1..=3).contains(&self.space.dim) {
            return Err(config_error(
                "space.dim",
                format!("need 1 <= dim <= 3, got {}", self.space.dim),
            ));
        }
        let sizes: Vec<usize> = if self.space.builder == "mask" {
            vec![0]
        } else {
            self.space.sizes.clone()
        };
        for size in sizes {
            if self.space.builder != "mask" && size < 2 {
                return Err(config_error(
                    "space.sizes",
                    format!("sizes must be at least 2, got {size}"),
                ));
            }
            let n = self.point_count(size)?;
            if n > DEFAULT_POINT_CAP {
                return Err(Error::CapExceeded {
                    requested: n,
                    cap: DEFAULT_POINT_CAP,
                });
            }
        }
        match self.operator.builder.as_str() {
            "laplacian" | "schrodinger" => {}
            "dirichlet" if self.space.builder == "mask" => {}
            "dirichlet" => {
                return Err(config_error(
                    "operator.builder",
                    "dirichlet needs the mask space builder",
                ))
            }
            other => {
                return Err(config_error(
                    "operator.builder",
                    format!("unknown builder `{other}`"),
                ))
            }
        }
        if !(self.operator.potential_max >= 0.0 && self.operator.potential_max.is_finite()) {
            return Err(config_error(
                "operator.potential_max",
                "must be finite and non-negative",
            ));
        }
        match self.multiplier.family.as_str() {
            "riesz_mean" => {
                if !(self.multiplier.delta >= 0.0) {
                    return Err(config_error("multiplier.delta", "must be non-negative"));
                }
            }
            "presets" => {
                if self.multiplier.presets.is_empty() {
                    return Err(config_error(
                        "multiplier.presets",
                        "the presets family needs at least one preset",
                    ));
                }
            }
            other => {
                return Err(config_error(
                    "multiplier.family",
                    format!("unknown family `{other}`"),
                ))
            }
        }
        for p in &self.multiplier.presets {
            MultiplierFunction::from_preset(p)
                .map_err(|e| config_error("multiplier.presets", e.to_string()))?;
        }
        if self.multiplier.trials == 0 {
            return Err(config_error("multiplier.trials", "must be positive"));
        }
        if self.multiplier.smoothing_m == 0 {
            return Err(config_error("multiplier.smoothing_m", "must be positive"));
        }
        if !(self.multiplier.p0 >= 1.0 && self.multiplier.p0 < 2.0) {
            return Err(config_error(
                "multiplier.p0",
                format!("need 1 <= p0 < 2, got {}", self.multiplier.p0),
            ));
        }
        if self.multiplier.balls == 0 {
            return Err(config_error("multiplier.balls", "must be positive"));
        }
        if self.norms.s.is_empty() || self.norms.s.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(config_error(
                "norms.s",
                "need finite non-negative smoothness values",
            ));
        }
        if self.norms.q.is_empty() || self.norms.q.iter().any(|q| !(*q >= 1.0)) {
            return Err(config_error("norms.q", "need exponents q >= 1"));
        }
        if !(16..=GRID_POINT_CAP).contains(&self.norms.grid_points) {
            return Err(config_error(
                "norms.grid_points",
                format!(
                    "need 16 <= grid_points <= {GRID_POINT_CAP}, got {}",
                    self.norms.grid_points
                ),
            ));
        }
        if let Some(p) = self.weights.p.iter().find(|p| !(**p >= 1.0)) {
            return Err(config_error("weights.p", format!("need p >= 1, got {p}")));
        }
        if self.weights.p.is_empty() {
            return Err(config_error(
                "weights.p",
                "at least one exponent is required",
            ));
        }
        if self.weights.beta.iter().any(|b| !b.is_finite()) {
            return Err(config_error("weights.beta", "exponents must be finite"));
        }
        if !(self.weights.tau > 0.0) {
            return Err(config_error("weights.tau", "must be positive"));
        }
        for (field, grid) in [("grids.t", &self.grids.t), ("grids.r", &self.grids.r)] {
            if grid.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(config_error(field, "values must be positive and finite"));
            }
        }
        if self
            .grids
            .theta
            .iter()
            .any(|t| !(*t > 0.0 && *t < std::f64::consts::FRAC_PI_2))
        {
            return Err(config_error("grids.theta", "angles must lie in (0, π/2)"));
        }
        if self.grids.tau.iter().any(|t| !t.is_finite()) {
            return Err(config_error("grids.tau", "values must be finite"));
        }
        if self.grids.n.contains(&0) {
            return Err(config_error("grids.n", "values must be positive"));
        }
        Ok(())
    }
}
