use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::gridfile::GridFile;
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::optics::MediumPair;
use crate::problem::MaProblem;
use crate::region::PlanarRegion;
use crate::scenario::{
    CapAxis, Scenario, SourceIntensity, SourceKind, SourceSpec, TargetIntensity, TargetSpec, Transport, MAX_CAP_ANGLE,
};
use crate::solver::{InitialDual, SolverParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    pub scenario: ScenarioBlock,
    pub source: SourceBlock,
    pub target: TargetBlock,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub verify: VerifyBlock,
    /// Rescale `g` so that the target power matches the source power.
    #[serde(default)]
    pub normalize_masses: bool,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBlock {
    pub transport: Transport,
    pub source: SourceKind,
    #[serde(default = "one")]
    pub n1: f64,
    #[serde(default = "one")]
    pub n2: f64,
    /// Height `a` of the interface plane `z = a`; coordinates are divided by
    /// `a` so the problem is solved on `z = 1`.
    #[serde(default = "one")]
    pub plane_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceBlock {
    pub domain: PlanarRegion,
    pub intensity: SourceIntensitySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceIntensitySpec {
    Uniform { value: f64 },
    Gaussian { peak: f64, sigma: f64 },
    /// Grid file, relative to the config file's directory.
    Sampled { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetBlock {
    /// `-1` for the lower hemisphere (reflection), `+1` for the upper.
    pub axis: i32,
    /// Radians.
    #[serde(default)]
    pub theta_min: f64,
    pub theta_max: f64,
    pub intensity: TargetIntensitySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetIntensitySpec {
    Uniform { value: f64 },
    Gaussian { peak: f64, sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_resolution: Option<usize>,
}

impl Default for GridBlock {
    fn default() -> Self {
        GridBlock {
            resolution: 64,
            target_resolution: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    /// Omitted: geometric from `0.1 d^2` to `1e-3 d^2`, `d` the diameter of
    /// the projected target.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_schedule: Option<Vec<f64>>,
    pub max_iterations: usize,
    pub marginal_tolerance: f64,
    pub initial_dual: InitialDual,
}

impl Default for SolverBlock {
    fn default() -> Self {
        SolverBlock {
            epsilon_schedule: None,
            max_iterations: 5000,
            marginal_tolerance: 1e-4,
            initial_dual: InitialDual::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyBlock {
    pub rays: usize,
    pub bins_u: usize,
    pub bins_v: usize,
    pub seed: u64,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        VerifyBlock {
            rays: 1_000_000,
            bins_u: 24,
            bins_v: 24,
            seed: 0,
        }
    }
}

/// 1-based line of the last key of a dotted path, found by scanning for
/// the quoted keys in order.
fn line_of(text: &str, path: &str) -> Option<usize> {
    let mut pos = 0;
    for key in path.split('.') {
        let key = key.split('[').next().unwrap_or(key);
        let needle = format!("\"{key}\"");
        pos += text[pos..].find(&needle)?;
    }
    Some(text[..pos].matches('\n').count() + 1)
}

fn invalid(text: Option<&str>, path: &str, message: String) -> Error {
    let message = match text.and_then(|t| line_of(t, path)) {
        Some(line) => format!("{message} (line {line})"),
        None => message,
    };
    Error::validation(path, message)
}

/// Parses and validates a design document.
pub fn parse_config(text: &str) -> Result<DesignConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: DesignConfig = serde_path_to_error::deserialize(&mut *de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    de.end().map_err(|e| Error::Parse {
        path: ".".into(),
        message: e.to_string(),
    })?;
    cfg.check(Some(text))?;
    Ok(cfg)
}

impl DesignConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.check(None)
    }

    fn check(&self, text: Option<&str>) -> Result<()> {
        let bad = |path: &str, msg: String| Err(invalid(text, path, msg));
        let sc = &self.scenario;
        for (path, n) in [("scenario.n1", sc.n1), ("scenario.n2", sc.n2)] {
            if !(n.is_finite() && n > 0.0) {
                return bad(path, format!("refractive index must be positive, got {n}"));
            }
        }
        if sc.transport == Transport::Reflect && sc.n1 != sc.n2 {
            return bad(
                "scenario.n2",
                format!(
                    "The case of reflection is when $n_1=n_2$; got n1 = {}, n2 = {}",
                    sc.n1, sc.n2
                ),
            );
        }
        if !(sc.plane_height.is_finite() && sc.plane_height > 0.0) {
            return bad("scenario.plane_height", format!("must be positive, got {}", sc.plane_height));
        }
        if !self.source.domain.is_valid() {
            return bad("source.domain", "degenerate source domain".into());
        }
        match &self.source.intensity {
            SourceIntensitySpec::Uniform { value } if !(value.is_finite() && *value >= 0.0) => {
                return bad("source.intensity.value", format!("must be nonnegative, got {value}"));
            }
            SourceIntensitySpec::Gaussian { peak, sigma } => {
                if !(peak.is_finite() && *peak >= 0.0) {
                    return bad("source.intensity.peak", format!("must be nonnegative, got {peak}"));
                }
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return bad("source.intensity.sigma", format!("must be positive, got {sigma}"));
                }
            }
            _ => {}
        }
        let t = &self.target;
        let expected = match sc.transport {
            Transport::Reflect => -1,
            Transport::Refract => 1,
        };
        if t.axis != 1 && t.axis != -1 {
            return bad("target.axis", format!("must be -1 or +1, got {}", t.axis));
        }
        if t.axis != expected {
            return bad(
                "target.axis",
                format!(
                    "{} sends rays into the {} hemisphere; axis must be {expected:+}",
                    if expected < 0 { "reflection" } else { "refraction" },
                    if expected < 0 { "lower" } else { "upper" },
                ),
            );
        }
        if !(t.theta_max < FRAC_PI_2) {
            return bad(
                "target.theta_max",
                format!("target cap reaches equator: theta_max = {} rad must be below pi/2", t.theta_max),
            );
        }
        if t.theta_max > MAX_CAP_ANGLE + 1e-12 {
            return bad(
                "target.theta_max",
                format!("cap opening {} rad exceeds the supported 80 degrees", t.theta_max),
            );
        }
        if !(t.theta_min >= 0.0 && t.theta_min < t.theta_max) {
            return bad(
                "target.theta_min",
                format!("need 0 <= theta_min < theta_max, got theta_min = {}", t.theta_min),
            );
        }
        match t.intensity {
            TargetIntensitySpec::Uniform { value } if !(value.is_finite() && value > 0.0) => {
                return bad("target.intensity.value", format!("must be positive, got {value}"));
            }
            TargetIntensitySpec::Gaussian { peak, sigma } => {
                if !(peak.is_finite() && peak > 0.0) {
                    return bad("target.intensity.peak", format!("must be positive, got {peak}"));
                }
                if !(sigma.is_finite() && sigma > 0.0) {
                    return bad("target.intensity.sigma", format!("must be positive, got {sigma}"));
                }
            }
            _ => {}
        }
        if self.grid.resolution < 8 {
            return bad("grid.resolution", format!("must be at least 8, got {}", self.grid.resolution));
        }
        if let Some(n) = self.grid.target_resolution {
            if n < 8 {
                return bad("grid.target_resolution", format!("must be at least 8, got {n}"));
            }
        }
        let s = &self.solver;
        let params = SolverParams {
            epsilon_schedule: s.epsilon_schedule.clone().unwrap_or_else(|| vec![1.0]),
            max_iterations: s.max_iterations,
            marginal_tolerance: s.marginal_tolerance,
            target_resolution: None,
            initial_dual: s.initial_dual.clone(),
        };
        if let Err(Error::Validation { path, message }) = params.validate() {
            return bad(&path, message);
        }
        let v = &self.verify;
        if v.rays == 0 {
            return bad("verify.rays", "must be positive".into());
        }
        if v.bins_u == 0 || v.bins_v == 0 {
            return bad("verify.bins_u", "bin counts must be positive".into());
        }
        Ok(())
    }

    /// Length scale applied to plane coordinates: `1 / a` for the point
    /// source, 1 for collimated beams (their geometry does not depend on `a`).
    pub fn length_scale(&self) -> f64 {
        match self.scenario.source {
            SourceKind::Point => 1.0 / self.scenario.plane_height,
            SourceKind::Collimated => 1.0,
        }
    }

    /// Builds the scenario on the plane `z = 1`. `base` resolves relative
    /// paths of sampled intensities.
    pub fn build_scenario(&self, base: &Path) -> Result<Scenario> {
        let k = self.length_scale();
        let intensity = match &self.source.intensity {
            SourceIntensitySpec::Uniform { value } => SourceIntensity::Uniform(*value),
            SourceIntensitySpec::Gaussian { peak, sigma } => SourceIntensity::Gaussian {
                peak: *peak,
                sigma: sigma * k,
            },
            SourceIntensitySpec::Sampled { path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let g = GridFile::read(&full)?;
                SourceIntensity::Sampled(Arc::new(scale_coordinates(&g.field, k)))
            }
        };
        let source = SourceSpec {
            kind: self.scenario.source,
            domain: self.source.domain.scaled(k),
            intensity,
        };
        let target = TargetSpec {
            axis: if self.target.axis < 0 { CapAxis::Down } else { CapAxis::Up },
            theta_min: self.target.theta_min,
            theta_max: self.target.theta_max,
            intensity: match self.target.intensity {
                TargetIntensitySpec::Uniform { value } => TargetIntensity::Uniform(value),
                TargetIntensitySpec::Gaussian { peak, sigma } => TargetIntensity::Gaussian { peak, sigma },
            },
        };
        let media = MediumPair::new(self.scenario.n1, self.scenario.n2)?;
        Scenario::new(self.scenario.transport, source, target, media)
    }

    pub fn solver_params(&self, problem: &MaProblem) -> SolverParams {
        let mut p = SolverParams::default_for(problem);
        if let Some(s) = &self.solver.epsilon_schedule {
            p.epsilon_schedule = s.clone();
        }
        p.max_iterations = self.solver.max_iterations;
        p.marginal_tolerance = self.solver.marginal_tolerance;
        p.target_resolution = self.grid.target_resolution;
        p.initial_dual = self.solver.initial_dual.clone();
        p
    }
}

/// Multiplies grid coordinates by `k`, leaving values alone.
pub fn scale_coordinates(f: &ScalarField, k: f64) -> ScalarField {
    let mut out = f.clone();
    out.grid.x0 *= k;
    out.grid.y0 *= k;
    out.grid.hx *= k;
    out.grid.hy *= k;
    out
}

/// Converts a length-valued field (phase, potential) between the plane
/// `z = 1` and the physical plane: `psi_a(X) = psi(k X) / k`.
pub fn scale_length_field(f: &ScalarField, k: f64) -> ScalarField {
    let mut out = scale_coordinates(f, 1.0 / k);
    out.values.iter_mut().for_each(|v| *v /= k);
    out
}
