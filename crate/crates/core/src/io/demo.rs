//! Ready-made design documents.

use std::f64::consts::PI;

use super::config::*;
use crate::region::PlanarRegion;
use crate::scenario::{SourceKind, Transport};

pub const DEMO_NAMES: [&str; 2] = ["uniform-disk", "gaussian-to-ring"];

/// Final regularization relative to `diam(D2)^2`; finer than the library
/// default so the cap rim is not smeared.
const DEMO_FINAL_EPSILON: f64 = 1e-4;

fn schedule(theta_max: f64) -> Vec<f64> {
    let d = 2.0 * theta_max.sin();
    crate::solver::geometric_schedule(0.1 * d * d, DEMO_FINAL_EPSILON * d * d, 0.5)
}

pub fn demo_config(name: &str) -> Option<DesignConfig> {
    match name {
        // collimated mirror: f = 1/pi on the unit disk onto a uniform 30 degree cap
        "uniform-disk" => {
            let theta = 30f64.to_radians();
            let sigma = 2.0 * PI * (1.0 - theta.cos());
            Some(DesignConfig {
                scenario: ScenarioBlock {
                    transport: Transport::Reflect,
                    source: SourceKind::Collimated,
                    n1: 1.0,
                    n2: 1.0,
                    plane_height: 1.0,
                },
                source: SourceBlock {
                    domain: PlanarRegion::disk(1.0),
                    intensity: SourceIntensitySpec::Uniform { value: 1.0 / PI },
                },
                target: TargetBlock {
                    axis: -1,
                    theta_min: 0.0,
                    theta_max: theta,
                    intensity: TargetIntensitySpec::Uniform { value: 1.0 / sigma },
                },
                grid: GridBlock::default(),
                solver: SolverBlock {
                    epsilon_schedule: Some(schedule(theta)),
                    ..SolverBlock::default()
                },
                verify: VerifyBlock::default(),
                normalize_masses: false,
            })
        }
        // Gaussian beam refracted into a ring between 10 and 35 degrees
        "gaussian-to-ring" => {
            let (t0, t1) = (10f64.to_radians(), 35f64.to_radians());
            Some(DesignConfig {
                scenario: ScenarioBlock {
                    transport: Transport::Refract,
                    source: SourceKind::Collimated,
                    n1: 1.0,
                    n2: 1.5,
                    plane_height: 1.0,
                },
                source: SourceBlock {
                    domain: PlanarRegion::disk(1.0),
                    intensity: SourceIntensitySpec::Gaussian { peak: 1.0, sigma: 0.5 },
                },
                target: TargetBlock {
                    axis: 1,
                    theta_min: t0,
                    theta_max: t1,
                    intensity: TargetIntensitySpec::Uniform { value: 1.0 },
                },
                grid: GridBlock::default(),
                solver: SolverBlock {
                    epsilon_schedule: Some(schedule(t1)),
                    ..SolverBlock::default()
                },
                verify: VerifyBlock::default(),
                normalize_masses: true,
            })
        }
        _ => None,
    }
}
