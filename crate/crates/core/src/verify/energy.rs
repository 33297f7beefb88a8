use serde::Serialize;

use super::histogram::SphericalHistogram;
use super::trace::{trace, Traced};
use crate::error::Result;
use crate::fields::PhaseField;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBalance {
    /// Source power emitted through the subset.
    pub lhs: f64,
    /// Integral of `g` over the image of the subset.
    pub rhs: f64,
    pub rel_err: f64,
}

/// Balance for the rays of `traced` whose strike point lies in `subset`.
///
/// The image of the subset is resolved bin by bin: each bin contributes
/// `g * dOmega` weighted by the share of its traced power that comes from
/// the subset.
pub fn energy_balance_traced(
    scenario: &Scenario,
    traced: &Traced,
    n_u: usize,
    n_v: usize,
    subset: impl Fn([f64; 2]) -> bool + Sync,
) -> EnergyBalance {
    let lhs = scenario.source.power_in(&subset);
    let hist = SphericalHistogram::for_target(&scenario.target, n_u, n_v);
    let mut all = vec![0.0; hist.len()];
    let mut part = vec![0.0; hist.len()];
    for (p, out) in traced.rays.origins.iter().zip(&traced.outgoing) {
        if let Some(d) = out {
            let k = hist.locate(d).index;
            all[k] += traced.rays.weight;
            if subset(*p) {
                part[k] += traced.rays.weight;
            }
        }
    }
    let mut rhs = 0.0;
    for k in 0..hist.len() {
        if all[k] > 0.0 {
            rhs += scenario.target.g(hist.bin_direction(k)) * hist.solid_angle(k) * part[k] / all[k];
        }
    }
    let rel_err = if lhs > 0.0 {
        (lhs - rhs).abs() / lhs
    } else if rhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    EnergyBalance { lhs, rhs, rel_err }
}

pub fn energy_balance(
    scenario: &Scenario,
    psi: &PhaseField,
    subset: impl Fn([f64; 2]) -> bool + Sync,
    n_rays: usize,
    n_bins: (usize, usize),
    seed: u64,
) -> Result<EnergyBalance> {
    let traced = trace(scenario, psi, n_rays, seed)?;
    Ok(energy_balance_traced(scenario, &traced, n_bins.0, n_bins.1, subset))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid2, ScalarField};
    use crate::optics::MediumPair;
    use crate::region::PlanarRegion;
    use crate::scenario::{CapAxis, SourceIntensity, SourceKind, SourceSpec, TargetIntensity, TargetSpec, Transport};

    /// Collimated refraction with the exact design for a uniform disk onto a
    /// uniform cap: `grad phi = P(x)` with `P` the radial map matching the
    /// two cumulative distributions.
    fn exact_design() -> (Scenario, PhaseField) {
        let (r1, theta) = (0.5f64, 0.5f64);
        let media = MediumPair::new(1.0, 1.0).unwrap();
        let cap = 2.0 * std::f64::consts::PI * (1.0 - theta.cos());
        let area = std::f64::consts::PI * r1 * r1;
        let s = Scenario {
            transport: Transport::Refract,
            source: SourceSpec {
                kind: SourceKind::Collimated,
                domain: PlanarRegion::disk(r1),
                intensity: SourceIntensity::Uniform(1.0),
            },
            target: TargetSpec {
                axis: CapAxis::Up,
                theta_min: 0.0,
                theta_max: theta,
                intensity: TargetIntensity::Uniform(area / cap),
            },
            media,
        };
        // (r / r1)^2 = (1 - cos t) / (1 - cos theta); |grad phi| = sin t,
        // psi = -phi for collimated refraction with n = 1; integrate radially
        let sin_t = move |r: f64| {
            let c = 1.0 - (r / r1).powi(2) * (1.0 - theta.cos());
            (1.0 - c * c).max(0.0).sqrt()
        };
        let grid = Grid2::cell_centered([0.0, 0.0], r1, 80, 3);
        let psi = ScalarField::from_fn(grid, |x, y| {
            let r = x.hypot(y);
            let m = 400;
            let dr = r / m as f64;
            -(0..m).map(|k| sin_t((k as f64 + 0.5) * dr) * dr).sum::<f64>()
        });
        (s, PhaseField(psi))
    }

    #[test]
    fn full_and_half_domain_balance() {
        let (s, psi) = exact_design();
        let n = 200_000;
        let traced = trace(&s, &psi, n, 3).unwrap();
        assert_eq!(traced.evanescent_count(), 0);
        let full = energy_balance_traced(&s, &traced, 16, 16, |_| true);
        assert!(full.rel_err < 3.0 / (n as f64).sqrt() + 1e-3, "{full:?}");
        let half = energy_balance_traced(&s, &traced, 16, 16, |p| p[0] > 0.0);
        assert!((half.lhs - 0.5 * full.lhs).abs() < 1e-3 * full.lhs);
        assert!(half.rel_err < 3.0 / (n as f64 / 2.0).sqrt() + 2e-2, "{half:?}");
        let empty = energy_balance_traced(&s, &traced, 16, 16, |_| false);
        assert_eq!((empty.lhs, empty.rhs, empty.rel_err), (0.0, 0.0, 0.0));
    }
}
