use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::PhaseField;
use crate::optics::{TangentialGradient, UnitDirection};
use crate::scenario::{Scenario, SourceIntensity, SourceKind, SourceSpec};

/// Rays per RNG stream. Fixed so results do not depend on the thread count.
pub const BLOCK_SIZE: usize = 4096;

const CDF_PANELS: usize = 4096;

/// Rays leaving the source, sampled proportionally to the source power.
/// Every ray carries the same weight.
#[derive(Debug, Clone)]
pub struct RayBatch {
    /// Strike points on the plane `z = 1`.
    pub origins: Vec<[f64; 2]>,
    pub incident: Vec<UnitDirection>,
    pub weight: f64,
}

impl RayBatch {
    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.weight * self.len() as f64
    }
}

/// Outgoing directions of a traced batch; `None` marks an evanescent ray.
#[derive(Debug, Clone)]
pub struct Traced {
    pub rays: RayBatch,
    pub outgoing: Vec<Option<UnitDirection>>,
}

impl Traced {
    pub fn evanescent_count(&self) -> usize {
        self.outgoing.iter().filter(|o| o.is_none()).count()
    }

    pub fn evanescent_fraction(&self) -> f64 {
        self.evanescent_count() as f64 / self.outgoing.len().max(1) as f64
    }

    pub fn evanescent_power(&self) -> f64 {
        self.evanescent_count() as f64 * self.rays.weight
    }

    /// Directions paired with their weights, evanescent rays skipped.
    pub fn outcomes(&self) -> impl Iterator<Item = (&UnitDirection, f64)> + '_ {
        let w = self.rays.weight;
        self.outgoing.iter().flatten().map(move |d| (d, w))
    }
}

enum Sampler {
    /// `r^2` uniform between the bounds.
    UniformRadial { r0: f64, r1: f64 },
    /// Tabulated radial CDF.
    Radial { rs: Vec<f64>, cdf: Vec<f64> },
    Rejection { max: f64 },
}

impl Sampler {
    fn new(source: &SourceSpec) -> Sampler {
        if let (Some(prof), Some((r0, r1))) = (source.radial_planar_density(), source.domain.radial_bounds()) {
            if source.kind == SourceKind::Collimated && matches!(source.intensity, SourceIntensity::Uniform(_)) {
                return Sampler::UniformRadial { r0, r1 };
            }
            let h = (r1 - r0) / CDF_PANELS as f64;
            let rs: Vec<f64> = (0..=CDF_PANELS).map(|k| r0 + k as f64 * h).collect();
            let mut cdf = Vec::with_capacity(rs.len());
            cdf.push(0.0);
            for k in 0..CDF_PANELS {
                let (a, b) = (rs[k], rs[k + 1]);
                let m = 0.5 * (a + b);
                // Simpson on each panel
                let w = (prof(a) * a + 4.0 * prof(m) * m + prof(b) * b) * h / 6.0;
                cdf.push(cdf[k] + w);
            }
            return Sampler::Radial { rs, cdf };
        }
        Sampler::Rejection {
            max: source.intensity.max_value(),
        }
    }

    fn sample(&self, source: &SourceSpec, rng: &mut ChaCha8Rng) -> [f64; 2] {
        let polar = |r: f64, rng: &mut ChaCha8Rng| {
            let a = rng.gen::<f64>() * 2.0 * PI;
            [r * a.cos(), r * a.sin()]
        };
        match self {
            Sampler::UniformRadial { r0, r1 } => {
                let u: f64 = rng.gen();
                polar((r0 * r0 + u * (r1 * r1 - r0 * r0)).sqrt(), rng)
            }
            Sampler::Radial { rs, cdf } => {
                let total = cdf[cdf.len() - 1];
                let t = rng.gen::<f64>() * total;
                let k = cdf.partition_point(|c| *c <= t).clamp(1, cdf.len() - 1);
                let span = cdf[k] - cdf[k - 1];
                let frac = if span > 0.0 { (t - cdf[k - 1]) / span } else { 0.5 };
                polar(rs[k - 1] + frac * (rs[k] - rs[k - 1]), rng)
            }
            Sampler::Rejection { max } => {
                let c = source.domain.center();
                let half = source.domain.half_extent();
                loop {
                    let p = [
                        c[0] + half * (2.0 * rng.gen::<f64>() - 1.0),
                        c[1] + half * (2.0 * rng.gen::<f64>() - 1.0),
                    ];
                    if !source.domain.contains(p) {
                        continue;
                    }
                    // planar density never exceeds the intensity bound
                    if rng.gen::<f64>() * max < source.planar_density(p) {
                        return p;
                    }
                }
            }
        }
    }
}

fn block_rng(seed: u64, block: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block as u64);
    rng
}

/// Samples `n_rays` strike points with density proportional to the planar
/// source density (area density for collimated beams, solid-angle density
/// pulled back to the plane for the point source).
pub fn sample_rays(scenario: &Scenario, n_rays: usize, seed: u64) -> Result<RayBatch> {
    if n_rays == 0 {
        return Err(Error::InvalidScenario("at least one ray is required".into()));
    }
    let source = &scenario.source;
    let power = source.power();
    if !(power > 0.0) {
        return Err(Error::InvalidScenario("source emits no power".into()));
    }
    let sampler = Sampler::new(source);
    let blocks = n_rays.div_ceil(BLOCK_SIZE);
    let origins: Vec<[f64; 2]> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = block_rng(seed, b);
            let count = BLOCK_SIZE.min(n_rays - b * BLOCK_SIZE);
            (0..count).map(|_| sampler.sample(source, &mut rng)).collect::<Vec<_>>()
        })
        .collect();
    let incident = origins.iter().map(|p| scenario.incident(p[0], p[1])).collect();
    Ok(RayBatch {
        origins,
        incident,
        weight: power / n_rays as f64,
    })
}

/// Pushes sampled rays through the phase: `grad psi` by bilinear
/// interpolation of nodal centered differences, then the scenario's law.
pub fn trace_batch(scenario: &Scenario, psi: &PhaseField, rays: RayBatch) -> Result<Traced> {
    let outgoing = rays
        .origins
        .par_iter()
        .map(|&[x, y]| {
            let g = psi.gradient_bilinear(x, y).ok_or(Error::FootprintExceeded(x, y))?;
            match scenario.t_map(x, y, TangentialGradient::from(g)) {
                Ok(t) => Ok(Some(t)),
                Err(Error::EvanescentRay { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Traced { rays, outgoing })
}

pub fn trace(scenario: &Scenario, psi: &PhaseField, n_rays: usize, seed: u64) -> Result<Traced> {
    let rays = sample_rays(scenario, n_rays, seed)?;
    trace_batch(scenario, psi, rays)
}
