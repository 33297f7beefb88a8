//! The four metasurface design problems on the plane `z = 1`: reflection or
//! refraction of a collimated beam or of a point source at the origin.
//!
//! Every scenario is reduced to one transport problem through the potential
//! `phi = (n1 d_Q - psi) / n2`, where `d_Q` is the path length from the
//! source to the strike point (1 for collimated beams, `sqrt(x^2 + y^2 + 1)`
//! for the point source). The outgoing direction is then
//! `T = (phi_x, phi_y, sigma sqrt(1 - |grad phi|^2))` with `sigma = -1` for
//! reflection and `+1` for refraction, so `grad phi` maps D1 onto the
//! horizontal projection of the target cap in all four cases.

mod intensity;
pub mod pde;

pub use intensity::SourceIntensity;
pub use intensity::TargetIntensity;
pub(crate) use intensity::simpson;

use std::f64::consts::{FRAC_PI_2, PI};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{PhaseField, PotentialField};
use crate::grid::ScalarField;
use crate::optics::{MediumPair, TangentialGradient, UnitDirection};
use crate::problem::{MaProblem, RegionDensity};
use crate::region::PlanarRegion;

/// Largest admissible cap opening; `f2` carries a `1 / cos(theta)` factor.
pub const MAX_CAP_ANGLE: f64 = 80.0 * PI / 180.0;

/// Relative tolerance on the balance of source and target power.
pub const MASS_BALANCE_TOLERANCE: f64 = 1e-6;

const RADIAL_PANELS: usize = 4096;
const PLANAR_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transport {
    Reflect,
    Refract,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Collimated,
    Point,
}

/// Axis of the target cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapAxis {
    /// `+e3`, the upper hemisphere.
    Up,
    /// `-e3`, the lower hemisphere.
    Down,
}

impl CapAxis {
    pub fn sign(self) -> f64 {
        match self {
            CapAxis::Up => 1.0,
            CapAxis::Down => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SourceSpec {
    pub kind: SourceKind,
    /// Footprint on the plane `z = 1` (for the point source, the strike
    /// points of the emitted directions).
    pub domain: PlanarRegion,
    pub intensity: SourceIntensity,
}

impl SourceSpec {
    /// Density per unit area of the plane, i.e. the `f1` of the transport
    /// problem: `f` for collimated beams, `f(q) / (x^2 + y^2 + 1)^{3/2}` for
    /// the point source.
    pub fn planar_density(&self, p: [f64; 2]) -> f64 {
        let f = self.intensity.eval(p);
        match self.kind {
            SourceKind::Collimated => f,
            SourceKind::Point => f / (p[0] * p[0] + p[1] * p[1] + 1.0).powf(1.5),
        }
    }

    /// Radial profile of [`Self::planar_density`] when it has one.
    pub fn radial_planar_density(&self) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        if !self.domain.is_origin_centered_round() {
            return None;
        }
        let f = self.intensity.radial()?;
        Some(match self.kind {
            SourceKind::Collimated => f,
            SourceKind::Point => Box::new(move |r: f64| f(r) / (r * r + 1.0).powf(1.5)),
        })
    }

    /// Total emitted power: over area for collimated beams, over solid
    /// angle for the point source.
    pub fn power(&self) -> f64 {
        if let (Some(prof), Some((r0, r1))) = (self.radial_planar_density(), self.domain.radial_bounds()) {
            return 2.0 * PI * simpson(r0, r1, RADIAL_PANELS, |r| prof(r) * r);
        }
        self.power_in(|_| true)
    }

    /// Power emitted through the part of the footprint selected by `subset`,
    /// by the midpoint rule over the bounding square.
    pub fn power_in(&self, subset: impl Fn([f64; 2]) -> bool) -> f64 {
        let c = self.domain.center();
        let half = self.domain.half_extent();
        let n = PLANAR_SAMPLES;
        let h = 2.0 * half / n as f64;
        let mut acc = 0.0;
        for j in 0..n {
            let y = c[1] - half + (j as f64 + 0.5) * h;
            let mut row = 0.0;
            for i in 0..n {
                let p = [c[0] - half + (i as f64 + 0.5) * h, y];
                if self.domain.contains(p) && subset(p) {
                    row += self.planar_density(p);
                }
            }
            acc += row;
        }
        acc * h * h
    }

    pub fn scaled(&self, s: f64) -> Self {
        SourceSpec {
            kind: self.kind,
            domain: self.domain,
            intensity: self.intensity.scaled(s),
        }
    }
}

/// Spherical cap `theta_min <= angle(direction, axis) <= theta_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSpec {
    pub axis: CapAxis,
    pub theta_min: f64,
    pub theta_max: f64,
    pub intensity: TargetIntensity,
}

impl TargetSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_max < FRAC_PI_2) {
            return Err(Error::DomainTouchesEquator {
                theta_max: self.theta_max,
            });
        }
        if !(self.theta_min >= 0.0 && self.theta_min < self.theta_max) {
            return Err(Error::InvalidScenario(format!(
                "cap angles must satisfy 0 <= theta_min < theta_max, got [{}, {}]",
                self.theta_min, self.theta_max
            )));
        }
        if self.theta_max > MAX_CAP_ANGLE + 1e-12 {
            return Err(Error::InvalidScenario(format!(
                "cap opening {:.2} deg exceeds the supported 80 deg",
                self.theta_max.to_degrees()
            )));
        }
        if !self.intensity.is_valid() {
            return Err(Error::InvalidScenario("target intensity must be positive".into()));
        }
        Ok(())
    }

    /// Angle between a direction and the cap axis.
    pub fn polar_angle(&self, d: [f64; 3]) -> f64 {
        (self.axis.sign() * d[2]).clamp(-1.0, 1.0).acos()
    }

    pub fn contains(&self, d: [f64; 3]) -> bool {
        let t = self.polar_angle(d);
        t >= self.theta_min && t <= self.theta_max
    }

    /// Intensity `g` at a unit direction.
    pub fn g(&self, d: [f64; 3]) -> f64 {
        self.intensity.eval(self.polar_angle(d))
    }

    pub fn solid_angle(&self) -> f64 {
        2.0 * PI * (self.theta_min.cos() - self.theta_max.cos())
    }

    /// Integral of `g` over the cap.
    pub fn power(&self) -> f64 {
        2.0 * PI * simpson(self.theta_min, self.theta_max, RADIAL_PANELS, |t| self.intensity.eval(t) * t.sin())
    }

    /// Horizontal projection of the cap.
    pub fn projected_region(&self) -> PlanarRegion {
        if self.theta_min > 0.0 {
            PlanarRegion::Annulus {
                center: [0.0, 0.0],
                inner: self.theta_min.sin(),
                outer: self.theta_max.sin(),
            }
        } else {
            PlanarRegion::disk(self.theta_max.sin())
        }
    }

    /// `f2(p) = g(p, sigma sqrt(1 - |p|^2)) / sqrt(1 - |p|^2)`.
    pub fn projected_density(&self, p: [f64; 2]) -> f64 {
        let s2 = (p[0] * p[0] + p[1] * p[1]).min(1.0);
        let c = (1.0 - s2).sqrt();
        self.intensity.eval(s2.sqrt().asin()) / c
    }

    pub fn scaled(&self, s: f64) -> Self {
        TargetSpec {
            intensity: self.intensity.scaled(s),
            ..*self
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub transport: Transport,
    pub source: SourceSpec,
    pub target: TargetSpec,
    pub media: MediumPair,
}

impl Scenario {
    pub fn new(transport: Transport, source: SourceSpec, target: TargetSpec, media: MediumPair) -> Result<Self> {
        let s = Scenario {
            transport,
            source,
            target,
            media,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.transport == Transport::Reflect && !self.media.is_reflective() {
            return Err(Error::InvalidMedia(format!(
                "reflection requires n1 = n2, got n1 = {}, n2 = {}",
                self.media.n1(),
                self.media.n2()
            )));
        }
        let expected = match self.transport {
            Transport::Reflect => CapAxis::Down,
            Transport::Refract => CapAxis::Up,
        };
        if self.target.axis != expected {
            return Err(Error::InvalidScenario(format!(
                "{:?} needs a target cap in the {} hemisphere",
                self.transport,
                if expected == CapAxis::Down { "lower" } else { "upper" }
            )));
        }
        if !self.source.domain.is_valid() {
            return Err(Error::InvalidScenario("source domain is degenerate".into()));
        }
        if !self.source.intensity.is_valid() {
            return Err(Error::InvalidScenario("source intensity must be finite and nonnegative".into()));
        }
        self.target.validate()?;
        if !self.source.domain.is_uniformly_convex() || !self.target.projected_region().is_uniformly_convex() {
            warn!("source or projected target domain is not uniformly convex; existence theory does not cover this case");
        }
        Ok(())
    }

    /// `-1` for reflection (lower hemisphere), `+1` for refraction.
    pub fn sigma(&self) -> f64 {
        match self.transport {
            Transport::Reflect => -1.0,
            Transport::Refract => 1.0,
        }
    }

    /// Distance from the source to the strike point `(x, y, 1)`.
    pub fn d_q(&self, x: f64, y: f64) -> f64 {
        match self.source.kind {
            SourceKind::Collimated => 1.0,
            SourceKind::Point => (x * x + y * y + 1.0).sqrt(),
        }
    }

    /// Incident unit direction of the ray striking `(x, y, 1)`.
    pub fn incident(&self, x: f64, y: f64) -> UnitDirection {
        match self.source.kind {
            SourceKind::Collimated => UnitDirection::E3,
            SourceKind::Point => UnitDirection::through_plane_point(x, y),
        }
    }

    /// Outgoing direction of the ray striking `(x, y, 1)` given `grad psi` there.
    pub fn t_map(&self, x: f64, y: f64, grad_psi: TangentialGradient) -> Result<UnitDirection> {
        match (self.transport, self.source.kind) {
            (Transport::Reflect, SourceKind::Collimated) => collimated_reflection_t(scale(grad_psi, self.media.n1())),
            (Transport::Reflect, SourceKind::Point) => point_reflection_t(x, y, scale(grad_psi, self.media.n1())),
            (Transport::Refract, SourceKind::Collimated) => collimated_refraction_t(grad_psi, &self.media),
            (Transport::Refract, SourceKind::Point) => point_refraction_t(x, y, grad_psi, &self.media),
        }
    }

    /// Copy with the target intensity rescaled so both powers agree; returns
    /// the factor applied to `g`.
    pub fn normalized(&self) -> (Scenario, f64) {
        let factor = self.source.power() / self.target.power();
        let mut s = self.clone();
        s.target = self.target.scaled(factor);
        (s, factor)
    }

    /// Relative mismatch between emitted and prescribed power.
    pub fn mass_imbalance(&self) -> (f64, f64, f64) {
        let src = self.source.power();
        let tgt = self.target.power();
        (src, tgt, (src - tgt).abs() / src)
    }
}

fn scale(g: TangentialGradient, n: f64) -> TangentialGradient {
    TangentialGradient::new(g.gx / n, g.gy / n)
}

fn evanescent(discriminant: f64) -> Error {
    Error::EvanescentRay { discriminant }
}

/// Vertical beam reflected at a plane carrying phase gradient `grad psi`
/// (medium index 1): `T = -(psi_x, psi_y, sqrt(1 - |grad psi|^2))`.
pub fn collimated_reflection_t(grad_psi: TangentialGradient) -> Result<UnitDirection> {
    let d = 1.0 - grad_psi.norm_squared();
    if !(d > 0.0) {
        return Err(evanescent(d));
    }
    Ok(UnitDirection::from_vector_unchecked(nalgebra::Vector3::new(
        -grad_psi.gx,
        -grad_psi.gy,
        -d.sqrt(),
    )))
}

/// Ray from the origin through `(x, y, 1)`, reflected (medium index 1).
pub fn point_reflection_t(x: f64, y: f64, grad_psi: TangentialGradient) -> Result<UnitDirection> {
    let r = (x * x + y * y + 1.0).sqrt();
    let t1 = x / r - grad_psi.gx;
    let t2 = y / r - grad_psi.gy;
    let d = 1.0 - t1 * t1 - t2 * t2;
    if !(d > 0.0) {
        return Err(evanescent(d));
    }
    Ok(UnitDirection::from_vector_unchecked(nalgebra::Vector3::new(t1, t2, -d.sqrt())))
}

/// Vertical beam refracted into medium II:
/// `T = (-psi_x / n2, -psi_y / n2, sqrt(1 - |grad psi|^2 / n2^2))`.
pub fn collimated_refraction_t(grad_psi: TangentialGradient, media: &MediumPair) -> Result<UnitDirection> {
    let n2 = media.n2();
    let d = 1.0 - grad_psi.norm_squared() / (n2 * n2);
    if !(d > 0.0) {
        return Err(evanescent(d));
    }
    Ok(UnitDirection::from_vector_unchecked(nalgebra::Vector3::new(
        -grad_psi.gx / n2,
        -grad_psi.gy / n2,
        d.sqrt(),
    )))
}

/// Ray from the origin through `(x, y, 1)`, refracted into medium II.
pub fn point_refraction_t(x: f64, y: f64, grad_psi: TangentialGradient, media: &MediumPair) -> Result<UnitDirection> {
    let (n1, n2) = (media.n1(), media.n2());
    let r = (x * x + y * y + 1.0).sqrt();
    let a1 = n1 * x / r - grad_psi.gx;
    let a2 = n1 * y / r - grad_psi.gy;
    let d = n2 * n2 - a1 * a1 - a2 * a2;
    if !(d > 0.0) {
        return Err(evanescent(d));
    }
    Ok(UnitDirection::from_vector_unchecked(nalgebra::Vector3::new(
        a1 / n2,
        a2 / n2,
        d.sqrt() / n2,
    )))
}

/// Reduces a scenario to the transport problem for `phi`. The source and
/// target powers must agree to [`MASS_BALANCE_TOLERANCE`].
pub fn reduce_to_ma(scenario: &Scenario, grid_resolution: usize) -> Result<MaProblem> {
    scenario.validate()?;
    let (source_mass, target_mass, relative) = scenario.mass_imbalance();
    if !(relative <= MASS_BALANCE_TOLERANCE) {
        return Err(Error::MassImbalance {
            source_mass,
            target_mass,
            relative,
        });
    }
    let src_spec = scenario.source.clone();
    let source = RegionDensity::new(src_spec.domain, move |p| src_spec.planar_density(p));
    let tgt_spec = scenario.target;
    let target = RegionDensity::new(tgt_spec.projected_region(), move |p| tgt_spec.projected_density(p));
    MaProblem::new(source, target, grid_resolution, Some(source_mass))
}

/// `psi = n1 d_Q - n2 phi`, pinned to zero at the grid center.
pub fn phase_from_potential(phi: &PotentialField, scenario: &Scenario) -> PhaseField {
    let (n1, n2) = (scenario.media.n1(), scenario.media.n2());
    let grid = phi.grid;
    let values = grid
        .nodes()
        .map(|(i, j, k)| {
            let [x, y] = grid.coords(i, j);
            n1 * scenario.d_q(x, y) - n2 * phi.values[k]
        })
        .collect();
    let mut psi = PhaseField(ScalarField { grid, values });
    psi.normalize_center();
    psi
}

/// Inverse of [`phase_from_potential`] up to the additive constant.
pub fn potential_from_phase(psi: &PhaseField, scenario: &Scenario) -> PotentialField {
    let (n1, n2) = (scenario.media.n1(), scenario.media.n2());
    let grid = psi.grid;
    let values = grid
        .nodes()
        .map(|(i, j, k)| {
            let [x, y] = grid.coords(i, j);
            (n1 * scenario.d_q(x, y) - psi.values[k]) / n2
        })
        .collect();
    PotentialField(ScalarField { grid, values })
}

#[cfg(test)]
mod tests;
