//! Finite-difference check of the closed forms for the area magnification of
//! the outgoing map: `|T_x x T_y| = |det D^2 psi| / (n^2 |T_3|)` for
//! collimated beams and `|T_u x T_v| = |det(n1/n2 A - D^2 psi B / n2)| / |T_3|`
//! for the point source in spherical coordinates.

use nalgebra::{Matrix2, Vector3};
use serde::Serialize;

use super::frame::SphericalFrame;
use crate::error::Result;
use crate::grid::Hessian2;
use crate::optics::TangentialGradient;
use crate::scenario::{Scenario, SourceKind, Transport};

/// A phase with exact first and second derivatives.
pub trait AnalyticPhase: Sync {
    fn gradient(&self, x: f64, y: f64) -> [f64; 2];
    fn hessian(&self, x: f64, y: f64) -> Hessian2;
}

/// `(a x^2 + 2 b x y + c y^2) / 2 + d x + e y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticPhase {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl AnalyticPhase for QuadraticPhase {
    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        [self.a * x + self.b * y + self.d, self.b * x + self.c * y + self.e]
    }

    fn hessian(&self, _: f64, _: f64) -> Hessian2 {
        Hessian2 {
            xx: self.a,
            xy: self.b,
            yy: self.c,
        }
    }
}

/// `amp * sin(kx x + phase) cos(ky y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavePhase {
    pub amp: f64,
    pub kx: f64,
    pub ky: f64,
    pub phase: f64,
}

impl AnalyticPhase for WavePhase {
    fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let (sx, cx) = (self.kx * x + self.phase).sin_cos();
        let (sy, cy) = (self.ky * y).sin_cos();
        [self.amp * self.kx * cx * cy, -self.amp * self.ky * sx * sy]
    }

    fn hessian(&self, x: f64, y: f64) -> Hessian2 {
        let (sx, cx) = (self.kx * x + self.phase).sin_cos();
        let (sy, cy) = (self.ky * y).sin_cos();
        Hessian2 {
            xx: -self.amp * self.kx * self.kx * sx * cy,
            xy: -self.amp * self.kx * self.ky * cx * sy,
            yy: -self.amp * self.ky * self.ky * sx * cy,
        }
    }
}

fn outgoing(s: &Scenario, phase: &dyn AnalyticPhase, x: f64, y: f64) -> Result<Vector3<f64>> {
    let g = phase.gradient(x, y);
    Ok(*s.t_map(x, y, TangentialGradient::from(g))?.as_vector())
}

/// Closed form of the magnification at the plane point `p`.
pub fn closed_form(s: &Scenario, phase: &dyn AnalyticPhase, p: [f64; 2]) -> Result<f64> {
    let (n1, n2) = (s.media.n1(), s.media.n2());
    let [x, y] = p;
    let t3 = outgoing(s, phase, x, y)?.z.abs();
    let h = phase.hessian(x, y);
    Ok(match s.source.kind {
        SourceKind::Collimated => {
            let n = match s.transport {
                Transport::Reflect => n1,
                Transport::Refract => n2,
            };
            h.det().abs() / (n * n * t3)
        }
        SourceKind::Point => {
            let d2 = Matrix2::new(h.xx, h.xy, h.xy, h.yy);
            let j = SphericalFrame::a_rect(x, y) * (n1 / n2) - d2 * SphericalFrame::b_rect(x, y) / n2;
            j.determinant().abs() / t3
        }
    })
}

/// Centered-difference magnification with step `h` in `(x, y)` for
/// collimated beams and in `(u, v)` for the point source.
pub fn finite_difference(s: &Scenario, phase: &dyn AnalyticPhase, p: [f64; 2], h: f64) -> Result<f64> {
    let (tu, tv) = match s.source.kind {
        SourceKind::Collimated => {
            let [x, y] = p;
            let tx = (outgoing(s, phase, x + h, y)? - outgoing(s, phase, x - h, y)?) / (2.0 * h);
            let ty = (outgoing(s, phase, x, y + h)? - outgoing(s, phase, x, y - h)?) / (2.0 * h);
            (tx, ty)
        }
        SourceKind::Point => {
            let f = SphericalFrame::from_plane(p[0], p[1]);
            let at = |u: f64, v: f64| {
                let [x, y] = SphericalFrame::new(u, v).plane_point();
                outgoing(s, phase, x, y)
            };
            let tu = (at(f.u + h, f.v)? - at(f.u - h, f.v)?) / (2.0 * h);
            let tv = (at(f.u, f.v + h)? - at(f.u, f.v - h)?) / (2.0 * h);
            (tu, tv)
        }
    };
    Ok(tu.cross(&tv).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianReport {
    pub steps: Vec<f64>,
    /// Largest absolute deviation over the sample points, per step.
    pub errors: Vec<f64>,
    /// `log2(e_k / e_{k+1})`; `None` when both errors are at rounding level.
    pub orders: Vec<Option<f64>>,
}

impl JacobianReport {
    /// True when every measurable order lies in `[lo, hi]`.
    pub fn orders_within(&self, lo: f64, hi: f64) -> bool {
        self.orders.iter().flatten().all(|o| *o >= lo && *o <= hi) && self.orders.iter().any(|o| o.is_some())
    }
}

const ROUNDING_FLOOR: f64 = 1e-12;

/// Compares finite differences with the closed form at `samples` (plane
/// points) for the steps `h0, h0/2, h0/4`.
pub fn jacobian_identity_check(
    s: &Scenario,
    phase: &dyn AnalyticPhase,
    samples: &[[f64; 2]],
    h0: f64,
) -> Result<JacobianReport> {
    let steps = vec![h0, h0 / 2.0, h0 / 4.0];
    let mut errors = Vec::with_capacity(steps.len());
    for &h in &steps {
        let mut worst: f64 = 0.0;
        for &p in samples {
            let e = (finite_difference(s, phase, p, h)? - closed_form(s, phase, p)?).abs();
            worst = worst.max(e);
        }
        errors.push(worst);
    }
    let orders = errors
        .windows(2)
        .map(|w| {
            if w[0] < ROUNDING_FLOOR && w[1] < ROUNDING_FLOOR {
                None
            } else {
                Some((w[0] / w[1]).log2())
            }
        })
        .collect();
    Ok(JacobianReport { steps, errors, orders })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::MediumPair;
    use crate::region::PlanarRegion;
    use crate::scenario::{CapAxis, SourceIntensity, SourceSpec, TargetIntensity, TargetSpec};

    fn scenario(transport: Transport, kind: SourceKind, n2: f64) -> Scenario {
        Scenario {
            transport,
            source: SourceSpec {
                kind,
                domain: PlanarRegion::disk(0.6),
                intensity: SourceIntensity::Uniform(1.0),
            },
            target: TargetSpec {
                axis: if transport == Transport::Reflect { CapAxis::Down } else { CapAxis::Up },
                theta_min: 0.0,
                theta_max: 0.6,
                intensity: TargetIntensity::Uniform(1.0),
            },
            media: MediumPair::new(1.0, n2).unwrap(),
        }
    }

    const SAMPLES: [[f64; 2]; 4] = [[0.2, 0.1], [-0.3, 0.25], [0.05, -0.4], [0.35, 0.3]];

    #[test]
    fn collimated_quadratic_phase() {
        let s = scenario(Transport::Reflect, SourceKind::Collimated, 1.0);
        let q = QuadraticPhase {
            a: 0.1,
            b: 0.0,
            c: 0.2,
            d: 0.0,
            e: 0.0,
        };
        for p in SAMPLES {
            let g = q.gradient(p[0], p[1]);
            let t3 = (1.0 - g[0] * g[0] - g[1] * g[1]).sqrt();
            assert!((closed_form(&s, &q, p).unwrap() - 0.02 / t3).abs() < 1e-15);
        }
        let r = jacobian_identity_check(&s, &q, &SAMPLES, 0.02).unwrap();
        assert!(r.orders_within(1.8, 2.2), "{r:?}");
    }

    #[test]
    fn linear_phase_is_degenerate() {
        let s = scenario(Transport::Refract, SourceKind::Collimated, 1.5);
        let q = QuadraticPhase {
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.3,
            e: -0.2,
        };
        for p in SAMPLES {
            assert_eq!(closed_form(&s, &q, p).unwrap(), 0.0);
            assert!(finite_difference(&s, &q, p, 0.01).unwrap() < 1e-13);
        }
    }

    #[test]
    fn zero_phase_point_source_is_the_sphere_element() {
        let s = scenario(Transport::Reflect, SourceKind::Point, 1.0);
        let zero = QuadraticPhase {
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.0,
            e: 0.0,
        };
        for p in SAMPLES {
            let sin_v = SphericalFrame::from_plane(p[0], p[1]).area_element();
            assert!((closed_form(&s, &zero, p).unwrap() - sin_v).abs() < 1e-14);
            assert!((finite_difference(&s, &zero, p, 1e-3).unwrap() - sin_v).abs() < 1e-6);
        }
    }

    #[test]
    fn wave_phase_converges_in_all_scenarios() {
        let w = WavePhase {
            amp: 0.08,
            kx: 2.0,
            ky: 1.5,
            phase: 0.3,
        };
        for (t, k, n2) in [
            (Transport::Reflect, SourceKind::Collimated, 1.0),
            (Transport::Reflect, SourceKind::Point, 1.0),
            (Transport::Refract, SourceKind::Collimated, 1.5),
            (Transport::Refract, SourceKind::Point, 1.5),
        ] {
            let s = scenario(t, k, n2);
            let r = jacobian_identity_check(&s, &w, &SAMPLES, 0.02).unwrap();
            assert!(r.orders_within(1.8, 2.2), "{t:?} {k:?} {r:?}");
        }
    }
}
