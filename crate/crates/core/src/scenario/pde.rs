//! Pointwise coefficients of the second order equation satisfied by the phase.
//!
//! [`scenario_terms`] follows each scenario in its own variables: the
//! Jacobian of the outgoing map is assembled from `D^2 psi` (and, for the
//! point source, from the spherical matrices `A`, `B`), and energy
//! conservation reads `|J_T| / (|T_3| |s_u x s_v|) = f / g(T)`.
//! [`unified_terms`] evaluates the same balance through the potential
//! `phi = (n1 d_Q - psi) / n2`, where it becomes
//! `d-factor * det D^2 phi / sqrt(1 - |grad phi|^2) = f / g(T)`.

use nalgebra::Matrix2;

use super::{Scenario, SourceKind, Transport};
use crate::error::Result;
use crate::grid::Hessian2;
use crate::optics::TangentialGradient;
use crate::verify::frame::SphericalFrame;

/// Both sides of the energy balance at one strike point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeTerms {
    /// Geometric side, built from second derivatives.
    pub lhs: f64,
    /// Density ratio `f / g(T)`.
    pub rhs: f64,
}

impl PdeTerms {
    pub fn residual(&self) -> f64 {
        self.lhs - self.rhs
    }
}

fn mat(h: &Hessian2) -> Matrix2<f64> {
    Matrix2::new(h.xx, h.xy, h.xy, h.yy)
}

/// Factor multiplying `det D^2 phi` in the unified equation: 1 for
/// collimated beams, `(x^2 + y^2 + 1)^{3/2}` for the point source.
pub fn d_factor(scenario: &Scenario, x: f64, y: f64) -> f64 {
    match scenario.source.kind {
        SourceKind::Collimated => 1.0,
        SourceKind::Point => (x * x + y * y + 1.0).powf(1.5),
    }
}

/// Equation written scenario by scenario in terms of `psi`.
pub fn scenario_terms(scenario: &Scenario, p: [f64; 2], grad_psi: [f64; 2], hess_psi: &Hessian2) -> Result<PdeTerms> {
    let (n1, n2) = (scenario.media.n1(), scenario.media.n2());
    let [x, y] = p;
    let t = scenario.t_map(x, y, TangentialGradient::from(grad_psi))?;
    let rhs = scenario.source.intensity.eval(p) / scenario.target.g(t.to_array());
    let g2 = grad_psi[0] * grad_psi[0] + grad_psi[1] * grad_psi[1];
    let lhs = match (scenario.transport, scenario.source.kind) {
        // mirror: T = -(grad psi / n, sqrt(1 - |grad psi / n|^2))
        (Transport::Reflect, SourceKind::Collimated) => {
            let n = n1;
            (hess_psi.det() / (n * n)).abs() / (1.0 - g2 / (n * n)).sqrt()
        }
        (Transport::Refract, SourceKind::Collimated) => {
            (hess_psi.det() / (n2 * n2)).abs() / (1.0 - g2 / (n2 * n2)).sqrt()
        }
        // point source: d T_tan / d(u, v) = (n1 / n2) A - D^2 psi B / n2
        (_, SourceKind::Point) => {
            let frame = SphericalFrame::from_plane(x, y);
            let j = SphericalFrame::a_rect(x, y) * (n1 / n2) - mat(hess_psi) * SphericalFrame::b_rect(x, y) / n2;
            j.determinant().abs() / (t.z().abs() * frame.area_element())
        }
    };
    Ok(PdeTerms { lhs, rhs })
}

/// The same balance through the potential `phi`.
pub fn unified_terms(scenario: &Scenario, p: [f64; 2], grad_psi: [f64; 2], hess_psi: &Hessian2) -> Result<PdeTerms> {
    let (n1, n2) = (scenario.media.n1(), scenario.media.n2());
    let [x, y] = p;
    let (grad_phi, hess_phi) = match scenario.source.kind {
        SourceKind::Collimated => (
            [-grad_psi[0] / n2, -grad_psi[1] / n2],
            Hessian2 {
                xx: -hess_psi.xx / n2,
                xy: -hess_psi.xy / n2,
                yy: -hess_psi.yy / n2,
            },
        ),
        SourceKind::Point => {
            let d = (x * x + y * y + 1.0).sqrt();
            let d3 = d * d * d;
            (
                [(n1 * x / d - grad_psi[0]) / n2, (n1 * y / d - grad_psi[1]) / n2],
                Hessian2 {
                    xx: (n1 * (1.0 / d - x * x / d3) - hess_psi.xx) / n2,
                    xy: (n1 * (-x * y / d3) - hess_psi.xy) / n2,
                    yy: (n1 * (1.0 / d - y * y / d3) - hess_psi.yy) / n2,
                },
            )
        }
    };
    let s2 = grad_phi[0] * grad_phi[0] + grad_phi[1] * grad_phi[1];
    if !(s2 < 1.0) {
        return Err(crate::Error::EvanescentRay { discriminant: 1.0 - s2 });
    }
    let t3 = scenario.sigma() * (1.0 - s2).sqrt();
    let g = scenario.target.g([grad_phi[0], grad_phi[1], t3]);
    Ok(PdeTerms {
        lhs: d_factor(scenario, x, y) * hess_phi.det().abs() / t3.abs(),
        rhs: scenario.source.intensity.eval(p) / g,
    })
}
