//! Generalized laws of reflection and refraction at an interface carrying a
//! phase discontinuity.
//!
//! A ray with unit direction `x` in medium I (index `n1`) hits the interface
//! with unit normal `nu`. The phase discontinuity contributes its tangential
//! gradient, and the outgoing unit direction `m` obeys
//!
//! ```text
//! n1 x - n2 m = lambda nu + grad(psi)
//! ```
//!
//! with `lambda` fixed by requiring `|m| = 1`. Refraction keeps the root that
//! sends `m` into medium II, reflection the one that keeps it in medium I.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Unit-norm tolerance accepted when constructing a [`UnitDirection`].
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Unit vector in 3-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitDirection(Vector3<f64>);

impl UnitDirection {
    pub const E3: UnitDirection = UnitDirection(Vector3::new(0.0, 0.0, 1.0));

    pub fn new(dx: f64, dy: f64, dz: f64) -> Result<Self> {
        let v = Vector3::new(dx, dy, dz);
        if !v.iter().all(|c| c.is_finite()) || (v.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnit(dx, dy, dz));
        }
        Ok(UnitDirection(v))
    }

    /// Normalizes an arbitrary non-zero vector.
    pub fn normalize(dx: f64, dy: f64, dz: f64) -> Result<Self> {
        let v = Vector3::new(dx, dy, dz);
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotUnit(dx, dy, dz));
        }
        Ok(UnitDirection(v / n))
    }

    /// Direction of the ray from the origin through `(x, y, 1)`.
    pub fn through_plane_point(x: f64, y: f64) -> Self {
        let d = (x * x + y * y + 1.0).sqrt();
        UnitDirection(Vector3::new(x / d, y / d, 1.0 / d))
    }

    pub(crate) fn from_vector_unchecked(v: Vector3<f64>) -> Self {
        UnitDirection(v)
    }

    pub fn as_vector(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.0.x, self.0.y, self.0.z]
    }

    pub fn dot(&self, other: &UnitDirection) -> f64 {
        self.0.dot(&other.0)
    }
}

/// Pair of refractive indices, medium I then medium II.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumPair {
    n1: f64,
    n2: f64,
}

impl MediumPair {
    pub fn new(n1: f64, n2: f64) -> Result<Self> {
        if !(n1.is_finite() && n1 > 0.0 && n2.is_finite() && n2 > 0.0) {
            return Err(Error::InvalidMedia(format!(
                "refractive indices must be positive, got n1 = {n1}, n2 = {n2}"
            )));
        }
        Ok(MediumPair { n1, n2 })
    }

    /// Reflection happens inside a single medium.
    pub fn reflective(n1: f64) -> Result<Self> {
        Self::new(n1, n1)
    }

    pub fn n1(&self) -> f64 {
        self.n1
    }

    pub fn n2(&self) -> f64 {
        self.n2
    }

    pub fn is_reflective(&self) -> bool {
        self.n1 == self.n2
    }
}

/// Gradient of the phase discontinuity along the interface plane. The normal
/// component is identically zero, so only the in-plane pair is stored.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TangentialGradient {
    pub gx: f64,
    pub gy: f64,
}

impl TangentialGradient {
    pub const ZERO: TangentialGradient = TangentialGradient { gx: 0.0, gy: 0.0 };

    pub fn new(gx: f64, gy: f64) -> Self {
        TangentialGradient { gx, gy }
    }

    pub fn norm_squared(&self) -> f64 {
        self.gx * self.gx + self.gy * self.gy
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.gx, self.gy, 0.0)
    }
}

impl From<[f64; 2]> for TangentialGradient {
    fn from(g: [f64; 2]) -> Self {
        TangentialGradient { gx: g[0], gy: g[1] }
    }
}

/// Outgoing direction together with the multiplier of the normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outgoing {
    pub m: UnitDirection,
    pub lambda: f64,
}

/// `w = n x - grad psi`, and the discriminant `n_out^2 - |w|^2 + (w.nu)^2`.
fn split(n_in: f64, n_out: f64, x: &UnitDirection, nu: &UnitDirection, grad_psi: TangentialGradient) -> Result<(Vector3<f64>, f64, f64)> {
    let cos_in = x.dot(nu);
    if cos_in <= 0.0 {
        return Err(Error::BackfacingIncidence(cos_in));
    }
    let w = n_in * x.as_vector() - grad_psi.to_vector();
    let w_nu = w.dot(nu.as_vector());
    // |w|^2 - (w.nu)^2 is the squared tangential part; computing it from the
    // cross product avoids cancellation at near-normal incidence.
    let tangential_sq = w.cross(nu.as_vector()).norm_squared();
    let discriminant = n_out * n_out - tangential_sq;
    if !(discriminant >= 0.0) {
        return Err(Error::EvanescentRay { discriminant });
    }
    Ok((w, w_nu, discriminant))
}

/// Generalized refraction from medium I into medium II.
pub fn refract(x: &UnitDirection, nu: &UnitDirection, grad_psi: TangentialGradient, media: &MediumPair) -> Result<Outgoing> {
    let (w, w_nu, disc) = split(media.n1, media.n2, x, nu, grad_psi)?;
    let lambda = w_nu - disc.sqrt();
    let m = (w - lambda * nu.as_vector()) / media.n2;
    Ok(Outgoing {
        m: UnitDirection::from_vector_unchecked(m),
        lambda,
    })
}

/// Generalized reflection back into medium I (index `n1`).
pub fn reflect(x: &UnitDirection, nu: &UnitDirection, grad_psi: TangentialGradient, n1: f64) -> Result<Outgoing> {
    if !(n1.is_finite() && n1 > 0.0) {
        return Err(Error::InvalidMedia(format!("refractive index must be positive, got {n1}")));
    }
    let (_, w_nu, disc) = split(n1, n1, x, nu, grad_psi)?;
    let lambda = w_nu + disc.sqrt();
    let m = x.as_vector() - (lambda / n1) * nu.as_vector() - grad_psi.to_vector() / n1;
    Ok(Outgoing {
        m: UnitDirection::from_vector_unchecked(m),
        lambda,
    })
}
