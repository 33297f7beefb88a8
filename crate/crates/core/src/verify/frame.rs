//! Spherical parametrization of point-source directions and the matrices that
//! relate derivatives in `(u, v)` to derivatives on the plane `z = 1`.
//!
//! `s(u, v) = (cos u sin v, sin u sin v, cos v)` hits the plane at
//! `r(u, v) = s / cos v = (x, y, 1)` with `x = cos u tan v`, `y = sin u tan v`.

use nalgebra::{Matrix2, Vector3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalFrame {
    pub u: f64,
    pub v: f64,
}

impl SphericalFrame {
    pub fn new(u: f64, v: f64) -> Self {
        SphericalFrame { u, v }
    }

    /// Frame of the direction through `(x, y, 1)`.
    pub fn from_plane(x: f64, y: f64) -> Self {
        SphericalFrame {
            u: y.atan2(x),
            v: x.hypot(y).atan(),
        }
    }

    pub fn s(&self) -> Vector3<f64> {
        let (su, cu) = self.u.sin_cos();
        let (sv, cv) = self.v.sin_cos();
        Vector3::new(cu * sv, su * sv, cv)
    }

    pub fn s_u(&self) -> Vector3<f64> {
        let (su, cu) = self.u.sin_cos();
        let sv = self.v.sin();
        Vector3::new(-su * sv, cu * sv, 0.0)
    }

    pub fn s_v(&self) -> Vector3<f64> {
        let (su, cu) = self.u.sin_cos();
        let (sv, cv) = self.v.sin_cos();
        Vector3::new(cu * cv, su * cv, -sv)
    }

    /// Strike point on the plane; its third component is 1.
    pub fn r(&self) -> Vector3<f64> {
        self.s() / self.v.cos()
    }

    pub fn plane_point(&self) -> [f64; 2] {
        let r = self.r();
        [r.x, r.y]
    }

    /// Derivatives of the tangential components of `s` in `(u, v)`.
    pub fn a(&self) -> Matrix2<f64> {
        let (su, cu) = self.u.sin_cos();
        let (sv, cv) = self.v.sin_cos();
        Matrix2::new(-su * sv, cu * cv, cu * sv, su * cv)
    }

    /// Derivatives of the strike point `(x, y)` in `(u, v)`.
    pub fn b(&self) -> Matrix2<f64> {
        let (su, cu) = self.u.sin_cos();
        let (tv, cv) = (self.v.tan(), self.v.cos());
        Matrix2::new(-su * tv, cu / (cv * cv), cu * tv, su / (cv * cv))
    }

    /// `A` and `B` written in the rectangular coordinates of the strike point.
    pub fn a_rect(x: f64, y: f64) -> Matrix2<f64> {
        let r = x.hypot(y);
        let d = (x * x + y * y + 1.0).sqrt();
        Matrix2::new(-y / d, x / (d * r), x / d, y / (d * r))
    }

    pub fn b_rect(x: f64, y: f64) -> Matrix2<f64> {
        let r2 = x * x + y * y;
        let r = r2.sqrt();
        Matrix2::new(-y, x * (1.0 + r2) / r, x, y * (1.0 + r2) / r)
    }

    /// `b(x) = (x^2 + y^2)(x^2 + y^2 + 1)^{1/2}`
    pub fn b_scalar(x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        r2 * (r2 + 1.0).sqrt()
    }

    /// `c(x) = (x^2 + y^2)(x^2 + y^2 + 1)^{3/2}`
    pub fn c_scalar(x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        r2 * (r2 + 1.0).powf(1.5)
    }

    /// `|s_u x s_v| = sin v`.
    pub fn area_element(&self) -> f64 {
        self.v.sin()
    }
}
