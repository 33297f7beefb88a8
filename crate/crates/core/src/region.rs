//! Planar regions for source footprints and projected target caps.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PlanarRegion {
    Disk {
        #[serde(default)]
        center: [f64; 2],
        radius: f64,
    },
    Rectangle {
        #[serde(default)]
        center: [f64; 2],
        half_width: f64,
        half_height: f64,
    },
    Annulus {
        #[serde(default)]
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
}

impl PlanarRegion {
    pub fn disk(radius: f64) -> Self {
        PlanarRegion::Disk {
            center: [0.0, 0.0],
            radius,
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            PlanarRegion::Disk { center, radius } => dist2(p, center) <= radius * radius,
            PlanarRegion::Rectangle {
                center,
                half_width,
                half_height,
            } => (p[0] - center[0]).abs() <= half_width && (p[1] - center[1]).abs() <= half_height,
            PlanarRegion::Annulus { center, inner, outer } => {
                let d = dist2(p, center);
                d >= inner * inner && d <= outer * outer
            }
        }
    }

    pub fn center(&self) -> [f64; 2] {
        match *self {
            PlanarRegion::Disk { center, .. }
            | PlanarRegion::Rectangle { center, .. }
            | PlanarRegion::Annulus { center, .. } => center,
        }
    }

    /// Half side of the smallest centered square containing the region.
    pub fn half_extent(&self) -> f64 {
        match *self {
            PlanarRegion::Disk { radius, .. } => radius,
            PlanarRegion::Rectangle {
                half_width,
                half_height,
                ..
            } => half_width.max(half_height),
            PlanarRegion::Annulus { outer, .. } => outer,
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            PlanarRegion::Disk { radius, .. } => 2.0 * radius,
            PlanarRegion::Rectangle {
                half_width,
                half_height,
                ..
            } => 2.0 * half_width.hypot(half_height),
            PlanarRegion::Annulus { outer, .. } => 2.0 * outer,
        }
    }

    pub fn area(&self) -> f64 {
        use std::f64::consts::PI;
        match *self {
            PlanarRegion::Disk { radius, .. } => PI * radius * radius,
            PlanarRegion::Rectangle {
                half_width,
                half_height,
                ..
            } => 4.0 * half_width * half_height,
            PlanarRegion::Annulus { inner, outer, .. } => PI * (outer * outer - inner * inner),
        }
    }

    /// Uniform convexity is what the existence theory asks for; rectangles
    /// are convex but not uniformly so, annuli are not convex at all.
    pub fn is_uniformly_convex(&self) -> bool {
        matches!(self, PlanarRegion::Disk { .. })
    }

    pub fn is_valid(&self) -> bool {
        let finite = |v: f64| v.is_finite();
        let c = self.center();
        if !(finite(c[0]) && finite(c[1])) {
            return false;
        }
        match *self {
            PlanarRegion::Disk { radius, .. } => finite(radius) && radius > 0.0,
            PlanarRegion::Rectangle {
                half_width,
                half_height,
                ..
            } => finite(half_width) && finite(half_height) && half_width > 0.0 && half_height > 0.0,
            PlanarRegion::Annulus { inner, outer, .. } => {
                finite(inner) && finite(outer) && inner >= 0.0 && outer > inner
            }
        }
    }

    /// Radially symmetric about the origin (disk or annulus centered at 0).
    pub fn is_origin_centered_round(&self) -> bool {
        match *self {
            PlanarRegion::Disk { center, .. } | PlanarRegion::Annulus { center, .. } => center == [0.0, 0.0],
            PlanarRegion::Rectangle { .. } => false,
        }
    }

    /// Radial bounds `(r_min, r_max)` for origin-centered round regions.
    pub fn radial_bounds(&self) -> Option<(f64, f64)> {
        if !self.is_origin_centered_round() {
            return None;
        }
        match *self {
            PlanarRegion::Disk { radius, .. } => Some((0.0, radius)),
            PlanarRegion::Annulus { inner, outer, .. } => Some((inner, outer)),
            PlanarRegion::Rectangle { .. } => None,
        }
    }

    /// Radial projection onto the region for points just outside it.
    pub fn clamp(&self, p: [f64; 2]) -> [f64; 2] {
        match *self {
            PlanarRegion::Disk { center, radius } => clamp_radial(p, center, 0.0, radius),
            PlanarRegion::Annulus { center, inner, outer } => clamp_radial(p, center, inner, outer),
            PlanarRegion::Rectangle {
                center,
                half_width,
                half_height,
            } => [
                p[0].clamp(center[0] - half_width, center[0] + half_width),
                p[1].clamp(center[1] - half_height, center[1] + half_height),
            ],
        }
    }

    /// The region with every length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let sc = |c: [f64; 2]| [c[0] * s, c[1] * s];
        match *self {
            PlanarRegion::Disk { center, radius } => PlanarRegion::Disk {
                center: sc(center),
                radius: radius * s,
            },
            PlanarRegion::Rectangle {
                center,
                half_width,
                half_height,
            } => PlanarRegion::Rectangle {
                center: sc(center),
                half_width: half_width * s,
                half_height: half_height * s,
            },
            PlanarRegion::Annulus { center, inner, outer } => PlanarRegion::Annulus {
                center: sc(center),
                inner: inner * s,
                outer: outer * s,
            },
        }
    }

    /// Euclidean distance from `p` to the region (zero inside).
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        let q = self.clamp(p);
        dist2(p, q).sqrt()
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

fn clamp_radial(p: [f64; 2], center: [f64; 2], r_min: f64, r_max: f64) -> [f64; 2] {
    let dx = p[0] - center[0];
    let dy = p[1] - center[1];
    let r = dx.hypot(dy);
    if r <= r_max && r >= r_min {
        return p;
    }
    if r == 0.0 {
        return [center[0] + r_min, center[1]];
    }
    let s = r.clamp(r_min, r_max) / r;
    [center[0] + s * dx, center[1] + s * dy]
}
