use std::sync::Arc;

use crate::grid::ScalarField;

/// Source intensity as a function of the strike point `(x, y)` on the plane
/// `z = 1`. For collimated beams it is power per unit area; for a point
/// source at the origin it is power per unit solid angle of the direction
/// through `(x, y, 1)`.
#[derive(Debug, Clone)]
pub enum SourceIntensity {
    Uniform(f64),
    /// `peak * exp(-r^2 / (2 sigma^2))` with `r` the distance to the origin.
    Gaussian { peak: f64, sigma: f64 },
    /// Bilinear interpolation of a sampled grid, zero outside it.
    Sampled(Arc<ScalarField>),
}

impl SourceIntensity {
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        match self {
            SourceIntensity::Uniform(v) => *v,
            SourceIntensity::Gaussian { peak, sigma } => {
                let r2 = p[0] * p[0] + p[1] * p[1];
                peak * (-0.5 * r2 / (sigma * sigma)).exp()
            }
            SourceIntensity::Sampled(f) => f.value_at(p[0], p[1]).unwrap_or(0.0).max(0.0),
        }
    }

    /// Profile in the distance to the origin, when the intensity has one.
    pub fn radial(&self) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        match *self {
            SourceIntensity::Uniform(v) => Some(Box::new(move |_| v)),
            SourceIntensity::Gaussian { peak, sigma } => {
                Some(Box::new(move |r: f64| peak * (-0.5 * r * r / (sigma * sigma)).exp()))
            }
            SourceIntensity::Sampled(_) => None,
        }
    }

    /// Upper bound of the intensity, used by rejection sampling.
    pub fn max_value(&self) -> f64 {
        match self {
            SourceIntensity::Uniform(v) => *v,
            SourceIntensity::Gaussian { peak, .. } => *peak,
            // bilinear interpolation never exceeds the largest sample
            SourceIntensity::Sampled(f) => f.values.iter().cloned().fold(0.0, f64::max),
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            SourceIntensity::Uniform(v) => v.is_finite() && *v >= 0.0,
            SourceIntensity::Gaussian { peak, sigma } => {
                peak.is_finite() && *peak >= 0.0 && sigma.is_finite() && *sigma > 0.0
            }
            SourceIntensity::Sampled(f) => f.values.iter().all(|v| v.is_finite() && *v >= 0.0),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        match self {
            SourceIntensity::Uniform(v) => SourceIntensity::Uniform(v * s),
            SourceIntensity::Gaussian { peak, sigma } => SourceIntensity::Gaussian {
                peak: peak * s,
                sigma: *sigma,
            },
            SourceIntensity::Sampled(f) => {
                let mut g = (**f).clone();
                g.values.iter_mut().for_each(|v| *v *= s);
                SourceIntensity::Sampled(Arc::new(g))
            }
        }
    }
}

/// Target intensity per unit solid angle, as a function of the angle
/// `theta` between the outgoing direction and the cap axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetIntensity {
    Uniform(f64),
    /// `peak * exp(-theta^2 / (2 sigma^2))`.
    Gaussian { peak: f64, sigma: f64 },
}

impl TargetIntensity {
    pub fn eval(&self, theta: f64) -> f64 {
        match *self {
            TargetIntensity::Uniform(v) => v,
            TargetIntensity::Gaussian { peak, sigma } => peak * (-0.5 * theta * theta / (sigma * sigma)).exp(),
        }
    }

    /// Strictly positive on its domain.
    pub fn is_valid(&self) -> bool {
        match *self {
            TargetIntensity::Uniform(v) => v.is_finite() && v > 0.0,
            TargetIntensity::Gaussian { peak, sigma } => {
                peak.is_finite() && peak > 0.0 && sigma.is_finite() && sigma > 0.0
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        match *self {
            TargetIntensity::Uniform(v) => TargetIntensity::Uniform(v * s),
            TargetIntensity::Gaussian { peak, sigma } => TargetIntensity::Gaussian { peak: peak * s, sigma },
        }
    }
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub(crate) fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}
