use std::f64::consts::PI;

use serde::Serialize;

use crate::optics::UnitDirection;
use crate::scenario::{CapAxis, TargetSpec};

/// Minimum expected ray count for a bin to enter the sup-norm distance.
pub const LINF_MIN_EXPECTED: f64 = 100.0;

/// Power binned over the azimuth `u` in `[0, 2 pi)` and the angle `theta`
/// to the cap axis in `[theta_min, theta_max]`, both uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalHistogram {
    pub axis: CapAxis,
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_u: usize,
    pub n_v: usize,
    /// Row-major, `iv * n_u + iu`.
    pub power: Vec<f64>,
    pub counts: Vec<u64>,
    /// Directions outside the angular range; they are also binned in the
    /// nearest boundary ring.
    pub outside_power: f64,
    pub outside_count: u64,
}

/// Location of one direction in the histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinIndex {
    pub index: usize,
    pub outside: bool,
}

impl SphericalHistogram {
    pub fn new(axis: CapAxis, theta_min: f64, theta_max: f64, n_u: usize, n_v: usize) -> Self {
        assert!(n_u > 0 && n_v > 0 && theta_max > theta_min);
        SphericalHistogram {
            axis,
            theta_min,
            theta_max,
            n_u,
            n_v,
            power: vec![0.0; n_u * n_v],
            counts: vec![0; n_u * n_v],
            outside_power: 0.0,
            outside_count: 0,
        }
    }

    pub fn for_target(target: &TargetSpec, n_u: usize, n_v: usize) -> Self {
        Self::new(target.axis, target.theta_min, target.theta_max, n_u, n_v)
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    fn d_theta(&self) -> f64 {
        (self.theta_max - self.theta_min) / self.n_v as f64
    }

    fn d_u(&self) -> f64 {
        2.0 * PI / self.n_u as f64
    }

    pub fn locate(&self, d: &UnitDirection) -> BinIndex {
        let s = self.axis.sign();
        let theta = (s * d.z()).clamp(-1.0, 1.0).acos();
        // azimuth measured in the frame where the axis points up
        let mut u = (s * d.y()).atan2(d.x());
        if u < 0.0 {
            u += 2.0 * PI;
        }
        let iu = ((u / self.d_u()) as usize).min(self.n_u - 1);
        let t = (theta - self.theta_min) / self.d_theta();
        let outside = theta < self.theta_min || theta > self.theta_max;
        let iv = if t < 0.0 { 0 } else { (t as usize).min(self.n_v - 1) };
        BinIndex {
            index: iv * self.n_u + iu,
            outside,
        }
    }

    pub fn add(&mut self, d: &UnitDirection, weight: f64) -> BinIndex {
        let b = self.locate(d);
        self.power[b.index] += weight;
        self.counts[b.index] += 1;
        if b.outside {
            self.outside_power += weight;
            self.outside_count += 1;
        }
        b
    }

    /// Adds another histogram over the same bins.
    pub fn merge(&mut self, other: &SphericalHistogram) {
        assert!(self.same_bins(other), "histograms must share their binning");
        for (a, b) in self.power.iter_mut().zip(&other.power) {
            *a += b;
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.outside_power += other.outside_power;
        self.outside_count += other.outside_count;
    }

    pub fn same_bins(&self, other: &SphericalHistogram) -> bool {
        self.axis == other.axis
            && self.theta_min == other.theta_min
            && self.theta_max == other.theta_max
            && self.n_u == other.n_u
            && self.n_v == other.n_v
    }

    /// `(u, theta)` at the center of a bin.
    pub fn bin_center(&self, index: usize) -> (f64, f64) {
        let (iv, iu) = (index / self.n_u, index % self.n_u);
        (
            (iu as f64 + 0.5) * self.d_u(),
            self.theta_min + (iv as f64 + 0.5) * self.d_theta(),
        )
    }

    /// Unit direction at the center of a bin.
    pub fn bin_direction(&self, index: usize) -> [f64; 3] {
        let (u, t) = self.bin_center(index);
        let s = self.axis.sign();
        [t.sin() * u.cos(), s * t.sin() * u.sin(), s * t.cos()]
    }

    pub fn solid_angle(&self, index: usize) -> f64 {
        let iv = index / self.n_u;
        let a = self.theta_min + iv as f64 * self.d_theta();
        self.d_u() * (a.cos() - (a + self.d_theta()).cos())
    }

    pub fn density(&self, index: usize) -> f64 {
        self.power[index] / self.solid_angle(index)
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn outside_fraction(&self) -> f64 {
        self.outside_count as f64 / self.total_count().max(1) as f64
    }
}

/// Bins weighted directions over the given range.
pub fn sphere_histogram<'a>(
    outcomes: impl IntoIterator<Item = (&'a UnitDirection, f64)>,
    target: &TargetSpec,
    n_u: usize,
    n_v: usize,
) -> SphericalHistogram {
    let mut h = SphericalHistogram::for_target(target, n_u, n_v);
    for (d, w) in outcomes {
        h.add(d, w);
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityDistance {
    /// Total variation style distance normalized by the binned power.
    pub l1: f64,
    /// Largest relative deviation over bins expecting enough rays.
    pub linf: f64,
    /// Number of bins entering `linf`.
    pub linf_bins: usize,
}

/// Compares the binned density with `g` at the bin centers.
pub fn density_distance(est: &SphericalHistogram, target: &TargetSpec) -> DensityDistance {
    let total = est.total_power();
    let n = est.total_count() as f64;
    let mut l1 = 0.0;
    let mut linf: f64 = 0.0;
    let mut linf_bins = 0;
    for k in 0..est.len() {
        let dw = est.solid_angle(k);
        let g = target.g(est.bin_direction(k));
        l1 += (est.density(k) - g).abs() * dw;
        let expected = if total > 0.0 { g * dw / total * n } else { 0.0 };
        if expected >= LINF_MIN_EXPECTED {
            linf = linf.max((est.density(k) - g).abs() / g);
            linf_bins += 1;
        }
    }
    DensityDistance {
        l1: if total > 0.0 { l1 / total } else { 0.0 },
        linf,
        linf_bins,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::TargetIntensity;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cap(theta_max: f64, g: f64) -> TargetSpec {
        TargetSpec {
            axis: CapAxis::Down,
            theta_min: 0.0,
            theta_max,
            intensity: TargetIntensity::Uniform(g),
        }
    }

    fn dir(u: f64, theta: f64, axis: CapAxis) -> UnitDirection {
        let s = axis.sign();
        UnitDirection::new(theta.sin() * u.cos(), s * theta.sin() * u.sin(), s * theta.cos()).unwrap()
    }

    #[test]
    fn single_direction() {
        let t = cap(0.7, 1.0);
        let d = dir(1.0, 0.3, CapAxis::Down);
        let h = sphere_histogram([(&d, 1.0)], &t, 12, 6);
        let k = h.locate(&d).index;
        assert!((h.density(k) - 1.0 / h.solid_angle(k)).abs() < 1e-12);
        assert_eq!(h.counts.iter().filter(|c| **c > 0).count(), 1);
        let (u, th) = h.bin_center(k);
        assert!((u - 1.0).abs() <= std::f64::consts::PI / 12.0 && (th - 0.3).abs() <= 0.7 / 12.0);
    }

    #[test]
    fn bin_solid_angles_tile_the_cap() {
        let t = TargetSpec {
            axis: CapAxis::Up,
            theta_min: 0.2,
            theta_max: 0.9,
            intensity: TargetIntensity::Uniform(1.0),
        };
        let h = SphericalHistogram::for_target(&t, 24, 24);
        let sum: f64 = (0..h.len()).map(|k| h.solid_angle(k)).sum();
        assert!((sum - t.solid_angle()).abs() < 1e-12);
        for k in [0, 37, 300, 575] {
            let d = UnitDirection::new(h.bin_direction(k)[0], h.bin_direction(k)[1], h.bin_direction(k)[2]).unwrap();
            assert_eq!(h.locate(&d), BinIndex { index: k, outside: false });
        }
    }

    #[test]
    fn isotropic_hemisphere_is_flat() {
        let t = TargetSpec {
            axis: CapAxis::Up,
            theta_min: 0.0,
            theta_max: std::f64::consts::FRAC_PI_2,
            intensity: TargetIntensity::Uniform(1.0),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 400_000;
        let dirs: Vec<UnitDirection> = (0..n)
            .map(|_| {
                let z: f64 = rng.gen();
                let a: f64 = rng.gen::<f64>() * 2.0 * PI;
                let r = (1.0 - z * z).sqrt();
                UnitDirection::new(r * a.cos(), r * a.sin(), z).unwrap()
            })
            .collect();
        let w = 2.0 * PI / n as f64;
        let h = sphere_histogram(dirs.iter().map(|d| (d, w)), &t, 8, 8);
        for k in 0..h.len() {
            let expected = n as f64 * h.solid_angle(k) / (2.0 * PI);
            let bound = 3.0 / expected.sqrt();
            assert!((h.density(k) - 1.0).abs() < bound, "bin {k}: {}", h.density(k));
        }
    }

    #[test]
    fn batches_add() {
        let t = cap(0.7, 1.0);
        let a: Vec<UnitDirection> = (0..50).map(|k| dir(0.1 * k as f64, 0.01 * k as f64, CapAxis::Down)).collect();
        let b: Vec<UnitDirection> = (0..30).map(|k| dir(0.2 * k as f64, 0.03 * k as f64, CapAxis::Down)).collect();
        let mut ha = sphere_histogram(a.iter().map(|d| (d, 0.5)), &t, 10, 5);
        let hb = sphere_histogram(b.iter().map(|d| (d, 0.5)), &t, 10, 5);
        let hab = sphere_histogram(a.iter().chain(&b).map(|d| (d, 0.5)), &t, 10, 5);
        ha.merge(&hb);
        assert_eq!(ha, hab);
        assert_eq!(hab.outside_count, 6);
        assert_eq!(hab.total_count(), 80);
    }

    #[test]
    fn distance_examples() {
        let t = cap(0.6, 2.0);
        let mut h = SphericalHistogram::for_target(&t, 6, 4);
        // est equal to the target
        for k in 0..h.len() {
            h.power[k] = 2.0 * h.solid_angle(k);
            h.counts[k] = 1000;
        }
        let d = density_distance(&h, &t);
        assert!(d.l1 < 1e-14 && d.linf < 1e-14);

        // all power in one bin
        let total = t.power();
        let mut h = SphericalHistogram::for_target(&t, 6, 4);
        h.power[5] = total;
        h.counts[5] = 10_000;
        let d = density_distance(&h, &t);
        let w5 = h.solid_angle(5) * 2.0 / total;
        let expected = (1.0 - w5) + (1.0 - w5);
        assert!((d.l1 - expected).abs() < 1e-12);
        assert!((expected - 2.0 * (1.0 - 1.0 / 24.0)).abs() < 0.1);
    }

    #[test]
    fn sampling_g_itself_is_within_the_noise_floor() {
        let t = cap(40f64.to_radians(), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 1_000_000;
        let c0 = t.theta_max.cos();
        let w = t.power() / n as f64;
        let mut h = SphericalHistogram::for_target(&t, 24, 24);
        for _ in 0..n {
            let z = 1.0 - rng.gen::<f64>() * (1.0 - c0);
            let a: f64 = rng.gen::<f64>() * 2.0 * PI;
            let r = (1.0 - z * z).sqrt();
            h.add(&UnitDirection::new(r * a.cos(), r * a.sin(), -z).unwrap(), w);
        }
        let d = density_distance(&h, &t);
        assert!(d.l1 < 0.02, "{d:?}");
    }
}
