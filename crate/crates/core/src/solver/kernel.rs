//! Log-domain Gibbs kernel for the cost `|x - y|^2 / 2` between two tensor
//! grids. The kernel factors over the axes, so one application costs
//! `O(n^3)` instead of `O(n^4)` for `n x n` grids.

use rayon::prelude::*;

/// Coordinates of a tensor grid; values are stored row-major with the
/// y-index selecting the row.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Axes {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Axes {
    pub fn len(&self) -> usize {
        self.xs.len() * self.ys.len()
    }
}

/// Result of a soft c-transform: `values[i] = -eps log sum_j exp((h_j - c(x_i, y_j)) / eps)`
/// and optionally the conditional mean of `y` under the same Gibbs weights.
pub(crate) struct SoftMin {
    pub values: Vec<f64>,
    pub means: Option<Vec<[f64; 2]>>,
}

fn cost_table(out: &[f64], inp: &[f64], eps: f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(out.len() * inp.len());
    for &a in out {
        for &b in inp {
            let d = a - b;
            t.push(-0.5 * d * d / eps);
        }
    }
    t
}

/// Soft c-transform of `h` (defined on `inp`, `-inf` where the weight is
/// zero) evaluated on `out`.
pub(crate) fn soft_min(out: &Axes, inp: &Axes, h: &[f64], eps: f64, want_means: bool) -> SoftMin {
    debug_assert_eq!(h.len(), inp.len());
    let (n1, n2) = (out.xs.len(), out.ys.len());
    let (m1, m2) = (inp.xs.len(), inp.ys.len());
    let k1 = cost_table(&out.xs, &inp.xs, eps);
    let k2 = cost_table(&out.ys, &inp.ys, eps);
    // transpose so the inner reduction over the y-index is contiguous
    let mut ht = vec![f64::NEG_INFINITY; h.len()];
    for j2 in 0..m2 {
        for j1 in 0..m1 {
            ht[j1 * m2 + j2] = h[j2 * m1 + j1] / eps;
        }
    }
    // columns that carry no mass at all are skipped
    let live: Vec<usize> = (0..m1)
        .filter(|&j1| ht[j1 * m2..(j1 + 1) * m2].iter().any(|v| *v > f64::NEG_INFINITY))
        .collect();

    let mut values = vec![0.0; n1 * n2];
    let mut means = if want_means { vec![[0.0; 2]; n1 * n2] } else { Vec::new() };

    let row = |i2: usize, vals: &mut [f64], mrow: Option<&mut [[f64; 2]]>| {
        let k2row = &k2[i2 * m2..(i2 + 1) * m2];
        let mut partial = vec![f64::NEG_INFINITY; m1];
        let mut partial_mean = vec![0.0; if want_means { m1 } else { 0 }];
        let mut scratch = vec![0.0; m2];
        for &j1 in &live {
            let col = &ht[j1 * m2..(j1 + 1) * m2];
            let mut mx = f64::NEG_INFINITY;
            for ((s, &hv), &kv) in scratch.iter_mut().zip(col).zip(k2row) {
                *s = hv + kv;
                if *s > mx {
                    mx = *s;
                }
            }
            if mx == f64::NEG_INFINITY {
                continue;
            }
            let mut sum = 0.0;
            let mut ysum = 0.0;
            if want_means {
                for (s, &y) in scratch.iter().zip(&inp.ys) {
                    let e = (s - mx).exp();
                    sum += e;
                    ysum += e * y;
                }
                partial_mean[j1] = ysum / sum;
            } else {
                for s in &scratch {
                    sum += (s - mx).exp();
                }
            }
            partial[j1] = mx + sum.ln();
        }
        let mut mrow = mrow;
        let mut scratch1 = vec![0.0; live.len()];
        for i1 in 0..n1 {
            let k1row = &k1[i1 * m1..(i1 + 1) * m1];
            let mut mx = f64::NEG_INFINITY;
            for (s, &j1) in scratch1.iter_mut().zip(&live) {
                *s = partial[j1] + k1row[j1];
                if *s > mx {
                    mx = *s;
                }
            }
            if mx == f64::NEG_INFINITY {
                vals[i1] = f64::INFINITY;
                continue;
            }
            let mut sum = 0.0;
            if let Some(m) = mrow.as_deref_mut() {
                let (mut sx, mut sy) = (0.0, 0.0);
                for (s, &j1) in scratch1.iter().zip(&live) {
                    let e = (s - mx).exp();
                    sum += e;
                    sx += e * inp.xs[j1];
                    sy += e * partial_mean[j1];
                }
                m[i1] = [sx / sum, sy / sum];
            } else {
                for s in &scratch1 {
                    sum += (s - mx).exp();
                }
            }
            vals[i1] = -eps * (mx + sum.ln());
        }
    };

    if want_means {
        values
            .par_chunks_mut(n1)
            .zip(means.par_chunks_mut(n1))
            .enumerate()
            .for_each(|(i2, (v, m))| row(i2, v, Some(m)));
    } else {
        values
            .par_chunks_mut(n1)
            .enumerate()
            .for_each(|(i2, v)| row(i2, v, None));
    }

    SoftMin {
        values,
        means: if want_means { Some(means) } else { None },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Direct O(n^4) evaluation used as the reference.
    fn brute(out: &Axes, inp: &Axes, h: &[f64], eps: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
        let mut vals = Vec::new();
        let mut means = Vec::new();
        for &oy in &out.ys {
            for &ox in &out.xs {
                let mut terms = Vec::new();
                for (j2, &iy) in inp.ys.iter().enumerate() {
                    for (j1, &ix) in inp.xs.iter().enumerate() {
                        let c = 0.5 * ((ox - ix).powi(2) + (oy - iy).powi(2));
                        terms.push(((h[j2 * inp.xs.len() + j1] - c) / eps, ix, iy));
                    }
                }
                let mx = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
                let mut s = 0.0;
                let (mut sx, mut sy) = (0.0, 0.0);
                for (t, ix, iy) in &terms {
                    let e = (t - mx).exp();
                    s += e;
                    sx += e * ix;
                    sy += e * iy;
                }
                vals.push(-eps * (mx + s.ln()));
                means.push([sx / s, sy / s]);
            }
        }
        (vals, means)
    }

    #[test]
    fn separable_transform_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = Axes {
            xs: (0..7).map(|i| -0.6 + 0.2 * i as f64).collect(),
            ys: (0..5).map(|i| -0.3 + 0.17 * i as f64).collect(),
        };
        let inp = Axes {
            xs: (0..6).map(|i| -0.5 + 0.21 * i as f64).collect(),
            ys: (0..4).map(|i| -0.4 + 0.3 * i as f64).collect(),
        };
        let mut h: Vec<f64> = (0..inp.len()).map(|_| rng.gen_range(-0.2..0.2)).collect();
        h[3] = f64::NEG_INFINITY;
        h[10] = f64::NEG_INFINITY;
        for &eps in &[0.5, 0.01, 1e-4] {
            let got = soft_min(&out, &inp, &h, eps, true);
            let (vals, means) = brute(&out, &inp, &h, eps);
            let gm = got.means.unwrap();
            for k in 0..vals.len() {
                assert!((got.values[k] - vals[k]).abs() < 1e-12 * (1.0 + vals[k].abs()), "eps {eps}");
                assert!((gm[k][0] - means[k][0]).abs() < 1e-12);
                assert!((gm[k][1] - means[k][1]).abs() < 1e-12);
            }
            let plain = soft_min(&out, &inp, &h, eps, false);
            assert_eq!(plain.values, got.values);
        }
    }

    #[test]
    fn empty_input_gives_infinite_transform() {
        let a = Axes {
            xs: vec![0.0, 1.0],
            ys: vec![0.0, 1.0],
        };
        let h = vec![f64::NEG_INFINITY; 4];
        let got = soft_min(&a, &a, &h, 0.1, false);
        assert!(got.values.iter().all(|v| *v == f64::INFINITY));
    }
}
