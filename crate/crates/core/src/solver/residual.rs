//! Finite-difference certification of a computed potential against the
//! Monge-Ampere equation, independent of how the potential was produced.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::PotentialField;
use crate::grid::ScalarField;
use crate::problem::MaProblem;

/// Eigenvalues below this count as non-convex.
pub const CONVEXITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub median: f64,
    pub p95: f64,
    pub max: f64,
    /// Interior nodes that entered the statistics.
    pub nodes: usize,
    /// Interior nodes skipped because their gradient left D2.
    pub out_of_range: usize,
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Relative residual per node, NaN where it is not evaluated.
    pub field: ScalarField,
    pub stats: ResidualStats,
}

/// Relative residual `|det D2_h phi * f2(grad_h phi) - f1| / max(f1, floor)`
/// at every node whose 3x3 stencil lies in D1. A gradient farther than one
/// cell from D2 is an error.
pub fn ma_residual(phi: &PotentialField, problem: &MaProblem) -> Result<ResidualReport> {
    residual_impl(phi, problem, true)
}

/// Same as [`ma_residual`] but skips out-of-range nodes and counts them.
pub fn ma_residual_lenient(phi: &PotentialField, problem: &MaProblem) -> ResidualReport {
    residual_impl(phi, problem, false).expect("lenient residual does not fail")
}

fn residual_impl(phi: &PotentialField, problem: &MaProblem, strict: bool) -> Result<ResidualReport> {
    let grid = phi.grid;
    let fmax = problem.f1.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-9 * fmax;
    let slack = problem.h();
    let mut field = vec![f64::NAN; grid.len()];
    let mut samples = Vec::new();
    let mut out_of_range = 0;
    for (i, j) in problem.interior_nodes() {
        let (Some(g), Some(hess)) = (phi.gradient_at(i, j), phi.hessian_at(i, j)) else {
            continue;
        };
        let f2 = match problem.f2_at(g, slack) {
            Ok(v) => v,
            Err(e) if strict => return Err(e),
            Err(_) => {
                out_of_range += 1;
                continue;
            }
        };
        let k = grid.index(i, j);
        let f1 = problem.f1[k];
        let r = (hess.det() * f2 - f1).abs() / f1.max(floor);
        field[k] = r;
        samples.push(r);
    }
    let stats = summarize(&mut samples, out_of_range);
    Ok(ResidualReport {
        field: ScalarField { grid, values: field },
        stats,
    })
}

fn summarize(samples: &mut [f64], out_of_range: usize) -> ResidualStats {
    if samples.is_empty() {
        return ResidualStats {
            median: f64::NAN,
            p95: f64::NAN,
            max: f64::NAN,
            nodes: 0,
            out_of_range,
        };
    }
    samples.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| samples[((samples.len() - 1) as f64 * p).round() as usize];
    ResidualStats {
        median: q(0.5),
        p95: q(0.95),
        max: samples[samples.len() - 1],
        nodes: samples.len(),
        out_of_range,
    }
}

#[derive(Debug, Clone)]
pub struct ConvexityReport {
    /// Smallest eigenvalue of the discrete Hessian, NaN on the grid edge.
    pub min_eigenvalues: ScalarField,
    pub min_eigenvalue: f64,
    pub fraction_nonconvex: f64,
}

pub fn convexity_check(phi: &PotentialField) -> ConvexityReport {
    let grid = phi.grid;
    let mut vals = vec![f64::NAN; grid.len()];
    let (mut total, mut bad) = (0usize, 0usize);
    let mut lowest = f64::INFINITY;
    for (i, j, k) in grid.nodes() {
        if let Some(h) = phi.hessian_at(i, j) {
            let e = h.min_eigenvalue();
            vals[k] = e;
            total += 1;
            lowest = lowest.min(e);
            if e < -CONVEXITY_TOLERANCE {
                bad += 1;
            }
        }
    }
    ConvexityReport {
        min_eigenvalues: ScalarField { grid, values: vals },
        min_eigenvalue: lowest,
        fraction_nonconvex: bad as f64 / total.max(1) as f64,
    }
}
