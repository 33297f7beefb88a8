//! Second boundary value problem for the Monge-Ampere equation, solved as a
//! quadratic-cost optimal transport problem between `f1 dx` on D1 and
//! `f2 dp` on D2.
//!
//! The transport is computed by log-domain Sinkhorn iterations with an
//! epsilon-scaling schedule. With cost `c(x, y) = |x - y|^2 / 2` and
//! source-side dual potential `u`, the Brenier potential is
//! `phi(x) = |x|^2 / 2 - u(x)`. Evaluated through the soft c-transform of the
//! target-side dual, `phi` is a log-sum-exp of affine functions, hence convex
//! everywhere, and its gradient is the barycentric projection of the plan.

mod kernel;
mod residual;

pub use residual::{convexity_check, ma_residual, ma_residual_lenient, ConvexityReport, ResidualReport, ResidualStats};

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::PotentialField;
use crate::grid::{Grid2, ScalarField};
use crate::problem::MaProblem;
use kernel::{soft_min, Axes};

/// Initial value of the target-side dual potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDual {
    #[default]
    Zero,
    /// Uniform noise in `[-amplitude, amplitude]` on every target node.
    Random { seed: u64, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    /// Strictly decreasing regularization strengths (squared length units).
    pub epsilon_schedule: Vec<f64>,
    pub max_iterations: usize,
    /// Relative L1 error allowed on the target marginal at the last stage.
    pub marginal_tolerance: f64,
    /// Target grid cells per axis; `None` uses the source resolution.
    pub target_resolution: Option<usize>,
    pub initial_dual: InitialDual,
}

impl SolverParams {
    /// Geometric schedule from `0.1 d^2` down to `1e-3 d^2` with ratio 1/2,
    /// `d` the diameter of the target domain.
    pub fn default_for(problem: &MaProblem) -> Self {
        let d = problem.target.region.diameter();
        SolverParams {
            epsilon_schedule: geometric_schedule(0.1 * d * d, 1e-3 * d * d, 0.5),
            max_iterations: 5000,
            marginal_tolerance: 1e-4,
            target_resolution: None,
            initial_dual: InitialDual::Zero,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.epsilon_schedule;
        if s.is_empty() || s.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::validation(
                "solver.epsilon_schedule",
                "must be a non-empty list of positive values",
            ));
        }
        if s.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::validation("solver.epsilon_schedule", "must be strictly decreasing"));
        }
        if !(self.marginal_tolerance > 0.0 && self.marginal_tolerance < 1.0) {
            return Err(Error::validation("solver.marginal_tolerance", "must lie in (0, 1)"));
        }
        if self.max_iterations == 0 {
            return Err(Error::validation("solver.max_iterations", "must be positive"));
        }
        Ok(())
    }
}

/// `start, start*ratio, ...` down to `end`, with `end` always the last entry.
pub fn geometric_schedule(start: f64, end: f64, ratio: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut e = start;
    while e > end * (1.0 + 1e-9) {
        out.push(e);
        e *= ratio;
    }
    out.push(end);
    out
}

/// Target-side dual potential; enough to re-evaluate `phi` anywhere.
#[derive(Debug, Clone)]
pub struct TargetDual {
    axes: Axes,
    /// `g + eps log b`, `-inf` where the target weight vanishes.
    shifted: Vec<f64>,
    pub epsilon: f64,
}

impl TargetDual {
    /// Brenier potential and its exact gradient on the nodes of `grid`.
    pub fn potential_on(&self, grid: &Grid2) -> (PotentialField, Vec<[f64; 2]>) {
        let out = Axes {
            xs: grid.xs(),
            ys: grid.ys(),
        };
        let sm = soft_min(&out, &self.axes, &self.shifted, self.epsilon, true);
        let values = grid
            .nodes()
            .map(|(i, j, k)| {
                let [x, y] = grid.coords(i, j);
                0.5 * (x * x + y * y) - sm.values[k]
            })
            .collect();
        let field = ScalarField { grid: *grid, values };
        (PotentialField(field), sm.means.expect("means requested"))
    }
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub phi: PotentialField,
    /// Gradient of `phi` at every node of the problem grid.
    pub gradient_map: Vec<[f64; 2]>,
    pub residual_stats: Option<ResidualStats>,
    pub iterations_used: usize,
    pub converged: bool,
    pub marginal_error: f64,
    /// Nodes inside D1 with zero source density; their gradient comes from the
    /// smooth extension of the dual potential rather than from transported mass.
    pub zero_mass_nodes: Vec<usize>,
    /// Fraction of in-domain gradient samples farther than one cell from D2.
    pub gradient_outside_fraction: f64,
    pub dual: TargetDual,
}

fn log_weights(w: &[f64]) -> Vec<f64> {
    w.iter()
        .map(|&v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY })
        .collect()
}

/// Solves the transport problem and recovers the convex potential.
pub fn solve(problem: &MaProblem, params: &SolverParams) -> Result<SolverResult> {
    params.validate()?;
    let zero_fraction = problem.zero_density_fraction();
    if zero_fraction > 0.5 {
        return Err(Error::DegenerateDensity {
            fraction: 100.0 * zero_fraction,
        });
    }

    // source weights, normalized to a probability vector
    let src_total: f64 = problem.cell_mass.iter().sum();
    let a: Vec<f64> = problem.cell_mass.iter().map(|m| m / src_total).collect();
    let src_axes = Axes {
        xs: problem.grid.xs(),
        ys: problem.grid.ys(),
    };

    let n_t = params
        .target_resolution
        .unwrap_or(problem.grid.nx - 2 * crate::problem::HALO);
    let region = &problem.target.region;
    let tgrid = Grid2::cell_centered(region.center(), region.half_extent(), n_t, 0);
    let b_raw = problem.target.grid_masses(&tgrid);
    let tgt_total: f64 = b_raw.iter().sum();
    if !(tgt_total > 0.0) {
        return Err(Error::InvalidScenario("target density has zero mass on the grid".into()));
    }
    let b: Vec<f64> = b_raw.iter().map(|m| m / tgt_total).collect();
    let tgt_axes = Axes {
        xs: tgrid.xs(),
        ys: tgrid.ys(),
    };
    let log_a = log_weights(&a);
    let log_b = log_weights(&b);

    let mut g: Vec<f64> = match &params.initial_dual {
        InitialDual::Zero => vec![0.0; b.len()],
        InitialDual::Random { seed, amplitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..b.len()).map(|_| rng.gen_range(-1.0..=1.0) * amplitude).collect()
        }
    };

    let last_stage = params.epsilon_schedule.len() - 1;
    let mut iterations = 0usize;
    let mut err = f64::INFINITY;
    let mut eps = params.epsilon_schedule[0];
    for (stage, &stage_eps) in params.epsilon_schedule.iter().enumerate() {
        eps = stage_eps;
        let tol = if stage == last_stage {
            params.marginal_tolerance
        } else {
            params.marginal_tolerance.max(1e-2)
        };
        let mut it = 0;
        loop {
            let hg: Vec<f64> = g.iter().zip(&log_b).map(|(gv, lb)| gv + eps * lb).collect();
            let f = soft_min(&src_axes, &tgt_axes, &hg, eps, false).values;
            let hf: Vec<f64> = f.iter().zip(&log_a).map(|(fv, la)| fv + eps * la).collect();
            let g_new = soft_min(&tgt_axes, &src_axes, &hf, eps, false).values;
            // target marginal of the plan built from (f, g)
            err = 0.0;
            for ((gv, gn), bv) in g.iter().zip(&g_new).zip(&b) {
                if *bv > 0.0 {
                    err += bv * (((gv - gn) / eps).exp() - 1.0).abs();
                }
            }
            g = g_new;
            // keep the dual centered; the plan is invariant under constants
            let shift = weighted_mean(&g, &b);
            g.iter_mut().for_each(|v| *v -= shift);
            it += 1;
            iterations += 1;
            if err <= tol || it >= params.max_iterations {
                break;
            }
        }
        debug!("stage {stage}: eps = {eps:.3e}, {it} iterations, marginal error {err:.3e}");
    }
    let converged = err <= params.marginal_tolerance;
    info!("sinkhorn finished after {iterations} iterations, marginal error {err:.3e}, converged = {converged}");

    let shifted: Vec<f64> = g.iter().zip(&log_b).map(|(gv, lb)| gv + eps * lb).collect();
    let dual = TargetDual {
        axes: tgt_axes,
        shifted,
        epsilon: eps,
    };
    let (phi, gradient_map) = dual.potential_on(&problem.grid);

    let zero_mass_nodes = problem
        .inside
        .iter()
        .zip(&problem.f1)
        .enumerate()
        .filter(|(_, (inn, f))| **inn && **f == 0.0)
        .map(|(k, _)| k)
        .collect();
    let h = problem.h();
    let (mut outside, mut count) = (0usize, 0usize);
    for (k, inn) in problem.inside.iter().enumerate() {
        if *inn {
            count += 1;
            if problem.target.region.distance(gradient_map[k]) > h {
                outside += 1;
            }
        }
    }

    let mut result = SolverResult {
        phi,
        gradient_map,
        residual_stats: None,
        iterations_used: iterations,
        converged,
        marginal_error: err,
        zero_mass_nodes,
        gradient_outside_fraction: outside as f64 / count.max(1) as f64,
        dual,
    };
    result.residual_stats = Some(ma_residual_lenient(&result.phi, problem).stats);

    if converged {
        Ok(result)
    } else {
        Err(Error::NoConvergence {
            iterations,
            marginal_error: err,
            partial: Box::new(result),
        })
    }
}

fn weighted_mean(v: &[f64], w: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, wt) in v.iter().zip(w) {
        if *wt > 0.0 {
            s += x * wt;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::RegionDensity;
    use crate::region::PlanarRegion;
    use std::f64::consts::PI;

    #[test]
    fn schedule_ends_at_final_value() {
        let s = geometric_schedule(0.1, 1e-3, 0.5);
        assert_eq!(s.first(), Some(&0.1));
        assert_eq!(s.last(), Some(&1e-3));
        assert!(s.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(s.len(), 8);
    }

    #[test]
    fn params_validation() {
        let src = RegionDensity::new(PlanarRegion::disk(1.0), |_| 1.0);
        let p = MaProblem::new(src.clone(), src, 8, None).unwrap();
        let mut params = SolverParams::default_for(&p);
        assert!(params.validate().is_ok());
        params.epsilon_schedule = vec![0.1, 0.1];
        assert!(params.validate().is_err());
        params.epsilon_schedule = vec![0.1, 0.0];
        assert!(params.validate().is_err());
        params.epsilon_schedule = vec![0.1];
        params.marginal_tolerance = 1.0;
        assert!(params.validate().is_err());
    }

    #[test]
    fn degenerate_source_is_rejected() {
        let src = RegionDensity::new(PlanarRegion::disk(1.0), |p| if p[0] > -0.2 { 0.0 } else { 1.0 });
        let tgt = RegionDensity::new(PlanarRegion::disk(1.0), |_| 1.0 / PI);
        let p = MaProblem::new(src, tgt, 16, None).unwrap();
        let params = SolverParams::default_for(&p);
        assert!(matches!(solve(&p, &params), Err(Error::DegenerateDensity { .. })));
    }

    #[test]
    fn iteration_budget_exhaustion_reports_partial_result() {
        let src = RegionDensity::new(PlanarRegion::disk(1.0), |_| 1.0 / PI);
        let tgt = RegionDensity::new(PlanarRegion::disk(0.5), |_| 4.0 / PI);
        let p = MaProblem::new(src, tgt, 16, None).unwrap();
        let mut params = SolverParams::default_for(&p);
        params.max_iterations = 1;
        params.marginal_tolerance = 1e-9;
        match solve(&p, &params) {
            Err(Error::NoConvergence { partial, iterations, .. }) => {
                assert!(!partial.converged);
                assert_eq!(iterations, params.epsilon_schedule.len());
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }
}
