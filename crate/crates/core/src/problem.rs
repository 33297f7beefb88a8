//! Discretized second boundary value problem
//! `det D^2 phi = f1(x) / f2(grad phi)` on `D1`, `grad phi(D1) = D2`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid2;
use crate::region::PlanarRegion;

/// Nodes of padding around the source domain's bounding square, so that
/// centered differences are available at every node that can be hit by a ray.
pub const HALO: usize = 2;

/// Sub-cells per axis used to integrate densities over cut cells.
pub const SUBCELLS: usize = 8;

pub type DensityFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// Density on a planar region, evaluated pointwise.
#[derive(Clone)]
pub struct RegionDensity {
    pub region: PlanarRegion,
    density: DensityFn,
}

impl RegionDensity {
    pub fn new(region: PlanarRegion, density: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        RegionDensity {
            region,
            density: Arc::new(density),
        }
    }

    pub fn from_arc(region: PlanarRegion, density: DensityFn) -> Self {
        RegionDensity { region, density }
    }

    /// Density at `p`, zero outside the region.
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        if self.region.contains(p) {
            (self.density)(p)
        } else {
            0.0
        }
    }

    /// Density evaluated without the membership test (used after clamping).
    pub fn eval_unmasked(&self, p: [f64; 2]) -> f64 {
        (self.density)(p)
    }

    /// Integral of the density over `cell ∩ region` by midpoint sub-sampling.
    pub fn cell_mass(&self, center: [f64; 2], hx: f64, hy: f64) -> f64 {
        let n = SUBCELLS;
        let sx = hx / n as f64;
        let sy = hy / n as f64;
        let mut acc = 0.0;
        for b in 0..n {
            let y = center[1] - 0.5 * hy + (b as f64 + 0.5) * sy;
            for a in 0..n {
                let x = center[0] - 0.5 * hx + (a as f64 + 0.5) * sx;
                acc += self.eval([x, y]);
            }
        }
        acc * sx * sy
    }

    /// Cell masses over a whole grid.
    pub fn grid_masses(&self, grid: &Grid2) -> Vec<f64> {
        grid.nodes()
            .map(|(i, j, _)| self.cell_mass(grid.coords(i, j), grid.hx, grid.hy))
            .collect()
    }
}

impl fmt::Debug for RegionDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegionDensity").field("region", &self.region).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct MaProblem {
    /// Source grid: `resolution` cells across the bounding square of D1 plus halo.
    pub grid: Grid2,
    /// Node center lies in D1.
    pub inside: Vec<bool>,
    /// Pointwise samples of f1 (zero outside D1).
    pub f1: Vec<f64>,
    /// Integral of f1 over each cell clipped to D1.
    pub cell_mass: Vec<f64>,
    pub source: RegionDensity,
    pub target: RegionDensity,
    /// Integral of f1 over D1 (equal to that of f2 over D2).
    pub total_mass: f64,
}

impl MaProblem {
    /// Discretizes `source` on a cell-centered grid with `resolution` cells
    /// across its bounding square. `total_mass` is the exact source mass when
    /// the caller knows it, otherwise the quadrature sum is used.
    pub fn new(source: RegionDensity, target: RegionDensity, resolution: usize, total_mass: Option<f64>) -> Result<Self> {
        if resolution < 4 {
            return Err(Error::GridMismatch(format!("resolution must be at least 4, got {resolution}")));
        }
        if !source.region.is_valid() || !target.region.is_valid() {
            return Err(Error::InvalidScenario("degenerate source or target region".into()));
        }
        let grid = Grid2::cell_centered(source.region.center(), source.region.half_extent(), resolution, HALO);
        let mut inside = Vec::with_capacity(grid.len());
        let mut f1 = Vec::with_capacity(grid.len());
        for (i, j, _) in grid.nodes() {
            let p = grid.coords(i, j);
            let inn = source.region.contains(p);
            inside.push(inn);
            f1.push(if inn { source.eval(p) } else { 0.0 });
        }
        if f1.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidScenario("source density must be finite and nonnegative".into()));
        }
        let cell_mass = source.grid_masses(&grid);
        let quadrature: f64 = cell_mass.iter().sum();
        if !(quadrature > 0.0) {
            return Err(Error::InvalidScenario("source density has zero mass".into()));
        }
        Ok(MaProblem {
            grid,
            inside,
            f1,
            cell_mass,
            source,
            target,
            total_mass: total_mass.unwrap_or(quadrature),
        })
    }

    /// Target density at a gradient sample; points within `slack` of D2 are
    /// projected onto it, farther ones are rejected.
    pub fn f2_at(&self, p: [f64; 2], slack: f64) -> Result<f64> {
        if self.target.region.contains(p) {
            return Ok(self.target.eval_unmasked(p));
        }
        if self.target.region.distance(p) <= slack {
            return Ok(self.target.eval_unmasked(self.target.region.clamp(p)));
        }
        Err(Error::GradientOutOfRange(p[0], p[1]))
    }

    /// Nodes whose full 3x3 stencil lies in D1.
    pub fn interior_nodes(&self) -> Vec<(usize, usize)> {
        let g = &self.grid;
        let mut out = Vec::new();
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let all_in = (0..3).all(|b| (0..3).all(|a| self.inside[g.index(i + a - 1, j + b - 1)]));
                if all_in {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Fraction of nodes inside D1 where f1 vanishes.
    pub fn zero_density_fraction(&self) -> f64 {
        let (mut zero, mut count) = (0usize, 0usize);
        for (inn, f) in self.inside.iter().zip(&self.f1) {
            if *inn {
                count += 1;
                if *f == 0.0 {
                    zero += 1;
                }
            }
        }
        if count == 0 {
            1.0
        } else {
            zero as f64 / count as f64
        }
    }

    /// Spacing of the source grid.
    pub fn h(&self) -> f64 {
        self.grid.hx.max(self.grid.hy)
    }
}
