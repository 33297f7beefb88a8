//! Uniform rectangular grids on the interface plane and scalar fields on them.

use crate::error::{Error, Result};

/// Node `(i, j)` sits at `(x0 + i hx, y0 + j hy)`; storage is row-major with
/// `j` selecting the row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2 {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Grid2 {
    pub fn new(nx: usize, ny: usize, x0: f64, y0: f64, hx: f64, hy: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::GridMismatch(format!("grid must be at least 3x3, got {nx}x{ny}")));
        }
        if !(hx > 0.0 && hy > 0.0 && hx.is_finite() && hy.is_finite() && x0.is_finite() && y0.is_finite()) {
            return Err(Error::GridMismatch(format!("invalid spacing hx = {hx}, hy = {hy}")));
        }
        Ok(Grid2 { nx, ny, x0, y0, hx, hy })
    }

    /// Cell-centered grid with `n` cells per axis over the square
    /// `[cx - half, cx + half] x [cy - half, cy + half]`, padded with `halo`
    /// extra nodes on every side.
    pub fn cell_centered(center: [f64; 2], half: f64, n: usize, halo: usize) -> Self {
        let h = 2.0 * half / n as f64;
        let x0 = center[0] - half + (0.5 - halo as f64) * h;
        let y0 = center[1] - half + (0.5 - halo as f64) * h;
        Grid2 {
            nx: n + 2 * halo,
            ny: n + 2 * halo,
            x0,
            y0,
            hx: h,
            hy: h,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x0 + i as f64 * self.hx, self.y0 + j as f64 * self.hy]
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x0 + i as f64 * self.hx).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y0 + j as f64 * self.hy).collect()
    }

    pub fn center(&self) -> [f64; 2] {
        [
            self.x0 + 0.5 * (self.nx - 1) as f64 * self.hx,
            self.y0 + 0.5 * (self.ny - 1) as f64 * self.hy,
        ]
    }

    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    /// Iterator over `(i, j, index)` of all nodes.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j, self.index(i, j))))
    }

    /// Nodes with a full 3x3 neighbourhood inside the grid.
    pub fn is_stencil_node(&self, i: usize, j: usize) -> bool {
        i >= 1 && j >= 1 && i + 1 < self.nx && j + 1 < self.ny
    }

    pub fn same_layout(&self, other: &Grid2) -> bool {
        let tol = 1e-12 * (1.0 + self.hx.abs() + self.x0.abs() + self.y0.abs());
        self.nx == other.nx
            && self.ny == other.ny
            && (self.x0 - other.x0).abs() <= tol
            && (self.y0 - other.y0).abs() <= tol
            && (self.hx - other.hx).abs() <= tol
            && (self.hy - other.hy).abs() <= tol
    }
}

/// Second derivatives at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hessian2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Hessian2 {
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mean = 0.5 * (self.xx + self.yy);
        let half_diff = 0.5 * (self.xx - self.yy);
        mean - (half_diff * half_diff + self.xy * self.xy).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: Grid2,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values for a {}x{} grid, got {}",
                grid.len(),
                grid.nx,
                grid.ny,
                values.len()
            )));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_fn(grid: Grid2, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid
            .nodes()
            .map(|(i, j, _)| {
                let [x, y] = grid.coords(i, j);
                f(x, y)
            })
            .collect();
        ScalarField { grid, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Centered-difference gradient at a node with both neighbours on each axis.
    pub fn gradient_at(&self, i: usize, j: usize) -> Option<[f64; 2]> {
        if !self.grid.is_stencil_node(i, j) {
            return None;
        }
        let g = &self.grid;
        Some([
            (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * g.hx),
            (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * g.hy),
        ])
    }

    /// Centered second differences, including the four-point mixed stencil.
    pub fn hessian_at(&self, i: usize, j: usize) -> Option<Hessian2> {
        if !self.grid.is_stencil_node(i, j) {
            return None;
        }
        let g = &self.grid;
        let c = self.at(i, j);
        let xx = (self.at(i + 1, j) - 2.0 * c + self.at(i - 1, j)) / (g.hx * g.hx);
        let yy = (self.at(i, j + 1) - 2.0 * c + self.at(i, j - 1)) / (g.hy * g.hy);
        let xy = (self.at(i + 1, j + 1) - self.at(i + 1, j - 1) - self.at(i - 1, j + 1) + self.at(i - 1, j - 1))
            / (4.0 * g.hx * g.hy);
        Some(Hessian2 { xx, xy, yy })
    }

    /// Bilinear interpolation of the field value. `None` outside the grid.
    pub fn value_at(&self, x: f64, y: f64) -> Option<f64> {
        let (i, j, tx, ty) = self.locate(x, y, 0)?;
        let v = |a: usize, b: usize| self.at(a, b);
        Some(
            (1.0 - tx) * (1.0 - ty) * v(i, j)
                + tx * (1.0 - ty) * v(i + 1, j)
                + (1.0 - tx) * ty * v(i, j + 1)
                + tx * ty * v(i + 1, j + 1),
        )
    }

    /// Bilinear interpolation of nodal centered-difference gradients. Only
    /// defined where all four surrounding nodes carry a centered gradient.
    pub fn gradient_bilinear(&self, x: f64, y: f64) -> Option<[f64; 2]> {
        let (i, j, tx, ty) = self.locate(x, y, 1)?;
        let g00 = self.gradient_at(i, j)?;
        let g10 = self.gradient_at(i + 1, j)?;
        let g01 = self.gradient_at(i, j + 1)?;
        let g11 = self.gradient_at(i + 1, j + 1)?;
        let w = [(1.0 - tx) * (1.0 - ty), tx * (1.0 - ty), (1.0 - tx) * ty, tx * ty];
        Some([
            w[0] * g00[0] + w[1] * g10[0] + w[2] * g01[0] + w[3] * g11[0],
            w[0] * g00[1] + w[1] * g10[1] + w[2] * g01[1] + w[3] * g11[1],
        ])
    }

    /// Lower-left node of the cell containing `(x, y)` and the local
    /// coordinates, keeping `margin` nodes away from the grid edge.
    fn locate(&self, x: f64, y: f64, margin: usize) -> Option<(usize, usize, f64, f64)> {
        let g = &self.grid;
        let fx = (x - g.x0) / g.hx;
        let fy = (y - g.y0) / g.hy;
        let lo = margin as f64;
        let hi_x = (g.nx - 1 - margin) as f64;
        let hi_y = (g.ny - 1 - margin) as f64;
        if !(fx >= lo && fx <= hi_x && fy >= lo && fy <= hi_y) {
            return None;
        }
        let i = (fx.floor() as usize).min(g.nx - 2 - margin);
        let j = (fy.floor() as usize).min(g.ny - 2 - margin);
        Some((i, j, fx - i as f64, fy - j as f64))
    }

    /// Subtracts the interpolated value at the geometric grid center.
    pub fn normalize_center(&mut self) {
        let [cx, cy] = self.grid.center();
        if let Some(c) = self.value_at(cx, cy) {
            self.values.iter_mut().for_each(|v| *v -= c);
        }
    }
}
