//! Uniform cell decomposition of the road.
//!
//! Cell `j` is centered at `x_j = x_min + j * dx` and covers the half-open
//! interval `[x_j - dx/2, x_j + dx/2)`. The road therefore spans
//! `[x_min - dx/2, x_min + (n - 1/2) dx)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    Periodic,
    /// Zero-gradient ghost cells on both ends.
    FreeOutflow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    n_cells: usize,
    dx: f64,
    boundary: BoundaryMode,
    // left edge of cell 0 in units of dx
    origin: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, n_cells: usize, dx: f64, boundary: BoundaryMode) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidParameter(format!("dx must be positive, got {dx}")));
        }
        if n_cells < 3 {
            return Err(Error::InvalidParameter(format!(
                "need at least 3 cells, got {n_cells}"
            )));
        }
        if !x_min.is_finite() {
            return Err(Error::InvalidParameter("x_min must be finite".into()));
        }
        Ok(Self {
            x_min,
            n_cells,
            dx,
            boundary,
            origin: x_min / dx - 0.5,
        })
    }

    /// Grid covering `[0, length)` with `n_cells` cells.
    pub fn over_road(length: f64, n_cells: usize, boundary: BoundaryMode) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidParameter("need at least 3 cells, got 0".into()));
        }
        let dx = length / n_cells as f64;
        Self::new(0.5 * dx, n_cells, dx, boundary)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == BoundaryMode::Periodic
    }

    pub fn center(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx
    }

    /// Position of the left edge of cell `i`, i.e. `x_{i-1/2}`.
    ///
    /// Defined for any integer so that edges beyond the road (used when a
    /// vehicle's unwrapped position runs past the periodic end) are consistent.
    pub fn edge(&self, i: i64) -> f64 {
        (self.origin + i as f64) * self.dx
    }

    pub fn start(&self) -> f64 {
        self.edge(0)
    }

    pub fn end(&self) -> f64 {
        self.edge(self.n_cells as i64)
    }

    pub fn length(&self) -> f64 {
        self.n_cells as f64 * self.dx
    }

    /// Maps a position onto `[start, end)` in periodic mode; identity otherwise.
    pub fn wrap(&self, pos: f64) -> f64 {
        if !self.is_periodic() {
            return pos;
        }
        let (start, end) = (self.start(), self.end());
        if pos >= start && pos < end {
            return pos;
        }
        let len = end - start;
        let mut p = start + (pos - start).rem_euclid(len);
        if p >= end {
            p -= len;
        }
        p
    }

    /// Cell index of `pos` under the half-open convention, searching all
    /// integers (no range check).
    pub(crate) fn raw_cell(&self, pos: f64) -> i64 {
        let mut j = ((pos - self.start()) / self.dx).floor() as i64;
        // floor of a quotient can be off by one next to an edge
        while pos < self.edge(j) {
            j -= 1;
        }
        while pos >= self.edge(j + 1) {
            j += 1;
        }
        j
    }

    pub fn cell_index(&self, pos: f64) -> Result<usize> {
        if !pos.is_finite() {
            return Err(self.out_of_domain(pos));
        }
        let pos = self.wrap(pos);
        let j = self.raw_cell(pos);
        if j < 0 || j >= self.n_cells as i64 {
            return Err(self.out_of_domain(pos));
        }
        Ok(j as usize)
    }

    fn out_of_domain(&self, pos: f64) -> Error {
        Error::OutOfDomain {
            pos,
            start: self.start(),
            end: self.end(),
        }
    }

    /// Neighbor index with boundary handling: periodic wrap, or the nearest
    /// edge cell (ghost copy) in free-outflow mode.
    pub fn neighbor(&self, j: usize, offset: i64) -> usize {
        let n = self.n_cells as i64;
        let k = j as i64 + offset;
        match self.boundary {
            BoundaryMode::Periodic => k.rem_euclid(n) as usize,
            BoundaryMode::FreeOutflow => k.clamp(0, n - 1) as usize,
        }
    }
}
