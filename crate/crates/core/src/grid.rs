//! Square real-space grids, complex fields sampled on them, and 2D FFTs.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::error::{param, Result};

/// Uniform square grid with points `-R + i·h`, `h = 2R/N`, `i = 0..N`.
/// The origin is a grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub radius: f64,
    pub n: usize,
    pub b: f64,
}

impl Grid2D {
    pub fn new(radius: f64, n: usize, b: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return param(format!("grid radius must be positive, got {radius}"));
        }
        if n < 64 || !n.is_power_of_two() {
            return param(format!("grid size must be a power of two >= 64, got {n}"));
        }
        if !(b > 0.0) {
            return param(format!("field strength must be positive, got {b}"));
        }
        Ok(Self { radius, n, b })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.radius + i as f64 * self.spacing()
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `(x1, x2)` of the flat index `idx = i1·N + i2`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        (self.coord(idx / self.n), self.coord(idx % self.n))
    }

    /// Angular frequency of FFT bin `m` (standard unshifted ordering).
    pub fn frequency(&self, m: usize) -> f64 {
        let n = self.n as i64;
        let signed = if (m as i64) < n / 2 { m as i64 } else { m as i64 - n };
        2.0 * std::f64::consts::PI * signed as f64 / (n as f64 * self.spacing())
    }
}

/// Complex samples on a [`Grid2D`], row-major in `(i1, i2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub grid: Grid2D,
    pub data: Vec<C64>,
}

impl Field2D {
    pub fn zeros(grid: Grid2D) -> Self {
        Self { grid, data: vec![C64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> C64 + Sync) -> Self {
        use rayon::prelude::*;
        let data = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (x1, x2) = grid.point(idx);
                f(x1, x2)
            })
            .collect();
        Self { grid, data }
    }

    /// `∫ f ḡ` by the tensor trapezoid rule.
    pub fn inner(&self, other: &Field2D) -> C64 {
        let s: C64 = self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).sum();
        s * self.grid.cell_area()
    }

    pub fn norm(&self) -> f64 {
        (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    /// `‖self − other‖ / ‖other‖`.
    pub fn rel_l2_distance(&self, other: &Field2D) -> f64 {
        let num: f64 = self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = other.data.iter().map(|z| z.norm_sqr()).sum();
        (num / den).sqrt()
    }

    pub fn ensure_same_grid(&self, other: &Field2D) -> Result<()> {
        if self.grid != other.grid {
            return param("fields live on different grids");
        }
        Ok(())
    }
}

/// In-place 2D FFT of an `n × n` row-major array. The inverse is unnormalized.
pub fn fft2(data: &mut [C64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan: Arc<dyn Fft<f64>> =
        if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    plan.process(data);
    transpose(data, n);
    plan.process(data);
    transpose(data, n);
}

fn transpose(data: &mut [C64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}
