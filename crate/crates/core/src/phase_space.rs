//! Heisenberg representation on `L²(ℝ)`, Fourier–Wigner and Wigner transforms,
//! and twisted convolution on the plane.
//!
//! Conventions: `β(p,q,t)f(x) = e^{iqx + ibpq/2 + ibt} f(x + pb)`,
//! `V(f,g)(p,q) = ⟨β(p,q)f, g⟩`, `W(f,g)(ξ,x) = (2π)⁻¹∫V(f,g)(p,q)e^{-iξp-ixq}`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{domain, param, Result};
use crate::grid::Field2D;
use crate::specfun::{ln_abs_laguerre, ln_factorial};

/// Symplectic form `Ω(x,y) = x¹y² − x²y¹`.
pub fn omega(x: [f64; 2], y: [f64; 2]) -> f64 {
    x[0] * y[1] - x[1] * y[0]
}

/// `J x` with `J = [[0, 1], [-1, 0]]`.
pub fn apply_j(x: [f64; 2]) -> [f64; 2] {
    [x[1], -x[0]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub p: f64,
    pub q: f64,
}

impl PhasePoint {
    pub fn new(p: f64, q: f64) -> Self {
        Self { p, q }
    }

    pub fn w(&self) -> C64 {
        C64::new(self.p, self.q)
    }
}

/// Samples on the symmetric midpoint grid `x_i = (i − (N−1)/2)·h`, `h = 2X/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled1D {
    pub samples: Vec<C64>,
    pub extent: f64,
}

impl Sampled1D {
    pub fn from_fn(extent: f64, count: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        if count < 16 {
            return param(format!("a 1D grid needs at least 16 points, got {count}"));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return param(format!("grid extent must be positive, got {extent}"));
        }
        let h = 2.0 * extent / count as f64;
        let mid = (count as f64 - 1.0) / 2.0;
        let samples = (0..count).map(|i| f((i as f64 - mid) * h)).collect();
        Ok(Self { samples, extent })
    }

    /// Default extent for Hermite functions up to index `jmax`, with 1024 points.
    pub fn default_extent(jmax: usize, b: f64) -> f64 {
        (2.0 * b * (jmax as f64 + 1.0)).sqrt() * 1.5 + 5.0 * b.sqrt()
    }

    pub fn hermite(j: usize, b: f64, extent: f64, count: usize) -> Result<Self> {
        Self::from_fn(extent, count, |x| C64::new(crate::specfun::hermite_fn(j, x, b), 0.0))
    }

    pub fn count(&self) -> usize {
        self.samples.len()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.count() as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.count() as f64 - 1.0) / 2.0) * self.spacing()
    }

    /// Trapezoid `∫ f ḡ`; both operands must share a grid.
    pub fn inner(&self, other: &Sampled1D) -> Result<C64> {
        self.same_grid(other)?;
        let s: C64 = self.samples.iter().zip(&other.samples).map(|(a, b)| a * b.conj()).sum();
        Ok(s * self.spacing())
    }

    pub fn norm(&self) -> f64 {
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.spacing()).sqrt()
    }

    fn same_grid(&self, other: &Sampled1D) -> Result<()> {
        if self.count() != other.count() || self.extent != other.extent {
            return param("1D samples live on different grids");
        }
        Ok(())
    }
}

/// `β(p,q,t) f`, with the shift `x ↦ x + pb` done by discrete-Fourier
/// interpolation. Shifts beyond half the grid extent are refused.
pub fn beta_apply(p: f64, q: f64, t: f64, f: &Sampled1D, b: f64) -> Result<Sampled1D> {
    let shift = p * b;
    if shift.abs() > 0.5 * f.extent {
        return domain(format!(
            "shift |p·b| = {:.3} exceeds the grid margin {:.3}",
            shift.abs(),
            0.5 * f.extent
        ));
    }
    let n = f.count();
    let h = f.spacing();
    let mut data = f.samples.clone();
    if shift != 0.0 {
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut data);
        for (m, z) in data.iter_mut().enumerate() {
            let signed = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
            let k = 2.0 * std::f64::consts::PI * signed / (n as f64 * h);
            *z *= C64::from_polar(1.0 / n as f64, k * shift);
        }
        planner.plan_fft_inverse(n).process(&mut data);
    }
    for (i, z) in data.iter_mut().enumerate() {
        let x = f.x(i);
        *z *= C64::from_polar(1.0, q * x + b * p * q / 2.0 + b * t);
    }
    Ok(Sampled1D { samples: data, extent: f.extent })
}

/// `V(f,g)(p,q)` by trapezoid quadrature on the shared grid.
pub fn fourier_wigner_quadrature(
    f: &Sampled1D,
    g: &Sampled1D,
    p: f64,
    q: f64,
    b: f64,
) -> Result<C64> {
    f.same_grid(g)?;
    beta_apply(p, q, 0.0, f, b)?.inner(g)
}

/// Real radial profile `V(h_j,h_k)(r, 0)`; the full transform is this value
/// times `e^{i(j−k)θ}` at `w = r e^{iθ}`.
pub fn fourier_wigner_radial(j: usize, k: usize, r: f64, b: f64) -> f64 {
    let (lo, hi) = if j >= k { (k, j) } else { (j, k) };
    let d = hi - lo;
    let lam = b * r * r / 2.0;
    if d > 0 && r == 0.0 {
        return 0.0;
    }
    let (ln_l, sign_l) = ln_abs_laguerre(lo, d as f64, lam);
    if sign_l == 0.0 {
        return 0.0;
    }
    let mut ln_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) - lam / 2.0 + ln_l;
    if d > 0 {
        ln_mag += d as f64 * ((b / 2.0).sqrt() * r.abs()).ln();
    }
    let mut sign = sign_l;
    if r < 0.0 && d % 2 == 1 {
        sign = -sign;
    }
    if j < k && (j + k) % 2 == 1 {
        sign = -sign;
    }
    sign * ln_mag.exp()
}

/// Closed form of `V(h_j, h_k)(p, q)` in terms of associated Laguerre polynomials.
pub fn fourier_wigner_hermite(j: usize, k: usize, p: f64, q: f64, b: f64) -> C64 {
    let r = p.hypot(q);
    let theta = q.atan2(p);
    let phase = (j as f64 - k as f64) * theta;
    C64::from_polar(1.0, phase) * fourier_wigner_radial(j, k, r, b)
}

/// Closed form of `W(h_j, h_k)(ξ, x)` with `z = x + iξ`.
pub fn wigner_hermite(j: usize, k: usize, xi: f64, x: f64, b: f64) -> C64 {
    let z = C64::new(x, xi);
    let r2 = z.norm_sqr();
    let (lo, hi) = if j >= k { (k, j) } else { (j, k) };
    let d = hi - lo;
    let arg = 2.0 * r2 / b;
    let (ln_l, sign_l) = ln_abs_laguerre(lo, d as f64, arg);
    if sign_l == 0.0 || (d > 0 && r2 == 0.0) {
        return C64::new(0.0, 0.0);
    }
    let mut ln_mag = (2.0 / b).ln() + 0.5 * (ln_factorial(lo) - ln_factorial(hi)) - r2 / b + ln_l;
    if d > 0 {
        ln_mag += d as f64 * ((2.0 / b).sqrt() * r2.sqrt()).ln();
    }
    let sign = if lo % 2 == 1 { -sign_l } else { sign_l };
    // j ≥ k carries z̄^{j−k}, j < k carries z^{k−j}
    let theta = z.arg() * if j >= k { -(d as f64) } else { d as f64 };
    C64::from_polar(sign * ln_mag.exp(), theta)
}

/// `W(f,g)(ξ,x) = ∫ e^{-iξp} f(x + pb/2) ḡ(x − pb/2) dp` by the midpoint rule
/// on `p ∈ [-extent, extent]` with `count` nodes.
pub fn wigner_quadrature(
    f: impl Fn(f64) -> C64,
    g: impl Fn(f64) -> C64,
    xi: f64,
    x: f64,
    b: f64,
    extent: f64,
    count: usize,
) -> C64 {
    let h = 2.0 * extent / count as f64;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..count {
        let p = -extent + (i as f64 + 0.5) * h;
        acc += C64::from_polar(1.0, -xi * p) * f(x + p * b / 2.0) * g(x - p * b / 2.0).conj();
    }
    acc * h
}

/// Twisted convolution by direct quadrature. `sign = +1` gives `F ♮ G`
/// (phase `e^{ibΩ(x,y)/2}`), `sign = -1` the conjugate product.
/// Values of `F` outside the grid are taken as zero.
pub fn twisted_convolution(f: &Field2D, g: &Field2D, sign: i32, b: f64) -> Result<Field2D> {
    f.ensure_same_grid(g)?;
    if sign != 1 && sign != -1 {
        return param(format!("twisted convolution sign must be ±1, got {sign}"));
    }
    let grid = f.grid;
    let n = grid.n;
    let half = (n / 2) as isize;
    let s = sign as f64 * b / 2.0;
    let area = grid.cell_area();
    let data = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i1, i2) = ((idx / n) as isize, (idx % n) as isize);
            let x = [grid.coord(i1 as usize), grid.coord(i2 as usize)];
            let mut acc = C64::new(0.0, 0.0);
            for l1 in 0..n as isize {
                let m1 = i1 - l1 + half;
                if m1 < 0 || m1 >= n as isize {
                    continue;
                }
                let y1 = grid.coord(l1 as usize);
                for l2 in 0..n as isize {
                    let m2 = i2 - l2 + half;
                    if m2 < 0 || m2 >= n as isize {
                        continue;
                    }
                    let gy = g.data[(l1 as usize) * n + l2 as usize];
                    if gy == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let y = [y1, grid.coord(l2 as usize)];
                    let fv = f.data[(m1 as usize) * n + m2 as usize];
                    acc += fv * gy * C64::from_polar(1.0, s * omega(x, y));
                }
            }
            acc * area
        })
        .collect();
    Ok(Field2D { grid, data })
}
