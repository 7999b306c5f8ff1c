//! Landau eigenbasis `e_{kj}` of `H = D*D`, level projections, the diagonal
//! operators, ladder maps, weighted norms, and coefficient/grid transforms.
//!
//! `k` is the Landau level (`H e_{kj} = 2bk e_{kj}`), `j` the angular index
//! (`H̄ e_{kj} = 2bj e_{kj}`). The basis is `e_{kj}(x) = √(b/2π) V(h_j, h_k)(x¹, x²)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{domain, param, Result};
use crate::grid::{Field2D, Grid2D};
use crate::phase_space::{fourier_wigner_hermite, fourier_wigner_radial, omega};
use crate::specfun::{laguerre, ln_abs_laguerre, ln_factorial, GaussLaguerre};

/// Largest tolerated basis mass outside the computational square.
pub const TAIL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauTruncation {
    pub k_levels: usize,
    pub j_count: usize,
    pub b: f64,
}

impl LandauTruncation {
    pub fn new(k_levels: usize, j_count: usize, b: f64) -> Result<Self> {
        if k_levels == 0 || j_count == 0 {
            return param(format!("truncation needs K, J >= 1, got K={k_levels}, J={j_count}"));
        }
        if !(b > 0.0 && b.is_finite()) {
            return param(format!("field strength must be positive, got {b}"));
        }
        Ok(Self { k_levels, j_count, b })
    }

    pub fn dim(&self) -> usize {
        self.k_levels * self.j_count
    }

    pub fn index(&self, k: usize, j: usize) -> usize {
        k * self.j_count + j
    }

    /// `(k, j)` of a flat index.
    pub fn pair(&self, idx: usize) -> (usize, usize) {
        (idx / self.j_count, idx % self.j_count)
    }

    /// Square radius large enough for the outermost classical orbit plus tail.
    pub fn default_radius(&self) -> f64 {
        let b = self.b;
        1.5 * 2.0 * ((self.k_levels + self.j_count + 2) as f64 / b).sqrt() + 4.0 / b.sqrt()
    }

    pub fn default_grid(&self) -> Grid2D {
        Grid2D::new(self.default_radius(), 256, self.b).expect("default grid is valid")
    }
}

/// `⟨x⟩ = (1 + x²)^{1/2}`.
pub fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction2D {
    pub trunc: LandauTruncation,
    pub coeffs: Vec<C64>,
}

impl WaveFunction2D {
    pub fn zeros(trunc: LandauTruncation) -> Self {
        Self { trunc, coeffs: vec![C64::new(0.0, 0.0); trunc.dim()] }
    }

    pub fn basis(trunc: LandauTruncation, k: usize, j: usize) -> Result<Self> {
        if k >= trunc.k_levels || j >= trunc.j_count {
            return param(format!("basis index ({k},{j}) outside the truncation"));
        }
        let mut f = Self::zeros(trunc);
        f.coeffs[trunc.index(k, j)] = C64::new(1.0, 0.0);
        Ok(f)
    }

    pub fn from_coeffs(trunc: LandauTruncation, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != trunc.dim() {
            return param(format!("expected {} coefficients, got {}", trunc.dim(), coeffs.len()));
        }
        Ok(Self { trunc, coeffs })
    }

    pub fn get(&self, k: usize, j: usize) -> C64 {
        self.coeffs[self.trunc.index(k, j)]
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `e_{kj}(z)` at `z = x¹ + i x²`.
pub fn eigenfunction(k: usize, j: usize, z: C64, b: f64) -> C64 {
    fourier_wigner_hermite(j, k, z.re, z.im, b) * (b / (2.0 * PI)).sqrt()
}

/// All `e_{kj}(x)` of a truncation at one point, in flat-index order.
pub fn eigenfunctions_at(trunc: &LandauTruncation, x1: f64, x2: f64) -> Vec<C64> {
    let b = trunc.b;
    let r = x1.hypot(x2);
    let theta = x2.atan2(x1);
    let norm = (b / (2.0 * PI)).sqrt();
    let mut out = Vec::with_capacity(trunc.dim());
    for k in 0..trunc.k_levels {
        for j in 0..trunc.j_count {
            let phase = (j as f64 - k as f64) * theta;
            out.push(C64::from_polar(norm * fourier_wigner_radial(j, k, r, b), phase));
        }
    }
    out
}

/// Kernel of the orthogonal projection onto level `k`.
pub fn projection_kernel(k: usize, x: [f64; 2], y: [f64; 2], b: f64) -> C64 {
    let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
    let mag = b / (2.0 * PI) * laguerre(k, 0, b * d2 / 2.0) * (-b * d2 / 4.0).exp();
    C64::from_polar(mag, -b * omega(x, y) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagonalOp {
    /// `H = D*D`, eigenvalue `2bk`.
    H,
    /// Conjugate operator, eigenvalue `2bj`.
    Hbar,
    /// Hermite operator `−Δ + b²|x|²/4`, eigenvalue `(k+j+1)b`.
    Hh,
    /// Rotation part, eigenvalue `(k−j)b`.
    Hr,
}

impl DiagonalOp {
    pub fn eigenvalue(self, k: usize, j: usize, b: f64) -> f64 {
        let (k, j) = (k as f64, j as f64);
        match self {
            DiagonalOp::H => 2.0 * b * k,
            DiagonalOp::Hbar => 2.0 * b * j,
            DiagonalOp::Hh => (k + j + 1.0) * b,
            DiagonalOp::Hr => (k - j) * b,
        }
    }
}

pub fn apply_diagonal(op: DiagonalOp, f: &WaveFunction2D) -> WaveFunction2D {
    let t = f.trunc;
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let (k, j) = t.pair(idx);
            c * op.eigenvalue(k, j, t.b)
        })
        .collect();
    WaveFunction2D { trunc: t, coeffs }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    /// Lowers the level: `D e_{kj} = √(2bk) e_{k−1,j}`.
    D,
    /// Raises the level: `D* e_{kj} = √(2b(k+1)) e_{k+1,j}`.
    DStar,
}

/// Applies a ladder operator. The second value is the squared `L²` norm of
/// the part pushed above the top retained level (always 0 for `D`).
pub fn ladder(dir: Ladder, f: &WaveFunction2D) -> (WaveFunction2D, f64) {
    let t = f.trunc;
    let mut out = WaveFunction2D::zeros(t);
    let mut loss = 0.0;
    for k in 0..t.k_levels {
        for j in 0..t.j_count {
            let c = f.get(k, j);
            match dir {
                Ladder::D if k > 0 => {
                    out.coeffs[t.index(k - 1, j)] = c * (2.0 * t.b * k as f64).sqrt();
                }
                Ladder::D => {}
                Ladder::DStar => {
                    let v = c * (2.0 * t.b * (k + 1) as f64).sqrt();
                    if k + 1 < t.k_levels {
                        out.coeffs[t.index(k + 1, j)] = v;
                    } else {
                        loss += v.norm_sqr();
                    }
                }
            }
        }
    }
    (out, loss)
}

/// `‖⟨H⟩^{s/2} f‖`, or `‖⟨H̄⟩^{s/2} f‖` when `conjugated`.
pub fn weighted_norm(f: &WaveFunction2D, s: f64, conjugated: bool) -> f64 {
    let t = f.trunc;
    f.coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let (k, j) = t.pair(idx);
            let level = if conjugated { j } else { k };
            japanese(2.0 * t.b * level as f64).powf(s) * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Mass of `|e_{kj}|²` outside the disc of the given radius.
pub fn tail_mass(k: usize, j: usize, radius: f64, b: f64) -> f64 {
    let n = k.min(j);
    let d = k.max(j) - n;
    let lam0 = b * radius * radius / 2.0;
    let rule = GaussLaguerre::new(n + d / 2 + 3, 0.0);
    let ln_norm = ln_factorial(n) - ln_factorial(n + d);
    rule.integrate(|u| {
        let lam = lam0 + u;
        let (ln_l, sign) = ln_abs_laguerre(n, d as f64, lam);
        if sign == 0.0 {
            return 0.0;
        }
        let ln_pow = if d == 0 { 0.0 } else { d as f64 * lam.ln() };
        (ln_norm - lam + ln_pow + 2.0 * ln_l).exp()
    })
}

/// Refuses grids that clip the basis in space or under-resolve it in frequency.
pub fn check_grid(trunc: &LandauTruncation, grid: &Grid2D) -> Result<()> {
    if (grid.b - trunc.b).abs() > 1e-12 * trunc.b {
        return param(format!("grid b = {} differs from truncation b = {}", grid.b, trunc.b));
    }
    // the Fourier transform of e_{kj} has the same radial profile at b' = 4/b
    let nyquist = PI / grid.spacing();
    let mut worst: (f64, usize, usize, &str) = (0.0, 0, 0, "");
    for k in 0..trunc.k_levels {
        for j in 0..trunc.j_count {
            let space = tail_mass(k, j, grid.radius, trunc.b);
            let freq = tail_mass(k, j, nyquist, 4.0 / trunc.b);
            if space > worst.0 {
                worst = (space, k, j, "outside the grid radius");
            }
            if freq > worst.0 {
                worst = (freq, k, j, "above the grid Nyquist frequency");
            }
        }
    }
    if worst.0 > TAIL_TOLERANCE {
        return domain(format!(
            "grid (R = {}, N = {}) too small: e_({},{}) has mass {:.3e} {}",
            grid.radius, grid.n, worst.1, worst.2, worst.0, worst.3
        ));
    }
    Ok(())
}

/// Values of every basis function on the grid, `table[a][idx]`.
pub fn basis_on_grid(trunc: &LandauTruncation, grid: &Grid2D) -> Result<Vec<Vec<C64>>> {
    check_grid(trunc, grid)?;
    let per_point: Vec<Vec<C64>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (x1, x2) = grid.point(idx);
            eigenfunctions_at(trunc, x1, x2)
        })
        .collect();
    let mut table = vec![Vec::with_capacity(grid.len()); trunc.dim()];
    for vals in per_point {
        for (a, v) in vals.into_iter().enumerate() {
            table[a].push(v);
        }
    }
    Ok(table)
}

/// Pointwise sum `Σ c_{kj} e_{kj}` on the grid.
pub fn synthesize(f: &WaveFunction2D, grid: &Grid2D) -> Result<Field2D> {
    check_grid(&f.trunc, grid)?;
    let trunc = f.trunc;
    Ok(Field2D::from_fn(*grid, |x1, x2| {
        eigenfunctions_at(&trunc, x1, x2).iter().zip(&f.coeffs).map(|(e, c)| c * e).sum()
    }))
}

/// Coefficients `⟨field, e_{kj}⟩` by tensor-trapezoid quadrature.
pub fn analyze(field: &Field2D, trunc: &LandauTruncation) -> Result<WaveFunction2D> {
    let grid = field.grid;
    check_grid(trunc, &grid)?;
    let dim = trunc.dim();
    // per-row partial sums, added in row order so the result is reproducible
    let rows: Vec<Vec<C64>> = (0..grid.n)
        .into_par_iter()
        .map(|i1| {
            let mut acc = vec![C64::new(0.0, 0.0); dim];
            for idx in i1 * grid.n..(i1 + 1) * grid.n {
                let (x1, x2) = grid.point(idx);
                let v = field.data[idx];
                for (a, e) in eigenfunctions_at(trunc, x1, x2).into_iter().enumerate() {
                    acc[a] += v * e.conj();
                }
            }
            acc
        })
        .collect();
    let mut coeffs = vec![C64::new(0.0, 0.0); dim];
    for row in rows {
        coeffs.iter_mut().zip(row).for_each(|(x, y)| *x += y);
    }
    coeffs.iter_mut().for_each(|c| *c *= grid.cell_area());
    Ok(WaveFunction2D { trunc: *trunc, coeffs })
}

/// Quadrature Gram error and finite-difference eigen-residuals of a truncation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BasisDiagnostics {
    /// `max |⟨e_a, e_b⟩ − δ_ab|` under grid quadrature.
    pub gram_max_error: f64,
    /// `max ‖H e_{kj} − 2bk e_{kj}‖` with `H` by finite differences.
    pub eigen_residual_max: f64,
    /// Same for `H̄` and `2bj`.
    pub conj_eigen_residual_max: f64,
}

pub fn basis_diagnostics(trunc: &LandauTruncation, grid: &Grid2D) -> Result<BasisDiagnostics> {
    let table = basis_on_grid(trunc, grid)?;
    let dim = trunc.dim();
    let area = grid.cell_area();
    let gram_max_error = (0..dim)
        .into_par_iter()
        .map(|a| {
            (0..=a)
                .map(|c| {
                    let s: C64 = table[a].iter().zip(&table[c]).map(|(x, y)| x * y.conj()).sum();
                    let delta = if a == c { 1.0 } else { 0.0 };
                    (s * area - delta).norm()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let b = trunc.b;
    let residuals: Vec<(f64, f64)> = (0..dim)
        .into_par_iter()
        .map(|a| {
            let (k, j) = trunc.pair(a);
            let e = move |x1: f64, x2: f64| eigenfunction(k, j, C64::new(x1, x2), b);
            let cut = negligible_radius(k, j, b);
            let (mut r, mut rc) = (0.0, 0.0);
            for idx in 0..grid.len() {
                let v = table[a][idx];
                let (x1, x2) = grid.point(idx);
                if x1.hypot(x2) > cut {
                    continue;
                }
                r += (fd::apply_h(&e, x1, x2, b, false) - v * (2.0 * b * k as f64)).norm_sqr();
                rc += (fd::apply_h(&e, x1, x2, b, true) - v * (2.0 * b * j as f64)).norm_sqr();
            }
            ((r * area).sqrt(), (rc * area).sqrt())
        })
        .collect();
    Ok(BasisDiagnostics {
        gram_max_error,
        eigen_residual_max: residuals.iter().map(|r| r.0).fold(0.0, f64::max),
        conj_eigen_residual_max: residuals.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

/// Radius beyond which `e_{kj}` carries less than `1e-30` of its mass.
fn negligible_radius(k: usize, j: usize, b: f64) -> f64 {
    let mut r = ((2 * (k + j + 1)) as f64 / b).sqrt();
    while tail_mass(k, j, r, b) > 1e-30 {
        r *= 1.1;
    }
    r
}

/// Pointwise fourth-order central differences of a smooth function of the plane.
pub mod fd {
    use num_complex::Complex64 as C64;

    /// Step used by the pointwise stencils.
    pub const STEP: f64 = 1e-2;

    /// `(∂₁f, ∂₂f, Δf)` at `x`.
    pub fn derivatives(f: &dyn Fn(f64, f64) -> C64, x1: f64, x2: f64, h: f64) -> (C64, C64, C64) {
        let c = f(x1, x2);
        let (a1, a2, a3, a4) = (f(x1 + h, x2), f(x1 - h, x2), f(x1 + 2.0 * h, x2), f(x1 - 2.0 * h, x2));
        let (b1, b2, b3, b4) = (f(x1, x2 + h), f(x1, x2 - h), f(x1, x2 + 2.0 * h), f(x1, x2 - 2.0 * h));
        let d1 = (8.0 * (a1 - a2) - (a3 - a4)) / (12.0 * h);
        let d2 = (8.0 * (b1 - b2) - (b3 - b4)) / (12.0 * h);
        let dd1 = (16.0 * (a1 + a2) - (a3 + a4) - 30.0 * c) / (12.0 * h * h);
        let dd2 = (16.0 * (b1 + b2) - (b3 + b4) - 30.0 * c) / (12.0 * h * h);
        (d1, d2, dd1 + dd2)
    }

    /// `H f = −Δf − ib(x²∂₁ − x¹∂₂)f + (b²|x|²/4 − b) f`; `conjugated` flips the
    /// sign of the rotation term, giving `H̄`.
    pub fn apply_h(f: &dyn Fn(f64, f64) -> C64, x1: f64, x2: f64, b: f64, conjugated: bool) -> C64 {
        let (d1, d2, lap) = derivatives(f, x1, x2, STEP);
        let rot = C64::new(0.0, if conjugated { b } else { -b }) * (d1 * x2 - d2 * x1);
        -lap + rot + f(x1, x2) * (b * b * (x1 * x1 + x2 * x2) / 4.0 - b)
    }

    /// `D f = −(∂₁ + i∂₂) f − (b/2) z f`.
    pub fn apply_d(f: &dyn Fn(f64, f64) -> C64, x1: f64, x2: f64, b: f64) -> C64 {
        let (d1, d2, _) = derivatives(f, x1, x2, STEP);
        -(d1 + C64::i() * d2) - C64::new(x1, x2) * f(x1, x2) * (b / 2.0)
    }

    /// `D* f = (∂₁ − i∂₂) f − (b/2) z̄ f`.
    pub fn apply_d_star(f: &dyn Fn(f64, f64) -> C64, x1: f64, x2: f64, b: f64) -> C64 {
        let (d1, d2, _) = derivatives(f, x1, x2, STEP);
        (d1 - C64::i() * d2) - C64::new(x1, -x2) * f(x1, x2) * (b / 2.0)
    }
}
