//! Fermi-sea stationary states, densities, mean-field couplings, and the
//! integrating-factor RK4 integrator for the perturbation equation
//! `i∂ₜQ = [H + ρ_Q*v, Q] + [ρ_Q*v, Π̄]`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::DensityMatrix;
use crate::error::{param, Error, Result};
use crate::grid::{fft2, Field2D, Grid2D};
use crate::landau::{basis_on_grid, fd, japanese, LandauTruncation};
use crate::pair_spectrum::{LambdaRule, PairSpectrum};
use crate::phase_space::omega;

/// Spectral multipliers `l_k` of a level-diagonal stationary state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfileSpec {
    pub l: Vec<f64>,
    pub b: f64,
}

/// Occupies levels `0..=n` of a `k_levels` truncation.
pub fn fermi_sea(n: usize, k_levels: usize, b: f64) -> Result<RadialProfileSpec> {
    if n >= k_levels {
        return param(format!("Fermi level {n} is not below the truncation K = {k_levels}"));
    }
    let l = (0..k_levels).map(|k| if k <= n { 1.0 } else { 0.0 }).collect();
    Ok(RadialProfileSpec { l, b })
}

/// `l_k = 1 / (e^{(2bk − μ)/T} + 1)` with `k_B = 1`. At `μ = 2bk` the value is
/// exactly 1/2.
pub fn fermi_dirac(mu: f64, temperature: f64, k_levels: usize, b: f64) -> Result<RadialProfileSpec> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return param(format!("temperature must be positive, got {temperature}"));
    }
    if !mu.is_finite() {
        return param("chemical potential must be finite");
    }
    let l = (0..k_levels)
        .map(|k| {
            let x = (2.0 * b * k as f64 - mu) / temperature;
            // logistic written to stay finite for large |x|
            if x >= 0.0 {
                let e = (-x).exp();
                e / (1.0 + e)
            } else {
                1.0 / ((x).exp() + 1.0)
            }
        })
        .collect();
    Ok(RadialProfileSpec { l, b })
}

impl RadialProfileSpec {
    /// `φ(x) = (b/2π) Σ_k l_k L_k(b|x|²/2) e^{-b|x|²/4}`.
    pub fn phi(&self, x: [f64; 2]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let lam = self.b * r2 / 2.0;
        let s: f64 =
            self.l.iter().enumerate().map(|(k, l)| l * crate::specfun::laguerre(k, 0, lam)).sum();
        self.b / (2.0 * PI) * s * (-self.b * r2 / 4.0).exp()
    }
}

/// `Π̄ = Σ_k l_k P_k` restricted to the truncation.
pub fn stationary_pi_bar(spec: &RadialProfileSpec, trunc: LandauTruncation) -> Result<DensityMatrix> {
    if spec.l.len() != trunc.k_levels {
        return param(format!(
            "profile has {} levels, truncation has {}",
            spec.l.len(),
            trunc.k_levels
        ));
    }
    if (spec.b - trunc.b).abs() > 1e-12 * trunc.b {
        return param("profile and truncation use different field strengths");
    }
    let mut q = DensityMatrix::zeros(trunc);
    let n = trunc.dim();
    for a in 0..n {
        q.data[a * n + a] = C64::new(spec.l[trunc.pair(a).0], 0.0);
    }
    Ok(q)
}

/// Kernel `φ(x − y) e^{ibΩ(x,y)/2}`, stationary for every `φ`.
pub fn stationary_pi_kernel(phi: impl Fn([f64; 2]) -> C64, x: [f64; 2], y: [f64; 2], b: f64) -> C64 {
    phi([x[0] - y[0], x[1] - y[1]]) * C64::from_polar(1.0, b * omega(x, y) / 2.0)
}

/// Kernel `φ(x − y) e^{-ibΩ(x,y)/2}`, stationary when `φ` is radial.
pub fn stationary_pi_bar_kernel(phi: impl Fn([f64; 2]) -> C64, x: [f64; 2], y: [f64; 2], b: f64) -> C64 {
    phi([x[0] - y[0], x[1] - y[1]]) * C64::from_polar(1.0, -b * omega(x, y) / 2.0)
}

/// `‖(H_x − H̄_y)K‖ / ‖H_x K‖` over the sample pairs, derivatives by
/// pointwise finite differences.
pub fn stationarity_residual(
    kernel: impl Fn([f64; 2], [f64; 2]) -> C64 + Sync,
    pairs: &[([f64; 2], [f64; 2])],
    b: f64,
) -> f64 {
    let parts: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|&(x, y)| {
            let in_x = |x1: f64, x2: f64| kernel([x1, x2], y);
            let in_y = |y1: f64, y2: f64| kernel(x, [y1, y2]);
            let hx = fd::apply_h(&in_x, x[0], x[1], b, false);
            let hy = fd::apply_h(&in_y, y[0], y[1], b, true);
            ((hx - hy).norm_sqr(), hx.norm_sqr())
        })
        .collect();
    let num: f64 = parts.iter().map(|p| p.0).sum();
    let den: f64 = parts.iter().map(|p| p.1).sum();
    (num / den).sqrt()
}

/// Real, integrable interaction potential.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `v(x) = A e^{-|x|²/(2σ²)}`.
    Gaussian { amplitude: f64, sigma: f64 },
    /// Samples on a grid centred at the origin; zero outside it.
    Tabulated { grid: Grid2D, values: Vec<f64> },
}

impl PotentialSpec {
    pub fn gaussian(amplitude: f64, sigma: f64) -> Result<Self> {
        if !amplitude.is_finite() || !(sigma > 0.0 && sigma.is_finite()) {
            return param(format!("Gaussian potential needs finite A and σ > 0, got A={amplitude}, σ={sigma}"));
        }
        Ok(PotentialSpec::Gaussian { amplitude, sigma })
    }

    pub fn tabulated(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() || values.iter().any(|v| !v.is_finite()) {
            return param("tabulated potential must hold one finite value per grid point");
        }
        Ok(PotentialSpec::Tabulated { grid, values })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PotentialSpec::Gaussian { amplitude, .. } => *amplitude == 0.0,
            PotentialSpec::Tabulated { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    /// Value at a displacement lying on a lattice of spacing `h`.
    fn at_offset(&self, d1: i64, d2: i64, h: f64) -> f64 {
        match self {
            PotentialSpec::Gaussian { amplitude, sigma } => {
                let r2 = ((d1 * d1 + d2 * d2) as f64) * h * h;
                amplitude * (-r2 / (2.0 * sigma * sigma)).exp()
            }
            PotentialSpec::Tabulated { grid, values } => {
                let half = (grid.n / 2) as i64;
                let (i1, i2) = (d1 + half, d2 + half);
                if i1 < 0 || i2 < 0 || i1 >= grid.n as i64 || i2 >= grid.n as i64 {
                    0.0
                } else {
                    values[i1 as usize * grid.n + i2 as usize]
                }
            }
        }
    }

    /// `∫ v`.
    pub fn integral(&self) -> f64 {
        match self {
            PotentialSpec::Gaussian { amplitude, sigma } => 2.0 * PI * sigma * sigma * amplitude,
            PotentialSpec::Tabulated { grid, values } => values.iter().sum::<f64>() * grid.cell_area(),
        }
    }
}

/// `ρ(x) = Σ q_ab e_a(x) ē_b(x)` on the grid. For Hermitian `Q` the imaginary
/// part is checked to vanish and then dropped.
pub fn density(q: &DensityMatrix, grid: &Grid2D) -> Result<Field2D> {
    let table = basis_on_grid(&q.trunc, grid)?;
    density_from_table(q, grid, &table)
}

fn density_from_table(q: &DensityMatrix, grid: &Grid2D, table: &[Vec<C64>]) -> Result<Field2D> {
    let dim = q.dim();
    let mut data: Vec<C64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..dim {
                let ea = table[a][idx];
                if ea == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut row = C64::new(0.0, 0.0);
                for b in 0..dim {
                    row += q.data[a * dim + b] * table[b][idx].conj();
                }
                acc += ea * row;
            }
            acc
        })
        .collect();
    if q.hermitian {
        let scale = data.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        let worst = data.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if worst > 1e-10 * scale.max(1.0) {
            return Err(Error::Domain(format!("density of a Hermitian matrix has imaginary part {worst:.3e}")));
        }
        data.iter_mut().for_each(|z| z.im = 0.0);
    }
    Ok(Field2D { grid: *grid, data })
}

/// Linear (non-periodic) convolution `v * ρ` on the grid, by FFT on a
/// zero-padded domain of twice the size.
pub fn mean_field(rho: &Field2D, v: &PotentialSpec) -> Result<Field2D> {
    let grid = rho.grid;
    if let PotentialSpec::Tabulated { grid: vg, .. } = v {
        if (vg.spacing() - grid.spacing()).abs() > 1e-12 * grid.spacing() {
            return param("tabulated potential spacing differs from the density grid");
        }
    }
    let n = grid.n;
    let m = 2 * n;
    let h = grid.spacing();
    let mut a = vec![C64::new(0.0, 0.0); m * m];
    for i in 0..n {
        a[i * m..i * m + n].copy_from_slice(&rho.data[i * n..(i + 1) * n]);
    }
    let mut k = vec![C64::new(0.0, 0.0); m * m];
    let signed = |i: usize| if i < n { i as i64 } else { i as i64 - m as i64 };
    for i1 in 0..m {
        for i2 in 0..m {
            k[i1 * m + i2] = C64::new(v.at_offset(signed(i1), signed(i2), h), 0.0);
        }
    }
    fft2(&mut a, m, false);
    fft2(&mut k, m, false);
    a.iter_mut().zip(&k).for_each(|(x, y)| *x *= y);
    fft2(&mut a, m, true);
    let scale = h * h / (m * m) as f64;
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        data.extend(a[i * m..i * m + n].iter().map(|z| z * scale));
    }
    Ok(Field2D { grid, data })
}

/// Source of the mean-field matrix `M_ab = ⟨(v*ρ_Q) e_b, e_a⟩` and of the
/// density functionals used by the diagnostics.
pub trait Coupling: Sync {
    fn truncation(&self) -> LandauTruncation;
    fn mean_field_matrix(&self, q: &DensityMatrix) -> Result<Vec<C64>>;
    /// `½ ∫ (v*ρ_Q) ρ_Q`.
    fn interaction_energy(&self, q: &DensityMatrix) -> Result<f64>;
    /// `∫ |ρ_Q|²`.
    fn density_l2_sq(&self, q: &DensityMatrix) -> Result<f64>;
}

/// Gaussian-potential coupling evaluated from the closed-form pair spectrum.
/// Exact up to rounding for the truncated basis; no spatial grid involved.
#[derive(Debug, Clone)]
pub struct SpectralCoupling {
    amplitude: f64,
    sigma: f64,
    potential: PairSpectrum,
    plain: PairSpectrum,
}

impl SpectralCoupling {
    pub fn new(trunc: LandauTruncation, v: &PotentialSpec) -> Result<Self> {
        let PotentialSpec::Gaussian { amplitude, sigma } = *v else {
            return param("the spectral coupling supports Gaussian potentials only");
        };
        let nodes = LambdaRule::exact_nodes(&trunc);
        let kappa = 2.0 + sigma * sigma * trunc.b;
        Ok(Self {
            amplitude,
            sigma,
            potential: PairSpectrum::new(trunc, LambdaRule::new(nodes, 0.0, kappa)),
            plain: PairSpectrum::new(trunc, LambdaRule::new(nodes, 0.0, 2.0)),
        })
    }

    /// `A σ² b e^{-σ² b λ}`: the potential's Fourier weight in the `λ` variable.
    fn weight(&self) -> impl Fn(f64) -> f64 + '_ {
        let b = self.potential.trunc.b;
        let s2b = self.sigma * self.sigma * b;
        move |lam| self.amplitude * s2b * (-s2b * lam).exp()
    }
}

impl Coupling for SpectralCoupling {
    fn truncation(&self) -> LandauTruncation {
        self.potential.trunc
    }

    fn mean_field_matrix(&self, q: &DensityMatrix) -> Result<Vec<C64>> {
        if self.amplitude == 0.0 {
            return Ok(vec![C64::new(0.0, 0.0); q.dim() * q.dim()]);
        }
        let p = self.potential.profiles(q, None);
        Ok(self.potential.contract(&p, self.weight(), q.hermitian))
    }

    fn interaction_energy(&self, q: &DensityMatrix) -> Result<f64> {
        if self.amplitude == 0.0 {
            return Ok(0.0);
        }
        let p = self.potential.profiles(q, None);
        Ok(0.5 * self.potential.weighted_square(&p, self.weight()))
    }

    fn density_l2_sq(&self, q: &DensityMatrix) -> Result<f64> {
        let p = self.plain.profiles(q, None);
        let b = self.plain.trunc.b;
        Ok(self.plain.weighted_square(&p, |_| b / (2.0 * PI)))
    }
}

/// Coupling by grid quadrature: density on the grid, linear convolution with
/// the potential, and projection back onto the basis. Cost grows like
/// `dim² · N²`, so it suits small truncations.
#[derive(Debug, Clone)]
pub struct GridCoupling {
    trunc: LandauTruncation,
    grid: Grid2D,
    potential: PotentialSpec,
    table: Vec<Vec<C64>>,
}

impl GridCoupling {
    pub fn new(trunc: LandauTruncation, grid: Grid2D, potential: PotentialSpec) -> Result<Self> {
        let table = basis_on_grid(&trunc, &grid)?;
        Ok(Self { trunc, grid, potential, table })
    }

    pub fn density(&self, q: &DensityMatrix) -> Result<Field2D> {
        density_from_table(q, &self.grid, &self.table)
    }
}

impl Coupling for GridCoupling {
    fn truncation(&self) -> LandauTruncation {
        self.trunc
    }

    fn mean_field_matrix(&self, q: &DensityMatrix) -> Result<Vec<C64>> {
        let u = mean_field(&self.density(q)?, &self.potential)?;
        let dim = self.trunc.dim();
        let area = self.grid.cell_area();
        let rows: Vec<Vec<C64>> = (0..dim)
            .into_par_iter()
            .map(|a| {
                (0..dim)
                    .map(|b| {
                        let s: C64 = u
                            .data
                            .iter()
                            .zip(&self.table[b])
                            .zip(&self.table[a])
                            .map(|((w, eb), ea)| w * eb * ea.conj())
                            .sum();
                        s * area
                    })
                    .collect()
            })
            .collect();
        let mut m: Vec<C64> = rows.into_iter().flatten().collect();
        if q.hermitian {
            for a in 0..dim {
                for b in a + 1..dim {
                    m[b * dim + a] = m[a * dim + b].conj();
                }
                m[a * dim + a].im = 0.0;
            }
        }
        Ok(m)
    }

    fn interaction_energy(&self, q: &DensityMatrix) -> Result<f64> {
        let rho = self.density(q)?;
        let u = mean_field(&rho, &self.potential)?;
        Ok(0.5 * u.inner(&rho).re)
    }

    fn density_l2_sq(&self, q: &DensityMatrix) -> Result<f64> {
        Ok(self.density(q)?.norm().powi(2))
    }
}

/// `E(Q) = Σ 2bk_a q_aa + ½∫(v*ρ_Q)ρ_Q`.
pub fn energy(q: &DensityMatrix, coupling: &dyn Coupling) -> Result<f64> {
    let t = q.trunc;
    let n = t.dim();
    let kinetic: f64 = (0..n).map(|a| 2.0 * t.b * t.pair(a).0 as f64 * q.data[a * n + a].re).sum();
    Ok(kinetic + coupling.interaction_energy(q)?)
}

/// `‖⟨H_x⟩^{s/2}⟨H̄_y⟩^{s/2} Q‖_{HS}`: both sides weighted by their level.
pub fn two_sided_weighted_norm(q: &DensityMatrix, s: f64) -> f64 {
    let t = q.trunc;
    let n = t.dim();
    let w: Vec<f64> = (0..n).map(|a| japanese(2.0 * t.b * t.pair(a).0 as f64).powf(s)).collect();
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            acc += w[a] * w[b] * q.data[a * n + b].norm_sqr();
        }
    }
    acc.sqrt()
}

/// `C = X Y` for square row-major complex matrices.
fn matmul(x: &[C64], y: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    // SAFETY: Complex64 is repr(C) with two f64 fields, the slices hold n·n
    // elements and the strides describe row-major storage.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            n,
            n,
            n,
            [1.0, 0.0],
            x.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            y.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
    out
}

/// `−i[M, G]`. When both are Hermitian only `MG` is formed and the
/// commutator is `MG − (MG)†`, which keeps the result exactly Hermitian.
fn neg_i_commutator(m: &[C64], g: &[C64], n: usize, hermitian: bool) -> Vec<C64> {
    let mg = matmul(m, g, n);
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    if hermitian {
        for a in 0..n {
            for b in a..n {
                let c = mg[a * n + b] - mg[b * n + a].conj();
                let v = C64::new(c.im, -c.re);
                out[a * n + b] = v;
                out[b * n + a] = v.conj();
            }
        }
    } else {
        let gm = matmul(g, m, n);
        for i in 0..n * n {
            let c = mg[i] - gm[i];
            out[i] = C64::new(c.im, -c.re);
        }
    }
    out
}

/// One row of the recorded time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observables {
    pub t: f64,
    pub trace_re: f64,
    pub trace_im: f64,
    pub hs_norm: f64,
    pub energy: f64,
    pub weighted_norm: f64,
    pub rho_l2: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: Vec<Observables>,
    pub final_q: DensityMatrix,
    pub snapshots: Vec<(f64, DensityMatrix)>,
}

/// Perturbation dynamics around a level-diagonal stationary state `Π̄`.
/// With `Π̄ = 0` the same equations evolve `γ` itself.
pub struct Dynamics<'a> {
    coupling: &'a dyn Coupling,
    pi_bar: DensityMatrix,
}

impl<'a> Dynamics<'a> {
    pub fn new(coupling: &'a dyn Coupling, pi_bar: DensityMatrix) -> Result<Self> {
        if pi_bar.trunc != coupling.truncation() {
            return param("stationary state and coupling use different truncations");
        }
        let t = pi_bar.trunc;
        let n = t.dim();
        for a in 0..n {
            for b in 0..n {
                if a != b && pi_bar.data[a * n + b] != C64::new(0.0, 0.0) && t.pair(a).0 != t.pair(b).0 {
                    return param("stationary state must be diagonal in the Landau level");
                }
            }
        }
        Ok(Self { coupling, pi_bar })
    }

    /// Evolution of the unperturbed equation for `γ` (no background).
    pub fn unperturbed(coupling: &'a dyn Coupling) -> Self {
        Self { coupling, pi_bar: DensityMatrix::zeros(coupling.truncation()) }
    }

    pub fn pi_bar(&self) -> &DensityMatrix {
        &self.pi_bar
    }

    fn check_shape(&self, q: &DensityMatrix) -> Result<()> {
        if q.trunc != self.pi_bar.trunc {
            return param("density matrix truncation does not match the dynamics");
        }
        Ok(())
    }

    /// `−i[M(Q), Q + Π̄]`.
    fn interaction(&self, q: &DensityMatrix) -> Result<Vec<C64>> {
        let m = self.coupling.mean_field_matrix(q)?;
        let g = q.plus(&self.pi_bar)?;
        Ok(neg_i_commutator(&m, &g.data, q.dim(), g.hermitian))
    }

    /// Full right-hand side `−i([H, Q] + [M, Q + Π̄])`.
    pub fn rhs(&self, q: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_shape(q)?;
        let mut f = self.interaction(q)?;
        let t = q.trunc;
        let n = t.dim();
        for a in 0..n {
            let ka = t.pair(a).0 as f64;
            for b in 0..n {
                let dk = ka - t.pair(b).0 as f64;
                let c = q.data[a * n + b] * (2.0 * t.b * dk);
                f[a * n + b] += C64::new(c.im, -c.re);
            }
        }
        Ok(DensityMatrix { trunc: t, data: f, hermitian: q.hermitian })
    }

    /// Free phases `e^{-2ib(k_a − k_b)τ}` as a full matrix.
    fn phases(&self, tau: f64) -> Vec<C64> {
        let t = self.pi_bar.trunc;
        let kk = t.k_levels as i64;
        let table: Vec<C64> =
            (-(kk - 1)..kk).map(|d| C64::from_polar(1.0, -2.0 * t.b * d as f64 * tau)).collect();
        let n = t.dim();
        let mut out = Vec::with_capacity(n * n);
        for a in 0..n {
            let ka = t.pair(a).0 as i64;
            for b in 0..n {
                out.push(table[(ka - t.pair(b).0 as i64 + kk - 1) as usize]);
            }
        }
        out
    }

    /// One integrating-factor RK4 step of length `dt`. The rotating frame is
    /// re-anchored at the start of every step, so the free rotation is exact.
    pub fn step(&self, q: &DensityMatrix, dt: f64) -> Result<DensityMatrix> {
        self.check_shape(q)?;
        let half = self.phases(dt / 2.0);
        let full = self.phases(dt);
        let hermitian = q.hermitian;
        let trunc = q.trunc;
        // stage derivative in the rotating frame at frame time τ
        let stage = |frame: &[C64], phase: Option<&[C64]>| -> Result<Vec<C64>> {
            let lab: Vec<C64> = match phase {
                Some(p) => frame.iter().zip(p).map(|(x, y)| x * y).collect(),
                None => frame.to_vec(),
            };
            let f = self.interaction(&DensityMatrix { trunc, data: lab, hermitian })?;
            Ok(match phase {
                Some(p) => f.iter().zip(p).map(|(x, y)| x * y.conj()).collect(),
                None => f,
            })
        };
        let axpy = |x: &[C64], k: &[C64], s: f64| -> Vec<C64> {
            x.iter().zip(k).map(|(a, b)| a + b * s).collect()
        };
        let q0 = &q.data;
        let k1 = stage(q0, None)?;
        let k2 = stage(&axpy(q0, &k1, dt / 2.0), Some(&half))?;
        let k3 = stage(&axpy(q0, &k2, dt / 2.0), Some(&half))?;
        let k4 = stage(&axpy(q0, &k3, dt), Some(&full))?;
        let data = (0..q0.len())
            .map(|i| (q0[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0)) * full[i])
            .collect();
        Ok(DensityMatrix { trunc, data, hermitian })
    }

    pub fn observe(&self, q: &DensityMatrix, t: f64) -> Result<Observables> {
        let tr = q.trace();
        Ok(Observables {
            t,
            trace_re: tr.re,
            trace_im: tr.im,
            hs_norm: q.hs_norm(),
            energy: energy(q, self.coupling)?,
            weighted_norm: two_sided_weighted_norm(q, 1.0),
            rho_l2: self.coupling.density_l2_sq(q)?.max(0.0).sqrt(),
        })
    }

    /// Integrates from `q0` to `t_final`. Observables are recorded at `t = 0`
    /// and after every step; `snapshot_every > 0` also keeps every such state.
    pub fn run(&self, q0: &DensityMatrix, t_final: f64, dt: f64, snapshot_every: usize) -> Result<RunOutput> {
        if !(dt > 0.0 && dt.is_finite()) {
            return param(format!("time step must be positive, got {dt}"));
        }
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return param(format!("final time must be non-negative, got {t_final}"));
        }
        self.check_shape(q0)?;
        let steps = ((t_final / dt) - 1e-9).ceil().max(0.0) as usize;
        let mut q = q0.clone();
        let mut series = vec![self.observe(&q, 0.0)?];
        let mut snapshots = Vec::new();
        if snapshot_every > 0 {
            snapshots.push((0.0, q.clone()));
        }
        let mut t = 0.0;
        for s in 1..=steps {
            let h = if s == steps { t_final - t } else { dt };
            q = self.step(&q, h)?;
            t = if s == steps { t_final } else { s as f64 * dt };
            if q.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::Divergence { step: s, detail: "non-finite matrix entry".into() });
            }
            series.push(self.observe(&q, t)?);
            if snapshot_every > 0 && s % snapshot_every == 0 {
                snapshots.push((t, q.clone()));
            }
        }
        Ok(RunOutput { series, final_q: q, snapshots })
    }
}
