//! Both sides of the collapsing estimate
//! `‖|∇|^c ρ_{Q(t)}‖_{L²_t([0,π/b]) L²_x} ≲ ‖⟨H_x⟩^{s/2}⟨H̄_y⟩^{s/2} Q_0‖_{HS}`
//! for free evolution, and the level-offset sums of Fourier–Wigner suprema
//! that control the constant.
//!
//! Under free evolution `ρ(t) = Σ_m e^{-2ibmt} ρ_m` with `ρ_m` collecting the
//! entries of level offset `k_a − k_b = m`, so the time integral over one
//! period is `(π/b) Σ_m ‖|∇|^c ρ_m‖²` exactly.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::density::DensityMatrix;
use crate::error::{param, Result};
use crate::grid::{fft2, Field2D, Grid2D};
use crate::landau::{basis_on_grid, check_grid, japanese, LandauTruncation};
use crate::pair_spectrum::{LambdaRule, PairSpectrum};
use crate::phase_space::fourier_wigner_hermite;
use crate::specfun::weighted_laguerre_extremum;
use crate::propagator::propagate_density;

/// Largest `c` covered by the boundedness theorem (exclusive).
pub const THEOREM_C_LIMIT: f64 = 1.25;
/// Largest `c` accepted for exploration.
pub const EXPLORATION_C_LIMIT: f64 = 2.0;

fn check_c(c: f64) -> Result<()> {
    if !(0.0..=EXPLORATION_C_LIMIT).contains(&c) {
        return param(format!("derivative order c must lie in [0, 2], got {c}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollapseReport {
    pub c: f64,
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

impl CollapseReport {
    pub fn new(q: &DensityMatrix, c: f64, s: f64) -> Result<Self> {
        let lhs = collapsing_lhs(q, c)?;
        let rhs = collapsing_rhs(q, s);
        let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
        Ok(Self { c, s, lhs, rhs, ratio })
    }

    pub fn exploratory(&self) -> bool {
        self.c >= THEOREM_C_LIMIT
    }
}

/// Space-time norm of `|∇|^c ρ` over one period, from the closed-form pair
/// spectrum (exact for the truncation up to rounding).
///
/// With `λ = |ξ|²/(2b)` each level-offset group contributes
/// `(2π)^{-1} b (2b)^c Σ_μ ∫ λ^c |P_μ(λ)|² dλ`.
pub fn collapsing_lhs(q: &DensityMatrix, c: f64) -> Result<f64> {
    check_c(c)?;
    let t = q.trunc;
    let spectrum = PairSpectrum::new(t, LambdaRule::new(LambdaRule::exact_nodes(&t), c, 2.0));
    let kk = t.k_levels as i64;
    let total: f64 = (-(kk - 1)..kk)
        .map(|m| spectrum.weighted_square(&spectrum.profiles(q, Some(m)), |_| 1.0))
        .sum();
    let per_group = t.b * (2.0 * t.b).powf(c) / (2.0 * PI);
    Ok((PI / t.b * per_group * total).sqrt())
}

/// Grid version of [`collapsing_lhs`]: synthesizes every `ρ_m` on the grid and
/// applies `|ξ|^c` to its discrete Fourier modes.
pub fn collapsing_lhs_grid(q: &DensityMatrix, c: f64, grid: &Grid2D) -> Result<f64> {
    check_c(c)?;
    let t = q.trunc;
    check_grid(&t, grid)?;
    let table = basis_on_grid(&t, grid)?;
    let groups = level_offset_densities(q, grid, &table);
    let total: f64 = groups.iter().map(|f| fractional_gradient_norm_sq(f, c)).sum();
    Ok((PI / t.b * total).sqrt())
}

/// `ρ_m` for `m = −(K−1)..=K−1`, in that order.
fn level_offset_densities(q: &DensityMatrix, grid: &Grid2D, table: &[Vec<C64>]) -> Vec<Field2D> {
    let t = q.trunc;
    let dim = t.dim();
    let kk = t.k_levels;
    let per_point: Vec<Vec<C64>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let mut acc = vec![C64::new(0.0, 0.0); 2 * kk - 1];
            for a in 0..dim {
                let ea = table[a][idx];
                let ka = t.pair(a).0;
                for b in 0..dim {
                    let qab = q.data[a * dim + b];
                    if qab != C64::new(0.0, 0.0) {
                        acc[ka + kk - 1 - t.pair(b).0] += qab * ea * table[b][idx].conj();
                    }
                }
            }
            acc
        })
        .collect();
    (0..2 * kk - 1)
        .map(|m| Field2D { grid: *grid, data: per_point.iter().map(|p| p[m]).collect() })
        .collect()
}

/// `‖|∇|^c f‖²` with the multiplier applied to the discrete Fourier modes
/// (set to zero at the zero mode).
pub fn fractional_gradient_norm_sq(f: &Field2D, c: f64) -> f64 {
    let g = f.grid;
    let n = g.n;
    let mut spec = f.data.clone();
    fft2(&mut spec, n, false);
    let mut acc = 0.0;
    for i1 in 0..n {
        let k1 = g.frequency(i1);
        for i2 in 0..n {
            let k2 = g.frequency(i2);
            let r2 = k1 * k1 + k2 * k2;
            if r2 == 0.0 {
                if c == 0.0 {
                    acc += spec[i1 * n + i2].norm_sqr();
                }
                continue;
            }
            acc += r2.powf(c) * spec[i1 * n + i2].norm_sqr();
        }
    }
    acc * g.cell_area() / (n * n) as f64
}

/// `(Σ_ab ⟨2bk_a⟩^s ⟨2bk_b⟩^s |q_ab|²)^{1/2}`.
pub fn collapsing_rhs(q: &DensityMatrix, s: f64) -> f64 {
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

/// Squared space-time norm by brute force: the free evolution is sampled at
/// `samples` uniform times in `[0, π/b)` and each `‖|∇|^c ρ(t)‖²` is computed
/// on the grid. Returns `(Parseval value, brute-force value)`, both squared.
pub fn parseval_time_check(q: &DensityMatrix, c: f64, grid: &Grid2D, samples: usize) -> Result<(f64, f64)> {
    check_c(c)?;
    if samples == 0 {
        return param("need at least one time sample");
    }
    let t = q.trunc;
    check_grid(&t, grid)?;
    let table = basis_on_grid(&t, grid)?;
    let groups = level_offset_densities(q, grid, &table);
    let parseval = PI / t.b * groups.iter().map(|f| fractional_gradient_norm_sq(f, c)).sum::<f64>();
    let period = PI / t.b;
    let dim = t.dim();
    let mut brute = 0.0;
    for i in 0..samples {
        let qt = propagate_density(q, period * i as f64 / samples as f64);
        let data: Vec<C64> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..dim {
                    for b in 0..dim {
                        acc += qt.data[a * dim + b] * table[a][idx] * table[b][idx].conj();
                    }
                }
                acc
            })
            .collect();
        brute += fractional_gradient_norm_sq(&Field2D { grid: *grid, data }, c);
    }
    Ok((parseval, brute * period / samples as f64))
}

/// Ratio statistics over a seeded ensemble of random Hermitian `Q_0` of unit
/// Hilbert–Schmidt norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioExperiment {
    pub k_levels: usize,
    pub j_count: usize,
    pub seed: u64,
    pub samples: Vec<CollapseReport>,
    /// `Q_0 = |e_00⟩⟨e_00|` at `c = 0`, whose ratio is exactly 1/2.
    pub regression: CollapseReport,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    pub exploratory: bool,
}

/// Sample `i` uses stream `i` of a ChaCha8 generator seeded with `seed`, so
/// the result does not depend on thread scheduling.
pub fn ratio_experiment(
    ensemble_size: usize,
    trunc: LandauTruncation,
    c: f64,
    s: f64,
    seed: u64,
) -> Result<RatioExperiment> {
    check_c(c)?;
    if ensemble_size == 0 {
        return param("ensemble size must be positive");
    }
    if !s.is_finite() || s < 0.0 {
        return param(format!("weight exponent s must be non-negative, got {s}"));
    }
    let samples: Vec<CollapseReport> = (0..ensemble_size as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            CollapseReport::new(&DensityMatrix::random_hermitian(trunc, &mut rng, 1.0), c, s)
        })
        .collect::<Result<_>>()?;
    let regression = CollapseReport::new(&DensityMatrix::outer(trunc, (0, 0), (0, 0))?, 0.0, s)?;
    let ratios: Vec<f64> = samples.iter().map(|r| r.ratio).collect();
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<f64>() / n;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    Ok(RatioExperiment {
        k_levels: trunc.k_levels,
        j_count: trunc.j_count,
        seed,
        max: ratios.iter().copied().fold(0.0, f64::max),
        mean,
        std: var.sqrt(),
        exploratory: c >= THEOREM_C_LIMIT,
        samples,
        regression,
    })
}

/// `sup_ξ |ξ|^{2c} |V(h_j, h_k)|²(Jξ/b) = (2b)^c M̃(min, |j−k|, c)`.
pub fn fourier_wigner_sup(j: usize, k: usize, c: f64, b: f64) -> f64 {
    let (n, alpha) = if j >= k { (k, j - k) } else { (j, k - j) };
    (2.0 * b).powf(c) * weighted_laguerre_extremum(n, alpha, c).value
}

/// Same supremum by direct maximization over `ξ`: a coarse square scan
/// followed by repeated zooms around the best sample.
pub fn fourier_wigner_sup_direct(j: usize, k: usize, c: f64, b: f64) -> f64 {
    let f = |x1: f64, x2: f64| {
        let r2 = x1 * x1 + x2 * x2;
        let v = fourier_wigner_hermite(j, k, -x2 / b, x1 / b, b).norm_sqr();
        if r2 == 0.0 {
            if c == 0.0 {
                v
            } else {
                0.0
            }
        } else {
            r2.powf(c) * v
        }
    };
    // |ξ|²/(2b) beyond 2(j+k)+2c+20 lies past every lobe
    let reach = (2.0 * b * (2.0 * (j + k) as f64 + 2.0 * c + 20.0)).sqrt();
    let coarse = 400;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i1 in 0..=coarse {
        let x1 = -reach + 2.0 * reach * i1 as f64 / coarse as f64;
        for i2 in 0..=coarse {
            let x2 = -reach + 2.0 * reach * i2 as f64 / coarse as f64;
            let v = f(x1, x2);
            if v > best.0 {
                best = (v, x1, x2);
            }
        }
    }
    let mut half = 2.0 * reach / coarse as f64;
    for _ in 0..30 {
        let (_, c1, c2) = best;
        for i1 in -10..=10 {
            for i2 in -10..=10 {
                let (x1, x2) = (c1 + half * i1 as f64 / 10.0, c2 + half * i2 as f64 / 10.0);
                let v = f(x1, x2);
                if v > best.0 {
                    best = (v, x1, x2);
                }
            }
        }
        half /= 4.0;
    }
    best.0
}

/// How the remainder of a constant sum beyond `k_max` was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TailKind {
    /// Upper bound from the proven polynomial bound on `M̃`; needs `c < 2s − 1`.
    Rigorous,
    /// Last term continued with the asymptotic exponent of the unit-constant
    /// profile `(1+k)^{(2−c)/6}(k+m+1)^{(3c−2)/2}`; for `1 ≤ c < (6s−1)/4`.
    Asymptotic,
    /// The series is not summable under either estimate.
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantSum {
    pub m: usize,
    pub s: f64,
    pub c: f64,
    pub k_max: usize,
    pub b: f64,
    /// Partial sums after each `k = 0..=k_max`.
    pub partial_sums: Vec<f64>,
    pub tail: Option<f64>,
    pub tail_kind: TailKind,
}

impl ConstantSum {
    pub fn partial(&self) -> f64 {
        *self.partial_sums.last().unwrap_or(&0.0)
    }

    pub fn last_increment(&self) -> f64 {
        match self.partial_sums.len() {
            0 => 0.0,
            1 => self.partial_sums[0],
            n => self.partial_sums[n - 1] - self.partial_sums[n - 2],
        }
    }

    /// Partial sum plus tail, when a tail estimate exists.
    pub fn estimate(&self) -> Option<f64> {
        self.tail.map(|t| self.partial() + t)
    }
}

/// `S(m) = Σ_k sup_ξ |ξ|^{2c}|V(h_{k+m}, h_k)|²(Jξ/b) / (⟨2b(k+m)⟩^s ⟨2bk⟩^s)`
/// summed over `k ≤ k_max`, with a tail estimate.
pub fn constant_sum(m: usize, s: f64, c: f64, k_max: usize, b: f64) -> Result<ConstantSum> {
    check_c(c)?;
    if k_max < 1 {
        return param("k_max must be at least 1");
    }
    if !(b > 0.0 && b.is_finite()) || !s.is_finite() || s < 0.0 {
        return param(format!("need b > 0 and s >= 0, got b = {b}, s = {s}"));
    }
    let terms: Vec<f64> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let j = k + m;
            fourier_wigner_sup(j, k, c, b)
                / (japanese(2.0 * b * j as f64).powf(s) * japanese(2.0 * b * k as f64).powf(s))
        })
        .collect();
    let partial_sums: Vec<f64> = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let km = k_max as f64;
    let (tail, tail_kind) = if c < 2.0 * s - 1.0 {
        // term(k) ≤ (16bk)^c (1 + (m+c)/(2k))^c / (2bk)^{2s} for k > k_max
        let a = (16.0 * b).powf(c) * (1.0 + (m as f64 + c) / (2.0 * (km + 1.0))).powf(c) / (2.0 * b).powf(2.0 * s);
        (Some(a * km.powf(c - 2.0 * s + 1.0) / (2.0 * s - c - 1.0)), TailKind::Rigorous)
    } else if c >= 1.0 && c < (6.0 * s - 1.0) / 4.0 {
        let e = (4.0 * c - 2.0) / 3.0 - 2.0 * s;
        // Σ_{k>K} t_K (k/K)^e ≈ t_K K/(−e−1)
        (Some(terms[k_max] * km / (-e - 1.0)), TailKind::Asymptotic)
    } else {
        (None, TailKind::Divergent)
    };
    Ok(ConstantSum { m, s, c, k_max, b, partial_sums, tail, tail_kind })
}
