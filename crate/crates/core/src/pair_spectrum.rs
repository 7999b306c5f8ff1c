//! Closed-form Fourier transforms of basis products `e_a ē_b`.
//!
//! `∫ e^{iξ·x} e_a(x) ē_b(x) dx = V(h_{j_a}, h_{j_b})(c) · conj V(h_{k_a}, h_{k_b})(c)`
//! with `c = (−ξ², ξ¹)/b`. In polar form this is
//! `v_{j_a j_b}(r) v_{k_a k_b}(r) e^{iμψ}`, `r = |ξ|/b`, with the angular mode
//! `μ = (j_a − j_b) − (k_a − k_b)`. Radial integrals of products of these
//! profiles are polynomials in `λ = b r²/2` against exponentials, so
//! Gauss–Laguerre rules in `λ` evaluate them exactly.

use num_complex::Complex64 as C64;

use crate::density::DensityMatrix;
use crate::landau::LandauTruncation;
use crate::phase_space::fourier_wigner_hermite;
use crate::phase_space::fourier_wigner_radial;
use crate::specfun::GaussLaguerre;

/// `∫ e^{iξ·x} e_a(x) ē_b(x) dx` for basis pairs `a = (k_a, j_a)`, `b = (k_b, j_b)`.
pub fn pair_transform(a: (usize, usize), b: (usize, usize), xi: [f64; 2], field: f64) -> C64 {
    let (c1, c2) = (-xi[1] / field, xi[0] / field);
    fourier_wigner_hermite(a.1, b.1, c1, c2, field)
        * fourier_wigner_hermite(a.0, b.0, c1, c2, field).conj()
}

/// Nodes and weights for `∫_0^∞ λ^c F(λ) dλ` when `F` decays like `e^{-κλ}`
/// (the exponential must be part of `F`).
#[derive(Debug, Clone)]
pub struct LambdaRule {
    pub lambdas: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LambdaRule {
    pub fn new(nodes: usize, c: f64, kappa: f64) -> Self {
        let gl = GaussLaguerre::new(nodes, c);
        let scale = kappa.powf(-c - 1.0);
        Self {
            lambdas: gl.nodes.iter().map(|x| x / kappa).collect(),
            weights: gl.scaled_weights.iter().map(|w| w * scale).collect(),
        }
    }

    /// Node count that integrates products of two profiles and two radial
    /// factors exactly for the truncation.
    pub fn exact_nodes(trunc: &LandauTruncation) -> usize {
        trunc.k_levels + trunc.j_count + 4
    }
}

/// Radial profile tables of a truncation at fixed `λ` nodes.
#[derive(Debug, Clone)]
pub struct PairSpectrum {
    pub trunc: LandauTruncation,
    pub rule: LambdaRule,
    vj: Vec<f64>,
    vk: Vec<f64>,
}

impl PairSpectrum {
    pub fn new(trunc: LandauTruncation, rule: LambdaRule) -> Self {
        let b = trunc.b;
        let nn = rule.lambdas.len();
        let radii: Vec<f64> = rule.lambdas.iter().map(|l| (2.0 * l / b).sqrt()).collect();
        let table = |m: usize| {
            let mut t = vec![0.0; m * m * nn];
            for p in 0..m {
                for q in 0..m {
                    for (n, r) in radii.iter().enumerate() {
                        t[(p * m + q) * nn + n] = fourier_wigner_radial(p, q, *r, b);
                    }
                }
            }
            t
        };
        let vj = table(trunc.j_count);
        let vk = table(trunc.k_levels);
        Self { trunc, rule, vj, vk }
    }

    pub fn nodes(&self) -> usize {
        self.rule.lambdas.len()
    }

    /// Number of angular modes, `μ ∈ [−(J+K−2), J+K−2]`.
    pub fn modes(&self) -> usize {
        2 * (self.trunc.j_count + self.trunc.k_levels - 2) + 1
    }

    fn mode_index(&self, a: usize, b: usize) -> usize {
        let (ka, ja) = self.trunc.pair(a);
        let (kb, jb) = self.trunc.pair(b);
        let mu = (ja as i64 - jb as i64) - (ka as i64 - kb as i64);
        (mu + (self.trunc.j_count + self.trunc.k_levels - 2) as i64) as usize
    }

    fn profile_of(&self, a: usize, b: usize) -> (&[f64], &[f64]) {
        let nn = self.nodes();
        let (ka, ja) = self.trunc.pair(a);
        let (kb, jb) = self.trunc.pair(b);
        let j = (ja * self.trunc.j_count + jb) * nn;
        let k = (ka * self.trunc.k_levels + kb) * nn;
        (&self.vj[j..j + nn], &self.vk[k..k + nn])
    }

    /// Angular profiles `P_μ(λ_n) = Σ_{μ_ab = μ} q_ab v_{j_a j_b} v_{k_a k_b}`,
    /// restricted to entries with `k_a − k_b = level_offset` when given.
    /// Layout: `[μ][n]`.
    pub fn profiles(&self, q: &DensityMatrix, level_offset: Option<i64>) -> Vec<C64> {
        let nn = self.nodes();
        let dim = self.trunc.dim();
        let mut out = vec![C64::new(0.0, 0.0); self.modes() * nn];
        for a in 0..dim {
            let ka = self.trunc.pair(a).0 as i64;
            for b in 0..dim {
                let qab = q.data[a * dim + b];
                if qab == C64::new(0.0, 0.0) {
                    continue;
                }
                if let Some(m) = level_offset {
                    if ka - self.trunc.pair(b).0 as i64 != m {
                        continue;
                    }
                }
                let (vj, vk) = self.profile_of(a, b);
                let row = &mut out[self.mode_index(a, b) * nn..][..nn];
                for n in 0..nn {
                    row[n] += qab * (vj[n] * vk[n]);
                }
            }
        }
        out
    }

    /// `Σ_μ Σ_n w_n f(λ_n) |P_μ(λ_n)|²`.
    pub fn weighted_square(&self, profiles: &[C64], f: impl Fn(f64) -> f64) -> f64 {
        let nn = self.nodes();
        let fw: Vec<f64> = (0..nn).map(|n| self.rule.weights[n] * f(self.rule.lambdas[n])).collect();
        profiles.chunks(nn).map(|p| p.iter().zip(&fw).map(|(z, w)| w * z.norm_sqr()).sum::<f64>()).sum()
    }

    /// Matrix `X_ab = Σ_n w_n f(λ_n) P_{μ_ab}(λ_n) v_{j_a j_b}(λ_n) v_{k_a k_b}(λ_n)`,
    /// row-major. When `hermitian`, only `a ≤ b` is computed and the rest is
    /// filled by conjugation.
    pub fn contract(&self, profiles: &[C64], f: impl Fn(f64) -> f64, hermitian: bool) -> Vec<C64> {
        let nn = self.nodes();
        let dim = self.trunc.dim();
        let fw: Vec<f64> = (0..nn).map(|n| self.rule.weights[n] * f(self.rule.lambdas[n])).collect();
        let mut out = vec![C64::new(0.0, 0.0); dim * dim];
        for a in 0..dim {
            let start = if hermitian { a } else { 0 };
            for b in start..dim {
                let (vj, vk) = self.profile_of(a, b);
                let p = &profiles[self.mode_index(a, b) * nn..][..nn];
                let mut acc = C64::new(0.0, 0.0);
                for n in 0..nn {
                    acc += p[n] * (fw[n] * vj[n] * vk[n]);
                }
                out[a * dim + b] = acc;
                if hermitian && a != b {
                    out[b * dim + a] = acc.conj();
                }
            }
            if hermitian {
                out[a * dim + a].im = 0.0;
            }
        }
        out
    }
}
