//! Truncated density matrices over the Landau basis.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Result};
use crate::landau::LandauTruncation;

/// Tolerance of the Hermitian flag.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Operator `Q = Σ q_ab |e_a⟩⟨e_b|`, stored row-major with flat basis indices.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub trunc: LandauTruncation,
    pub data: Vec<C64>,
    pub hermitian: bool,
}

impl DensityMatrix {
    pub fn zeros(trunc: LandauTruncation) -> Self {
        Self { trunc, data: vec![C64::new(0.0, 0.0); trunc.dim() * trunc.dim()], hermitian: true }
    }

    /// Wraps raw entries; a `hermitian` claim is checked entrywise.
    pub fn from_data(trunc: LandauTruncation, data: Vec<C64>, hermitian: bool) -> Result<Self> {
        let n = trunc.dim();
        if data.len() != n * n {
            return param(format!("expected {} entries, got {}", n * n, data.len()));
        }
        let q = Self { trunc, data, hermitian: false };
        if hermitian && q.hermitian_defect() > HERMITIAN_TOL {
            return param(format!(
                "matrix flagged Hermitian has defect {:.3e}",
                q.hermitian_defect()
            ));
        }
        Ok(Self { hermitian, ..q })
    }

    /// `|e_{(k,j)}⟩⟨e_{(k',j')}|`.
    pub fn outer(trunc: LandauTruncation, a: (usize, usize), b: (usize, usize)) -> Result<Self> {
        for &(k, j) in &[a, b] {
            if k >= trunc.k_levels || j >= trunc.j_count {
                return param(format!("basis index ({k},{j}) outside the truncation"));
            }
        }
        let mut q = Self::zeros(trunc);
        let (ia, ib) = (trunc.index(a.0, a.1), trunc.index(b.0, b.1));
        q.data[ia * trunc.dim() + ib] = C64::new(1.0, 0.0);
        q.hermitian = ia == ib;
        Ok(q)
    }

    /// `|e_a⟩⟨e_b| + |e_b⟩⟨e_a|` (or the projector when `a = b`).
    pub fn hermitian_pair(trunc: LandauTruncation, a: (usize, usize), b: (usize, usize)) -> Result<Self> {
        let mut q = Self::outer(trunc, a, b)?;
        if a != b {
            let (ia, ib) = (trunc.index(a.0, a.1), trunc.index(b.0, b.1));
            q.data[ib * trunc.dim() + ia] = C64::new(1.0, 0.0);
        }
        q.hermitian = true;
        Ok(q)
    }

    /// Hermitian matrix with independent complex Gaussian entries, scaled to
    /// the requested Hilbert–Schmidt norm.
    pub fn random_hermitian<R: Rng>(trunc: LandauTruncation, rng: &mut R, hs_norm: f64) -> Self {
        let n = trunc.dim();
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for a in 0..n {
            for b in a..n {
                let re: f64 = rng.sample(StandardNormal);
                if a == b {
                    data[a * n + a] = C64::new(re, 0.0);
                } else {
                    let im: f64 = rng.sample(StandardNormal);
                    let z = C64::new(re, im) / std::f64::consts::SQRT_2;
                    data[a * n + b] = z;
                    data[b * n + a] = z.conj();
                }
            }
        }
        let mut q = Self { trunc, data, hermitian: true };
        let norm = q.hs_norm();
        if norm > 0.0 {
            q.scale(hs_norm / norm);
        }
        q
    }

    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.data[a * self.dim() + b]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|a| self.get(a, a)).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in a..n {
                worst = worst.max((self.get(a, b) - self.get(b, a).conj()).norm());
            }
        }
        worst
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|z| *z *= s);
    }

    /// `self + other`; the result is Hermitian when both operands are.
    pub fn plus(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.trunc != other.trunc {
            return param("density matrices have different truncations");
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { trunc: self.trunc, data, hermitian: self.hermitian && other.hermitian })
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim();
        let m = DMatrix::from_fn(n, n, |a, b| (self.get(a, b) + self.get(b, a).conj()) * 0.5);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}
