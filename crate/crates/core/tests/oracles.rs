//! Library values against oracles built independently in this file: exact
//! rational arithmetic, Gaussian integrals done by hand, and values frozen
//! from a 50-digit evaluation.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use landau_core::collapse::{collapsing_lhs, fourier_wigner_sup};
use landau_core::density::DensityMatrix;
use landau_core::grid::Grid2D;
use landau_core::hartree::{density, Coupling, PotentialSpec, SpectralCoupling};
use landau_core::landau::{eigenfunctions_at, projection_kernel, LandauTruncation};
use landau_core::specfun::{laguerre, weighted_laguerre_extremum, GaussLaguerre};

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `L_n^α(x) = Σ_i (−1)^i C(n+α, n−i) x^i / i!` in exact arithmetic.
fn laguerre_exact(n: usize, alpha: usize, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    let mut xi = BigRational::one();
    for i in 0..=n {
        let term = BigRational::new(binomial(n + alpha, n - i), factorial(i)) * &xi;
        if i % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        xi *= x;
    }
    acc
}

#[test]
fn laguerre_matches_exact_rationals() {
    for &(num, den) in &[(1, 3), (7, 2), (19, 4), (11, 1)] {
        let x = BigRational::new(BigInt::from(num), BigInt::from(den));
        let xf = num as f64 / den as f64;
        for n in [0, 1, 2, 5, 9, 17, 30] {
            for alpha in [0, 1, 4, 12] {
                let exact = laguerre_exact(n, alpha, &x).to_f64().unwrap();
                let got = laguerre(n, alpha, xf);
                let scale = exact.abs().max(1.0);
                assert!((got - exact).abs() < 1e-11 * scale, "L_{n}^{alpha}({xf}): {got} vs {exact}");
            }
        }
    }
}

#[test]
fn extremum_of_degree_zero_is_closed_form() {
    // M̃(0, α, c) = max λ^{α+c} e^{-λ} / α! is attained at λ = α + c
    for alpha in [0usize, 1, 3, 10, 40] {
        for c in [0.5, 1.0, 2.0] {
            let a = alpha as f64 + c;
            let ln_fact: f64 = (1..=alpha).map(|i| (i as f64).ln()).sum();
            let expect = (a * a.ln() - a - ln_fact).exp();
            let got = weighted_laguerre_extremum(0, alpha, c);
            assert!((got.value - expect).abs() < 1e-12 * expect, "α={alpha} c={c}");
            assert!((got.lambda_star - a).abs() < 1e-5 * a);
        }
    }
}

#[test]
fn extremum_frozen_high_precision_values() {
    // 50-digit evaluations (dense scan plus root of the derivative)
    let frozen = [
        (20, 0, 1.0, 1.9108005735211109),
        (20, 100, 1.0, 2.974761701592738),
        (5, 3, 1.125, 1.904305571082545),
        (12, 7, 2.0, 99.969189543267371),
        (40, 5, 1.5, 31.671907772252061),
    ];
    for (n, alpha, c, v) in frozen {
        let got = weighted_laguerre_extremum(n, alpha, c).value;
        assert!((got - v).abs() < 1e-10 * v, "M̃({n},{alpha},{c}) = {got}, frozen {v}");
    }
}

#[test]
fn gauss_laguerre_moments() {
    // ∫ x^k x^α e^{-x} dx = Γ(k+α+1)
    for alpha in [0.0, 0.5, 2.25] {
        let rule = GaussLaguerre::new(12, alpha);
        for k in 0..=20 {
            let got = rule.integrate(|x: f64| x.powi(k) * (-x).exp());
            let expect = statrs::function::gamma::gamma(k as f64 + alpha + 1.0);
            assert!((got - expect).abs() < 1e-11 * expect, "α={alpha} k={k}");
        }
    }
}

#[test]
fn supremum_at_first_offset() {
    // sup |ξ|²|V(h_1,h_0)|² = 2b · max λ² e^{-λ} = 8b e^{-2}
    for b in [0.5, 1.0, 3.0] {
        assert!((fourier_wigner_sup(1, 0, 1.0, b) - 8.0 * b * (-2.0f64).exp()).abs() < 1e-12 * b);
    }
}

#[test]
fn squared_moduli_of_low_eigenfunctions() {
    // |e_00|² = (b/2π)e^{-λ}, |e_10|² = |e_01|² = (b/2π)λe^{-λ}, λ = b|x|²/2
    let b = 1.4;
    let t = LandauTruncation::new(2, 2, b).unwrap();
    for &(x1, x2) in &[(0.0, 0.0), (0.3, -1.1), (2.0, 0.7)] {
        let lam = b * (x1 * x1 + x2 * x2) / 2.0;
        let e = eigenfunctions_at(&t, x1, x2);
        let base = b / (2.0 * PI) * (-lam).exp();
        assert!((e[t.index(0, 0)].norm_sqr() - base).abs() < 1e-15);
        assert!((e[t.index(1, 0)].norm_sqr() - base * lam).abs() < 1e-15);
        assert!((e[t.index(0, 1)].norm_sqr() - base * lam).abs() < 1e-15);
    }
}

#[test]
fn projection_kernel_is_the_angular_sum() {
    let b = 0.9;
    let t = LandauTruncation::new(3, 40, b).unwrap();
    let (x, y) = ([0.4, -0.3], [-0.2, 0.6]);
    let ex = eigenfunctions_at(&t, x[0], x[1]);
    let ey = eigenfunctions_at(&t, y[0], y[1]);
    for k in 0..3 {
        let sum: C64 = (0..40).map(|j| ex[t.index(k, j)] * ey[t.index(k, j)].conj()).sum();
        assert!((sum - projection_kernel(k, x, y, b)).norm() < 1e-14, "k={k}");
    }
}

#[test]
fn gaussian_self_interaction() {
    // ρ = |e_00|² is the normal law with variance 1/b per axis; with
    // v = A e^{-|x|²/(2σ²)}, ∫∫ρρv = A / (1 + 2/(bσ²))
    for (b, a, sigma) in [(1.0, 1.0, 1.0), (2.0, 0.7, 0.6), (0.5, -1.3, 2.0)] {
        let t = LandauTruncation::new(2, 3, b).unwrap();
        let c = SpectralCoupling::new(t, &PotentialSpec::gaussian(a, sigma).unwrap()).unwrap();
        let q = DensityMatrix::outer(t, (0, 0), (0, 0)).unwrap();
        let pair = a / (1.0 + 2.0 / (b * sigma * sigma));
        assert!((c.interaction_energy(&q).unwrap() - pair / 2.0).abs() < 1e-14);
        let m = c.mean_field_matrix(&q).unwrap();
        assert!((m[0] - pair).norm() < 1e-14);
        let l2 = c.density_l2_sq(&q).unwrap();
        assert!((l2 - b / (4.0 * PI)).abs() < 1e-14, "b={b}: {l2} vs {}", b / (4.0 * PI));
    }
}

#[test]
fn collapsing_values_from_hand_integrals() {
    // ‖ρ‖² for ρ = e_00 ē_10 is ∫ (b/2π)² λ e^{-2λ} = b/(8π)
    for b in [0.7, 1.0, 2.5] {
        let t = LandauTruncation::new(2, 2, b).unwrap();
        let q = DensityMatrix::outer(t, (0, 0), (1, 0)).unwrap();
        let expect = (PI / b * b / (8.0 * PI)).sqrt();
        assert!((collapsing_lhs(&q, 0.0).unwrap() - expect).abs() < 1e-13);
        // ∫|∇(|e_00|²)|² = b²/(4π)
        let p = DensityMatrix::outer(t, (0, 0), (0, 0)).unwrap();
        let expect = (PI / b * b * b / (4.0 * PI)).sqrt();
        assert!((collapsing_lhs(&p, 1.0).unwrap() - expect).abs() < 1e-13);
    }
}

#[test]
fn grid_density_of_a_coherent_pair() {
    // Q = |e_00⟩⟨e_01| + h.c. gives ρ = 2 Re(e_00 ē_01)
    let b = 1.0;
    let t = LandauTruncation::new(1, 2, b).unwrap();
    let grid = Grid2D::new(9.0, 64, b).unwrap();
    let q = DensityMatrix::hermitian_pair(t, (0, 0), (0, 1)).unwrap();
    let rho = density(&q, &grid).unwrap();
    for idx in (0..grid.len()).step_by(53) {
        let (x1, x2) = grid.point(idx);
        let e = eigenfunctions_at(&t, x1, x2);
        let expect = 2.0 * (e[0] * e[1].conj()).re;
        assert!((rho.data[idx].re - expect).abs() < 1e-15);
    }
}
