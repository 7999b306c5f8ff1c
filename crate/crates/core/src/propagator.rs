//! Free evolution `e^{-iHt}`: exact on Landau coefficients, and by the
//! closed-form integral kernel on grid fields.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::grid::{fft2, Field2D};
use crate::landau::WaveFunction2D;
use crate::nufft;

/// Smallest `|sin(bt)|` accepted by the kernel path.
pub const SIN_GUARD: f64 = 1e-3;

/// Mass fraction ignored when measuring the spatial and spectral extent of a field.
const EXTENT_MASS: f64 = 1e-20;

/// Reduces `t` into `[0, π/b)`. The flag is set when `t` is a multiple of
/// `π/b` up to relative rounding, where the evolution is the identity.
pub fn reduce_time(t: f64, b: f64) -> (f64, bool) {
    let period = PI / b;
    let cycles = t / period;
    if (cycles - cycles.round()).abs() < 1e-12 {
        return (0.0, true);
    }
    (t - cycles.floor() * period, false)
}

/// `c_{kj} ↦ e^{-2ibkt} c_{kj}`.
pub fn propagate_spectral(f: &WaveFunction2D, t: f64) -> WaveFunction2D {
    let tr = f.trunc;
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| c * C64::from_polar(1.0, -2.0 * tr.b * tr.pair(idx).0 as f64 * t))
        .collect();
    WaveFunction2D { trunc: tr, coeffs }
}

/// `q_ab ↦ e^{-2ib(k_a − k_b)t} q_ab`.
pub fn propagate_density(q: &DensityMatrix, t: f64) -> DensityMatrix {
    let tr = q.trunc;
    let n = tr.dim();
    let mut out = q.clone();
    for a in 0..n {
        let ka = tr.pair(a).0 as f64;
        for b in 0..n {
            let kb = tr.pair(b).0 as f64;
            out.data[a * n + b] *= C64::from_polar(1.0, -2.0 * tr.b * (ka - kb) * t);
        }
    }
    out
}

/// Kernel-form evolution of a grid field.
///
/// The kernel factorizes as `e^{iα|x|²} e^{iα|y|²} e^{-i x·My}` with
/// `α = b/(4 tan bt)` and `M = [[2α, b/2], [−b/2, 2α]]`, so the integral over
/// `y` is one type-1 NUFFT. Sources are taken on a refined copy of the grid
/// (band-limited interpolation) whose spacing keeps the discrete sum free of
/// aliasing over the whole output square.
pub fn propagate_kernel(field: &Field2D, t: f64, b: f64) -> Result<Field2D> {
    let (tr, identity) = reduce_time(t, b);
    if identity {
        return Ok(field.clone());
    }
    let sin_bt = (b * tr).sin();
    if sin_bt.abs() < SIN_GUARD {
        return Err(Error::NearCaustic { t, sin_bt });
    }
    let grid = field.grid;
    let alpha = b / (4.0 * (b * tr).tan());
    let beta = b / 2.0;
    let pref = C64::from_polar(1.0, b * tr) * (b / (4.0 * PI * sin_bt)) * C64::new(0.0, -1.0);

    let n_fine = source_grid_size(field, alpha, beta);
    let fine = upsample(field, n_fine);
    let hf = 2.0 * grid.radius / n_fine as f64;
    let h = grid.spacing();
    let half_f = (n_fine / 2) as f64;

    let mut points = Vec::with_capacity(n_fine * n_fine);
    let mut strengths = Vec::with_capacity(n_fine * n_fine);
    for l1 in 0..n_fine {
        let m1 = l1 as f64 - half_f;
        for l2 in 0..n_fine {
            let m2 = l2 as f64 - half_f;
            let (y1, y2) = (m1 * hf, m2 * hf);
            let g = fine[l1 * n_fine + l2] * C64::from_polar(1.0, alpha * (y1 * y1 + y2 * y2));
            let s = h * hf;
            points.push([s * (2.0 * alpha * m1 + beta * m2), s * (-beta * m1 + 2.0 * alpha * m2)]);
            strengths.push(g);
        }
    }
    let sums = nufft::type1_2d(&points, &strengths, grid.n);
    let data = sums
        .into_iter()
        .enumerate()
        .map(|(idx, s)| {
            let (x1, x2) = grid.point(idx);
            pref * C64::from_polar(hf * hf, alpha * (x1 * x1 + x2 * x2)) * s
        })
        .collect();
    Ok(Field2D { grid, data })
}

/// Power-of-two source grid size (at least the input size) for which the
/// trapezoid sum of the kernel integral does not alias onto any output point.
pub fn source_grid_size(field: &Field2D, alpha: f64, beta: f64) -> usize {
    let grid = field.grid;
    let r_f = spatial_extent(field);
    let k_f = spectral_extent(field);
    let band = 2.0 * alpha.abs() * r_f + k_f;
    let stretch = (4.0 * alpha * alpha + beta * beta).sqrt();
    let needed = band + stretch * grid.radius * std::f64::consts::SQRT_2;
    let h_max = 2.0 * PI / needed;
    let mut n = grid.n;
    while 2.0 * grid.radius / n as f64 > h_max {
        n *= 2;
    }
    n
}

fn extent_from(mut weighted: Vec<(f64, f64)>) -> f64 {
    let total: f64 = weighted.iter().map(|w| w.1).sum();
    if total == 0.0 {
        return 0.0;
    }
    weighted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut outside = 0.0;
    for (r, m) in weighted {
        outside += m;
        if outside > EXTENT_MASS * total {
            return r;
        }
    }
    0.0
}

/// Radius outside which the field carries a negligible share of its mass.
fn spatial_extent(field: &Field2D) -> f64 {
    let g = field.grid;
    extent_from(
        field
            .data
            .iter()
            .enumerate()
            .map(|(idx, z)| {
                let (x1, x2) = g.point(idx);
                (x1.hypot(x2), z.norm_sqr())
            })
            .collect(),
    )
}

/// Frequency radius outside which the field's spectrum is negligible.
fn spectral_extent(field: &Field2D) -> f64 {
    let g = field.grid;
    let mut spec = field.data.clone();
    fft2(&mut spec, g.n, false);
    extent_from(
        spec.iter()
            .enumerate()
            .map(|(idx, z)| (g.frequency(idx / g.n).hypot(g.frequency(idx % g.n)), z.norm_sqr()))
            .collect(),
    )
}

/// Band-limited interpolation of a grid field onto an `m × m` grid over the
/// same square (zero padding of the discrete spectrum).
fn upsample(field: &Field2D, m: usize) -> Vec<C64> {
    let n = field.grid.n;
    if m == n {
        return field.data.clone();
    }
    let mut spec = field.data.clone();
    fft2(&mut spec, n, false);
    let mut big = vec![C64::new(0.0, 0.0); m * m];
    let map = |i: usize| if i < n / 2 { i } else { m - n + i };
    for i1 in 0..n {
        for i2 in 0..n {
            big[map(i1) * m + map(i2)] = spec[i1 * n + i2];
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    let plan = planner.plan_fft_inverse(m);
    // inverse along rows, then columns
    for row in big.chunks_mut(m) {
        plan.process(row);
    }
    let mut col = vec![C64::new(0.0, 0.0); m];
    for c in 0..m {
        for r in 0..m {
            col[r] = big[r * m + c];
        }
        plan.process(&mut col);
        for r in 0..m {
            big[r * m + c] = col[r];
        }
    }
    let scale = 1.0 / (n * n) as f64;
    big.iter_mut().for_each(|z| *z *= scale);
    big
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;
    use crate::landau::{synthesize, LandauTruncation};

    #[test]
    fn time_reduction() {
        let b = 2.0;
        assert_eq!(reduce_time(PI / b, b), (0.0, true));
        assert_eq!(reduce_time(0.0, b), (0.0, true));
        let (tr, id) = reduce_time(PI / b + 0.3, b);
        assert!(!id && (tr - 0.3).abs() < 1e-14);
        let (tr, _) = reduce_time(-0.2, b);
        assert!((tr - (PI / b - 0.2)).abs() < 1e-14);
    }

    #[test]
    fn spectral_phases() {
        let t = LandauTruncation::new(3, 2, 1.5).unwrap();
        let f = WaveFunction2D::basis(t, 1, 0).unwrap();
        let g = propagate_spectral(&f, 0.4);
        assert!((g.get(1, 0) - C64::from_polar(1.0, -2.0 * 1.5 * 0.4)).norm() < 1e-15);
        let back = propagate_spectral(&f, PI / 1.5);
        assert!((back.get(1, 0) - 1.0).norm() < 1e-14);
        let q = DensityMatrix::hermitian_pair(t, (0, 0), (2, 1)).unwrap();
        let p = propagate_density(&q, 0.3);
        assert!((p.hs_norm() - q.hs_norm()).abs() < 1e-15);
        let diag = DensityMatrix::hermitian_pair(t, (1, 0), (1, 1)).unwrap();
        assert_eq!(propagate_density(&diag, 0.7), diag);
    }

    #[test]
    fn upsampling_interpolates_band_limited_fields() {
        let grid = Grid2D::new(8.0, 64, 1.0).unwrap();
        let f = Field2D::from_fn(grid, |x, y| C64::new((-(x * x + y * y) / 2.0).exp(), x * (-(x * x + y * y)).exp()));
        let big = upsample(&f, 128);
        let fine = Grid2D::new(8.0, 128, 1.0).unwrap();
        for idx in (0..fine.len()).step_by(97) {
            let (x, y) = fine.point(idx);
            let exact = C64::new((-(x * x + y * y) / 2.0).exp(), x * (-(x * x + y * y)).exp());
            assert!((big[idx] - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn kernel_reproduces_eigenphase_and_guards_caustics() {
        let b = 1.0;
        let t = LandauTruncation::new(3, 3, b).unwrap();
        let grid = t.default_grid();
        let f = WaveFunction2D::basis(t, 2, 1).unwrap();
        let field = synthesize(&f, &grid).unwrap();
        let out = propagate_kernel(&field, 0.7 / b, b).unwrap();
        let expect = synthesize(&propagate_spectral(&f, 0.7 / b), &grid).unwrap();
        let err = out.rel_l2_distance(&expect);
        assert!(err < 1e-6, "relative error {err:e}");
        assert!(matches!(propagate_kernel(&field, PI / b - 1e-5, b), Err(Error::NearCaustic { .. })));
        assert_eq!(propagate_kernel(&field, 2.0 * PI / b, b).unwrap(), field);
    }
}
