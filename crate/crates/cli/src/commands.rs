use std::f64::consts::PI;
use std::ops::RangeInclusive;
use std::path::Path;

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use landau_core::collapse::ratio_experiment;
use landau_core::density::DensityMatrix;
use landau_core::grid::Grid2D;
use landau_core::hartree::{
    fermi_dirac, fermi_sea, stationary_pi_bar, Coupling, Dynamics, GridCoupling, PotentialSpec, SpectralCoupling,
};
use landau_core::landau::{basis_diagnostics, synthesize, LandauTruncation, WaveFunction2D};
use landau_core::propagator::{propagate_kernel, propagate_spectral};
use landau_core::specfun::{bound_sweep, growth_fit, normalized_maximum, ln_factorial, BoundKind};

use crate::config::{CouplingKind, FermiMode, InitialQ, RunConfig};
use crate::output::{num, write_atomic, Csv};
use crate::CliError;

type Outcome = Result<(), CliError>;

/// Gate thresholds of `basis-check`.
const GRAM_LIMIT: f64 = 1e-8;
const RESIDUAL_LIMIT: f64 = 1e-5;
const PROPAGATOR_LIMIT: f64 = 1e-6;

/// `(n + j)` at which the panel-b probe splits inner and outer shells.
const SHELL_SPLIT: usize = 150;

pub fn bounds(kind: &str, n: RangeInclusive<usize>, alpha: RangeInclusive<usize>, cs: &[f64], dir: &Path) -> Outcome {
    let kind: BoundKind = kind.parse()?;
    let rows = bound_sweep(n, alpha, cs, kind)?;
    let mut csv = Csv::new(&["n", "alpha", "c", "computed", "bound", "ratio", "kind", "lambda_star", "pass"]);
    let mut failures = 0;
    for r in &rows {
        let pass = match r.passes() {
            Some(true) => "true",
            Some(false) => {
                failures += 1;
                "false"
            }
            None => "",
        };
        csv.row(&[
            r.n.to_string(),
            r.alpha.to_string(),
            num(r.c),
            num(r.computed),
            num(r.bound),
            num(r.ratio),
            kind.to_string(),
            num(r.lambda_star),
            pass.to_string(),
        ]);
    }
    let path = csv.write(dir, "bounds.csv")?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    println!("{} rows, max ratio {max_ratio:.6}, failures {failures} -> {}", rows.len(), path.display());
    Ok(())
}

pub fn figure2(panel: &str, n: RangeInclusive<usize>, j: RangeInclusive<usize>, cs: &[f64], dir: &Path) -> Outcome {
    if panel == "a" {
        let mut csv = Csv::new(&["n", "j", "log_n_j_1", "log_m", "closed_form_log_m"]);
        for nn in n {
            let fit = growth_fit(nn, j.clone())?;
            for (jj, (x, y)) in j.clone().zip(&fit.points) {
                // n = 0: max λ^{j+1} e^{-λ} / j! sits at λ = j + 1
                let closed = if nn == 0 {
                    let a = (jj + 1) as f64;
                    num(a * a.ln() - a - ln_factorial(jj))
                } else {
                    String::new()
                };
                csv.row(&[nn.to_string(), jj.to_string(), num(*x), num(*y), closed]);
            }
            println!("n = {nn}: slope {:.6}, intercept {:.6}", fit.slope, fit.intercept);
        }
        let path = csv.write(dir, "figure2a.csv")?;
        println!("-> {}", path.display());
        return Ok(());
    }
    if let Some(c) = cs.iter().find(|c| !(1.0..=2.0).contains(*c)) {
        return Err(landau_core::Error::Parameter(format!("panel b needs 1 <= c <= 2, got {c}")).into());
    }
    let mut csv = Csv::new(&["c", "n", "j", "y"]);
    for &c in cs {
        let pts: Vec<(usize, usize)> = n.clone().flat_map(|a| j.clone().map(move |b| (a, b))).collect();
        let ys: Vec<f64> = pts.par_iter().map(|&(a, b)| normalized_maximum(a, b, c)).collect();
        let (mut inner, mut outer) = (0.0f64, 0.0f64);
        for (&(a, b), &y) in pts.iter().zip(&ys) {
            csv.row(&[num(c), a.to_string(), b.to_string(), num(y)]);
            if a + b > SHELL_SPLIT {
                outer = outer.max(y);
            } else {
                inner = inner.max(y);
            }
        }
        println!("c = {c}: max y {:.6} (n+j <= {SHELL_SPLIT}: {inner:.6}, beyond: {outer:.6})", inner.max(outer));
    }
    let path = csv.write(dir, "figure2b.csv")?;
    println!("-> {}", path.display());
    Ok(())
}

/// Fixed sample state: every basis function with weight `e^{0.7ia}/√dim`.
fn sample_state(trunc: LandauTruncation) -> landau_core::Result<WaveFunction2D> {
    let dim = trunc.dim() as f64;
    let coeffs = (0..trunc.dim()).map(|a| C64::from_polar(1.0 / dim.sqrt(), 0.7 * a as f64)).collect();
    WaveFunction2D::from_coeffs(trunc, coeffs)
}

/// Relative L² distance between kernel and spectral evolution, and the
/// kernel path's norm drift.
fn propagator_agreement(trunc: LandauTruncation, grid: &Grid2D, t: f64) -> landau_core::Result<(f64, f64)> {
    let f = sample_state(trunc)?;
    let field = synthesize(&f, grid)?;
    let kernel = propagate_kernel(&field, t, trunc.b)?;
    let spectral = synthesize(&propagate_spectral(&f, t), grid)?;
    Ok((kernel.rel_l2_distance(&spectral), (kernel.norm() / field.norm() - 1.0).abs()))
}

pub fn propagate(k: usize, j: usize, b: f64, ts: &[f64], dir: &Path) -> Outcome {
    let trunc = LandauTruncation::new(k, j, b)?;
    let grid = trunc.default_grid();
    let mut csv = Csv::new(&["t", "rel_l2_error", "norm_drift"]);
    for &t in ts {
        let (err, drift) = propagator_agreement(trunc, &grid, t)?;
        println!("t = {t}: relative error {err:.3e}, norm drift {drift:.3e}");
        csv.row(&[num(t), num(err), num(drift)]);
    }
    let path = csv.write(dir, "propagate.csv")?;
    println!("-> {}", path.display());
    Ok(())
}

fn initial_state(cfg: &RunConfig, trunc: LandauTruncation) -> landau_core::Result<DensityMatrix> {
    Ok(match cfg.initial_q {
        InitialQ::Zero => DensityMatrix::zeros(trunc),
        InitialQ::BasisPair { k, j, k2, j2 } => DensityMatrix::outer(trunc, (k, j), (k2, j2))?,
        InitialQ::Random { seed, hs_norm } => {
            DensityMatrix::random_hermitian(trunc, &mut ChaCha8Rng::seed_from_u64(seed), hs_norm)
        }
    })
}

fn state_rows(csv: &mut Csv, t: Option<f64>, q: &DensityMatrix) {
    let n = q.dim();
    for a in 0..n {
        let (ka, ja) = q.trunc.pair(a);
        for b in 0..n {
            let (kb, jb) = q.trunc.pair(b);
            let z = q.get(a, b);
            let mut row = Vec::with_capacity(7);
            if let Some(t) = t {
                row.push(num(t));
            }
            row.extend([ka, ja, kb, jb].map(|v| v.to_string()));
            row.extend([num(z.re), num(z.im)]);
            csv.row(&row);
        }
    }
}

pub fn simulate(cfg: &RunConfig, dir: &Path) -> Outcome {
    let trunc = LandauTruncation::new(cfg.k_levels, cfg.j_count, cfg.b)?;
    let potential = PotentialSpec::gaussian(cfg.potential.amplitude, cfg.potential.sigma)?;
    let coupling: Box<dyn Coupling> = match cfg.coupling {
        CouplingKind::Spectral => Box::new(SpectralCoupling::new(trunc, &potential)?),
        CouplingKind::Grid => {
            let radius = if cfg.grid_radius > 0.0 { cfg.grid_radius } else { trunc.default_radius() };
            Box::new(GridCoupling::new(trunc, Grid2D::new(radius, cfg.grid_n, cfg.b)?, potential)?)
        }
    };
    let profile = match cfg.fermi.mode {
        FermiMode::Sea => fermi_sea(cfg.fermi.n, cfg.k_levels, cfg.b)?,
        FermiMode::Dirac => fermi_dirac(cfg.fermi.mu, cfg.fermi.temperature, cfg.k_levels, cfg.b)?,
    };
    let dynamics = Dynamics::new(coupling.as_ref(), stationary_pi_bar(&profile, trunc)?)?;
    let q0 = initial_state(cfg, trunc)?;
    let out = dynamics.run(&q0, cfg.t_final, cfg.dt, cfg.snapshot_every)?;

    let e0 = out.series[0].energy;
    let drift = |e: f64| if e0 == 0.0 { (e - e0).abs() } else { (e - e0).abs() / e0.abs() };
    let mut series = Csv::new(&[
        "t",
        "trace_re",
        "trace_im",
        "hs_norm",
        "energy",
        "energy_drift",
        "weighted_norm",
        "rho_l2",
    ]);
    for o in &out.series {
        series.row(&[
            num(o.t),
            num(o.trace_re),
            num(o.trace_im),
            num(o.hs_norm),
            num(o.energy),
            num(drift(o.energy)),
            num(o.weighted_norm),
            num(o.rho_l2),
        ]);
    }
    series.write(dir, "timeseries.csv")?;
    let mut last = Csv::new(&["k_a", "j_a", "k_b", "j_b", "re", "im"]);
    state_rows(&mut last, None, &out.final_q);
    last.write(dir, "final_state.csv")?;
    if !out.snapshots.is_empty() {
        let mut snaps = Csv::new(&["t", "k_a", "j_a", "k_b", "j_b", "re", "im"]);
        for (t, q) in &out.snapshots {
            state_rows(&mut snaps, Some(*t), q);
        }
        snaps.write(dir, "snapshots.csv")?;
    }
    let max_drift = out.series.iter().map(|o| drift(o.energy)).fold(0.0, f64::max);
    let tr0 = out.series[0].trace_re;
    let trace_drift = out
        .series
        .iter()
        .map(|o| (o.trace_re - tr0).hypot(o.trace_im - out.series[0].trace_im))
        .fold(0.0, f64::max);
    println!(
        "{} steps to t = {}: max energy drift {max_drift:.3e}, max trace drift {trace_drift:.3e} -> {}",
        out.series.len() - 1,
        cfg.t_final,
        dir.display()
    );
    Ok(())
}

pub fn collapse(cfg: &RunConfig, cs: &[f64], s: f64, ensemble: usize, seed: Option<u64>, dir: &Path) -> Outcome {
    let trunc = LandauTruncation::new(cfg.k_levels, cfg.j_count, cfg.b)?;
    let seed = seed.unwrap_or(match cfg.initial_q {
        InitialQ::Random { seed, .. } => seed,
        _ => 0,
    });
    let mut csv = Csv::new(&["c", "s", "K", "J", "seed_or_index", "lhs", "rhs", "ratio", "flag"]);
    let (kk, jj) = (trunc.k_levels.to_string(), trunc.j_count.to_string());
    let mut regression_written = false;
    for &c in cs {
        let exp = ratio_experiment(ensemble, trunc, c, s, seed)?;
        if !regression_written {
            let r = exp.regression;
            csv.row(&[num(r.c), num(r.s), kk.clone(), jj.clone(), "e00".into(), num(r.lhs), num(r.rhs), num(r.ratio), "REGRESSION".into()]);
            regression_written = true;
        }
        let flag = if exp.exploratory { "EXPLORATORY" } else { "" };
        for (i, r) in exp.samples.iter().enumerate() {
            csv.row(&[
                num(r.c),
                num(r.s),
                kk.clone(),
                jj.clone(),
                format!("{seed}:{i}"),
                num(r.lhs),
                num(r.rhs),
                num(r.ratio),
                flag.into(),
            ]);
        }
        println!(
            "c = {c}: max {:.6e}, mean {:.6e}, std {:.3e}{}",
            exp.max,
            exp.mean,
            exp.std,
            if exp.exploratory { " [EXPLORATORY]" } else { "" }
        );
    }
    let path = csv.write(dir, "collapse.csv")?;
    println!("-> {}", path.display());
    Ok(())
}

pub fn basis_check(k: usize, j: usize, b: f64, radius: Option<f64>, n: usize, dir: &Path) -> Outcome {
    let trunc = LandauTruncation::new(k, j, b)?;
    let grid = Grid2D::new(radius.unwrap_or_else(|| trunc.default_radius()), n, b)?;
    let diag = basis_diagnostics(&trunc, &grid)?;
    let t = 0.7 / b;
    let (prop_err, norm_drift) = propagator_agreement(trunc, &grid, t)?;
    let pass = diag.gram_max_error < GRAM_LIMIT
        && diag.eigen_residual_max < RESIDUAL_LIMIT
        && diag.conj_eigen_residual_max < RESIDUAL_LIMIT
        && prop_err < PROPAGATOR_LIMIT;
    let report = serde_json::json!({
        "k_levels": k,
        "j_count": j,
        "b": b,
        "grid": { "radius": grid.radius, "n": grid.n },
        "gram_max_error": diag.gram_max_error,
        "eigen_residual_max": diag.eigen_residual_max,
        "conj_eigen_residual_max": diag.conj_eigen_residual_max,
        "propagator": { "t": t, "rel_l2_error": prop_err, "norm_drift": norm_drift, "period": PI / b },
        "thresholds": { "gram": GRAM_LIMIT, "residual": RESIDUAL_LIMIT, "propagator": PROPAGATOR_LIMIT },
        "pass": pass,
    });
    let text = serde_json::to_string_pretty(&report).expect("report is plain JSON");
    write_atomic(dir, "basis_check.json", format!("{text}\n").as_bytes())?;
    println!("{text}");
    if !pass {
        return Err(CliError::Gate("a diagnostic exceeds its threshold".into()));
    }
    Ok(())
}
