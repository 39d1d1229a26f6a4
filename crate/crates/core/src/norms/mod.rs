//! Norms on multiplier functions: Bessel-potential Sobolev norms, the
//! dilated Hörmander norm, the cellwise `‖·‖_{N,q}` norm, and the bump and
//! mollifier constructions they rely on.

mod grid;
mod mollify;
mod nq;

pub use grid::{bessel_potential, lq_norm, sobolev_norm, GridFunction, EDGE_TOL};
pub use mollify::{mollifier_xi, mollify, pad_zeros, Mollifier};
pub use nq::{nq_norm, nq_norm_grid, DEFAULT_POINTS_PER_CELL};

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::MultiplierFunction;
use crate::error::{invalid, Error, Result};

/// Window on which `η·δ_t F` is sampled.
pub const HORMANDER_WINDOW: (f64, f64) = (0.0, 2.0);
pub const DEFAULT_GRID_POINTS: usize = 4096;
pub const DEFAULT_POINTS_PER_OCTAVE: usize = 4;

/// Reference cut-off `η(λ) = exp(-1/((λ - 1/4)(1 - λ)))` on `(1/4, 1)`.
pub fn eta(x: f64) -> f64 {
    if x > 0.25 && x < 1.0 {
        (-1.0 / ((x - 0.25) * (1.0 - x))).exp()
    } else {
        0.0
    }
}

/// Largest value of `η`, attained at `λ = 5/8`.
pub fn eta_max() -> f64 {
    eta(0.625)
}

/// `η` sampled on the Hörmander window.
pub fn bump_eta() -> GridFunction {
    GridFunction::sample_real(
        HORMANDER_WINDOW.0,
        HORMANDER_WINDOW.1,
        DEFAULT_GRID_POINTS,
        eta,
    )
}

/// `Σ_ℓ η(2^{-ℓ}λ)`; positive for every `λ > 0` and invariant under
/// `λ ↦ 2λ`.
fn eta_dyadic_sum(x: f64) -> f64 {
    let base = x.log2().floor() as i32;
    (base - 1..=base + 3).map(|l| eta(x * 2f64.powi(-l))).sum()
}

/// Partition bump `φ = η / Σ_ℓ η(2^{-ℓ}·)`, supported in `[1/4, 1]` with
/// `Σ_ℓ φ(2^{-ℓ}λ) = 1` for every `λ > 0`.
pub fn phi(x: f64) -> f64 {
    let e = eta(x);
    if e == 0.0 {
        0.0
    } else {
        e / eta_dyadic_sum(x)
    }
}

/// Max deviation of `Σ_ℓ φ(2^{-ℓ}λ)` from 1 on a log grid over
/// `[2^{-20}, 2^{20}]`.
pub fn phi_partition_residual() -> f64 {
    let points = 40 * 64;
    (0..=points)
        .map(|k| {
            let x = 2f64.powf(-20.0 + 40.0 * k as f64 / points as f64);
            let base = x.log2().floor() as i32;
            let s: f64 = (base - 2..=base + 4).map(|l| phi(x * 2f64.powi(-l))).sum();
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// `t_0 · 2^{k/per_octave}` from `lo` until the grid passes `hi`.
pub fn dyadic_t_grid(lo: f64, hi: f64, per_octave: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || per_octave == 0 {
        return Err(invalid(
            "t_grid",
            format!("need 0 < lo <= hi, got [{lo}, {hi}]"),
        ));
    }
    let mut out = Vec::new();
    let mut k = 0;
    loop {
        let t = lo * 2f64.powf(k as f64 / per_octave as f64);
        out.push(t);
        if t >= hi {
            break;
        }
        k += 1;
    }
    Ok(out)
}

/// Dyadic grid over `[λ_min⁺/2, 2 λ_max]` for the given eigenvalues, four
/// points per octave. Falls back to `[1/2, 2]` when there is no positive
/// eigenvalue.
pub fn spectral_t_grid(eigenvalues: &[f64]) -> Vec<f64> {
    let pos = eigenvalues.iter().copied().filter(|&l| l > 0.0);
    let lo = pos.clone().fold(f64::INFINITY, f64::min);
    let hi = pos.fold(0.0, f64::max);
    if !lo.is_finite() {
        return dyadic_t_grid(0.5, 2.0, DEFAULT_POINTS_PER_OCTAVE).expect("valid fallback grid");
    }
    dyadic_t_grid(lo / 2.0, 2.0 * hi, DEFAULT_POINTS_PER_OCTAVE).expect("positive spectral range")
}

/// Value and maximizing dilation of a Hörmander norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HormanderNorm {
    pub value: f64,
    pub argmax_t: f64,
}

/// `max_{t ∈ t_grid} ‖η·δ_t F‖_{W^q_s}` with `η·δ_t F` sampled on `[0, 2]`.
pub fn hormander_norm(
    f: &MultiplierFunction,
    s: f64,
    q: f64,
    t_grid: &[f64],
) -> Result<HormanderNorm> {
    hormander_norm_with(f, s, q, t_grid, eta, DEFAULT_GRID_POINTS)
}

/// [`hormander_norm`] with a custom cut-off supported inside `(0, 2)`.
pub fn hormander_norm_with<C>(
    f: &MultiplierFunction,
    s: f64,
    q: f64,
    t_grid: &[f64],
    cutoff: C,
    grid_points: usize,
) -> Result<HormanderNorm>
where
    C: Fn(f64) -> f64 + Sync,
{
    if t_grid.is_empty() {
        return Err(invalid("t_grid", "empty dilation grid"));
    }
    let (a, b) = HORMANDER_WINDOW;
    let values: Vec<Result<(f64, f64)>> = t_grid
        .par_iter()
        .map(|&t| {
            let g = GridFunction::sample(a, b, grid_points, |x| {
                let c = cutoff(x);
                if c == 0.0 {
                    num_complex::Complex64::new(0.0, 0.0)
                } else {
                    f.eval(t * x) * c
                }
            });
            if let Some((x, _)) = g
                .points()
                .find(|(_, v)| !(v.re.is_finite() && v.im.is_finite()))
            {
                return Err(Error::UnboundedMultiplier(t * x));
            }
            Ok((sobolev_norm(&g, s, q)?, t))
        })
        .collect();
    let mut best = HormanderNorm {
        value: f64::NEG_INFINITY,
        argmax_t: t_grid[0],
    };
    for v in values {
        let (value, t) = v?;
        if value > best.value {
            best = HormanderNorm { value, argmax_t: t };
        }
    }
    Ok(best)
}
