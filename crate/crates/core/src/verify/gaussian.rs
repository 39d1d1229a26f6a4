use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{heat_kernel, SpectralDecomposition};
use crate::error::{invalid, Result};
use crate::space::MetricMeasureSpace;

/// Kernel entries below `RESOLUTION_FLOOR / min μ` sit at the roundoff
/// level of the eigendecomposition and are excluded from the fit.
pub const RESOLUTION_FLOOR: f64 = 1e-10;

/// Entries more negative than this are reported as positivity violations.
pub const NEGATIVITY_TOL: f64 = 1e-12;

/// `c ∈ {1/16, 1/8, …, 8}`.
pub fn default_c_grid() -> Vec<f64> {
    (-4..=3).map(|k| 2f64.powi(k)).collect()
}

/// Result of fitting `p_t(x,y) ≤ C/V(x,t^{1/m}) · exp(-d^{m/(m-1)}/(c t^{1/(m-1)}))`.
#[derive(Debug, Clone, Serialize)]
pub struct GaussianFit {
    /// Best constant `C` over the `c` grid.
    pub big_c: f64,
    pub c: f64,
    pub m: f64,
    /// Zero by construction: `C` is the exact sup over tested entries.
    pub max_violation: f64,
    pub t_range: Vec<f64>,
    /// `(c, C(c))` for every `c` on the grid.
    pub per_c: Vec<(f64, f64)>,
    /// `(t, x, y)` attaining the sup at the chosen `c`.
    pub argmax: (f64, usize, usize),
    /// Entries skipped as below the resolution floor.
    pub unresolved: usize,
    /// Entries below `-NEGATIVITY_TOL`.
    pub negative_entries: usize,
}

/// Fits the Gaussian upper bound with the default `c` grid.
pub fn fit_gaussian_bound(
    space: &MetricMeasureSpace,
    dec: &SpectralDecomposition,
    m: f64,
    t_set: &[f64],
) -> Result<GaussianFit> {
    fit_gaussian_bound_with(space, dec, m, t_set, &default_c_grid(), RESOLUTION_FLOOR)
}

/// For each `c` on `c_grid`, `C(c)` is the sup over `(t, x, y)` of
/// `p_t(x,y) V(x, t^{1/m}) exp(d^{m/(m-1)}/(c t^{1/(m-1)}))`, evaluated in
/// log space. Entries `p_t(x,y) < floor / min μ` are counted as unresolved
/// and skipped. Returns the `c` minimizing `C(c)`.
pub fn fit_gaussian_bound_with(
    space: &MetricMeasureSpace,
    dec: &SpectralDecomposition,
    m: f64,
    t_set: &[f64],
    c_grid: &[f64],
    floor: f64,
) -> Result<GaussianFit> {
    if t_set.is_empty() {
        return Err(invalid("t_set", "at least one time is required"));
    }
    if let Some(t) = t_set.iter().find(|t| !(**t > 0.0)) {
        return Err(invalid("t_set", format!("times must be positive, got {t}")));
    }
    if !(m >= 2.0) {
        return Err(invalid("m", format!("need m >= 2, got {m}")));
    }
    if c_grid.is_empty() || c_grid.iter().any(|c| !(*c > 0.0)) {
        return Err(invalid("c_grid", "need positive scales"));
    }
    if dec.n() != space.n_pts() {
        return Err(invalid("dec", "decomposition does not match the space"));
    }
    let n = space.n_pts();
    let min_mu = space.mu().iter().copied().fold(f64::INFINITY, f64::min);
    let cutoff = floor / min_mu;
    let exponent = m / (m - 1.0);

    // Per t: (max over entries of a + b/c for each c, argmax per c, counts).
    type PerT = (Vec<(f64, usize, usize)>, usize, usize);
    let per_t: Vec<Result<PerT>> = t_set
        .par_iter()
        .map(|&t| {
            let p = heat_kernel(dec, t)?;
            let radius = t.powf(1.0 / m);
            let t_scale = t.powf(1.0 / (m - 1.0));
            let mut best = vec![(f64::NEG_INFINITY, 0, 0); c_grid.len()];
            let (mut unresolved, mut negative) = (0, 0);
            for x in 0..n {
                let log_v = space.volume(x, radius)?.ln();
                for y in 0..n {
                    let v = p[(x, y)];
                    if v < -NEGATIVITY_TOL {
                        negative += 1;
                    }
                    if v < cutoff {
                        unresolved += 1;
                        continue;
                    }
                    let a = v.ln() + log_v;
                    let b = space.d(x, y).powf(exponent) / t_scale;
                    for (k, &c) in c_grid.iter().enumerate() {
                        let val = a + b / c;
                        if val > best[k].0 {
                            best[k] = (val, x, y);
                        }
                    }
                }
            }
            Ok((best, unresolved, negative))
        })
        .collect();

    let mut per_c = vec![(f64::NEG_INFINITY, 0.0, 0, 0); c_grid.len()];
    let (mut unresolved, mut negative) = (0, 0);
    for (ti, r) in per_t.into_iter().enumerate() {
        let (best, u, ng) = r?;
        unresolved += u;
        negative += ng;
        for (k, b) in best.into_iter().enumerate() {
            if b.0 > per_c[k].0 {
                per_c[k] = (b.0, t_set[ti], b.1, b.2);
            }
        }
    }
    let (k_best, _) =
        per_c.iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (k, v)| if v.0 < acc.1 { (k, v.0) } else { acc },
        );
    let chosen = per_c[k_best];
    Ok(GaussianFit {
        big_c: chosen.0.exp(),
        c: c_grid[k_best],
        m,
        max_violation: 0.0,
        t_range: t_set.to_vec(),
        per_c: c_grid
            .iter()
            .zip(&per_c)
            .map(|(&c, v)| (c, v.0.exp()))
            .collect(),
        argmax: (chosen.1, chosen.2, chosen.3),
        unresolved,
        negative_entries: negative,
    })
}

/// `t = 2^k` for `k` from `log2 lo` to `log2 hi`.
pub fn dyadic_times(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.log2().round() as i32, hi.log2().round() as i32);
    (a..=b).map(|k| 2f64.powi(k)).collect()
}
