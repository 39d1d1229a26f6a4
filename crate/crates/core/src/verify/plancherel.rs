use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{apply_multiplier, MultiplierFunction, SpectralDecomposition, Support};
use crate::error::{invalid, Error, Result};
use crate::norms::{
    lq_norm, nq_norm, sobolev_norm, GridFunction, DEFAULT_GRID_POINTS, HORMANDER_WINDOW,
};

/// Knots of the random piecewise-linear multipliers.
pub const RANDOM_KNOTS: usize = 8;
/// Grid used for `‖δ_R F‖_{L^q([0,1])}`.
pub const UNIT_GRID_POINTS: usize = 4096;
/// `ε` in the off-diagonal decay estimate.
pub const OFFDIAG_EPSILON: f64 = 0.1;

/// Largest ratio found and where.
#[derive(Debug, Clone, Serialize)]
pub struct PlancherelResult {
    pub constant: f64,
    pub witness_scale: f64,
    pub witness_point: usize,
    pub witness_trial: usize,
    /// `max (lhs - ‖F‖²_∞/μ(y))` over every draw; non-positive when the
    /// eigenbasis identity bound holds.
    pub identity_excess: f64,
    pub draws: usize,
}

/// `Σ_i |F_i|² φ_i(y)²` for every `y`: the squared `L²(μ)` norm of the
/// kernel column `K(·, y)`.
pub fn kernel_column_norms(dec: &SpectralDecomposition, values: &[Complex64]) -> Vec<f64> {
    let phi = dec.eigenvectors();
    let n = dec.n();
    (0..n)
        .map(|y| {
            (0..n)
                .map(|i| values[i].norm_sqr() * phi[(y, i)] * phi[(y, i)])
                .sum()
        })
        .collect()
}

/// Seeded piecewise-linear multiplier with knots `lo + j (hi - lo)/K` and
/// values in `[-1, 1]`, zero outside `[lo, hi]`.
pub fn random_piecewise_linear(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> MultiplierFunction {
    let knots: Vec<f64> = (0..=RANDOM_KNOTS)
        .map(|j| lo + (hi - lo) * j as f64 / RANDOM_KNOTS as f64)
        .collect();
    let values: Vec<Complex64> = (0..=RANDOM_KNOTS)
        .map(|_| Complex64::new(2.0 * rng.gen::<f64>() - 1.0, 0.0))
        .collect();
    MultiplierFunction::tabulated(knots, values).expect("increasing knots")
}

fn trial_rng(seed: u64, scale_index: usize, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ ((scale_index as u64) << 32) ^ trial as u64)
}

fn check_q(q: f64) -> Result<()> {
    if !(q >= 2.0) {
        return Err(invalid("q", format!("need q in [2, ∞], got {q}")));
    }
    Ok(())
}

/// `sup_{R, y, F} ∫|K_{F(L^{1/m})}(x,y)|² dμ(x) · V(y, 1/R) / ‖δ_R F‖²_{L^q}`
/// over seeded piecewise-linear `F` supported in `[0, R]`.
pub fn plancherel_constant(
    dec: &SpectralDecomposition,
    q: f64,
    r_set: &[f64],
    trials: usize,
    seed: u64,
) -> Result<PlancherelResult> {
    check_q(q)?;
    if r_set.is_empty() || trials == 0 {
        return Err(invalid("R_set", "need at least one scale and one trial"));
    }
    let top = 2.0 * dec.lambda_max().powf(1.0 / dec.order_m());
    if let Some(r) = r_set
        .iter()
        .find(|&&r| !(r > 0.0 && r <= top * (1.0 + 1e-12)))
    {
        return Err(invalid("R_set", format!("scale {r} outside (0, {top}]")));
    }
    let space = dec.space();
    let jobs: Vec<(usize, usize)> = (0..r_set.len())
        .flat_map(|a| (0..trials).map(move |b| (a, b)))
        .collect();
    let results: Vec<Result<Option<(f64, usize, f64)>>> = jobs
        .par_iter()
        .map(|&(ri, trial)| {
            let r = r_set[ri];
            let f = random_piecewise_linear(&mut trial_rng(seed, ri, trial), 0.0, r);
            let unit = GridFunction::sample(0.0, 1.0, UNIT_GRID_POINTS, |x| f.eval(r * x));
            let denom = lq_norm(&unit, q);
            if denom == 0.0 {
                return Ok(None);
            }
            let values = dec.multiplier_values(&f, true)?;
            let lhs = kernel_column_norms(dec, &values);
            let sup_sq = unit.max_abs().powi(2);
            let mut best = (f64::NEG_INFINITY, 0usize, f64::NEG_INFINITY);
            for (y, l) in lhs.iter().enumerate() {
                let ratio = l * space.volume(y, 1.0 / r)? / (denom * denom);
                if ratio > best.0 {
                    best.0 = ratio;
                    best.1 = y;
                }
                best.2 = best.2.max(l - sup_sq / space.mu()[y]);
            }
            Ok(Some(best))
        })
        .collect();
    collect(results, &jobs, r_set)
}

fn collect(
    results: Vec<Result<Option<(f64, usize, f64)>>>,
    jobs: &[(usize, usize)],
    scales: &[f64],
) -> Result<PlancherelResult> {
    let mut out = PlancherelResult {
        constant: 0.0,
        witness_scale: scales[0],
        witness_point: 0,
        witness_trial: 0,
        identity_excess: f64::NEG_INFINITY,
        draws: 0,
    };
    for (r, &(ri, trial)) in results.into_iter().zip(jobs) {
        if let Some((ratio, y, excess)) = r? {
            out.draws += 1;
            out.identity_excess = out.identity_excess.max(excess);
            if ratio > out.constant {
                out.constant = ratio;
                out.witness_scale = scales[ri];
                out.witness_point = y;
                out.witness_trial = trial;
            }
        }
    }
    Ok(out)
}

/// As [`plancherel_constant`] with `F` supported in `[0, N]` and the
/// denominator `‖δ_N F‖_{N,q}`.
pub fn plancherel_nq_constant(
    dec: &SpectralDecomposition,
    q: f64,
    n_set: &[usize],
    trials: usize,
    seed: u64,
) -> Result<PlancherelResult> {
    check_q(q)?;
    if n_set.is_empty() || trials == 0 || n_set.contains(&0) {
        return Err(invalid(
            "N_set",
            "need positive scales and at least one trial",
        ));
    }
    let space = dec.space();
    let scales: Vec<f64> = n_set.iter().map(|&n| n as f64).collect();
    let jobs: Vec<(usize, usize)> = (0..n_set.len())
        .flat_map(|a| (0..trials).map(move |b| (a, b)))
        .collect();
    let results: Vec<Result<Option<(f64, usize, f64)>>> = jobs
        .par_iter()
        .map(|&(ni, trial)| {
            let big_n = n_set[ni];
            let nf = big_n as f64;
            let f = random_piecewise_linear(&mut trial_rng(seed, ni, trial), 0.0, nf);
            let denom = nq_norm(|x| f.eval(nf * x), big_n, q, 16)?;
            if denom == 0.0 {
                return Ok(None);
            }
            let values = dec.multiplier_values(&f, true)?;
            let lhs = kernel_column_norms(dec, &values);
            let sup = nq_norm(|x| f.eval(nf * x), big_n, f64::INFINITY, 16)?;
            let mut best = (f64::NEG_INFINITY, 0usize, f64::NEG_INFINITY);
            for (y, l) in lhs.iter().enumerate() {
                let ratio = l * space.volume(y, 1.0 / nf)? / (denom * denom);
                if ratio > best.0 {
                    best.0 = ratio;
                    best.1 = y;
                }
                best.2 = best.2.max(l - sup * sup / space.mu()[y]);
            }
            Ok(Some(best))
        })
        .collect();
    collect(results, &jobs, &scales)
}

/// Off-diagonal weighted Plancherel bound at `R = 2^ℓ`.
#[derive(Debug, Clone, Serialize)]
pub struct OffdiagResult {
    pub constant: f64,
    pub scale: f64,
    pub witness_point: usize,
}

/// `sup_y Σ_x |K_{F(L^{1/m})}(x,y)|² (1 + R d(x,y))^s μ(x) · V(y, 1/R)
/// / ‖δ_R F‖²_{W^q_{s/2+ε}}` for `F` supported in `[R/4, R]`, `R = 2^ℓ`.
pub fn offdiag_decay_check(
    dec: &SpectralDecomposition,
    f: &MultiplierFunction,
    level: i32,
    s: f64,
    q: f64,
) -> Result<OffdiagResult> {
    if !(s >= 0.0) {
        return Err(invalid("s", format!("need s >= 0, got {s}")));
    }
    let r = 2f64.powi(level);
    if let Support::Interval(a, b) = f.support() {
        if a < r / 4.0 - 1e-12 || b > r + 1e-12 {
            return Err(Error::SupportViolation(format!(
                "supp F = [{a}, {b}] not inside [{}, {r}]",
                r / 4.0
            )));
        }
    }
    let probe = 4096;
    for k in 0..=probe {
        let x = 2.0 * r * k as f64 / probe as f64;
        if (x < r / 4.0 - 1e-12 || x > r + 1e-12) && f.eval(x).norm() > 0.0 {
            return Err(Error::SupportViolation(format!(
                "F({x}) ≠ 0 outside [{}, {r}]",
                r / 4.0
            )));
        }
    }
    let (a, b) = HORMANDER_WINDOW;
    let dilated = GridFunction::sample(a, b, DEFAULT_GRID_POINTS, |x| f.eval(r * x));
    let denom = sobolev_norm(&dilated, s / 2.0 + OFFDIAG_EPSILON, q)?;
    let space = dec.space();
    let op = apply_multiplier(dec, f, true)?;
    let mu = space.mu();
    let n = dec.n();
    let mut best = OffdiagResult {
        constant: 0.0,
        scale: r,
        witness_point: 0,
    };
    if denom == 0.0 {
        return Ok(best);
    }
    for y in 0..n {
        let lhs: f64 = (0..n)
            .map(|x| op.kernel_at(x, y).norm_sqr() * (1.0 + r * space.d(x, y)).powf(s) * mu[x])
            .sum();
        let ratio = lhs * space.volume(y, 1.0 / r)? / (denom * denom);
        if ratio > best.constant {
            best.constant = ratio;
            best.witness_point = y;
        }
    }
    Ok(best)
}

/// `sup_y Σ_{λ_i^{1/m} ∈ [lo, hi]} φ_i(y)²`, the squared `L¹ → L²` norm of
/// the spectral projector `χ_{[lo,hi]}(L^{1/m})`.
pub fn spectral_window_norm(dec: &SpectralDecomposition, lo: f64, hi: f64) -> f64 {
    let values: Vec<Complex64> = dec
        .spectral_points(true)
        .iter()
        .map(|&l| Complex64::new(if l >= lo && l <= hi { 1.0 } else { 0.0 }, 0.0))
        .collect();
    kernel_column_norms(dec, &values)
        .into_iter()
        .fold(0.0, f64::max)
}

/// Spectral-window estimate on a torus.
#[derive(Debug, Clone, Serialize)]
pub struct AvakumovicResult {
    pub sup_ratio: f64,
    /// `(R, ‖χ_{[R,R+1]}(L^{1/m})‖²_{1→2}, ratio to R^{n-1})`.
    pub per_r: Vec<(f64, f64, f64)>,
    pub dimension: f64,
}

/// `‖χ_{[R,R+1]}(L^{1/m})‖²_{L¹→L²} = sup_y Σ_{λ_i^{1/m} ∈ [R,R+1]} φ_i(y)²`,
/// compared with `R^{n-1}`.
pub fn avakumovic_check(
    dec: &SpectralDecomposition,
    dimension: f64,
    r_set: &[f64],
) -> Result<AvakumovicResult> {
    if r_set.is_empty() {
        return Err(invalid("R_set", "at least one R is required"));
    }
    let mut per_r = Vec::with_capacity(r_set.len());
    let mut sup_ratio: f64 = 0.0;
    for &r in r_set {
        if !(r > 0.0) {
            return Err(invalid("R_set", format!("R must be positive, got {r}")));
        }
        let value = spectral_window_norm(dec, r, r + 1.0);
        let ratio = value / r.powf(dimension - 1.0);
        sup_ratio = sup_ratio.max(ratio);
        per_r.push((r, value, ratio));
    }
    Ok(AvakumovicResult {
        sup_ratio,
        per_r,
        dimension,
    })
}
