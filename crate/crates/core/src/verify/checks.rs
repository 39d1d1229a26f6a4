use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::opnorm::{weighted_opnorm_with, NormBracket, OpnormOptions};
use super::report::{Hypothesis, ReportRow};
use crate::calculus::{
    apply_multiplier, smoothing_family, MultiplierFunction, MultiplierOperator,
    SpectralDecomposition,
};
use crate::error::{invalid, Result};
use crate::norms::{
    hormander_norm, mollifier_xi, mollify, nq_norm_grid, pad_zeros, spectral_t_grid, GridFunction,
    HormanderNorm,
};
use crate::weights::{conjugate, dual_weight, maximal_indexed, Weight};

/// Eigenvectors as extra test functions for the norm bracket.
pub fn eigen_tests(dec: &SpectralDecomposition) -> Vec<Vec<Complex64>> {
    let phi = dec.eigenvectors();
    (0..dec.n())
        .map(|i| {
            phi.column(i)
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect()
        })
        .collect()
}

fn options_for(dec: &SpectralDecomposition) -> OpnormOptions {
    OpnormOptions {
        extra_tests: eigen_tests(dec),
        ..OpnormOptions::default()
    }
}

/// Bracket for `‖F(L)‖_{L^p(w)}` using eigenvectors as extra tests.
pub fn multiplier_bracket(
    dec: &SpectralDecomposition,
    f: &MultiplierFunction,
    root: bool,
    p: f64,
    w: &Weight,
) -> Result<NormBracket> {
    let t = apply_multiplier(dec, f, root)?;
    weighted_opnorm_with(dec.space(), &t, p, w, &options_for(dec))
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub primal: NormBracket,
    pub dual: NormBracket,
    /// `|lower - lower'| / max(lower, lower')`.
    pub lower_residual: f64,
    pub overlap: bool,
    pub pass: bool,
}

/// Relative tolerance on the lower bounds of dual brackets.
pub const DUALITY_LOWER_TOL: f64 = 0.02;

/// Compares the bracket of `F(L)` on `L^p(w)` with that of its
/// `μ`-adjoint `F̄(L)` on `L^{p'}(w^{1-p'})`.
pub fn duality_check(
    dec: &SpectralDecomposition,
    f: &MultiplierFunction,
    p: f64,
    w: &Weight,
) -> Result<DualityReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid("p", format!("need 1 < p < ∞, got {p}")));
    }
    let primal = multiplier_bracket(dec, f, false, p, w)?;
    let dual = multiplier_bracket(dec, &f.conj(), false, conjugate(p), &dual_weight(w, p)?)?;
    let top = primal.lower.max(dual.lower);
    let lower_residual = if top == 0.0 {
        0.0
    } else {
        (primal.lower - dual.lower).abs() / top
    };
    let overlap = primal.overlaps(&dual, 1e-9);
    let tol = if p == 2.0 { 1e-9 } else { DUALITY_LOWER_TOL };
    Ok(DualityReport {
        pass: overlap && lower_residual <= tol,
        primal,
        dual,
        lower_residual,
        overlap,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpolationReport {
    pub t: f64,
    pub lhs_lower: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Checks `lower ‖F(L)‖_{L^p(w_0^t w_1^{1-t})} ≤ 1.05 · upper_r(w_0)^t ·
/// upper_q(w_1)^{1-t}` with `t = (q - p)/(q - r)`.
pub fn interpolation_check(
    dec: &SpectralDecomposition,
    f: &MultiplierFunction,
    w0: &Weight,
    w1: &Weight,
    r: f64,
    q: f64,
    p: f64,
) -> Result<InterpolationReport> {
    if !(1.0 < r && r <= p && p <= q && q.is_finite()) {
        return Err(invalid(
            "p",
            format!("need 1 < r <= p <= q < ∞, got r={r}, p={p}, q={q}"),
        ));
    }
    let t = if q == r { 1.0 } else { (q - p) / (q - r) };
    let wt = Weight::geometric_mix(w0, w1, t)?;
    let mid = multiplier_bracket(dec, f, false, p, &wt)?;
    let a = multiplier_bracket(dec, f, false, r, w0)?;
    let b = multiplier_bracket(dec, f, false, q, w1)?;
    let rhs = a.upper.powf(t) * b.upper.powf(1.0 - t);
    Ok(InterpolationReport {
        t,
        lhs_lower: mid.lower,
        rhs,
        slack: 1.05 * rhs - mid.lower,
        pass: mid.lower <= 1.05 * rhs,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AmCriterion {
    /// Worst ratio for `(∮_B |T(I - A_r)f|^{p0})^{1/p0} ≤ C M(|f|^{p0})^{1/p0}(x)`.
    pub c_a: f64,
    /// Worst ratio for `‖T A_r f‖_{L^∞(B)} ≤ C M(|Tf|^{p0})^{1/p0}(x)`.
    pub c_b: f64,
    pub balls: Vec<(usize, f64)>,
}

/// Empirical constants in the two hypotheses of the `A_r` boundedness
/// criterion, with `A_r = I - (I - e^{-r^m L})^M` and `T = F(L)` (or
/// `F(L^{1/m})` when `root`). Each ratio is maximized over the points of
/// the sampled ball, i.e. divided by the smallest right-hand side on it.
#[allow(clippy::too_many_arguments)]
pub fn am_criterion_check(
    dec: &SpectralDecomposition,
    f: &MultiplierFunction,
    root: bool,
    p0: f64,
    big_m: u32,
    ball_sample: usize,
    f_sample: usize,
    seed: u64,
) -> Result<AmCriterion> {
    if !(p0 >= 1.0 && p0 < 2.0) {
        return Err(invalid("p0", format!("need p0 in [1, 2), got {p0}")));
    }
    if ball_sample == 0 || f_sample == 0 {
        return Err(invalid(
            "ball_sample",
            "need at least one ball and one function",
        ));
    }
    let space = dec.space();
    let n = dec.n();
    let mu = space.mu();
    let index = space.ball_index();
    let t = apply_multiplier(dec, f, root)?;
    let radii: Vec<f64> = space
        .canonical_radii()
        .into_iter()
        .filter(|&r| r > 0.0)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let balls: Vec<(usize, f64)> = (0..ball_sample)
        .map(|_| (rng.gen_range(0..n), radii[rng.gen_range(0..radii.len())]))
        .collect();
    let functions: Vec<Vec<f64>> = (0..f_sample)
        .map(|_| (0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect())
        .collect();

    let mut distinct: Vec<f64> = balls.iter().map(|b| b.1).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut smoothers = Vec::with_capacity(distinct.len());
    for &r in &distinct {
        let a = smoothing_family(dec, r, big_m)?;
        smoothers.push(MultiplierOperator::from_real(&a, mu)?);
    }

    let (mut c_a, mut c_b) = (0.0f64, 0.0f64);
    for fv in &functions {
        if fv.iter().all(|v| *v == 0.0) {
            continue;
        }
        let fc: Vec<Complex64> = fv.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let tf = t.apply(&fc);
        let mf = maximal_indexed(
            &index,
            mu,
            &fv.iter().map(|v| v.abs().powf(p0)).collect::<Vec<_>>(),
        );
        let mtf = maximal_indexed(
            &index,
            mu,
            &tf.iter().map(|v| v.norm().powf(p0)).collect::<Vec<_>>(),
        );
        for &(center, r) in &balls {
            let k = distinct.partition_point(|&d| d < r);
            let a = &smoothers[k];
            let ball = space.ball(center, r)?;
            let vol: f64 = ball.iter().map(|&x| mu[x]).sum();
            // T(I - A_r) f = Tf - T A_r f.
            let taf = t.apply(&a.apply(&fc));
            let rest: Vec<Complex64> = tf.iter().zip(&taf).map(|(u, v)| u - v).collect();
            let lhs_a = (ball
                .iter()
                .map(|&x| rest[x].norm().powf(p0) * mu[x])
                .sum::<f64>()
                / vol)
                .powf(1.0 / p0);
            let rhs_a = ball
                .iter()
                .map(|&x| mf[x])
                .fold(f64::INFINITY, f64::min)
                .powf(1.0 / p0);
            if rhs_a > 0.0 {
                c_a = c_a.max(lhs_a / rhs_a);
            }
            let lhs_b = ball.iter().map(|&x| taf[x].norm()).fold(0.0, f64::max);
            let rhs_b = ball
                .iter()
                .map(|&x| mtf[x])
                .fold(f64::INFINITY, f64::min)
                .powf(1.0 / p0);
            if rhs_b > 0.0 {
                c_b = c_b.max(lhs_b / rhs_b);
            }
        }
    }
    Ok(AmCriterion { c_a, c_b, balls })
}

/// One member of a Hörmander-ratio sweep.
#[derive(Debug, Clone, Serialize)]
pub struct HormanderEntry {
    pub name: String,
    pub bracket: NormBracket,
    pub hormander: HormanderNorm,
    pub value_at_zero: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HormanderRatio {
    pub entries: Vec<HormanderEntry>,
    pub max_ratio: f64,
    pub hypothesis: Hypothesis,
    pub t_grid: Vec<f64>,
}

/// `upper ‖F(L)‖_{L^p(w)} / (sup_t ‖η δ_t F‖_{W^q_s} + |F(0)|)` for each `F`
/// in the family, with the dilation grid spanning the spectrum.
#[allow(clippy::too_many_arguments)]
pub fn hormander_ratio(
    dec: &SpectralDecomposition,
    family: &[MultiplierFunction],
    s: f64,
    q: f64,
    p: f64,
    w: &Weight,
    hypothesis: Hypothesis,
) -> Result<HormanderRatio> {
    if family.is_empty() {
        return Err(invalid("family", "empty multiplier family"));
    }
    let t_grid = spectral_t_grid(dec.eigenvalues());
    let opts = options_for(dec);
    let mut entries = Vec::with_capacity(family.len());
    let mut max_ratio: f64 = 0.0;
    for f in family {
        let t = apply_multiplier(dec, f, false)?;
        let bracket = weighted_opnorm_with(dec.space(), &t, p, w, &opts)?;
        let h = hormander_norm(f, s, q, &t_grid)?;
        let f0 = f.value_at_zero().norm();
        let ratio = bracket.upper / (h.value + f0);
        max_ratio = max_ratio.max(ratio);
        entries.push(HormanderEntry {
            name: f.name().to_string(),
            bracket,
            hormander: h,
            value_at_zero: f0,
            ratio,
        });
    }
    Ok(HormanderRatio {
        entries,
        max_ratio,
        hypothesis,
        t_grid,
    })
}

impl HormanderRatio {
    pub fn row(&self, scenario: &str, n_pts: usize, q: f64, beta: f64) -> ReportRow {
        let worst =
            self.entries.iter().fold(
                &self.entries[0],
                |a, e| if e.ratio > a.ratio { e } else { a },
            );
        ReportRow {
            p: Some(self.hypothesis.p),
            q: Some(q),
            s: Some(self.hypothesis.s),
            beta: Some(beta),
            constant: Some(self.max_ratio),
            lower: Some(worst.bracket.lower),
            upper: Some(worst.bracket.upper),
            hypothesis: self.hypothesis.flag(),
            ..ReportRow::new(scenario, n_pts)
        }
    }
}

/// `k! (π/2)^k`: Cauchy-formula constant for derivatives on the sector of
/// half-angle `θ`, using `sin θ ≥ 2θ/π`.
pub fn cauchy_constant(k: u32) -> f64 {
    (1..=k).map(|j| j as f64).product::<f64>() * std::f64::consts::FRAC_PI_2.powi(k as i32)
}

/// `Π_{j<k} |iτ - j|`, the exact value of `|λ^k ∂^k λ^{iτ}|`.
pub fn imaginary_power_derivative(tau: f64, k: u32) -> f64 {
    (0..k)
        .map(|j| Complex64::new(-(j as f64), tau).norm())
        .product()
}

/// `sup_λ |λ^k F_τ^{(k)}(λ)|` by central differences in `u = ln λ` over
/// `λ ∈ [2^{-8}, 2^8]`.
pub fn numeric_log_derivative_sup(tau: f64, k: u32) -> f64 {
    // λ^k ∂^k = D(D-1)…(D-k+1) with D = d/du; sample on a u-grid.
    let f = MultiplierFunction::imaginary_power(tau);
    let h = 1e-2;
    let lo = -8.0 * std::f64::consts::LN_2;
    let points = 400;
    let mut sup: f64 = 0.0;
    for i in 0..=points {
        let u = lo + (2.0 * -lo) * i as f64 / points as f64;
        let g = |du: f64| f.eval((u + du).exp());
        // Finite-difference D^j at u for j ≤ 3.
        let d1 = (g(h) - g(-h)) / (2.0 * h);
        let d2 = (g(h) - g(0.0) * 2.0 + g(-h)) / (h * h);
        let d3 = (g(2.0 * h) - g(h) * 2.0 + g(-h) * 2.0 - g(-2.0 * h)) / (2.0 * h * h * h);
        let v = match k {
            0 => g(0.0),
            1 => d1,
            2 => d2 - d1,
            3 => d3 - d2 * 3.0 + d1 * 2.0,
            _ => unimplemented!("derivatives above third order"),
        };
        sup = sup.max(v.norm());
    }
    sup
}

#[derive(Debug, Clone, Serialize)]
pub struct HolomorphicReport {
    /// `(τ, k, sup|λ^k F^{(k)}|, bound at the smallest θ)`.
    pub derivative_checks: Vec<(f64, u32, f64, f64)>,
    pub derivative_ok: bool,
    /// `(θ, max_τ upper / e^{|τ|θ})`.
    pub per_theta: Vec<(f64, f64)>,
    pub alpha: f64,
    pub alpha_bound: f64,
    pub pass: bool,
}

/// Least-squares slope of `y` against `x`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Imaginary powers `F_τ = λ^{iτ}` have `‖F_τ‖_{θ,∞} = e^{|τ|θ}`.
/// Checks (a) the Cauchy derivative bounds for `k ≤ 3` and (b) fits `α` in
/// `max_τ ‖F_τ(L)‖ / e^{|τ|θ} ≈ θ^{-α}` using the certified upper bound.
pub fn holomorphic_bound_check(
    dec: &SpectralDecomposition,
    theta_set: &[f64],
    tau_set: &[f64],
    p: f64,
    w: &Weight,
    dimension: f64,
) -> Result<HolomorphicReport> {
    if theta_set.len() < 2
        || theta_set
            .iter()
            .any(|&t| !(t > 0.0 && t < std::f64::consts::FRAC_PI_2))
    {
        return Err(invalid("theta_set", "need at least two angles in (0, π/2)"));
    }
    if tau_set.is_empty() || tau_set.iter().any(|t| !t.is_finite()) {
        return Err(invalid("tau_set", "need finite τ values"));
    }
    let theta_min = theta_set.iter().copied().fold(f64::INFINITY, f64::min);
    let mut derivative_checks = Vec::new();
    let mut derivative_ok = true;
    for &tau in tau_set {
        for k in 1..=3u32 {
            let sup = numeric_log_derivative_sup(tau, k);
            let bound =
                2.0 * cauchy_constant(k) / theta_min.powi(k as i32) * (tau.abs() * theta_min).exp();
            derivative_ok &= sup <= bound;
            derivative_checks.push((tau, k, sup, bound));
        }
    }
    let opts = options_for(dec);
    let mut uppers = Vec::with_capacity(tau_set.len());
    for &tau in tau_set {
        let t = apply_multiplier(dec, &MultiplierFunction::imaginary_power(tau), false)?;
        uppers.push(weighted_opnorm_with(dec.space(), &t, p, w, &opts)?.upper);
    }
    let per_theta: Vec<(f64, f64)> = theta_set
        .iter()
        .map(|&th| {
            let g = tau_set
                .iter()
                .zip(&uppers)
                .map(|(tau, u)| u / (tau.abs() * th).exp())
                .fold(0.0, f64::max);
            (th, g)
        })
        .collect();
    let xs: Vec<f64> = per_theta.iter().map(|(th, _)| th.ln()).collect();
    let ys: Vec<f64> = per_theta.iter().map(|(_, g)| g.ln()).collect();
    let alpha = -slope(&xs, &ys);
    let alpha_bound = dimension / 2.0 + 0.5;
    Ok(HolomorphicReport {
        derivative_checks,
        derivative_ok,
        per_theta,
        alpha,
        alpha_bound,
        pass: derivative_ok && alpha <= alpha_bound,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MollificationRate {
    /// `(N, ‖G - G∗ξ_N‖_{N,q})`.
    pub errors: Vec<(usize, f64)>,
    pub slope: f64,
    pub s: f64,
    pub q: f64,
    pub pass: bool,
}

/// Smooth bump supported in `[0, 1]`.
pub fn unit_bump(x: f64) -> f64 {
    if x > 0.0 && x < 1.0 {
        (-1.0 / (x * (1.0 - x))).exp()
    } else {
        0.0
    }
}

/// Regression slope of `log ‖G - G∗ξ_N‖_{N,q}` against `log N`; passes when
/// it is at most `-s + 0.3`.
pub fn mollification_rate(
    g: &GridFunction,
    s: f64,
    q: f64,
    n_set: &[usize],
) -> Result<MollificationRate> {
    if n_set.len() < 2 {
        return Err(invalid("N_set", "need at least two scales"));
    }
    let xi = mollifier_xi(s)?;
    let mut errors = Vec::with_capacity(n_set.len());
    for &n in n_set {
        let out = mollify(g, &xi, n)?;
        let reach = (out.len() - g.len()) / 2;
        let diff = out.sub(&pad_zeros(g, reach))?;
        errors.push((n, nq_norm_grid(&diff, n, q)?));
    }
    let xs: Vec<f64> = errors.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|(_, e)| e.ln()).collect();
    let slope = slope(&xs, &ys);
    Ok(MollificationRate {
        errors,
        slope,
        s,
        q,
        pass: slope <= -s + 0.3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{build_lattice_laplacian, decompose};
    use crate::space::{build_torus, MetricMeasureSpace};
    use crate::verify::report::{check_hypothesis, DEFAULT_TAU};
    use crate::weights::power_weight;
    use std::sync::Arc;

    fn cycle(n: usize) -> SpectralDecomposition {
        decompose(&build_lattice_laplacian(Arc::new(build_torus(n, 1).unwrap())).unwrap()).unwrap()
    }

    #[test]
    fn self_dual_case_is_exact() {
        let dec = cycle(16);
        let w = Weight::constant(16, 1.0).unwrap();
        let r = duality_check(&dec, &MultiplierFunction::imaginary_power(2.0), 2.0, &w).unwrap();
        assert!(r.pass && r.lower_residual < 1e-9);
    }

    #[test]
    fn weighted_duality_brackets_overlap() {
        let dec = cycle(32);
        let w = power_weight(dec.space(), 0.4).unwrap();
        let r = duality_check(&dec, &MultiplierFunction::heat(3.0), 3.0, &w).unwrap();
        assert!(r.overlap, "{:?} {:?}", r.primal, r.dual);
        assert!(r.pass, "residual {}", r.lower_residual);
    }

    #[test]
    fn interpolation_examples() {
        let dec = cycle(32);
        let w0 = power_weight(dec.space(), 0.2).unwrap();
        let w1 = power_weight(dec.space(), 0.6).unwrap();
        let heat = MultiplierFunction::heat(2.0);
        let r = interpolation_check(&dec, &heat, &w0, &w1, 2.0, 4.0, 3.0).unwrap();
        assert!(r.pass && r.slack > 0.0, "{r:?}");
        let same = interpolation_check(&dec, &heat, &w0, &w0, 2.0, 4.0, 2.0).unwrap();
        assert_eq!(same.t, 1.0);
        assert!(same.pass);
        assert!(interpolation_check(&dec, &heat, &w0, &w1, 3.0, 4.0, 2.0).is_err());
    }

    #[test]
    fn am_criterion_identity_multiplier() {
        let dec = cycle(32);
        let r = am_criterion_check(
            &dec,
            &MultiplierFunction::constant(1.0),
            false,
            1.0,
            2,
            12,
            4,
            3,
        )
        .unwrap();
        assert!(r.c_a.is_finite() && r.c_a > 0.0);
        assert!(r.c_b.is_finite());
        let single = Arc::new(MetricMeasureSpace::new(vec![0.0], vec![1.0]).unwrap());
        let op =
            crate::calculus::SelfAdjointOperator::new(nalgebra::DMatrix::zeros(1, 1), single, 2.0)
                .unwrap();
        let d1 = decompose(&op).unwrap();
        let r1 = am_criterion_check(
            &d1,
            &MultiplierFunction::constant(1.0),
            false,
            1.0,
            1,
            3,
            3,
            0,
        )
        .unwrap();
        assert!(r1.c_a <= 1.0 + 1e-12 && r1.c_b <= 1.0 + 1e-12, "{r1:?}");
    }

    #[test]
    fn identity_hormander_ratio_is_reference_value() {
        let one = MultiplierFunction::constant(1.0);
        let mut ratios = Vec::new();
        for n in [8usize, 16] {
            let dec = cycle(n);
            let w = Weight::constant(n, 1.0).unwrap();
            let h = check_hypothesis(dec.space(), 1.5, 4.0, &w, DEFAULT_TAU).unwrap();
            let r = hormander_ratio(
                &dec,
                std::slice::from_ref(&one),
                1.5,
                f64::INFINITY,
                4.0,
                &w,
                h,
            )
            .unwrap();
            ratios.push(r.max_ratio);
        }
        let eta =
            crate::norms::sobolev_norm(&crate::norms::bump_eta(), 1.5, f64::INFINITY).unwrap();
        for r in ratios {
            assert!((r - 1.0 / (eta + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn imaginary_power_derivative_closed_form() {
        for tau in [0.5, 1.0, 3.0] {
            assert!((imaginary_power_derivative(tau, 1) - tau).abs() < 1e-15);
            assert!((numeric_log_derivative_sup(tau, 1) - tau).abs() < 1e-3 * tau.max(1.0));
            for k in 2..=3 {
                let exact = imaginary_power_derivative(tau, k);
                assert!((numeric_log_derivative_sup(tau, k) - exact).abs() < 1e-2 * exact);
            }
        }
    }

    #[test]
    fn holomorphic_trivial_tau() {
        let dec = cycle(16);
        let w = Weight::constant(16, 1.0).unwrap();
        let t = apply_multiplier(&dec, &MultiplierFunction::imaginary_power(0.0), false).unwrap();
        let b = weighted_opnorm_with(dec.space(), &t, 3.0, &w, &OpnormOptions::default()).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);
        let pi = std::f64::consts::PI;
        let rep = holomorphic_bound_check(&dec, &[pi / 4.0, pi / 8.0], &[0.0, 1.0], 3.0, &w, 1.0)
            .unwrap();
        assert!(rep.derivative_ok);
    }

    #[test]
    fn mollification_slope() {
        let g = GridFunction::sample_real(0.0, 1.0, 4096, unit_bump);
        let r = mollification_rate(&g, 1.0, 2.0, &[8, 16, 32, 64]).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
