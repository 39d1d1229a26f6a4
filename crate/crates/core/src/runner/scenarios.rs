use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{config_error, ScenarioConfig};
use crate::calculus::{
    build_dirichlet_laplacian, build_lattice_laplacian, build_schrodinger, decompose, heat_kernel,
    MultiplierFunction, SpectralDecomposition,
};
use crate::error::{Error, Result};
use crate::norms::dyadic_t_grid;
use crate::space::{
    build_masked_grid, build_segment, build_torus, doubling_radii, fit_doubling, parse_mask,
    DoublingFit, MetricMeasureSpace,
};
use crate::verify::{
    am_criterion_check, avakumovic_check, duality_check, dyadic_times, fit_gaussian_bound,
    holomorphic_bound_check, hormander_ratio, hypothesis_with, imaginary_power_derivative,
    mollification_rate, numeric_log_derivative_sup, plancherel_constant, plancherel_nq_constant,
    spectral_window_norm, unit_bump, Check, ReportRow, VerificationReport,
};
use crate::weights::{ap_constant, power_weight, Weight};

/// A builtin scenario with its default configuration.
#[derive(Debug, Clone, Copy)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub details: &'static str,
    pub default_config: &'static str,
}

pub const SCENARIOS: [ScenarioInfo; 9] = [
    ScenarioInfo {
        name: "torus-hormander",
        summary: "Hörmander ratio of Riesz-mean dilates on tori under power weights",
        details: "For each torus size, weight exponent β and exponent p, computes the certified upper bound of \
                  ‖F(L)‖ on L^p(w) divided by sup_t ‖η δ_t F‖_{W^q_s} + |F(0)| over Riesz-mean dilates with t \
                  spanning the spectrum. Inside the hypotheses (s > n/2, p > r_0, w in A_{p/r_0}) the ratio may \
                  grow by at most 1.25 per size doubling; weights with β outside (-n, n(p/r_0 - 1)) are negative \
                  controls whose A_p constant must grow by at least 1.5 per doubling.",
        default_config: include_str!("../../configs/torus-hormander.toml"),
    },
    ScenarioInfo {
        name: "power-weights",
        summary: "Multiplier bounds for power weights |x|^β across the admissible β range",
        details: "Sweeps β for a fixed p and records the A_p constant and the Hörmander ratio per torus size. \
                  β is admissible when max(-n, -sp) < β < min(n(p-1), sp). Admissible rows must keep bounded ratio \
                  growth; the others are negative controls. Also checks L^p(w) / L^{p'}(w^{1-p'}) duality of the \
                  brackets on the smallest torus.",
        default_config: include_str!("../../configs/power-weights.toml"),
    },
    ScenarioInfo {
        name: "dirichlet-domain",
        summary: "Dirichlet Laplacian on a masked planar domain",
        details: "Builds the Dirichlet Laplacian on the cells of a text mask, checks that its heat kernel is \
                  non-negative and dominated by the heat kernel of the full rectangle, fits the Gaussian upper \
                  bound, and records Hörmander ratios with the unit weight.",
        default_config: include_str!("../../configs/dirichlet-domain.toml"),
    },
    ScenarioInfo {
        name: "schrodinger",
        summary: "Schrödinger operators L + V with random V >= 0 on tori",
        details: "Draws a seeded potential V in [0, potential_max], checks entrywise domination of the heat kernel \
                  of L + V by that of L, and that the fitted Gaussian constant of L + V does not exceed the free \
                  one. Hörmander ratios for L + V are recorded per size.",
        default_config: include_str!("../../configs/schrodinger.toml"),
    },
    ScenarioInfo {
        name: "holomorphic",
        summary: "Imaginary powers L^{iτ} and the sector-angle growth exponent",
        details: "For F_τ(λ) = λ^{iτ} with ‖F_τ‖_{θ,∞} = e^{|τ|θ}, checks the Cauchy-formula derivative bounds \
                  for k <= 3 and the closed form sup |λ F_τ'(λ)| = |τ|, then fits α in \
                  max_τ ‖F_τ(L)‖ e^{-|τ|θ} ≈ θ^{-α} over the θ grid and requires α <= n/2 + 0.5.",
        default_config: include_str!("../../configs/holomorphic.toml"),
    },
    ScenarioInfo {
        name: "avakumovic",
        summary: "Spectral-window estimate ‖χ_[R,R+1](L^{1/m})‖²_{1→2} <= C R^{n-1} on tori",
        details: "Computes the squared L¹ → L² norm of the spectral projector onto [R, R+1] exactly as \
                  sup_y Σ φ_i(y)² over eigenvalues with λ_i^{1/m} in the window, divided by R^{n-1} (the \
                  Avakumović-Agmon-Hörmander estimate for compact manifolds, here on the discrete torus). The sup \
                  ratio must be stable within a factor 2 across sizes; on d = 1 it is compared with an exact \
                  eigenvalue count.",
        default_config: include_str!("../../configs/avakumovic.toml"),
    },
    ScenarioInfo {
        name: "plancherel-sweep",
        summary: "Plancherel constants for L^q and ‖·‖_{N,q} denominators",
        details: "Measures sup over R, y and seeded piecewise-linear F supported in [0, R] of \
                  V(y, 1/R) ∫ |K_{F(L^{1/m})}(x, y)|² dμ(x) / ‖δ_R F‖²_q, and the variant with the ‖·‖_{N,q} norm. \
                  The q = ∞ constant must obey the eigenbasis identity bound; finite-q constants must be stable \
                  within a factor 2 across sizes.",
        default_config: include_str!("../../configs/plancherel-sweep.toml"),
    },
    ScenarioInfo {
        name: "mollification",
        summary: "Mollification error rate ‖G - G∗ξ_N‖_{N,q} for a smooth bump",
        details: "Convolves a smooth bump with the moment-corrected mollifier ξ_N and fits the slope of \
                  log ‖G - G∗ξ_N‖_{N,q} against log N. The slope must be at most -s + 0.3.",
        default_config: include_str!("../../configs/mollification.toml"),
    },
    ScenarioInfo {
        name: "am-criterion",
        summary: "Empirical constants in the two hypotheses of the A_r boundedness criterion",
        details: "With A_r = I - (I - e^{-r^m L})^M and T = F(L), measures the worst ratios of \
                  (⨍_B |T(I - A_r) f|^{p0})^{1/p0} to M(|f|^{p0})^{1/p0} and of ‖T A_r f‖_{L^∞(B)} to \
                  M(|Tf|^{p0})^{1/p0} over seeded balls and functions.",
        default_config: include_str!("../../configs/am-criterion.toml"),
    },
];

pub fn builtin_scenarios() -> &'static [ScenarioInfo] {
    &SCENARIOS
}

pub fn find_scenario(name: &str) -> Result<&'static ScenarioInfo> {
    SCENARIOS
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Unknown {
            kind: "scenario",
            name: name.to_string(),
        })
}

pub fn default_config(name: &str) -> Result<ScenarioConfig> {
    ScenarioConfig::from_toml(find_scenario(name)?.default_config)
}

/// A space with its operator's decomposition and fitted growth exponents.
struct Built {
    space: Arc<MetricMeasureSpace>,
    dec: SpectralDecomposition,
    fit: DoublingFit,
}

fn build_space(cfg: &ScenarioConfig, size: usize) -> Result<MetricMeasureSpace> {
    match cfg.space.builder.as_str() {
        "torus" => build_torus(size, cfg.space.dim),
        "segment" => build_segment(size),
        "mask" => {
            let text = cfg.space.mask.as_deref().unwrap_or_default();
            let (w, h, cells) = parse_mask(text)?;
            build_masked_grid(w, h, &cells)
        }
        other => Err(config_error(
            "space.builder",
            format!("unknown builder `{other}`"),
        )),
    }
}

fn potential(cfg: &ScenarioConfig, n: usize, size: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (size as u64).rotate_left(32));
    (0..n)
        .map(|_| cfg.operator.potential_max * rng.gen::<f64>())
        .collect()
}

fn build(cfg: &ScenarioConfig, size: usize) -> Result<Built> {
    let space = Arc::new(build_space(cfg, size)?);
    let op = match cfg.operator.builder.as_str() {
        "laplacian" => build_lattice_laplacian(space.clone())?,
        "schrodinger" => build_schrodinger(space.clone(), &potential(cfg, space.n_pts(), size))?,
        "dirichlet" => build_dirichlet_laplacian(space.clone())?,
        other => {
            return Err(config_error(
                "operator.builder",
                format!("unknown builder `{other}`"),
            ))
        }
    };
    let dec = decompose(&op)?;
    let fit = fit_doubling(&space, &doubling_radii(&space))?;
    Ok(Built { space, dec, fit })
}

fn build_ladder(cfg: &ScenarioConfig) -> Result<Vec<(usize, Built)>> {
    let sizes = if cfg.space.builder == "mask" {
        vec![0]
    } else {
        cfg.space.sizes.clone()
    };
    sizes.into_iter().map(|s| Ok((s, build(cfg, s)?))).collect()
}

fn positive_spectrum(dec: &SpectralDecomposition, root: bool) -> (f64, f64) {
    let pts = dec.spectral_points(root);
    let lo = pts
        .iter()
        .copied()
        .filter(|&l| l > 0.0)
        .fold(f64::INFINITY, f64::min);
    let hi = pts.iter().copied().fold(0.0, f64::max);
    if lo.is_finite() {
        (lo, hi)
    } else {
        (1.0, 1.0)
    }
}

/// The multiplier family of the config: Riesz means `(1 - λ/t)_+^δ` for `t`
/// on `grids.t` (default: one point per octave across the spectrum), or
/// the listed presets.
fn family(cfg: &ScenarioConfig, dec: &SpectralDecomposition) -> Result<Vec<MultiplierFunction>> {
    match cfg.multiplier.family.as_str() {
        "riesz_mean" => {
            let ts = if cfg.grids.t.is_empty() {
                let (lo, hi) = positive_spectrum(dec, cfg.multiplier.root);
                dyadic_t_grid(lo / 2.0, 2.0 * hi, 1)?
            } else {
                cfg.grids.t.clone()
            };
            Ok(ts
                .into_iter()
                .map(|t| MultiplierFunction::riesz_mean(cfg.multiplier.delta).dilate(1.0 / t))
                .collect())
        }
        _ => cfg
            .multiplier
            .presets
            .iter()
            .map(|p| MultiplierFunction::from_preset(p))
            .collect(),
    }
}

/// Growth per doubling between consecutive ladder entries,
/// `(v_{k+1}/v_k)^{1/log2(N_{k+1}/N_k)}`.
pub fn growth_per_doubling(sizes: &[usize], values: &[f64]) -> Vec<f64> {
    sizes
        .windows(2)
        .zip(values.windows(2))
        .map(|(n, v)| (v[1] / v[0]).powf(1.0 / (n[1] as f64 / n[0] as f64).log2()))
        .collect()
}

fn spread(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

fn fmt_q(q: f64) -> String {
    if q.is_infinite() {
        "inf".into()
    } else {
        format!("{q}")
    }
}

/// Validates and runs the scenario named in `cfg`.
pub fn run(cfg: &ScenarioConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut rep = VerificationReport::new(&cfg.scenario, cfg.seed);
    rep.param("space", &cfg.space);
    rep.param("operator", &cfg.operator);
    rep.param("multiplier", &cfg.multiplier);
    rep.param("norms", &cfg.norms);
    rep.param("weights", &cfg.weights);
    match cfg.scenario.as_str() {
        "torus-hormander" => {
            hormander_sweep(cfg, &mut rep, |n, _s, p, r0| (-n, n * (p / r0 - 1.0)))?
        }
        "power-weights" => power_weights(cfg, &mut rep)?,
        "dirichlet-domain" => dirichlet_domain(cfg, &mut rep)?,
        "schrodinger" => schrodinger(cfg, &mut rep)?,
        "holomorphic" => holomorphic(cfg, &mut rep)?,
        "avakumovic" => avakumovic(cfg, &mut rep)?,
        "plancherel-sweep" => plancherel_sweep(cfg, &mut rep)?,
        "mollification" => mollification(cfg, &mut rep)?,
        "am-criterion" => am_criterion(cfg, &mut rep)?,
        other => {
            return Err(Error::Unknown {
                kind: "scenario",
                name: other.to_string(),
            })
        }
    }
    Ok(rep.finish())
}

/// Runs `cfg` and writes `<stem>.csv` and `<stem>.json` into `out_dir`
/// (default: `output.dir` of the config).
pub fn run_and_write(
    cfg: &ScenarioConfig,
    out_dir: Option<&Path>,
) -> Result<(VerificationReport, PathBuf, PathBuf)> {
    let rep = run(cfg)?;
    let dir = out_dir.unwrap_or(&cfg.output.dir);
    let (csv, json) = rep.write_files(dir, cfg.stem())?;
    Ok((rep, csv, json))
}

/// Hörmander ratios over the size ladder for every `(p, s, q, β)`.
/// `range(n, s, p, r0)` gives the admissible power-weight exponents.
fn hormander_sweep<R>(cfg: &ScenarioConfig, rep: &mut VerificationReport, range: R) -> Result<()>
where
    R: Fn(f64, f64, f64, f64) -> (f64, f64),
{
    let ladder = build_ladder(cfg)?;
    let sizes: Vec<usize> = ladder.iter().map(|(s, _)| *s).collect();
    rep.grid("sizes", sizes.iter().map(|&s| s as f64).collect());
    for &p in &cfg.weights.p {
        for &s in &cfg.norms.s {
            for &q in &cfg.norms.q {
                for &beta in &cfg.weights.beta {
                    let tag = format!("p={p},s={s},q={},beta={beta}", fmt_q(q));
                    let (mut ratios, mut aps) = (Vec::new(), Vec::new());
                    let (mut all_in, mut weight_out) = (true, true);
                    for (size, b) in &ladder {
                        let w = power_weight(&b.space, beta)?;
                        let h = hypothesis_with(
                            &b.space,
                            b.fit.exponent_n,
                            b.fit.exponent_d,
                            s,
                            p,
                            &w,
                            cfg.weights.tau,
                        )?;
                        let (lo, hi) = range(h.n, s, p, h.r0);
                        let h = h.with_power_range(beta, lo, hi);
                        all_in &= h.holds();
                        weight_out &= !h.weight_ok;
                        let fam = family(cfg, &b.dec)?;
                        let hr = hormander_ratio(&b.dec, &fam, s, q, p, &w, h.clone())?;
                        let mut row = hr.row(&cfg.scenario, b.space.n_pts(), q, beta);
                        row.pass = hr.max_ratio.is_finite();
                        rep.push_row(row);
                        rep.hypotheses.push(h);
                        rep.witness(&format!("t_grid[N={size}]"), &hr.t_grid);
                        ratios.push(hr.max_ratio);
                        aps.push(ap_constant(&b.space, &w, p)?);
                    }
                    rep.witness(&format!("ap[{tag}]"), &aps);
                    rep.witness(&format!("ratio[{tag}]"), &ratios);
                    if all_in {
                        let g = growth_per_doubling(&sizes, &ratios)
                            .into_iter()
                            .fold(1.0, f64::max);
                        rep.push_check(Check::at_most(format!("ratio-growth[{tag}]"), g, 1.25));
                    } else if weight_out {
                        let g = growth_per_doubling(&sizes, &aps)
                            .into_iter()
                            .fold(f64::INFINITY, f64::min);
                        rep.push_check(Check::at_least(format!("ap-growth[{tag}]"), g, 1.5));
                        rep.push_check(Check::flag(format!("out-of-hypothesis[{tag}]"), true));
                    }
                }
            }
        }
    }
    Ok(())
}

fn power_weights(cfg: &ScenarioConfig, rep: &mut VerificationReport) -> Result<()> {
    let range = |n: f64, s: f64, p: f64, _r0: f64| ((-n).max(-s * p), (n * (p - 1.0)).min(s * p));
    hormander_sweep(cfg, rep, range)?;
    let size = cfg.space.sizes[0];
    let b = build(cfg, size)?;
    let n = b.fit.exponent_n;
    let fam = family(cfg, &b.dec)?;
    let f = &fam[fam.len() / 2];
    for &p in cfg.weights.p.iter().filter(|&&p| p > 1.0 && p.is_finite()) {
        for &s in &cfg.norms.s {
            for &beta in &cfg.weights.beta {
                let (lo, hi) = range(n, s, p, 1.0);
                if !(lo < beta && beta < hi) {
                    continue;
                }
                let w = power_weight(&b.space, beta)?;
                let d = duality_check(&b.dec, f, p, &w)?;
                let tag = format!("p={p},beta={beta},N={size}");
                let tol = if p == 2.0 {
                    1e-9
                } else {
                    crate::verify::DUALITY_LOWER_TOL
                };
                rep.push_check(Check::flag(format!("duality-overlap[{tag}]"), d.overlap));
                rep.push_check(Check::at_most(
                    format!("duality-lower[{tag}]"),
                    d.lower_residual,
                    tol,
                ));
            }
        }
    }
    Ok(())
}

fn dirichlet_domain(cfg: &ScenarioConfig, rep: &mut VerificationReport) -> Result<()> {
    let text = cfg.space.mask.as_deref().unwrap_or_default();
    let (width, height, cells) = parse_mask(text)?;
    let b = build(cfg, 0)?;
    let full = Arc::new(build_masked_grid(
        width,
        height,
        &vec![true; width * height],
    )?);
    let full_dec = decompose(&build_dirichlet_laplacian(full)?)?;
    let embed: Vec<usize> = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| **c)
        .map(|(i, _)| i)
        .collect();
    let ts = if cfg.grids.t.is_empty() {
        dyadic_times(0.5, 8.0)
    } else {
        cfg.grids.t.clone()
    };
    rep.grid("t", ts.clone());
    let mut excess = f64::NEG_INFINITY;
    for &t in &ts {
        let inner = heat_kernel(&b.dec, t)?;
        let outer = heat_kernel(&full_dec, t)?;
        for (a, &ea) in embed.iter().enumerate() {
            for (c, &ec) in embed.iter().enumerate() {
                excess = excess.max(inner[(a, c)] - outer[(ea, ec)]);
            }
        }
    }
    rep.push_check(Check::at_most("domination-excess", excess, 1e-12));
    let fit = fit_gaussian_bound(&b.space, &b.dec, 2.0, &ts)?;
    rep.push_check(Check::at_most(
        "negative-entries",
        fit.negative_entries as f64,
        0.0,
    ));
    let mut row = ReportRow::new("dirichlet-domain:gaussian", b.space.n_pts());
    row.constant = Some(fit.big_c);
    row.pass = fit.big_c.is_finite();
    rep.push_row(row);
    rep.witness("gaussian", &fit);
    let w = Weight::constant(b.space.n_pts(), 1.0)?;
    let fam = family(cfg, &b.dec)?;
    for &p in &cfg.weights.p {
        for &s in &cfg.norms.s {
            for &q in &cfg.norms.q {
                let h = hypothesis_with(
                    &b.space,
                    b.fit.exponent_n,
                    b.fit.exponent_d,
                    s,
                    p,
                    &w,
                    cfg.weights.tau,
                )?;
                let hr = hormander_ratio(&b.dec, &fam, s, q, p, &w, h.clone())?;
                let mut row = hr.row(&cfg.scenario, b.space.n_pts(), q, 0.0);
                row.pass = hr.max_ratio.is_finite();
                rep.push_row(row);
                rep.hypotheses.push(h);
            }
        }
    }
    Ok(())
}

fn schrodinger(cfg: &ScenarioConfig, rep: &mut VerificationReport) -> Result<()> {
    let ts = if cfg.grids.t.is_empty() {
        dyadic_times(0.25, 16.0)
    } else {
        cfg.grids.t.clone()
    };
    rep.grid("t", ts.clone());
    let mut free_cfg = cfg.clone();
    free_cfg.operator.builder = "laplacian".into();
    for &size in &cfg.space.sizes {
        let b = build(cfg, size)?;
        let free = build(&free_cfg, size)?;
        let mut excess = f64::NEG_INFINITY;
        for &t in &ts {
            let pv = heat_kernel(&b.dec, t)?;
            let p0 = heat_kernel(&free.dec, t)?;
            excess = excess.max((pv - p0).max());
        }
        let fit_v = fit_gaussian_bound(&b.space, &b.dec, 2.0, &ts)?;
        let fit_0 = fit_gaussian_bound(&free.space, &free.dec, 2.0, &ts)?;
        rep.push_check(Check::at_most(
            format!("domination-excess[N={size}]"),
            excess,
            1e-12,
        ));
        rep.push_check(Check::at_most(
            format!("gaussian-domination[N={size}]"),
            fit_v.big_c,
            fit_0.big_c,
        ));
        let mut row = ReportRow::new("schrodinger:gaussian", b.space.n_pts());
        row.constant = Some(fit_v.big_c);
        row.upper = Some(fit_0.big_c);
        row.pass = fit_v.big_c <= fit_0.big_c;
        rep.push_row(row);
        let fam = family(cfg, &b.dec)?;
        for &p in &cfg.weights.p {
            for &s in &cfg.norms.s {
                for &q in &cfg.norms.q {
                    for &beta in &cfg.weights.beta {
                        let w = power_weight(&b.space, beta)?;
                        let h = hypothesis_with(
                            &b.space,
                            b.fit.exponent_n,
                            b.fit.exponent_d,
                            s,
                            p,
                            &w,
                            cfg.weights.tau,
                        )?;
                        let hr = hormander_ratio(&b.dec, &fam, s, q, p, &w, h.clone())?;
                        let mut row = hr.row(&cfg.scenario, b.space.n_pts(), q, beta);
                        row.pass = hr.max_ratio.is_finite();
                        rep.push_row(row);
                        rep.hypotheses.push(h);
                    }
                }
            }
        }
    }
    Ok(())
}

fn holomorphic(cfg: &ScenarioConfig, rep: &mut VerificationReport) -> Result<()> {
    use std::f64::consts::PI;
    let thetas = if cfg.grids.theta.is_empty() {
        vec![PI / 4.0, PI / 8.0, PI / 16.0]
    } else {
        cfg.grids.theta.clone()
    };
    let taus = if cfg.grids.tau.is_empty() {
        vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0]
    } else {
        cfg.grids.tau.clone()
    };
    rep.grid("theta", thetas.clone());
    rep.grid("tau", taus.clone());
    let closed = taus
        .iter()
        .map(|&t| (imaginary_power_derivative(t, 1) - t.abs()).abs())
        .fold(0.0, f64::max);
    rep.push_check(Check::at_most("closed-form-first-derivative", closed, 0.0));
    let numeric = taus
        .iter()
        .map(|&t| (numeric_log_derivative_sup(t, 1) - t.abs()).abs() / t.abs().max(1.0))
        .fold(0.0, f64::max);
    rep.push_check(Check::at_most("numeric-first-derivative", numeric, 1e-2));
    let dim = cfg.space.dim as f64;
    for &size in &cfg.space.sizes {
        let b = build(cfg, size)?;
        for &p in &cfg.weights.p {
            for &beta in &cfg.weights.beta {
                let w = power_weight(&b.space, beta)?;
                let h = holomorphic_bound_check(&b.dec, &thetas, &taus, p, &w, dim)?;
                let tag = format!("N={size},p={p},beta={beta}");
                for &(theta, g) in &h.per_theta {
                    let mut row = ReportRow::new(&cfg.scenario, b.space.n_pts());
                    row.p = Some(p);
                    row.beta = Some(beta);
                    row.s = Some(theta);
                    row.constant = Some(g);
                    row.pass = g.is_finite();
                    rep.push_row(row);
                }
                rep.push_check(Check::flag(
                    format!("derivative-bounds[{tag}]"),
                    h.derivative_ok,
                ));
                rep.push_check(Check::at_most(
                    format!("alpha[{tag}]"),
                    h.alpha,
                    h.alpha_bound,
                ));
                rep.witness(&format!("holomorphic[{tag}]"), &h);
            }
        }
    }
    Ok(())
}

/// `#{k : 2|sin(πk/N)| ∈ [lo, hi]} / N`, the exact window mass on `Z_N`.
pub fn cycle_window_count(n: usize, lo: f64, hi: f64) -> f64 {
    let count = (0..n)
        .filter(|&k| {
            let l = 2.0 * (std::f64::consts::PI * k as f64 / n as f64).sin().abs();
            l >= lo && l <= hi
        })
        .count();
    count as f64 / n as f64
}

fn avakumovic(cfg: &ScenarioConfig, rep: &mut VerificationReport) -> Result<()> {
    let rs = if cfg.grids.r.is_empty() {
        vec![0.3, 0.6, 0.9, 1.2]
    } else {
        cfg.grids.r.clone()
    };
    rep.grid("R", rs.clone());
    let dim = cfg.space.dim as f64;
    let mut sups = Vec::new();
    let mut oracle_gap: f64 = 0.0;
    let mut completeness: f64 = 0.0;
    for &size in &cfg.space.sizes {
        let b = build(cfg, size)?;
        let res = avakumovic_check(&b.dec, dim, &rs)?;
        if cfg.space.builder == "torus" && cfg.space.dim == 1 && cfg.operator.builder == "laplacian"
        {
            for &(r, value, _) in &res.per_r {
                oracle_gap = oracle_gap.max((value - cycle_window_count(size, r, r + 1.0)).abs());
            }
        }
        let top = b.dec.lambda_max().powf(1.0 / b.dec.order_m()) + 1.0;
        let mu_min = b.space.mu().iter().copied().fold(f64::INFINITY, f64::min);
        completeness =
            completeness.max((spectral_window_norm(&b.dec, 0.0, top) - 1.0 / mu_min).abs());
        let mut row = ReportRow::new(&cfg.scenario, b.space.n_pts());
        row.constant = Some(res.sup_ratio);
        row.pass = res.sup_ratio.is_finite();
        rep.push_row(row);
        rep.witness(&format!("per_R[N={size}]"), &res.per_r);
        sups.push(res.sup_ratio);
    }
    rep.push_check(Check::at_most("stability", spread(&sups), 2.0));
    rep.push_check(Check::at_most("eigen-count-oracle", oracle_gap, 1e-10));
    rep.push_check(Check::at_most("completeness", completeness, 1e-9));
    Ok(())
}

fn plancherel_sweep(cfg: &ScenarioConfig, rep: &mut VerificationReport) -> Result<()> {
    let rs = if cfg.grids.r.is_empty() {
        vec![0.25, 0.5, 1.0, 2.0, 4.0]
    } else {
        cfg.grids.r.clone()
    };
    let ns = if cfg.grids.n.is_empty() {
        vec![1, 2, 4]
    } else {
        cfg.grids.n.clone()
    };
    rep.grid("R", rs.clone());
    rep.grid("N", ns.iter().map(|&n| n as f64).collect());
    let ladder = build_ladder(cfg)?;
    for &q in &cfg.norms.q {
        let (mut consts, mut nq_consts) = (Vec::new(), Vec::new());
        for (size, b) in &ladder {
            let seed = cfg.seed ^ (*size as u64);
            let res = plancherel_constant(&b.dec, q, &rs, cfg.multiplier.trials, seed)?;
            let nq = plancherel_nq_constant(&b.dec, q, &ns, cfg.multiplier.trials, seed)?;
            if q.is_infinite() {
                rep.push_check(Check::at_most(
                    format!("identity-bound[N={size}]"),
                    res.identity_excess,
                    1e-9,
                ));
                rep.push_check(Check::at_most(
                    format!("identity-bound-nq[N={size}]"),
                    nq.identity_excess,
                    1e-9,
                ));
            }
            for (name, r) in [("plancherel-sweep", &res), ("plancherel-sweep:nq", &nq)] {
                let mut row = ReportRow::new(name, b.space.n_pts());
                row.q = Some(q);
                row.constant = Some(r.constant);
                row.pass = r.constant.is_finite();
                rep.push_row(row);
            }
            rep.witness(&format!("plancherel[N={size},q={}]", fmt_q(q)), &res);
            consts.push(res.constant);
            nq_consts.push(nq.constant);
        }
        if q.is_finite() {
            rep.push_check(Check::at_most(
                format!("stability[q={}]", fmt_q(q)),
                spread(&consts),
                2.0,
            ));
            rep.push_check(Check::at_most(
                format!("stability-nq[q={}]", fmt_q(q)),
                spread(&nq_consts),
                2.0,
            ));
        }
    }
    Ok(())
}

fn mollification(cfg: &ScenarioConfig, rep: &mut VerificationReport) -> Result<()> {
    let ns = if cfg.grids.n.is_empty() {
        vec![8, 16, 32, 64, 128, 256]
    } else {
        cfg.grids.n.clone()
    };
    rep.grid("N", ns.iter().map(|&n| n as f64).collect());
    let g = crate::norms::GridFunction::sample_real(0.0, 1.0, cfg.norms.grid_points, unit_bump);
    for &s in &cfg.norms.s {
        for &q in &cfg.norms.q {
            let r = mollification_rate(&g, s, q, &ns)?;
            let mut row = ReportRow::new(&cfg.scenario, g.len());
            row.s = Some(s);
            row.q = Some(q);
            row.constant = Some(r.slope);
            row.pass = r.pass;
            rep.push_row(row);
            rep.witness(&format!("errors[s={s},q={}]", fmt_q(q)), &r.errors);
        }
    }
    Ok(())
}

fn am_criterion(cfg: &ScenarioConfig, rep: &mut VerificationReport) -> Result<()> {
    for &size in &cfg.space.sizes {
        let b = build(cfg, size)?;
        for (k, f) in family(cfg, &b.dec)?.iter().enumerate() {
            let seed = cfg.seed ^ ((size as u64) << 16) ^ k as u64;
            let r = am_criterion_check(
                &b.dec,
                f,
                cfg.multiplier.root,
                cfg.multiplier.p0,
                cfg.multiplier.smoothing_m,
                cfg.multiplier.balls,
                cfg.multiplier.trials,
                seed,
            )?;
            for (name, c) in [("am-criterion:a", r.c_a), ("am-criterion:b", r.c_b)] {
                let mut row = ReportRow::new(name, b.space.n_pts());
                row.p = Some(cfg.multiplier.p0);
                row.constant = Some(c);
                row.pass = c.is_finite();
                rep.push_row(row);
            }
            rep.witness(&format!("balls[N={size},{}]", f.name()), &r.balls);
        }
    }
    Ok(())
}
