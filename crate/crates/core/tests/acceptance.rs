//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hlab::calculus::{
    apply_multiplier, build_lattice_laplacian, chebyshev_apply, decompose, gershgorin_bound,
    heat_operator, MultiplierFunction, SpectralDecomposition,
};
use hlab::runner::{builtin_scenarios, default_config, run, run_and_write};
use hlab::space::{build_torus, doubling_radii, fit_doubling, MetricMeasureSpace};
use hlab::verify::{
    duality_check, dyadic_times, fit_gaussian_bound_with, weighted_opnorm, VerificationReport,
    RESOLUTION_FLOOR,
};
use hlab::weights::{ap_constant, power_weight, Weight};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn torus(n: usize, d: usize) -> (Arc<MetricMeasureSpace>, SpectralDecomposition) {
    let space = Arc::new(build_torus(n, d).unwrap());
    let op = build_lattice_laplacian(space.clone()).unwrap();
    (space, decompose(&op).unwrap())
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn check_value(rep: &VerificationReport, prefix: &str) -> Vec<(String, f64, bool)> {
    rep.checks
        .iter()
        .filter(|c| c.name.starts_with(prefix))
        .map(|c| (c.name.clone(), c.value, c.pass))
        .collect()
}

fn exactness() -> Outcome {
    let (out, elapsed) = timed(|| {
        let mut ap_err: f64 = 0.0;
        for (n, d) in [(32, 1), (8, 2)] {
            let space = build_torus(n, d).unwrap();
            let one = Weight::constant(space.n_pts(), 1.0).unwrap();
            for p in [1.0, 1.5, 2.0, 4.0, 10.0] {
                ap_err = ap_err.max((ap_constant(&space, &one, p).unwrap() - 1.0).abs());
            }
        }
        let (space, dec) = torus(32, 1);
        let id = apply_multiplier(&dec, &MultiplierFunction::constant(1.0), false).unwrap();
        let id_err = (0..32)
            .flat_map(|x| (0..32).map(move |y| (x, y)))
            .map(|(x, y)| {
                let e = if x == y { 1.0 } else { 0.0 };
                (id.matrix()[(x, y)] - Complex64::new(e, 0.0)).norm()
            })
            .fold(0.0, f64::max);
        let one = Weight::constant(32, 1.0).unwrap();
        let mut l2_err: f64 = 0.0;
        for f in [
            MultiplierFunction::riesz_mean(2.0),
            MultiplierFunction::heat(0.7),
            MultiplierFunction::imaginary_power(1.5),
        ] {
            let t = apply_multiplier(&dec, &f, false).unwrap();
            let b = weighted_opnorm(&space, &t, 2.0, &one).unwrap();
            let exact = dec
                .multiplier_values(&f, false)
                .unwrap()
                .iter()
                .map(|v| v.norm())
                .fold(0.0, f64::max);
            l2_err = l2_err.max((b.lower - exact).abs().max((b.upper - exact).abs()));
        }
        let mut semigroup_err: f64 = 0.0;
        for (t, s) in [(0.5, 1.5), (1.0, 3.0), (0.25, 8.0)] {
            let lhs = heat_operator(&dec, t).unwrap() * heat_operator(&dec, s).unwrap();
            let rhs = heat_operator(&dec, t + s).unwrap();
            semigroup_err = semigroup_err.max((lhs - rhs).amax());
        }
        (ap_err, id_err, l2_err, semigroup_err)
    });
    let (ap_err, id_err, l2_err, semigroup_err) = out;
    outcome(
        ap_err <= 1e-12
            && id_err <= 1e-12
            && l2_err <= 1e-9
            && semigroup_err <= 1e-9
            && elapsed.as_secs_f64() < 5.0,
        format!(
            "|A_p(1)-1|={ap_err:.1e} |F≡1 - I|={id_err:.1e} |‖F(L)‖_2 - max|F||={l2_err:.1e} \
             |p_t p_s - p_(t+s)|={semigroup_err:.1e} time={:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn geometry() -> Outcome {
    let (fits, elapsed) = timed(|| {
        [(64, 1), (16, 2)].map(|(n, d)| {
            let space = build_torus(n, d).unwrap();
            (d, fit_doubling(&space, &doubling_radii(&space)).unwrap())
        })
    });
    let mut pass = elapsed.as_secs_f64() < 30.0;
    let mut parts = Vec::new();
    for (d, fit) in &fits {
        pass &= (fit.exponent_n - *d as f64).abs() <= 0.2 && fit.exponent_d <= 0.2;
        parts.push(format!(
            "d={d}: n={:.2} D={:.2}",
            fit.exponent_n, fit.exponent_d
        ));
    }
    outcome(
        pass,
        format!("{} time={:.2}s", parts.join(", "), elapsed.as_secs_f64()),
    )
}

fn gaussian(schrodinger: &VerificationReport) -> Outcome {
    let (space, dec) = torus(64, 1);
    let ts = dyadic_times(0.25, 64.0);
    let c_grid: Vec<f64> = (-3..=3).map(|k| 2f64.powi(k)).collect();
    let fit = fit_gaussian_bound_with(&space, &dec, 2.0, &ts, &c_grid, RESOLUTION_FLOOR).unwrap();
    let fit_ok = fit.big_c.is_finite() && fit.big_c <= 20.0;
    let dom = check_value(schrodinger, "gaussian-domination");
    let excess = check_value(schrodinger, "domination-excess");
    let dom_ok = !dom.is_empty() && dom.iter().chain(&excess).all(|c| c.2);
    let (t, x, y) = fit.argmax;
    outcome(
        fit_ok && dom_ok,
        format!(
            "Z_64 C={:.4e} at c={} (need <= 20; worst entry t={t} d={}); \
             Schrödinger C_V <= C_0: {}",
            fit.big_c,
            fit.c,
            space.d(x, y),
            if dom_ok { "ok" } else { "violated" }
        ),
    )
}

fn plancherel(rep: &VerificationReport, elapsed: Duration) -> Outcome {
    let id = check_value(rep, "identity-bound[");
    let stab = check_value(rep, "stability[q=2]");
    let worst = id.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let pass = !id.is_empty()
        && !stab.is_empty()
        && id.iter().chain(&stab).all(|c| c.2)
        && elapsed.as_secs_f64() < 120.0;
    outcome(
        pass,
        format!(
            "max(lhs - ‖F‖²_∞/μ)={worst:.3e} (<= 1e-9), q=2 spread={:.3} (<= 2), time={:.1}s",
            stab.first().map_or(f64::NAN, |c| c.1),
            elapsed.as_secs_f64()
        ),
    )
}

fn mollification(rep: &VerificationReport) -> Outcome {
    let mut parts = Vec::new();
    for r in &rep.rows {
        let s = r.s.unwrap();
        parts.push(format!(
            "s={s},q={}: slope={:.2} (<= {:.1})",
            r.q.unwrap(),
            r.constant.unwrap(),
            -s + 0.3
        ));
    }
    outcome(rep.rows.len() == 4 && rep.pass, parts.join(", "))
}

fn hormander(rep: &VerificationReport) -> Outcome {
    let growth = check_value(rep, "ratio-growth");
    let ap = check_value(rep, "ap-growth");
    let out = check_value(rep, "out-of-hypothesis");
    let in_rows = rep.rows.iter().filter(|r| r.hypothesis == "in").count();
    let pass = !growth.is_empty() && !ap.is_empty() && !out.is_empty() && in_rows > 0 && rep.pass;
    let fmt = |v: &[(String, f64, bool)]| {
        v.iter()
            .map(|c| format!("{:.3}", c.1))
            .collect::<Vec<_>>()
            .join("/")
    };
    outcome(
        pass,
        format!(
            "in-hypothesis ratio growth={} (<= 1.25), control A_p growth={} (>= 1.5), \
             control flagged out: {}",
            fmt(&growth),
            fmt(&ap),
            out.iter().all(|c| c.2)
        ),
    )
}

fn duality() -> Outcome {
    let (space, dec) = torus(32, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x00d0_a117);
    let mut failures = Vec::new();
    let mut worst_p2: f64 = 0.0;
    let mut overlaps = 0;
    for k in 0..20 {
        let f = match rng.gen_range(0..4) {
            0 => MultiplierFunction::riesz_mean(rng.gen_range(1.0..3.0)),
            1 => MultiplierFunction::heat(rng.gen_range(0.25..4.0)),
            2 => MultiplierFunction::bump_dilate(rng.gen_range(0.5..4.0)),
            _ => MultiplierFunction::imaginary_power(rng.gen_range(-2.0..2.0)),
        };
        let p: f64 = if k % 4 == 0 {
            2.0
        } else {
            [1.25, 1.5, 3.0, 4.0][rng.gen_range(0..4)]
        };
        let beta = rng.gen_range(-0.8..0.8 * (p - 1.0));
        let w = power_weight(&space, beta).unwrap();
        let r = duality_check(&dec, &f, p, &w).unwrap();
        if r.overlap {
            overlaps += 1;
        }
        let ok = if p == 2.0 {
            worst_p2 = worst_p2.max(r.lower_residual);
            r.overlap && r.lower_residual <= 1e-9
        } else {
            r.overlap
        };
        if !ok {
            failures.push(format!("{} p={p} beta={beta:.2}", f.name()));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{overlaps}/20 brackets overlap, p=2 max relative gap={worst_p2:.1e}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!(", failing: {}", failures.join("; "))
            }
        ),
    )
}

fn avakumovic(rep: &VerificationReport) -> Outcome {
    let stab = check_value(rep, "stability");
    let oracle = check_value(rep, "eigen-count-oracle");
    let pass = rep.pass && !stab.is_empty() && !oracle.is_empty();
    outcome(
        pass,
        format!(
            "sup_R ratio spread={:.3} (<= 2), eigen-count residual={:.1e} (<= 1e-10)",
            stab.first().map_or(f64::NAN, |c| c.1),
            oracle.first().map_or(f64::NAN, |c| c.1)
        ),
    )
}

fn chebyshev() -> Outcome {
    let space = Arc::new(build_torus(256, 1).unwrap());
    let op = build_lattice_laplacian(space).unwrap();
    let dec = decompose(&op).unwrap();
    let heat = MultiplierFunction::heat(16.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0xc4eb);
    let input: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let approx = chebyshev_apply(&op, &heat, 32, gershgorin_bound(&op), &input).unwrap();
    let exact = apply_multiplier(&dec, &heat, false)
        .unwrap()
        .apply_real(&input);
    let err = approx
        .values
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    outcome(
        err <= 1e-6 && approx.tail_bound >= err,
        format!(
            "e^(-16L) on Z_256, degree 32: max error={err:.2e} (<= 1e-6), tail bound={:.2e}",
            approx.tail_bound
        ),
    )
}

fn holomorphic(rep: &VerificationReport) -> Outcome {
    let closed = check_value(rep, "closed-form");
    let alpha = check_value(rep, "alpha");
    let pass = rep.pass && !closed.is_empty() && !alpha.is_empty();
    outcome(
        pass,
        format!(
            "sup|λF'_τ| - |τ| = {:.1e} (exact), α={:.3} (<= n/2 + 0.5 = 1)",
            closed.first().map_or(f64::NAN, |c| c.1),
            alpha.first().map_or(f64::NAN, |c| c.1)
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for info in builtin_scenarios() {
        let cfg = default_config(info.name).unwrap();
        let mut bytes = Vec::new();
        for k in 0..2 {
            let out = dir.path().join(format!("{}-{k}", info.name));
            let (_, csv, _) = run_and_write(&cfg, Some(&out)).unwrap();
            bytes.push(std::fs::read(csv).unwrap());
        }
        if bytes[0] != bytes[1] || bytes[0].is_empty() {
            differing.push(info.name);
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} scenarios rerun, {} with differing CSV",
            builtin_scenarios().len(),
            differing.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut reports = BTreeMap::new();
    let mut times = BTreeMap::new();
    for name in [
        "schrodinger",
        "plancherel-sweep",
        "mollification",
        "torus-hormander",
        "avakumovic",
        "holomorphic",
    ] {
        let cfg = default_config(name).unwrap();
        let (rep, elapsed) = timed(|| run(&cfg).unwrap());
        reports.insert(name, rep);
        times.insert(name, elapsed);
    }
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("exactness", Box::new(exactness)),
        ("doubling geometry", Box::new(geometry)),
        (
            "gaussian bound",
            Box::new(|| gaussian(&reports["schrodinger"])),
        ),
        (
            "plancherel sweep",
            Box::new(|| plancherel(&reports["plancherel-sweep"], times["plancherel-sweep"])),
        ),
        (
            "mollification rate",
            Box::new(|| mollification(&reports["mollification"])),
        ),
        (
            "hormander ratio",
            Box::new(|| hormander(&reports["torus-hormander"])),
        ),
        ("duality", Box::new(duality)),
        (
            "avakumovic",
            Box::new(|| avakumovic(&reports["avakumovic"])),
        ),
        ("chebyshev path", Box::new(chebyshev)),
        (
            "holomorphic calculus",
            Box::new(|| holomorphic(&reports["holomorphic"])),
        ),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
