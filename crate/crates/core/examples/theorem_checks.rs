//! Interpolation, the A_r criterion, holomorphic bounds and Hörmander ratios
//! with their hypothesis flags.

use std::f64::consts::PI;
use std::sync::Arc;

use hlab::calculus::{build_lattice_laplacian, decompose, MultiplierFunction};
use hlab::space::build_torus;
use hlab::verify::{
    am_criterion_check, check_hypothesis, holomorphic_bound_check, hormander_ratio,
    interpolation_check, DEFAULT_TAU,
};
use hlab::weights::{power_weight, Weight};

fn main() -> hlab::Result<()> {
    let space = Arc::new(build_torus(32, 1)?);
    let dec = decompose(&build_lattice_laplacian(space.clone())?)?;

    let heat = MultiplierFunction::heat(2.0);
    let (w0, w1) = (power_weight(&space, 0.2)?, power_weight(&space, 0.6)?);
    let i = interpolation_check(&dec, &heat, &w0, &w1, 2.0, 4.0, 3.0)?;
    println!(
        "interpolation r=2, q=4, p=3: t = {}, lhs {:.5} <= 1.05 x {:.5} ({})",
        i.t, i.lhs_lower, i.rhs, i.pass
    );

    for preset in ["const:1", "heat:1"] {
        let f = MultiplierFunction::from_preset(preset)?;
        let am = am_criterion_check(&dec, &f, false, 1.0, 2, 24, 8, 3)?;
        println!(
            "A_r criterion for {preset}: C_a = {:.4}, C_b = {:.4}",
            am.c_a, am.c_b
        );
    }

    let flat = Weight::constant(32, 1.0)?;
    let h = holomorphic_bound_check(
        &dec,
        &[PI / 4.0, PI / 8.0, PI / 16.0],
        &[0.0, 1.0, 2.0, 4.0],
        3.0,
        &flat,
        1.0,
    )?;
    println!(
        "holomorphic: α = {:.3} (bound {}), per θ {:?}",
        h.alpha, h.alpha_bound, h.per_theta
    );

    let family: Vec<_> = [0.25, 1.0, 4.0]
        .iter()
        .map(|t| MultiplierFunction::riesz_mean(2.0).dilate(*t))
        .collect();
    for beta in [0.5, 4.0] {
        let w = power_weight(&space, beta)?;
        let hyp =
            check_hypothesis(&space, 1.5, 4.0, &w, DEFAULT_TAU)?.with_power_range(beta, -1.0, 3.0);
        let r = hormander_ratio(&dec, &family, 1.5, f64::INFINITY, 4.0, &w, hyp)?;
        println!(
            "Hörmander ratio β={beta}: {:.4} [{}]",
            r.max_ratio,
            r.hypothesis.flag()
        );
    }
    Ok(())
}
