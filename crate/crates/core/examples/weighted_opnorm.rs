//! Certified brackets for ‖F(L)‖ on L^p(w), with the p = 2 and duality
//! cross-checks.

use std::sync::Arc;

use hlab::calculus::{apply_multiplier, build_lattice_laplacian, decompose, MultiplierFunction};
use hlab::space::build_torus;
use hlab::verify::{duality_check, weighted_opnorm};
use hlab::weights::power_weight;

fn main() -> hlab::Result<()> {
    let space = Arc::new(build_torus(32, 1)?);
    let dec = decompose(&build_lattice_laplacian(space.clone())?)?;
    let f = MultiplierFunction::riesz_mean(1.0).dilate(0.5);
    let t = apply_multiplier(&dec, &f, false)?;
    for beta in [0.0, 0.4, 1.5] {
        let w = power_weight(&space, beta)?;
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let b = weighted_opnorm(&space, &t, p, &w)?;
            println!(
                "β={beta:<4} p={p:<4} [{:.5}, {:.5}] ({} / {})",
                b.lower, b.upper, b.method_lower, b.method_upper
            );
        }
    }
    let d = duality_check(&dec, &f, 3.0, &power_weight(&space, 0.4)?)?;
    println!(
        "duality p=3 vs p'=3/2: primal [{:.5}, {:.5}], dual [{:.5}, {:.5}], lower residual {:.2e}",
        d.primal.lower, d.primal.upper, d.dual.lower, d.dual.upper, d.lower_residual
    );
    Ok(())
}
