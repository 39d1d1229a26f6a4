//! Degree-32 Chebyshev surrogate of the heat multiplier on Z_256 against the
//! exact spectral path.

use std::sync::Arc;

use hlab::calculus::{
    apply_multiplier, build_lattice_laplacian, chebyshev_apply, decompose, gershgorin_bound,
    MultiplierFunction,
};
use hlab::space::build_torus;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> hlab::Result<()> {
    let op = build_lattice_laplacian(Arc::new(build_torus(256, 1)?))?;
    let lambda = gershgorin_bound(&op);
    let heat = MultiplierFunction::heat(16.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let f: Vec<f64> = (0..256).map(|_| rng.gen::<f64>() - 0.5).collect();

    let exact = apply_multiplier(&decompose(&op)?, &heat, false)?.apply_real(&f);
    for degree in [8, 16, 32, 48] {
        let cheb = chebyshev_apply(&op, &heat, degree, lambda, &f)?;
        let err = cheb
            .values
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        println!(
            "degree {degree:>2}: max error {err:.3e}, a-priori tail bound {:.3e}, Λ = {lambda} (power estimate {:.4})",
            cheb.tail_bound, cheb.power_estimate
        );
    }
    Ok(())
}
