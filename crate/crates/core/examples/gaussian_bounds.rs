//! Gaussian upper-bound fits for heat kernels of the free, Schrödinger and
//! Dirichlet operators.

use std::sync::Arc;

use hlab::calculus::{
    build_dirichlet_laplacian, build_lattice_laplacian, build_schrodinger, decompose,
};
use hlab::space::{build_masked_grid, build_torus};
use hlab::verify::{dyadic_times, fit_gaussian_bound};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> hlab::Result<()> {
    let ts = dyadic_times(0.25, 64.0);
    let cycle = Arc::new(build_torus(64, 1)?);
    let free = fit_gaussian_bound(
        &cycle,
        &decompose(&build_lattice_laplacian(cycle.clone())?)?,
        2.0,
        &ts,
    )?;
    println!(
        "Z_64 free: C = {:.4e} at c = {}, worst (t,x,y) = {:?}, unresolved {}",
        free.big_c, free.c, free.argmax, free.unresolved
    );
    for (c, big_c) in &free.per_c {
        println!("  c = {c:<7} C(c) = {big_c:.4e}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v: Vec<f64> = (0..64).map(|_| rng.gen()).collect();
    let pot = fit_gaussian_bound(
        &cycle,
        &decompose(&build_schrodinger(cycle.clone(), &v)?)?,
        2.0,
        &ts,
    )?;
    println!(
        "Z_64 with V in [0,1]: C = {:.4e} (free {:.4e})",
        pot.big_c, free.big_c
    );

    let square = Arc::new(build_masked_grid(8, 8, &[true; 64])?);
    let dir = fit_gaussian_bound(
        &square,
        &decompose(&build_dirichlet_laplacian(square.clone())?)?,
        2.0,
        &dyadic_times(0.5, 8.0),
    )?;
    println!(
        "8x8 Dirichlet square: C = {:.4e}, negative entries {}",
        dir.big_c, dir.negative_entries
    );
    Ok(())
}
