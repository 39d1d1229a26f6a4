//! Spectral decomposition, multipliers F(L), the heat semigroup and the
//! smoothing family A_r = I - (I - e^{-r^m L})^M.

use std::sync::Arc;

use hlab::calculus::{
    apply_multiplier, build_lattice_laplacian, build_schrodinger, decompose, dyadic_pieces,
    heat_operator, smoothing_family, smoothing_family_direct, MultiplierFunction,
};
use hlab::space::build_torus;

fn main() -> hlab::Result<()> {
    let space = Arc::new(build_torus(32, 1)?);
    let op = build_lattice_laplacian(space.clone())?;
    let dec = decompose(&op)?;
    println!(
        "Z_32 Laplacian: λ ∈ [{:.3e}, {:.4}], reconstruction error {:.2e}, orthonormality error {:.2e}",
        dec.eigenvalues()[0],
        dec.lambda_max(),
        dec.reconstruction_error(&op),
        dec.orthonormality_error()
    );

    let one = apply_multiplier(&dec, &MultiplierFunction::constant(1.0), false)?;
    let id = hlab::calculus::MultiplierOperator::from_real(
        &nalgebra::DMatrix::identity(32, 32),
        dec.mu(),
    )?;
    println!(
        "F ≡ 1 gives the identity: max diff {:.2e}",
        one.max_diff(&id)
    );

    let (a, b) = (heat_operator(&dec, 1.5)?, heat_operator(&dec, 2.5)?);
    let semigroup = (&a * &b - heat_operator(&dec, 4.0)?).abs().max();
    println!("semigroup e^(-1.5L) e^(-2.5L) = e^(-4L): error {semigroup:.2e}");

    let riesz = apply_multiplier(
        &dec,
        &MultiplierFunction::riesz_mean(1.0).dilate(0.5),
        false,
    )?;
    println!(
        "Riesz mean (1-λ/2)_+: K(0,0) = {:.4}, imaginary part {:.1e}",
        riesz.kernel_at(0, 0).re,
        riesz.max_imag()
    );

    let gap = (smoothing_family(&dec, 2.0, 3)? - smoothing_family_direct(&dec, 2.0, 3)?)
        .abs()
        .max();
    println!("A_r binomial vs direct path (r=2, M=3): {gap:.2e}");

    let pieces = dyadic_pieces(&MultiplierFunction::heat(1.0))?;
    println!(
        "dyadic levels meeting the spectrum: {:?}",
        pieces.levels_meeting(1e-3, dec.lambda_max())
    );

    let v: Vec<f64> = (0..32).map(|i| (i % 5) as f64 / 4.0).collect();
    let schr = decompose(&build_schrodinger(space, &v)?)?;
    println!(
        "Schrödinger L + V: bottom of spectrum {:.4}",
        schr.eigenvalues()[0]
    );
    Ok(())
}
