//! Plancherel constants, the off-diagonal decay check on dyadic pieces and
//! spectral windows on the torus.

use std::sync::Arc;

use hlab::calculus::{build_lattice_laplacian, decompose, dyadic_pieces, MultiplierFunction};
use hlab::space::build_torus;
use hlab::verify::{
    avakumovic_check, offdiag_decay_check, plancherel_constant, plancherel_nq_constant,
};

fn main() -> hlab::Result<()> {
    for n in [32, 64, 128] {
        let dec = decompose(&build_lattice_laplacian(Arc::new(build_torus(n, 1)?))?)?;
        let q2 = plancherel_constant(&dec, 2.0, &[0.25, 0.5, 1.0, 2.0, 4.0], 16, 7)?;
        let qi = plancherel_constant(&dec, f64::INFINITY, &[0.25, 0.5, 1.0, 2.0, 4.0], 16, 7)?;
        let nq = plancherel_nq_constant(&dec, 2.0, &[1, 2, 4], 16, 7)?;
        println!(
            "Z_{n:<3} q=2: {:.4} (R = {}), q=∞: {:.4} (identity excess {:.1e}), ‖·‖_(N,2): {:.4}",
            q2.constant, q2.witness_scale, qi.constant, qi.identity_excess, nq.constant
        );
    }

    let dec = decompose(&build_lattice_laplacian(Arc::new(build_torus(64, 1)?))?)?;
    let pieces = dyadic_pieces(&MultiplierFunction::constant(1.0))?;
    for level in -3..=1 {
        let r = offdiag_decay_check(&dec, &pieces.piece(level), level, 1.0, 2.0)?;
        println!(
            "off-diagonal decay at R = 2^{level}: constant {:.4} (y = {})",
            r.constant, r.witness_point
        );
    }

    for n in [64, 128, 256] {
        let dec = decompose(&build_lattice_laplacian(Arc::new(build_torus(n, 1)?))?)?;
        let a = avakumovic_check(&dec, 1.0, &[0.3, 0.6, 0.9, 1.2])?;
        println!("Z_{n:<3} spectral windows: sup ratio {:.4}", a.sup_ratio);
    }
    Ok(())
}
