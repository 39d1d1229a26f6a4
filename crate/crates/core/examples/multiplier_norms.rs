//! Sobolev, Hörmander and ‖·‖_{N,q} norms of multipliers, and the
//! mollification rate for a smooth bump.

use hlab::calculus::MultiplierFunction;
use hlab::norms::{
    bump_eta, dyadic_t_grid, hormander_norm, nq_norm, sobolev_norm, GridFunction,
    DEFAULT_POINTS_PER_CELL,
};
use hlab::verify::{mollification_rate, unit_bump};

fn main() -> hlab::Result<()> {
    let eta = bump_eta();
    for s in [0.0, 0.5, 1.5] {
        println!(
            "‖η‖_(W^2_{s}) = {:.5}, ‖η‖_(W^∞_{s}) = {:.5}",
            sobolev_norm(&eta, s, 2.0)?,
            sobolev_norm(&eta, s, f64::INFINITY)?
        );
    }

    let grid = dyadic_t_grid(0.125, 8.0, 4)?;
    for preset in [
        "riesz_mean:2",
        "heat:1",
        "bump_dilate:2",
        "imaginary_power:1",
    ] {
        let f = MultiplierFunction::from_preset(preset)?;
        let h = hormander_norm(&f, 1.5, f64::INFINITY, &grid)?;
        let nq = nq_norm(|x| f.eval(x.abs()), 8, 2.0, DEFAULT_POINTS_PER_CELL)?;
        println!(
            "{preset:<18} Hörmander(s=1.5, q=∞) = {:.4} at t = {:.3}; ‖F‖_(8,2) = {nq:.4}",
            h.value, h.argmax_t
        );
    }

    let g = GridFunction::sample_real(0.0, 1.0, 4096, unit_bump);
    for (s, q) in [(1.0, 2.0), (2.0, f64::INFINITY)] {
        let r = mollification_rate(&g, s, q, &[8, 16, 32, 64, 128, 256])?;
        println!(
            "mollification s={s}, q={q}: slope {:.3} (bound {:.1})",
            r.slope,
            -s + 0.3
        );
    }
    Ok(())
}
