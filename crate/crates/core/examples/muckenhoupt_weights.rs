//! A_p and RH_q constants of power weights, the maximal function and the
//! dual-weight equivalence.

use hlab::space::build_torus;
use hlab::weights::{ap_constant, dual_class_check, maximal, power_weight, rh_constant};

fn main() -> hlab::Result<()> {
    let p = 3.0;
    println!(
        "A_{p} constants of max(|x|,1/2)^β on Z_N (inside A_p iff -1 < β < {}):",
        p - 1.0
    );
    println!("{:>6} {:>12} {:>12} {:>12}", "β", "N=32", "N=64", "N=128");
    for beta in [-0.5, 0.0, 1.0, 1.9, 3.0] {
        let mut line = format!("{beta:>6}");
        for n in [32, 64, 128] {
            let s = build_torus(n, 1)?;
            line += &format!(" {:>12.4}", ap_constant(&s, &power_weight(&s, beta)?, p)?);
        }
        println!("{line}");
    }

    let s = build_torus(64, 1)?;
    let w = power_weight(&s, 0.5)?;
    println!("RH_2 constant of |x|^0.5: {:.4}", rh_constant(&s, &w, 2.0)?);

    let spike: Vec<f64> = (0..64).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
    let m = maximal(&s, &spike)?;
    println!(
        "maximal function of a point mass: M(0) = {:.3}, M(8) = {:.4}, M(32) = {:.4}",
        m[0], m[8], m[32]
    );

    let l = dual_class_check(&s, &w, 1.5, 2.0, 1e3)?;
    println!("dual-weight equivalence at p=1.5, r=2: {l:?}");
    Ok(())
}
