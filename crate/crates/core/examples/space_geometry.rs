//! Balls, volumes and fitted doubling/growth exponents of lattice spaces.

use hlab::space::{
    build_masked_grid, build_segment, build_torus, doubling_radii, fit_doubling, parse_mask,
};

fn main() -> hlab::Result<()> {
    let cycle = build_torus(64, 1)?;
    println!(
        "Z_64: {} points, diameter {}",
        cycle.n_pts(),
        cycle.diameter()
    );
    for r in [1.0, 2.0, 4.0, 8.0] {
        println!("  V(0, {r}) = {}", cycle.volume(0, r)?);
    }

    for (name, space) in [
        ("Z_64", cycle),
        ("Z_16^2", build_torus(16, 2)?),
        ("segment r=32", build_segment(32)?),
    ] {
        let fit = fit_doubling(&space, &doubling_radii(&space))?;
        println!(
            "{name:<14} n = {:.2} (C = {:.3}), D = {:.2} (C = {:.3})",
            fit.exponent_n, fit.constant_cn, fit.exponent_d, fit.constant_cd
        );
    }

    let (w, h, cells) = parse_mask("####\n#..#\n####")?;
    let ring = build_masked_grid(w, h, &cells)?;
    println!(
        "ring mask: {} cells, annulus(0, 1, 2) = {:?}",
        ring.n_pts(),
        ring.annulus(0, 1.0, 2)?
    );
    Ok(())
}
