use num_complex::Complex64;

use super::GridFunction;
use crate::error::{invalid, Error, Result};

pub const DEFAULT_POINTS_PER_CELL: usize = 8;

fn check(n: usize, q: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("N", "must be a positive integer"));
    }
    if !(q >= 1.0) {
        return Err(invalid("q", format!("need q >= 1, got {q}")));
    }
    Ok(())
}

fn combine(cell_sups: &[f64], n: usize, q: f64) -> f64 {
    if q.is_infinite() {
        return cell_sups.iter().copied().fold(0.0, f64::max);
    }
    let sum: f64 = cell_sups.iter().map(|s| s.powf(q)).sum();
    (sum / (3 * n) as f64).powf(1.0 / q)
}

/// `‖F‖_{N,q} = ((1/3N) Σ_{ℓ=1-N}^{2N} sup_{[(ℓ-1)/N, ℓ/N)} |F|^q)^{1/q}`
/// for `F` supported in `[-1, 2]`, with each cell sup taken over
/// `points_per_cell` equispaced points. For `q = ∞` this is the sup norm.
pub fn nq_norm<F>(f: F, n: usize, q: f64, points_per_cell: usize) -> Result<f64>
where
    F: Fn(f64) -> Complex64,
{
    check(n, q)?;
    let ppc = points_per_cell.max(DEFAULT_POINTS_PER_CELL);
    let nf = n as f64;
    let sups: Vec<f64> = (1 - n as i64..=2 * n as i64)
        .map(|l| {
            let left = (l - 1) as f64 / nf;
            (0..ppc)
                .map(|j| f(left + j as f64 / (nf * ppc as f64)).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(combine(&sups, n, q))
}

/// `‖·‖_{N,q}` of a grid function, with cell sups taken over the grid
/// points falling in each cell. The grid must resolve every cell with at
/// least eight points and the samples must vanish outside `[-1, 2]`.
pub fn nq_norm_grid(g: &GridFunction, n: usize, q: f64) -> Result<f64> {
    check(n, q)?;
    if g.spacing > 1.0 / (DEFAULT_POINTS_PER_CELL as f64 * n as f64) + 1e-15 {
        return Err(invalid(
            "grid",
            format!("spacing {} too coarse for N = {n}", g.spacing),
        ));
    }
    let nf = n as f64;
    let mut sups = vec![0.0f64; 3 * n];
    for (x, v) in g.points() {
        let mag = v.norm();
        // Cells are [(ℓ-1)/N, ℓ/N) for ℓ = 1-N..=2N, i.e. index ⌊N x⌋ + N.
        let cell = (nf * x + 1e-9).floor() as i64 + n as i64;
        if cell < 0 || cell >= 3 * n as i64 {
            if mag > super::EDGE_TOL {
                return Err(Error::SupportViolation(format!(
                    "F({x}) = {mag} outside [-1, 2]"
                )));
            }
            continue;
        }
        let s = &mut sups[cell as usize];
        *s = s.max(mag);
    }
    Ok(combine(&sups, n, q))
}
