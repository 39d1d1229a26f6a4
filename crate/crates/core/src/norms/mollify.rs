use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::GridFunction;
use crate::error::{invalid, Error, Result};

const MOMENT_TOL: f64 = 1e-10;
const QUADRATURE_NODES: usize = 40_001;

/// Even bump `exp(-1/(1 - t²))` on `(-1, 1)`.
fn base_bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (-1.0 / (1.0 - t * t)).exp()
    } else {
        0.0
    }
}

/// Solves for `P(t²) = Σ_j a_j t^{2j}` such that the weighted sums
/// `Σ_i w_i b(u_i) P(u_i²) u_i^{2k}` equal `δ_{k0}` for `k = 0..=K`.
fn moment_coefficients(nodes: &[(f64, f64)], even_moments: usize) -> Result<Vec<f64>> {
    let k = even_moments + 1;
    // Gram entries only depend on the total power 2(i + j).
    let mut power_sums = vec![0.0; 2 * k - 1];
    for &(u, weight) in nodes {
        let b = base_bump(u) * weight;
        let u2 = u * u;
        let mut p = 1.0;
        for s in power_sums.iter_mut() {
            *s += b * p;
            p *= u2;
        }
    }
    let gram = DMatrix::from_fn(k, k, |i, j| power_sums[i + j]);
    let mut rhs = DVector::zeros(k);
    rhs[0] = 1.0;
    let sol = gram.lu().solve(&rhs).ok_or(Error::SingularMoments)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMoments);
    }
    Ok(sol.iter().copied().collect())
}

fn eval_poly_even(coeffs: &[f64], t: f64) -> f64 {
    let t2 = t * t;
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t2 + c)
}

/// Compactly supported kernel on `[-1, 1]` with `∫ξ = 1` and
/// `∫ t^κ ξ(t) dt = 0` for `1 ≤ κ ≤ ⌊s⌋ + 2`.
///
/// Built as an even bump times an even polynomial. The polynomial factor
/// changes sign once a second moment must vanish, so `ξ ≥ 0` is not kept.
#[derive(Debug, Clone)]
pub struct Mollifier {
    s: f64,
    /// Highest moment order forced to vanish.
    pub vanishing_order: usize,
    coeffs: Vec<f64>,
}

impl Mollifier {
    pub fn eval(&self, t: f64) -> f64 {
        base_bump(t) * eval_poly_even(&self.coeffs, t)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Number of even moments `k ≥ 1` with `2k ≤ vanishing_order`.
    fn even_constraints(&self) -> usize {
        self.vanishing_order / 2
    }

    pub fn grid(&self, n: usize) -> GridFunction {
        GridFunction::sample_real(-1.25, 1.25, n, |t| self.eval(t))
    }

    /// `∫ t^k ξ(t) dt` by the trapezoid rule (spectrally accurate for the
    /// flat-ended bump).
    pub fn moment(&self, k: u32) -> f64 {
        let h = 2.0 / (QUADRATURE_NODES - 1) as f64;
        (0..QUADRATURE_NODES)
            .map(|i| {
                let t = -1.0 + i as f64 * h;
                t.powi(k as i32) * self.eval(t) * h
            })
            .sum()
    }
}

/// Builds the mollifier for smoothness `s`.
pub fn mollifier_xi(s: f64) -> Result<Mollifier> {
    if !(s >= 0.0) {
        return Err(invalid("s", format!("need s >= 0, got {s}")));
    }
    let vanishing_order = s.floor() as usize + 2;
    let h = 2.0 / (QUADRATURE_NODES - 1) as f64;
    let nodes: Vec<(f64, f64)> = (0..QUADRATURE_NODES)
        .map(|i| (-1.0 + i as f64 * h, h))
        .collect();
    let coeffs = moment_coefficients(&nodes, vanishing_order / 2)?;
    let xi = Mollifier {
        s,
        vanishing_order,
        coeffs,
    };
    let worst = (1..=vanishing_order as u32)
        .map(|k| xi.moment(k).abs())
        .fold((xi.moment(0) - 1.0).abs(), f64::max);
    if worst > MOMENT_TOL {
        return Err(Error::SingularMoments);
    }
    Ok(xi)
}

/// Discrete convolution `G ∗ ξ_N` with `ξ_N(t) = N ξ(N t)`.
///
/// The kernel is realized on the grid of `G`: its samples are the bump
/// times an even polynomial whose coefficients are fitted so that the
/// discrete sums satisfy the same moment conditions as `ξ`. The output
/// window is the input window enlarged by `1/N` on both sides.
pub fn mollify(g: &GridFunction, xi: &Mollifier, n: usize) -> Result<GridFunction> {
    if n == 0 {
        return Err(invalid("N", "must be positive"));
    }
    let h = g.spacing;
    if h > 1.0 / (8.0 * n as f64) + 1e-15 {
        return Err(invalid(
            "grid",
            format!("spacing {h} too coarse for N = {n}; need at most 1/(8N)"),
        ));
    }
    let reach = (1.0 / (n as f64 * h) + 1e-9).floor() as usize;
    let nodes: Vec<(f64, f64)> = (0..=2 * reach)
        .map(|i| (n as f64 * (i as f64 - reach as f64) * h, 1.0))
        .collect();
    let coeffs = moment_coefficients(&nodes, xi.even_constraints())?;
    let kernel: Vec<f64> = nodes
        .iter()
        .map(|&(u, _)| base_bump(u) * eval_poly_even(&coeffs, u))
        .collect();

    let len = g.len();
    let out_len = len + 2 * reach;
    let samples: Vec<Complex64> = (0..out_len)
        .map(|i| {
            // Output point i sits at input index i - reach.
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &c) in kernel.iter().enumerate() {
                // x - t_j with t_j = (j - reach) h.
                let src = i as i64 - j as i64;
                if src >= 0 && (src as usize) < len {
                    acc += g.samples[src as usize] * c;
                }
            }
            acc
        })
        .collect();
    Ok(GridFunction {
        window: (g.window.0 - reach as f64 * h, g.window.1 + reach as f64 * h),
        spacing: h,
        samples,
    })
}

/// Pads `g` with `pad` zero samples on each side.
pub fn pad_zeros(g: &GridFunction, pad: usize) -> GridFunction {
    let mut samples = vec![Complex64::new(0.0, 0.0); pad];
    samples.extend_from_slice(&g.samples);
    samples.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(pad));
    GridFunction {
        window: (
            g.window.0 - pad as f64 * g.spacing,
            g.window.1 + pad as f64 * g.spacing,
        ),
        spacing: g.spacing,
        samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_vanish() {
        for s in [0.0, 0.5, 1.0, 2.0, 3.5] {
            let xi = mollifier_xi(s).unwrap();
            assert!((xi.moment(0) - 1.0).abs() < 1e-10);
            assert!(xi.moment(1).abs() < 1e-10);
            if s >= 1.0 {
                assert!(xi.moment(2).abs() < 1e-10, "s={s}: {}", xi.moment(2));
            }
            assert_eq!(xi.eval(1.0), 0.0);
            assert_eq!(xi.eval(-1.3), 0.0);
        }
    }

    #[test]
    fn second_moment_condition_forces_sign_change() {
        let xi = mollifier_xi(1.0).unwrap();
        let min = (0..2000)
            .map(|i| xi.eval(-1.0 + i as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min);
        assert!(min < 0.0);
    }

    fn bump01(x: f64) -> f64 {
        if x > 0.0 && x < 1.0 {
            (-1.0 / (x * (1.0 - x))).exp()
        } else {
            0.0
        }
    }

    #[test]
    fn reproduces_constants_away_from_edges() {
        let xi = mollifier_xi(1.0).unwrap();
        let n = 16;
        let g = GridFunction::sample_real(0.0, 1.0, 1024, |x| {
            if (0.2..0.8).contains(&x) {
                3.0
            } else {
                0.0
            }
        });
        let out = mollify(&g, &xi, n).unwrap();
        for (x, v) in out.points() {
            if (0.2 + 1.0 / n as f64 + 0.01..0.8 - 1.0 / n as f64 - 0.01).contains(&x) {
                assert!((v.re - 3.0).abs() < 1e-8, "x={x}: {v}");
            }
        }
    }

    #[test]
    fn converges_for_smooth_input() {
        let xi = mollifier_xi(2.0).unwrap();
        let g = GridFunction::sample_real(0.0, 1.0, 2048, bump01);
        let errs: Vec<f64> = [8usize, 32, 128]
            .iter()
            .map(|&n| {
                let out = mollify(&g, &xi, n).unwrap();
                let reach = (out.len() - g.len()) / 2;
                out.sub(&pad_zeros(&g, reach)).unwrap().max_abs()
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    }

    #[test]
    fn rejects_coarse_grids() {
        let xi = mollifier_xi(1.0).unwrap();
        let g = GridFunction::sample_real(0.0, 1.0, 64, bump01);
        assert!(mollify(&g, &xi, 16).is_err());
        assert!(mollify(&g, &xi, 8).is_ok());
    }
}
