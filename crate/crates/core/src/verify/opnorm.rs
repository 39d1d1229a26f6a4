use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::MultiplierOperator;
use crate::error::{invalid, Result};
use crate::space::MetricMeasureSpace;
use crate::weights::Weight;

pub const DEFAULT_STARTS: usize = 64;
pub const DEFAULT_OPNORM_SEED: u64 = 0x0b0e_5eed;
const MAX_ITERATIONS: usize = 100;

/// Certified interval for `‖T‖_{L^p(w)→L^p(w)}`.
#[derive(Debug, Clone, Serialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub method_lower: String,
    pub method_upper: String,
    /// Function attaining `lower`, normalized in `L^p(w)`.
    #[serde(skip)]
    pub witness: Vec<Complex64>,
}

impl NormBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn overlaps(&self, other: &NormBracket, rel_tol: f64) -> bool {
        let slack = rel_tol * self.upper.max(other.upper);
        self.lower <= other.upper + slack && other.lower <= self.upper + slack
    }
}

/// Options for [`weighted_opnorm_with`].
#[derive(Debug, Clone)]
pub struct OpnormOptions {
    pub starts: usize,
    pub seed: u64,
    /// Radii of the ball indicators in the structured test set.
    pub ball_radii: Vec<f64>,
    /// Extra test functions, e.g. eigenvectors.
    pub extra_tests: Vec<Vec<Complex64>>,
}

impl Default for OpnormOptions {
    fn default() -> Self {
        Self {
            starts: DEFAULT_STARTS,
            seed: DEFAULT_OPNORM_SEED,
            ball_radii: vec![1.0, 2.0, 4.0, 8.0],
            extra_tests: Vec::new(),
        }
    }
}

fn lp_norm(v: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        v.iter().map(|z| z.norm()).fold(0.0, f64::max)
    } else {
        v.iter()
            .map(|z| z.norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// `dual_p(y)_i = |y_i|^{p-1} sgn(y_i) / ‖y‖_p^{p-1}`, so that
/// `‖dual_p(y)‖_{p'} = 1` and `⟨y, dual_p(y)⟩ = ‖y‖_p`.
fn dual_vector(y: &[Complex64], p: f64) -> Vec<Complex64> {
    let norm = lp_norm(y, p);
    if norm == 0.0 {
        return vec![Complex64::new(0.0, 0.0); y.len()];
    }
    y.iter()
        .map(|z| {
            let r = z.norm();
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                (z / r) * (r / norm).powf(p - 1.0)
            }
        })
        .collect()
}

fn matvec(a: &DMatrix<Complex64>, x: &[Complex64]) -> Vec<Complex64> {
    (a * DVector::from_column_slice(x))
        .iter()
        .copied()
        .collect()
}

/// Higham's p-norm power method started from `x`; returns the best
/// `‖Ax‖_p` seen and its unit vector.
fn pnorm_power(
    a: &DMatrix<Complex64>,
    ah: &DMatrix<Complex64>,
    p: f64,
    x0: Vec<Complex64>,
) -> (f64, Vec<Complex64>) {
    let q = p / (p - 1.0);
    let norm = lp_norm(&x0, p);
    if norm == 0.0 {
        return (0.0, x0);
    }
    let mut x: Vec<Complex64> = x0.iter().map(|v| v / norm).collect();
    let mut best = (0.0, x.clone());
    for _ in 0..MAX_ITERATIONS {
        let y = matvec(a, &x);
        let gamma = lp_norm(&y, p);
        if gamma > best.0 {
            best = (gamma, x.clone());
        }
        if gamma == 0.0 {
            break;
        }
        let z = matvec(ah, &dual_vector(&y, p));
        let zx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
        if lp_norm(&z, q) <= zx * (1.0 + 1e-13) {
            break;
        }
        x = dual_vector(&z, q);
    }
    best
}

/// `‖T‖_{L¹(ν)} = max_y Σ_x |T(x,y)| ν(x)/ν(y)`.
pub fn l1_norm(t: &MultiplierOperator, nu: &[f64]) -> f64 {
    let m = t.matrix();
    (0..t.n())
        .map(|y| (0..t.n()).map(|x| m[(x, y)].norm() * nu[x]).sum::<f64>() / nu[y])
        .fold(0.0, f64::max)
}

/// `‖T‖_{L^∞} = max_x Σ_y |T(x,y)|`.
pub fn linf_norm(t: &MultiplierOperator) -> f64 {
    t.matrix()
        .row_iter()
        .map(|r| r.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn check_inputs(
    space: &MetricMeasureSpace,
    t: &MultiplierOperator,
    p: f64,
    w: &Weight,
) -> Result<()> {
    if !(p >= 1.0) {
        return Err(invalid("p", format!("need p >= 1, got {p}")));
    }
    if t.n() != space.n_pts() || w.len() != space.n_pts() {
        return Err(invalid("T", "operator, weight and space sizes differ"));
    }
    Ok(())
}

/// [`weighted_opnorm_with`] with default options.
pub fn weighted_opnorm(
    space: &MetricMeasureSpace,
    t: &MultiplierOperator,
    p: f64,
    w: &Weight,
) -> Result<NormBracket> {
    weighted_opnorm_with(space, t, p, w, &OpnormOptions::default())
}

/// Brackets `‖T‖` on `L^p(X, w dμ)`.
///
/// With `ν = wμ`, `T` is conjugated to `T̃ = D_ν^{1/p} T D_ν^{-1/p}` on plain
/// `ℓ^p`. The lower bound is the best of the p-norm power method from
/// seeded random starts and a structured test set (point masses, ball
/// indicators, extra tests). The upper bound interpolates the exactly
/// computable `L¹(ν)` and `L^∞` norms. For `p ∈ {1, 2, ∞}` both sides are
/// exact.
pub fn weighted_opnorm_with(
    space: &MetricMeasureSpace,
    t: &MultiplierOperator,
    p: f64,
    w: &Weight,
    opts: &OpnormOptions,
) -> Result<NormBracket> {
    check_inputs(space, t, p, w)?;
    let n = t.n();
    let nu: Vec<f64> = w
        .values()
        .iter()
        .zip(space.mu())
        .map(|(a, b)| a * b)
        .collect();

    if p == 1.0 || p.is_infinite() {
        let (value, col) = if p == 1.0 {
            let m = t.matrix();
            (0..n)
                .map(|y| {
                    (
                        (0..n).map(|x| m[(x, y)].norm() * nu[x]).sum::<f64>() / nu[y],
                        y,
                    )
                })
                .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a })
        } else {
            (linf_norm(t), 0)
        };
        let mut witness = vec![Complex64::new(0.0, 0.0); n];
        if p == 1.0 {
            witness[col] = Complex64::new(1.0 / nu[col], 0.0);
        } else {
            let row = t
                .matrix()
                .row_iter()
                .enumerate()
                .map(|(x, r)| (r.iter().map(|v| v.norm()).sum::<f64>(), x))
                .fold((0.0, 0), |a, b| if b.0 > a.0 { b } else { a })
                .1;
            for y in 0..n {
                let v = t.matrix()[(row, y)];
                witness[y] = if v.norm() > 0.0 {
                    v.conj() / v.norm()
                } else {
                    Complex64::new(1.0, 0.0)
                };
            }
        }
        let tag = if p == 1.0 { "exact-l1" } else { "exact-linf" };
        return Ok(NormBracket {
            lower: value,
            upper: value,
            method_lower: tag.into(),
            method_upper: tag.into(),
            witness,
        });
    }

    let scale: Vec<f64> = nu.iter().map(|v| v.powf(1.0 / p)).collect();
    let a = DMatrix::from_fn(n, n, |x, y| t.matrix()[(x, y)] * (scale[x] / scale[y]));

    if p == 2.0 {
        let gram = a.adjoint() * &a;
        let eig = gram.symmetric_eigen();
        let k = eig.eigenvalues.imax();
        let v = eig.eigenvectors.column(k).into_owned();
        let sigma = (&a * &v).norm() / v.norm();
        let witness: Vec<Complex64> = (0..n).map(|y| v[y] / scale[y]).collect();
        return Ok(NormBracket {
            lower: sigma,
            upper: sigma,
            method_lower: "exact-gram-eigen".into(),
            method_upper: "exact-gram-eigen".into(),
            witness,
        });
    }

    let ah = a.adjoint();
    let mut tests: Vec<(Vec<Complex64>, &'static str)> = Vec::new();
    for y in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[y] = Complex64::new(1.0, 0.0);
        tests.push((e, "point-mass"));
    }
    for &r in &opts.ball_radii {
        for c in 0..n {
            let ball = space.ball(c, r)?;
            if ball.len() <= 1 {
                continue;
            }
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            for x in ball {
                e[x] = Complex64::new(scale[x], 0.0);
            }
            tests.push((e, "ball-indicator"));
        }
    }
    for f in &opts.extra_tests {
        if f.len() == n {
            tests.push((
                f.iter().zip(&scale).map(|(v, s)| v * *s).collect(),
                "extra-test",
            ));
        }
    }
    let structured = tests
        .par_iter()
        .enumerate()
        .map(|(i, (x, tag))| {
            let norm = lp_norm(x, p);
            let val = if norm == 0.0 {
                0.0
            } else {
                lp_norm(&matvec(&a, x), p) / norm
            };
            (val, i, *tag)
        })
        .reduce(|| (0.0, usize::MAX, ""), best_of);

    let power = (0..opts.starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k as u64));
            let x0: Vec<Complex64> = (0..n)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let (val, x) = pnorm_power(&a, &ah, p, x0);
            (val, k, x)
        })
        .reduce(
            || (0.0, usize::MAX, Vec::new()),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );

    let (lower, method_lower, witness_scaled) = if power.0 >= structured.0 {
        (power.0, "power-iteration".to_string(), power.2)
    } else {
        let x = &tests[structured.1].0;
        let norm = lp_norm(x, p);
        (
            structured.0,
            structured.2.to_string(),
            x.iter().map(|v| v / norm).collect(),
        )
    };
    let witness = witness_scaled
        .iter()
        .zip(&scale)
        .map(|(v, s)| v / *s)
        .collect();
    let upper = l1_norm(t, &nu).powf(1.0 / p) * linf_norm(t).powf(1.0 - 1.0 / p);
    Ok(NormBracket {
        lower,
        upper,
        method_lower,
        method_upper: "riesz-thorin".into(),
        witness,
    })
}

fn best_of<'a>(a: (f64, usize, &'a str), b: (f64, usize, &'a str)) -> (f64, usize, &'a str) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// `‖f‖_{L^p(ν)}`.
pub fn weighted_lp_norm(f: &[Complex64], nu: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        f.iter().map(|v| v.norm()).fold(0.0, f64::max)
    } else {
        f.iter()
            .zip(nu)
            .map(|(v, m)| v.norm().powf(p) * m)
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{
        apply_multiplier, build_lattice_laplacian, decompose, MultiplierFunction,
    };
    use crate::space::build_torus;
    use crate::weights::power_weight;
    use std::sync::Arc;

    fn two_point() -> MetricMeasureSpace {
        MetricMeasureSpace::new(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn identity_has_unit_bracket() {
        let s = build_torus(6, 1).unwrap();
        let id = MultiplierOperator::from_real(&DMatrix::identity(6, 6), s.mu()).unwrap();
        let w = power_weight(&s, 0.7).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            let b = weighted_opnorm(&s, &id, p, &w).unwrap();
            assert!(
                (b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12,
                "p={p}: {b:?}"
            );
        }
    }

    #[test]
    fn p2_matches_spectrum() {
        let s = Arc::new(build_torus(16, 1).unwrap());
        let dec = decompose(&build_lattice_laplacian(s.clone()).unwrap()).unwrap();
        let f = MultiplierFunction::riesz_mean(1.0).dilate(0.5);
        let t = apply_multiplier(&dec, &f, false).unwrap();
        let b = weighted_opnorm(&s, &t, 2.0, &Weight::constant(16, 1.0).unwrap()).unwrap();
        let want = dec
            .multiplier_values(&f, false)
            .unwrap()
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        assert!((b.lower - want).abs() < 1e-9 && b.width() < 1e-8);
    }

    /// Brute force over 10⁴ directions on the unit sphere of `L^3(w)`.
    #[test]
    fn swap_matrix_matches_sphere_sampling() {
        let s = two_point();
        let t = MultiplierOperator::from_real(
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            s.mu(),
        )
        .unwrap();
        let w = Weight::new(vec![4.0, 1.0]).unwrap();
        let p = 3.0;
        let b = weighted_opnorm(&s, &t, p, &w).unwrap();
        let mut brute: f64 = 0.0;
        for k in 0..10_000 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 10_000.0;
            let f = [Complex64::new(th.cos(), 0.0), Complex64::new(th.sin(), 0.0)];
            let tf = t.apply(&f);
            brute = brute
                .max(weighted_lp_norm(&tf, w.values(), p) / weighted_lp_norm(&f, w.values(), p));
        }
        assert!(
            (b.lower - brute).abs() < 0.01 * brute,
            "{} vs {brute}",
            b.lower
        );
        assert!(b.lower <= b.upper + 1e-12);
        // Witness attains the lower bound.
        let tw = t.apply(&b.witness);
        let ratio =
            weighted_lp_norm(&tw, w.values(), p) / weighted_lp_norm(&b.witness, w.values(), p);
        assert!((ratio - b.lower).abs() < 1e-12);
    }

    #[test]
    fn rejects_p_below_one() {
        let s = two_point();
        let id = MultiplierOperator::from_real(&DMatrix::identity(2, 2), s.mu()).unwrap();
        assert!(weighted_opnorm(&s, &id, 0.5, &Weight::constant(2, 1.0).unwrap()).is_err());
    }

    #[test]
    fn brackets_are_ordered_and_deterministic() {
        let s = Arc::new(build_torus(24, 1).unwrap());
        let dec = decompose(&build_lattice_laplacian(s.clone()).unwrap()).unwrap();
        let w = power_weight(&s, 0.4).unwrap();
        for (k, f) in [
            MultiplierFunction::heat(2.0),
            MultiplierFunction::imaginary_power(1.5),
        ]
        .iter()
        .enumerate()
        {
            let t = apply_multiplier(&dec, f, false).unwrap();
            for p in [1.25, 3.0, 6.0] {
                let a = weighted_opnorm(&s, &t, p, &w).unwrap();
                let b = weighted_opnorm(&s, &t, p, &w).unwrap();
                assert!(a.lower <= a.upper * (1.0 + 1e-12), "{k} p={p}: {a:?}");
                assert_eq!(a.lower.to_bits(), b.lower.to_bits());
            }
        }
    }
}
