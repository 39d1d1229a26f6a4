use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{MultiplierFunction, SelfAdjointOperator};
use crate::error::{invalid, Error, Result};

/// Coefficients are computed on at least this many Chebyshev nodes; the
/// ones above the requested degree feed the tail bound.
const MIN_NODES: usize = 512;
const POWER_ITERATIONS: usize = 300;

/// Output of [`chebyshev_apply`].
#[derive(Debug, Clone, Serialize)]
pub struct ChebyshevApply {
    pub values: Vec<Complex64>,
    /// `c_0..=c_degree` of `F(Λ(u + 1)/2)` on `[-1, 1]`.
    pub coefficients: Vec<Complex64>,
    /// `2 Σ_{k > degree} |c_k| · ‖f‖_{L²(μ)}`.
    pub tail_bound: f64,
    /// Rayleigh-quotient estimate of the top of the spectrum.
    pub power_estimate: f64,
}

/// Chebyshev coefficients of `g` on `[-1, 1]` from `nodes` Gauss points.
pub fn chebyshev_coefficients<G>(g: G, nodes: usize) -> Vec<Complex64>
where
    G: Fn(f64) -> Complex64,
{
    let theta: Vec<f64> = (0..nodes)
        .map(|j| std::f64::consts::PI * (j as f64 + 0.5) / nodes as f64)
        .collect();
    let samples: Vec<Complex64> = theta.iter().map(|t| g(t.cos())).collect();
    (0..nodes)
        .map(|k| {
            let s: Complex64 = samples
                .iter()
                .zip(&theta)
                .map(|(v, t)| v * (k as f64 * t).cos())
                .sum();
            let c = s * (2.0 / nodes as f64);
            if k == 0 {
                c * 0.5
            } else {
                c
            }
        })
        .collect()
}

/// Row-compressed copy of the operator matrix.
struct Sparse {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Sparse {
    fn new(op: &SelfAdjointOperator) -> Self {
        let m = op.matrix();
        let rows = (0..op.n())
            .map(|x| {
                (0..op.n())
                    .filter_map(|y| {
                        let v = m[(x, y)];
                        (v != 0.0).then_some((y, v))
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    fn mul<T>(&self, f: &[T]) -> Vec<T>
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        self.rows
            .iter()
            .map(|row| row.iter().fold(T::default(), |acc, &(y, v)| acc + f[y] * v))
            .collect()
    }
}

fn mu_norm(f: &[f64], mu: &[f64]) -> f64 {
    f.iter().zip(mu).map(|(v, m)| v * v * m).sum::<f64>().sqrt()
}

/// Largest-eigenvalue estimate by power iteration in `L²(μ)` from a seeded
/// start. The Rayleigh quotient never exceeds the true top eigenvalue.
pub fn power_iteration_estimate(op: &SelfAdjointOperator) -> f64 {
    let a = Sparse::new(op);
    let mu = op.mu();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<f64> = (0..op.n()).map(|_| rng.gen::<f64>() - 0.5).collect();
    let mut rayleigh = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let norm = mu_norm(&v, mu);
        if norm == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let av = a.mul(&v);
        rayleigh = v.iter().zip(&av).zip(mu).map(|((x, y), m)| x * y * m).sum();
        v = av;
    }
    rayleigh
}

/// Upper bound `max_x Σ_y |A(x,y)|` on the spectrum.
pub fn gershgorin_bound(op: &SelfAdjointOperator) -> f64 {
    op.matrix()
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `Σ_{k ≤ degree} c_k T_k(2L/Λ - I) f`, a polynomial surrogate for `F(L) f`
/// that needs only matrix-vector products.
pub fn chebyshev_apply(
    op: &SelfAdjointOperator,
    f: &MultiplierFunction,
    degree: usize,
    lambda_max: f64,
    input: &[f64],
) -> Result<ChebyshevApply> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(invalid(
            "spectral_interval",
            format!("need Λ > 0, got {lambda_max}"),
        ));
    }
    if input.len() != op.n() {
        return Err(invalid("f", format!("expected {} values", op.n())));
    }
    let estimate = power_iteration_estimate(op);
    if estimate > lambda_max * (1.0 + 1e-9) {
        return Err(Error::SpectralBoundTooSmall {
            bound: lambda_max,
            estimate,
        });
    }

    let nodes = MIN_NODES.max(4 * (degree + 1));
    let all = chebyshev_coefficients(|u| f.eval(0.5 * lambda_max * (u + 1.0)), nodes);
    if let Some(c) = all.iter().find(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::UnboundedMultiplier(c.norm()));
    }
    let tail: f64 = all[degree + 1..].iter().map(|c| c.norm()).sum();

    let a = Sparse::new(op);
    let scale = 2.0 / lambda_max;
    let shifted = |v: &[f64]| -> Vec<f64> {
        a.mul(v)
            .iter()
            .zip(v)
            .map(|(av, x)| scale * av - x)
            .collect()
    };
    let mut acc: Vec<Complex64> = input.iter().map(|&x| all[0] * x).collect();
    let mut prev = input.to_vec();
    if degree >= 1 {
        let mut cur = shifted(input);
        for k in 1..=degree {
            for (o, x) in acc.iter_mut().zip(&cur) {
                *o += all[k] * *x;
            }
            if k == degree {
                break;
            }
            let next: Vec<f64> = shifted(&cur)
                .iter()
                .zip(&prev)
                .map(|(s, p)| 2.0 * s - p)
                .collect();
            prev = std::mem::replace(&mut cur, next);
        }
    }
    Ok(ChebyshevApply {
        values: acc,
        coefficients: all[..=degree].to_vec(),
        tail_bound: 2.0 * tail * mu_norm(input, op.mu()),
        power_estimate: estimate,
    })
}
