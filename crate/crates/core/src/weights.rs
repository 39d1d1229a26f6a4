//! Muckenhoupt `A_p` and reverse-Hölder `RH_q` constants, the uncentered
//! maximal operator, dual weights and power weights.
//!
//! All suprema over balls run over every distinct ball of the space (see
//! [`BallIndex`]), so the constants below are exact for the finite space.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::space::{BallIndex, MetricMeasureSpace};

/// Strictly positive weight, aligned with the point order of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Weight(Vec<f64>);

impl TryFrom<Vec<f64>> for Weight {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Weight::new(v)
    }
}

impl From<Weight> for Vec<f64> {
    fn from(w: Weight) -> Self {
        w.0
    }
}

impl Weight {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(invalid(
                "w",
                format!("weight must be positive and finite, w({i}) = {v}"),
            ));
        }
        Ok(Self(values))
    }

    pub fn constant(n_pts: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n_pts])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Pointwise power `w^e`.
    pub fn powf(&self, e: f64) -> Self {
        Self(self.0.iter().map(|v| v.powf(e)).collect())
    }

    /// Pointwise product `w0^t w1^(1-t)`.
    pub fn geometric_mix(w0: &Weight, w1: &Weight, t: f64) -> Result<Self> {
        if w0.len() != w1.len() {
            return Err(invalid("w1", "weights have different lengths"));
        }
        Self::new(
            w0.0.iter()
                .zip(&w1.0)
                .map(|(a, b)| a.powf(t) * b.powf(1.0 - t))
                .collect(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("weight serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Conjugate exponent `p'` with `1/p + 1/p' = 1`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn check_len(space: &MetricMeasureSpace, len: usize, what: &'static str) -> Result<()> {
    if len != space.n_pts() {
        return Err(invalid(
            what,
            format!("expected {} values, got {len}", space.n_pts()),
        ));
    }
    Ok(())
}

/// Uncentered maximal function `Mf(x) = sup_{B ∋ x} ⨍_B |f|`.
pub fn maximal(space: &MetricMeasureSpace, f: &[f64]) -> Result<Vec<f64>> {
    check_len(space, f.len(), "f")?;
    Ok(maximal_indexed(&space.ball_index(), space.mu(), f))
}

/// [`maximal`] with a precomputed ball index.
pub fn maximal_indexed(index: &BallIndex, mu: &[f64], f: &[f64]) -> Vec<f64> {
    let n = mu.len();
    (0..index.n_centers())
        .into_par_iter()
        .map(|c| {
            let order = index.order(c);
            let ends = index.ends(c);
            let mut avgs = Vec::with_capacity(ends.len());
            let (mut num, mut den, mut k) = (0.0, 0.0, 0);
            for &e in ends {
                while k < e {
                    let y = order[k];
                    num += f[y].abs() * mu[y];
                    den += mu[y];
                    k += 1;
                }
                avgs.push(num / den);
            }
            // A point at position j lies in every ball whose end exceeds j.
            let mut best = vec![0.0; n];
            let mut suffix = f64::NEG_INFINITY;
            let mut slot = ends.len();
            for j in (0..n).rev() {
                while slot > 0 && ends[slot - 1] > j {
                    slot -= 1;
                    suffix = suffix.max(avgs[slot]);
                }
                best[order[j]] = suffix;
            }
            best
        })
        .reduce(
            || vec![0.0; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.max(y);
                }
                a
            },
        )
}

/// Runs `per_ball` on the running sums of every ball and returns the max.
fn sup_over_balls<S, F>(index: &BallIndex, mu: &[f64], init: S, accumulate: F) -> f64
where
    S: Fn() -> Vec<f64> + Sync,
    F: Fn(&mut [f64], usize, f64) -> Option<f64> + Sync,
{
    (0..index.n_centers())
        .into_par_iter()
        .map(|c| {
            let order = index.order(c);
            let mut state = init();
            let mut best = f64::NEG_INFINITY;
            let mut k = 0;
            for &e in index.ends(c) {
                let mut last = None;
                while k < e {
                    last = accumulate(&mut state, order[k], mu[order[k]]);
                    k += 1;
                }
                if let Some(v) = last {
                    best = best.max(v);
                }
            }
            best
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// `A_p` constant.
///
/// For `p > 1`: `sup_B (⨍_B w)(⨍_B w^{1-p'})^{p-1}`; for `p = 1`:
/// `max_x Mw(x)/w(x)`.
pub fn ap_constant(space: &MetricMeasureSpace, w: &Weight, p: f64) -> Result<f64> {
    check_len(space, w.len(), "w")?;
    if !(p >= 1.0) {
        return Err(invalid("p", format!("A_p requires p >= 1, got {p}")));
    }
    let index = space.ball_index();
    Ok(ap_constant_indexed(&index, space.mu(), w, p))
}

pub fn ap_constant_indexed(index: &BallIndex, mu: &[f64], w: &Weight, p: f64) -> f64 {
    let wv = w.values();
    if p == 1.0 {
        let m = maximal_indexed(index, mu, wv);
        return m
            .iter()
            .zip(wv)
            .map(|(a, b)| a / b)
            .fold(f64::NEG_INFINITY, f64::max);
    }
    if p.is_infinite() {
        // A_∞ via the p → ∞ limit of the product: exp(⨍ log w^{-1}) ⨍ w.
        return sup_over_balls(
            index,
            mu,
            || vec![0.0; 3],
            |s, y, m| {
                s[0] += m;
                s[1] += wv[y] * m;
                s[2] += -wv[y].ln() * m;
                Some((s[1] / s[0]) * (s[2] / s[0]).exp())
            },
        );
    }
    let e = 1.0 - conjugate(p);
    sup_over_balls(
        index,
        mu,
        || vec![0.0; 3],
        |s, y, m| {
            s[0] += m;
            s[1] += wv[y] * m;
            s[2] += wv[y].powf(e) * m;
            Some((s[1] / s[0]) * (s[2] / s[0]).powf(p - 1.0))
        },
    )
}

/// Reverse-Hölder `RH_q` constant.
///
/// Finite `q > 1`: `sup_B (⨍_B w^q)^{1/q} / ⨍_B w`; `q = ∞`:
/// `sup_B max_{x∈B} w(x) / ⨍_B w`. `RH_1` contains every weight and
/// `q = 1` returns `1` by that convention.
pub fn rh_constant(space: &MetricMeasureSpace, w: &Weight, q: f64) -> Result<f64> {
    check_len(space, w.len(), "w")?;
    if q.is_nan() || q < 1.0 {
        return Err(invalid("q", format!("RH_q requires q > 1, got {q}")));
    }
    if q == 1.0 {
        return Ok(1.0);
    }
    Ok(rh_constant_indexed(&space.ball_index(), space.mu(), w, q))
}

pub fn rh_constant_indexed(index: &BallIndex, mu: &[f64], w: &Weight, q: f64) -> f64 {
    let wv = w.values();
    if q.is_infinite() {
        return sup_over_balls(
            index,
            mu,
            || vec![0.0; 3],
            |s, y, m| {
                s[0] += m;
                s[1] += wv[y] * m;
                s[2] = s[2].max(wv[y]);
                Some(s[2] / (s[1] / s[0]))
            },
        );
    }
    sup_over_balls(
        index,
        mu,
        || vec![0.0; 3],
        |s, y, m| {
            s[0] += m;
            s[1] += wv[y] * m;
            s[2] += wv[y].powf(q) * m;
            Some((s[2] / s[0]).powf(1.0 / q) / (s[1] / s[0]))
        },
    )
}

/// Dual weight `w^{1-p'}`.
pub fn dual_weight(w: &Weight, p: f64) -> Result<Weight> {
    if !(p > 1.0) {
        return Err(invalid("p", format!("dual weight requires p > 1, got {p}")));
    }
    Ok(w.powf(1.0 - conjugate(p)))
}

/// Power weight `max(|x|, 1/2)^β`, with `|x|` the distance to the
/// designated origin of the space.
pub fn power_weight(space: &MetricMeasureSpace, beta: f64) -> Result<Weight> {
    let origin = space
        .origin()
        .ok_or_else(|| invalid("space", "power weights need a designated origin"))?;
    Weight::new(
        space
            .dist_row(origin)
            .iter()
            .map(|&d| d.max(0.5).powf(beta))
            .collect(),
    )
}

/// Outcome of comparing both sides of the `A_p ∩ RH` / dual `A` equivalence
/// on a finite space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualClassCheck {
    pub ap: f64,
    pub rh: f64,
    pub dual_ap: f64,
    pub threshold: f64,
    pub consistent: bool,
}

/// Checks `w ∈ A_p ∩ RH_{(r'/p)'}` against `w^{1-p'} ∈ A_{p'/r}` for
/// `1 < p < r'`. Membership is judged by the threshold `tau`; the two sides
/// are consistent when both are below it or both exceed it.
pub fn dual_class_check(
    space: &MetricMeasureSpace,
    w: &Weight,
    p: f64,
    r: f64,
    tau: f64,
) -> Result<DualClassCheck> {
    if !(r > 1.0) {
        return Err(invalid("r", format!("need r > 1, got {r}")));
    }
    let r_conj = conjugate(r);
    if !(p > 1.0 && p < r_conj) {
        return Err(invalid("p", format!("need 1 < p < r' = {r_conj}, got {p}")));
    }
    check_len(space, w.len(), "w")?;
    let index = space.ball_index();
    let mu = space.mu();
    let ap = ap_constant_indexed(&index, mu, w, p);
    let rh = rh_constant_indexed(&index, mu, w, conjugate(r_conj / p));
    let dual_ap = ap_constant_indexed(&index, mu, &dual_weight(w, p)?, conjugate(p) / r);
    let left = ap <= tau && rh <= tau;
    let right = dual_ap <= tau;
    Ok(DualClassCheck {
        ap,
        rh,
        dual_ap,
        threshold: tau,
        consistent: left == right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_segment, build_torus};

    /// Independent oracle: enumerate balls through `space.ball`.
    fn brute_ap(space: &MetricMeasureSpace, w: &[f64], p: f64) -> f64 {
        let e = 1.0 - conjugate(p);
        let mut best: f64 = 0.0;
        for c in 0..space.n_pts() {
            for r in space.canonical_radii() {
                let b = space.ball(c, r).unwrap();
                if b.is_empty() {
                    continue;
                }
                let vol: f64 = b.iter().map(|&y| space.mu()[y]).sum();
                let a1: f64 = b.iter().map(|&y| w[y] * space.mu()[y]).sum::<f64>() / vol;
                let a2: f64 = b.iter().map(|&y| w[y].powf(e) * space.mu()[y]).sum::<f64>() / vol;
                best = best.max(a1 * a2.powf(p - 1.0));
            }
        }
        best
    }

    fn brute_maximal(space: &MetricMeasureSpace, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0f64; space.n_pts()];
        for c in 0..space.n_pts() {
            for r in space.canonical_radii() {
                let b = space.ball(c, r).unwrap();
                if b.is_empty() {
                    continue;
                }
                let vol: f64 = b.iter().map(|&y| space.mu()[y]).sum();
                let avg = b.iter().map(|&y| f[y].abs() * space.mu()[y]).sum::<f64>() / vol;
                for &y in &b {
                    out[y] = out[y].max(avg);
                }
            }
        }
        out
    }

    fn two_point(a: f64) -> (MetricMeasureSpace, Weight) {
        let s = MetricMeasureSpace::new(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0]).unwrap();
        (s, Weight::new(vec![a, 1.0]).unwrap())
    }

    #[test]
    fn maximal_examples() {
        let s = build_torus(4, 1).unwrap();
        assert_eq!(maximal(&s, &[-2.0; 4]).unwrap(), vec![2.0; 4]);
        let m = maximal(&s, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(m[0] >= 1.0);
        assert!((m[2] - 1.0 / 3.0).abs() < 1e-15, "{m:?}");
        let f = [0.3, -1.2, 4.0, 0.0, 2.5, -0.7, 1.1];
        let t = build_torus(7, 1).unwrap();
        let m = maximal(&t, &f).unwrap();
        let b = brute_maximal(&t, &f);
        for (x, y) in m.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
        for (x, v) in f.iter().enumerate() {
            assert!(m[x] >= v.abs());
        }
    }

    #[test]
    fn unit_weight_is_in_every_class() {
        let s = build_torus(10, 1).unwrap();
        let w = Weight::constant(10, 3.0).unwrap();
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert!((ap_constant(&s, &w, p).unwrap() - 1.0).abs() < 1e-12);
        }
        for q in [1.5, 2.0, f64::INFINITY] {
            assert!((rh_constant(&s, &w, q).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ap_on_z9_matches_brute_force() {
        let s = build_torus(9, 1).unwrap();
        let mut w = vec![1.0; 9];
        w[0] = 4.0;
        let got = ap_constant(&s, &Weight::new(w.clone()).unwrap(), 2.0).unwrap();
        let want = brute_ap(&s, &w, 2.0);
        assert!((got - want).abs() < 1e-13);
        // The ball {8, 0, 1} alone already gives 2 · 0.75.
        assert!(got >= 1.5 - 1e-15);
    }

    #[test]
    fn two_point_closed_forms() {
        for a in [0.25, 1.0, 4.0, 9.0] {
            let (s, w) = two_point(a);
            let ap = ap_constant(&s, &w, 2.0).unwrap();
            let want = f64::max(1.0, (a + 1.0).powi(2) / (4.0 * a));
            assert!((ap - want).abs() < 1e-14, "a={a}");
        }
        let (s, w) = two_point(4.0);
        let rh2 = rh_constant(&s, &w, 2.0).unwrap();
        assert!((rh2 - (17.0f64 / 2.0).sqrt() / 2.5).abs() < 1e-14);
        let rhinf = rh_constant(&s, &w, f64::INFINITY).unwrap();
        assert!((rhinf - 1.6).abs() < 1e-14);
    }

    #[test]
    fn parameter_errors() {
        let (s, w) = two_point(2.0);
        assert!(ap_constant(&s, &w, 0.5).is_err());
        assert!(rh_constant(&s, &w, 0.9).is_err());
        assert_eq!(rh_constant(&s, &w, 1.0).unwrap(), 1.0);
        assert!(dual_weight(&w, 1.0).is_err());
        assert!(dual_class_check(&s, &w, 3.0, 2.0, 1e3).is_err());
        assert!(Weight::new(vec![1.0, 0.0]).is_err());
        assert!(power_weight(
            &crate::space::build_masked_grid(2, 1, &[true, true]).unwrap(),
            1.0
        )
        .is_err());
    }

    #[test]
    fn dual_weight_examples() {
        let w = Weight::new(vec![0.5, 2.0, 7.0]).unwrap();
        assert_eq!(
            dual_weight(&Weight::constant(3, 1.0).unwrap(), 3.0)
                .unwrap()
                .values(),
            &[1.0; 3]
        );
        let d = dual_weight(&w, 2.0).unwrap();
        for (a, b) in d.values().iter().zip(w.values()) {
            assert!((a - 1.0 / b).abs() < 1e-15);
        }
        let back = dual_weight(&dual_weight(&w, 3.0).unwrap(), conjugate(3.0)).unwrap();
        for (a, b) in back.values().iter().zip(w.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn power_weight_examples() {
        let s = build_segment(5).unwrap();
        assert!(power_weight(&s, 0.0)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 1.0));
        let w = power_weight(&s, 1.0).unwrap();
        assert_eq!(w.values()[5], 0.5);
        assert_eq!(w.values()[5 + 3], 3.0);
        assert_eq!(w.values()[5 - 2], 2.0);
    }

    #[test]
    fn power_weight_membership_trend() {
        // Inside the range the constant saturates; above n(p-1) it grows like R^{β-(p-1)}.
        let consts = |beta: f64| -> Vec<f64> {
            [16usize, 32, 64, 128]
                .iter()
                .map(|&r| {
                    let s = build_segment(r).unwrap();
                    ap_constant(&s, &power_weight(&s, beta).unwrap(), 2.0).unwrap()
                })
                .collect()
        };
        let inside = consts(0.5);
        assert!(inside.windows(2).all(|p| p[1] / p[0] < 1.05), "{inside:?}");
        let outside = consts(2.5);
        assert!(
            outside
                .windows(2)
                .all(|p| p[1] / p[0] > 2f64.powf(1.5) * 0.8),
            "{outside:?}"
        );
    }

    #[test]
    fn dual_class_examples() {
        let s = build_torus(16, 1).unwrap();
        let c = dual_class_check(&s, &Weight::constant(16, 1.0).unwrap(), 2.0, 1.2, 1e3).unwrap();
        assert!(
            (c.ap - 1.0).abs() < 1e-12
                && (c.rh - 1.0).abs() < 1e-12
                && (c.dual_ap - 1.0).abs() < 1e-12
        );
        assert!(c.consistent);
        let s = build_torus(64, 1).unwrap();
        let c = dual_class_check(&s, &power_weight(&s, 0.3).unwrap(), 2.0, 1.2, 1e3).unwrap();
        assert!(c.consistent && c.ap < 1e3 && c.dual_ap < 1e3, "{c:?}");
    }

    #[test]
    fn dual_class_both_sides_blow_up_outside_range() {
        // β = -3 makes w^{1-p'} = |x|^3 fail A_{p'/r} and w fail A_2.
        let s = build_segment(256).unwrap();
        let c = dual_class_check(&s, &power_weight(&s, -3.0).unwrap(), 2.0, 1.2, 1e3).unwrap();
        assert!(c.consistent && c.ap > 1e3 && c.dual_ap > 1e3, "{c:?}");
    }
}
