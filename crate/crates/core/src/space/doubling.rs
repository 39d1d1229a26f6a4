use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::MetricMeasureSpace;
use crate::error::{invalid, Result};

pub const EXPONENT_GRID_STEP: f64 = 0.05;
pub const EXPONENT_GRID_MAX: f64 = 8.0;

/// Fitted volume-growth constants.
///
/// `V(x,r)/V(x,s) ≤ constant_cn (r/s)^exponent_n` for all sampled
/// `x` and radii `r, s`, and
/// `V(y,r) ≤ constant_cd (1 + d(x,y)/r)^exponent_d V(x,r)` for all sampled
/// `x, y, r`. Both constants are exact suprema over the samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingFit {
    pub exponent_n: f64,
    pub constant_cn: f64,
    pub exponent_d: f64,
    pub constant_cd: f64,
    /// `(x, r, s)` attaining `constant_cn`.
    pub worst_doubling: (usize, f64, f64),
    /// `(x, y, r)` attaining `constant_cd`.
    pub worst_growth: (usize, usize, f64),
}

/// Candidate line `ln C(e) ≥ a − e·b`, remembered with its witness.
#[derive(Clone, Copy)]
struct Line<W> {
    a: f64,
    b: f64,
    witness: W,
}

/// Keeps, for each slope `b`, only the largest intercept `a`.
fn upper_lines<W: Copy>(lines: impl IntoIterator<Item = Line<W>>) -> Vec<Line<W>> {
    let mut best: HashMap<u64, Line<W>> = HashMap::new();
    for l in lines {
        best.entry(l.b.to_bits())
            .and_modify(|cur| {
                if l.a > cur.a {
                    *cur = l;
                }
            })
            .or_insert(l);
    }
    let mut out: Vec<Line<W>> = best.into_values().collect();
    out.sort_by(|p, q| p.b.total_cmp(&q.b).then(p.a.total_cmp(&q.a)));
    out
}

fn merge_lines<W: Copy>(mut acc: Vec<Line<W>>, more: Vec<Line<W>>) -> Vec<Line<W>> {
    acc.extend(more);
    upper_lines(acc)
}

/// Chooses the grid exponent minimizing `C(e) = exp(max_l (a_l − e b_l))`,
/// or the implied doubling bound `C(e)·2^e` when `penalize` is set (for
/// one-sided samples, where `C(e)` is non-increasing). Ties go to the
/// smaller exponent.
fn pick_exponent<W: Copy>(lines: &[Line<W>], fallback: W, penalize: bool) -> (f64, f64, W) {
    let steps = (EXPONENT_GRID_MAX / EXPONENT_GRID_STEP).round() as usize;
    let mut best: Option<(f64, f64, f64, W)> = None;
    for k in 0..=steps {
        let e = k as f64 * EXPONENT_GRID_STEP;
        let (ln_c, w) =
            lines
                .iter()
                .map(|l| (l.a - e * l.b, l.witness))
                .fold(
                    (0.0, fallback),
                    |acc, cur| if cur.0 > acc.0 { cur } else { acc },
                );
        let objective = if penalize {
            ln_c + e * std::f64::consts::LN_2
        } else {
            ln_c
        };
        if best.map_or(true, |b| objective < b.0 - 1e-12) {
            best = Some((objective, e, ln_c, w));
        }
    }
    let (_, e, ln_c, w) = best.expect("exponent grid is non-empty");
    (e, ln_c.exp(), w)
}

/// Radii for volume fits: the distinct non-zero distances except the
/// smallest (whose strict balls are single points), plus one radius past
/// the diameter.
pub fn doubling_radii(space: &MetricMeasureSpace) -> Vec<f64> {
    let distances = space.distinct_distances();
    let mut radii: Vec<f64> = distances
        .iter()
        .copied()
        .filter(|&d| d > 0.0)
        .skip(1)
        .collect();
    radii.push(distances.last().copied().unwrap_or(0.0) + 1.0);
    radii
}

/// Fits the doubling exponent `n` and growth exponent `D` of a space from
/// the volumes of balls with the given radii.
///
/// For each exponent `e` on the grid `0, 0.05, …, 8` the constant is the
/// exact supremum of the defining ratio over all samples. The doubling
/// ratio is taken over every sampled pair `(r, s)`, including `r < s`, so
/// its constant has a proper minimizer in `e`. The growth constant is
/// non-increasing in `e`, so `D` minimizes the implied bound `C(e)·2^e`.
pub fn fit_doubling(space: &MetricMeasureSpace, radius_samples: &[f64]) -> Result<DoublingFit> {
    if radius_samples.is_empty() {
        return Err(invalid("radius_samples", "at least one radius is required"));
    }
    let mut radii: Vec<f64> = radius_samples
        .iter()
        .copied()
        .filter(|&r| r > 0.0)
        .collect();
    if radii.len() != radius_samples.len() {
        return Err(invalid("radius_samples", "radii must be positive"));
    }
    radii.sort_by(f64::total_cmp);
    radii.dedup();

    let n = space.n_pts();
    if n == 1 {
        return Ok(DoublingFit {
            exponent_n: 0.0,
            constant_cn: 1.0,
            exponent_d: 0.0,
            constant_cd: 1.0,
            worst_doubling: (0, radii[0], radii[0]),
            worst_growth: (0, 0, radii[0]),
        });
    }

    let volumes: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|x| {
            let row = space.dist_row(x);
            let mut pairs: Vec<(f64, f64)> = row
                .iter()
                .copied()
                .zip(space.mu().iter().copied())
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut cum = Vec::with_capacity(n + 1);
            cum.push(0.0);
            for &(_, m) in &pairs {
                cum.push(cum.last().unwrap() + m);
            }
            radii
                .iter()
                .map(|&r| cum[pairs.partition_point(|p| p.0 < r)])
                .collect()
        })
        .collect();

    let doubling_lines = (0..n)
        .into_par_iter()
        .map(|x| {
            let v = &volumes[x];
            let mut lines = Vec::new();
            for i in 0..radii.len() {
                for j in 0..radii.len() {
                    lines.push(Line {
                        a: (v[i] / v[j]).ln(),
                        b: (radii[i] / radii[j]).ln(),
                        witness: (x, radii[i], radii[j]),
                    });
                }
            }
            upper_lines(lines)
        })
        .reduce(Vec::new, merge_lines);

    let growth_lines = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut lines = Vec::new();
            for y in 0..n {
                let d = space.d(x, y);
                for (k, &r) in radii.iter().enumerate() {
                    let a = (volumes[y][k] / volumes[x][k]).ln();
                    if a > 0.0 {
                        lines.push(Line {
                            a,
                            b: (1.0 + d / r).ln(),
                            witness: (x, y, r),
                        });
                    }
                }
            }
            upper_lines(lines)
        })
        .reduce(Vec::new, merge_lines);

    let (exponent_n, constant_cn, worst_doubling) =
        pick_exponent(&doubling_lines, (0, radii[0], radii[0]), false);
    let (exponent_d, constant_cd, worst_growth) =
        pick_exponent(&growth_lines, (0, 0, radii[0]), true);
    Ok(DoublingFit {
        exponent_n,
        constant_cn,
        exponent_d,
        constant_cd,
        worst_doubling,
        worst_growth,
    })
}
