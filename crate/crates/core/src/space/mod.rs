//! Finite metric measure spaces.
//!
//! A space is a finite point set with a symmetric distance matrix and a
//! strictly positive measure. Balls are open, `B(x, r) = {y : d(x, y) < r}`,
//! so the volume function `r ↦ V(x, r)` is a left-continuous step function
//! whose jumps sit at the realized distance values. Every supremum over
//! radii in this crate is therefore taken over that finite set.

mod builders;
mod doubling;

pub use builders::{
    build_masked_grid, build_segment, build_torus, build_torus_with_cap, parse_mask,
    DEFAULT_POINT_CAP,
};
pub use doubling::{
    doubling_radii, fit_doubling, DoublingFit, EXPONENT_GRID_MAX, EXPONENT_GRID_STEP,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Exhaustive triangle-inequality checks are run up to this many points;
/// larger spaces are checked on a seeded sample of triples.
const EXHAUSTIVE_TRIANGLE_LIMIT: usize = 128;
const SAMPLED_TRIANGLES: usize = 200_000;
const METRIC_TOL: f64 = 1e-12;

/// Grid layout attached to spaces produced by the lattice builders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    /// Extent along each axis.
    pub dims: Vec<usize>,
    /// Whether the axes wrap around (torus) or not (box / masked grid).
    pub periodic: bool,
    /// Lattice coordinates of each point, aligned with point order.
    pub coords: Vec<Vec<usize>>,
}

impl Lattice {
    pub fn dimension(&self) -> usize {
        self.dims.len()
    }

    /// Points at lattice distance one, each pair listed once with `x < y`.
    pub fn neighbor_pairs(&self) -> Vec<(usize, usize)> {
        let index: std::collections::HashMap<&[usize], usize> = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_slice(), i))
            .collect();
        let mut pairs = Vec::new();
        for (x, c) in self.coords.iter().enumerate() {
            for axis in 0..self.dims.len() {
                let extent = self.dims[axis];
                let next = if c[axis] + 1 < extent {
                    Some(c[axis] + 1)
                } else if self.periodic && extent > 2 {
                    Some(0)
                } else {
                    None
                };
                if let Some(v) = next {
                    let mut nb = c.clone();
                    nb[axis] = v;
                    if let Some(&y) = index.get(nb.as_slice()) {
                        if x != y {
                            pairs.push((x.min(y), x.max(y)));
                        }
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }
}

/// Finite metric measure space `(X, d, μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricMeasureSpace {
    n_pts: usize,
    dist: Vec<f64>,
    mu: Vec<f64>,
    origin: Option<usize>,
    lattice: Option<Lattice>,
}

#[derive(Serialize, Deserialize)]
struct SpaceJson {
    points: usize,
    dist: Vec<f64>,
    mu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<usize>,
}

impl MetricMeasureSpace {
    /// Builds a space from a row-major distance matrix and a measure,
    /// validating the metric axioms and positivity of `mu`.
    pub fn new(dist: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        let n_pts = mu.len();
        if n_pts == 0 {
            return Err(Error::MalformedSpace("space has no points".into()));
        }
        if dist.len() != n_pts * n_pts {
            return Err(Error::MalformedSpace(format!(
                "distance matrix has {} entries, expected {}",
                dist.len(),
                n_pts * n_pts
            )));
        }
        let space = Self {
            n_pts,
            dist,
            mu,
            origin: None,
            lattice: None,
        };
        space.validate()?;
        Ok(space)
    }

    pub(crate) fn from_parts_unchecked(
        dist: Vec<f64>,
        mu: Vec<f64>,
        origin: Option<usize>,
        lattice: Option<Lattice>,
    ) -> Self {
        Self {
            n_pts: mu.len(),
            dist,
            mu,
            origin,
            lattice,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_pts;
        for (x, &m) in self.mu.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::MalformedSpace(format!(
                    "mu({x}) = {m} is not positive"
                )));
            }
        }
        for x in 0..n {
            if self.d(x, x) != 0.0 {
                return Err(Error::MalformedSpace(format!("d({x},{x}) != 0")));
            }
            for y in 0..n {
                let v = self.d(x, y);
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::MalformedSpace(format!("d({x},{y}) = {v}")));
                }
                if (v - self.d(y, x)).abs() > METRIC_TOL {
                    return Err(Error::MalformedSpace(format!("d({x},{y}) != d({y},{x})")));
                }
            }
        }
        let check = |x: usize, y: usize, z: usize| -> Result<()> {
            if self.d(x, z) > self.d(x, y) + self.d(y, z) + METRIC_TOL {
                return Err(Error::MalformedSpace(format!(
                    "triangle inequality fails for ({x},{y},{z})"
                )));
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_TRIANGLE_LIMIT {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        check(x, y, z)?;
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x7472_6961_6e67_6c65);
            for _ in 0..SAMPLED_TRIANGLES {
                check(
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                )?;
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: SpaceJson = serde_json::from_str(text)?;
        if raw.points != raw.mu.len() {
            return Err(Error::MalformedSpace(format!(
                "`points` = {} but `mu` has {} entries",
                raw.points,
                raw.mu.len()
            )));
        }
        let mut space = Self::new(raw.dist, raw.mu)?;
        if let Some(o) = raw.origin {
            space = space.with_origin(o)?;
        }
        Ok(space)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SpaceJson {
            points: self.n_pts,
            dist: self.dist.clone(),
            mu: self.mu.clone(),
            origin: self.origin,
        })
        .expect("space serialization is infallible")
    }

    /// Designates the origin used by power weights.
    pub fn with_origin(mut self, origin: usize) -> Result<Self> {
        self.check_point(origin)?;
        self.origin = Some(origin);
        Ok(self)
    }

    pub fn n_pts(&self) -> usize {
        self.n_pts
    }

    #[inline]
    pub fn d(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.n_pts + y]
    }

    pub fn dist_row(&self, x: usize) -> &[f64] {
        &self.dist[x * self.n_pts..(x + 1) * self.n_pts]
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn total_measure(&self) -> f64 {
        self.mu.iter().sum()
    }

    pub fn origin(&self) -> Option<usize> {
        self.origin
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub(crate) fn check_point(&self, x: usize) -> Result<()> {
        if x >= self.n_pts {
            return Err(Error::InvalidPoint {
                index: x,
                n_pts: self.n_pts,
            });
        }
        Ok(())
    }

    /// `B(x, r) = {y : d(x, y) < r}`, in point order.
    pub fn ball(&self, x: usize, r: f64) -> Result<Vec<usize>> {
        self.check_point(x)?;
        if !(r >= 0.0) {
            return Err(invalid(
                "r",
                format!("radius must be non-negative, got {r}"),
            ));
        }
        Ok((0..self.n_pts).filter(|&y| self.d(x, y) < r).collect())
    }

    /// `V(x, r) = μ(B(x, r))`.
    pub fn volume(&self, x: usize, r: f64) -> Result<f64> {
        Ok(self.ball(x, r)?.into_iter().map(|y| self.mu[y]).sum())
    }

    /// Dyadic annulus `U_j(B)`: the ball itself for `j = 0`, otherwise
    /// `B(x_B, 2^j r_B) \ B(x_B, 2^{j-1} r_B)`.
    pub fn annulus(&self, center: usize, radius: f64, j: u32) -> Result<Vec<usize>> {
        self.check_point(center)?;
        if !(radius > 0.0) {
            return Err(invalid(
                "r_B",
                format!("ball radius must be positive, got {radius}"),
            ));
        }
        if j == 0 {
            return self.ball(center, radius);
        }
        let outer = radius * 2f64.powi(j as i32);
        let inner = radius * 2f64.powi(j as i32 - 1);
        Ok((0..self.n_pts)
            .filter(|&y| {
                let d = self.d(center, y);
                d < outer && d >= inner
            })
            .collect())
    }

    /// Sorted distinct positive distance values.
    pub fn distinct_distances(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.dist.iter().copied().filter(|&d| d > 0.0).collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() <= METRIC_TOL * b.abs().max(1.0));
        v
    }

    /// Realized distance values, the midpoints between consecutive values
    /// (including the midpoint between 0 and the smallest positive
    /// distance), and one radius beyond the diameter. Every distinct ball of
    /// the space is `B(x, r)` for some `r` in this set.
    pub fn canonical_radii(&self) -> Vec<f64> {
        let distances = self.distinct_distances();
        if distances.is_empty() {
            return vec![1.0];
        }
        let mut radii = Vec::with_capacity(2 * distances.len() + 1);
        let mut prev = 0.0;
        for &d in &distances {
            radii.push(0.5 * (prev + d));
            radii.push(d);
            prev = d;
        }
        radii.push(prev + 1.0);
        radii
    }

    /// Enumerates every distinct ball of the space.
    pub fn ball_index(&self) -> BallIndex {
        BallIndex::new(self)
    }
}

/// All distinct balls of a space, stored per center as prefixes of the
/// points sorted by distance from that center.
#[derive(Debug, Clone)]
pub struct BallIndex {
    order: Vec<Vec<usize>>,
    ends: Vec<Vec<usize>>,
    radii: Vec<Vec<f64>>,
}

impl BallIndex {
    fn new(space: &MetricMeasureSpace) -> Self {
        let n = space.n_pts();
        let mut order = Vec::with_capacity(n);
        let mut ends = Vec::with_capacity(n);
        let mut radii = Vec::with_capacity(n);
        for c in 0..n {
            let row = space.dist_row(c);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
            let mut e = Vec::new();
            let mut r = Vec::new();
            for k in 1..=n {
                let here = row[idx[k - 1]];
                let boundary = k == n || row[idx[k]] > here + METRIC_TOL;
                if boundary {
                    e.push(k);
                    r.push(if k == n {
                        here + 1.0
                    } else {
                        0.5 * (here + row[idx[k]])
                    });
                }
            }
            order.push(idx);
            ends.push(e);
            radii.push(r);
        }
        Self { order, ends, radii }
    }

    pub fn n_centers(&self) -> usize {
        self.order.len()
    }

    /// Points sorted by distance from `center`.
    pub fn order(&self, center: usize) -> &[usize] {
        &self.order[center]
    }

    /// Prefix lengths of `order(center)` that form balls.
    pub fn ends(&self, center: usize) -> &[usize] {
        &self.ends[center]
    }

    /// A radius realizing each ball in `ends(center)`.
    pub fn radii(&self, center: usize) -> &[f64] {
        &self.radii[center]
    }

    /// Total number of (center, ball) pairs.
    pub fn len(&self) -> usize {
        self.ends.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z8() -> MetricMeasureSpace {
        build_torus(8, 1).unwrap()
    }

    #[test]
    fn ball_is_strict() {
        let s = z8();
        assert!(s.ball(0, 0.0).unwrap().is_empty());
        assert_eq!(s.ball(0, 1.5).unwrap(), vec![0, 1, 7]);
        assert_eq!(s.ball(0, 1.0).unwrap(), vec![0]);
        assert_eq!(s.ball(3, s.diameter() + 1.5).unwrap().len(), 8);
    }

    #[test]
    fn volume_examples() {
        let s = z8();
        assert_eq!(s.volume(0, 1.5).unwrap(), 3.0);
        assert_eq!(s.volume(0, 0.0).unwrap(), 0.0);
        let t = build_torus(5, 2).unwrap();
        assert_eq!(t.volume(0, 5.0).unwrap(), 25.0);
    }

    #[test]
    fn invalid_point_is_rejected() {
        let s = z8();
        assert!(matches!(s.ball(8, 1.0), Err(Error::InvalidPoint { .. })));
        assert!(s.volume(0, -1.0).is_err());
    }

    #[test]
    fn annulus_examples() {
        let s = z8();
        assert_eq!(s.annulus(0, 1.5, 0).unwrap(), vec![0, 1, 7]);
        assert_eq!(s.annulus(0, 1.5, 1).unwrap(), vec![2, 6]);
        assert!(s.annulus(0, 1.5, 4).unwrap().is_empty());
    }

    #[test]
    fn annuli_partition_the_space() {
        let s = build_torus(6, 2).unwrap();
        for (c, r) in [(0usize, 0.7), (5, 1.0), (17, 2.5)] {
            let mut seen = vec![0u32; s.n_pts()];
            for j in 0..12 {
                for y in s.annulus(c, r, j).unwrap() {
                    seen[y] += 1;
                }
            }
            assert!(seen.iter().all(|&k| k == 1), "center {c}: {seen:?}");
        }
    }

    #[test]
    fn rejects_broken_metrics() {
        let bad_tri = vec![0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0];
        assert!(MetricMeasureSpace::new(bad_tri, vec![1.0; 3]).is_err());
        let asym = vec![0.0, 1.0, 2.0, 0.0];
        assert!(MetricMeasureSpace::new(asym, vec![1.0; 2]).is_err());
        let ok = vec![0.0, 1.0, 1.0, 0.0];
        assert!(MetricMeasureSpace::new(ok.clone(), vec![1.0, 0.0]).is_err());
        assert!(MetricMeasureSpace::new(ok, vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let s = build_torus(4, 1).unwrap();
        let back = MetricMeasureSpace::from_json(&s.to_json()).unwrap();
        assert_eq!(back.mu(), s.mu());
        assert_eq!(back.dist_row(1), s.dist_row(1));
        assert_eq!(back.origin(), Some(0));
    }

    #[test]
    fn ball_index_matches_direct_balls() {
        let s = build_masked_grid(4, 3, &[true; 12]).unwrap();
        let idx = s.ball_index();
        for c in 0..s.n_pts() {
            for (&k, &r) in idx.ends(c).iter().zip(idx.radii(c)) {
                let mut prefix = idx.order(c)[..k].to_vec();
                prefix.sort_unstable();
                assert_eq!(prefix, s.ball(c, r).unwrap());
            }
        }
    }

    #[test]
    fn canonical_radii_cover_every_ball() {
        let s = build_torus(7, 1).unwrap();
        let radii = s.canonical_radii();
        assert_eq!(radii.first().copied(), Some(0.5));
        assert!(radii.last().copied().unwrap() > s.diameter());
        let idx = s.ball_index();
        assert_eq!(idx.ends(0).len(), 4);
    }
}
