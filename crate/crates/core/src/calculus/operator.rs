use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::space::MetricMeasureSpace;

/// Relative tolerance for `μ(x)A(x,y) = μ(y)A(y,x)`.
pub const SELF_ADJOINT_TOL: f64 = 1e-10;

/// Non-negative operator on `L²(X, μ)`, self-adjoint for the measure of its
/// space, acting by `(Af)(x) = Σ_y A(x,y) f(y)`.
#[derive(Debug, Clone)]
pub struct SelfAdjointOperator {
    matrix: DMatrix<f64>,
    space: Arc<MetricMeasureSpace>,
    order_m: f64,
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    n: usize,
    matrix: Vec<f64>,
    mu: Vec<f64>,
    order_m: f64,
}

impl SelfAdjointOperator {
    /// Wraps `matrix`, checking `μ`-self-adjointness and `order_m ≥ 2`.
    pub fn new(matrix: DMatrix<f64>, space: Arc<MetricMeasureSpace>, order_m: f64) -> Result<Self> {
        let n = space.n_pts();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(invalid(
                "matrix",
                format!(
                    "expected {n}×{n}, got {}×{}",
                    matrix.nrows(),
                    matrix.ncols()
                ),
            ));
        }
        if !(order_m >= 2.0) {
            return Err(invalid("order_m", format!("need m >= 2, got {order_m}")));
        }
        let op = Self {
            matrix,
            space,
            order_m,
        };
        let asym = op.asymmetry();
        if asym > SELF_ADJOINT_TOL {
            return Err(Error::NotSelfAdjoint { asymmetry: asym });
        }
        Ok(op)
    }

    /// `max |μ(x)A(x,y) - μ(y)A(y,x)|` relative to `max |μ(x)A(x,y)|`.
    pub fn asymmetry(&self) -> f64 {
        let mu = self.space.mu();
        let n = mu.len();
        let (mut diff, mut scale) = (0.0f64, 0.0f64);
        for x in 0..n {
            for y in 0..n {
                let a = mu[x] * self.matrix[(x, y)];
                diff = diff.max((a - mu[y] * self.matrix[(y, x)]).abs());
                scale = scale.max(a.abs());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            diff / scale
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn space(&self) -> &Arc<MetricMeasureSpace> {
        &self.space
    }

    pub fn mu(&self) -> &[f64] {
        self.space.mu()
    }

    pub fn order_m(&self) -> f64 {
        self.order_m
    }

    pub fn with_order(mut self, order_m: f64) -> Result<Self> {
        if !(order_m >= 2.0) {
            return Err(invalid("order_m", format!("need m >= 2, got {order_m}")));
        }
        self.order_m = order_m;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(f);
        (&self.matrix * v).iter().copied().collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&OperatorJson {
            n: self.n(),
            matrix: self.matrix.transpose().as_slice().to_vec(),
            mu: self.mu().to_vec(),
            order_m: self.order_m,
        })
        .expect("operator serialization is infallible")
    }

    /// Reads an operator serialized by [`to_json`](Self::to_json) and attaches
    /// it to `space`, whose measure must match.
    pub fn from_json(text: &str, space: Arc<MetricMeasureSpace>) -> Result<Self> {
        let raw: OperatorJson = serde_json::from_str(text)?;
        if raw.mu.len() != space.n_pts()
            || raw
                .mu
                .iter()
                .zip(space.mu())
                .any(|(a, b)| (a - b).abs() > 1e-12 * b)
        {
            return Err(invalid("mu", "operator measure does not match the space"));
        }
        if raw.matrix.len() != raw.n * raw.n {
            return Err(invalid("matrix", "wrong number of entries"));
        }
        Self::new(
            DMatrix::from_row_slice(raw.n, raw.n, &raw.matrix),
            space,
            raw.order_m,
        )
    }
}

/// `(Lf)(x) = (1/μ(x)) Σ_y a(x,y)(f(x) - f(y))` for a symmetric,
/// non-negative adjacency `a`.
pub fn build_laplacian(
    space: Arc<MetricMeasureSpace>,
    adjacency: &DMatrix<f64>,
) -> Result<SelfAdjointOperator> {
    let n = space.n_pts();
    if adjacency.nrows() != n || adjacency.ncols() != n {
        return Err(invalid("edges", format!("adjacency must be {n}×{n}")));
    }
    for x in 0..n {
        for y in 0..n {
            let a = adjacency[(x, y)];
            if !(a >= 0.0 && a.is_finite()) {
                return Err(invalid(
                    "edges",
                    format!("weight a({x},{y}) = {a} must be non-negative"),
                ));
            }
            if (a - adjacency[(y, x)]).abs() > 1e-12 * a.abs().max(1.0) {
                return Err(invalid(
                    "edges",
                    format!("adjacency is not symmetric at ({x},{y})"),
                ));
            }
        }
    }
    let mu = space.mu().to_vec();
    let matrix = DMatrix::from_fn(n, n, |x, y| {
        if x == y {
            (adjacency.row(x).sum() - adjacency[(x, x)]) / mu[x]
        } else {
            -adjacency[(x, y)] / mu[x]
        }
    });
    SelfAdjointOperator::new(matrix, space, 2.0)
}

/// Unit-weight adjacency between lattice neighbours.
pub fn lattice_adjacency(space: &MetricMeasureSpace) -> Result<DMatrix<f64>> {
    let lattice = space
        .lattice()
        .ok_or_else(|| invalid("space", "lattice layout required"))?;
    let n = space.n_pts();
    let mut a = DMatrix::zeros(n, n);
    for (x, y) in lattice.neighbor_pairs() {
        a[(x, y)] = 1.0;
        a[(y, x)] = 1.0;
    }
    Ok(a)
}

/// Graph Laplacian of a lattice space (torus, segment or masked grid).
pub fn build_lattice_laplacian(space: Arc<MetricMeasureSpace>) -> Result<SelfAdjointOperator> {
    let a = lattice_adjacency(&space)?;
    build_laplacian(space, &a)
}

/// Dirichlet Laplacian on the cells of a masked grid:
/// `(Lf)(x) = 2d·f(x) - Σ_{y ∼ x, y ∈ Ω} f(y)`. Missing neighbours act as an
/// absorbing boundary.
pub fn build_dirichlet_laplacian(space: Arc<MetricMeasureSpace>) -> Result<SelfAdjointOperator> {
    let lattice = space
        .lattice()
        .ok_or_else(|| invalid("space", "masked grid required"))?;
    if lattice.periodic {
        return Err(invalid(
            "space",
            "Dirichlet boundary needs a non-periodic grid",
        ));
    }
    let n = space.n_pts();
    let diag = 2.0 * lattice.dimension() as f64;
    let mut m = DMatrix::from_diagonal_element(n, n, diag);
    for (x, y) in lattice.neighbor_pairs() {
        m[(x, y)] = -1.0;
        m[(y, x)] = -1.0;
    }
    let mu = space.mu().to_vec();
    for x in 0..n {
        for y in 0..n {
            m[(x, y)] /= mu[x];
        }
    }
    SelfAdjointOperator::new(m, space, 2.0)
}

/// Schrödinger operator `L = -Δ + V` on a lattice, with `-Δ` the lattice
/// graph Laplacian and `V ≥ 0` acting by multiplication.
pub fn build_schrodinger(
    space: Arc<MetricMeasureSpace>,
    potential: &[f64],
) -> Result<SelfAdjointOperator> {
    if potential.len() != space.n_pts() {
        return Err(invalid("V", format!("expected {} values", space.n_pts())));
    }
    if let Some((x, v)) = potential
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0 && v.is_finite()))
    {
        return Err(invalid(
            "V",
            format!("potential must be non-negative, V({x}) = {v}"),
        ));
    }
    let lap = build_lattice_laplacian(space.clone())?;
    let mut m = lap.matrix().clone();
    for (x, v) in potential.iter().enumerate() {
        m[(x, x)] += v;
    }
    SelfAdjointOperator::new(m, space, 2.0)
}
