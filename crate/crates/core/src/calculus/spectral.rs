use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{MultiplierFunction, SelfAdjointOperator};
use crate::error::{invalid, Error, Result};
use crate::space::MetricMeasureSpace;

/// Eigenvalues below this are set to exactly zero.
pub const EIGEN_CLAMP_TOL: f64 = 1e-9;

/// `L = Σ_i λ_i φ_i ⊗_μ φ_i` with `⟨φ_i, φ_j⟩_μ = δ_ij`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Column `i` holds `φ_i`.
    eigenvectors: DMatrix<f64>,
    /// `Φ^T D_μ`, cached for kernel products.
    phi_t_mu: DMatrix<f64>,
    space: Arc<MetricMeasureSpace>,
    order_m: f64,
}

/// Full eigendecomposition through the symmetrized matrix
/// `D_μ^{1/2} A D_μ^{-1/2}`.
pub fn decompose(op: &SelfAdjointOperator) -> Result<SpectralDecomposition> {
    let asym = op.asymmetry();
    if asym > super::operator::SELF_ADJOINT_TOL {
        return Err(Error::NotSelfAdjoint { asymmetry: asym });
    }
    let n = op.n();
    let mu = op.mu();
    let sq: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
    let a = op.matrix();
    let s = DMatrix::from_fn(n, n, |x, y| {
        let l = sq[x] * a[(x, y)] / sq[y];
        let r = sq[y] * a[(y, x)] / sq[x];
        0.5 * (l + r)
    });
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[i];
        if lambda < -EIGEN_CLAMP_TOL * scale {
            return Err(Error::NotNonNegative(lambda));
        }
        eigenvalues.push(if lambda < EIGEN_CLAMP_TOL {
            0.0
        } else {
            lambda
        });
        for x in 0..n {
            eigenvectors[(x, col)] = eig.eigenvectors[(x, i)] / sq[x];
        }
    }
    let mut phi_t_mu = eigenvectors.transpose();
    for y in 0..n {
        phi_t_mu.column_mut(y).scale_mut(mu[y]);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        phi_t_mu,
        space: op.space().clone(),
        order_m: op.order_m(),
    })
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
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

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Spectral variable seen by `F`: `λ_i` or `λ_i^{1/m}`.
    pub fn spectral_points(&self, root: bool) -> Vec<f64> {
        if root {
            let inv = 1.0 / self.order_m;
            self.eigenvalues.iter().map(|l| l.powf(inv)).collect()
        } else {
            self.eigenvalues.clone()
        }
    }

    /// `F` evaluated at the spectral points; errors if a value is not finite.
    pub fn multiplier_values(&self, f: &MultiplierFunction, root: bool) -> Result<Vec<Complex64>> {
        self.spectral_points(root)
            .into_iter()
            .map(|l| {
                let v = f.eval(l);
                if v.re.is_finite() && v.im.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::UnboundedMultiplier(l))
                }
            })
            .collect()
    }

    /// `Σ_i v_i φ_i ⊗_μ φ_i` as an operator matrix, for real values.
    pub fn real_function(&self, values: &[f64]) -> DMatrix<f64> {
        let mut left = self.eigenvectors.clone();
        for (i, v) in values.iter().enumerate() {
            left.column_mut(i).scale_mut(*v);
        }
        left * &self.phi_t_mu
    }

    /// `Σ_i v_i φ_i ⊗_μ φ_i` for complex values.
    pub fn complex_function(&self, values: &[Complex64]) -> DMatrix<Complex64> {
        let re: Vec<f64> = values.iter().map(|v| v.re).collect();
        let re_part = self.real_function(&re);
        if values.iter().all(|v| v.im == 0.0) {
            return re_part.map(|v| Complex64::new(v, 0.0));
        }
        let im: Vec<f64> = values.iter().map(|v| v.im).collect();
        let im_part = self.real_function(&im);
        re_part.zip_map(&im_part, Complex64::new)
    }

    /// `max |A - Σ λ_i φ_i ⊗_μ φ_i| / max |A|`.
    pub fn reconstruction_error(&self, op: &SelfAdjointOperator) -> f64 {
        let rebuilt = self.real_function(&self.eigenvalues);
        let diff = (op.matrix() - rebuilt).amax();
        let scale = op.matrix().amax();
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    /// `max_{ij} |⟨φ_i, φ_j⟩_μ - δ_ij|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = &self.phi_t_mu * &self.eigenvectors;
        (gram - DMatrix::identity(self.n(), self.n())).amax()
    }
}

/// Operator `T` on functions over a measured space, acting by
/// `(Tf)(x) = Σ_y T(x,y) f(y)`. Its kernel relative to `μ` is
/// `K(x,y) = T(x,y)/μ(y)`.
#[derive(Debug, Clone)]
pub struct MultiplierOperator {
    matrix: DMatrix<Complex64>,
    mu: Vec<f64>,
}

impl MultiplierOperator {
    pub fn new(matrix: DMatrix<Complex64>, mu: Vec<f64>) -> Result<Self> {
        if matrix.nrows() != mu.len() || matrix.ncols() != mu.len() {
            return Err(invalid("matrix", "dimension does not match the measure"));
        }
        Ok(Self { matrix, mu })
    }

    pub fn from_real(matrix: &DMatrix<f64>, mu: &[f64]) -> Result<Self> {
        Self::new(matrix.map(|v| Complex64::new(v, 0.0)), mu.to_vec())
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn kernel(&self) -> DMatrix<Complex64> {
        let mut k = self.matrix.clone();
        for (y, m) in self.mu.iter().enumerate() {
            k.column_mut(y).unscale_mut(*m);
        }
        k
    }

    pub fn kernel_at(&self, x: usize, y: usize) -> Complex64 {
        self.matrix[(x, y)] / self.mu[y]
    }

    /// Real part of the operator matrix.
    pub fn real_matrix(&self) -> DMatrix<f64> {
        self.matrix.map(|v| v.re)
    }

    pub fn max_imag(&self) -> f64 {
        self.matrix.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let v = nalgebra::DVector::from_column_slice(f);
        (&self.matrix * v).iter().copied().collect()
    }

    pub fn apply_real(&self, f: &[f64]) -> Vec<Complex64> {
        let v: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.apply(&v)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MultiplierOperator) -> MultiplierOperator {
        MultiplierOperator {
            matrix: &self.matrix * &other.matrix,
            mu: self.mu.clone(),
        }
    }

    /// Adjoint for `⟨f, g⟩_μ = Σ f ḡ μ`: `T*(x,y) = conj(T(y,x)) μ(y)/μ(x)`.
    pub fn adjoint(&self) -> MultiplierOperator {
        let n = self.n();
        let matrix = DMatrix::from_fn(n, n, |x, y| {
            self.matrix[(y, x)].conj() * self.mu[y] / self.mu[x]
        });
        MultiplierOperator {
            matrix,
            mu: self.mu.clone(),
        }
    }

    /// `max |T(x,y) - S(x,y)|`.
    pub fn max_diff(&self, other: &MultiplierOperator) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Norm on `L²(μ)`: largest singular value of `D_μ^{1/2} T D_μ^{-1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.weighted_l2_norm(&self.mu)
    }

    /// Norm on `L²(ν)`.
    pub fn weighted_l2_norm(&self, nu: &[f64]) -> f64 {
        let n = self.n();
        let sq: Vec<f64> = nu.iter().map(|v| v.sqrt()).collect();
        let m = DMatrix::from_fn(n, n, |x, y| self.matrix[(x, y)] * (sq[x] / sq[y]));
        m.singular_values().iter().copied().fold(0.0, f64::max)
    }

    /// `⟨f, g⟩_μ = Σ_x f(x) conj(g(x)) μ(x)`.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        f.iter()
            .zip(g)
            .zip(&self.mu)
            .map(|((a, b), m)| a * b.conj() * *m)
            .sum()
    }
}

/// `F(L)` (or `F(L^{1/m})` when `root`) as an operator matrix and kernel.
pub fn apply_multiplier(
    dec: &SpectralDecomposition,
    f: &MultiplierFunction,
    root: bool,
) -> Result<MultiplierOperator> {
    let values = dec.multiplier_values(f, root)?;
    MultiplierOperator::new(dec.complex_function(&values), dec.mu().to_vec())
}

/// Kernel `p_t(x,y) = Σ_i e^{-tλ_i} φ_i(x) φ_i(y)` of `e^{-tL}`.
pub fn heat_kernel(dec: &SpectralDecomposition, t: f64) -> Result<DMatrix<f64>> {
    let mut op = heat_operator(dec, t)?;
    for (y, m) in dec.mu().iter().enumerate() {
        op.column_mut(y).unscale_mut(*m);
    }
    Ok(op)
}

/// Operator matrix of `e^{-tL}`.
pub fn heat_operator(dec: &SpectralDecomposition, t: f64) -> Result<DMatrix<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid("t", format!("heat time must be positive, got {t}")));
    }
    let values: Vec<f64> = dec.eigenvalues().iter().map(|l| (-t * l).exp()).collect();
    Ok(dec.real_function(&values))
}

fn check_smoothing(r: f64, big_m: u32) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("r", format!("must be positive, got {r}")));
    }
    if big_m < 1 {
        return Err(invalid("M", "must be at least 1"));
    }
    Ok(())
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `A_r = I - (I - e^{-r^m L})^M` expanded as
/// `Σ_{j=1}^M (-1)^{j+1} C(M,j) e^{-j r^m L}`.
pub fn smoothing_family(dec: &SpectralDecomposition, r: f64, big_m: u32) -> Result<DMatrix<f64>> {
    check_smoothing(r, big_m)?;
    let s = r.powf(dec.order_m());
    let n = dec.n();
    let mut out = DMatrix::zeros(n, n);
    for j in 1..=big_m {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        out += heat_operator(dec, j as f64 * s)? * (sign * binomial(big_m, j));
    }
    Ok(out)
}

/// `A_r` by forming `I - e^{-r^m L}` and raising it to the `M`-th power.
pub fn smoothing_family_direct(
    dec: &SpectralDecomposition,
    r: f64,
    big_m: u32,
) -> Result<DMatrix<f64>> {
    check_smoothing(r, big_m)?;
    let n = dec.n();
    let id = DMatrix::<f64>::identity(n, n);
    let base = &id - heat_operator(dec, r.powf(dec.order_m()))?;
    let mut power = base.clone();
    for _ in 1..big_m {
        power = &power * &base;
    }
    Ok(id - power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{
        build_laplacian, build_lattice_laplacian, build_schrodinger, regularize_multiplier,
    };
    use crate::space::build_torus;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cycle(n: usize) -> (SelfAdjointOperator, SpectralDecomposition) {
        let op = build_lattice_laplacian(Arc::new(build_torus(n, 1).unwrap())).unwrap();
        let dec = decompose(&op).unwrap();
        (op, dec)
    }

    fn identity(n: usize) -> DMatrix<Complex64> {
        DMatrix::identity(n, n)
    }

    #[test]
    fn zero_operator() {
        let s = Arc::new(build_torus(5, 1).unwrap());
        let op = SelfAdjointOperator::new(DMatrix::zeros(5, 5), s, 2.0).unwrap();
        assert!(decompose(&op)
            .unwrap()
            .eigenvalues()
            .iter()
            .all(|&l| l == 0.0));
    }

    #[test]
    fn cycle_eigenvalues_match_fourier_modes() {
        for n in [3usize, 8, 17, 32] {
            let (op, dec) = cycle(n);
            let mut want: Vec<f64> = (0..n)
                .map(|k| 2.0 - 2.0 * (2.0 * PI * k as f64 / n as f64).cos())
                .collect();
            want.sort_by(f64::total_cmp);
            for (a, b) in dec.eigenvalues().iter().zip(&want) {
                assert!((a - b).abs() < 1e-12, "N={n}: {a} vs {b}");
            }
            assert!(dec.reconstruction_error(&op) < 1e-8);
            assert!(dec.orthonormality_error() < 1e-10);
        }
    }

    #[test]
    fn two_point_laplacian() {
        let s =
            Arc::new(MetricMeasureSpace::new(vec![0.0, 1.0, 1.0, 0.0], vec![1.0, 1.0]).unwrap());
        let op = build_laplacian(s, &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let dec = decompose(&op).unwrap();
        assert_eq!(dec.eigenvalues()[0], 0.0);
        assert!((dec.eigenvalues()[1] - 2.0).abs() < 1e-15);
        let lin = MultiplierFunction::real("id", crate::calculus::Support::Unbounded, |x| x);
        let t = apply_multiplier(&dec, &lin, false).unwrap();
        assert!((t.real_matrix() - op.matrix()).amax() < 1e-14);
    }

    #[test]
    fn weighted_measure_is_mu_orthonormal() {
        let dist = vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0];
        let s = Arc::new(MetricMeasureSpace::new(dist, vec![1.0, 3.0, 0.5]).unwrap());
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 0.0, 2.0, 0.0, 1.5, 0.0, 1.5, 0.0]);
        let op = build_laplacian(s, &a).unwrap();
        let dec = decompose(&op).unwrap();
        assert!(dec.orthonormality_error() < 1e-12);
        assert!(dec.reconstruction_error(&op) < 1e-12);
        let one = apply_multiplier(&dec, &MultiplierFunction::constant(1.0), false).unwrap();
        let k = one.kernel();
        for x in 0..3 {
            for y in 0..3 {
                let want = if x == y { 1.0 / op.mu()[x] } else { 0.0 };
                assert!((k[(x, y)].re - want).abs() < 1e-12);
            }
        }
    }

    /// Union-find component count, independent of any spectral computation.
    fn components(adj: &DMatrix<f64>) -> usize {
        let n = adj.nrows();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for x in 0..n {
            for y in 0..n {
                if adj[(x, y)] > 0.0 {
                    let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                    parent[a] = b;
                }
            }
        }
        (0..n).filter(|&x| find(&mut parent, x) == x).count()
    }

    #[test]
    fn zero_multiplicity_counts_components() {
        let n = 9;
        let dist = DMatrix::from_fn(n, n, |x, y| (x as f64 - y as f64).abs());
        let s = Arc::new(
            MetricMeasureSpace::new(dist.transpose().as_slice().to_vec(), vec![1.0; n]).unwrap(),
        );
        let mut adj = DMatrix::zeros(n, n);
        for (x, y) in [(0, 1), (1, 2), (3, 4), (5, 6), (6, 7), (5, 7)] {
            adj[(x, y)] = 1.0;
            adj[(y, x)] = 1.0;
        }
        let dec = decompose(&build_laplacian(s, &adj).unwrap()).unwrap();
        let zeros = dec.eigenvalues().iter().filter(|&&l| l == 0.0).count();
        assert_eq!(zeros, components(&adj));
        assert_eq!(zeros, 4);
    }

    #[test]
    fn identity_and_projection() {
        let (_, dec) = cycle(8);
        let one = apply_multiplier(&dec, &MultiplierFunction::constant(1.0), false).unwrap();
        assert!((one.matrix() - identity(8))
            .iter()
            .all(|v| v.norm() < 1e-12));
        let p = apply_multiplier(&dec, &MultiplierFunction::indicator(0.0, 1.0), false).unwrap();
        assert!(p.compose(&p).max_diff(&p) < 1e-10);
        assert!(p.adjoint().max_diff(&p) < 1e-12);
    }

    #[test]
    fn homomorphism_adjoint_and_norm() {
        let (_, dec) = cycle(16);
        let f = MultiplierFunction::imaginary_power(1.3);
        let g = MultiplierFunction::heat(0.7);
        let fg = apply_multiplier(&dec, &f.mul(&g), true).unwrap();
        let split = apply_multiplier(&dec, &f, true)
            .unwrap()
            .compose(&apply_multiplier(&dec, &g, true).unwrap());
        assert!(fg.max_diff(&split) < 1e-9);

        let tf = apply_multiplier(&dec, &f, false).unwrap();
        let tbar = apply_multiplier(&dec, &f.conj(), false).unwrap();
        assert!(tf.adjoint().max_diff(&tbar) < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u: Vec<Complex64> = (0..16)
            .map(|_| Complex64::new(rng.gen(), rng.gen()))
            .collect();
        let v: Vec<Complex64> = (0..16)
            .map(|_| Complex64::new(rng.gen(), rng.gen()))
            .collect();
        let lhs = tf.inner(&tf.apply(&u), &v);
        let rhs = tf.inner(&u, &tbar.apply(&v));
        assert!((lhs - rhs).norm() < 1e-10);

        let r = MultiplierFunction::riesz_mean(1.0).dilate(0.4);
        let tr = apply_multiplier(&dec, &r, false).unwrap();
        let want = dec
            .multiplier_values(&r, false)
            .unwrap()
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        assert!((tr.l2_norm() - want).abs() < 1e-9);
    }

    #[test]
    fn heat_kernel_examples() {
        let (_, dec) = cycle(8);
        let p = heat_kernel(&dec, 1e-8).unwrap();
        assert!((p - DMatrix::<f64>::identity(8, 8)).amax() < 1e-6);
        let p = heat_kernel(&dec, 0.9).unwrap();
        for x in 0..8 {
            assert!((p.row(x).sum() - 1.0).abs() < 1e-10);
        }
        assert!(heat_kernel(&dec, 0.0).is_err());
        assert!(heat_kernel(&dec, -1.0).is_err());
    }

    #[test]
    fn heat_kernel_matches_fourier_oracle() {
        let n = 64;
        let (_, dec) = cycle(n);
        let t = 4.0;
        let p = heat_kernel(&dec, t).unwrap();
        for x in 0..n {
            for y in [0usize, 1, 7, 32, 63] {
                let want: f64 = (0..n)
                    .map(|k| {
                        let th = 2.0 * PI * k as f64 / n as f64;
                        (-t * (2.0 - 2.0 * th.cos())).exp() * (th * (x as f64 - y as f64)).cos()
                            / n as f64
                    })
                    .sum();
                assert!((p[(x, y)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn heat_semigroup() {
        let (_, dec) = cycle(32);
        let mu = dec.mu().to_vec();
        let (a, b) = (
            heat_operator(&dec, 0.3).unwrap(),
            heat_operator(&dec, 1.1).unwrap(),
        );
        let ab = MultiplierOperator::from_real(&(&a * &b), &mu).unwrap();
        let c = MultiplierOperator::from_real(&heat_operator(&dec, 1.4).unwrap(), &mu).unwrap();
        assert!(ab.max_diff(&c) < 1e-9);
    }

    #[test]
    fn schrodinger_constant_potential_shifts() {
        let s = Arc::new(build_torus(12, 1).unwrap());
        let free = decompose(&build_lattice_laplacian(s.clone()).unwrap()).unwrap();
        let shifted = decompose(&build_schrodinger(s, &[0.7; 12]).unwrap()).unwrap();
        let t = 1.3;
        let want = heat_kernel(&free, t).unwrap() * (-0.7 * t).exp();
        assert!((heat_kernel(&shifted, t).unwrap() - want).amax() < 1e-12);
    }

    #[test]
    fn regularized_operator_identity() {
        let (_, dec) = cycle(16);
        let f = MultiplierFunction::riesz_mean(1.5).dilate(0.6);
        let reg = regularize_multiplier(&f, 1.0, 2, 2.0).unwrap();
        let lhs = apply_multiplier(&dec, &reg, true).unwrap();
        let factor = {
            let id = DMatrix::<f64>::identity(16, 16);
            let base = &id - heat_operator(&dec, 1.0).unwrap();
            MultiplierOperator::from_real(&(&base * &base), dec.mu()).unwrap()
        };
        let rhs = apply_multiplier(&dec, &f, true).unwrap().compose(&factor);
        assert!(lhs.max_diff(&rhs) < 1e-10);
    }

    #[test]
    fn dyadic_partial_sums_converge() {
        let (_, dec) = cycle(32);
        let f = MultiplierFunction::heat(0.5);
        let pieces = crate::calculus::dyadic_pieces(&f).unwrap();
        let full = apply_multiplier(&dec, &f, false).unwrap();
        let lo = dec
            .eigenvalues()
            .iter()
            .copied()
            .find(|&l| l > 0.0)
            .unwrap();
        let levels = pieces.levels_meeting(lo, dec.lambda_max());
        let mut errs = Vec::new();
        for top in *levels.start()..=*levels.end() {
            let part =
                apply_multiplier(&dec, &pieces.partial_sum(*levels.start()..=top), false).unwrap();
            errs.push(part.max_diff(&full));
        }
        assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{errs:?}");
        // λ = 0 is not covered by any dyadic piece; its projection is all that remains.
        let p0 = apply_multiplier(&dec, &MultiplierFunction::indicator(0.0, 0.0), false).unwrap();
        assert!(
            (errs.last().unwrap() - p0.matrix().iter().map(|v| v.norm()).fold(0.0, f64::max)).abs()
                < 1e-10
        );
    }

    #[test]
    fn smoothing_family_paths_agree() {
        let (_, dec) = cycle(16);
        for m in 1..=4 {
            let a = smoothing_family(&dec, 0.8, m).unwrap();
            let b = smoothing_family_direct(&dec, 0.8, m).unwrap();
            assert!((&a - &b).amax() < 1e-11);
            let ones = nalgebra::DVector::from_element(16, 1.0);
            assert!((&a * &ones - &ones).amax() < 1e-12);
        }
        let m1 = smoothing_family(&dec, 0.8, 1).unwrap();
        assert!((m1 - heat_operator(&dec, 0.64).unwrap()).amax() < 1e-14);
        assert!(smoothing_family(&dec, 0.0, 1).is_err());
        assert!(smoothing_family(&dec, 1.0, 0).is_err());
    }

    #[test]
    fn unbounded_values_are_rejected() {
        let (_, dec) = cycle(4);
        let bad = MultiplierFunction::real("inv", crate::calculus::Support::Unbounded, |x| 1.0 / x);
        assert!(matches!(
            apply_multiplier(&dec, &bad, false),
            Err(Error::UnboundedMultiplier(_))
        ));
    }
}
