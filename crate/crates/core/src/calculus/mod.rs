//! Self-adjoint operators on finite measured spaces and their functional
//! calculus: exact eigendecomposition, heat semigroups, Chebyshev
//! polynomial filters and the multiplier decompositions built on them.

mod chebyshev;
mod multiplier;
mod operator;
mod spectral;

pub use chebyshev::{
    chebyshev_apply, chebyshev_coefficients, gershgorin_bound, power_iteration_estimate,
    ChebyshevApply,
};
pub use multiplier::{
    dyadic_pieces, regularize_multiplier, DyadicPieces, MultiplierFunction, Support,
    DEFAULT_SAMPLING_HINT,
};
pub use operator::{
    build_dirichlet_laplacian, build_laplacian, build_lattice_laplacian, build_schrodinger,
    lattice_adjacency, SelfAdjointOperator, SELF_ADJOINT_TOL,
};
pub use spectral::{
    apply_multiplier, decompose, heat_kernel, heat_operator, smoothing_family,
    smoothing_family_direct, MultiplierOperator, SpectralDecomposition, EIGEN_CLAMP_TOL,
};
