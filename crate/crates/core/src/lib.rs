//! Spectral toolkit for p-periodic Jacobi operators on the half-lattice and
//! their separated-variable assemblies on lattice octants.
//!
//! The operator acting on `ℓ²(ℤ₊)` is
//!
//! ```text
//! (J f)_x = a_{x-1} f_{x-1} + a_x f_{x+1} + b_x f_x ,     f_0 = 0,
//! ```
//!
//! with p-periodic hoppings `a_x > 0` (unit product) and potential `b_x`
//! (zero mean; a scalar energy shift is carried separately). The library
//! computes
//!
//! * band structure via the Lyapunov function `F(λ) = (φ_{p+1} + θ_p)/2`
//!   (absolutely continuous spectrum = `{|F| ≤ 1}`),
//! * Dirichlet values `μ_n` and the classification of the single gap state
//!   per open gap as eigenvalue / resonance / virtual state,
//! * the gap-length coordinates `ψ` and their numerical inversion, which
//!   lets one *design* coefficients with prescribed uniform gaps and
//!   prescribed state sheets,
//! * the half-solid operator on `ℤ` (periodic on `ℤ₊`, constant vacuum
//!   level `τ` on `ℤ₋`) and its per-gap eigenvalues with `1/τ` asymptotics,
//! * Minkowski-sum cluster spectra of separable operators on `ℤ₊^d` and
//!   mixed domains, with isolation certificates for designed point spectrum,
//! * brute-force finite truncations (Sturm bisection, Kronecker sums,
//!   banded inertia counts) serving as an independent oracle.

pub mod assembler;
pub mod bands;
pub mod coeffs;
pub mod gapmap;
pub mod halfsolid;
pub mod oracle;
pub mod recurrence;
pub mod states;

use thiserror::Error;

/// Library-wide error type. Validation errors map to CLI exit code 2,
/// numerical/solver errors to exit code 3.
#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("numerical: {0}")]
    Numerical(String),
}

impl SpectralError {
    pub fn validation(msg: impl Into<String>) -> Self {
        SpectralError::Validation(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        SpectralError::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, SpectralError>;
