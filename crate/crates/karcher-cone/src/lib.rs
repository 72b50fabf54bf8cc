//! Geometric means and optimal transport on the cone of positive-definite
//! Hermitian matrices.
//!
//! The open cone Ω of positive-definite (PD) Hermitian matrices carries the
//! Thompson part metric `d(x, y) = ‖log(x^{-1/2} y x^{-1/2})‖`, under which it
//! is complete. This crate implements the geometry of that cone end to end:
//!
//! - [`hermitian`] — Hermitian/PD matrix types, spectral calculus
//!   (`exp`, `log`, powers), congruence transforms, and the Loewner order;
//! - [`thompson`] — the Thompson metric in its spectral and order-theoretic
//!   (`M`-ratio) formulations, plus the operator-norm distance;
//! - [`measures`] — finitely supported probability measures on the cone,
//!   pushforwards, couplings, exact Wasserstein-1 and bottleneck distances,
//!   the stochastic order, and ε-discretization of sample clouds;
//! - [`karcher`] — the Karcher equation
//!   `Σ wᵢ log(x^{-1/2} aᵢ x^{-1/2}) = 0`, a damped fixed-point solver for
//!   its unique PD solution (the weighted geometric mean), and the completion
//!   maps `gamma_map` / `lambda_map` that invert each other;
//! - [`barycenter`] — arithmetic, harmonic, and Karcher barycenters of
//!   supported measures and the simple-function Bochner integral;
//! - [`verify`] — seeded property suites that exercise the mean and
//!   barycenter laws (consistency, monotonicity, contraction, self-duality,
//!   AGH inequalities, …) and report worst-case slack per property.
//!
//! A batch CLI (`karcher-cone`) fronts the same functionality; see the
//! repository README and the `book/` guide for usage.
//!
//! ```
//! use karcher_cone::hermitian::PDMatrix;
//! use karcher_cone::karcher::{karcher_mean, SolverConfig};
//! use karcher_cone::measures::SupportedMeasure;
//! use karcher_cone::thompson::thompson_distance;
//!
//! let a = PDMatrix::from_real_rows(2, &[2.0, 1.0, 1.0, 2.0])?;
//! let b = PDMatrix::from_real_rows(2, &[1.0, 0.0, 0.0, 4.0])?;
//! let mu = SupportedMeasure::uniform(vec![a.clone(), b.clone()])?;
//!
//! let result = karcher_mean(&mu, &SolverConfig::default())?;
//! assert!(result.converged);
//!
//! // The mean lies between the atoms in the Thompson metric.
//! let d_ab = thompson_distance(&a, &b)?.value();
//! let d_am = thompson_distance(&a, &result.mean)?.value();
//! assert!(d_am <= d_ab);
//! # Ok::<(), karcher_cone::Error>(())
//! ```

use thiserror::Error;

pub mod barycenter;
pub mod hermitian;
pub mod karcher;
pub mod measures;
pub mod sample;
pub mod thompson;
mod transport;
pub mod verify;

pub use hermitian::{HermitianMatrix, PDMatrix, SpectralDecomposition};
pub use karcher::{KarcherResult, SolverConfig};
pub use measures::{SupportedMeasure, TransportPlan};
pub use thompson::ThompsonDistance;

/// Complex scalar used throughout: `Complex<f64>`.
pub type C64 = num_complex::Complex<f64>;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix input was not square.
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    /// Zero-dimensional matrix input.
    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,

    /// Two operands live in different matrix dimensions.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// Candidate for the PD cone fails the positivity margin.
    #[error("matrix is not positive definite: min eigenvalue {min_eigenvalue:e} vs spectral norm {spectral_norm:e}")]
    NotPositiveDefinite {
        min_eigenvalue: f64,
        spectral_norm: f64,
    },

    /// Congruence transform by a numerically singular matrix.
    #[error("congruence matrix is numerically singular (condition estimate {condition:e})")]
    SingularCongruence { condition: f64 },

    /// The Hermitian eigensolver exhausted its iteration budget.
    #[error("eigendecomposition did not converge within {budget} iterations")]
    EigenFailed { budget: usize },

    /// Supported measures need at least one atom.
    #[error("a supported measure needs at least one atom")]
    EmptyMeasure,

    /// Discretization input was empty.
    #[error("sample is empty")]
    EmptySample,

    /// Measure weights do not sum close enough to one.
    #[error("weights sum to {sum} (must be within {tolerance:e} of 1)")]
    WeightSum { sum: f64, tolerance: f64 },

    /// A measure weight is non-positive or non-finite.
    #[error("weight {value} at index {index} is not a positive finite number")]
    InvalidWeight { index: usize, value: f64 },

    /// Operation requires uniform weights.
    #[error("operation requires a uniform measure (all weights 1/n)")]
    NonUniformMeasure,

    /// Operation requires equal support sizes.
    #[error("support size mismatch: {left} vs {right}")]
    SupportSizeMismatch { left: usize, right: usize },

    /// Iterative solver failed to reach its residual target.
    #[error("solver did not converge: residual {residual_norm:e} after {iterations} iterations")]
    NotConverged {
        iterations: usize,
        residual_norm: f64,
    },

    /// Transport solver exceeded its augmentation budget.
    #[error("transport solver exceeded its augmentation budget ({0} augmentations)")]
    TransportStalled(usize),

    /// Configuration value out of range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Unknown verification suite name.
    #[error("unknown verification suite: {0}")]
    UnknownSuite(String),
}

/// Convenience alias used by every fallible operation in the crate.
pub type Result<T> = std::result::Result<T, Error>;
