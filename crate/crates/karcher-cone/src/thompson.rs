//! The Thompson part metric on the PD cone.
//!
//! Two equivalent formulas are implemented:
//!
//! - spectral: `d(x, y) = ‖log(x^{-1/2} y x^{-1/2})‖` (operator norm), which
//!   costs one eigendecomposition and is the computation path;
//! - order-theoretic: `d(x, y) = log max{M(x/y), M(y/x)}` with
//!   `M(x/y) = inf{t > 0 : x ≤ ty}`, kept as a cross-check.
//!
//! The metric is invariant under congruence transforms and inversion, and the
//! matrix logarithm is contractive from it to the operator-norm distance.

use crate::hermitian::{HermitianMatrix, PDMatrix};
use crate::{Error, Result};

/// Distances below this threshold are reported as exactly zero, which keeps
/// metric-axiom checks stable at the floating-point floor.
pub const EQUALITY_TOL: f64 = 1e-10;

/// A Thompson-metric distance value (log scale, always nonnegative).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ThompsonDistance(f64);

impl ThompsonDistance {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }
}

impl From<ThompsonDistance> for f64 {
    fn from(d: ThompsonDistance) -> f64 {
        d.0
    }
}

impl std::fmt::Display for ThompsonDistance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

fn check_dims(x: &PDMatrix, y: &PDMatrix) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    Ok(())
}

/// `M(x/y) = inf{t > 0 : x ≤ ty}`: the largest eigenvalue of
/// `y^{-1/2} x y^{-1/2}`.
pub fn m_ratio(x: &PDMatrix, y: &PDMatrix) -> Result<f64> {
    check_dims(x, y)?;
    let scaled = x.sandwich(y.inv_sqrt().hermitian())?;
    Ok(scaled.eigen().max_eigenvalue())
}

/// Thompson distance via the spectral formula
/// `‖log(x^{-1/2} y x^{-1/2})‖`.
pub fn thompson_distance(x: &PDMatrix, y: &PDMatrix) -> Result<ThompsonDistance> {
    check_dims(x, y)?;
    let scaled = y.sandwich(x.inv_sqrt().hermitian())?;
    let eig = scaled.eigen();
    let d = eig
        .eigenvalues()
        .iter()
        .map(|&l| l.ln().abs())
        .fold(0.0f64, f64::max);
    Ok(ThompsonDistance(if d < EQUALITY_TOL { 0.0 } else { d }))
}

/// Thompson distance via the order-theoretic formula
/// `log max{M(x/y), M(y/x)}`; used as an independent cross-check of
/// [`thompson_distance`].
pub fn thompson_distance_order(x: &PDMatrix, y: &PDMatrix) -> Result<f64> {
    let forward = m_ratio(x, y)?;
    let backward = m_ratio(y, x)?;
    Ok(forward.max(backward).ln().max(0.0))
}

/// Operator-norm distance `‖x - y‖` between Hermitian matrices.
pub fn norm_distance(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<f64> {
    x.sub(y)?.spectral_norm()
}
