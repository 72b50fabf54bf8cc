//! Hermitian matrices, the PD cone, and the spectral functional calculus.
//!
//! [`HermitianMatrix`] is exactly Hermitian by construction: every constructor
//! symmetrizes its input as `(A + A*)/2`, so downstream code may rely on
//! `entry(i, j) == conj(entry(j, i))` bit for bit. [`PDMatrix`] wraps a
//! Hermitian matrix whose spectrum clears a relative positivity margin and
//! caches its eigendecomposition, which makes the matrix functions
//! (`exp`, `log`, powers) single-decomposition operations.
//!
//! All matrix functions go through [`SpectralDecomposition`] rather than
//! series expansions; in the Hermitian setting this is exact up to
//! eigensolver error and keeps one code path.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{C64, Error, Result};

/// Relative positivity margin: a matrix counts as PD only when its smallest
/// eigenvalue exceeds `PD_TOL * spectral_norm`. Below the margin construction
/// fails rather than regularizing, since silent regularization would corrupt
/// order-theoretic comparisons downstream.
pub const PD_TOL: f64 = 1e-12;

/// Relative margin below which a congruence matrix is rejected as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Iteration budget handed to the eigensolver.
const EIG_MAX_ITER: usize = 10_000;

fn check_square(data: &DMatrix<C64>) -> Result<usize> {
    if data.nrows() != data.ncols() {
        return Err(Error::NotSquare {
            rows: data.nrows(),
            cols: data.ncols(),
        });
    }
    if data.nrows() == 0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(data.nrows())
}

fn check_same_dim(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

/// A complex Hermitian matrix, exactly equal to its own conjugate transpose.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<C64>,
}

impl HermitianMatrix {
    /// Symmetrizes an arbitrary square complex matrix to `(A + A*)/2`.
    ///
    /// Idempotent on Hermitian inputs: symmetrizing an already Hermitian
    /// matrix reproduces it bit for bit.
    pub fn symmetrize(raw: &DMatrix<C64>) -> Result<Self> {
        check_square(raw)?;
        let sym = (raw + raw.adjoint()).scale(0.5);
        Ok(Self { data: sym })
    }

    /// Builds from row-major complex entries, symmetrizing.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::NotSquare {
                rows: dim,
                cols: if dim == 0 { 0 } else { entries.len() / dim },
            });
        }
        Self::symmetrize(&DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Builds from row-major real entries, symmetrizing.
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let complex: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_rows(dim, &complex)
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let data = DMatrix::from_diagonal(&DVector::from_iterator(
            diag.len(),
            diag.iter().map(|&x| C64::new(x, 0.0)),
        ));
        Self { data }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            data: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            data: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    /// Raw storage, guaranteed exactly Hermitian.
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    /// `self + other`; both exactly Hermitian, so the sum is too.
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self {
            data: &self.data + &other.data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(Self {
            data: &self.data - &other.data,
        })
    }

    /// Scales by a real factor.
    pub fn scale(&self, t: f64) -> Self {
        Self {
            data: self.data.scale(t),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    /// Operator (spectral) norm: the largest eigenvalue modulus.
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.eig()?.spectral_norm())
    }

    /// Hermitian eigendecomposition with eigenvalues sorted ascending and a
    /// deterministic phase convention on the eigenvector columns, so that
    /// bit-identical inputs produce bit-identical outputs.
    pub fn eig(&self) -> Result<SpectralDecomposition> {
        let raw = self
            .data
            .clone()
            .try_symmetric_eigen(f64::EPSILON, EIG_MAX_ITER)
            .ok_or(Error::EigenFailed {
                budget: EIG_MAX_ITER,
            })?;

        let dim = self.dim();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| {
            raw.eigenvalues[a]
                .partial_cmp(&raw.eigenvalues[b])
                .expect("Hermitian eigenvalues are finite")
                .then(a.cmp(&b))
        });

        let eigenvalues: Vec<f64> = order.iter().map(|&i| raw.eigenvalues[i]).collect();
        let mut basis = DMatrix::zeros(dim, dim);
        for (dst, &src) in order.iter().enumerate() {
            let mut column = raw.eigenvectors.column(src).clone_owned();
            // Phase convention: rotate so the largest-modulus component is
            // real positive (ties broken by lowest index).
            let mut pivot = 0;
            for i in 1..dim {
                if column[i].norm_sqr() > column[pivot].norm_sqr() {
                    pivot = i;
                }
            }
            let modulus = column[pivot].norm();
            if modulus > 0.0 {
                let phase = column[pivot] / modulus;
                column *= phase.conj();
            }
            basis.set_column(dst, &column);
        }

        Ok(SpectralDecomposition { eigenvalues, basis })
    }

    /// Matrix exponential via the spectral calculus; always lands in the
    /// PD cone.
    pub fn matrix_exp(&self) -> Result<PDMatrix> {
        let eig = self.eig()?;
        let eigenvalues: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.exp()).collect();
        // exp is increasing, so the sorted order carries over.
        Ok(PDMatrix::from_eigen_parts(SpectralDecomposition {
            eigenvalues,
            basis: eig.basis,
        }))
    }
}

/// Spectral decomposition of a Hermitian matrix: ascending real eigenvalues
/// and a unitary basis whose columns are the matching eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    basis: DMatrix<C64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary eigenvector basis (columns match `eigenvalues`).
    pub fn basis(&self) -> &DMatrix<C64> {
        &self.basis
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_norm(&self) -> f64 {
        self.min_eigenvalue().abs().max(self.max_eigenvalue().abs())
    }

    /// Applies a real function to the spectrum: `basis diag(f(λ)) basis*`,
    /// symmetrized.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let diag = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&l| C64::new(f(l), 0.0)),
        ));
        let raw = &self.basis * diag * self.basis.adjoint();
        HermitianMatrix::symmetrize(&raw).expect("reconstruction is square")
    }

    /// Reconstructs the original matrix.
    pub fn reconstruct(&self) -> HermitianMatrix {
        self.map_spectrum(|l| l)
    }
}

/// A positive-definite Hermitian matrix: an element of the open cone Ω.
///
/// Carries its spectral decomposition, computed once at construction, so
/// powers, logs, and Thompson-metric evaluations reuse it.
#[derive(Clone, Debug)]
pub struct PDMatrix {
    base: HermitianMatrix,
    eigen: SpectralDecomposition,
}

impl PDMatrix {
    /// Admits a Hermitian matrix into the cone, failing with
    /// [`Error::NotPositiveDefinite`] when the smallest eigenvalue does not
    /// clear `PD_TOL * spectral_norm`.
    pub fn new(base: HermitianMatrix) -> Result<Self> {
        let eigen = base.eig()?;
        let spectral_norm = eigen.spectral_norm();
        if eigen.min_eigenvalue() <= PD_TOL * spectral_norm || eigen.min_eigenvalue() <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: eigen.min_eigenvalue(),
                spectral_norm,
            });
        }
        Ok(Self { base, eigen })
    }

    /// Builds from row-major complex entries (symmetrized, then PD-checked).
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_rows(dim, entries)?)
    }

    /// Builds from row-major real entries (symmetrized, then PD-checked).
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_rows(dim, entries)?)
    }

    /// Positive diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(diag))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            base: HermitianMatrix::identity(dim),
            eigen: SpectralDecomposition {
                eigenvalues: vec![1.0; dim],
                basis: DMatrix::identity(dim, dim),
            },
        }
    }

    /// Internal constructor for results whose positive spectrum is known
    /// analytically (exp, powers, scalings); skips the numerical PD check.
    pub(crate) fn from_eigen_parts(eigen: SpectralDecomposition) -> Self {
        debug_assert!(eigen.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        debug_assert!(eigen.min_eigenvalue() > 0.0);
        let base = eigen.reconstruct();
        Self { base, eigen }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.base.matrix()
    }

    /// Cached spectral decomposition.
    pub fn eigen(&self) -> &SpectralDecomposition {
        &self.eigen
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen.min_eigenvalue()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.eigen.spectral_norm()
    }

    /// Matrix logarithm: `log` of the eigenvalues in the same basis. Inverse
    /// of [`HermitianMatrix::matrix_exp`].
    pub fn matrix_log(&self) -> HermitianMatrix {
        self.eigen.map_spectrum(f64::ln)
    }

    /// Real matrix power through the cached spectrum.
    pub fn matrix_pow(&self, p: f64) -> PDMatrix {
        let dim = self.dim();
        let mut eigenvalues: Vec<f64> = self.eigen.eigenvalues.iter().map(|&l| l.powf(p)).collect();
        let mut basis = self.eigen.basis.clone();
        if p < 0.0 {
            // λ ↦ λ^p reverses the order for negative p.
            eigenvalues.reverse();
            let reversed: Vec<_> = (0..dim).rev().map(|i| basis.column(i).clone_owned()).collect();
            for (dst, col) in reversed.into_iter().enumerate() {
                basis.set_column(dst, &col);
            }
        }
        PDMatrix::from_eigen_parts(SpectralDecomposition { eigenvalues, basis })
    }

    pub fn sqrt(&self) -> PDMatrix {
        self.matrix_pow(0.5)
    }

    pub fn inv_sqrt(&self) -> PDMatrix {
        self.matrix_pow(-0.5)
    }

    pub fn inverse(&self) -> PDMatrix {
        self.matrix_pow(-1.0)
    }

    /// Scales by a positive factor, staying in the cone.
    pub fn scale(&self, t: f64) -> Result<PDMatrix> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "scale factor must be positive and finite, got {t}"
            )));
        }
        let eigenvalues: Vec<f64> = self.eigen.eigenvalues.iter().map(|&l| l * t).collect();
        Ok(PDMatrix::from_eigen_parts(SpectralDecomposition {
            eigenvalues,
            basis: self.eigen.basis.clone(),
        }))
    }

    /// Two-sided product `w a w` by a Hermitian factor, symmetrized. Used for
    /// the congruences `x^{±1/2} a x^{±1/2}` that appear in the Karcher
    /// residual and the Thompson metric, where `w` is invertible by
    /// construction and no condition check is needed.
    pub(crate) fn sandwich(&self, w: &HermitianMatrix) -> Result<PDMatrix> {
        let raw = w.matrix() * self.matrix() * w.matrix();
        PDMatrix::new(HermitianMatrix::symmetrize(&raw)?)
    }
}

/// Congruence transform `m* a m` by an invertible matrix; positive definite
/// by Sylvester's law of inertia.
///
/// `m` is rejected as [`Error::SingularCongruence`] when its smallest
/// singular value does not clear `SINGULAR_TOL` times its largest.
pub fn congruence(m: &DMatrix<C64>, a: &PDMatrix) -> Result<PDMatrix> {
    let dim = check_square(m)?;
    check_same_dim(dim, a.dim())?;
    let sv = m.clone().singular_values();
    let (mut smax, mut smin) = (0.0f64, f64::INFINITY);
    for &s in sv.iter() {
        smax = smax.max(s);
        smin = smin.min(s);
    }
    if smin <= SINGULAR_TOL * smax || smin == 0.0 {
        return Err(Error::SingularCongruence {
            condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        });
    }
    let raw = m.adjoint() * a.matrix() * m;
    PDMatrix::new(HermitianMatrix::symmetrize(&raw)?)
}

/// Loewner order test: `a ≤ b` iff the smallest eigenvalue of `b - a` clears
/// `-tol * (1 + ‖b - a‖)`.
pub fn loewner_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    let diff = b.sub(a)?;
    let eig = diff.eig()?;
    Ok(eig.min_eigenvalue() >= -tol * (1.0 + eig.spectral_norm()))
}

// ---------------------------------------------------------------------------
// JSON encoding: {"dim": n, "entries": [[[re, im], ...], ...]} row-major.
// Writers emit exact Hermitian data; readers symmetrize.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl From<&HermitianMatrix> for MatrixJson {
    fn from(h: &HermitianMatrix) -> Self {
        let dim = h.dim();
        let entries = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        let z = h.entry(i, j);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        MatrixJson { dim, entries }
    }
}

impl TryFrom<MatrixJson> for HermitianMatrix {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        if json.dim == 0 {
            return Err(Error::EmptyMatrix);
        }
        if json.entries.len() != json.dim || json.entries.iter().any(|r| r.len() != json.dim) {
            return Err(Error::NotSquare {
                rows: json.entries.len(),
                cols: json.entries.first().map_or(0, |r| r.len()),
            });
        }
        let flat: Vec<C64> = json
            .entries
            .iter()
            .flatten()
            .map(|&[re, im]| C64::new(re, im))
            .collect();
        HermitianMatrix::from_rows(json.dim, &flat)
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let json = MatrixJson::deserialize(deserializer)?;
        HermitianMatrix::try_from(json).map_err(D::Error::custom)
    }
}

impl Serialize for PDMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.base.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PDMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let base = HermitianMatrix::deserialize(deserializer)?;
        PDMatrix::new(base).map_err(D::Error::custom)
    }
}
