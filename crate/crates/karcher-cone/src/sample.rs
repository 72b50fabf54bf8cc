//! Seeded random generation of Hermitian matrices, cone elements, congruence
//! matrices, and supported measures.
//!
//! Everything is driven by an explicit [`ChaCha8Rng`] so that verification
//! suites and the CLI are reproducible run to run: one seed, one transcript.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::hermitian::{HermitianMatrix, PDMatrix};
use crate::measures::SupportedMeasure;
use crate::{C64, Result};

/// Deterministic generator for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn standard_normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn gaussian_complex(rng: &mut impl Rng) -> C64 {
    C64::new(standard_normal(rng), standard_normal(rng))
}

/// Square matrix of iid complex Gaussians.
pub fn random_complex_matrix(rng: &mut impl Rng, dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |_, _| gaussian_complex(rng))
}

/// Random Hermitian matrix with Frobenius norm scaled to `scale`.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize, scale: f64) -> HermitianMatrix {
    let raw = random_complex_matrix(rng, dim);
    let h = HermitianMatrix::symmetrize(&raw).expect("square by construction");
    let norm = h.frobenius_norm();
    if norm > 0.0 {
        h.scale(scale / norm)
    } else {
        h
    }
}

/// Random cone element `exp(h)` with `‖h‖_F = log_scale`; its Thompson
/// distance to the identity is at most `log_scale`.
pub fn random_pd(rng: &mut impl Rng, dim: usize, log_scale: f64) -> Result<PDMatrix> {
    random_hermitian(rng, dim, log_scale).matrix_exp()
}

/// Random unitary matrix: the Q factor of a complex Gaussian.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> DMatrix<C64> {
    let qr = random_complex_matrix(rng, dim).qr();
    qr.q()
}

/// Random invertible matrix with condition number at most `max_condition`:
/// `U diag(σ) V*` with singular values log-uniform in
/// `[1/√max_condition, √max_condition]`.
pub fn random_invertible(rng: &mut impl Rng, dim: usize, max_condition: f64) -> DMatrix<C64> {
    let u = random_unitary(rng, dim);
    let v = random_unitary(rng, dim);
    let half_log = 0.5 * max_condition.ln();
    let sigma = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            let t: f64 = rng.random();
            C64::new(((2.0 * t - 1.0) * half_log).exp(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    u * sigma * v.adjoint()
}

/// Random positive semidefinite matrix `g g*` (full rank almost surely),
/// normalized to unit spectral norm.
pub fn random_psd(rng: &mut impl Rng, dim: usize) -> Result<HermitianMatrix> {
    let g = random_complex_matrix(rng, dim);
    let raw = &g * g.adjoint();
    let h = HermitianMatrix::symmetrize(&raw)?;
    let norm = h.spectral_norm()?;
    Ok(h.scale(1.0 / norm))
}

/// Random weighted measure: `n_atoms` cone elements with weights drawn
/// uniform and normalized.
pub fn random_measure(
    rng: &mut impl Rng,
    dim: usize,
    n_atoms: usize,
    log_scale: f64,
) -> Result<SupportedMeasure> {
    let atoms: Vec<PDMatrix> = (0..n_atoms)
        .map(|_| random_pd(rng, dim, log_scale))
        .collect::<Result<_>>()?;
    let mut weights: Vec<f64> = (0..n_atoms).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    SupportedMeasure::new(atoms, weights)
}

/// Random uniform measure on `n_atoms` cone elements.
pub fn random_uniform_measure(
    rng: &mut impl Rng,
    dim: usize,
    n_atoms: usize,
    log_scale: f64,
) -> Result<SupportedMeasure> {
    let atoms: Vec<PDMatrix> = (0..n_atoms)
        .map(|_| random_pd(rng, dim, log_scale))
        .collect::<Result<_>>()?;
    SupportedMeasure::uniform(atoms)
}
