//! Arithmetic, harmonic, and Karcher barycenters of supported measures.
//!
//! A barycentric map sends a probability measure to a point and fixes point
//! masses: `β(δ_x) = x`. For finitely supported measures on the cone:
//!
//! - the arithmetic barycenter is `𝒜(μ) = Σ wᵢ aᵢ`, which is also the value
//!   of the Bochner integral of any simple function pushing forward to `μ`;
//! - the harmonic barycenter is `ℋ(μ) = (Σ wᵢ aᵢ^{-1})^{-1}`, the inversion
//!   conjugate of the arithmetic one;
//! - the Karcher barycenter `Λ(μ)` is the solution of the Karcher equation,
//!   delegated to [`crate::karcher::karcher_mean`].
//!
//! They are ordered `ℋ(μ) ≤ Λ(μ) ≤ 𝒜(μ)` in the Loewner order.

use crate::hermitian::{HermitianMatrix, PDMatrix};
use crate::karcher::{karcher_mean, SolverConfig};
use crate::measures::SupportedMeasure;
use crate::{Error, Result};

/// Weighted arithmetic mean `Σ wᵢ aᵢ` of the atoms. Positive definite
/// whenever the atoms are, by convexity of the cone.
pub fn arithmetic_barycenter(mu: &SupportedMeasure) -> HermitianMatrix {
    let mut sum = HermitianMatrix::zero(mu.dim());
    for (a, &w) in mu.atoms().iter().zip(mu.weights()) {
        sum = sum
            .add(&a.hermitian().scale(w))
            .expect("measure atoms share a dimension");
    }
    sum
}

/// Integral of a simple function given as `(weight, value)` pieces:
/// `Σ μ(Aᵢ) xᵢ`, summed directly without merging repeated values.
///
/// Agrees with [`arithmetic_barycenter`] of the induced pushforward measure;
/// the two code paths are kept separate so they can check each other.
pub fn bochner_of_simple(pieces: &[(f64, PDMatrix)]) -> Result<HermitianMatrix> {
    if pieces.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    let dim = pieces[0].1.dim();
    let sum_w: f64 = pieces.iter().map(|&(w, _)| w).sum();
    if (sum_w - 1.0).abs() > crate::measures::WEIGHT_SUM_TOL {
        return Err(Error::WeightSum {
            sum: sum_w,
            tolerance: crate::measures::WEIGHT_SUM_TOL,
        });
    }
    let mut sum = HermitianMatrix::zero(dim);
    for (index, (w, x)) in pieces.iter().enumerate() {
        if *w < 0.0 || !w.is_finite() {
            return Err(Error::InvalidWeight { index, value: *w });
        }
        sum = sum.add(&x.hermitian().scale(*w))?;
    }
    Ok(sum)
}

/// Harmonic barycenter `(Σ wᵢ aᵢ^{-1})^{-1}`: inversion, arithmetic
/// barycenter, inversion.
pub fn harmonic_barycenter(mu: &SupportedMeasure) -> Result<PDMatrix> {
    let mut sum = HermitianMatrix::zero(mu.dim());
    for (a, &w) in mu.atoms().iter().zip(mu.weights()) {
        sum = sum.add(&a.inverse().hermitian().scale(w))?;
    }
    Ok(PDMatrix::new(sum)?.inverse())
}

/// Karcher barycenter `Λ(μ)`: the unique Karcher-equation solution,
/// computed by the mean solver. Errors with [`Error::NotConverged`] when the
/// solver misses its residual target.
pub fn karcher_barycenter(mu: &SupportedMeasure, cfg: &SolverConfig) -> Result<PDMatrix> {
    let result = karcher_mean(mu, cfg)?;
    if !result.converged {
        return Err(Error::NotConverged {
            iterations: result.iterations,
            residual_norm: result.residual_norm,
        });
    }
    Ok(result.mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::{congruence, loewner_leq};
    use crate::sample;
    use crate::thompson::thompson_distance;

    fn diag(entries: &[f64]) -> PDMatrix {
        PDMatrix::from_diagonal(entries).unwrap()
    }

    #[test]
    fn arithmetic_fixes_point_masses() {
        let x = diag(&[2.0, 0.3]);
        let out = arithmetic_barycenter(&SupportedMeasure::dirac(x.clone()));
        assert!(out.sub(x.hermitian()).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn arithmetic_uniform_scalar_case() {
        let id = PDMatrix::identity(2);
        let mu =
            SupportedMeasure::uniform(vec![id.clone(), id.scale(3.0).unwrap()]).unwrap();
        let out = arithmetic_barycenter(&mu);
        let want = HermitianMatrix::identity(2).scale(2.0);
        assert!(out.sub(&want).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn arithmetic_weighted_random_pair_matches_direct_sum() {
        let mut rng = sample::rng(40);
        let a = sample::random_pd(&mut rng, 3, 1.0).unwrap();
        let b = sample::random_pd(&mut rng, 3, 1.0).unwrap();
        let mu = SupportedMeasure::new(vec![a.clone(), b.clone()], vec![0.75, 0.25]).unwrap();
        let out = arithmetic_barycenter(&mu);
        let direct = a.hermitian().scale(0.75).add(&b.hermitian().scale(0.25)).unwrap();
        assert!(out.sub(&direct).unwrap().frobenius_norm() < 1e-13);
    }

    #[test]
    fn bochner_single_piece() {
        let x = diag(&[1.5, 2.5]);
        let out = bochner_of_simple(&[(1.0, x.clone())]).unwrap();
        assert!(out.sub(x.hermitian()).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn bochner_repeated_values_agree_with_measure_path() {
        // Simple function with a repeated value: merging then averaging must
        // match the direct Σ μ(Aᵢ)xᵢ.
        let x = diag(&[2.0, 1.0]);
        let y = diag(&[1.0, 3.0]);
        let pieces = vec![(0.25, x.clone()), (0.25, x.clone()), (0.5, y.clone())];
        let direct = bochner_of_simple(&pieces).unwrap();

        let mu = SupportedMeasure::new(
            pieces.iter().map(|(_, a)| a.clone()).collect(),
            pieces.iter().map(|&(w, _)| w).collect(),
        )
        .unwrap();
        assert_eq!(mu.len(), 2);
        let via_measure = arithmetic_barycenter(&mu);
        assert!(direct.sub(&via_measure).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn bochner_random_simple_function_mutual_oracle() {
        let mut rng = sample::rng(41);
        let values: Vec<PDMatrix> = (0..5)
            .map(|_| sample::random_pd(&mut rng, 2, 1.0).unwrap())
            .collect();
        let weights = [0.1, 0.2, 0.3, 0.15, 0.25];
        let pieces: Vec<(f64, PDMatrix)> = weights
            .iter()
            .copied()
            .zip(values.iter().cloned())
            .collect();
        let direct = bochner_of_simple(&pieces).unwrap();
        let mu = SupportedMeasure::new(values, weights.to_vec()).unwrap();
        let via_measure = arithmetic_barycenter(&mu);
        assert!(direct.sub(&via_measure).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn bochner_rejects_bad_weight_sum() {
        let x = diag(&[1.0, 1.0]);
        assert!(matches!(
            bochner_of_simple(&[(0.8, x)]),
            Err(Error::WeightSum { .. })
        ));
    }

    #[test]
    fn harmonic_fixes_point_masses() {
        let x = diag(&[0.5, 4.0]);
        let out = harmonic_barycenter(&SupportedMeasure::dirac(x.clone())).unwrap();
        assert!(thompson_distance(&out, &x).unwrap().is_zero());
    }

    #[test]
    fn harmonic_scalar_case_by_hand() {
        // Uniform on {I, 3I}: (1/2 (1 + 1/3))^{-1} = 3/2.
        let id = PDMatrix::identity(2);
        let mu = SupportedMeasure::uniform(vec![id.clone(), id.scale(3.0).unwrap()]).unwrap();
        let out = harmonic_barycenter(&mu).unwrap();
        let want = id.scale(1.5).unwrap();
        assert!(thompson_distance(&out, &want).unwrap().value() < 1e-12);
    }

    #[test]
    fn harmonic_is_inversion_conjugate_of_arithmetic() {
        let mut rng = sample::rng(42);
        let mu = sample::random_measure(&mut rng, 3, 4, 1.0).unwrap();
        let direct = harmonic_barycenter(&mu).unwrap();
        let conjugate = PDMatrix::new(arithmetic_barycenter(
            &mu.pushforward(|a| Ok(a.inverse())).unwrap(),
        ))
        .unwrap()
        .inverse();
        let diff = direct
            .hermitian()
            .sub(conjugate.hermitian())
            .unwrap()
            .frobenius_norm();
        assert!(diff < 1e-12 * (1.0 + direct.hermitian().frobenius_norm()));
    }

    #[test]
    fn karcher_barycenter_fixes_point_masses() {
        let x = diag(&[2.0, 0.5]);
        let out = karcher_barycenter(&SupportedMeasure::dirac(x.clone()), &SolverConfig::default())
            .unwrap();
        assert!(thompson_distance(&out, &x).unwrap().is_zero());
    }

    #[test]
    fn karcher_barycenter_congruence_equivariance() {
        let mut rng = sample::rng(43);
        let cfg = SolverConfig::default();
        let mu = sample::random_measure(&mut rng, 2, 3, 1.0).unwrap();
        let m = sample::random_invertible(&mut rng, 2, 5.0);

        let pushed = mu.pushforward(|a| congruence(&m, a)).unwrap();
        let left = karcher_barycenter(&pushed, &cfg).unwrap();
        let right = congruence(&m, &karcher_barycenter(&mu, &cfg).unwrap()).unwrap();
        assert!(thompson_distance(&left, &right).unwrap().value() < 1e-7);
    }

    #[test]
    fn barycenters_are_loewner_ordered() {
        let mut rng = sample::rng(44);
        let cfg = SolverConfig::default();
        for _ in 0..3 {
            let mu = sample::random_measure(&mut rng, 3, 4, 1.0).unwrap();
            let harmonic = harmonic_barycenter(&mu).unwrap();
            let karcher = karcher_barycenter(&mu, &cfg).unwrap();
            let arithmetic = arithmetic_barycenter(&mu);
            assert!(loewner_leq(harmonic.hermitian(), karcher.hermitian(), 1e-7).unwrap());
            assert!(loewner_leq(karcher.hermitian(), &arithmetic, 1e-7).unwrap());
        }
    }
}
