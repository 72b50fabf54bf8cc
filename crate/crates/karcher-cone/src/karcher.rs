//! The Karcher equation and its solver.
//!
//! The weighted Karcher equation for atoms `a₁, …, aₙ` in the cone and
//! weights `wᵢ` summing to one asks for the `x` with
//!
//! ```text
//! Σ wᵢ log(x^{-1/2} aᵢ x^{-1/2}) = 0.
//! ```
//!
//! Its unique PD solution is the weighted Karcher mean `Λ(w; a)`, the
//! many-point generalization of the two-point geometric mean
//! `a # b = a^{1/2} (a^{-1/2} b a^{-1/2})^{1/2} a^{1/2}`.
//!
//! The solver iterates the damped fixed-point update
//! `x ← x^{1/2} exp(t·R(x)) x^{1/2}` where `R` is the residual above.
//! Fixed points of the undamped update are exactly the Karcher-equation
//! solutions, and the update stays inside the cone by construction.
//! Convergence is declared on the residual Frobenius norm — the equation's
//! own defining quantity — not on iterate movement. A step is accepted only
//! when it strictly decreases the residual norm; otherwise it is backtracked,
//! since a full step can oscillate for strongly anisotropic atoms.
//!
//! `gamma_map` and `lambda_map` complete an `(n-1)`-tuple: `gamma_map(x, ·)`
//! returns the unique atom `a` making `x` the uniform Karcher mean of the
//! completed tuple, and `lambda_map(a, ·)` goes the other way. They are
//! inverse bijections of the cone.

use crate::hermitian::{HermitianMatrix, PDMatrix};
use crate::measures::SupportedMeasure;
use crate::sample;
use crate::thompson::thompson_distance;
use crate::{Error, Result};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// Iteration controls for [`karcher_mean`].
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Absolute residual target (Frobenius norm).
    pub tol_abs: f64,
    /// Relative residual target, scaled by matrix dimension.
    pub tol_rel: f64,
    /// Outer iteration budget.
    pub max_iter: usize,
    /// First step length tried each iteration, in (0, 1].
    pub initial_step: f64,
    /// Multiplier applied on each backtrack, in (0, 1).
    pub backtrack_factor: f64,
    /// Backtracks allowed per iteration before giving up.
    pub max_backtracks: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_abs: 1e-11,
            tol_rel: 1e-12,
            max_iter: 500,
            initial_step: 1.0,
            backtrack_factor: 0.5,
            max_backtracks: 30,
        }
    }
}

impl SolverConfig {
    /// Residual norm below which a solve counts as converged.
    pub fn residual_threshold(&self, dim: usize) -> f64 {
        self.tol_abs + self.tol_rel * dim as f64
    }

    fn validate(&self) -> Result<()> {
        let ok = self.tol_abs > 0.0
            && self.tol_rel > 0.0
            && self.max_iter > 0
            && self.initial_step > 0.0
            && self.initial_step <= 1.0
            && self.backtrack_factor > 0.0
            && self.backtrack_factor < 1.0
            && self.max_backtracks > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(
                "solver parameters must be positive, with initial_step in (0,1] and backtrack_factor in (0,1)".into(),
            ))
        }
    }
}

/// Solver output: the candidate mean together with its convergence record.
#[derive(Clone, Debug)]
pub struct KarcherResult {
    pub mean: PDMatrix,
    /// Frobenius norm of the Karcher residual at `mean`.
    pub residual_norm: f64,
    /// Outer iterations performed.
    pub iterations: usize,
    pub converged: bool,
    /// Accepted step length per iteration.
    pub step_history: Vec<f64>,
}

impl Serialize for KarcherResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut state = serializer.serialize_struct("KarcherResult", 4)?;
        state.serialize_field("mean", &self.mean)?;
        state.serialize_field("residual_norm", &self.residual_norm)?;
        state.serialize_field("iterations", &self.iterations)?;
        state.serialize_field("converged", &self.converged)?;
        state.end()
    }
}

/// Karcher residual `Σ wᵢ log(x^{-1/2} aᵢ x^{-1/2})` over explicit weights
/// and atoms.
pub fn karcher_residual_weighted(
    x: &PDMatrix,
    weights: &[f64],
    atoms: &[PDMatrix],
) -> Result<HermitianMatrix> {
    debug_assert_eq!(weights.len(), atoms.len());
    let inv_sqrt = x.inv_sqrt();
    let mut sum = HermitianMatrix::zero(x.dim());
    for (a, &w) in atoms.iter().zip(weights) {
        if a.dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                left: x.dim(),
                right: a.dim(),
            });
        }
        let log_term = a.sandwich(inv_sqrt.hermitian())?.matrix_log();
        sum = sum.add(&log_term.scale(w))?;
    }
    Ok(sum)
}

/// Karcher residual of `x` against a supported measure.
pub fn karcher_residual(x: &PDMatrix, mu: &SupportedMeasure) -> Result<HermitianMatrix> {
    karcher_residual_weighted(x, mu.weights(), mu.atoms())
}

/// Dual form `Σ wᵢ log(x^{1/2} aᵢ^{-1} x^{1/2})`, equal to the negated
/// residual through the identity
/// `log(x^{1/2} a^{-1} x^{1/2}) = -log(x^{-1/2} a x^{-1/2})`.
pub fn karcher_residual_dual(
    x: &PDMatrix,
    weights: &[f64],
    atoms: &[PDMatrix],
) -> Result<HermitianMatrix> {
    debug_assert_eq!(weights.len(), atoms.len());
    let sqrt = x.sqrt();
    let mut sum = HermitianMatrix::zero(x.dim());
    for (a, &w) in atoms.iter().zip(weights) {
        if a.dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                left: x.dim(),
                right: a.dim(),
            });
        }
        let log_term = a.inverse().sandwich(sqrt.hermitian())?.matrix_log();
        sum = sum.add(&log_term.scale(w))?;
    }
    Ok(sum)
}

/// Two-point geometric mean `a # b = a^{1/2} (a^{-1/2} b a^{-1/2})^{1/2}
/// a^{1/2}`: the closed form of the uniform two-atom Karcher mean.
pub fn geometric_mean(a: &PDMatrix, b: &PDMatrix) -> Result<PDMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let middle = b.sandwich(a.inv_sqrt().hermitian())?.sqrt();
    middle.sandwich(a.sqrt().hermitian())
}

/// Weighted arithmetic mean of the atoms, the solver's starting point: it is
/// always PD and dominates the mean in the Loewner order, giving a consistent
/// approach direction.
fn arithmetic_start(mu: &SupportedMeasure) -> Result<PDMatrix> {
    let mut sum = HermitianMatrix::zero(mu.dim());
    for (a, &w) in mu.atoms().iter().zip(mu.weights()) {
        sum = sum.add(&a.hermitian().scale(w))?;
    }
    PDMatrix::new(sum)
}

/// Solves the Karcher equation for `mu` starting from the weighted
/// arithmetic mean.
///
/// Non-convergence is not an `Err`: the best iterate comes back with
/// `converged == false`. Errors are reserved for structural failures
/// (dimension mismatches, spectra outside the cone, eigensolver failure).
pub fn karcher_mean(mu: &SupportedMeasure, cfg: &SolverConfig) -> Result<KarcherResult> {
    let start = arithmetic_start(mu)?;
    karcher_mean_from(mu, cfg, &start)
}

/// [`karcher_mean`] from an explicit starting point.
pub fn karcher_mean_from(
    mu: &SupportedMeasure,
    cfg: &SolverConfig,
    start: &PDMatrix,
) -> Result<KarcherResult> {
    cfg.validate()?;
    if start.dim() != mu.dim() {
        return Err(Error::DimensionMismatch {
            left: start.dim(),
            right: mu.dim(),
        });
    }
    let threshold = cfg.residual_threshold(mu.dim());

    let mut x = start.clone();
    let mut residual = karcher_residual(&x, mu)?;
    let mut residual_norm = residual.frobenius_norm();
    let mut step_history = Vec::new();

    for iteration in 0..cfg.max_iter {
        if residual_norm <= threshold {
            return Ok(KarcherResult {
                mean: x,
                residual_norm,
                iterations: iteration,
                converged: true,
                step_history,
            });
        }

        let sqrt = x.sqrt();
        let mut step = cfg.initial_step;
        let mut accepted = false;
        for _ in 0..=cfg.max_backtracks {
            let candidate = residual.scale(step).matrix_exp()?.sandwich(sqrt.hermitian())?;
            let candidate_residual = karcher_residual(&candidate, mu)?;
            let candidate_norm = candidate_residual.frobenius_norm();
            if candidate_norm < residual_norm {
                x = candidate;
                residual = candidate_residual;
                residual_norm = candidate_norm;
                step_history.push(step);
                accepted = true;
                break;
            }
            step *= cfg.backtrack_factor;
        }

        if !accepted {
            return Ok(KarcherResult {
                mean: x,
                residual_norm,
                iterations: iteration + 1,
                converged: false,
                step_history,
            });
        }
    }

    let converged = residual_norm <= threshold;
    Ok(KarcherResult {
        mean: x,
        residual_norm,
        iterations: cfg.max_iter,
        converged,
        step_history,
    })
}

/// Completes an `(n-1)`-tuple at `x`: returns the unique `a` with
///
/// ```text
/// Σᵢ log(x^{-1/2} aᵢ x^{-1/2}) + log(x^{-1/2} a x^{-1/2}) = 0,
/// ```
///
/// namely `a = x^{1/2} exp(-Σᵢ log(x^{-1/2} aᵢ x^{-1/2})) x^{1/2}`.
/// Equivalently, `x` is the uniform Karcher mean of `a_list ∪ {a}`.
pub fn gamma_map(x: &PDMatrix, a_list: &[PDMatrix]) -> Result<PDMatrix> {
    let inv_sqrt = x.inv_sqrt();
    let mut sum = HermitianMatrix::zero(x.dim());
    for a in a_list {
        if a.dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                left: x.dim(),
                right: a.dim(),
            });
        }
        sum = sum.add(&a.sandwich(inv_sqrt.hermitian())?.matrix_log())?;
    }
    sum.scale(-1.0).matrix_exp()?.sandwich(x.sqrt().hermitian())
}

/// The inverse of [`gamma_map`]: the uniform Karcher mean of
/// `a_list ∪ {a}`. Errors with [`Error::NotConverged`] when the solver
/// misses its residual target.
pub fn lambda_map(a: &PDMatrix, a_list: &[PDMatrix], cfg: &SolverConfig) -> Result<PDMatrix> {
    let mut atoms: Vec<PDMatrix> = a_list.to_vec();
    atoms.push(a.clone());
    let mu = SupportedMeasure::uniform(atoms)?;
    let result = karcher_mean(&mu, cfg)?;
    if !result.converged {
        return Err(Error::NotConverged {
            iterations: result.iterations,
            residual_norm: result.residual_norm,
        });
    }
    Ok(result.mean)
}

/// Outcome of [`uniqueness_probe`].
#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    pub trials: usize,
    /// Trials whose solve converged.
    pub converged: usize,
    /// Trials whose solve did not converge (excluded from the spread).
    pub failed: usize,
    /// Largest pairwise Thompson distance among converged means.
    pub max_spread: f64,
    /// True when `max_spread` is at most [`UniquenessReport::SPREAD_TOL`].
    pub pass: bool,
}

impl UniquenessReport {
    /// Spread budget for declaring all converged solves identical.
    pub const SPREAD_TOL: f64 = 1e-7;
}

/// Runs [`karcher_mean`] from `trials` randomized starting points —
/// congruences of the arithmetic mean by seeded random invertible matrices
/// with condition number at most 10 — and reports the maximum pairwise
/// Thompson distance among the converged means.
pub fn uniqueness_probe(
    mu: &SupportedMeasure,
    cfg: &SolverConfig,
    trials: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    if trials == 0 {
        return Err(Error::InvalidConfig("uniqueness probe needs trials >= 1".into()));
    }
    let mut rng = sample::rng(seed);
    let base = arithmetic_start(mu)?;

    let mut means: Vec<PDMatrix> = Vec::with_capacity(trials);
    let mut failed = 0usize;
    for _ in 0..trials {
        let m = sample::random_invertible(&mut rng, mu.dim(), 10.0);
        let start = crate::hermitian::congruence(&m, &base)?;
        let result = karcher_mean_from(mu, cfg, &start)?;
        if result.converged {
            means.push(result.mean);
        } else {
            failed += 1;
        }
    }

    let mut max_spread = 0.0f64;
    for i in 0..means.len() {
        for j in (i + 1)..means.len() {
            max_spread = max_spread.max(thompson_distance(&means[i], &means[j])?.value());
        }
    }

    Ok(UniquenessReport {
        trials,
        converged: means.len(),
        failed,
        max_spread,
        pass: max_spread <= UniquenessReport::SPREAD_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    fn diag(entries: &[f64]) -> PDMatrix {
        PDMatrix::from_diagonal(entries).unwrap()
    }

    #[test]
    fn residual_at_own_dirac_is_zero() {
        let a = diag(&[2.0, 5.0]);
        let r = karcher_residual(&a, &SupportedMeasure::dirac(a.clone())).unwrap();
        assert!(r.frobenius_norm() < 1e-13);
    }

    #[test]
    fn residual_commuting_cancellation() {
        // log(diag(1,4)/2) and log(diag(4,1)/2) cancel entrywise at diag(2,2).
        let mu = SupportedMeasure::uniform(vec![diag(&[1.0, 4.0]), diag(&[4.0, 1.0])]).unwrap();
        let x = diag(&[2.0, 2.0]);
        let r = karcher_residual(&x, &mu).unwrap();
        assert!(r.frobenius_norm() < 1e-13);
    }

    #[test]
    fn residual_vanishes_at_geometric_mean() {
        let mut rng = sample::rng(100);
        for _ in 0..5 {
            let a = sample::random_pd(&mut rng, 3, 1.2).unwrap();
            let b = sample::random_pd(&mut rng, 3, 1.2).unwrap();
            let g = geometric_mean(&a, &b).unwrap();
            let mu = SupportedMeasure::uniform(vec![a, b]).unwrap();
            let r = karcher_residual(&g, &mu).unwrap();
            assert!(r.frobenius_norm() < 1e-10, "residual {}", r.frobenius_norm());
        }
    }

    #[test]
    fn dual_residual_is_negated_primal() {
        let mut rng = sample::rng(101);
        let mu = sample::random_measure(&mut rng, 3, 4, 1.0).unwrap();
        let x = sample::random_pd(&mut rng, 3, 1.0).unwrap();
        let primal = karcher_residual(&x, &mu).unwrap();
        let dual = karcher_residual_dual(&x, mu.weights(), mu.atoms()).unwrap();
        let sum = primal.add(&dual).unwrap();
        assert!(sum.frobenius_norm() < 1e-10);
    }

    #[test]
    fn dual_residual_zero_at_dirac() {
        let a = diag(&[3.0, 0.5]);
        let r = karcher_residual_dual(&a, &[1.0], &[a.clone()]).unwrap();
        assert!(r.frobenius_norm() < 1e-13);
    }

    #[test]
    fn mean_of_dirac_is_the_atom() {
        let a = diag(&[2.0, 0.7]);
        let result = karcher_mean(&SupportedMeasure::dirac(a.clone()), &SolverConfig::default())
            .unwrap();
        assert!(result.converged);
        assert_eq!(result.iterations, 0);
        assert!(thompson_distance(&result.mean, &a).unwrap().is_zero());
    }

    #[test]
    fn mean_commuting_diagonal_case() {
        let mu = SupportedMeasure::uniform(vec![diag(&[1.0, 4.0]), diag(&[4.0, 1.0])]).unwrap();
        let result = karcher_mean(&mu, &SolverConfig::default()).unwrap();
        assert!(result.converged);
        let want = diag(&[2.0, 2.0]);
        assert!(thompson_distance(&result.mean, &want).unwrap().value() < 1e-9);
    }

    #[test]
    fn mean_weighted_scalar_case() {
        // Atoms 2I and 8I with weights (3/4, 1/4): mean is 2^{3/4}·8^{1/4} I
        // = 2^{3/2} I.
        let id = PDMatrix::identity(2);
        let mu = SupportedMeasure::new(
            vec![id.scale(2.0).unwrap(), id.scale(8.0).unwrap()],
            vec![0.75, 0.25],
        )
        .unwrap();
        let result = karcher_mean(&mu, &SolverConfig::default()).unwrap();
        assert!(result.converged);
        let want = id.scale(2.0f64.powf(1.5)).unwrap();
        assert!(thompson_distance(&result.mean, &want).unwrap().value() < 1e-10);
    }

    #[test]
    fn mean_two_atoms_matches_geometric_mean() {
        let mut rng = sample::rng(200);
        for _ in 0..5 {
            let a = sample::random_pd(&mut rng, 3, 1.0).unwrap();
            let b = sample::random_pd(&mut rng, 3, 1.0).unwrap();
            let mu = SupportedMeasure::uniform(vec![a.clone(), b.clone()]).unwrap();
            let result = karcher_mean(&mu, &SolverConfig::default()).unwrap();
            assert!(result.converged);
            let oracle = geometric_mean(&a, &b).unwrap();
            let d = thompson_distance(&result.mean, &oracle).unwrap().value();
            assert!(d < 1e-8, "distance to closed form {d}");
        }
    }

    #[test]
    fn converged_result_satisfies_posted_residual_bound() {
        let mut rng = sample::rng(201);
        let cfg = SolverConfig::default();
        let mu = sample::random_measure(&mut rng, 4, 6, 1.0).unwrap();
        let result = karcher_mean(&mu, &cfg).unwrap();
        assert!(result.converged);
        // Independent re-check, outside the solver loop.
        let residual = karcher_residual(&result.mean, &mu).unwrap();
        assert!(residual.frobenius_norm() <= cfg.residual_threshold(mu.dim()));
    }

    #[test]
    fn solver_is_deterministic() {
        let mut rng = sample::rng(202);
        let mu = sample::random_measure(&mut rng, 3, 5, 1.0).unwrap();
        let a = karcher_mean(&mu, &SolverConfig::default()).unwrap();
        let b = karcher_mean(&mu, &SolverConfig::default()).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.residual_norm, b.residual_norm);
        assert_eq!(a.mean.hermitian(), b.mean.hermitian());
    }

    #[test]
    fn gamma_with_own_atom_returns_it() {
        let x = diag(&[2.0, 3.0]);
        let out = gamma_map(&x, &[x.clone()]).unwrap();
        assert!(thompson_distance(&out, &x).unwrap().is_zero());
    }

    #[test]
    fn gamma_single_term_closed_form() {
        // One fixed atom a₁: γ(x) = x a₁^{-1} x.
        let mut rng = sample::rng(300);
        let x = sample::random_pd(&mut rng, 2, 1.0).unwrap();
        let a1 = sample::random_pd(&mut rng, 2, 1.0).unwrap();
        let out = gamma_map(&x, &[a1.clone()]).unwrap();
        let direct = a1.inverse().sandwich(x.hermitian()).unwrap();
        let d = thompson_distance(&out, &direct).unwrap().value();
        assert!(d < 1e-10);
    }

    #[test]
    fn gamma_completion_zeroes_the_residual() {
        let mut rng = sample::rng(301);
        let x = sample::random_pd(&mut rng, 3, 1.0).unwrap();
        let others: Vec<PDMatrix> = (0..3)
            .map(|_| sample::random_pd(&mut rng, 3, 1.0).unwrap())
            .collect();
        let completion = gamma_map(&x, &others).unwrap();
        let mut atoms = others;
        atoms.push(completion);
        let mu = SupportedMeasure::uniform(atoms).unwrap();
        let r = karcher_residual(&x, &mu).unwrap();
        assert!(r.frobenius_norm() < 1e-9, "residual {}", r.frobenius_norm());
    }

    #[test]
    fn lambda_idempotent_on_repeats() {
        let a = diag(&[2.0, 1.0]);
        let out = lambda_map(&a, &[a.clone(), a.clone()], &SolverConfig::default()).unwrap();
        assert!(thompson_distance(&out, &a).unwrap().is_zero());
    }

    #[test]
    fn gamma_and_lambda_invert_each_other() {
        let mut rng = sample::rng(302);
        let cfg = SolverConfig::default();
        let others: Vec<PDMatrix> = (0..2)
            .map(|_| sample::random_pd(&mut rng, 2, 0.8).unwrap())
            .collect();

        let x = sample::random_pd(&mut rng, 2, 0.8).unwrap();
        let round = lambda_map(&gamma_map(&x, &others).unwrap(), &others, &cfg).unwrap();
        assert!(thompson_distance(&round, &x).unwrap().value() < 1e-7);

        let a = sample::random_pd(&mut rng, 2, 0.8).unwrap();
        let back = gamma_map(&lambda_map(&a, &others, &cfg).unwrap(), &others).unwrap();
        assert!(thompson_distance(&back, &a).unwrap().value() < 1e-7);
    }

    #[test]
    fn uniqueness_probe_dirac_has_zero_spread() {
        let a = diag(&[2.0, 0.5]);
        let report = uniqueness_probe(
            &SupportedMeasure::dirac(a),
            &SolverConfig::default(),
            4,
            9,
        )
        .unwrap();
        assert_eq!(report.converged, 4);
        assert!(report.pass);
        assert!(report.max_spread <= 1e-9);
    }

    #[test]
    fn uniqueness_probe_commuting_matches_closed_form() {
        let mu = SupportedMeasure::uniform(vec![diag(&[1.0, 4.0]), diag(&[4.0, 1.0])]).unwrap();
        let report = uniqueness_probe(&mu, &SolverConfig::default(), 6, 10).unwrap();
        assert!(report.pass, "spread {}", report.max_spread);
        assert!(report.max_spread <= 1e-9);
    }

    #[test]
    fn uniqueness_probe_random_instance() {
        let mut rng = sample::rng(303);
        let mu = sample::random_uniform_measure(&mut rng, 3, 4, 1.0).unwrap();
        let report = uniqueness_probe(&mu, &SolverConfig::default(), 8, 11).unwrap();
        assert_eq!(report.failed, 0);
        assert!(report.pass, "spread {}", report.max_spread);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::default();
        cfg.initial_step = 1.5;
        assert!(matches!(
            karcher_mean(&SupportedMeasure::dirac(diag(&[1.0, 1.0])), &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }
}
