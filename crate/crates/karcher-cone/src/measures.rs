//! Finitely supported probability measures on the PD cone.
//!
//! A [`SupportedMeasure`] is a list of cone atoms with positive weights that
//! sum to one. Construction merges atoms closer than [`MERGE_TOL`] in the
//! Thompson metric and renormalizes the weights exactly, so re-reading an
//! emitted measure reproduces it bit for bit.
//!
//! On top of the measure type sit the transport-flavored operations: exact
//! Wasserstein-1 distance (a transportation LP over the Thompson ground
//! metric), the bottleneck (min-max) matching distance for uniform measures,
//! the stochastic order test, pushforwards, mixtures, and the ε-net
//! discretization of a sample cloud with its certified `2ε` transport bound.

use nalgebra::DMatrix;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::hermitian::{loewner_leq, PDMatrix};
use crate::thompson::{norm_distance, thompson_distance};
use crate::transport;
use crate::{Error, Result};

/// Atoms closer than this in the Thompson metric are merged at construction.
pub const MERGE_TOL: f64 = 1e-12;

/// Weight sums must land within this distance of one to be accepted.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Uniformity test threshold: `|n·wᵢ - 1| ≤ UNIFORM_TOL` for every weight.
pub const UNIFORM_TOL: f64 = 1e-9;

/// Cell budget for [`empirical_approximation`]; mass from cells beyond the
/// budget is assigned to the base atom.
pub const DEFAULT_MAX_CELLS: usize = 4096;

/// A finitely supported probability measure `Σ wᵢ δ_{aᵢ}` on the cone.
#[derive(Clone, Debug)]
pub struct SupportedMeasure {
    atoms: Vec<PDMatrix>,
    weights: Vec<f64>,
}

impl SupportedMeasure {
    /// Builds a measure, validating weights, merging duplicate atoms, and
    /// normalizing the weight vector to sum to exactly one.
    pub fn new(atoms: Vec<PDMatrix>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyMeasure);
        }
        if atoms.len() != weights.len() {
            return Err(Error::SupportSizeMismatch {
                left: atoms.len(),
                right: weights.len(),
            });
        }
        let dim = atoms[0].dim();
        for atom in &atoms[1..] {
            if atom.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: atom.dim(),
                });
            }
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum {
                sum,
                tolerance: WEIGHT_SUM_TOL,
            });
        }

        // Merge coincident atoms (first occurrence is the representative).
        let mut merged_atoms: Vec<PDMatrix> = Vec::with_capacity(atoms.len());
        let mut merged_weights: Vec<f64> = Vec::with_capacity(atoms.len());
        'outer: for (atom, weight) in atoms.into_iter().zip(weights) {
            for (rep, w) in merged_atoms.iter().zip(merged_weights.iter_mut()) {
                if thompson_distance(rep, &atom)?.value() < MERGE_TOL {
                    *w += weight;
                    continue 'outer;
                }
            }
            merged_atoms.push(atom);
            merged_weights.push(weight);
        }

        // Normalize, then nudge the heaviest weight so the sum is exactly 1.
        let total: f64 = merged_weights.iter().sum();
        for w in &mut merged_weights {
            *w /= total;
        }
        for _ in 0..4 {
            let s: f64 = merged_weights.iter().sum();
            if s == 1.0 {
                break;
            }
            let heaviest = merged_weights
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).expect("weights are finite"))
                .map(|(i, _)| i)
                .expect("measure is nonempty");
            merged_weights[heaviest] += 1.0 - s;
        }

        Ok(Self {
            atoms: merged_atoms,
            weights: merged_weights,
        })
    }

    /// Uniform measure `1/n Σ δ_{aᵢ}`.
    pub fn uniform(atoms: Vec<PDMatrix>) -> Result<Self> {
        let n = atoms.len();
        if n == 0 {
            return Err(Error::EmptyMeasure);
        }
        Self::new(atoms, vec![1.0 / n as f64; n])
    }

    /// Point measure `δ_a`.
    pub fn dirac(atom: PDMatrix) -> Self {
        Self {
            atoms: vec![atom],
            weights: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Matrix dimension shared by all atoms.
    pub fn dim(&self) -> usize {
        self.atoms[0].dim()
    }

    pub fn atoms(&self) -> &[PDMatrix] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when every weight equals `1/n` up to [`UNIFORM_TOL`].
    pub fn is_uniform(&self) -> bool {
        let n = self.len() as f64;
        self.weights.iter().all(|&w| (w * n - 1.0).abs() <= UNIFORM_TOL)
    }

    /// Pushforward `f_*μ`: maps the atoms, carries the weights, and merges
    /// coincident images.
    pub fn pushforward(&self, f: impl Fn(&PDMatrix) -> Result<PDMatrix>) -> Result<Self> {
        let mapped: Vec<PDMatrix> = self.atoms.iter().map(f).collect::<Result<_>>()?;
        Self::new(mapped, self.weights.clone())
    }

    /// Mixture `λ μ + (1-λ) ν` on the union support.
    pub fn mixture(lambda: f64, mu: &Self, nu: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidConfig(format!(
                "mixture parameter must lie in [0, 1], got {lambda}"
            )));
        }
        if mu.dim() != nu.dim() {
            return Err(Error::DimensionMismatch {
                left: mu.dim(),
                right: nu.dim(),
            });
        }
        let mut atoms = Vec::with_capacity(mu.len() + nu.len());
        let mut weights = Vec::with_capacity(mu.len() + nu.len());
        for (a, &w) in mu.atoms.iter().zip(&mu.weights) {
            if lambda > 0.0 {
                atoms.push(a.clone());
                weights.push(lambda * w);
            }
        }
        for (a, &w) in nu.atoms.iter().zip(&nu.weights) {
            if lambda < 1.0 {
                atoms.push(a.clone());
                weights.push((1.0 - lambda) * w);
            }
        }
        Self::new(atoms, weights)
    }
}

/// A coupling of two supported measures: a nonnegative flow matrix whose row
/// sums reproduce the source weights and column sums the target weights.
#[derive(Clone, Debug)]
pub struct TransportPlan {
    source: SupportedMeasure,
    target: SupportedMeasure,
    flow: DMatrix<f64>,
}

impl TransportPlan {
    pub fn source(&self) -> &SupportedMeasure {
        &self.source
    }

    pub fn target(&self) -> &SupportedMeasure {
        &self.target
    }

    pub fn flow(&self) -> &DMatrix<f64> {
        &self.flow
    }

    /// Largest deviation of any row/column sum from its marginal weight.
    pub fn max_marginal_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, &w) in self.source.weights().iter().enumerate() {
            worst = worst.max((self.flow.row(i).sum() - w).abs());
        }
        for (j, &w) in self.target.weights().iter().enumerate() {
            worst = worst.max((self.flow.column(j).sum() - w).abs());
        }
        worst
    }

    /// Total cost of the plan under a ground cost function.
    pub fn total_cost(
        &self,
        cost: impl Fn(&PDMatrix, &PDMatrix) -> Result<f64>,
    ) -> Result<f64> {
        let mut total = 0.0;
        for (i, x) in self.source.atoms().iter().enumerate() {
            for (j, y) in self.target.atoms().iter().enumerate() {
                let f = self.flow[(i, j)];
                if f > 0.0 {
                    total += f * cost(x, y)?;
                }
            }
        }
        Ok(total)
    }
}

fn check_dims(mu: &SupportedMeasure, nu: &SupportedMeasure) -> Result<()> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            left: mu.dim(),
            right: nu.dim(),
        });
    }
    Ok(())
}

fn cost_matrix(
    mu: &SupportedMeasure,
    nu: &SupportedMeasure,
    cost: &impl Fn(&PDMatrix, &PDMatrix) -> Result<f64>,
) -> Result<DMatrix<f64>> {
    let mut matrix = DMatrix::zeros(mu.len(), nu.len());
    for (i, x) in mu.atoms().iter().enumerate() {
        for (j, y) in nu.atoms().iter().enumerate() {
            matrix[(i, j)] = cost(x, y)?;
        }
    }
    Ok(matrix)
}

/// Exact Wasserstein-1 distance under the Thompson ground metric, with the
/// optimal coupling attaining it.
pub fn wasserstein_w1(
    mu: &SupportedMeasure,
    nu: &SupportedMeasure,
) -> Result<(f64, TransportPlan)> {
    wasserstein_w1_by(mu, nu, |x, y| Ok(thompson_distance(x, y)?.value()))
}

/// Exact Wasserstein-1 distance under an arbitrary ground cost.
pub fn wasserstein_w1_by(
    mu: &SupportedMeasure,
    nu: &SupportedMeasure,
    cost: impl Fn(&PDMatrix, &PDMatrix) -> Result<f64>,
) -> Result<(f64, TransportPlan)> {
    check_dims(mu, nu)?;
    let costs = cost_matrix(mu, nu, &cost)?;
    let (value, flow) = transport::min_cost_transport(mu.weights(), nu.weights(), &costs)?;
    Ok((
        value,
        TransportPlan {
            source: mu.clone(),
            target: nu.clone(),
            flow,
        },
    ))
}

fn check_uniform_pair(mu: &SupportedMeasure, nu: &SupportedMeasure) -> Result<()> {
    check_dims(mu, nu)?;
    if mu.len() != nu.len() {
        return Err(Error::SupportSizeMismatch {
            left: mu.len(),
            right: nu.len(),
        });
    }
    if !mu.is_uniform() || !nu.is_uniform() {
        return Err(Error::NonUniformMeasure);
    }
    Ok(())
}

/// Bottleneck matching distance `min_σ max_j d(x_j, y_{σ(j)})` between
/// uniform measures of equal support size.
pub fn wasserstein_minmax(mu: &SupportedMeasure, nu: &SupportedMeasure) -> Result<f64> {
    check_uniform_pair(mu, nu)?;
    let costs = cost_matrix(mu, nu, &|x, y| Ok(thompson_distance(x, y)?.value()))?;
    Ok(transport::bottleneck_assignment(&costs))
}

/// Stochastic order test for uniform measures of equal support size: true
/// iff some perfect matching pairs every atom of `mu` below an atom of `nu`
/// in the Loewner order (at tolerance `tol`).
pub fn stochastic_leq(
    mu: &SupportedMeasure,
    nu: &SupportedMeasure,
    tol: f64,
) -> Result<bool> {
    check_uniform_pair(mu, nu)?;
    let n = mu.len();
    let mut adjacency = vec![vec![false; n]; n];
    for (i, x) in mu.atoms().iter().enumerate() {
        for (j, y) in nu.atoms().iter().enumerate() {
            adjacency[i][j] = loewner_leq(x.hermitian(), y.hermitian(), tol)?;
        }
    }
    Ok(transport::has_perfect_matching(n, |i, j| adjacency[i][j]))
}

/// First-fit greedy ε-net discretization of a sample cloud.
///
/// Scanning the sample in input order, each point joins the first cell whose
/// representative (the cell's first point) is within `eps` in the Thompson
/// metric, otherwise it opens a new cell. The result puts `count/n` mass on
/// each representative; transporting every point to its representative moves
/// it less than `eps`, so the uniform measure on the sample is within `2ε`
/// of the result in Wasserstein-1 distance (with `ε` to spare for the mass
/// the cell budget may push onto `base`).
pub fn empirical_approximation(
    sample: &[PDMatrix],
    eps: f64,
    base: &PDMatrix,
) -> Result<SupportedMeasure> {
    empirical_approximation_capped(sample, eps, base, DEFAULT_MAX_CELLS)
}

/// [`empirical_approximation`] with an explicit cell budget: once `max_cells`
/// cells exist, points that fit no cell contribute their mass to `base`.
pub fn empirical_approximation_capped(
    sample: &[PDMatrix],
    eps: f64,
    base: &PDMatrix,
    max_cells: usize,
) -> Result<SupportedMeasure> {
    discretize(sample, base, max_cells, |point, rep| {
        Ok(thompson_distance(point, rep)?.value() < eps)
    })
}

/// ε-net discretization with cells small in both the Thompson metric and the
/// operator-norm metric, so the `2ε` transport bound holds for the
/// Wasserstein distances over both ground metrics.
pub fn empirical_approximation_two_metric(
    sample: &[PDMatrix],
    eps: f64,
    base: &PDMatrix,
) -> Result<SupportedMeasure> {
    discretize(sample, base, DEFAULT_MAX_CELLS, |point, rep| {
        Ok(thompson_distance(point, rep)?.value() < eps
            && norm_distance(point.hermitian(), rep.hermitian())? < eps)
    })
}

fn discretize(
    sample: &[PDMatrix],
    base: &PDMatrix,
    max_cells: usize,
    fits: impl Fn(&PDMatrix, &PDMatrix) -> Result<bool>,
) -> Result<SupportedMeasure> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let dim = sample[0].dim();
    for point in &sample[1..] {
        if point.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: point.dim(),
            });
        }
    }
    if base.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: base.dim(),
        });
    }

    let mut rep_indices: Vec<usize> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut leftover = 0usize;
    'points: for (idx, point) in sample.iter().enumerate() {
        for (cell, &rep) in rep_indices.iter().enumerate() {
            if fits(point, &sample[rep])? {
                counts[cell] += 1;
                continue 'points;
            }
        }
        if rep_indices.len() < max_cells {
            rep_indices.push(idx);
            counts.push(1);
        } else {
            leftover += 1;
        }
    }

    let n = sample.len() as f64;
    let mut atoms: Vec<PDMatrix> = rep_indices.iter().map(|&i| sample[i].clone()).collect();
    let mut weights: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    if leftover > 0 {
        atoms.push(base.clone());
        weights.push(leftover as f64 / n);
    }
    SupportedMeasure::new(atoms, weights)
}

// ---------------------------------------------------------------------------
// JSON encoding: {"atoms": [<matrix>...], "weights": [w...]}. Weights are
// re-normalized on read when they sum within 1e-9 of 1, rejected otherwise.
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct MeasureJsonRef<'a> {
    atoms: &'a [PDMatrix],
    weights: &'a [f64],
}

#[derive(Deserialize)]
struct MeasureJson {
    atoms: Vec<PDMatrix>,
    weights: Vec<f64>,
}

impl Serialize for SupportedMeasure {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MeasureJsonRef {
            atoms: &self.atoms,
            weights: &self.weights,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SupportedMeasure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let json = MeasureJson::deserialize(deserializer)?;
        SupportedMeasure::new(json.atoms, json.weights).map_err(D::Error::custom)
    }
}
