//! Discrete mixing measures, exact Wasserstein distances between them, and
//! multi-index moment vectors.

use crate::textfmt::fmt_sig;
use crate::transport::min_cost_transport;
use thiserror::Error;

/// Sup-norm tolerance below which two atoms are considered identical and
/// merged at construction.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

/// Tolerance on `|sum(weights) - 1|`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("atoms and weights must be nonempty")]
    EmptyInput,
    #[error("got {n_atoms} atoms but {n_weights} weights")]
    LengthMismatch { n_atoms: usize, n_weights: usize },
    #[error("weight {weight} at index {index} is not strictly positive")]
    NonPositiveWeight { index: usize, weight: f64 },
    #[error("weights sum to {sum}, not 1")]
    WeightSumNotOne { sum: f64 },
    #[error("atom {index} lies outside the parameter domain")]
    AtomOutsideDomain { index: usize },
    #[error("measures have dimensions {left} and {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("Wasserstein order must be >= 1, got {ell}")]
    OrderBelowOne { ell: f64 },
    #[error("scale factor must be nonzero")]
    ZeroScale,
    #[error("domain bound lower[{index}] >= upper[{index}]")]
    EmptyDomainBox { index: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A compact box `[lower, upper]` in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParamDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, MeasureError> {
        if lower.is_empty() {
            return Err(MeasureError::EmptyInput);
        }
        if lower.len() != upper.len() {
            return Err(MeasureError::LengthMismatch {
                n_atoms: lower.len(),
                n_weights: upper.len(),
            });
        }
        for (j, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo < hi) {
                return Err(MeasureError::EmptyDomainBox { index: j });
            }
        }
        Ok(ParamDomain { lower, upper })
    }

    /// Scalar interval domain.
    pub fn interval(lo: f64, hi: f64) -> Result<Self, MeasureError> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&t, (&lo, &hi))| t >= lo && t <= hi)
    }

    pub fn clamp(&self, theta: &mut [f64]) {
        for (t, (&lo, &hi)) in theta.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *t = t.clamp(lo, hi);
        }
    }

    /// Euclidean diameter of the box.
    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt()
    }
}

/// A multi-index `α ∈ N^q` with the usual graded order `|α| = Σ α_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    exponents: Vec<usize>,
}

impl MultiIndex {
    pub fn new(exponents: Vec<usize>) -> Self {
        MultiIndex { exponents }
    }

    pub fn exponents(&self) -> &[usize] {
        &self.exponents
    }

    pub fn order(&self) -> usize {
        self.exponents.iter().sum()
    }

    /// `(θ - θ0)^α` as a product over coordinates.
    pub fn eval(&self, theta: &[f64], theta0: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(theta.iter().zip(theta0))
            .map(|(&e, (&t, &t0))| (t - t0).powi(e as i32))
            .product()
    }
}

/// All multi-indices with `|α| <= order` in graded lexicographic order.
/// There are `C(q + order, q)` of them.
pub fn enumerate_multi_indices(q: usize, order: usize) -> Vec<MultiIndex> {
    assert!(q >= 1);
    let mut out = Vec::new();
    for deg in 0..=order {
        let mut current = vec![0usize; q];
        fill_degree(q, deg, 0, &mut current, &mut out);
    }
    out
}

fn fill_degree(q: usize, remaining: usize, pos: usize, current: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if pos == q - 1 {
        current[pos] = remaining;
        out.push(MultiIndex::new(current.clone()));
        return;
    }
    // lexicographic: larger leading exponents first
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill_degree(q, remaining - e, pos + 1, current, out);
    }
    current[pos] = 0;
}

/// A finite discrete mixing measure `G = Σ p_i δ_{θ_i}`.
///
/// Immutable after construction. Atoms closer than [`ATOM_MERGE_TOL`] in
/// sup-norm are merged with their weights summed.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMeasure {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
    dim: usize,
}

impl MixingMeasure {
    pub fn new(
        atoms: Vec<Vec<f64>>,
        weights: Vec<f64>,
        domain: Option<&ParamDomain>,
    ) -> Result<Self, MeasureError> {
        if atoms.is_empty() || weights.is_empty() {
            return Err(MeasureError::EmptyInput);
        }
        if atoms.len() != weights.len() {
            return Err(MeasureError::LengthMismatch {
                n_atoms: atoms.len(),
                n_weights: weights.len(),
            });
        }
        let dim = atoms[0].len();
        if dim == 0 {
            return Err(MeasureError::EmptyInput);
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.len() != dim {
                return Err(MeasureError::DimensionMismatch {
                    left: dim,
                    right: a.len(),
                });
            }
            if let Some(d) = domain {
                if !d.contains(a) {
                    return Err(MeasureError::AtomOutsideDomain { index: i });
                }
            }
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > ATOM_MERGE_TOL) {
                return Err(MeasureError::NonPositiveWeight { index: i, weight: w });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(MeasureError::WeightSumNotOne { sum });
        }

        // merge near-identical atoms
        let mut merged_atoms: Vec<Vec<f64>> = Vec::with_capacity(atoms.len());
        let mut merged_weights: Vec<f64> = Vec::with_capacity(weights.len());
        for (a, &w) in atoms.iter().zip(&weights) {
            if let Some(pos) = merged_atoms.iter().position(|b| sup_dist(a, b) < ATOM_MERGE_TOL) {
                merged_weights[pos] += w;
            } else {
                merged_atoms.push(a.clone());
                merged_weights.push(w);
            }
        }
        Ok(MixingMeasure {
            atoms: merged_atoms,
            weights: merged_weights,
            dim,
        })
    }

    /// Point mass at `theta`.
    pub fn dirac(theta: Vec<f64>) -> Self {
        assert!(!theta.is_empty());
        let dim = theta.len();
        MixingMeasure {
            atoms: vec![theta],
            weights: vec![1.0],
            dim,
        }
    }

    // Optimizer-internal constructor: keeps the atom count fixed (no merge)
    // and skips domain checks. Weights must already be valid.
    pub(crate) fn from_parts(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Self {
        debug_assert!(!atoms.is_empty() && atoms.len() == weights.len());
        let dim = atoms[0].len();
        MixingMeasure { atoms, weights, dim }
    }

    pub fn k(&self) -> usize {
        self.atoms.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i]
    }

    /// Moments `m_α(G - θ0) = Σ_i p_i (θ_i - θ0)^α` for all `1 <= |α| <= order`,
    /// keyed in graded lexicographic order.
    pub fn moment_vector(&self, order: usize, theta0: &[f64]) -> Vec<(MultiIndex, f64)> {
        assert!(order >= 1);
        assert_eq!(theta0.len(), self.dim);
        enumerate_multi_indices(self.dim, order)
            .into_iter()
            .filter(|alpha| alpha.order() >= 1)
            .map(|alpha| {
                let m = self
                    .atoms
                    .iter()
                    .zip(&self.weights)
                    .map(|(a, &w)| w * alpha.eval(a, theta0))
                    .sum();
                (alpha, m)
            })
            .collect()
    }

    /// Scalar moments `m_j(G - θ0)` for `j = 1..=order` (requires `q = 1`).
    pub fn scalar_moments(&self, order: usize, theta0: f64) -> Vec<f64> {
        assert_eq!(self.dim, 1, "scalar moments require a univariate measure");
        (1..=order)
            .map(|j| {
                self.atoms
                    .iter()
                    .zip(&self.weights)
                    .map(|(a, &w)| w * (a[0] - theta0).powi(j as i32))
                    .sum()
            })
            .collect()
    }

    /// `S_ε(G - θ)`: atoms mapped to `ε (θ_i - θ)`, weights unchanged.
    pub fn shift_scale(&self, theta: &[f64], eps: f64) -> Result<Self, MeasureError> {
        if eps == 0.0 {
            return Err(MeasureError::ZeroScale);
        }
        if theta.len() != self.dim {
            return Err(MeasureError::DimensionMismatch {
                left: self.dim,
                right: theta.len(),
            });
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| a.iter().zip(theta).map(|(&x, &t)| eps * (x - t)).collect())
            .collect();
        Ok(MixingMeasure {
            atoms,
            weights: self.weights.clone(),
            dim: self.dim,
        })
    }

    /// Plain-text serialization: one `p theta_1 ... theta_q` line per atom.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            out.push_str(&fmt_sig(w));
            for &x in a {
                out.push(' ');
                out.push_str(&fmt_sig(x));
            }
            out.push('\n');
        }
        out
    }

    /// Parse the plain-text format; `#`-prefixed and blank lines are skipped.
    pub fn from_text(text: &str) -> Result<Self, MeasureError> {
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut nums = Vec::new();
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| MeasureError::Parse {
                    line: lineno + 1,
                    message: format!("bad number `{tok}`"),
                })?;
                nums.push(v);
            }
            if nums.len() < 2 {
                return Err(MeasureError::Parse {
                    line: lineno + 1,
                    message: "expected `p theta_1 ... theta_q`".to_string(),
                });
            }
            weights.push(nums[0]);
            atoms.push(nums[1..].to_vec());
        }
        MixingMeasure::new(atoms, weights, None)
    }
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Wasserstein-ℓ distance `W_ℓ(G, H)` with Euclidean ground metric, solved
/// as an exact transportation linear program.
pub fn wasserstein(g: &MixingMeasure, h: &MixingMeasure, ell: f64) -> Result<f64, MeasureError> {
    if g.dim() != h.dim() {
        return Err(MeasureError::DimensionMismatch {
            left: g.dim(),
            right: h.dim(),
        });
    }
    if !(ell >= 1.0) {
        return Err(MeasureError::OrderBelowOne { ell });
    }
    let (m, n) = (g.k(), h.k());
    let mut cost = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            cost[i * n + j] = euclid(g.atom(i), h.atom(j)).powf(ell);
        }
    }
    let total = min_cost_transport(&cost, m, n, g.weights(), h.weights());
    Ok(total.max(0.0).powf(1.0 / ell))
}
