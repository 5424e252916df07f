//! Minimum-distance fitting of a k-atom mixing measure by Nelder-Mead
//! search over an unconstrained reparameterization.
//!
//! Atom coordinates live in a box (the parameter domain intersected with
//! the family's mean domain) through a logistic map, and weights come from
//! a softmax with the last logit pinned at zero. Multiple restarts guard
//! against local minima: the first start places atoms at data quantiles,
//! the rest are random.

use crate::family::{DataSet, FamilyError, KernelFamily};
use crate::measure::{MeasureError, MixingMeasure, ParamDomain};
use crate::objective::{check_compatibility, phi_objective, ObjectiveError, PhiCache, PhiSpec};
use crate::rng::RandomStream;
use thiserror::Error;

/// Logits are clamped to this magnitude; beyond it the logistic map is
/// saturated to machine precision anyway.
const LOGIT_CLAMP: f64 = 12.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("number of atoms must be at least 1")]
    OrderZero,
    #[error("moment objective of order {got} cannot identify a {k}-atom measure; use order {expected}")]
    MomentOrderMismatch { k: usize, got: usize, expected: usize },
    #[error("optimizer options invalid: {0}")]
    BadOptions(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Budget and tolerances for the Nelder-Mead search.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOptions {
    /// Local searches per fit; the first uses the quantile start.
    pub restarts: usize,
    /// Iteration cap per local search.
    pub max_iterations: usize,
    /// Stop when the simplex objective spread falls below this.
    pub objective_tol: f64,
    /// Stop when the simplex coordinate spread falls below this.
    pub simplex_tol: f64,
    /// Seed for the random restarts.
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            restarts: 8,
            max_iterations: 2000,
            objective_tol: 1e-9,
            simplex_tol: 1e-10,
            seed: 0,
        }
    }
}

impl OptimizerOptions {
    fn validate(&self) -> Result<(), FitError> {
        if self.restarts == 0 {
            return Err(FitError::BadOptions("restarts must be >= 1".to_string()));
        }
        if self.max_iterations == 0 {
            return Err(FitError::BadOptions("max_iterations must be >= 1".to_string()));
        }
        if !(self.objective_tol > 0.0) || !(self.simplex_tol > 0.0) {
            return Err(FitError::BadOptions("tolerances must be > 0".to_string()));
        }
        Ok(())
    }
}

/// Outcome of one fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub measure: MixingMeasure,
    /// Objective value of `measure`.
    pub objective: f64,
    /// Total objective evaluations across restarts.
    pub evaluations: u64,
    /// True when at least one local search met its tolerances before the
    /// iteration cap.
    pub converged: bool,
    /// Index of the start that produced the returned measure (0 is the
    /// quantile start, then random starts, then warm starts).
    pub start_index: usize,
}

// Search box for atom coordinates: the data range padded by a quarter of
// its width plus one noise scale, intersected with the family mean domain
// (kept strictly interior) and the user domain when given.
fn effective_box(
    fam: &KernelFamily,
    data: &DataSet,
    domain: Option<&ParamDomain>,
) -> Result<(Vec<f64>, Vec<f64>), FitError> {
    let q = fam.obs_dim();
    let (mlo, mhi) = fam.mean_domain();
    let mut lo = vec![0.0; q];
    let mut hi = vec![0.0; q];
    for c in 0..q {
        let mut dlo = f64::INFINITY;
        let mut dhi = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for row in data.rows() {
            dlo = dlo.min(row[c]);
            dhi = dhi.max(row[c]);
            sum += row[c];
        }
        let mean = sum / data.len() as f64;
        let noise = match *fam {
            KernelFamily::GaussianLocation { sigma, .. } => sigma,
            // variance functions evaluated at the sample mean
            KernelFamily::Poisson => mean.abs().sqrt(),
            KernelFamily::Gamma { shape } => mean.abs() / shape.sqrt(),
            KernelFamily::Binomial { trials } => {
                let m = trials as f64;
                let p = (mean / m).clamp(0.01, 0.99);
                (m * p * (1.0 - p)).sqrt()
            }
            KernelFamily::NegativeBinomial { r } => {
                (mean.abs() * (1.0 + mean.abs() / r)).sqrt()
            }
        };
        let pad = 0.25 * (dhi - dlo) + noise.max(1e-3);
        lo[c] = dlo - pad;
        hi[c] = dhi + pad;
        // keep strictly inside the open mean domain
        let margin = 1e-6 * (1.0 + lo[c].abs().max(hi[c].abs()));
        if mlo.is_finite() {
            lo[c] = lo[c].max(mlo + margin);
        }
        if mhi.is_finite() {
            hi[c] = hi[c].min(mhi - margin);
        }
        if let Some(d) = domain {
            if d.dim() != q {
                return Err(FitError::Measure(MeasureError::DimensionMismatch {
                    left: d.dim(),
                    right: q,
                }));
            }
            lo[c] = lo[c].max(d.lower()[c]);
            hi[c] = hi[c].min(d.upper()[c]);
        }
        if !(lo[c] < hi[c]) {
            // degenerate intersection: fall back to a thin slab at the center
            let mid = 0.5 * (lo[c] + hi[c]);
            lo[c] = mid - 1e-6;
            hi[c] = mid + 1e-6;
        }
    }
    Ok((lo, hi))
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[inline]
fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

struct Codec {
    k: usize,
    q: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Codec {
    fn n_params(&self) -> usize {
        self.k * self.q + self.k - 1
    }

    fn decode(&self, x: &[f64]) -> MixingMeasure {
        let mut atoms = Vec::with_capacity(self.k);
        for i in 0..self.k {
            let mut atom = Vec::with_capacity(self.q);
            for c in 0..self.q {
                let z = x[i * self.q + c].clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
                atom.push(self.lo[c] + (self.hi[c] - self.lo[c]) * sigmoid(z));
            }
            atoms.push(atom);
        }
        // softmax weights, last logit pinned at 0
        let base = self.k * self.q;
        let mut w = Vec::with_capacity(self.k);
        let mut total = 0.0;
        for i in 0..self.k {
            let z = if i + 1 < self.k {
                x[base + i].clamp(-LOGIT_CLAMP, LOGIT_CLAMP)
            } else {
                0.0
            };
            let e = z.exp();
            w.push(e);
            total += e;
        }
        for wi in w.iter_mut() {
            *wi /= total;
        }
        MixingMeasure::from_parts(atoms, w)
    }

    fn encode(&self, g: &MixingMeasure) -> Vec<f64> {
        let mut x = vec![0.0; self.n_params()];
        for (i, a) in g.atoms().iter().enumerate() {
            for c in 0..self.q {
                let u = ((a[c] - self.lo[c]) / (self.hi[c] - self.lo[c])).clamp(1e-9, 1.0 - 1e-9);
                x[i * self.q + c] = logit(u).clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
            }
        }
        let base = self.k * self.q;
        let wk = g.weights()[self.k - 1].max(1e-12);
        for i in 0..self.k - 1 {
            x[base + i] = (g.weights()[i].max(1e-12) / wk).ln().clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
        }
        x
    }

    // Quantile start: atom i at the (i + 1/2)/k data quantiles, equal weights.
    fn quantile_start(&self, data: &DataSet) -> Vec<f64> {
        let mut atoms = Vec::with_capacity(self.k);
        let mut cols: Vec<Vec<f64>> = (0..self.q)
            .map(|c| data.rows().map(|r| r[c]).collect())
            .collect();
        for col in cols.iter_mut() {
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
        for i in 0..self.k {
            let frac = (i as f64 + 0.5) / self.k as f64;
            let atom: Vec<f64> = cols
                .iter()
                .enumerate()
                .map(|(c, col)| {
                    let idx = ((frac * col.len() as f64) as usize).min(col.len() - 1);
                    col[idx].clamp(self.lo[c] + 1e-9, self.hi[c] - 1e-9)
                })
                .collect();
            atoms.push(atom);
        }
        let w = vec![1.0 / self.k as f64; self.k];
        self.encode(&MixingMeasure::from_parts(atoms, w))
    }

    fn random_start(&self, rng: &mut RandomStream) -> Vec<f64> {
        let mut x = vec![0.0; self.n_params()];
        for v in x.iter_mut().take(self.k * self.q) {
            *v = rng.uniform_in(-2.5, 2.5);
        }
        for v in x.iter_mut().skip(self.k * self.q) {
            *v = rng.uniform_in(-1.0, 1.0);
        }
        x
    }
}

// Nelder-Mead with the standard 1 / 2 / 0.5 / 0.5 coefficients and a 5%
// initial edge. Returns (best point, best value, iterations, converged).
fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x0: &[f64],
    max_iter: usize,
    f_tol: f64,
    x_tol: f64,
) -> (Vec<f64>, f64, u64, bool) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += 0.05 * p[i].abs().max(1.0);
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut evals = (n + 1) as u64;
    let mut converged = false;

    for _ in 0..max_iter {
        // order best..worst
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let reorder_s: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let reorder_v: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        simplex = reorder_s;
        values = reorder_v;

        let spread = values[n] - values[0];
        let mut diam: f64 = 0.0;
        for p in &simplex[1..] {
            for (a, b) in p.iter().zip(&simplex[0]) {
                diam = diam.max((a - b).abs());
            }
        }
        if spread.abs() < f_tol && diam < x_tol {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for p in &simplex[..n] {
            for (c, &v) in centroid.iter_mut().zip(p) {
                *c += v;
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let worst = simplex[n].clone();
        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&worst)
            .map(|(&c, &w)| c + (c - w))
            .collect();
        let fr = f(&reflect);
        evals += 1;

        if fr < values[0] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&worst)
                .map(|(&c, &w)| c + 2.0 * (c - w))
                .collect();
            let fe = f(&expand);
            evals += 1;
            if fe < fr {
                simplex[n] = expand;
                values[n] = fe;
            } else {
                simplex[n] = reflect;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflect;
            values[n] = fr;
        } else {
            // contract toward the better of worst/reflected
            let (toward, f_toward) = if fr < values[n] { (&reflect, fr) } else { (&worst, values[n]) };
            let contract: Vec<f64> = centroid
                .iter()
                .zip(toward)
                .map(|(&c, &t)| c + 0.5 * (t - c))
                .collect();
            let fc = f(&contract);
            evals += 1;
            if fc < f_toward {
                simplex[n] = contract;
                values[n] = fc;
            } else {
                // shrink toward the best vertex
                for i in 1..=n {
                    let shrunk: Vec<f64> = simplex[0]
                        .iter()
                        .zip(&simplex[i])
                        .map(|(&b, &p)| b + 0.5 * (p - b))
                        .collect();
                    simplex[i] = shrunk;
                    values[i] = f(&simplex[i]);
                    evals += 1;
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex[best].clone(), values[best], evals, converged)
}

/// Moment objective order needed to identify a `k`-atom measure.
pub fn moment_order_for(k: usize) -> usize {
    2 * k - 1
}

/// Fit a `k`-atom mixing measure minimizing the `phi` objective.
pub fn fit(
    fam: &KernelFamily,
    phi: &PhiSpec,
    data: &DataSet,
    k: usize,
    domain: Option<&ParamDomain>,
    options: &OptimizerOptions,
) -> Result<FitResult, FitError> {
    fit_with_starts(fam, phi, data, k, domain, options, &[])
}

/// [`fit`] with additional caller-supplied warm starts (each a `k`-atom
/// measure) searched alongside the default quantile and random starts.
pub fn fit_with_starts(
    fam: &KernelFamily,
    phi: &PhiSpec,
    data: &DataSet,
    k: usize,
    domain: Option<&ParamDomain>,
    options: &OptimizerOptions,
    warm_starts: &[MixingMeasure],
) -> Result<FitResult, FitError> {
    if k == 0 {
        return Err(FitError::OrderZero);
    }
    if data.is_empty() {
        return Err(FitError::Objective(ObjectiveError::EmptyData));
    }
    options.validate()?;
    check_compatibility(phi, fam)?;
    if let PhiSpec::Moments { order, .. } = phi {
        let expected = moment_order_for(k);
        if *order != expected {
            return Err(FitError::MomentOrderMismatch { k, got: *order, expected });
        }
    }
    let (lo, hi) = effective_box(fam, data, domain)?;
    let codec = Codec { k, q: fam.obs_dim(), lo, hi };
    let cache = PhiCache::build(phi, fam, data)?;

    let mut evaluations = 0u64;
    let mut objective = |x: &[f64]| -> f64 {
        let g = codec.decode(x);
        phi_objective(phi, fam, &g, data, Some(&cache)).unwrap_or(f64::INFINITY)
    };

    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(options.restarts + warm_starts.len());
    starts.push(codec.quantile_start(data));
    let mut rng = RandomStream::new(options.seed).substream(0x66697421);
    for _ in 1..options.restarts {
        starts.push(codec.random_start(&mut rng));
    }
    for w in warm_starts {
        if w.dim() == fam.obs_dim() && w.k() == k {
            starts.push(codec.encode(w));
        }
    }

    let mut best_x: Option<Vec<f64>> = None;
    let mut best_f = f64::INFINITY;
    let mut best_start = 0usize;
    let mut any_converged = false;
    for (s, start) in starts.iter().enumerate() {
        let (x, fval, evals, conv) = nelder_mead(
            &mut objective,
            start,
            options.max_iterations,
            options.objective_tol,
            options.simplex_tol,
        );
        evaluations += evals;
        any_converged |= conv;
        if fval < best_f {
            best_f = fval;
            best_x = Some(x);
            best_start = s;
        }
    }

    let raw = codec.decode(&best_x.expect("at least one start"));
    // rebuild through the validating constructor so duplicate atoms merge
    let measure = MixingMeasure::new(raw.atoms().to_vec(), raw.weights().to_vec(), None)?;
    let objective_value = phi_objective(phi, fam, &measure, data, Some(&cache))?;
    Ok(FitResult {
        measure,
        objective: objective_value.min(best_f),
        evaluations,
        converged: any_converged,
        start_index: best_start,
    })
}

/// One Nelder-Mead descent of an arbitrary objective over k-atom measures,
/// starting from `init`. The returned objective never exceeds the value at
/// `init`.
pub fn local_search<F: FnMut(&MixingMeasure) -> f64>(
    mut objective: F,
    init: &MixingMeasure,
    box_lo: &[f64],
    box_hi: &[f64],
    options: &OptimizerOptions,
) -> Result<FitResult, FitError> {
    options.validate()?;
    let codec = Codec {
        k: init.k(),
        q: init.dim(),
        lo: box_lo.to_vec(),
        hi: box_hi.to_vec(),
    };
    let mut f = |x: &[f64]| objective(&codec.decode(x));
    let x0 = codec.encode(init);
    let f0 = f(&x0);
    let (x, fval, evals, conv) = nelder_mead(
        &mut f,
        &x0,
        options.max_iterations,
        options.objective_tol,
        options.simplex_tol,
    );
    let (x, fval) = if fval <= f0 { (x, fval) } else { (x0, f0) };
    let raw = codec.decode(&x);
    let measure = MixingMeasure::new(raw.atoms().to_vec(), raw.weights().to_vec(), None)?;
    Ok(FitResult {
        measure,
        objective: fval,
        evaluations: evals + 1,
        converged: conv,
        start_index: 0,
    })
}

/// The moment objective order tracks k; other objectives are unchanged.
pub fn phi_for_order(phi: &PhiSpec, k: usize) -> PhiSpec {
    match phi {
        PhiSpec::Moments { theta0, .. } => PhiSpec::Moments {
            order: moment_order_for(k),
            theta0: *theta0,
        },
        other => other.clone(),
    }
}

/// Fit every order `k = 1..=k_max`, warm-starting each fit by splitting the
/// heaviest atom of the previous solution. The returned objective sequence
/// is nonincreasing in `k`: a split of the `(k-1)`-atom optimum represents
/// the same measure, so its objective is searched as a candidate.
pub fn fit_all_orders(
    fam: &KernelFamily,
    phi: &PhiSpec,
    data: &DataSet,
    k_max: usize,
    domain: Option<&ParamDomain>,
    options: &OptimizerOptions,
) -> Result<Vec<FitResult>, FitError> {
    if k_max == 0 {
        return Err(FitError::OrderZero);
    }
    let (lo, hi) = effective_box(fam, data, domain)?;
    let mut results: Vec<FitResult> = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let phi_k = phi_for_order(phi, k);
        let warm: Vec<MixingMeasure> = results
            .last()
            .map(|prev| split_heaviest(&prev.measure, k, &lo, &hi))
            .into_iter()
            .flatten()
            .collect();
        let mut res = fit_with_starts(fam, &phi_k, data, k, domain, options, &warm)?;
        if let Some(prev) = results.last() {
            // a k-atom padding of the previous optimum can never be worse;
            // keep the previous measure if numerics say otherwise
            if res.objective > prev.objective {
                let obj = phi_objective(&phi_k, fam, &prev.measure, data, None)?;
                if obj < res.objective {
                    res.measure = prev.measure.clone();
                    res.objective = obj;
                }
            }
        }
        results.push(res);
    }
    Ok(results)
}

// Duplicate the heaviest atom of `g`, split its weight, and nudge the two
// copies apart by 1% of the box width so the optimizer can separate them.
fn split_heaviest(g: &MixingMeasure, k: usize, lo: &[f64], hi: &[f64]) -> Option<MixingMeasure> {
    if g.k() + 1 != k {
        return None;
    }
    let heavy = g
        .weights()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)?;
    let mut atoms = g.atoms().to_vec();
    let mut weights = g.weights().to_vec();
    let mut clone = atoms[heavy].clone();
    for (c, v) in clone.iter_mut().enumerate() {
        let nudge = 0.01 * (hi[c] - lo[c]);
        *v = (*v + nudge).min(hi[c] - 1e-9);
        atoms[heavy][c] = (atoms[heavy][c] - nudge).max(lo[c] + 1e-9);
    }
    let half = weights[heavy] / 2.0;
    weights[heavy] = half;
    atoms.push(clone);
    weights.push(half);
    Some(MixingMeasure::from_parts(atoms, weights))
}
