//! Selecting the number of mixture components: the smallest order whose
//! fitted objective falls below a threshold shrinking like sqrt(ln n / n).

use crate::family::KernelFamily;
use crate::fit::{fit_all_orders, local_search, FitError, FitResult, OptimizerOptions};
use crate::measure::{MeasureError, MixingMeasure, ParamDomain};
use crate::objective::{mmd_gram, ObjectiveError, PhiSpec};
use crate::family::DataSet;
use thiserror::Error;

/// Grid size for the population KS sup in [`separation_gap`].
const POPULATION_GRID: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrderError {
    #[error("order selection requires n >= 2, got {n}")]
    NTooSmall { n: usize },
    #[error("threshold constant must be > 0, got {c1}")]
    BadThresholdConstant { c1: f64 },
    #[error("no fits supplied")]
    EmptyFitList,
    #[error("separation gap requires at least 2 atoms")]
    KTooSmall,
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Outcome of order selection over orders `1..=k_max`.
#[derive(Debug, Clone)]
pub struct OrderResult {
    /// Selected order; when `undetermined` is set this is the fallback
    /// `k_max` rather than a threshold crossing.
    pub k_hat: usize,
    /// The threshold `a_n` the objectives were compared against.
    pub threshold: f64,
    /// Fitted objective for each order, index 0 holding order 1.
    pub objectives: Vec<f64>,
    /// True when no order crossed the threshold (the infimum over the empty
    /// set); `k_hat` then falls back to the largest order tried.
    pub undetermined: bool,
    /// The fit at `k_hat`.
    pub plug_in: FitResult,
}

/// Default threshold constant `c₁` for each objective: KS uses sqrt(3)/2,
/// MMD twice the kernel sup-norm, and the moment objective 1 (the theory
/// only pins it up to an unexhibited concentration constant).
pub fn default_c1(phi: &PhiSpec) -> f64 {
    match phi {
        PhiSpec::Ks => 3.0f64.sqrt() / 2.0,
        PhiSpec::Mmd(rkhs) => 2.0 * rkhs.sup_norm(),
        PhiSpec::Moments { .. } => 1.0,
    }
}

/// Threshold `a_n = c₁ sqrt(ln n / n)`; `c1 = None` uses [`default_c1`].
pub fn default_threshold(phi: &PhiSpec, n: usize, c1: Option<f64>) -> Result<f64, OrderError> {
    if n < 2 {
        return Err(OrderError::NTooSmall { n });
    }
    let c1 = c1.unwrap_or_else(|| default_c1(phi));
    if !(c1 > 0.0) {
        return Err(OrderError::BadThresholdConstant { c1 });
    }
    Ok(c1 * ((n as f64).ln() / n as f64).sqrt())
}

/// Smallest order whose objective is at most `a_n`; `None` when every
/// objective stays above the threshold.
pub fn estimate_order(objectives: &[f64], a_n: f64) -> Result<Option<usize>, OrderError> {
    if objectives.is_empty() {
        return Err(OrderError::EmptyFitList);
    }
    Ok(objectives.iter().position(|&v| v <= a_n).map(|i| i + 1))
}

/// Fit all orders up to `k_max`, select the order with [`estimate_order`],
/// and return the plug-in fit. An undetermined selection falls back to
/// `k_max` with the flag set so pipelines can proceed.
pub fn plug_in(
    fam: &KernelFamily,
    phi: &PhiSpec,
    data: &DataSet,
    k_max: usize,
    domain: Option<&ParamDomain>,
    options: &OptimizerOptions,
    c1: Option<f64>,
) -> Result<OrderResult, OrderError> {
    let a_n = default_threshold(phi, data.len(), c1)?;
    let fits = fit_all_orders(fam, phi, data, k_max, domain, options)?;
    let objectives: Vec<f64> = fits.iter().map(|f| f.objective).collect();
    let (k_hat, undetermined) = match estimate_order(&objectives, a_n)? {
        Some(k) => (k, false),
        None => (k_max, true),
    };
    let plug = fits.into_iter().nth(k_hat - 1).expect("k_hat <= k_max");
    Ok(OrderResult {
        k_hat,
        threshold: a_n,
        objectives,
        undetermined,
        plug_in: plug,
    })
}

// Standard deviation of the component at mean theta, for sizing the
// population grid.
fn component_sd(fam: &KernelFamily, theta: f64) -> f64 {
    match *fam {
        KernelFamily::GaussianLocation { sigma, .. } => sigma,
        KernelFamily::Poisson => theta.max(0.0).sqrt(),
        KernelFamily::Gamma { shape } => theta.abs() / shape.sqrt(),
        KernelFamily::Binomial { trials } => {
            let m = trials as f64;
            let p = (theta / m).clamp(0.0, 1.0);
            (m * p * (1.0 - p)).sqrt()
        }
        KernelFamily::NegativeBinomial { r } => (theta.max(0.0) * (1.0 + theta.max(0.0) / r)).sqrt(),
    }
}

// Population objective sup_phi |G' phi - G phi| against the reference
// measure, without any data.
fn population_objective(
    fam: &KernelFamily,
    phi: &PhiSpec,
    candidate: &MixingMeasure,
    reference: &MixingMeasure,
    grid: &[f64],
) -> f64 {
    match phi {
        PhiSpec::Ks => {
            let mut sup: f64 = 0.0;
            for &x in grid {
                let fc: f64 = candidate
                    .atoms()
                    .iter()
                    .zip(candidate.weights())
                    .map(|(a, &w)| w * fam.cdf1(x, a[0]))
                    .sum();
                let fr: f64 = reference
                    .atoms()
                    .iter()
                    .zip(reference.weights())
                    .map(|(a, &w)| w * fam.cdf1(x, a[0]))
                    .sum();
                sup = sup.max((fc - fr).abs());
            }
            sup
        }
        PhiSpec::Mmd(rkhs) => {
            // exact quadratic form <G'-G, G'-G> in kernel-mean space over
            // the signed atom list
            let signed: Vec<(&[f64], f64)> = candidate
                .atoms()
                .iter()
                .zip(candidate.weights())
                .map(|(a, &w)| (a.as_slice(), w))
                .chain(
                    reference
                        .atoms()
                        .iter()
                        .zip(reference.weights())
                        .map(|(a, &w)| (a.as_slice(), -w)),
                )
                .collect();
            let mut quad = 0.0;
            for &(ai, wi) in &signed {
                for &(aj, wj) in &signed {
                    let k = mmd_gram(fam, rkhs, ai, aj).unwrap_or(f64::INFINITY);
                    quad += wi * wj * k;
                }
            }
            quad.max(0.0).sqrt()
        }
        PhiSpec::Moments { order, theta0 } => {
            let mc = candidate.scalar_moments(*order, *theta0);
            let mr = reference.scalar_moments(*order, *theta0);
            mc.iter()
                .zip(&mr)
                .map(|(&a, &b)| (a - b).abs())
                .fold(0.0, f64::max)
        }
    }
}

/// Numerical stand-in for the separation constant `b_G`: the minimum
/// population objective over measures with one atom fewer than `g`.
/// KS takes its sup over a 2048-point grid spanning the observation range
/// induced by the atoms, padded by six component standard deviations.
pub fn separation_gap(
    fam: &KernelFamily,
    phi: &PhiSpec,
    g: &MixingMeasure,
    domain: Option<&ParamDomain>,
    options: &OptimizerOptions,
) -> Result<f64, OrderError> {
    if g.k() < 2 {
        return Err(OrderError::KTooSmall);
    }
    if g.dim() != 1 || fam.obs_dim() != 1 {
        return Err(OrderError::Objective(ObjectiveError::IncompatiblePhiFamily(
            "separation gap is computed for univariate families".to_string(),
        )));
    }
    // observation grid induced by the atoms
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for a in g.atoms() {
        let sd = component_sd(fam, a[0]).max(1e-6);
        lo = lo.min(a[0] - 6.0 * sd);
        hi = hi.max(a[0] + 6.0 * sd);
    }
    let grid: Vec<f64> = (0..POPULATION_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / (POPULATION_GRID - 1) as f64)
        .collect();

    // atom search box: atom range padded, clipped to the domain
    let (mlo, mhi) = fam.mean_domain();
    let amin = g.atoms().iter().map(|a| a[0]).fold(f64::INFINITY, f64::min);
    let amax = g.atoms().iter().map(|a| a[0]).fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.5 * (amax - amin).max(1.0);
    let mut blo = amin - pad;
    let mut bhi = amax + pad;
    if mlo.is_finite() {
        blo = blo.max(mlo + 1e-6);
    }
    if mhi.is_finite() {
        bhi = bhi.min(mhi - 1e-6);
    }
    if let Some(d) = domain {
        blo = blo.max(d.lower()[0]);
        bhi = bhi.min(d.upper()[0]);
    }

    let pop = |cand: &MixingMeasure| population_objective(fam, phi, cand, g, &grid);

    // multistart: one atom dropped with weight renormalized, plus merges of
    // adjacent atoms
    let mut best = f64::INFINITY;
    let mut starts: Vec<MixingMeasure> = Vec::new();
    for drop in 0..g.k() {
        let mut atoms = Vec::new();
        let mut weights = Vec::new();
        for (i, (a, &w)) in g.atoms().iter().zip(g.weights()).enumerate() {
            if i != drop {
                atoms.push(a.clone());
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        starts.push(MixingMeasure::from_parts(atoms, weights));
    }
    for init in &starts {
        let res = local_search(&pop, init, &[blo], &[bhi], options)?;
        best = best.min(res.objective);
    }
    Ok(best.max(0.0))
}
