//! Component distribution families in mean parameterization.
//!
//! Five NEF-QVF families are provided: Gaussian location (with known scale,
//! optionally multivariate as a product of coordinates), Poisson, gamma with
//! fixed shape, binomial with fixed trial count, and negative binomial with
//! fixed dispersion. In each case the free parameter `θ` is the mean of the
//! distribution: gamma uses rate `β = α/θ`, binomial `p = θ/m`, negative
//! binomial `p = r/(r+θ)`.
//!
//! Besides density/CDF/sampling, each univariate family exposes its mean
//! moment polynomials `E_θ[X^i]` and the orthogonal statistics `t_j` with
//! `E_θ t_j(Y|θ0) = (θ-θ0)^j`, the building block of the moment objective.

use crate::measure::MixingMeasure;
use crate::rng::RandomStream;
use crate::special::{ln_gamma, normal_cdf, reg_gamma_lower, reg_gamma_upper};
use thiserror::Error;

pub const MAX_MOMENT_ORDER: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("mean parameter {theta} is outside the family domain")]
    ParameterOutOfDomain { theta: f64 },
    #[error("observation {x} is outside the family support")]
    SupportViolation { x: f64 },
    #[error("operation requires a univariate family")]
    UnsupportedFamily,
    #[error("theta0 = {theta0} is not in the interior of the mean domain")]
    Theta0OutOfDomain { theta0: f64 },
    #[error("orthogonal statistic of order {order} does not exist for this family")]
    UnsupportedOrder { order: usize },
    #[error("data set is empty")]
    EmptyData,
    #[error("sample size must be at least 1")]
    EmptySample,
    #[error("atom {index} of the mixing measure is outside the kernel domain")]
    AtomOutOfKernelDomain { index: usize },
    #[error("observation dimension {got} does not match the family dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("bad family specification: {0}")]
    InvalidSpec(String),
}

/// An i.i.d. data set of `d`-dimensional observations, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    dim: usize,
    values: Vec<f64>,
}

impl DataSet {
    pub fn new(dim: usize, values: Vec<f64>) -> Self {
        assert!(dim >= 1 && values.len() % dim == 0);
        DataSet { dim, values }
    }

    pub fn from_1d(values: Vec<f64>) -> Self {
        DataSet { dim: 1, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    /// The raw values when `d = 1`.
    pub fn as_1d(&self) -> &[f64] {
        assert_eq!(self.dim, 1, "as_1d requires univariate data");
        &self.values
    }

    /// One observation per line, coordinates space-separated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let mut first = true;
            for &x in row {
                if !first {
                    out.push(' ');
                }
                out.push_str(&crate::textfmt::fmt_sig(x));
                first = false;
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, FamilyError> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut row = Vec::new();
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| {
                    FamilyError::InvalidSpec(format!("line {}: bad number `{tok}`", lineno + 1))
                })?;
                row.push(v);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(FamilyError::EmptyData);
        }
        let dim = rows[0].len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(FamilyError::InvalidSpec("ragged data rows".to_string()));
        }
        Ok(DataSet::new(dim, rows.concat()))
    }
}

/// A polynomial with `f64` coefficients, `coeffs[i]` on the `i`-th power.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty());
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// One of the five supported NEF-QVF component families, in mean
/// parameterization with fixed nuisance parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    GaussianLocation { sigma: f64, dim: usize },
    Poisson,
    Gamma { shape: f64 },
    Binomial { trials: u64 },
    NegativeBinomial { r: f64 },
}

impl std::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelFamily::GaussianLocation { sigma, dim } => {
                write!(f, "gaussian(sigma={sigma},d={dim})")
            }
            KernelFamily::Poisson => write!(f, "poisson"),
            KernelFamily::Gamma { shape } => write!(f, "gamma(alpha={shape})"),
            KernelFamily::Binomial { trials } => write!(f, "binomial(m={trials})"),
            KernelFamily::NegativeBinomial { r } => write!(f, "negbinomial(r={r})"),
        }
    }
}

impl KernelFamily {
    pub fn gaussian(sigma: f64) -> Self {
        assert!(sigma > 0.0);
        KernelFamily::GaussianLocation { sigma, dim: 1 }
    }

    /// Observation dimension `d`.
    pub fn obs_dim(&self) -> usize {
        match self {
            KernelFamily::GaussianLocation { dim, .. } => *dim,
            _ => 1,
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            KernelFamily::Poisson | KernelFamily::Binomial { .. } | KernelFamily::NegativeBinomial { .. }
        )
    }

    /// Open interval of admissible mean parameters (per coordinate).
    pub fn mean_domain(&self) -> (f64, f64) {
        match self {
            KernelFamily::GaussianLocation { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            KernelFamily::Poisson | KernelFamily::Gamma { .. } | KernelFamily::NegativeBinomial { .. } => {
                (0.0, f64::INFINITY)
            }
            KernelFamily::Binomial { trials } => (0.0, *trials as f64),
        }
    }

    fn check_theta1(&self, theta: f64) -> Result<(), FamilyError> {
        let (lo, hi) = self.mean_domain();
        if theta > lo && theta < hi && theta.is_finite() {
            Ok(())
        } else {
            Err(FamilyError::ParameterOutOfDomain { theta })
        }
    }

    fn check_theta(&self, theta: &[f64]) -> Result<(), FamilyError> {
        if theta.len() != self.obs_dim() {
            return Err(FamilyError::DimensionMismatch {
                got: theta.len(),
                want: self.obs_dim(),
            });
        }
        for &t in theta {
            self.check_theta1(t)?;
        }
        Ok(())
    }

    /// Check every atom of `g` against the mean domain.
    pub fn check_measure(&self, g: &MixingMeasure) -> Result<(), FamilyError> {
        for (i, a) in g.atoms().iter().enumerate() {
            if self.check_theta(a).is_err() {
                return Err(FamilyError::AtomOutOfKernelDomain { index: i });
            }
        }
        Ok(())
    }

    /// Probability density (or mass) `p(x | θ)`.
    pub fn density(&self, x: &[f64], theta: &[f64]) -> Result<f64, FamilyError> {
        self.check_theta(theta)?;
        if x.len() != self.obs_dim() {
            return Err(FamilyError::DimensionMismatch {
                got: x.len(),
                want: self.obs_dim(),
            });
        }
        match self {
            KernelFamily::GaussianLocation { sigma, .. } => {
                let mut p = 1.0;
                for (&xi, &ti) in x.iter().zip(theta) {
                    let z = (xi - ti) / sigma;
                    p *= (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
                }
                Ok(p)
            }
            _ => self.pmf_or_pdf1(x[0], theta[0]),
        }
    }

    fn pmf_or_pdf1(&self, x: f64, theta: f64) -> Result<f64, FamilyError> {
        match *self {
            KernelFamily::GaussianLocation { sigma, .. } => {
                let z = (x - theta) / sigma;
                Ok((-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt()))
            }
            KernelFamily::Poisson => {
                let k = check_count(x, None)?;
                Ok((-theta + k as f64 * theta.ln() - ln_gamma(k as f64 + 1.0)).exp())
            }
            KernelFamily::Gamma { shape } => {
                if x <= 0.0 {
                    return Err(FamilyError::SupportViolation { x });
                }
                let beta = shape / theta;
                Ok((shape * beta.ln() + (shape - 1.0) * x.ln() - beta * x - ln_gamma(shape)).exp())
            }
            KernelFamily::Binomial { trials } => {
                let k = check_count(x, Some(trials))?;
                let m = trials as f64;
                let p = theta / m;
                let ln_choose =
                    ln_gamma(m + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma(m - k as f64 + 1.0);
                Ok((ln_choose + k as f64 * p.ln() + (m - k as f64) * (1.0 - p).ln()).exp())
            }
            KernelFamily::NegativeBinomial { r } => {
                let k = check_count(x, None)?;
                let p = r / (r + theta);
                let ln_coef = ln_gamma(k as f64 + r) - ln_gamma(k as f64 + 1.0) - ln_gamma(r);
                Ok((ln_coef + k as f64 * (1.0 - p).ln() + r * p.ln()).exp())
            }
        }
    }

    /// Cumulative distribution `F(x | θ)`; for the multivariate Gaussian
    /// location family, the product of the coordinate CDFs.
    pub fn cdf(&self, x: &[f64], theta: &[f64]) -> Result<f64, FamilyError> {
        self.check_theta(theta)?;
        if x.len() != self.obs_dim() {
            return Err(FamilyError::DimensionMismatch {
                got: x.len(),
                want: self.obs_dim(),
            });
        }
        match self {
            KernelFamily::GaussianLocation { sigma, .. } => {
                let mut f = 1.0;
                for (&xi, &ti) in x.iter().zip(theta) {
                    f *= normal_cdf((xi - ti) / sigma);
                }
                Ok(f)
            }
            _ => Ok(self.cdf1(x[0], theta[0])),
        }
    }

    // Scalar CDF without domain re-checks; x may be any real.
    pub(crate) fn cdf1(&self, x: f64, theta: f64) -> f64 {
        match *self {
            KernelFamily::GaussianLocation { sigma, .. } => normal_cdf((x - theta) / sigma),
            KernelFamily::Poisson => {
                if x < 0.0 {
                    0.0
                } else {
                    // P(X <= k) = Q(k + 1, θ)
                    reg_gamma_upper(x.floor() + 1.0, theta)
                }
            }
            KernelFamily::Gamma { shape } => {
                if x <= 0.0 {
                    0.0
                } else {
                    reg_gamma_lower(shape, shape / theta * x)
                }
            }
            KernelFamily::Binomial { trials } => {
                if x < 0.0 {
                    return 0.0;
                }
                let kmax = (x.floor() as u64).min(trials);
                let m = trials as f64;
                let p = theta / m;
                // forward pmf recurrence
                let mut pmf = (m * (1.0 - p).ln()).exp();
                let mut cum = pmf;
                for k in 0..kmax {
                    pmf *= (m - k as f64) / (k as f64 + 1.0) * p / (1.0 - p);
                    cum += pmf;
                }
                cum.min(1.0)
            }
            KernelFamily::NegativeBinomial { r } => {
                if x < 0.0 {
                    return 0.0;
                }
                let kmax = x.floor() as u64;
                let p = r / (r + theta);
                let mut pmf = (r * p.ln()).exp();
                let mut cum = pmf;
                for k in 0..kmax {
                    pmf *= (k as f64 + r) / (k as f64 + 1.0) * (1.0 - p);
                    cum += pmf;
                }
                cum.min(1.0)
            }
        }
    }

    /// One draw from `P_θ`.
    pub fn sample(&self, theta: &[f64], rng: &mut RandomStream) -> Result<Vec<f64>, FamilyError> {
        self.check_theta(theta)?;
        Ok(self.sample_unchecked(theta, rng))
    }

    fn sample_unchecked(&self, theta: &[f64], rng: &mut RandomStream) -> Vec<f64> {
        match *self {
            KernelFamily::GaussianLocation { sigma, .. } => theta
                .iter()
                .map(|&t| t + sigma * rng.standard_normal())
                .collect(),
            KernelFamily::Poisson => vec![sample_poisson(theta[0], rng)],
            KernelFamily::Gamma { shape } => {
                // mean θ with fixed shape α: scale = θ/α
                vec![sample_gamma_unit(shape, rng) * theta[0] / shape]
            }
            KernelFamily::Binomial { trials } => {
                let m = trials as f64;
                let p = theta[0] / m;
                let u = rng.uniform();
                let mut pmf = (m * (1.0 - p).ln()).exp();
                let mut cum = pmf;
                let mut k = 0u64;
                while u > cum && k < trials {
                    pmf *= (m - k as f64) / (k as f64 + 1.0) * p / (1.0 - p);
                    k += 1;
                    cum += pmf;
                }
                vec![k as f64]
            }
            KernelFamily::NegativeBinomial { r } => {
                let p = r / (r + theta[0]);
                let u = rng.uniform();
                let mut pmf = (r * p.ln()).exp();
                let mut cum = pmf;
                let mut k = 0u64;
                while u > cum && k < 100_000_000 {
                    pmf *= (k as f64 + r) / (k as f64 + 1.0) * (1.0 - p);
                    k += 1;
                    cum += pmf;
                }
                vec![k as f64]
            }
        }
    }

    /// `n` i.i.d. draws from the mixture `P_G` by ancestral sampling;
    /// bit-reproducible for a given seed.
    pub fn sample_mixture(
        &self,
        g: &MixingMeasure,
        n: usize,
        seed: u64,
    ) -> Result<DataSet, FamilyError> {
        if n == 0 {
            return Err(FamilyError::EmptySample);
        }
        self.check_measure(g)?;
        let mut rng = RandomStream::new(seed);
        let weights = g.weights();
        let mut values = Vec::with_capacity(n * self.obs_dim());
        for _ in 0..n {
            let u = rng.uniform();
            let mut cum = 0.0;
            let mut idx = g.k() - 1;
            for (i, &w) in weights.iter().enumerate() {
                cum += w;
                if u <= cum {
                    idx = i;
                    break;
                }
            }
            values.extend(self.sample_unchecked(g.atom(idx), &mut rng));
        }
        Ok(DataSet::new(self.obs_dim(), values))
    }

    /// Coefficients of `E_θ[X^i]` as a polynomial in the mean parameter `θ`.
    pub fn moment_polynomial(&self, i: usize) -> Result<Polynomial, FamilyError> {
        if self.obs_dim() != 1 {
            return Err(FamilyError::UnsupportedFamily);
        }
        assert!(i <= MAX_MOMENT_ORDER, "moment order limited to {MAX_MOMENT_ORDER}");
        let mut coeffs = vec![0.0; i + 1];
        match *self {
            KernelFamily::GaussianLocation { sigma, .. } => {
                // m_i(θ) = θ m_{i-1}(θ) + (i-1) σ² m_{i-2}(θ)
                let mut prev2 = vec![1.0]; // m_0
                if i == 0 {
                    return Ok(Polynomial::new(prev2));
                }
                let mut prev = vec![0.0, 1.0]; // m_1 = θ
                for deg in 2..=i {
                    let mut next = vec![0.0; deg + 1];
                    for (l, &c) in prev.iter().enumerate() {
                        next[l + 1] += c;
                    }
                    for (l, &c) in prev2.iter().enumerate() {
                        next[l] += (deg as f64 - 1.0) * sigma * sigma * c;
                    }
                    prev2 = prev;
                    prev = next;
                }
                coeffs = prev;
            }
            KernelFamily::Poisson => {
                let s = stirling2(i);
                coeffs[0] = if i == 0 { 1.0 } else { 0.0 };
                for j in 1..=i {
                    coeffs[j] = s[j];
                }
            }
            KernelFamily::Gamma { shape } => {
                let mut c = 1.0;
                for t in 0..i {
                    c *= (shape + t as f64) / shape;
                }
                coeffs[i] = c;
            }
            KernelFamily::Binomial { trials } => {
                let s = stirling2(i);
                let m = trials as f64;
                coeffs[0] = if i == 0 { 1.0 } else { 0.0 };
                let mut falling = 1.0;
                for j in 1..=i {
                    falling *= m - (j as f64 - 1.0); // (m)_j, zero once j > m
                    coeffs[j] = s[j] * falling / m.powi(j as i32);
                }
            }
            KernelFamily::NegativeBinomial { r } => {
                let s = stirling2(i);
                coeffs[0] = if i == 0 { 1.0 } else { 0.0 };
                let mut rising = 1.0;
                for j in 1..=i {
                    rising *= r + (j as f64 - 1.0); // r^(j)
                    coeffs[j] = s[j] * rising / r.powi(j as i32);
                }
            }
        }
        Ok(Polynomial::new(coeffs))
    }

    /// The orthogonal statistic `t_j(x | θ0)` with
    /// `E_θ t_j(Y | θ0) = (θ - θ0)^j`, obtained by a triangular solve
    /// against the moment polynomials.
    pub fn orthogonal_stat(&self, j: usize, theta0: f64) -> Result<Polynomial, FamilyError> {
        assert!(j >= 1);
        if self.obs_dim() != 1 {
            return Err(FamilyError::UnsupportedFamily);
        }
        self.check_theta1(theta0)
            .map_err(|_| FamilyError::Theta0OutOfDomain { theta0 })?;
        // moment matrix rows: E_θ[X^i] = Σ_l mom[i][l] θ^l
        let mut mom = Vec::with_capacity(j + 1);
        for i in 0..=j {
            mom.push(self.moment_polynomial(i)?.coeffs().to_vec());
        }
        // target: (θ - θ0)^j = Σ_l C(j,l) (-θ0)^{j-l} θ^l
        let mut target = vec![0.0; j + 1];
        for (l, t) in target.iter_mut().enumerate() {
            *t = binomial_coeff(j, l) * (-theta0).powi((j - l) as i32);
        }
        // back substitution on the upper-triangular system
        let mut a = vec![0.0; j + 1];
        for l in (0..=j).rev() {
            let mut rhs = target[l];
            for i in (l + 1)..=j {
                rhs -= a[i] * mom[i][l];
            }
            let diag = mom[l][l];
            if diag.abs() < 1e-12 {
                // e.g. binomial with j > m: E[X^l] degenerates below degree l
                return Err(FamilyError::UnsupportedOrder { order: j });
            }
            a[l] = rhs / diag;
        }
        Ok(Polynomial::new(a))
    }

    /// `t̄_j(θ0) = (1/n) Σ_i t_j(X_i | θ0)` for `j = 1..=order`.
    pub fn t_bar(&self, data: &DataSet, order: usize, theta0: f64) -> Result<Vec<f64>, FamilyError> {
        assert!(order >= 1);
        if self.obs_dim() != 1 {
            return Err(FamilyError::UnsupportedFamily);
        }
        if data.is_empty() {
            return Err(FamilyError::EmptyData);
        }
        // mean powers of the data, reused by every t_j
        let n = data.len() as f64;
        let mut mean_pow = vec![0.0; order + 1];
        for &x in data.as_1d() {
            let mut p = 1.0;
            for mp in mean_pow.iter_mut() {
                *mp += p;
                p *= x;
            }
        }
        for mp in mean_pow.iter_mut() {
            *mp /= n;
        }
        (1..=order)
            .map(|j| {
                let stat = self.orthogonal_stat(j, theta0)?;
                Ok(stat
                    .coeffs()
                    .iter()
                    .zip(&mean_pow)
                    .map(|(&a, &mp)| a * mp)
                    .sum())
            })
            .collect()
    }

    /// Parse a family specification string such as `gaussian(sigma=1.0,d=1)`,
    /// `poisson`, `gamma(alpha=2.0)`, `binomial(m=10)` or `negbinomial(r=3.0)`.
    pub fn parse(spec: &str) -> Result<Self, FamilyError> {
        let spec = spec.trim().to_ascii_lowercase();
        let (name, args) = match spec.find('(') {
            Some(open) => {
                let close = spec
                    .rfind(')')
                    .ok_or_else(|| FamilyError::InvalidSpec(format!("missing `)` in `{spec}`")))?;
                (spec[..open].trim().to_string(), spec[open + 1..close].to_string())
            }
            None => (spec.clone(), String::new()),
        };
        let mut kv = std::collections::BTreeMap::new();
        for part in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| FamilyError::InvalidSpec(format!("expected key=value, got `{part}`")))?;
            let v: f64 = value.trim().parse().map_err(|_| {
                FamilyError::InvalidSpec(format!("bad numeric value `{}`", value.trim()))
            })?;
            kv.insert(key.trim().to_string(), v);
        }
        let get = |kv: &std::collections::BTreeMap<String, f64>, key: &str| kv.get(key).copied();
        let fam = match name.as_str() {
            "gaussian" | "normal" => {
                let sigma = get(&kv, "sigma").unwrap_or(1.0);
                let dim = get(&kv, "d").unwrap_or(1.0);
                if sigma <= 0.0 {
                    return Err(FamilyError::InvalidSpec("sigma must be > 0".to_string()));
                }
                if dim < 1.0 || dim.fract() != 0.0 {
                    return Err(FamilyError::InvalidSpec("d must be a positive integer".to_string()));
                }
                KernelFamily::GaussianLocation { sigma, dim: dim as usize }
            }
            "poisson" => KernelFamily::Poisson,
            "gamma" => {
                let shape = get(&kv, "alpha")
                    .ok_or_else(|| FamilyError::InvalidSpec("gamma requires alpha".to_string()))?;
                if shape <= 0.0 {
                    return Err(FamilyError::InvalidSpec("alpha must be > 0".to_string()));
                }
                KernelFamily::Gamma { shape }
            }
            "binomial" => {
                let m = get(&kv, "m")
                    .ok_or_else(|| FamilyError::InvalidSpec("binomial requires m".to_string()))?;
                if m < 1.0 || m.fract() != 0.0 {
                    return Err(FamilyError::InvalidSpec("m must be a positive integer".to_string()));
                }
                KernelFamily::Binomial { trials: m as u64 }
            }
            "negbinomial" | "negativebinomial" => {
                let r = get(&kv, "r")
                    .ok_or_else(|| FamilyError::InvalidSpec("negbinomial requires r".to_string()))?;
                if r <= 0.0 {
                    return Err(FamilyError::InvalidSpec("r must be > 0".to_string()));
                }
                KernelFamily::NegativeBinomial { r }
            }
            other => {
                return Err(FamilyError::InvalidSpec(format!("unknown family `{other}`")));
            }
        };
        Ok(fam)
    }
}

fn check_count(x: f64, max: Option<u64>) -> Result<u64, FamilyError> {
    let k = x.round();
    if (x - k).abs() > 1e-9 || k < 0.0 {
        return Err(FamilyError::SupportViolation { x });
    }
    let k = k as u64;
    if let Some(m) = max {
        if k > m {
            return Err(FamilyError::SupportViolation { x });
        }
    }
    Ok(k)
}

// Stirling numbers of the second kind S(n, j), j = 0..=n.
fn stirling2(n: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..n {
        let mut next = vec![0.0; row.len() + 1];
        for (j, &s) in row.iter().enumerate() {
            next[j] += j as f64 * s;
            next[j + 1] += s;
        }
        // S(n, 0) = 0 for n >= 1
        next[0] = 0.0;
        row = next;
    }
    row
}

fn binomial_coeff(n: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for t in 0..k {
        c = c * (n - t) as f64 / (t + 1) as f64;
    }
    c
}

fn sample_poisson(theta: f64, rng: &mut RandomStream) -> f64 {
    let u = rng.uniform();
    let mut pmf = (-theta).exp();
    let mut cum = pmf;
    let mut k = 0u64;
    while u > cum && k < 100_000_000 {
        k += 1;
        pmf *= theta / k as f64;
        cum += pmf;
    }
    k as f64
}

// Marsaglia-Tsang draw from Gamma(shape, rate 1).
fn sample_gamma_unit(shape: f64, rng: &mut RandomStream) -> f64 {
    if shape < 1.0 {
        let boost = rng.uniform().powf(1.0 / shape);
        return boost * sample_gamma_unit(shape + 1.0, rng);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z = rng.standard_normal();
        let v = (1.0 + c * z).powi(3);
        if v <= 0.0 {
            continue;
        }
        let u = rng.uniform();
        if u < 1.0 - 0.0331 * z.powi(4) {
            return d * v;
        }
        if u.ln() < 0.5 * z * z + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}
