//! Monte Carlo studies: convergence rates of the Wasserstein error in n,
//! order-selection frequencies, log-log slope extraction, and CSV/SVG
//! artifact emission.

use crate::family::KernelFamily;
use crate::fit::{fit, phi_for_order, FitError, OptimizerOptions};
use crate::measure::{wasserstein, MeasureError, MixingMeasure, ParamDomain};
use crate::objective::{ObjectiveError, PhiSpec};
use crate::order::{plug_in, OrderError};
use crate::rng::mix_seed;
use crate::textfmt::fmt_sig;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("bad study configuration: {0}")]
    BadConfig(String),
    #[error("log-log fit needs at least 2 rows, got {got}")]
    TooFewRows { got: usize },
    #[error("log-log fit needs positive means; row {index} has mean {mean}")]
    NonPositiveMean { index: usize, mean: f64 },
    #[error(transparent)]
    Family(#[from] crate::family::FamilyError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("i/o failure: {0}")]
    Io(String),
}

/// How each replication turns data into an estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum StudyMode {
    /// Fit with the true number of atoms.
    KnownK { k: usize },
    /// Select the order by threshold crossing up to `k_max`.
    PlugIn { k_max: usize, c1: Option<f64> },
}

/// Configuration of a rate or order study.
#[derive(Debug, Clone)]
pub struct RateStudyConfig {
    pub family: KernelFamily,
    pub truth: MixingMeasure,
    pub phi: PhiSpec,
    pub mode: StudyMode,
    /// Strictly increasing sample sizes, each at least 2.
    pub n_grid: Vec<usize>,
    pub replications: usize,
    /// Wasserstein order for the recorded error.
    pub ell: f64,
    /// Record `W_ell^ell` instead of `W_ell`.
    pub record_power: bool,
    pub master_seed: u64,
    pub domain: Option<ParamDomain>,
    pub options: OptimizerOptions,
}

impl RateStudyConfig {
    pub fn validate(&self) -> Result<(), StudyError> {
        if self.n_grid.is_empty() {
            return Err(StudyError::BadConfig("n grid is empty".to_string()));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(StudyError::BadConfig("n grid must be strictly increasing".to_string()));
        }
        if self.n_grid[0] < 2 {
            return Err(StudyError::BadConfig("every n must be at least 2".to_string()));
        }
        if self.replications == 0 {
            return Err(StudyError::BadConfig("replications must be >= 1".to_string()));
        }
        if !(self.ell >= 1.0) {
            return Err(StudyError::BadConfig("wasserstein order must be >= 1".to_string()));
        }
        match self.mode {
            StudyMode::KnownK { k } if k == 0 => {
                Err(StudyError::BadConfig("known k must be >= 1".to_string()))
            }
            StudyMode::PlugIn { k_max, .. } if k_max == 0 => {
                Err(StudyError::BadConfig("k_max must be >= 1".to_string()))
            }
            _ => Ok(()),
        }
    }

    /// Parse a flat `key = value` config text. Unknown keys are errors.
    /// `truth` uses `;`-separated `p theta...` atom entries and `n_grid` a
    /// comma-separated list.
    pub fn from_text(text: &str) -> Result<Self, StudyError> {
        let mut kv = std::collections::BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                StudyError::BadConfig(format!("line {}: expected key = value", lineno + 1))
            })?;
            kv.insert(key.trim().to_string(), value.trim().to_string());
        }
        Self::from_pairs(&kv)
    }

    /// Build from parsed `key -> value` pairs (shared with the CLI).
    pub fn from_pairs(
        kv: &std::collections::BTreeMap<String, String>,
    ) -> Result<Self, StudyError> {
        const KNOWN: &[&str] = &[
            "family", "truth", "phi", "mode", "k", "k_max", "c1", "n_grid", "replications",
            "ell", "record_power", "seed", "domain", "restarts", "max_iterations",
        ];
        for key in kv.keys() {
            if !KNOWN.contains(&key.as_str()) {
                return Err(StudyError::BadConfig(format!("unknown key `{key}`")));
            }
        }
        let get = |key: &str| -> Result<&String, StudyError> {
            kv.get(key)
                .ok_or_else(|| StudyError::BadConfig(format!("missing key `{key}`")))
        };
        let family = KernelFamily::parse(get("family")?)?;
        let truth = MixingMeasure::from_text(&get("truth")?.replace(';', "\n"))?;
        let phi = PhiSpec::parse(get("phi")?)?;
        let mode = match get("mode")?.as_str() {
            "known_k" => StudyMode::KnownK {
                k: parse_num(get("k")?, "k")? as usize,
            },
            "plug_in" => StudyMode::PlugIn {
                k_max: parse_num(get("k_max")?, "k_max")? as usize,
                c1: kv.get("c1").map(|v| parse_num(v, "c1")).transpose()?,
            },
            other => {
                return Err(StudyError::BadConfig(format!(
                    "mode must be known_k or plug_in, got `{other}`"
                )))
            }
        };
        let n_grid = get("n_grid")?
            .split(',')
            .map(|tok| parse_num(tok.trim(), "n_grid").map(|v| v as usize))
            .collect::<Result<Vec<_>, _>>()?;
        let replications = parse_num(get("replications")?, "replications")? as usize;
        let ell = kv.get("ell").map(|v| parse_num(v, "ell")).transpose()?.unwrap_or(1.0);
        let record_power = match kv.get("record_power").map(String::as_str) {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => {
                return Err(StudyError::BadConfig(format!(
                    "record_power must be true or false, got `{other}`"
                )))
            }
        };
        let master_seed = kv
            .get("seed")
            .map(|v| parse_num(v, "seed").map(|x| x as u64))
            .transpose()?
            .unwrap_or(0);
        let domain = kv
            .get("domain")
            .map(|v| -> Result<ParamDomain, StudyError> {
                let nums: Vec<f64> = v
                    .split_whitespace()
                    .map(|tok| parse_num(tok, "domain"))
                    .collect::<Result<_, _>>()?;
                if nums.len() != 2 {
                    return Err(StudyError::BadConfig("domain needs `lo hi`".to_string()));
                }
                Ok(ParamDomain::interval(nums[0], nums[1])?)
            })
            .transpose()?;
        let mut options = OptimizerOptions::default();
        if let Some(v) = kv.get("restarts") {
            options.restarts = parse_num(v, "restarts")? as usize;
        }
        if let Some(v) = kv.get("max_iterations") {
            options.max_iterations = parse_num(v, "max_iterations")? as usize;
        }
        let cfg = RateStudyConfig {
            family,
            truth,
            phi,
            mode,
            n_grid,
            replications,
            ell,
            record_power,
            master_seed,
            domain,
            options,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_num(tok: &str, key: &str) -> Result<f64, StudyError> {
    tok.parse()
        .map_err(|_| StudyError::BadConfig(format!("bad number `{tok}` for `{key}`")))
}

/// One aggregated result row per sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub n: usize,
    /// Mean recorded error across replications.
    pub mean: f64,
    /// Standard error of the mean.
    pub se: f64,
    pub reps: usize,
    /// Fraction of replications selecting the true order (order studies).
    pub frac_correct: Option<f64>,
}

// One replication: fit (or plug in) and return (error, k-correct flag).
fn run_replication(
    cfg: &RateStudyConfig,
    n: usize,
    r: usize,
) -> Result<(f64, bool), StudyError> {
    let seed = mix_seed(cfg.master_seed, n as u64, r as u64);
    let data = cfg.family.sample_mixture(&cfg.truth, n, seed)?;
    let per_rep = OptimizerOptions {
        seed: mix_seed(seed, 1, 0),
        ..cfg.options.clone()
    };
    let (measure, correct) = match cfg.mode {
        StudyMode::KnownK { k } => {
            let phi = phi_for_order(&cfg.phi, k);
            let res = fit(&cfg.family, &phi, &data, k, cfg.domain.as_ref(), &per_rep)?;
            let correct = res.measure.k() == cfg.truth.k();
            (res.measure, correct)
        }
        StudyMode::PlugIn { k_max, c1 } => {
            let res = plug_in(
                &cfg.family,
                &cfg.phi,
                &data,
                k_max,
                cfg.domain.as_ref(),
                &per_rep,
                c1,
            )?;
            let correct = !res.undetermined && res.k_hat == cfg.truth.k();
            (res.plug_in.measure, correct)
        }
    };
    let mut err = wasserstein(&measure, &cfg.truth, cfg.ell)?;
    if cfg.record_power {
        err = err.powf(cfg.ell);
    }
    Ok((err, correct))
}

fn aggregate(values: &[f64], frac: Option<f64>, n: usize) -> StudyRow {
    let reps = values.len();
    let mean = values.iter().sum::<f64>() / reps as f64;
    let se = if reps > 1 {
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps - 1) as f64;
        (var / reps as f64).sqrt()
    } else {
        0.0
    };
    StudyRow { n, mean, se, reps, frac_correct: frac }
}

fn run_study(cfg: &RateStudyConfig, with_frac: bool) -> Result<Vec<StudyRow>, StudyError> {
    cfg.validate()?;
    cfg.family.check_measure(&cfg.truth)?;
    let mut rows = Vec::with_capacity(cfg.n_grid.len());
    for &n in &cfg.n_grid {
        // replications in parallel; the collected order is by r, so the
        // reduction is deterministic regardless of scheduling
        let per_rep: Vec<Result<(f64, bool), StudyError>> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| run_replication(cfg, n, r))
            .collect();
        let mut errors = Vec::with_capacity(cfg.replications);
        let mut correct = 0usize;
        for res in per_rep {
            let (e, c) = res?;
            errors.push(e);
            if c {
                correct += 1;
            }
        }
        let frac = with_frac.then(|| correct as f64 / cfg.replications as f64);
        rows.push(aggregate(&errors, frac, n));
    }
    Ok(rows)
}

/// Convergence-rate study: per sample size, the mean Wasserstein error of
/// the estimate to the truth across seeded replications.
pub fn run_rate_study(cfg: &RateStudyConfig) -> Result<Vec<StudyRow>, StudyError> {
    run_study(cfg, false)
}

/// Order-selection study: per sample size, the fraction of replications
/// selecting the true order, plus the mean plug-in error. Requires plug-in
/// mode.
pub fn run_order_study(cfg: &RateStudyConfig) -> Result<Vec<StudyRow>, StudyError> {
    if !matches!(cfg.mode, StudyMode::PlugIn { .. }) {
        return Err(StudyError::BadConfig("order study requires plug_in mode".to_string()));
    }
    run_study(cfg, true)
}

/// Ordinary least squares of `log(mean)` on `log(n)`:
/// `(slope, intercept, stderr of the slope)`.
pub fn fit_log_log_slope(rows: &[StudyRow]) -> Result<(f64, f64, f64), StudyError> {
    if rows.len() < 2 {
        return Err(StudyError::TooFewRows { got: rows.len() });
    }
    for (i, row) in rows.iter().enumerate() {
        if !(row.mean > 0.0) {
            return Err(StudyError::NonPositiveMean { index: i, mean: row.mean });
        }
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean.ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let stderr = if xs.len() > 2 {
        let ssr: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| {
                let e = y - (intercept + slope * x);
                e * e
            })
            .sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, intercept, stderr))
}

/// Render rows to CSV text: header `n,mean,se,reps,frac_correct`, 12
/// significant digits, UNIX newlines; absent fractions are left empty.
pub fn csv_text(rows: &[StudyRow]) -> String {
    let mut out = String::from("n,mean,se,reps,frac_correct\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.n,
            fmt_sig(row.mean),
            fmt_sig(row.se),
            row.reps,
            row.frac_correct.map(fmt_sig).unwrap_or_default(),
        ));
    }
    out
}

pub fn write_csv(rows: &[StudyRow], path: &std::path::Path) -> Result<(), StudyError> {
    std::fs::write(path, csv_text(rows)).map_err(|e| StudyError::Io(e.to_string()))
}

/// Render rows to a self-contained log-log SVG scatter with ±2 se error
/// bars and an optional fitted line annotated with its slope.
pub fn svg_text(rows: &[StudyRow], slope_fit: Option<(f64, f64)>) -> Result<String, StudyError> {
    if rows.is_empty() {
        return Err(StudyError::TooFewRows { got: 0 });
    }
    for (i, row) in rows.iter().enumerate() {
        if !(row.mean > 0.0) {
            return Err(StudyError::NonPositiveMean { index: i, mean: row.mean });
        }
    }
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const ML: f64 = 70.0; // left margin
    const MR: f64 = 20.0;
    const MT: f64 = 30.0;
    const MB: f64 = 50.0;

    let lx: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let mut ly_lo = f64::INFINITY;
    let mut ly_hi = f64::NEG_INFINITY;
    for r in rows {
        let low = (r.mean - 2.0 * r.se).max(r.mean * 0.1);
        ly_lo = ly_lo.min(low.ln());
        ly_hi = ly_hi.max((r.mean + 2.0 * r.se).ln());
    }
    if !(ly_hi > ly_lo) {
        ly_hi = ly_lo + 1.0;
    }
    let (x_lo, x_hi) = (lx[0], *lx.last().unwrap());
    let x_span = (x_hi - x_lo).max(1e-9);
    let sx = |v: f64| ML + (v - x_lo) / x_span * (W - ML - MR);
    let sy = |v: f64| H - MB - (v - ly_lo) / (ly_hi - ly_lo) * (H - MT - MB);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // axes
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR
    ));
    svg.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">log n</text>\n",
        (ML + W - MR) / 2.0,
        H - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" transform=\"rotate(-90 18 {})\">log mean error</text>\n",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    ));
    // fitted line
    if let Some((slope, intercept)) = slope_fit {
        let y1 = sy(intercept + slope * x_lo);
        let y2 = sy(intercept + slope * x_hi);
        svg.push_str(&format!(
            "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
            sx(x_lo),
            y1,
            sx(x_hi),
            y2
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" fill=\"steelblue\">slope = {:.3}</text>\n",
            ML + 10.0,
            MT + 8.0,
            slope
        ));
    }
    // error bars then points
    for r in rows {
        let x = sx((r.n as f64).ln());
        let y_lo = sy(((r.mean - 2.0 * r.se).max(r.mean * 0.1)).ln());
        let y_hi = sy((r.mean + 2.0 * r.se).ln());
        svg.push_str(&format!(
            "<line x1=\"{x:.3}\" y1=\"{y_lo:.3}\" x2=\"{x:.3}\" y2=\"{y_hi:.3}\" stroke=\"gray\"/>\n"
        ));
        let y = sy(r.mean.ln());
        svg.push_str(&format!(
            "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"3.5\" fill=\"black\"/>\n"
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn render_svg_plot(
    rows: &[StudyRow],
    slope_fit: Option<(f64, f64)>,
    path: &std::path::Path,
) -> Result<(), StudyError> {
    let svg = svg_text(rows, slope_fit)?;
    std::fs::write(path, svg).map_err(|e| StudyError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::RkhsKernel;
    use approx::assert_abs_diff_eq;

    fn tiny_cfg() -> RateStudyConfig {
        RateStudyConfig {
            family: KernelFamily::gaussian(1.0),
            truth: MixingMeasure::dirac(vec![0.0]),
            phi: PhiSpec::Mmd(RkhsKernel::GaussianRbf { gamma: 0.5 }),
            mode: StudyMode::KnownK { k: 1 },
            n_grid: vec![100],
            replications: 1,
            ell: 1.0,
            record_power: false,
            master_seed: 7,
            domain: None,
            options: OptimizerOptions { restarts: 2, max_iterations: 200, ..Default::default() },
        }
    }

    #[test]
    fn single_replication_row() {
        let rows = run_rate_study(&tiny_cfg()).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].reps, 1);
        assert_eq!(rows[0].se, 0.0);
        assert!(rows[0].mean >= 0.0);
        assert!(rows[0].frac_correct.is_none());
    }

    #[test]
    fn rate_study_reproducible() {
        let mut cfg = tiny_cfg();
        cfg.replications = 3;
        let a = run_rate_study(&cfg).unwrap();
        let b = run_rate_study(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rate_study_error_shrinks_with_n() {
        let mut cfg = tiny_cfg();
        cfg.n_grid = vec![50, 2000];
        cfg.replications = 4;
        let rows = run_rate_study(&cfg).unwrap();
        assert!(
            rows[1].mean < rows[0].mean,
            "error should shrink: {} then {}",
            rows[0].mean,
            rows[1].mean
        );
    }

    #[test]
    fn power_recording() {
        let mut cfg = tiny_cfg();
        cfg.ell = 2.0;
        let plain = run_rate_study(&cfg).unwrap();
        cfg.record_power = true;
        let powered = run_rate_study(&cfg).unwrap();
        assert_abs_diff_eq!(powered[0].mean, plain[0].mean.powi(2), epsilon = 1e-12);
    }

    #[test]
    fn order_study_huge_threshold() {
        let mut cfg = tiny_cfg();
        cfg.mode = StudyMode::PlugIn { k_max: 3, c1: Some(1e3) };
        cfg.replications = 3;
        let rows = run_order_study(&cfg).unwrap();
        assert_eq!(rows[0].frac_correct, Some(1.0));
    }

    #[test]
    fn order_study_requires_plug_in() {
        let cfg = tiny_cfg();
        assert!(matches!(run_order_study(&cfg), Err(StudyError::BadConfig(_))));
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny_cfg();
        cfg.n_grid = vec![100, 100];
        assert!(cfg.validate().is_err());
        cfg.n_grid = vec![1];
        assert!(cfg.validate().is_err());
        cfg.n_grid = vec![100];
        cfg.replications = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn slope_fit_synthetic() {
        let rows: Vec<StudyRow> = [100usize, 400, 1600, 6400]
            .iter()
            .map(|&n| StudyRow {
                n,
                mean: (n as f64).powf(-0.5),
                se: 0.0,
                reps: 1,
                frac_correct: None,
            })
            .collect();
        let (slope, _, stderr) = fit_log_log_slope(&rows).unwrap();
        assert_abs_diff_eq!(slope, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(stderr, 0.0, epsilon = 1e-10);

        let flat: Vec<StudyRow> = rows
            .iter()
            .map(|r| StudyRow { mean: 2.0, ..r.clone() })
            .collect();
        let (slope, intercept, _) = fit_log_log_slope(&flat).unwrap();
        assert_abs_diff_eq!(slope, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(intercept, 2.0f64.ln(), epsilon = 1e-12);

        let scaled: Vec<StudyRow> = rows
            .iter()
            .map(|r| StudyRow { mean: 3.0 / r.n as f64, ..r.clone() })
            .collect();
        let (slope, intercept, _) = fit_log_log_slope(&scaled).unwrap();
        assert_abs_diff_eq!(slope, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(intercept, 3.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn slope_fit_errors() {
        let row = StudyRow { n: 10, mean: 1.0, se: 0.0, reps: 1, frac_correct: None };
        assert!(matches!(
            fit_log_log_slope(&[row.clone()]),
            Err(StudyError::TooFewRows { got: 1 })
        ));
        let bad = StudyRow { mean: 0.0, n: 20, ..row.clone() };
        assert!(matches!(
            fit_log_log_slope(&[row, bad]),
            Err(StudyError::NonPositiveMean { .. })
        ));
    }

    #[test]
    fn csv_format() {
        assert_eq!(csv_text(&[]), "n,mean,se,reps,frac_correct\n");
        let rows = vec![StudyRow {
            n: 100,
            mean: 0.25,
            se: 0.0125,
            reps: 50,
            frac_correct: Some(0.92),
        }];
        let text = csv_text(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields[0], "100");
        assert_abs_diff_eq!(fields[1].parse::<f64>().unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(fields[4].parse::<f64>().unwrap(), 0.92, epsilon = 1e-12);
        // deterministic bytes
        assert_eq!(text, csv_text(&rows));
    }

    #[test]
    fn svg_output() {
        let rows: Vec<StudyRow> = [100usize, 1000]
            .iter()
            .map(|&n| StudyRow {
                n,
                mean: (n as f64).powf(-0.5),
                se: 0.01,
                reps: 10,
                frac_correct: None,
            })
            .collect();
        let svg = svg_text(&rows, Some((-0.5, 0.0))).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("slope = -0.500"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg, svg_text(&rows, Some((-0.5, 0.0))).unwrap());
        // crude well-formedness: tags balance
        assert_eq!(svg.matches("<svg").count(), 1);
        assert_eq!(svg.matches("</svg>").count(), 1);
    }

    #[test]
    fn seed_mixing_distinct() {
        let mut seen = std::collections::HashSet::new();
        for n in [100u64, 250, 1000] {
            for r in 0..200u64 {
                assert!(seen.insert(mix_seed(42, n, r)), "seed collision at n={n}, r={r}");
            }
        }
    }

    #[test]
    fn config_text_round_trip() {
        let text = "\
# rate study
family = gaussian(sigma=1,d=1)
truth = 0.5 -2; 0.5 2
phi = ks
mode = known_k
k = 2
n_grid = 100, 400
replications = 5
ell = 1
seed = 9
restarts = 3
";
        let cfg = RateStudyConfig::from_text(text).unwrap();
        assert_eq!(cfg.truth.k(), 2);
        assert_eq!(cfg.n_grid, vec![100, 400]);
        assert_eq!(cfg.mode, StudyMode::KnownK { k: 2 });
        assert_eq!(cfg.options.restarts, 3);
        assert!(matches!(
            RateStudyConfig::from_text("family = poisson\nbogus = 1\n"),
            Err(StudyError::BadConfig(_))
        ));
    }
}
