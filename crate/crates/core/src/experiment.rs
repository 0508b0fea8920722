//! Monte Carlo experiment engine: a grid over sparsity `s` and outlier count
//! `o`, repeated with per-trial seeds derived from a master seed.
//!
//! Every trial is a pure function of `(config, s, o, rep)`, so the record set is
//! identical regardless of thread count or execution order. Records are
//! returned sorted by `(s, o, rep)`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use log::warn;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, l1_norm};
use crate::model::{self, make_beta, make_covariance, ContaminationSpec, CovarianceModel, Dataset, IndexRule, Mechanism};
use crate::rng::{derive_seed, rng_from_seed};
use crate::solver::{fit_cd, PenaltyPair, SolverConfig};
use crate::tuning::{lambda_empirical, lambda_experiment, lambda_theorem3, NoiseModel};

/// How penalty levels are chosen for each trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum LambdaRule {
    Theorem3 { delta: f64 },
    Experiment,
    Empirical { delta: f64 },
    Fixed { lambda_s: f64, lambda_o: f64 },
}

const DEFAULT_DELTA: f64 = 0.1;

impl fmt::Display for LambdaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaRule::Theorem3 { delta } => write!(f, "theorem3:{delta}"),
            LambdaRule::Experiment => write!(f, "experiment"),
            LambdaRule::Empirical { delta } => write!(f, "empirical:{delta}"),
            LambdaRule::Fixed { lambda_s, lambda_o } => write!(f, "fixed:{lambda_s},{lambda_o}"),
        }
    }
}

/// Parses `theorem3[:δ]`, `experiment`, `empirical[:δ]`, `fixed:<λ>` or `fixed:<λ_s>,<λ_o>`.
impl FromStr for LambdaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.trim().split_once(':') {
            Some((k, a)) => (k, Some(a.trim())),
            None => (s.trim(), None),
        };
        let num = |text: &str| -> Result<f64> {
            text.trim()
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad number `{text}` in lambda rule `{s}`: {e}")))
        };
        let delta = || arg.map(num).transpose().map(|d| d.unwrap_or(DEFAULT_DELTA));
        match kind {
            "theorem3" => Ok(LambdaRule::Theorem3 { delta: delta()? }),
            "experiment" => Ok(LambdaRule::Experiment),
            "empirical" => Ok(LambdaRule::Empirical { delta: delta()? }),
            "fixed" => {
                let arg = arg.ok_or_else(|| Error::invalid("fixed lambda rule needs values, e.g. `fixed:0.1,0.2`"))?;
                let vals: Vec<f64> = arg.split(',').map(num).collect::<Result<_>>()?;
                match vals.as_slice() {
                    [l] => Ok(LambdaRule::Fixed { lambda_s: *l, lambda_o: *l }),
                    [ls, lo] => Ok(LambdaRule::Fixed {
                        lambda_s: *ls,
                        lambda_o: *lo,
                    }),
                    _ => Err(Error::invalid(format!("fixed lambda rule takes one or two values, got `{arg}`"))),
                }
            }
            _ => Err(Error::invalid(format!(
                "unknown lambda rule `{s}` (expected theorem3, experiment, empirical or fixed:<values>)"
            ))),
        }
    }
}

/// Resolves a rule to a penalty pair for a concrete dataset. Returns the rule
/// actually applied: the experiment rule is undefined at `o = 0` and falls
/// back to the `theorem3` rule at `fallback_delta`.
#[allow(clippy::too_many_arguments)]
pub fn resolve_penalties(
    rule: &LambdaRule,
    data: &Dataset,
    sigma_matrix: Option<&DMatrix<f64>>,
    noise_sigma: f64,
    s: usize,
    o: usize,
    fallback_delta: f64,
) -> Result<(PenaltyPair, LambdaRule)> {
    let (n, p) = (data.n(), data.p());
    match *rule {
        LambdaRule::Theorem3 { delta } => Ok((lambda_theorem3(n, p, &NoiseModel::new(noise_sigma, delta)?)?, *rule)),
        LambdaRule::Experiment if o == 0 => {
            let used = LambdaRule::Theorem3 { delta: fallback_delta };
            resolve_penalties(&used, data, sigma_matrix, noise_sigma, s, o, fallback_delta)
        }
        LambdaRule::Experiment => Ok((lambda_experiment(n, p, s, o)?, *rule)),
        LambdaRule::Empirical { delta } => Ok((
            lambda_empirical(&data.x, sigma_matrix, &NoiseModel::new(noise_sigma, delta)?)?,
            *rule,
        )),
        LambdaRule::Fixed { lambda_s, lambda_o } => Ok((PenaltyPair::new(lambda_s, lambda_o)?, *rule)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: usize,
    pub s_values: Vec<usize>,
    /// Explicit outlier counts; takes precedence over `eps_values` and the step grid.
    pub o_values: Option<Vec<usize>>,
    /// Outlier fractions, converted to `o = round(ε·n)`.
    pub eps_values: Option<Vec<f64>>,
    /// Step grid `o ∈ {0, o_step, 2·o_step, …} ∩ [0, eps_max·n]` used when neither list is given.
    pub o_step: usize,
    pub eps_max: f64,
    pub sigma: f64,
    /// Value of the nonzero coefficients of β*.
    pub amplitude: f64,
    /// Outlier shift on the θ scale; defaults to `amplitude`.
    pub outlier_magnitude: Option<f64>,
    pub index_rule: IndexRule,
    pub covariance: CovarianceModel,
    pub lambda_rule: LambdaRule,
    /// δ of the `theorem3` rule used where the experiment rule is undefined (`o = 0`).
    pub fallback_delta: f64,
    pub repetitions: usize,
    pub master_seed: u64,
    pub solver: SolverConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 1000,
            p: 100,
            s_values: vec![5, 15, 25],
            o_values: None,
            eps_values: None,
            o_step: 5,
            eps_max: 0.25,
            sigma: 1.0,
            amplitude: 10.0,
            outlier_magnitude: None,
            index_rule: IndexRule::FirstO,
            covariance: CovarianceModel::Identity,
            lambda_rule: LambdaRule::Experiment,
            fallback_delta: DEFAULT_DELTA,
            repetitions: 20,
            master_seed: 20_190_101,
            solver: SolverConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// The resolved outlier-count grid, ascending and deduplicated.
    pub fn outlier_counts(&self) -> Vec<usize> {
        let mut os: Vec<usize> = if let Some(os) = &self.o_values {
            os.clone()
        } else if let Some(eps) = &self.eps_values {
            eps.iter().map(|e| (e * self.n as f64).round() as usize).collect()
        } else {
            let max = (self.eps_max * self.n as f64).floor() as usize;
            (0..=max).step_by(self.o_step.max(1)).collect()
        };
        os.sort_unstable();
        os.dedup();
        os
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::invalid("n and p must be at least 1"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        if self.s_values.is_empty() {
            return Err(Error::invalid("s_values must not be empty"));
        }
        if let Some(eps) = &self.eps_values {
            if let Some(bad) = eps.iter().find(|e| !(**e >= 0.0 && **e <= 1.0)) {
                return Err(Error::invalid(format!("outlier fraction {bad} outside [0, 1]")));
            }
        }
        if self.o_values.is_none() && self.eps_values.is_none() && self.o_step == 0 {
            return Err(Error::invalid("o_step must be at least 1"));
        }
        let os = self.outlier_counts();
        if os.is_empty() {
            return Err(Error::invalid("outlier grid is empty"));
        }
        if let Some(&o) = os.iter().find(|&&o| o > self.n) {
            return Err(Error::invalid(format!("outlier count {o} exceeds n = {}", self.n)));
        }
        if let Some(&s) = self.s_values.iter().find(|&&s| s > self.p) {
            return Err(Error::invalid(format!("sparsity {s} exceeds p = {}", self.p)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!("noise level {} must be nonnegative", self.sigma)));
        }
        match self.lambda_rule {
            LambdaRule::Experiment => {
                if self.s_values.contains(&0) {
                    return Err(Error::invalid("the experiment rule needs s >= 1 (log(p/s))"));
                }
                if os.contains(&self.n) {
                    return Err(Error::invalid("the experiment rule is degenerate at o = n (log(n/o) = 0)"));
                }
                if os.contains(&0) {
                    NoiseModel::new(self.sigma, self.fallback_delta)?;
                }
            }
            LambdaRule::Theorem3 { delta } | LambdaRule::Empirical { delta } => {
                NoiseModel::new(self.sigma, delta)?;
            }
            LambdaRule::Fixed { lambda_s, lambda_o } => {
                PenaltyPair::new(lambda_s, lambda_o)?;
            }
        }
        let magnitude = self.outlier_magnitude.unwrap_or(self.amplitude);
        if os.iter().any(|&o| o > 0) && !(magnitude != 0.0 && magnitude.is_finite()) {
            return Err(Error::invalid("outlier magnitude must be finite and nonzero"));
        }
        self.solver.validate()?;
        make_covariance(&self.covariance, self.p)?;
        Ok(())
    }

    pub fn trial_count(&self) -> usize {
        self.s_values.len() * self.outlier_counts().len() * self.repetitions
    }

    /// Human-readable notes on rule substitutions that the grid triggers.
    pub fn notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if self.lambda_rule == LambdaRule::Experiment && self.outlier_counts().contains(&0) {
            notes.push(format!(
                "o = 0 cells use theorem3 (delta = {}) instead of the experiment rule, which is undefined at o = 0",
                self.fallback_delta
            ));
        }
        notes
    }
}

/// One grid cell with everything a trial needs resolved.
#[derive(Clone, Debug)]
pub struct TrialCell {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub o: usize,
    pub sigma: f64,
    pub amplitude: f64,
    pub outlier_magnitude: f64,
    pub index_rule: IndexRule,
    pub covariance: CovarianceModel,
    pub covariance_matrix: DMatrix<f64>,
    pub covariance_root: DMatrix<f64>,
    pub lambda_rule: LambdaRule,
    pub fallback_delta: f64,
    pub solver: SolverConfig,
}

impl TrialCell {
    pub fn new(config: &ExperimentConfig, s: usize, o: usize) -> Result<Self> {
        let covariance_matrix = make_covariance(&config.covariance, config.p)?;
        let covariance_root = linalg::sym_sqrt(&covariance_matrix)?;
        Ok(Self::with_matrices(config, s, o, covariance_matrix, covariance_root))
    }

    fn with_matrices(config: &ExperimentConfig, s: usize, o: usize, cov: DMatrix<f64>, root: DMatrix<f64>) -> Self {
        TrialCell {
            n: config.n,
            p: config.p,
            s,
            o,
            sigma: config.sigma,
            amplitude: config.amplitude,
            outlier_magnitude: config.outlier_magnitude.unwrap_or(config.amplitude),
            index_rule: config.index_rule,
            covariance: config.covariance.clone(),
            covariance_matrix: cov,
            covariance_root: root,
            lambda_rule: config.lambda_rule,
            fallback_delta: config.fallback_delta,
            solver: config.solver,
        }
    }

    pub fn eps(&self) -> f64 {
        self.o as f64 / self.n as f64
    }
}

/// One Monte Carlo replication. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub o: usize,
    pub eps: f64,
    pub rep: usize,
    pub seed: u64,
    pub lambda_s: f64,
    pub lambda_o: f64,
    /// `‖Σ^{1/2}(β̂ − β*)‖₂`.
    pub err_mahalanobis: f64,
    pub err_l2: f64,
    pub err_l1: f64,
    pub theta_err_l2: f64,
    /// F1 score of the estimated support. Diagnostic only: convex penalized
    /// estimators cannot reliably recover the support under contamination.
    pub support_f1: f64,
    pub kkt_residual: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub runtime_ms: f64,
}

pub const CSV_COLUMNS: [&str; 18] = [
    "n",
    "p",
    "s",
    "o",
    "eps",
    "rep",
    "seed",
    "lambda_s",
    "lambda_o",
    "err_mahalanobis",
    "err_l2",
    "err_l1",
    "theta_err_l2",
    "support_f1",
    "kkt_residual",
    "sweeps",
    "converged",
    "runtime_ms",
];

impl TrialRecord {
    /// Equality on everything except wall-clock runtime.
    pub fn same_outcome(&self, other: &TrialRecord) -> bool {
        let mut a = self.clone();
        a.runtime_ms = other.runtime_ms;
        a == *other
    }
}

fn support_f1(estimate: &DVector<f64>, truth: &[usize]) -> f64 {
    let found: Vec<usize> = estimate.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, _)| j).collect();
    if found.is_empty() && truth.is_empty() {
        return 1.0;
    }
    let hits = found.iter().filter(|j| truth.contains(j)).count();
    2.0 * hits as f64 / (found.len() + truth.len()) as f64
}

/// Generates the cell's dataset from `seed`, resolves the penalties, fits by
/// coordinate descent and scores the fit against the ground truth.
pub fn run_trial(cell: &TrialCell, rep: usize, seed: u64) -> Result<TrialRecord> {
    let start = Instant::now();
    let mut rng = rng_from_seed(seed);
    let beta_star = make_beta(cell.p, cell.s, cell.amplitude)?;
    let contamination = ContaminationSpec {
        o: cell.o,
        mechanism: Mechanism::FixedShift {
            magnitude: cell.outlier_magnitude,
        },
        index_rule: cell.index_rule,
    };
    let data = model::generate(cell.n, cell.p, &cell.covariance, &beta_star, cell.sigma, &contamination, &mut rng)?;
    let (penalties, _) = resolve_penalties(
        &cell.lambda_rule,
        &data,
        Some(&cell.covariance_matrix),
        cell.sigma,
        cell.s,
        cell.o,
        cell.fallback_delta,
    )?;
    let fit = fit_cd(&data, &penalties, &cell.solver)?;
    let truth = data.truth.as_ref().expect("generated datasets carry ground truth");

    let diff = &fit.beta_hat - &truth.beta_star;
    Ok(TrialRecord {
        n: cell.n,
        p: cell.p,
        s: cell.s,
        o: cell.o,
        eps: cell.eps(),
        rep,
        seed,
        lambda_s: penalties.lambda_s(),
        lambda_o: penalties.lambda_o(),
        err_mahalanobis: (&cell.covariance_root * &diff).norm(),
        err_l2: diff.norm(),
        err_l1: l1_norm(&diff),
        theta_err_l2: (&fit.theta_hat - &truth.theta_star).norm(),
        support_f1: support_f1(&fit.beta_hat, &truth.support_s),
        kkt_residual: fit.kkt_residual,
        sweeps: fit.sweeps_used,
        converged: fit.converged,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub s: usize,
    pub o: usize,
    pub rep: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentRun {
    pub records: Vec<TrialRecord>,
    pub failures: Vec<TrialFailure>,
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub progress: bool,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    run_experiment_with(
        config,
        &RunOptions {
            threads: None,
            progress: true,
        },
    )
}

pub fn run_experiment_with(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentRun> {
    config.validate()?;
    let cov = make_covariance(&config.covariance, config.p)?;
    let root = linalg::sym_sqrt(&cov)?;
    let os = config.outlier_counts();

    let mut jobs = Vec::with_capacity(config.trial_count());
    for &s in &config.s_values {
        for &o in &os {
            let cell = TrialCell::with_matrices(config, s, o, cov.clone(), root.clone());
            for rep in 0..config.repetitions {
                jobs.push((cell.clone(), rep, derive_seed(config.master_seed, s, o, rep)));
            }
        }
    }

    let total = jobs.len();
    let done = AtomicUsize::new(0);
    let step = total.div_ceil(20).max(1);
    let work = || -> Vec<std::result::Result<TrialRecord, TrialFailure>> {
        jobs.par_iter()
            .map(|(cell, rep, seed)| {
                let out = run_trial(cell, *rep, *seed).map_err(|e| TrialFailure {
                    s: cell.s,
                    o: cell.o,
                    rep: *rep,
                    seed: *seed,
                    message: e.to_string(),
                });
                let k = done.fetch_add(1, Ordering::Relaxed) + 1;
                if options.progress && (k.is_multiple_of(step) || k == total) {
                    eprintln!("[experiment] {k}/{total} trials");
                }
                out
            })
            .collect()
    };
    let outcomes = match options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut run = ExperimentRun {
        notes: config.notes(),
        ..ExperimentRun::default()
    };
    for outcome in outcomes {
        match outcome {
            Ok(r) => run.records.push(r),
            Err(f) => {
                warn!("trial s={} o={} rep={} failed: {}", f.s, f.o, f.rep, f.message);
                run.failures.push(f);
            }
        }
    }
    run.records.sort_by_key(|r| (r.s, r.o, r.rep));
    Ok(run)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub s: usize,
    pub o: usize,
    pub eps: f64,
    pub count: usize,
    pub converged: usize,
    pub convergence_rate: f64,
    pub mean_err_l2: f64,
    pub std_err_l2: f64,
    /// `√mean(err_l2²)`.
    pub rmse_l2: f64,
    pub mean_err_mahalanobis: f64,
    pub std_err_mahalanobis: f64,
    pub rmse_mahalanobis: f64,
    pub lambda_s: f64,
    pub lambda_o: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cells: Vec<CellSummary>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl Summary {
    pub fn cell(&self, s: usize, o: usize) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.s == s && c.o == o)
    }
}

/// Mean, population standard deviation and root mean square.
fn moments(values: &[f64]) -> (f64, f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
    let rms = (values.iter().map(|v| v * v).sum::<f64>() / k).sqrt();
    (mean, var.sqrt(), rms)
}

/// Per-`(s, o)` statistics, sorted by `(s, o)`.
pub fn summarize(records: &[TrialRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::invalid("cannot summarize an empty record set"));
    }
    let mut groups: BTreeMap<(usize, usize), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.s, r.o)).or_default().push(r);
    }
    let cells = groups
        .into_iter()
        .map(|((s, o), rs)| {
            let l2: Vec<f64> = rs.iter().map(|r| r.err_l2).collect();
            let mh: Vec<f64> = rs.iter().map(|r| r.err_mahalanobis).collect();
            let (mean_l2, std_l2, rms_l2) = moments(&l2);
            let (mean_mh, std_mh, rms_mh) = moments(&mh);
            let converged = rs.iter().filter(|r| r.converged).count();
            CellSummary {
                s,
                o,
                eps: rs[0].eps,
                count: rs.len(),
                converged,
                convergence_rate: converged as f64 / rs.len() as f64,
                mean_err_l2: mean_l2,
                std_err_l2: std_l2,
                rmse_l2: rms_l2,
                mean_err_mahalanobis: mean_mh,
                std_err_mahalanobis: std_mh,
                rmse_mahalanobis: rms_mh,
                lambda_s: rs[0].lambda_s,
                lambda_o: rs[0].lambda_o,
            }
        })
        .collect();
    Ok(Summary { cells, notes: Vec::new() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Residual sum of squares.
    pub rss: f64,
    pub points: usize,
    /// The responses have zero variance; `r2` is set to 1 by convention.
    pub zero_variance: bool,
}

/// Ordinary least-squares line `y ≈ intercept + slope·x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::dims("line fit", xs.len(), ys.len()));
    }
    if xs.len() < 3 {
        return Err(Error::invalid(format!("a line fit needs at least 3 points, got {}", xs.len())));
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("line fit needs at least two distinct x values"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let tss: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let zero_variance = tss == 0.0;
    Ok(LineFit {
        slope,
        intercept,
        r2: if zero_variance { 1.0 } else { 1.0 - rss / tss },
        rss,
        points: xs.len(),
        zero_variance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsityLineFit {
    pub s: usize,
    #[serde(flatten)]
    pub fit: LineFit,
}

/// Least-squares line of `rmse_l2` against `ε` for one sparsity level.
pub fn linear_fit_sqrt_mse(summary: &Summary, s: usize) -> Result<LineFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = summary.cells.iter().filter(|c| c.s == s).map(|c| (c.eps, c.rmse_l2)).unzip();
    fit_line(&xs, &ys)
}

/// [`linear_fit_sqrt_mse`] for every sparsity level with at least 3 points.
pub fn line_fits(summary: &Summary) -> Vec<SparsityLineFit> {
    let mut ss: Vec<usize> = summary.cells.iter().map(|c| c.s).collect();
    ss.dedup();
    ss.into_iter()
        .filter_map(|s| linear_fit_sqrt_mse(summary, s).ok().map(|fit| SparsityLineFit { s, fit }))
        .collect()
}

pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    if header != CSV_COLUMNS {
        return Err(Error::invalid(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    r.deserialize().collect::<std::result::Result<Vec<_>, _>>().map_err(csv_err)
}

pub fn emit_summary_json(summary: &Summary, path: &Path) -> Result<()> {
    crate::io::write_json(summary, path)
}

pub fn emit_linefits_json(fits: &[SparsityLineFit], path: &Path) -> Result<()> {
    crate::io::write_json(fits, path)
}
