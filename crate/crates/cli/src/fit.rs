use std::path::PathBuf;

use anyhow::{bail, Result};
use auglasso::experiment::resolve_penalties;
use auglasso::io::{self, DatasetMeta};
use auglasso::{fit, Algorithm, LambdaRule, SolverConfig};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Cd,
    Prox,
}

#[derive(clap::Args)]
pub struct Args {
    /// Dataset CSV whose last column is the response.
    #[arg(long)]
    data: PathBuf,
    /// Optional ground-truth sidecar written by `gen`.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// theorem3[:delta], experiment, empirical[:delta] or fixed:<lambda>[,<lambda_o>]
    #[arg(long, default_value = "theorem3")]
    lambda_rule: LambdaRule,
    /// Noise level for rules that need one; defaults to the sidecar value, else 1.
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Sparsity for the experiment rule; defaults to the sidecar value.
    #[arg(long)]
    s: Option<usize>,
    /// Outlier count for the experiment rule; defaults to the sidecar value.
    #[arg(long)]
    o: Option<usize>,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Cd)]
    algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 10_000)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 1e-8)]
    kkt_tol: f64,
    /// Output JSON; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct FitOutput<'a> {
    lambda_rule: String,
    lambda_s: f64,
    lambda_o: f64,
    #[serde(flatten)]
    fit: &'a auglasso::FitResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    err_l2: Option<f64>,
}

pub fn run(a: Args) -> Result<()> {
    let data = io::read_dataset(&a.data, a.meta.as_deref())?;
    let meta: Option<DatasetMeta> = a.meta.as_deref().map(io::read_json).transpose()?;
    let noise_sigma = a.noise_sigma.or(data.sigma_hint).unwrap_or(1.0);
    let s = a.s.or(meta.as_ref().map(|m| m.s));
    let o = a.o.or(meta.as_ref().map(|m| m.o));
    let (s, o) = match (a.lambda_rule, s, o) {
        (LambdaRule::Experiment, None, _) | (LambdaRule::Experiment, _, None) => {
            bail!("the experiment rule needs --s and --o (or a sidecar that records them)")
        }
        (_, s, o) => (s.unwrap_or(0), o.unwrap_or(0)),
    };
    let (penalties, used) = resolve_penalties(&a.lambda_rule, &data, None, noise_sigma, s, o, 0.1)?;
    if used != a.lambda_rule {
        log::warn!("lambda rule {} is undefined here; used {used}", a.lambda_rule);
    }
    let config = SolverConfig {
        algorithm: match a.algorithm {
            AlgorithmArg::Cd => Algorithm::CoordinateDescent,
            AlgorithmArg::Prox => Algorithm::ProximalGradient,
        },
        max_sweeps: a.max_sweeps,
        kkt_tol: a.kkt_tol,
        ..SolverConfig::default()
    };
    let result = fit(&data, &penalties, &config)?;
    if !result.converged {
        log::warn!("solver stopped after {} sweeps without reaching the KKT tolerance", result.sweeps_used);
    }
    let err_l2 = data.truth.as_ref().map(|t| (&result.beta_hat - &t.beta_star).norm());
    let out = FitOutput {
        lambda_rule: used.to_string(),
        lambda_s: penalties.lambda_s(),
        lambda_o: penalties.lambda_o(),
        fit: &result,
        err_l2,
    };
    crate::emit_json(&out, a.out.as_deref())
}
