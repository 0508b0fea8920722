use std::path::PathBuf;

use anyhow::{Context, Result};
use auglasso::{generate, io, make_beta, rng_from_seed, ContaminationSpec, CovarianceModel, IndexRule, Mechanism};
use clap::ValueEnum;

#[derive(Clone, Copy, ValueEnum)]
enum MechanismArg {
    Fixed,
    SignFlip,
}

#[derive(Clone, Copy, ValueEnum)]
enum IndexArg {
    First,
    Random,
}

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// Number of nonzero coefficients.
    #[arg(long, default_value_t = 5)]
    s: usize,
    /// Number of contaminated responses.
    #[arg(long, default_value_t = 0)]
    o: usize,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Value of the nonzero coefficients.
    #[arg(long, default_value_t = 10.0)]
    amplitude: f64,
    /// Outlier shift on the θ scale (y moves by √n times this); defaults to the amplitude.
    #[arg(long)]
    magnitude: Option<f64>,
    #[arg(long, value_enum, default_value_t = MechanismArg::Fixed)]
    mechanism: MechanismArg,
    #[arg(long, value_enum, default_value_t = IndexArg::First)]
    index_rule: IndexArg,
    /// identity, ar1:<rho> or equi:<rho>
    #[arg(long, default_value = "identity")]
    covariance: CovarianceModel,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dataset CSV (columns x1..xp, y).
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth JSON sidecar; defaults to the CSV path with a .json extension.
    #[arg(long)]
    meta: Option<PathBuf>,
}

pub fn run(a: Args) -> Result<()> {
    let magnitude = a.magnitude.unwrap_or(a.amplitude);
    let contamination = ContaminationSpec {
        o: a.o,
        mechanism: match a.mechanism {
            MechanismArg::Fixed => Mechanism::FixedShift { magnitude },
            MechanismArg::SignFlip => Mechanism::SignFlipShift { magnitude },
        },
        index_rule: match a.index_rule {
            IndexArg::First => IndexRule::FirstO,
            IndexArg::Random => IndexRule::Random,
        },
    };
    let beta = make_beta(a.p, a.s, a.amplitude)?;
    let data = generate(a.n, a.p, &a.covariance, &beta, a.sigma, &contamination, &mut rng_from_seed(a.seed))?;
    let meta = a.meta.unwrap_or_else(|| a.out.with_extension("json"));
    io::write_dataset(&data, Some(a.seed), &a.out, &meta)
        .with_context(|| format!("writing {} and {}", a.out.display(), meta.display()))?;
    eprintln!("wrote {} ({}x{}) and {}", a.out.display(), a.n, a.p, meta.display());
    Ok(())
}
