use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod bench;
mod certify;
mod fit;
mod gen;

#[derive(Parser)]
#[command(name = "auglasso", version, about = "Outlier-robust sparse regression via the augmented Lasso")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic contaminated dataset.
    Gen(gen::Args),
    /// Fit the augmented Lasso to a dataset.
    Fit(fit::Args),
    /// Search a design for violations of TP, IP, ATP or estimate its RE constant.
    Certify(certify::Args),
    /// Run the Monte Carlo experiment grid.
    Bench(bench::Args),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Gen(a) => gen::run(a),
        Command::Fit(a) => fit::run(a),
        Command::Certify(a) => certify::run(a),
        Command::Bench(a) => bench::run(a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Writes pretty JSON to `path`, or to stdout when `path` is `None`.
pub(crate) fn emit_json<T: serde::Serialize>(value: &T, path: Option<&std::path::Path>) -> anyhow::Result<()> {
    match path {
        Some(p) => auglasso::io::write_json(value, p)?,
        None => {
            use std::io::Write;
            let text = serde_json::to_string_pretty(value)?;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                other => other?,
            }
        }
    }
    Ok(())
}
