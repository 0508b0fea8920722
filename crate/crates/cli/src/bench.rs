use std::path::PathBuf;

use anyhow::{Context, Result};
use auglasso::experiment::{self, RunOptions};
use auglasso::ExperimentConfig;
use serde::Serialize;

#[derive(clap::Args)]
pub struct Args {
    /// TOML file mirroring the experiment config; omitted keys take the defaults
    /// (n = 1000, p = 100, s in {5, 15, 25}, o = 0..=250 step 5, 20 repetitions).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for records.csv, summary.json and linefits.json.
    #[arg(long)]
    out: PathBuf,
    /// Override the number of repetitions.
    #[arg(long)]
    reps: Option<usize>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    #[serde(flatten)]
    summary: &'a experiment::Summary,
    failures: &'a [experiment::TrialFailure],
}

pub fn load_config(path: Option<&std::path::Path>) -> Result<ExperimentConfig> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

pub fn run(a: Args) -> Result<()> {
    let mut config = load_config(a.config.as_deref())?;
    if let Some(r) = a.reps {
        config.repetitions = r;
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let run = experiment::run_experiment_with(
        &config,
        &RunOptions {
            threads: a.threads,
            progress: !a.quiet,
        },
    )?;
    for note in &run.notes {
        eprintln!("note: {note}");
    }
    if !run.failures.is_empty() {
        eprintln!("{} trials failed; see summary.json", run.failures.len());
    }
    experiment::emit_csv(&run.records, &a.out.join("records.csv"))?;
    if run.records.is_empty() {
        anyhow::bail!("every trial failed");
    }
    let mut summary = experiment::summarize(&run.records)?;
    summary.notes = run.notes.clone();
    crate::emit_json(
        &SummaryFile {
            summary: &summary,
            failures: &run.failures,
        },
        Some(&a.out.join("summary.json")),
    )?;
    let fits = experiment::line_fits(&summary);
    experiment::emit_linefits_json(&fits, &a.out.join("linefits.json"))?;
    for f in &fits {
        eprintln!(
            "s = {:>3}: rmse = {:.4} + {:.4}·eps  (r² = {:.4})",
            f.s, f.fit.intercept, f.fit.slope, f.fit.r2
        );
    }
    Ok(())
}
