//! `qmlab <kind> --spec s.json [--seed N] [--out dir] [--jobs K]`
//!
//! Exit status: 0 on success, 2 for invalid input, 3 for numerical failure.

mod run;
mod spec;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use run::{Context0, Outcome};
use serde_json::json;
use spec::ExperimentSpec;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Kind {
    Phi,
    Tau,
    Calabi,
    Reeb,
    CalS,
    Defect,
    Gg,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Phi => "phi",
            Kind::Tau => "tau",
            Kind::Calabi => "calabi",
            Kind::Reeb => "reeb",
            Kind::CalS => "cal_s",
            Kind::Defect => "defect",
            Kind::Gg => "gg",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "qmlab", version, about = "Quasi-morphism experiments from JSON spec files")]
struct Cli {
    kind: Kind,
    /// Experiment spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for `<kind>.json` and `<kind>.csv`; stdout only when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}


fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<qmlab_core::Error>() {
            return if core.is_validation() { 2 } else { 3 };
        }
    }
    2
}

fn load_spec(cli: &Cli) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(&cli.spec)
        .with_context(|| format!("reading spec {}", cli.spec.display()))?;
    let mut spec: ExperimentSpec = serde_json::from_str(&text)
        .with_context(|| format!("invalid spec {}", cli.spec.display()))?;
    if spec.kind() != cli.kind.name() {
        anyhow::bail!(
            "spec {} has kind '{}' but '{}' was requested",
            cli.spec.display(),
            spec.kind(),
            cli.kind.name()
        );
    }
    if let Some(seed) = cli.seed {
        match spec.seed_mut() {
            Some(slot) => *slot = Some(seed),
            None => anyhow::bail!("--seed does not apply to kind '{}'", spec.kind()),
        }
    }
    Ok(spec)
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            anyhow::bail!("--jobs must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    let spec = load_spec(cli)?;
    let base = cli
        .spec
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let Outcome { result, csv } = run::run(&spec, &Context0 { base })?;
    let record = json!({
        "kind": spec.kind(),
        "spec": spec,
        "version": env!("CARGO_PKG_VERSION"),
        "result": result,
    });
    let text = serde_json::to_string_pretty(&record)? + "\n";
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("creating {}", dir.display()))?;
            std::fs::write(dir.join(format!("{}.json", spec.kind())), &text)?;
            if let Some((header, rows)) = &csv {
                write_csv(&dir.join(format!("{}.csv", spec.kind())), header, rows)?;
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // core errors already embed their sources in the message
            let mut msg = e.to_string();
            for cause in e.chain().skip(1) {
                let c = cause.to_string();
                if !msg.ends_with(&c) {
                    msg = format!("{msg}: {c}");
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}
