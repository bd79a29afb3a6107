use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use gvr_cli::{bench, fixtures, identify, stability, Settings, Table};

#[derive(Parser)]
#[command(version, about = "Stability, accuracy and timing experiments for Givens-vector kernel identification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` file; flags below override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output CSV path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Both instability examples against extended-precision references.
    Fixtures,
    /// Errors of every method against the dense reference over λ.
    Stability,
    /// Time per criterion evaluation over N.
    Bench,
    /// Monte Carlo model fits after hyper-parameter selection.
    Identify,
}

fn settings(cli: &Cli) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &cli.config {
        s.apply_file(path)?;
    }
    if let Some(v) = cli.seed {
        s.seed = v;
    }
    if let Some(v) = cli.threads {
        s.threads = v;
    }
    if cli.n.is_some() {
        s.n = cli.n;
    }
    if cli.trials.is_some() {
        s.trials = cli.trials;
    }
    for kv in &cli.overrides {
        let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
        s.set(k, v)?;
    }
    Ok(s)
}

fn emit(table: &Table, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            table.write_to(&mut f)?;
            f.flush()?;
        }
        None => table.write_to(&mut io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool> {
    let s = settings(cli)?;
    match cli.command {
        Command::Fixtures => {
            let rows = fixtures::run();
            emit(&fixtures::table(&rows, s.provenance("fixtures", 5, 1)), &cli.out)?;
            Ok(rows.iter().all(|r| r.pass() != Some(false)))
        }
        Command::Stability => {
            let n = s.n.unwrap_or(stability::DEFAULT_N);
            let trials = s.trials.unwrap_or(stability::DEFAULT_TRIALS);
            let records = stability::run(&s, n, trials)?;
            emit(&stability::table(&records, &s, s.provenance("stability", n, trials)), &cli.out)?;
            Ok(true)
        }
        Command::Bench => {
            let records = bench::run(&s)?;
            emit(&bench::table(&records, s.provenance("bench", 0, 0)), &cli.out)?;
            let mut failed: Vec<(String, usize)> =
                records.iter().filter(|r| r.failed).map(|r| (r.method.to_string(), r.n)).collect();
            failed.dedup();
            for (m, n) in failed {
                eprintln!("note: {m} failed at N={n}; its time measures the failure path");
            }
            let checks = bench::checks(&records, &s);
            for c in &checks {
                eprintln!("{} {} (measured {:.3})", if c.pass { "PASS" } else { "FAIL" }, c.label, c.ratio);
            }
            Ok(checks.iter().all(|c| c.pass))
        }
        Command::Identify => {
            let n = s.n.unwrap_or(identify::DEFAULT_N);
            let trials = s.trials.unwrap_or(identify::DEFAULT_TRIALS);
            let records = identify::run(&s, n, trials)?;
            emit(&identify::table(&records, &s, s.provenance("identify", n, trials)), &cli.out)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
