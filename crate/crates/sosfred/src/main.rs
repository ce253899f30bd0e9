use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use sosfred::core::suites::{run_suite, SuiteName};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "sosfred", version, about = "Fredholm advisor for weighted singular integral operators with slowly oscillating shifts")]
struct Cli {
    /// JSON file overriding instance thresholds.
    #[arg(long, global = true)]
    thresholds: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the advisor and print the verdict JSON.
    Check { instance: PathBuf },
    /// Run a check suite (identities, probes, symbols) and print the report JSON.
    Suite { name: String, instance: Option<PathBuf> },
    /// Write the symbol n(xi, x) of one fiber as CSV.
    Symbol {
        instance: PathBuf,
        #[arg(long)]
        fiber: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4001)]
        samples: usize,
        /// Range of x as `lo,hi`.
        #[arg(long, value_parser = parse_range)]
        range: Option<(f64, f64)>,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err("lo must be below hi".into());
    }
    Ok((lo, hi))
}

fn load(path: &PathBuf, thresholds: &Option<PathBuf>) -> Result<sosfred::core::advisor::ProblemInstance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let t = match thresholds {
        Some(p) => Some(std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    sosfred::parse_instance_with(&text, t.as_deref()).with_context(|| format!("instance {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Check { instance } => {
            let inst = load(&instance, &cli.thresholds)?;
            let v = sosfred::check(&inst, Some(chrono::Utc::now().to_rfc3339()));
            println!("{}", sosfred::verdict_json(&v)?);
        }
        Cmd::Suite { name, instance } => {
            let name: SuiteName = name.parse()?;
            let inst = instance.map(|p| load(&p, &cli.thresholds)).transpose()?;
            let r = run_suite(name, inst.as_ref())?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        Cmd::Symbol { instance, fiber, out, samples, range } => {
            let inst = load(&instance, &cli.thresholds)?;
            let csv = sosfred::symbol_csv(&inst, &fiber, range, samples)?;
            std::fs::write(&out, csv).with_context(|| format!("writing {}", out.display()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
