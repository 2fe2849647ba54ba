use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sdym_core::cli_report::{all_pass, run, to_jsonl, RunConfig, Suite};

/// Run self-dual Yang-Mills verification suites and write a JSON Lines report.
#[derive(Parser, Debug)]
#[command(name = "sdym", version)]
struct Args {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jet_order: Option<i32>,
    #[arg(long)]
    lambda_order: Option<usize>,
    /// Multiplies every tolerance.
    #[arg(long)]
    tolerance_scale: Option<f64>,
    /// Fixture JSON file (a list of fixture records).
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Record wall time per check.
    #[arg(long)]
    timings: bool,
}

fn load_config(args: &Args) -> Result<RunConfig, String> {
    let mut cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            RunConfig::from_json(&text).map_err(|e| e.to_string())?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.jet_order {
        cfg.jet_order = v;
    }
    if let Some(v) = args.lambda_order {
        cfg.lambda_order = v;
    }
    if let Some(v) = args.tolerance_scale {
        cfg.tolerance_scale = v;
    }
    if let Some(p) = &args.fixtures {
        cfg.fixtures = Some(p.clone());
    }
    cfg.timings |= args.timings;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match load_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("sdym: {e}");
            return ExitCode::from(2);
        }
    };
    let reports = match run(args.suite, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("sdym: {e}");
            return ExitCode::from(2);
        }
    };
    let text = to_jsonl(&reports);
    match &args.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("sdym: {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    eprintln!("sdym: {} checks, {} failed", reports.len(), failed);
    if all_pass(&reports) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
