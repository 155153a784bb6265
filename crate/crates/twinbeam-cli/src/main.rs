use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use twinbeam_cli::validate::Status;
use twinbeam_cli::{default_out_dir, run_scenario, CliError, Format, Overrides, SCENARIOS};

/// Reproduce figure data, scans and validation reports for the twin-beam model.
#[derive(Parser, Debug)]
#[command(name = "twinbeam", version)]
struct Args {
    /// fig2, fig3, fig4, fig5, figS1..figS5 or validate
    scenario: String,
    /// Flat TOML file with the same keys as the flags (underscored)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    /// start:stop:count in 2κL
    #[arg(long)]
    length_grid: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_traj: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; defaults to $TWINBEAM_OUT, then ./twinbeam-out
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

fn run(args: Args) -> Result<(), CliError> {
    let file = match &args.config {
        Some(p) => Overrides::from_file(p)?,
        None => Overrides::default(),
    };
    let flags = Overrides {
        gamma: args.gamma,
        kappa: args.kappa,
        g: args.g,
        length_grid: args.length_grid,
        alpha: args.alpha,
        seed: args.seed,
        n_traj: args.n_traj,
        threads: args.threads,
    };
    let out = args.out.unwrap_or_else(default_out_dir);
    let outcome = run_scenario(&args.scenario, &file.overlay(flags), &out, args.format);
    let (result, files) = match outcome {
        Ok(done) => done,
        Err(CliError::Validation(failed)) => {
            eprintln!("see {} for the full report", out.join("validate_manifest.json").display());
            return Err(CliError::Validation(failed));
        }
        Err(e) => return Err(e),
    };
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    for s in &result.suites {
        let tag = match s.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Info => "info",
        };
        println!("{tag:4} {:28} {:>12.4e} (threshold {:.1e})  {}", s.name, s.metric, s.threshold, s.detail);
    }
    println!("wrote {} files to {}", files.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if !SCENARIOS.contains(&args.scenario.as_str()) {
        eprintln!("error: unknown scenario {:?}; expected one of {}", args.scenario, SCENARIOS.join(", "));
        return ExitCode::from(1);
    }
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
