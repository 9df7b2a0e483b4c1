use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lckit_cli::{explain, run, Report, RunConfig, Suite, DEFAULT_OUT_DIR, OUT_DIR_ENV};

#[derive(Parser)]
#[command(name = "lckit", version, about = "Verification suites for LCK structures on linear Hopf manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites selected by a config file and write a JSON report.
    Run(RunArgs),
    /// Summarize a JSON report.
    Explain { report: PathBuf },
    /// List suite names in execution order.
    ListSuites,
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long = "quadrature-n")]
    quadrature_n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "tol-jet")]
    tol_jet: Option<f64>,
    #[arg(long = "tol-quad")]
    tol_quad: Option<f64>,
    /// Report path; defaults to `<out dir>/<config stem>.report.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Default output directory.
    #[arg(long = "out-dir", env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    out_dir: PathBuf,
}

fn report_path(args: &RunArgs) -> PathBuf {
    if let Some(p) = &args.out {
        return p.clone();
    }
    let stem = args.config.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    args.out_dir.join(format!("{stem}.report.json"))
}

fn write_report(path: &Path, report: &Report) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, report.to_json() + "\n")
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let mut config = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(v) = args.samples {
        config.samples = v;
    }
    if let Some(v) = args.quadrature_n {
        config.quadrature.n = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    if let Some(v) = args.tol_jet {
        config.tolerances.jet = v;
    }
    if let Some(v) = args.tol_quad {
        config.tolerances.quad = v;
    }
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let report = run(&config);
    let path = report_path(&args);
    if let Err(e) = write_report(&path, &report) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return ExitCode::from(2);
    }
    print!("{}", explain(&report));
    println!("report written to {}", path.display());
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cmd_explain(path: &Path) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    match Report::from_json(&text) {
        Ok(r) => {
            print!("{}", explain(&r));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {} is not a report: {e}", path.display());
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Explain { report } => cmd_explain(&report),
        Command::ListSuites => {
            for s in Suite::ALL {
                println!("{:<20} {}", s.name(), s.description());
            }
            ExitCode::SUCCESS
        }
    }
}
