use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use det2_core::harness::{emit_report, load_cases, run_suites, Suite, SuiteConfig};

#[derive(Parser)]
#[command(name = "det2", version, about = "Randomized verification of the Det2 line bundle identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a JSON report.
    Verify {
        /// Comma-separated suite names, or `all`.
        #[arg(long, default_value = "all")]
        suites: String,
        /// Sets both halves of the polarization.
        #[arg(long, default_value_t = 6)]
        dim: usize,
        #[arg(long)]
        dim_plus: Option<usize>,
        #[arg(long)]
        dim_minus: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trials: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol_exact: f64,
        #[arg(long, default_value_t = 1e-5)]
        tol_fd: f64,
        #[arg(long, default_value_t = 1e-3)]
        fd_step: f64,
        /// Report path; the summary always goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-evaluate a stored worst case (a case file or a whole report).
    ShowCase {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn verify(cfg: SuiteConfig, out: Option<PathBuf>) -> Result<bool, det2_core::Error> {
    let report = run_suites(&cfg)?;
    for s in &report.suites {
        println!(
            "{:<12} {:<4} max_residual {:.3e} tolerance {:.3e} ({:.2}s)",
            s.name.name(),
            if s.pass { "PASS" } else { "FAIL" },
            s.max_residual,
            s.tolerance,
            s.wall_time
        );
        for c in s.checks.iter().filter(|c| !c.pass) {
            let tag = if c.enforced { "failed" } else { "diagnostic" };
            println!("    {tag}: {} residual {:.3e} > {:.3e}", c.name, c.max_residual, c.tolerance);
        }
        for e in &s.errors {
            println!("    error: {e}");
        }
    }
    println!("overall {}", if report.pass { "PASS" } else { "FAIL" });
    if let Some(path) = out {
        emit_report(&report, &path)?;
    }
    Ok(report.pass)
}

fn show_case(input: PathBuf) -> Result<bool, det2_core::Error> {
    let cases = load_cases(&input)?;
    for case in &cases {
        println!(
            "{} trial {} (seed {}, {}+{})",
            case.suite,
            case.trial,
            case.seed,
            case.pol.n_plus(),
            case.pol.n_minus()
        );
        let fresh = case.evaluate()?;
        for (name, value) in &fresh {
            match case.residuals.get(name) {
                Some(old) => println!("    {name:<36} {value:.6e} (recorded {old:.6e})"),
                None => println!("    {name:<36} {value:.6e}"),
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify { suites, dim, dim_plus, dim_minus, trials, seed, tol_exact, tol_fd, fd_step, out } => {
            match Suite::parse_list(&suites) {
                Ok(suites) => {
                    let cfg = SuiteConfig {
                        dim_plus: dim_plus.unwrap_or(dim),
                        dim_minus: dim_minus.unwrap_or(dim),
                        trials,
                        seed,
                        tol_exact,
                        tol_fd,
                        fd_step,
                        suites,
                    };
                    verify(cfg, out)
                }
                Err(e) => Err(e),
            }
        }
        Command::ShowCase { input } => show_case(input),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
