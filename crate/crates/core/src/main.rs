use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use kaisar::arith::valid::Backend;
use kaisar::driver::{exit_code, run_files, Mode, Options};
use kaisar::parser::{const_fold, parse_term};

/// Check Kaisar proofs of hybrid-game strategies.
#[derive(Parser, Debug)]
#[command(name = "kaisar", version)]
struct Cli {
    /// Proof documents; each file is one proof named after its stem.
    #[arg(required = true)]
    files: Vec<PathBuf>,

    /// Print the theorem `[α]φ` each proof establishes.
    #[arg(long, group = "mode")]
    conclusion: bool,

    /// Ask whether each proof establishes this formula.
    #[arg(long, value_name = "FORMULA", group = "mode")]
    proves: Option<String>,

    /// Print model, proof and `using` line counts instead of checking.
    #[arg(long, group = "mode")]
    metrics: bool,

    /// External SMT solver for nonlinear obligations (default: $KAISAR_SOLVER).
    #[arg(long, value_name = "PATH")]
    solver: Option<PathBuf>,

    /// Default margin for `by guard`, e.g. `1/10`.
    #[arg(long, value_name = "RATIONAL", value_parser = parse_rational)]
    delta: Option<kaisar::ast::Rat>,

    /// Print the SSA form of each document.
    #[arg(long)]
    dump_ssa: bool,

    /// Print each label's variable snapshot.
    #[arg(long)]
    dump_labels: bool,

    /// Print every arithmetic obligation and its verdict.
    #[arg(long)]
    dump_obligations: bool,

    /// Report obligation times on standard error.
    #[arg(long)]
    timings: bool,
}

fn parse_rational(s: &str) -> Result<kaisar::ast::Rat, String> {
    let t = parse_term(s).map_err(|d| d.message)?;
    match const_fold(&t) {
        Some(r) if r > kaisar::ast::Rat::from_integer(0.into()) => Ok(r),
        Some(_) => Err("the margin must be positive".into()),
        None => Err(format!("`{}` is not a rational constant", s)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mode = match (&cli.proves, cli.conclusion, cli.metrics) {
        (Some(f), _, _) => Mode::Proves(f.clone()),
        (None, true, _) => Mode::Conclusion,
        (None, false, true) => Mode::Metrics,
        _ => Mode::Check,
    };
    let mut backend = Backend::default();
    if cli.solver.is_some() {
        backend.solver = cli.solver.clone();
    }
    let opts = Options {
        mode,
        backend,
        delta: cli.delta.clone(),
        dump_ssa: cli.dump_ssa,
        dump_labels: cli.dump_labels,
        dump_obligations: cli.dump_obligations,
        timings: cli.timings,
    };
    let reports = run_files(&cli.files, &opts);
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    for r in &reports {
        let _ = out.write_all(r.stdout.as_bytes());
        let _ = err.write_all(r.stderr.as_bytes());
    }
    ExitCode::from(exit_code(&reports) as u8)
}
