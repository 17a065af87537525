use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use symtoep::krylov::{DEFAULT_MAXIT, DEFAULT_TOL};
use symtoep_cli::config::{
    Example, MatvecChoice, MgOverrides, MinresStop, PrecondKind, RhsKind, RunConfig, SolverKind, DEFAULT_SEED,
};
use symtoep_cli::export::{export_spectrum, SpectrumTarget};
use symtoep_cli::report::{write_rows, OutputFormat};
use symtoep_cli::runner::run_all;
use symtoep_cli::verify::{run_suite, Suite, VerifyOptions};
use symtoep_cli::CliResult;

/// Preconditioned Krylov solves of flip-symmetrized Toeplitz systems.
///
/// Runs every (solver, preconditioner) pair over the given sizes. Worker
/// parallelism is capped by SYMTOEP_THREADS.
#[derive(Debug, Parser)]
#[command(name = "symtoep", version)]
struct Args {
    #[arg(long, value_enum, default_value_t = Example::Ex1)]
    example: Example,

    /// Unknowns per axis; repeatable.
    #[arg(long = "n", value_name = "N")]
    sizes: Vec<usize>,

    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long = "dplus")]
    d_plus: Option<f64>,
    #[arg(long = "dminus")]
    d_minus: Option<f64>,
    #[arg(long = "eplus")]
    e_plus: Option<f64>,
    #[arg(long = "eminus")]
    e_minus: Option<f64>,

    /// Repeatable; defaults to minres.
    #[arg(long, value_enum)]
    solver: Vec<SolverKind>,

    /// Repeatable; defaults to ar.
    #[arg(long, value_enum)]
    precond: Vec<PrecondKind>,

    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAXIT)]
    maxit: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Distribution of the ex1 right-hand side.
    #[arg(long, value_enum, default_value_t = RhsKind::Uniform)]
    rhs: RhsKind,

    #[arg(long, value_enum, default_value_t = MinresStop::RhsScaled)]
    minres_stop: MinresStop,

    /// Product kernel for A; `auto` is `direct` for ex1 and `fft` otherwise.
    #[arg(long, value_enum, default_value_t = MatvecChoice::Auto)]
    matvec: MatvecChoice,

    /// Pre- and post-smoothing sweeps.
    #[arg(long)]
    mg_sweeps: Option<usize>,
    #[arg(long)]
    mg_omega: Option<f64>,
    #[arg(long)]
    mg_coarsest: Option<usize>,

    /// Output file; stdout when omitted (verify writes `verify-<suite>.json`).
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    format: OutputFormat,

    /// Run an acceptance suite instead of a solve grid.
    #[arg(long, value_enum)]
    verify: Option<Suite>,

    /// Scales ε in the spectral inclusion checks (fault injection).
    #[arg(long, default_value_t = 1.0)]
    epsilon_scale: f64,

    #[arg(long, default_value_t = 1000)]
    fuzz_cases: usize,

    /// Write the dense preconditioned spectrum of the first size to this path.
    #[arg(long)]
    export_spectrum: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = SpectrumTarget::Symmetrized)]
    spectrum_target: SpectrumTarget,
}

impl Args {
    fn configs(&self) -> Vec<RunConfig> {
        let solvers = if self.solver.is_empty() { vec![SolverKind::Minres] } else { self.solver.clone() };
        let preconds = if self.precond.is_empty() { vec![PrecondKind::Ar] } else { self.precond.clone() };
        let sizes = if self.sizes.is_empty() { vec![1023] } else { self.sizes.clone() };
        let mut out = Vec::new();
        for &solver in &solvers {
            for &precond in &preconds {
                let mut cfg = RunConfig::new(self.example, sizes.clone(), solver, precond);
                cfg.alpha = self.alpha;
                cfg.beta = self.beta;
                cfg.d_plus = self.d_plus;
                cfg.d_minus = self.d_minus;
                cfg.e_plus = self.e_plus;
                cfg.e_minus = self.e_minus;
                cfg.tol = self.tol;
                cfg.maxit = self.maxit;
                cfg.seed = self.seed;
                cfg.rhs = self.rhs;
                cfg.minres_stop = self.minres_stop;
                cfg.matvec = self.matvec;
                cfg.mg = MgOverrides {
                    sweeps: self.mg_sweeps,
                    omega: self.mg_omega,
                    coarsest: self.mg_coarsest,
                };
                out.push(cfg);
            }
        }
        out
    }
}

fn output(path: Option<&PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn verify(args: &Args, suite: Suite) -> CliResult<bool> {
    let opts = VerifyOptions {
        maxit: args.maxit,
        epsilon_scale: args.epsilon_scale,
        fuzz_cases: args.fuzz_cases,
        seed: args.seed,
    };
    let report = run_suite(suite, &opts);
    for outcome in &report.outcomes {
        println!("{}", outcome.summary_line());
        for line in &outcome.evidence {
            println!("       {line}");
        }
    }
    let path = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("verify-{}.json", suite.to_possible_value().expect("named").get_name())));
    report.write_json(&path)?;
    println!("report written to {}", path.display());
    Ok(report.passed)
}

use clap::ValueEnum;

fn main_inner(args: &Args) -> CliResult<bool> {
    if let Some(suite) = args.verify {
        return verify(args, suite);
    }
    let configs = args.configs();
    if let Some(path) = &args.export_spectrum {
        let lines = export_spectrum(&configs[0], args.spectrum_target, path)?;
        eprintln!("wrote {lines} eigenvalues to {}", path.display());
        return Ok(true);
    }
    let rows = run_all(&configs)?;
    write_rows(output(args.out.as_ref())?, &rows, args.format)?;
    Ok(true)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match main_inner(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("symtoep: {e}");
            ExitCode::from(2)
        }
    }
}
