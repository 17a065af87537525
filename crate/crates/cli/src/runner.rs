//! Builds problem instances and preconditioners and runs the Krylov solves.

use std::time::Instant;

use rayon::prelude::*;
use symtoep::circulant::{self, BlockCirculant2D, Combine};
use symtoep::direct::{BandedCholesky, DenseCholesky, ToeplitzSpdSolver};
use symtoep::krylov::{gmres_right, lsqr, minres, SolveOptions, SolveReport};
use symtoep::multigrid::{GridHierarchy, VCycleConfig};
use symtoep::operator::Identity;
use symtoep::problems::{banded_am, example1_with_rhs, example2, example3, ProblemInstance};
use symtoep::symbol::fourier_coeffs;
use symtoep::toeplitz::{flip, Symmetrized};
use symtoep::{Preconditioner, ToeplitzOperator};

use crate::config::{Example, PrecondKind, RunConfig, SolverKind};
use crate::error::{CliError, CliResult};
use crate::report::ResultRow;

/// Environment variable capping the worker pool size.
pub const THREADS_ENV: &str = "SYMTOEP_THREADS";

/// Widest symmetric band factored with banded Cholesky.
const MAX_DIRECT_BAND: usize = 64;

/// Relative size below which a lag counts as zero when detecting a band.
const BAND_DROP_TOL: f64 = 1e-14;

pub struct Prepared {
    pub instance: ProblemInstance,
    pub preconditioner: Box<dyn Preconditioner>,
    pub vcycle: Option<VCycleConfig>,
    /// Building `A` and the right-hand side.
    pub assembly_seconds: f64,
    /// Computing coefficients of the preconditioner's matrix (the `A_M` entries).
    pub coefficient_seconds: f64,
    /// Factorizations, circulant spectra and multigrid hierarchies.
    pub setup_seconds: f64,
}

pub fn build_instance(cfg: &RunConfig, n: usize) -> CliResult<ProblemInstance> {
    let mut inst = match cfg.example {
        Example::Ex1 => example1_with_rhs(n, cfg.seed, cfg.rhs.into())?,
        Example::Ex2 => {
            let (alpha, d_plus, d_minus) = cfg.example2_params();
            example2(n, alpha, d_plus, d_minus)?
        }
        Example::Ex3 => example3(n, cfg.example3_params())?,
    };
    let kernel = cfg.matvec_kernel();
    if inst.operator.kernel() != kernel {
        inst.operator = inst.operator.with_kernel(kernel)?;
    }
    Ok(inst)
}

/// Builds the instance and preconditioner for size `n`.
pub fn prepare(cfg: &RunConfig, n: usize) -> CliResult<Prepared> {
    let t = Instant::now();
    let instance = build_instance(cfg, n)?;
    let assembly_seconds = t.elapsed().as_secs_f64();
    let (preconditioner, vcycle, coefficient_seconds, setup_seconds) =
        build_preconditioner(cfg, &instance)?;
    Ok(Prepared {
        instance,
        preconditioner,
        vcycle,
        assembly_seconds,
        coefficient_seconds,
        setup_seconds,
    })
}

type Built = (Box<dyn Preconditioner>, Option<VCycleConfig>, f64, f64);

fn build_preconditioner(cfg: &RunConfig, inst: &ProblemInstance) -> CliResult<Built> {
    let op = &inst.operator;
    let t = Instant::now();
    // Matrix the preconditioner approximates, when its entries must be computed.
    let coefficient_matrix = match cfg.precond {
        PrecondKind::AmExact => Some(absolute_value_matrix(inst)?),
        PrecondKind::MgAm if cfg.example == Example::Ex1 => Some(absolute_value_matrix(inst)?),
        PrecondKind::AmBanded | PrecondKind::MgAm => {
            let alpha = inst.meta.alpha.expect("fractional problem carries α");
            Some(banded_am(&inst.symbol.modulus(), op.size(), alpha)?.operator)
        }
        _ => None,
    };
    let coefficient_seconds = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mut vcycle = None;
    let p: Box<dyn Preconditioner> = match cfg.precond {
        PrecondKind::None => Box::new(Identity(op.size())),
        PrecondKind::Ar => exact_spd(&op.symmetric_part()?)?,
        PrecondKind::AmExact | PrecondKind::AmBanded => {
            exact_spd(coefficient_matrix.as_ref().expect("coefficients computed"))?
        }
        PrecondKind::CircStrang => Box::new(circulant::strang(op)?),
        PrecondKind::CircOptimal => Box::new(circulant::optimal(op)?),
        PrecondKind::CircSuperoptimal => Box::new(circulant::superoptimal(op)?),
        PrecondKind::CircAbsStrang => Box::new(circulant::strang(op)?.absolute_value()),
        PrecondKind::CircAbsOptimal => Box::new(circulant::optimal(op)?.absolute_value()),
        PrecondKind::CircAbsSuperoptimal => Box::new(circulant::superoptimal(op)?.absolute_value()),
        PrecondKind::BlockCirc | PrecondKind::BlockCircAbs => {
            let f = inst.factors.as_ref().ok_or_else(|| {
                CliError::Config("block circulants need a Kronecker-structured problem".into())
            })?;
            let combine = if cfg.precond == PrecondKind::BlockCirc {
                Combine::Nonsymmetric
            } else {
                Combine::Absolute
            };
            Box::new(BlockCirculant2D::strang(&f.lx, &f.ly, combine)?)
        }
        PrecondKind::MgA | PrecondKind::MgAr | PrecondKind::MgAm => {
            let vc = cfg.vcycle_config();
            vcycle = Some(vc);
            let target = match cfg.precond {
                PrecondKind::MgA => op.clone(),
                PrecondKind::MgAr => op.symmetric_part()?,
                _ => coefficient_matrix.expect("coefficients computed"),
            };
            Box::new(GridHierarchy::build(&target, vc)?)
        }
    };
    Ok((p, vcycle, coefficient_seconds, t.elapsed().as_secs_f64()))
}

/// `A_n(|f|)` from quadrature coefficients, symmetrized against rounding.
fn absolute_value_matrix(inst: &ProblemInstance) -> CliResult<ToeplitzOperator> {
    let dims = inst.operator.dims().to_vec();
    let coeffs = fourier_coeffs(&inst.symbol.modulus(), &dims, 8)?;
    let sym = ToeplitzOperator::from_coeffs(coeffs.map(|_, z| num_complex::Complex64::new(z.re, 0.0)))?;
    Ok(sym.symmetric_part()?)
}

/// Exact solve with a symmetric positive definite Toeplitz matrix.
fn exact_spd(s: &ToeplitzOperator) -> CliResult<Box<dyn Preconditioner>> {
    if s.levels() == 1 {
        let n = s.size();
        let scale = s.lag(0).abs();
        let band = (0..n as isize)
            .rev()
            .find(|&k| s.lag(k).abs() > BAND_DROP_TOL * scale)
            .unwrap_or(0) as usize;
        if band <= MAX_DIRECT_BAND {
            return Ok(Box::new(BandedCholesky::from_symmetric_toeplitz(s, band)?));
        }
        return Ok(Box::new(ToeplitzSpdSolver::new(s)?));
    }
    let dense = s.to_dense().map_err(|e| {
        CliError::Config(format!("exact two-level preconditioner unavailable ({e}); use mg-ar"))
    })?;
    Ok(Box::new(DenseCholesky::new(dense)?))
}

/// Runs the configured solver. MINRES sees `Y A x = Y b`; GMRES and LSQR see `A x = b`.
pub fn solve(cfg: &RunConfig, prepared: &Prepared) -> CliResult<SolveReport> {
    let inst = &prepared.instance;
    let opts = SolveOptions::default()
        .with_tol(cfg.tol)
        .with_maxit(cfg.maxit)
        .with_minres_stopping(cfg.minres_stop.into());
    let p = prepared.preconditioner.as_ref();
    let report = match cfg.solver {
        SolverKind::Minres => {
            let yb = flip(inst.operator.dims(), &inst.rhs)?;
            minres(&Symmetrized::new(&inst.operator), p, &yb, &opts)?
        }
        SolverKind::Gmres => gmres_right(&inst.operator, p, &inst.rhs, &opts)?,
        SolverKind::Lsqr => lsqr(&inst.operator, p, &inst.rhs, &opts)?,
    };
    Ok(report)
}

pub fn run_one(cfg: &RunConfig, n: usize) -> CliResult<ResultRow> {
    let prepared = prepare(cfg, n)?;
    let report = solve(cfg, &prepared)?;
    Ok(ResultRow::new(cfg, n, &prepared, &report))
}

/// All sizes of one configuration, in size order.
pub fn run(cfg: &RunConfig) -> CliResult<Vec<ResultRow>> {
    run_all(std::slice::from_ref(cfg))
}

/// Every `(config, size)` pair; all configs are validated before any compute.
/// Rows follow config order, then size order, regardless of completion order.
pub fn run_all(cfgs: &[RunConfig]) -> CliResult<Vec<ResultRow>> {
    for cfg in cfgs {
        cfg.validate()?;
    }
    let jobs: Vec<(&RunConfig, usize)> = cfgs
        .iter()
        .flat_map(|c| c.sizes.iter().map(move |&n| (c, n)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap())
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    pool.install(|| jobs.par_iter().map(|&(c, n)| run_one(c, n)).collect())
}

/// Worker count: `SYMTOEP_THREADS` when set to a positive integer, else all cores.
pub fn thread_cap() -> usize {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(cores)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_ar_is_tridiagonal() {
        let cfg = RunConfig::new(Example::Ex1, vec![63], SolverKind::Minres, PrecondKind::Ar);
        let prepared = prepare(&cfg, 63).unwrap();
        let mut z = vec![0.0; 63];
        let r: Vec<f64> = (0..63).map(|i| (i as f64).sin()).collect();
        prepared.preconditioner.solve(&r, &mut z).unwrap();
        // Applying (2, -1) tridiagonal to z must return r.
        for i in 0..63 {
            let left = if i > 0 { z[i - 1] } else { 0.0 };
            let right = if i < 62 { z[i + 1] } else { 0.0 };
            assert!((2.0 * z[i] - left - right - r[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn rejected_config_runs_nothing() {
        let good = RunConfig::new(Example::Ex2, vec![255], SolverKind::Gmres, PrecondKind::MgA);
        let bad = RunConfig::new(Example::Ex2, vec![255], SolverKind::Minres, PrecondKind::MgA);
        assert!(matches!(run_all(&[good, bad]), Err(CliError::Config(_))));
    }

    #[test]
    fn every_preconditioner_builds_and_converges() {
        let cases = [
            (Example::Ex1, 127, SolverKind::Minres, PrecondKind::AmExact),
            (Example::Ex1, 127, SolverKind::Minres, PrecondKind::MgAm),
            (Example::Ex1, 127, SolverKind::Gmres, PrecondKind::CircOptimal),
            (Example::Ex2, 255, SolverKind::Minres, PrecondKind::AmBanded),
            (Example::Ex2, 255, SolverKind::Minres, PrecondKind::MgAm),
            (Example::Ex2, 255, SolverKind::Minres, PrecondKind::CircAbsSuperoptimal),
            (Example::Ex2, 255, SolverKind::Minres, PrecondKind::Ar),
            (Example::Ex2, 255, SolverKind::Lsqr, PrecondKind::CircStrang),
            (Example::Ex2, 255, SolverKind::Gmres, PrecondKind::MgA),
            (Example::Ex3, 15, SolverKind::Minres, PrecondKind::Ar),
            (Example::Ex3, 15, SolverKind::Gmres, PrecondKind::BlockCirc),
            (Example::Ex3, 15, SolverKind::Minres, PrecondKind::BlockCircAbs),
            (Example::Ex3, 15, SolverKind::Minres, PrecondKind::MgAr),
        ];
        for (ex, n, solver, p) in cases {
            let cfg = RunConfig::new(ex, vec![n], solver, p);
            let row = run_one(&cfg, n).unwrap_or_else(|e| panic!("{ex} {solver} {p}: {e}"));
            assert!(row.converged, "{ex} {solver} {p}: {row:?}");
            assert!(row.true_relative_residual < 1e-6, "{ex} {solver} {p}: {row:?}");
        }
    }

    #[test]
    fn thread_cap_is_positive() {
        assert!(thread_cap() >= 1);
    }
}
