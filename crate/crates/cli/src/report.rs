//! Result rows and their CSV, JSON-lines and table renderings.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use symtoep::krylov::{SolveFlag, SolveReport};

use symtoep::MatvecKernel;

use crate::config::{Example, MatvecChoice, MinresStop, PrecondKind, RhsKind, RunConfig, SolverKind};
use crate::error::CliResult;
use crate::runner::Prepared;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
    Table,
}

/// One solve. Model parameters are those actually used (defaults filled in).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub example: Example,
    /// Unknowns per axis.
    pub n: usize,
    /// Total unknowns.
    pub size: usize,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub d_plus: Option<f64>,
    pub d_minus: Option<f64>,
    pub e_plus: Option<f64>,
    pub e_minus: Option<f64>,
    pub solver: SolverKind,
    pub precond: PrecondKind,
    pub tol: f64,
    pub maxit: usize,
    pub seed: u64,
    /// Only `ex1` has a random right-hand side.
    pub rhs: Option<RhsKind>,
    /// Only meaningful for MINRES rows.
    pub minres_stop: Option<MinresStop>,
    /// Kernel used for products with `A`.
    pub matvec: MatvecChoice,
    pub mg_sweeps: Option<usize>,
    pub mg_omega: Option<f64>,
    pub mg_coarsest: Option<usize>,
    pub iterations: usize,
    pub converged: bool,
    pub breakdown: bool,
    /// Final monitored residual relative to the initial one.
    pub relative_residual: f64,
    pub true_relative_residual: f64,
    /// Matrix-vector products per the usual accounting: two per LSQR iteration, one otherwise.
    pub cost: usize,
    /// Every application of `A` or `Aᵀ`, including setup and the exit check.
    pub operator_applications: usize,
    pub preconditioner_solves: usize,
    pub assembly_seconds: f64,
    pub coefficient_seconds: f64,
    pub setup_seconds: f64,
    pub wall_seconds: f64,
}

impl ResultRow {
    pub fn new(cfg: &RunConfig, n: usize, prepared: &Prepared, report: &SolveReport) -> Self {
        let meta = &prepared.instance.meta;
        let per_iteration = if cfg.solver == SolverKind::Lsqr { 2 } else { 1 };
        Self {
            example: cfg.example,
            n,
            size: prepared.instance.size(),
            alpha: meta.alpha,
            beta: meta.beta,
            d_plus: meta.d_plus,
            d_minus: meta.d_minus,
            e_plus: meta.e_plus,
            e_minus: meta.e_minus,
            solver: cfg.solver,
            precond: cfg.precond,
            tol: cfg.tol,
            maxit: cfg.maxit,
            seed: cfg.seed,
            rhs: (cfg.example == Example::Ex1).then_some(cfg.rhs),
            minres_stop: (cfg.solver == SolverKind::Minres).then_some(cfg.minres_stop),
            matvec: match prepared.instance.operator.kernel() {
                MatvecKernel::Fft => MatvecChoice::Fft,
                MatvecKernel::Direct => MatvecChoice::Direct,
            },
            mg_sweeps: prepared.vcycle.map(|v| v.pre_smooth),
            mg_omega: prepared.vcycle.map(|v| v.omega),
            mg_coarsest: prepared.vcycle.map(|v| v.coarsest_size),
            iterations: report.iterations,
            converged: report.converged,
            breakdown: report.flag == SolveFlag::Breakdown,
            relative_residual: report.residual_history.last().copied().unwrap_or(1.0),
            true_relative_residual: report.true_relative_residual,
            cost: per_iteration * report.iterations,
            operator_applications: report.operator_applications,
            preconditioner_solves: report.preconditioner_solves,
            assembly_seconds: prepared.assembly_seconds,
            coefficient_seconds: prepared.coefficient_seconds,
            setup_seconds: prepared.setup_seconds,
            wall_seconds: report.wall_seconds,
        }
    }

    /// Iteration count, or `---` when the solve did not converge.
    pub fn iterations_cell(&self) -> String {
        if self.converged {
            self.iterations.to_string()
        } else {
            "---".into()
        }
    }

    /// Setup plus solve time, as tabulated.
    pub fn total_seconds(&self) -> f64 {
        self.setup_seconds + self.wall_seconds
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> CliResult<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

pub fn write_json_lines<W: Write>(mut out: W, rows: &[ResultRow]) -> CliResult<()> {
    for row in rows {
        serde_json::to_writer(&mut out, row)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_json_lines<R: BufRead>(input: R) -> CliResult<Vec<ResultRow>> {
    let mut rows = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            rows.push(serde_json::from_str(&line)?);
        }
    }
    Ok(rows)
}

/// Published-layout grid: one line per (model parameters, n), one column per
/// (solver, preconditioner), cells `iterations (seconds)`.
pub fn render_table(rows: &[ResultRow]) -> String {
    let mut columns: Vec<(SolverKind, PrecondKind)> = Vec::new();
    for r in rows {
        if !columns.contains(&(r.solver, r.precond)) {
            columns.push((r.solver, r.precond));
        }
    }
    let mut lines: Vec<(String, usize)> = Vec::new();
    let mut cells: BTreeMap<(usize, usize), String> = BTreeMap::new();
    for r in rows {
        let key = (parameter_label(r), r.size);
        let line = match lines.iter().position(|l| *l == key) {
            Some(i) => i,
            None => {
                lines.push(key);
                lines.len() - 1
            }
        };
        let col = columns.iter().position(|&c| c == (r.solver, r.precond)).expect("column registered");
        let time = if r.converged {
            format!("({:.3})", r.total_seconds())
        } else {
            "---".into()
        };
        cells.insert((line, col), format!("{} {}", r.iterations_cell(), time));
    }

    let mut header = vec!["params".to_string(), "n".to_string()];
    header.extend(columns.iter().map(|(s, p)| format!("{} {}", s.to_string().to_uppercase(), p.label())));
    let mut table = vec![header];
    for (i, (params, size)) in lines.iter().enumerate() {
        let mut line = vec![params.clone(), size.to_string()];
        line.extend((0..columns.len()).map(|c| cells.get(&(i, c)).cloned().unwrap_or_default()));
        table.push(line);
    }
    let widths: Vec<usize> = (0..table[0].len())
        .map(|c| table.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, line) in table.iter().enumerate() {
        let padded: Vec<String> = line
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:>w$}"))
            .collect();
        out.push_str(padded.join(" | ").trim_end());
        out.push('\n');
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            out.push_str(&rule.join("-+-"));
            out.push('\n');
        }
    }
    out
}

fn parameter_label(r: &ResultRow) -> String {
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| x.to_string());
    match r.example {
        Example::Ex1 => "ex1".into(),
        Example::Ex2 => format!("ex2 a={} d=({},{})", fmt(r.alpha), fmt(r.d_plus), fmt(r.d_minus)),
        Example::Ex3 => format!("ex3 (a,b)=({},{})", fmt(r.alpha), fmt(r.beta)),
    }
}

pub fn write_rows<W: Write>(mut out: W, rows: &[ResultRow], format: OutputFormat) -> CliResult<()> {
    match format {
        OutputFormat::Csv => write_csv(out, rows),
        OutputFormat::Json => write_json_lines(out, rows),
        OutputFormat::Table => {
            out.write_all(render_table(rows).as_bytes())?;
            Ok(())
        }
    }
}
