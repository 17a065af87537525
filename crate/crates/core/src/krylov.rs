//! Preconditioned MINRES, right-preconditioned GMRES and right-preconditioned LSQR.
//!
//! Every solver starts from `x0` (default `(1, …, 1)ᵀ/√n`) and records the
//! monitored relative residual after each iteration, so
//! `residual_history[0] == 1` and `residual_history.len() == iterations + 1`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::operator::{dot, norm2, LinearOperator, Preconditioner};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAXIT: usize = 200;

/// What MINRES compares against `tol`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MinresStopping {
    /// `‖r_k‖_{P⁻¹} ≤ tol·‖b‖₂`, accepted only once the recomputed
    /// `‖b − A x_k‖₂ ≤ tol·‖b‖₂` as well (MATLAB `minres` semantics).
    #[default]
    RhsScaled,
    /// `‖r_k‖_{P⁻¹} / ‖r_0‖_{P⁻¹} < tol`.
    Preconditioned,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub maxit: usize,
    /// `None` selects `(1, …, 1)ᵀ/√n`.
    pub x0: Option<Vec<f64>>,
    /// Ignored by GMRES and LSQR, which monitor `‖r_k‖₂/‖r_0‖₂`.
    pub minres_stopping: MinresStopping,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            maxit: DEFAULT_MAXIT,
            x0: None,
            minres_stopping: MinresStopping::default(),
        }
    }
}

impl SolveOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_maxit(mut self, maxit: usize) -> Self {
        self.maxit = maxit;
        self
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn with_minres_stopping(mut self, stopping: MinresStopping) -> Self {
        self.minres_stopping = stopping;
        self
    }

    fn initial_guess(&self, n: usize) -> Result<Vec<f64>> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Input(format!("tolerance {} is outside (0, 1)", self.tol)));
        }
        match &self.x0 {
            Some(x0) => {
                check_len(n, x0.len())?;
                Ok(x0.clone())
            }
            None => Ok(vec![1.0 / (n as f64).sqrt(); n]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveFlag {
    Converged,
    MaxIt,
    Breakdown,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub flag: SolveFlag,
    /// Monitored residual norms relative to the initial one.
    pub residual_history: Vec<f64>,
    pub wall_seconds: f64,
    pub x: Vec<f64>,
    /// `‖b − A x‖₂ / ‖b − A x0‖₂` recomputed at exit.
    pub true_relative_residual: f64,
    /// Applications of `A` or `Aᵀ`, including setup and the exit check.
    pub operator_applications: usize,
    pub preconditioner_solves: usize,
}

struct Counters<'a> {
    a: &'a dyn LinearOperator,
    p: &'a dyn Preconditioner,
    applications: usize,
    solves: usize,
}

impl<'a> Counters<'a> {
    fn new(a: &'a dyn LinearOperator, p: &'a dyn Preconditioner) -> Self {
        Self {
            a,
            p,
            applications: 0,
            solves: 0,
        }
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) {
        self.applications += 1;
        self.a.apply(x, y);
    }

    fn apply_transpose(&mut self, x: &[f64], y: &mut [f64]) {
        self.applications += 1;
        self.a.apply_transpose(x, y);
    }

    fn solve(&mut self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.solves += 1;
        self.p.solve(r, z)
    }

    fn solve_transpose(&mut self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.solves += 1;
        self.p.solve_transpose(r, z)
    }

    fn residual(&mut self, b: &[f64], x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; b.len()];
        self.apply(x, &mut r);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
        r
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        mut self,
        b: &[f64],
        x: Vec<f64>,
        r0_norm: f64,
        history: Vec<f64>,
        flag: SolveFlag,
        start: Instant,
    ) -> SolveReport {
        let r = self.residual(b, &x);
        let true_relative_residual = if r0_norm > 0.0 { norm2(&r) / r0_norm } else { 0.0 };
        SolveReport {
            iterations: history.len() - 1,
            converged: flag == SolveFlag::Converged,
            flag,
            residual_history: history,
            wall_seconds: start.elapsed().as_secs_f64(),
            x,
            true_relative_residual,
            operator_applications: self.applications,
            preconditioner_solves: self.solves,
        }
    }
}

fn check_sizes(a: &dyn LinearOperator, p: &dyn Preconditioner, b: &[f64]) -> Result<usize> {
    let n = a.size();
    check_len(n, b.len())?;
    check_len(n, p.size())?;
    if n == 0 {
        return Err(Error::Input("empty system".into()));
    }
    Ok(n)
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Probes `⟨Ax, y⟩ = ⟨x, Ay⟩` on ten seeded random pairs, to `1e-10` relative.
pub fn symmetry_probe(a: &dyn LinearOperator) -> bool {
    let n = a.size();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut ax = vec![0.0; n];
    let mut ay = vec![0.0; n];
    for _ in 0..10 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        a.apply(&x, &mut ax);
        a.apply(&y, &mut ay);
        let scale = (norm2(&ax) * norm2(&y)).max(norm2(&ay) * norm2(&x));
        if (dot(&ax, &y) - dot(&x, &ay)).abs() > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return false;
        }
    }
    true
}

/// Preconditioned MINRES (Paige–Saunders) for symmetric `A` and SPD `P`.
///
/// Records `‖r_k‖_{P⁻¹} / ‖r_0‖_{P⁻¹}`, which MINRES minimizes; the stopping
/// test is selected by [`SolveOptions::minres_stopping`].
pub fn minres(
    a: &dyn LinearOperator,
    p: &dyn Preconditioner,
    b: &[f64],
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let start = Instant::now();
    let n = check_sizes(a, p, b)?;
    if !p.is_spd() {
        return Err(Error::Input("MINRES needs a symmetric positive definite preconditioner".into()));
    }
    if (!a.is_symmetric() || cfg!(debug_assertions)) && !symmetry_probe(a) {
        return Err(Error::Input("MINRES needs a symmetric operator".into()));
    }
    let mut x = opts.initial_guess(n)?;
    let mut ops = Counters::new(a, p);

    let mut r1 = ops.residual(b, &x);
    let r0_norm = norm2(&r1);
    let mut y = vec![0.0; n];
    ops.solve(&r1, &mut y)?;
    let beta1_sq = dot(&r1, &y);
    if beta1_sq < 0.0 {
        return Err(Error::Assumption("preconditioner is not positive definite".into()));
    }
    let beta1 = beta1_sq.sqrt();
    let mut history = vec![1.0];
    if beta1 == 0.0 {
        return Ok(ops.finish(b, x, r0_norm, history, SolveFlag::Converged, start));
    }
    let b_norm = norm2(b);
    let rhs_scaled = opts.minres_stopping == MinresStopping::RhsScaled && b_norm > 0.0;

    let mut r2 = r1.clone();
    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut flag = SolveFlag::MaxIt;
    // Running rounding error of `x`; its updates cancel heavily when `‖x‖ ≫ ‖b‖`.
    let mut x_err = vec![0.0; n];

    for itn in 1..=opts.maxit {
        let s = 1.0 / beta;
        v.iter_mut().zip(&y).for_each(|(vi, yi)| *vi = s * yi);
        ops.apply(&v, &mut y);
        if itn >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        ops.solve(&r2, &mut y)?;
        oldb = beta;
        let beta_sq = dot(&r2, &y);
        if beta_sq < 0.0 {
            return Err(Error::Assumption("preconditioner is not positive definite".into()));
        }
        beta = beta_sq.sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        }
        compensated_axpy(phi, &w, &mut x, &mut x_err);

        let rel = phibar / beta1;
        history.push(rel);
        let converged = if rhs_scaled {
            phibar <= opts.tol * b_norm && norm2(&ops.residual(b, &x)) <= opts.tol * b_norm
        } else {
            rel < opts.tol
        };
        if converged {
            flag = SolveFlag::Converged;
            break;
        }
        if beta <= f64::EPSILON * beta1 {
            flag = SolveFlag::Breakdown;
            break;
        }
    }
    Ok(ops.finish(b, x, r0_norm, history, flag, start))
}

/// `y += a x` with Kahan compensation carried in `err`.
fn compensated_axpy(a: f64, x: &[f64], y: &mut [f64], err: &mut [f64]) {
    for ((yi, ei), xi) in y.iter_mut().zip(err.iter_mut()).zip(x) {
        let t = a * xi - *ei;
        let sum = *yi + t;
        *ei = (sum - *yi) - t;
        *yi = sum;
    }
}

/// Givens rotation `(c, s)` with `c a + s b = r`, `−s a + c b = 0`.
fn givens(a: f64, b: f64) -> (f64, f64) {
    let r = a.hypot(b);
    if r == 0.0 {
        (1.0, 0.0)
    } else {
        (a / r, b / r)
    }
}

/// Full (unrestarted) GMRES on `A P⁻¹ y = b − A x0`, `x = x0 + P⁻¹ y`.
///
/// Monitors the true residual `‖b − A x_k‖₂ / ‖b − A x0‖₂`.
pub fn gmres_right(
    a: &dyn LinearOperator,
    p: &dyn Preconditioner,
    b: &[f64],
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let start = Instant::now();
    let n = check_sizes(a, p, b)?;
    let x0 = opts.initial_guess(n)?;
    let mut ops = Counters::new(a, p);

    let r0 = ops.residual(b, &x0);
    let beta = norm2(&r0);
    let mut history = vec![1.0];
    if beta == 0.0 {
        return Ok(ops.finish(b, x0, beta, history, SolveFlag::Converged, start));
    }

    let m = opts.maxit;
    let mut basis: Vec<Vec<f64>> = vec![r0.iter().map(|v| v / beta).collect()];
    // Column j of the Hessenberg matrix, already rotated.
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut rot: Vec<(f64, f64)> = Vec::with_capacity(m);
    let mut g = vec![beta];
    let mut z = vec![0.0; n];
    let mut flag = SolveFlag::MaxIt;

    for j in 0..m {
        ops.solve(&basis[j], &mut z)?;
        let mut w = vec![0.0; n];
        ops.apply(&z, &mut w);

        let mut col = vec![0.0; j + 2];
        let before = norm2(&w);
        for (i, vi) in basis.iter().enumerate() {
            let hij = dot(vi, &w);
            axpy(-hij, vi, &mut w);
            col[i] = hij;
        }
        let mut hnext = norm2(&w);
        // Second pass only when cancellation lost most of the norm.
        if hnext < std::f64::consts::FRAC_1_SQRT_2 * before {
            for (i, vi) in basis.iter().enumerate() {
                let c = dot(vi, &w);
                axpy(-c, vi, &mut w);
                col[i] += c;
            }
            hnext = norm2(&w);
        }
        col[j + 1] = hnext;

        for (i, &(c, s)) in rot.iter().enumerate() {
            let (u, v) = (col[i], col[i + 1]);
            col[i] = c * u + s * v;
            col[i + 1] = -s * u + c * v;
        }
        let (c, s) = givens(col[j], col[j + 1]);
        col[j] = c * col[j] + s * col[j + 1];
        col[j + 1] = 0.0;
        rot.push((c, s));
        let gj = g[j];
        g[j] = c * gj;
        g.push(-s * gj);
        h.push(col);

        let rel = g[j + 1].abs() / beta;
        history.push(rel);
        let happy = hnext <= 1e-14 * before.max(f64::MIN_POSITIVE);
        if rel < opts.tol || happy {
            flag = SolveFlag::Converged;
            break;
        }
        basis.push(w.iter().map(|v| v / hnext).collect());
    }

    let k = h.len();
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for (jj, yj) in y.iter().enumerate().skip(i + 1) {
            s -= h[jj][i] * yj;
        }
        if h[i][i] == 0.0 {
            return Err(Error::Factorization("GMRES least-squares system is singular".into()));
        }
        y[i] = s / h[i][i];
    }
    let mut vy = vec![0.0; n];
    for (vi, yi) in basis.iter().zip(&y) {
        axpy(*yi, vi, &mut vy);
    }
    ops.solve(&vy, &mut z)?;
    let mut x = x0;
    axpy(1.0, &z, &mut x);
    Ok(ops.finish(b, x, beta, history, flag, start))
}

/// LSQR (Paige–Saunders) on `A P⁻¹ y = b − A x0`, `x = x0 + P⁻¹ y`.
///
/// Each iteration applies `A`, `Aᵀ`, `P⁻¹` and `P⁻ᵀ` once. Monitors the
/// true residual `‖b − A x_k‖₂ / ‖b − A x0‖₂` as estimated by the recurrence.
pub fn lsqr(
    a: &dyn LinearOperator,
    p: &dyn Preconditioner,
    b: &[f64],
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let start = Instant::now();
    let n = check_sizes(a, p, b)?;
    let x0 = opts.initial_guess(n)?;
    let mut ops = Counters::new(a, p);

    let mut u = ops.residual(b, &x0);
    let beta1 = norm2(&u);
    let mut history = vec![1.0];
    if beta1 == 0.0 {
        return Ok(ops.finish(b, x0, beta1, history, SolveFlag::Converged, start));
    }
    u.iter_mut().for_each(|v| *v /= beta1);

    let mut tmp = vec![0.0; n];
    let mut v = vec![0.0; n];
    ops.apply_transpose(&u, &mut tmp);
    ops.solve_transpose(&tmp, &mut v)?;
    let mut alfa = norm2(&v);
    if alfa == 0.0 {
        // b − A x0 is orthogonal to the range: x0 is already a least-squares solution.
        return Ok(ops.finish(b, x0, beta1, history, SolveFlag::Breakdown, start));
    }
    v.iter_mut().for_each(|x| *x /= alfa);

    let mut w = v.clone();
    let mut y = vec![0.0; n];
    let mut phibar = beta1;
    let mut rhobar = alfa;
    let mut flag = SolveFlag::MaxIt;
    let mut pv = vec![0.0; n];

    for _ in 0..opts.maxit {
        ops.solve(&v, &mut pv)?;
        ops.apply(&pv, &mut tmp);
        for i in 0..n {
            u[i] = tmp[i] - alfa * u[i];
        }
        let beta = norm2(&u);
        if beta > 0.0 {
            u.iter_mut().for_each(|x| *x /= beta);
            ops.apply_transpose(&u, &mut tmp);
            ops.solve_transpose(&tmp, &mut pv)?;
            for i in 0..n {
                v[i] = pv[i] - beta * v[i];
            }
            alfa = norm2(&v);
            if alfa > 0.0 {
                v.iter_mut().for_each(|x| *x /= alfa);
            }
        }

        let rho = rhobar.hypot(beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alfa;
        rhobar = -c * alfa;
        let phi = c * phibar;
        phibar *= s;
        axpy(phi / rho, &w, &mut y);
        for i in 0..n {
            w[i] = v[i] - (theta / rho) * w[i];
        }

        let rel = phibar / beta1;
        history.push(rel);
        if rel < opts.tol || beta == 0.0 {
            flag = SolveFlag::Converged;
            break;
        }
        if alfa == 0.0 {
            flag = SolveFlag::Breakdown;
            break;
        }
    }

    ops.solve(&y, &mut pv)?;
    let mut x = x0;
    axpy(1.0, &pv, &mut x);
    Ok(ops.finish(b, x, beta1, history, flag, start))
}
