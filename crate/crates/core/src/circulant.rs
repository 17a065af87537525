//! Circulant preconditioners in eigenvalue form.
//!
//! A circulant `C_n` with first column `c` is stored through its
//! eigenvalues `λ_k = Σ_j c_j e^{2πijk/n}`. Apply and solve cost one FFT pair.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};
use crate::operator::{LinearOperator, Preconditioner};
use crate::symbol::Symbol;
use crate::toeplitz::{transform, ToeplitzOperator};

/// Relative size of the smallest eigenvalue modulus a solve accepts.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Imaginary parts below this (relative) are truncated when the circulant is
/// used as a real SPD preconditioner.
const IMAG_TOL: f64 = 1e-12;

#[derive(Clone)]
pub struct CirculantOperator {
    eigs: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantOperator")
            .field("n", &self.eigs.len())
            .finish()
    }
}

impl CirculantOperator {
    pub fn from_eigenvalues(eigs: Vec<Complex64>) -> Result<Self> {
        if eigs.is_empty() {
            return Err(Error::Input("circulant of dimension 0".into()));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(eigs.len());
        let inverse = planner.plan_fft_inverse(eigs.len());
        Ok(Self {
            eigs,
            forward,
            inverse,
        })
    }

    pub fn from_first_column(column: &[Complex64]) -> Result<Self> {
        let mut eigs = column.to_vec();
        if eigs.is_empty() {
            return Err(Error::Input("circulant of dimension 0".into()));
        }
        // λ_k = Σ c_j e^{+2πijk/n} is the unnormalized inverse DFT.
        FftPlanner::new().plan_fft_inverse(eigs.len()).process(&mut eigs);
        Self::from_eigenvalues(eigs)
    }

    pub fn from_real_first_column(column: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = column.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_first_column(&c)
    }

    pub fn n(&self) -> usize {
        self.eigs.len()
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigs
    }

    pub fn first_column(&self) -> Vec<Complex64> {
        let mut c = self.eigs.clone();
        self.forward.process(&mut c);
        let scale = 1.0 / self.n() as f64;
        c.iter_mut().for_each(|v| *v *= scale);
        c
    }

    /// `|C_n| = F* |Λ_n| F`.
    pub fn absolute_value(&self) -> Self {
        Self {
            eigs: self.eigs.iter().map(|z| Complex64::new(z.norm(), 0.0)).collect(),
            forward: self.forward.clone(),
            inverse: self.inverse.clone(),
        }
    }

    fn max_modulus(&self) -> f64 {
        self.eigs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        self.eigs.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn is_singular(&self) -> bool {
        self.min_modulus() <= SINGULAR_TOL * self.max_modulus()
    }

    /// Whether the circulant is real (`λ_{-k} = conj λ_k`), symmetric (real
    /// `λ`) and has positive eigenvalues.
    pub fn is_spd(&self) -> bool {
        let scale = self.max_modulus();
        let n = self.n();
        self.eigs.iter().enumerate().all(|(k, z)| {
            z.im.abs() <= IMAG_TOL * scale
                && z.re > SINGULAR_TOL * scale
                && (self.eigs[(n - k) % n] - z.conj()).norm() <= IMAG_TOL * scale
        })
    }

    fn multiply(&self, x: &[Complex64], transpose: bool, invert: bool) -> Vec<Complex64> {
        let n = self.n();
        let mut buf = x.to_vec();
        self.forward.process(&mut buf);
        // The standard DFT of column c at frequency k equals λ_{-k}.
        for (k, b) in buf.iter_mut().enumerate() {
            let lam = if transpose {
                self.eigs[k]
            } else {
                self.eigs[(n - k) % n]
            };
            *b = if invert { *b / lam } else { *b * lam };
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
        buf
    }

    pub fn apply_complex(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.n(), x.len())?;
        Ok(self.multiply(x, false, false))
    }

    pub fn solve_complex(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.n(), x.len())?;
        self.check_nonsingular()?;
        Ok(self.multiply(x, false, true))
    }

    /// `C x` for real `x` (real part of the product).
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), x.len())?;
        Ok(self.real_multiply(x, false, false))
    }

    /// `C⁻¹ x` for real `x`.
    pub fn solve(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), x.len())?;
        self.check_nonsingular()?;
        Ok(self.real_multiply(x, false, true))
    }

    fn real_multiply(&self, x: &[f64], transpose: bool, invert: bool) -> Vec<f64> {
        let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.multiply(&xc, transpose, invert)
            .into_iter()
            .map(|z| z.re)
            .collect()
    }

    fn check_nonsingular(&self) -> Result<()> {
        if self.is_singular() {
            Err(Error::SingularPreconditioner(format!(
                "circulant eigenvalue modulus {:e} is below {SINGULAR_TOL:e} relative to {:e}",
                self.min_modulus(),
                self.max_modulus()
            )))
        } else {
            Ok(())
        }
    }
}

impl LinearOperator for CirculantOperator {
    fn size(&self) -> usize {
        self.n()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.real_multiply(x, false, false));
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.real_multiply(x, true, false));
    }
}

impl Preconditioner for CirculantOperator {
    fn size(&self) -> usize {
        self.n()
    }
    fn solve(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.check_nonsingular()?;
        z.copy_from_slice(&self.real_multiply(r, false, true));
        Ok(())
    }
    fn solve_transpose(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.check_nonsingular()?;
        z.copy_from_slice(&self.real_multiply(r, true, true));
        Ok(())
    }
    fn is_spd(&self) -> bool {
        CirculantOperator::is_spd(self)
    }
}

fn univariate(t: &ToeplitzOperator) -> Result<usize> {
    match t.dims() {
        [n] if *n >= 2 => Ok(*n),
        [n] => Err(Error::Input(format!("circulant approximation needs n >= 2, got {n}"))),
        _ => Err(Error::Input("circulant approximations need a one-level operator".into())),
    }
}

/// Strang circulant: keeps the central diagonals and wraps them around.
/// For even `n` the middle entry takes the positive lag `a_{n/2}`.
pub fn strang(t: &ToeplitzOperator) -> Result<CirculantOperator> {
    let n = univariate(t)?;
    let c = t.coeffs();
    let column: Vec<Complex64> = (0..n as isize)
        .map(|j| {
            if j <= n as isize / 2 {
                c.lag(j)
            } else {
                c.lag(j - n as isize)
            }
        })
        .collect();
    CirculantOperator::from_first_column(&column)
}

/// T. Chan's optimal circulant, the Frobenius-nearest circulant to `T`.
pub fn optimal(t: &ToeplitzOperator) -> Result<CirculantOperator> {
    let n = univariate(t)?;
    let c = t.coeffs();
    let nf = n as f64;
    let column: Vec<Complex64> = (0..n as isize)
        .map(|j| {
            let jf = j as f64;
            (c.lag(j) * (nf - jf) + c.lag(j - n as isize) * jf) / nf
        })
        .collect();
    CirculantOperator::from_first_column(&column)
}

/// Tyrtyshnikov's superoptimal circulant, minimizing `‖I - C⁻¹T‖_F`:
/// `λ_k = λ_k(c(T Tᴴ)) / conj(λ_k(c(T)))`.
///
/// `λ_k(c(T Tᴴ)) = ‖Tᴴ w_k‖² / n` is evaluated with one product per Fourier
/// vector `w_k`, so construction costs `O(n² log n)`.
pub fn superoptimal(t: &ToeplitzOperator) -> Result<CirculantOperator> {
    let n = univariate(t)?;
    let opt = optimal(t)?;
    if opt.is_singular() {
        return Err(Error::SingularPreconditioner(
            "optimal circulant of T is singular".into(),
        ));
    }
    let conj_t = t.coeffs().map(|_, a| a.conj());
    let t_conj = ToeplitzOperator::from_coeffs(conj_t)?;
    let mut eigs = Vec::with_capacity(n);
    for k in 0..n {
        // w_k = (e^{-2πijk/n})_j is the eigenvector for λ_k.
        let w: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0, -2.0 * PI * ((j * k) % n) as f64 / n as f64))
            .collect();
        // Tᴴ w = conj(T)ᵀ w.
        let v = t_conj.matvec_complex(&w, true)?;
        let gram: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        eigs.push(Complex64::new(gram, 0.0) / opt.eigenvalues()[k].conj());
    }
    CirculantOperator::from_eigenvalues(eigs)
}

/// `C_n(f)`: eigenvalues `f(2πj/n)`, with `θ` wrapped into `(-π, π]`.
pub fn sampled_circulant(sym: &Symbol, n: usize) -> Result<CirculantOperator> {
    if sym.dim() != 1 {
        return Err(Error::Input("sampled circulants need a univariate symbol".into()));
    }
    let mut eigs = Vec::with_capacity(n);
    for j in 0..n {
        let mut theta = 2.0 * PI * j as f64 / n as f64;
        if theta > PI {
            theta -= 2.0 * PI;
        }
        eigs.push(sym.eval(&[theta])?);
    }
    CirculantOperator::from_eigenvalues(eigs)
}

/// How per-level eigenvalues combine in a two-level block circulant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combine {
    /// `1 - λx - λy`, matching `I - I⊗C_x - C_y⊗I`.
    Nonsymmetric,
    /// `1 + |λx| + |λy|`, matching `I + I⊗|C_x| + |C_y|⊗I`.
    Absolute,
}

/// Two-level block circulant built from per-level circulants; `dims` is
/// `(n_y, n_x)` with `x` the fast index.
#[derive(Clone)]
pub struct BlockCirculant2D {
    dims: (usize, usize),
    eigs_x: Vec<Complex64>,
    eigs_y: Vec<Complex64>,
    combine: Combine,
    plans_fwd: Vec<Arc<dyn Fft<f64>>>,
    plans_inv: Vec<Arc<dyn Fft<f64>>>,
}

impl BlockCirculant2D {
    pub fn new(cx: &CirculantOperator, cy: &CirculantOperator, combine: Combine) -> Result<Self> {
        let mut planner = FftPlanner::new();
        let (nx, ny) = (cx.n(), cy.n());
        Ok(Self {
            dims: (ny, nx),
            eigs_x: cx.eigenvalues().to_vec(),
            eigs_y: cy.eigenvalues().to_vec(),
            combine,
            plans_fwd: vec![planner.plan_fft_forward(ny), planner.plan_fft_forward(nx)],
            plans_inv: vec![planner.plan_fft_inverse(ny), planner.plan_fft_inverse(nx)],
        })
    }

    /// Strang approximations of the per-level Toeplitz factors `L_x`, `L_y`
    /// of `I - I⊗L_x - L_y⊗I`.
    pub fn strang(lx: &ToeplitzOperator, ly: &ToeplitzOperator, combine: Combine) -> Result<Self> {
        Self::new(&strang(lx)?, &strang(ly)?, combine)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn combine(&self) -> Combine {
        self.combine
    }

    /// Effective eigenvalue at 2-index `(j, k)` = (x-frequency, y-frequency).
    pub fn eigenvalue(&self, jx: usize, ky: usize) -> Complex64 {
        let (lx, ly) = (self.eigs_x[jx], self.eigs_y[ky]);
        match self.combine {
            Combine::Nonsymmetric => Complex64::new(1.0, 0.0) - lx - ly,
            Combine::Absolute => Complex64::new(1.0 + lx.norm() + ly.norm(), 0.0),
        }
    }

    fn multiply(&self, x: &[f64], transpose: bool, invert: bool) -> Vec<f64> {
        let (ny, nx) = self.dims;
        let shape = [ny, nx];
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        transform(&mut buf, &shape, &self.plans_fwd);
        for ky in 0..ny {
            for kx in 0..nx {
                let lam = if transpose {
                    self.eigenvalue(kx, ky)
                } else {
                    self.eigenvalue((nx - kx) % nx, (ny - ky) % ny)
                };
                let b = &mut buf[ky * nx + kx];
                *b = if invert { *b / lam } else { *b * lam };
            }
        }
        transform(&mut buf, &shape, &self.plans_inv);
        let scale = 1.0 / (nx * ny) as f64;
        buf.into_iter().map(|z| z.re * scale).collect()
    }

    fn min_modulus(&self) -> f64 {
        let (ny, nx) = self.dims;
        let mut m = f64::INFINITY;
        for ky in 0..ny {
            for jx in 0..nx {
                m = m.min(self.eigenvalue(jx, ky).norm());
            }
        }
        m
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dims.0 * self.dims.1, x.len())?;
        Ok(self.multiply(x, false, false))
    }
}

impl Preconditioner for BlockCirculant2D {
    fn size(&self) -> usize {
        self.dims.0 * self.dims.1
    }
    fn solve(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        if self.min_modulus() <= SINGULAR_TOL {
            return Err(Error::SingularPreconditioner("block circulant is singular".into()));
        }
        z.copy_from_slice(&self.multiply(r, false, true));
        Ok(())
    }
    fn solve_transpose(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        if self.min_modulus() <= SINGULAR_TOL {
            return Err(Error::SingularPreconditioner("block circulant is singular".into()));
        }
        z.copy_from_slice(&self.multiply(r, true, true));
        Ok(())
    }
    fn is_spd(&self) -> bool {
        self.combine == Combine::Absolute
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn tridiag(n: usize) -> ToeplitzOperator {
        ToeplitzOperator::from_lag_fn(n, |k| match k {
            0 => 2.0,
            1 | -1 => -1.0,
            _ => 0.0,
        })
        .unwrap()
    }

    fn dense_circulant(col: &[Complex64]) -> DMatrix<Complex64> {
        let n = col.len();
        DMatrix::from_fn(n, n, |i, j| col[(i + n - j) % n])
    }

    #[test]
    fn strang_of_tridiagonal() {
        let s = strang(&tridiag(4)).unwrap();
        let col = s.first_column();
        for (got, want) in col.iter().zip([2.0, -1.0, 0.0, -1.0]) {
            assert!((got - c(want)).norm() < 1e-14);
        }
        for (got, want) in s.eigenvalues().iter().zip([0.0, 2.0, 4.0, 2.0]) {
            assert!((got - c(want)).norm() < 1e-14);
        }
    }

    #[test]
    fn identity_circulants() {
        let id = ToeplitzOperator::from_lag_fn(5, |k| if k == 0 { 1.0 } else { 0.0 }).unwrap();
        for circ in [strang(&id).unwrap(), optimal(&id).unwrap(), superoptimal(&id).unwrap()] {
            for z in circ.eigenvalues() {
                assert!((z - c(1.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn optimal_of_tridiagonal() {
        let o = optimal(&tridiag(4)).unwrap();
        for (got, want) in o.first_column().iter().zip([2.0, -0.75, 0.0, -0.75]) {
            assert!((got - c(want)).norm() < 1e-14);
        }
    }

    #[test]
    fn first_column_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let col: Vec<Complex64> = (0..9)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let circ = CirculantOperator::from_first_column(&col).unwrap();
        for (a, b) in circ.first_column().iter().zip(&col) {
            assert!((a - b).norm() < 1e-12);
        }
        // Eigenvalues follow λ_k = Σ c_j e^{2πijk/n}.
        for (k, lam) in circ.eigenvalues().iter().enumerate() {
            let want: Complex64 = col
                .iter()
                .enumerate()
                .map(|(j, cj)| cj * Complex64::from_polar(1.0, 2.0 * PI * (j * k) as f64 / 9.0))
                .sum();
            assert!((lam - want).norm() < 1e-12);
        }
    }

    #[test]
    fn apply_matches_dense_circulant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let col: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let circ = CirculantOperator::from_real_first_column(&col).unwrap();
        let colc: Vec<Complex64> = col.iter().map(|&v| c(v)).collect();
        let dense = dense_circulant(&colc).map(|z| z.re);
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let want = &dense * nalgebra::DVector::from_column_slice(&x);
        let got = circ.apply(&x).unwrap();
        for i in 0..8 {
            assert!((want[i] - got[i]).abs() < 1e-13);
        }
        let mut yt = vec![0.0; 8];
        LinearOperator::apply_transpose(&circ, &x, &mut yt);
        let want_t = dense.transpose() * nalgebra::DVector::from_column_slice(&x);
        for i in 0..8 {
            assert!((want_t[i] - yt[i]).abs() < 1e-13);
        }
        let back = circ.solve(&got).unwrap();
        for i in 0..8 {
            assert!((back[i] - x[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn absolute_value_examples() {
        let circ = CirculantOperator::from_eigenvalues(vec![c(-1.0), c(2.0)]).unwrap();
        let abs = circ.absolute_value();
        assert_eq!(abs.eigenvalues(), &[c(1.0), c(2.0)]);
        let spd = CirculantOperator::from_eigenvalues(vec![c(3.0), c(1.0), c(1.0)]).unwrap();
        assert_eq!(spd.absolute_value().eigenvalues(), spd.eigenvalues());
        assert!(spd.is_spd());
        assert!(!circ.is_spd());
    }

    #[test]
    fn singular_solve_is_refused() {
        let s = strang(&tridiag(4)).unwrap();
        assert!(matches!(s.solve(&[1.0; 4]), Err(Error::SingularPreconditioner(_))));
    }

    #[test]
    fn sampled_laplacian() {
        let s = sampled_circulant(&Symbol::laplacian(), 4).unwrap();
        for (got, want) in s.eigenvalues().iter().zip([0.0, 2.0, 4.0, 2.0]) {
            assert!((got - c(want)).norm() < 1e-14);
        }
        let k = sampled_circulant(&Symbol::constant(1, c(2.5)).unwrap(), 7).unwrap();
        assert!(k.eigenvalues().iter().all(|z| *z == c(2.5)));
    }

    #[test]
    fn superoptimal_fixes_circulants() {
        // A circulant written as a Toeplitz matrix: a_k = c_k, a_{-k} = c_{n-k}.
        let col = [3.0, 0.5, -0.2, 0.7, 0.1];
        let n = col.len();
        let t = ToeplitzOperator::from_lag_fn(n, |k| col[k.rem_euclid(n as isize) as usize]).unwrap();
        let s = superoptimal(&t).unwrap();
        let direct = CirculantOperator::from_real_first_column(&col).unwrap();
        for (a, b) in s.eigenvalues().iter().zip(direct.eigenvalues()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn block_circulant_matches_kronecker_assembly() {
        let cx = CirculantOperator::from_real_first_column(&[1.0, 0.3, -0.2, 0.4]).unwrap();
        let cy = CirculantOperator::from_real_first_column(&[0.5, -0.1, 0.25]).unwrap();
        let dense = |circ: &CirculantOperator| dense_circulant(&circ.first_column()).map(|z| z.re);
        let (dx, dy) = (dense(&cx), dense(&cy));
        let eye_x = DMatrix::<f64>::identity(4, 4);
        let eye_y = DMatrix::<f64>::identity(3, 3);
        let want = DMatrix::<f64>::identity(12, 12) - eye_y.kronecker(&dx) - dy.kronecker(&eye_x);
        let block = BlockCirculant2D::new(&cx, &cy, Combine::Nonsymmetric).unwrap();
        let x: Vec<f64> = (0..12).map(|i| (1.0 + i as f64).ln()).collect();
        let got = block.apply(&x).unwrap();
        let w = &want * nalgebra::DVector::from_column_slice(&x);
        for i in 0..12 {
            assert!((got[i] - w[i]).abs() < 1e-13);
        }
        let mut z = vec![0.0; 12];
        block.solve(&got, &mut z).unwrap();
        for i in 0..12 {
            assert!((z[i] - x[i]).abs() < 1e-10);
        }
        let mut zt = vec![0.0; 12];
        block.solve_transpose(&x, &mut zt).unwrap();
        let check = want.transpose() * nalgebra::DVector::from_column_slice(&zt);
        for i in 0..12 {
            assert!((check[i] - x[i]).abs() < 1e-10);
        }

        let abs = BlockCirculant2D::new(&cx, &cy, Combine::Absolute).unwrap();
        let ax = dense(&cx.absolute_value());
        let ay = dense(&cy.absolute_value());
        let want_abs = DMatrix::<f64>::identity(12, 12) + eye_y.kronecker(&ax) + ay.kronecker(&eye_x);
        let got = abs.apply(&x).unwrap();
        let w = &want_abs * nalgebra::DVector::from_column_slice(&x);
        for i in 0..12 {
            assert!((got[i] - w[i]).abs() < 1e-13);
        }
        assert!(abs.is_spd());
    }
}
