//! Matrix-free (multilevel) Toeplitz operators.
//!
//! A one- or two-level Toeplitz matrix is stored through its coefficient
//! tensor and applied in `O(N log N)` by embedding it in a circulant of
//! power-of-two length `>= 2n_i - 1` per level. Real univariate operators may
//! instead use a direct `O(n²)` product ([`MatvecKernel::Direct`]), whose
//! rounding error is not spread over `‖x‖` by the transform. Vectors of a two-level operator are row-major with the
//! second (inner) level fastest, i.e. `x[i0 * n1 + i1]`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{check_len, Error, Result};
use crate::operator::LinearOperator;
use crate::symbol::FourierCoefficients;

/// Largest dimension [`ToeplitzOperator::to_dense`] will materialize.
pub const DENSE_CAP: usize = 4096;

/// Coefficients whose imaginary parts stay below this (relative) are real.
const REAL_TOL: f64 = 1e-12;

/// How a real univariate operator forms `T x`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MatvecKernel {
    /// Circulant embedding and FFTs, `O(n log n)`.
    #[default]
    Fft,
    /// Row-by-row dot products with the lags, `O(n²)`.
    Direct,
}

#[derive(Clone)]
enum Embedding {
    /// Real univariate coefficients: real-to-complex transforms of length `2n`.
    Real {
        spectrum: Vec<Complex64>,
        forward: Arc<dyn RealToComplex<f64>>,
        inverse: Arc<dyn ComplexToReal<f64>>,
    },
    /// `lags[k + n - 1] = a_k` for `|k| < n`; `reversed` is `lags` back to front.
    Direct { lags: Vec<f64>, reversed: Vec<f64> },
    /// Reference path for complex coefficients or two levels.
    Complex {
        shape: Vec<usize>,
        spectrum: Vec<Complex64>,
        forward: Vec<Arc<dyn Fft<f64>>>,
        inverse: Vec<Arc<dyn Fft<f64>>>,
    },
}

/// A (multilevel) Toeplitz matrix `A_n(f)` with entry `a_{i-j}` at `(i, j)`
/// on every level.
#[derive(Clone)]
pub struct ToeplitzOperator {
    coeffs: FourierCoefficients,
    real: bool,
    embedding: Embedding,
}

impl std::fmt::Debug for ToeplitzOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ToeplitzOperator")
            .field("dims", &self.coeffs.dims())
            .field("real", &self.real)
            .finish()
    }
}

impl ToeplitzOperator {
    pub fn from_coeffs(coeffs: FourierCoefficients) -> Result<Self> {
        let scale = coeffs.max_abs().max(1.0);
        let real = coeffs.max_imag() <= REAL_TOL * scale;
        let coeffs = if real {
            coeffs.map(|_, a| Complex64::new(a.re, 0.0))
        } else {
            coeffs
        };
        let embedding = if real && coeffs.dims().len() == 1 {
            real_embedding(&coeffs)
        } else {
            complex_embedding(&coeffs)
        };
        Ok(Self {
            coeffs,
            real,
            embedding,
        })
    }

    /// Univariate real operator from `a_{-n+1}, …, a_{n-1}`.
    pub fn from_real_lags(lags: &[f64]) -> Result<Self> {
        Self::from_coeffs(FourierCoefficients::from_real_lags(lags)?)
    }

    /// Univariate real operator from a lag function `k ↦ a_k`.
    pub fn from_lag_fn(n: usize, lag: impl Fn(isize) -> f64) -> Result<Self> {
        Self::from_coeffs(FourierCoefficients::from_fn(vec![n], |k| {
            Complex64::new(lag(k[0]), 0.0)
        })?)
    }

    /// Switches the product kernel; `Direct` needs a real univariate operator.
    pub fn with_kernel(mut self, kernel: MatvecKernel) -> Result<Self> {
        self.embedding = match kernel {
            MatvecKernel::Fft if self.real && self.levels() == 1 => real_embedding(&self.coeffs),
            MatvecKernel::Fft => complex_embedding(&self.coeffs),
            MatvecKernel::Direct => {
                if !(self.real && self.levels() == 1) {
                    return Err(Error::Input(
                        "the direct kernel needs a real univariate operator".into(),
                    ));
                }
                let n = self.size() as isize;
                let lags: Vec<f64> = (-n + 1..n).map(|k| self.lag(k)).collect();
                let reversed = lags.iter().rev().copied().collect();
                Embedding::Direct { lags, reversed }
            }
        };
        Ok(self)
    }

    pub fn kernel(&self) -> MatvecKernel {
        match self.embedding {
            Embedding::Direct { .. } => MatvecKernel::Direct,
            _ => MatvecKernel::Fft,
        }
    }

    pub fn dims(&self) -> &[usize] {
        self.coeffs.dims()
    }

    pub fn levels(&self) -> usize {
        self.coeffs.dims().len()
    }

    /// `π(n) = n_1 ⋯ n_p`.
    pub fn size(&self) -> usize {
        self.coeffs.dims().iter().product()
    }

    pub fn coeffs(&self) -> &FourierCoefficients {
        &self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Real part of `a_k`.
    pub fn coefficient(&self, k: &[isize]) -> f64 {
        self.coeffs.get(k).re
    }

    /// Real univariate lag shorthand.
    pub fn lag(&self, k: isize) -> f64 {
        self.coeffs.lag(k).re
    }

    pub fn is_symmetric(&self) -> bool {
        self.real && self.coeffs.symmetry_defect() == 0.0
    }

    /// `y = T x` for real operators.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.require_real()?;
        check_len(self.size(), x.len())?;
        let mut y = vec![0.0; x.len()];
        self.apply_real(x, &mut y, false);
        Ok(y)
    }

    /// `y = Tᵀ x` for real operators.
    pub fn matvec_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.require_real()?;
        check_len(self.size(), x.len())?;
        let mut y = vec![0.0; x.len()];
        self.apply_real(x, &mut y, true);
        Ok(y)
    }

    /// Complex reference product `T x` (`Tᵀ x` when `transpose`).
    pub fn matvec_complex(&self, x: &[Complex64], transpose: bool) -> Result<Vec<Complex64>> {
        check_len(self.size(), x.len())?;
        match &self.embedding {
            Embedding::Real { .. } | Embedding::Direct { .. } => {
                let re: Vec<f64> = x.iter().map(|z| z.re).collect();
                let im: Vec<f64> = x.iter().map(|z| z.im).collect();
                let mut yr = vec![0.0; x.len()];
                let mut yi = vec![0.0; x.len()];
                self.apply_real(&re, &mut yr, transpose);
                self.apply_real(&im, &mut yi, transpose);
                Ok(yr
                    .into_iter()
                    .zip(yi)
                    .map(|(a, b)| Complex64::new(a, b))
                    .collect())
            }
            Embedding::Complex { .. } => Ok(self.apply_complex(x, transpose)),
        }
    }

    fn require_real(&self) -> Result<()> {
        if self.real {
            Ok(())
        } else {
            Err(Error::Input(
                "operator has complex coefficients; use matvec_complex".into(),
            ))
        }
    }

    fn apply_real(&self, x: &[f64], y: &mut [f64], transpose: bool) {
        match &self.embedding {
            Embedding::Real {
                spectrum,
                forward,
                inverse,
            } => {
                let n = x.len();
                let len = forward.len();
                let mut buf = vec![0.0; len];
                buf[..n].copy_from_slice(x);
                let mut freq = forward.make_output_vec();
                forward
                    .process(&mut buf, &mut freq)
                    .expect("buffer sizes match the plan");
                for (f, s) in freq.iter_mut().zip(spectrum) {
                    // The transposed real circulant has the conjugate spectrum.
                    *f *= if transpose { s.conj() } else { *s };
                }
                freq[0].im = 0.0;
                if let Some(last) = freq.last_mut() {
                    last.im = 0.0;
                }
                inverse
                    .process(&mut freq, &mut buf)
                    .expect("buffer sizes match the plan");
                let scale = 1.0 / len as f64;
                for (yi, b) in y.iter_mut().zip(&buf[..n]) {
                    *yi = b * scale;
                }
            }
            Embedding::Direct { lags, reversed } => {
                // Row i of T is a_{i-j} = reversed[n - 1 - i + j]; of Tᵀ, lags[n - 1 - i + j].
                let rows = if transpose { lags } else { reversed };
                let n = x.len();
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = dot(&rows[n - 1 - i..2 * n - 1 - i], x);
                }
            }
            Embedding::Complex { .. } => {
                let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                let yc = self.apply_complex(&xc, transpose);
                for (yi, v) in y.iter_mut().zip(yc) {
                    *yi = v.re;
                }
            }
        }
    }

    fn apply_complex(&self, x: &[Complex64], transpose: bool) -> Vec<Complex64> {
        let Embedding::Complex {
            shape,
            spectrum,
            forward,
            inverse,
        } = &self.embedding
        else {
            unreachable!("complex path requested on a real embedding");
        };
        let dims = self.coeffs.dims();
        let total: usize = shape.iter().product();
        let mut buf = vec![Complex64::new(0.0, 0.0); total];
        scatter(dims, shape, x, &mut buf);
        transform(&mut buf, shape, forward);
        if transpose {
            // Transposition negates every lag, i.e. every frequency index.
            for (idx, b) in buf.iter_mut().enumerate() {
                *b *= spectrum[negate_index(idx, shape)];
            }
        } else {
            for (b, s) in buf.iter_mut().zip(spectrum) {
                *b *= *s;
            }
        }
        transform(&mut buf, shape, inverse);
        let scale = 1.0 / total as f64;
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        gather(dims, shape, &buf, &mut y);
        y.iter_mut().for_each(|v| *v *= scale);
        y
    }

    /// Operator with coefficients `(a_j + a_{-j}) / 2`, i.e. `(T + Tᵀ)/2`,
    /// generated by `Re f`.
    pub fn symmetric_part(&self) -> Result<Self> {
        self.require_real()?;
        let c = &self.coeffs;
        let sym = FourierCoefficients::from_fn(c.dims().to_vec(), |k| {
            let neg: Vec<isize> = k.iter().map(|j| -j).collect();
            Complex64::new(0.5 * (c.get(k).re + c.get(&neg).re), 0.0)
        })?;
        Self::from_coeffs(sym)
    }

    /// `Tᵀ` as a Toeplitz operator (all lags negated).
    pub fn transpose(&self) -> Result<Self> {
        let c = &self.coeffs;
        let t = FourierCoefficients::from_fn(c.dims().to_vec(), |k| {
            let neg: Vec<isize> = k.iter().map(|j| -j).collect();
            c.get(&neg)
        })?;
        Self::from_coeffs(t)
    }

    /// Zeroes every coefficient with some `|k_i| ≥ band`.
    pub fn banded(&self, band: usize) -> Result<Self> {
        let band = band as isize;
        Self::from_coeffs(self.coeffs.map(|k, a| {
            if k.iter().all(|j| j.abs() < band) {
                a
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        self.to_dense_with_cap(DENSE_CAP)
    }

    pub fn to_dense_with_cap(&self, cap: usize) -> Result<DMatrix<f64>> {
        self.require_real()?;
        Ok(self.to_dense_complex_with_cap(cap)?.map(|z| z.re))
    }

    pub fn to_dense_complex_with_cap(&self, cap: usize) -> Result<DMatrix<Complex64>> {
        let size = self.size();
        if size > cap {
            return Err(Error::TooLarge { rows: size, cap });
        }
        let dims = self.coeffs.dims();
        let multi = |idx: usize| -> Vec<isize> {
            match dims {
                [_] => vec![idx as isize],
                [_, n1] => vec![(idx / n1) as isize, (idx % n1) as isize],
                _ => unreachable!(),
            }
        };
        Ok(DMatrix::from_fn(size, size, |r, c| {
            let (mr, mc) = (multi(r), multi(c));
            let lag: Vec<isize> = mr.iter().zip(&mc).map(|(a, b)| a - b).collect();
            self.coeffs.get(&lag)
        }))
    }
}

impl LinearOperator for ToeplitzOperator {
    fn size(&self) -> usize {
        ToeplitzOperator::size(self)
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_real(x, y, false)
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.apply_real(x, y, true)
    }

    fn is_symmetric(&self) -> bool {
        ToeplitzOperator::is_symmetric(self)
    }
}

/// Circulant length for `n` unknowns per axis: any length `>= 2n - 1` embeds
/// the Toeplitz matrix; a power of two keeps the FFT on its most accurate path.
fn embedding_len(n: usize) -> usize {
    (2 * n - 1).next_power_of_two()
}

fn real_embedding(coeffs: &FourierCoefficients) -> Embedding {
    let n = coeffs.dims()[0];
    let len = embedding_len(n);
    let mut column = vec![0.0; len];
    for j in 0..n as isize {
        column[j as usize] = coeffs.lag(j).re;
        if j > 0 {
            column[len - j as usize] = coeffs.lag(-j).re;
        }
    }
    let mut planner = RealFftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(len);
    let inverse = planner.plan_fft_inverse(len);
    let mut spectrum = forward.make_output_vec();
    forward
        .process(&mut column, &mut spectrum)
        .expect("buffer sizes match the plan");
    Embedding::Real {
        spectrum,
        forward,
        inverse,
    }
}

fn complex_embedding(coeffs: &FourierCoefficients) -> Embedding {
    let dims = coeffs.dims();
    let shape: Vec<usize> = dims.iter().map(|&n| embedding_len(n)).collect();
    let total: usize = shape.iter().product();
    let mut column = vec![Complex64::new(0.0, 0.0); total];
    let wrap = |k: isize, len: usize| k.rem_euclid(len as isize) as usize;
    match dims {
        [n] => {
            for k in -(*n as isize) + 1..*n as isize {
                column[wrap(k, shape[0])] = coeffs.get(&[k]);
            }
        }
        [n0, n1] => {
            for k0 in -(*n0 as isize) + 1..*n0 as isize {
                for k1 in -(*n1 as isize) + 1..*n1 as isize {
                    column[wrap(k0, shape[0]) * shape[1] + wrap(k1, shape[1])] =
                        coeffs.get(&[k0, k1]);
                }
            }
        }
        _ => unreachable!("levels are 1 or 2"),
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward: Vec<_> = shape.iter().map(|&l| planner.plan_fft_forward(l)).collect();
    let inverse: Vec<_> = shape.iter().map(|&l| planner.plan_fft_inverse(l)).collect();
    transform(&mut column, &shape, &forward);
    Embedding::Complex {
        shape,
        spectrum: column,
        forward,
        inverse,
    }
}

/// Sequential in `j`, so neighbouring terms of a local stencil cancel before
/// they reach the running sum.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |s, (u, v)| s + u * v)
}

fn negate_index(idx: usize, shape: &[usize]) -> usize {
    match shape {
        [l] => (l - idx) % l,
        [l0, l1] => {
            let (r, c) = (idx / l1, idx % l1);
            ((l0 - r) % l0) * l1 + (l1 - c) % l1
        }
        _ => unreachable!(),
    }
}

fn scatter(dims: &[usize], shape: &[usize], x: &[Complex64], buf: &mut [Complex64]) {
    match dims {
        [n] => buf[..*n].copy_from_slice(x),
        [_, n1] => {
            for (r, row) in x.chunks_exact(*n1).enumerate() {
                buf[r * shape[1]..r * shape[1] + n1].copy_from_slice(row);
            }
        }
        _ => unreachable!(),
    }
}

fn gather(dims: &[usize], shape: &[usize], buf: &[Complex64], y: &mut [Complex64]) {
    match dims {
        [n] => y.copy_from_slice(&buf[..*n]),
        [_, n1] => {
            for (r, row) in y.chunks_exact_mut(*n1).enumerate() {
                row.copy_from_slice(&buf[r * shape[1]..r * shape[1] + n1]);
            }
        }
        _ => unreachable!(),
    }
}

/// Separable FFT over a row-major tensor of the given shape.
pub(crate) fn transform(buf: &mut [Complex64], shape: &[usize], plans: &[Arc<dyn Fft<f64>>]) {
    match shape {
        [_] => plans[0].process(buf),
        [rows, cols] => {
            for row in buf.chunks_exact_mut(*cols) {
                plans[1].process(row);
            }
            let mut column = vec![Complex64::new(0.0, 0.0); *rows];
            for c in 0..*cols {
                for r in 0..*rows {
                    column[r] = buf[r * cols + c];
                }
                plans[0].process(&mut column);
                for r in 0..*rows {
                    buf[r * cols + c] = column[r];
                }
            }
        }
        _ => unreachable!(),
    }
}

/// Applies the exchange matrix `Y_{n_1} ⊗ ⋯ ⊗ Y_{n_p}`: the multi-index
/// `(i_1, …, i_p)` moves to `(n_1-1-i_1, …, n_p-1-i_p)`.
pub fn flip(dims: &[usize], x: &[f64]) -> Result<Vec<f64>> {
    check_len(dims.iter().product(), x.len())?;
    // In row-major layout the per-level reversal is the full reversal.
    Ok(x.iter().rev().copied().collect())
}

pub(crate) fn flip_in_place(x: &mut [f64]) {
    x.reverse();
}

/// `Y A` for a (multilevel) Toeplitz `A`: a (multilevel) Hankel operator,
/// hence symmetric.
pub struct Symmetrized<'a> {
    inner: &'a dyn LinearOperator,
}

impl<'a> Symmetrized<'a> {
    pub fn new(inner: &'a dyn LinearOperator) -> Self {
        Self { inner }
    }
}

impl LinearOperator for Symmetrized<'_> {
    fn size(&self) -> usize {
        self.inner.size()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply(x, y);
        flip_in_place(y);
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        // (Y A)ᵀ = Aᵀ Y.
        let flipped: Vec<f64> = x.iter().rev().copied().collect();
        self.inner.apply_transpose(&flipped, y);
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// `flip(T x)`.
pub fn symmetrized_apply(op: &ToeplitzOperator, x: &[f64]) -> Result<Vec<f64>> {
    let mut y = op.matvec(x)?;
    flip_in_place(&mut y);
    Ok(y)
}

/// Row-reversed dense matrix `Y A`.
pub fn flip_rows(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    DMatrix::from_fn(n, a.ncols(), |i, j| a[(n - 1 - i, j)])
}
