//! Generating functions on `[-π, π]^p` and their Fourier coefficients.
//!
//! A [`Symbol`] is an evaluable function `f(θ)` with optional closed-form
//! Fourier coefficients. Coefficients follow the convention
//! `a_k = (2π)^{-p} ∫ f(θ) e^{-i⟨θ,k⟩} dθ`, so that `f(θ) = Σ a_k e^{i⟨θ,k⟩}`
//! and entry `(i, j)` of the generated Toeplitz matrix is `a_{i-j}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

type EvalFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;
type CoeffFn = dyn Fn(&[isize]) -> Complex64 + Send + Sync;

/// Default oversampling factor for quadrature-computed coefficients.
pub const DEFAULT_OVERSAMPLE: usize = 8;

/// Threshold below which `f_R` counts as a zero of the real part.
const REAL_PART_ZERO: f64 = 1e-13;

/// Distance of the one-sided samples used to resolve `f_I / f_R` at zeros of `f_R`.
const LIMIT_OFFSET: f64 = 1e-6;

/// A generating function `f : [-π, π]^p → ℂ`, `p ∈ {1, 2}`.
///
/// For `p = 2` the first variable drives the outer (slow) level of the
/// multilevel matrix and the second the inner (fast) level.
#[derive(Clone)]
pub struct Symbol {
    dim: usize,
    name: String,
    eval: Arc<EvalFn>,
    coeffs: Option<Arc<CoeffFn>>,
    phase: Option<Box<Symbol>>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("dim", &self.dim)
            .field("name", &self.name)
            .field("analytic_coeffs", &self.coeffs.is_some())
            .finish()
    }
}

impl Symbol {
    pub fn new<F>(dim: usize, name: impl Into<String>, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        if !(1..=2).contains(&dim) {
            return Err(Error::Input(format!(
                "symbols of dimension {dim} are not supported (p must be 1 or 2)"
            )));
        }
        Ok(Self {
            dim,
            name: name.into(),
            eval: Arc::new(eval),
            coeffs: None,
            phase: None,
        })
    }

    /// Attaches closed-form Fourier coefficients. They take precedence over
    /// quadrature in [`fourier_coeffs`].
    pub fn with_coefficients<G>(mut self, coeffs: G) -> Self
    where
        G: Fn(&[isize]) -> Complex64 + Send + Sync + 'static,
    {
        self.coeffs = Some(Arc::new(coeffs));
        self
    }

    /// Attaches a closed form for `f/|f|`, for symbols whose zeros are
    /// removable in the phase (e.g. `(2 - 2cos θ) g(θ)` with `g` nonvanishing).
    pub fn with_unit_phase(mut self, phase: Symbol) -> Self {
        self.phase = Some(Box::new(phase));
        self
    }

    /// `c` everywhere.
    pub fn constant(dim: usize, c: Complex64) -> Result<Self> {
        Ok(Self::new(dim, format!("const({c})"), move |_| c)?.with_coefficients(
            move |k: &[isize]| {
                if k.iter().all(|&j| j == 0) {
                    c
                } else {
                    Complex64::new(0.0, 0.0)
                }
            },
        ))
    }

    /// Univariate trigonometric polynomial `Σ a_k e^{ikθ}` from `(k, a_k)` terms.
    pub fn trig_polynomial(terms: Vec<(isize, Complex64)>) -> Self {
        let table = terms.clone();
        Self::new(1, "trig-poly", move |t: &[f64]| {
            terms
                .iter()
                .map(|&(k, a)| a * Complex64::from_polar(1.0, k as f64 * t[0]))
                .sum()
        })
        .expect("dim 1 is valid")
        .with_coefficients(move |k: &[isize]| {
            table
                .iter()
                .filter(|(j, _)| *j == k[0])
                .map(|&(_, a)| a)
                .sum()
        })
    }

    /// `2 - 2cos θ`, the symbol of the second-order difference matrix.
    pub fn laplacian() -> Self {
        Self::trig_polynomial(vec![
            (-1, Complex64::new(-1.0, 0.0)),
            (0, Complex64::new(2.0, 0.0)),
            (1, Complex64::new(-1.0, 0.0)),
        ])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_analytic_coefficients(&self) -> bool {
        self.coeffs.is_some()
    }

    pub fn analytic_coefficient(&self, k: &[isize]) -> Option<Complex64> {
        self.coeffs.as_ref().map(|c| c(k))
    }

    /// `f(θ)`, checking that `θ` has `p` components inside `[-π, π]`.
    pub fn eval(&self, theta: &[f64]) -> Result<Complex64> {
        if theta.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: theta.len(),
            });
        }
        if let Some(t) = theta
            .iter()
            .find(|t| !t.is_finite() || t.abs() > PI * (1.0 + 1e-14))
        {
            return Err(Error::Input(format!("theta component {t} outside [-pi, pi]")));
        }
        let v = (self.eval)(theta);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Input(format!(
                "symbol '{}' is not finite at theta = {theta:?}",
                self.name
            )));
        }
        Ok(v)
    }

    /// Unchecked evaluation for hot loops over known-good grids.
    #[inline]
    pub fn value(&self, theta: &[f64]) -> Complex64 {
        (self.eval)(theta)
    }

    fn map_pointwise(
        &self,
        name: String,
        op: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Symbol {
        let inner = self.eval.clone();
        Symbol {
            dim: self.dim,
            name,
            eval: Arc::new(move |t: &[f64]| op(inner(t))),
            coeffs: None,
            phase: None,
        }
    }

    /// `f_R = Re f`.
    pub fn real_part(&self) -> Symbol {
        let mut s = self.map_pointwise(format!("Re {}", self.name), |z| Complex64::new(z.re, 0.0));
        if let Some(c) = self.coeffs.clone() {
            // Re f has coefficients (a_k + conj(a_{-k})) / 2.
            s.coeffs = Some(Arc::new(move |k: &[isize]| {
                let neg: Vec<isize> = k.iter().map(|j| -j).collect();
                (c(k) + c(&neg).conj()) * 0.5
            }));
        }
        s
    }

    /// `f_I = Im f`, as a real-valued symbol.
    pub fn imag_part(&self) -> Symbol {
        let mut s = self.map_pointwise(format!("Im {}", self.name), |z| Complex64::new(z.im, 0.0));
        if let Some(c) = self.coeffs.clone() {
            s.coeffs = Some(Arc::new(move |k: &[isize]| {
                let neg: Vec<isize> = k.iter().map(|j| -j).collect();
                (c(k) - c(&neg).conj()) / Complex64::new(0.0, 2.0)
            }));
        }
        s
    }

    /// `|f|`.
    pub fn modulus(&self) -> Symbol {
        self.map_pointwise(format!("|{}|", self.name), |z| Complex64::new(z.norm(), 0.0))
    }

    /// `f / |f|`. Uses the attached closed form when present; otherwise
    /// requires `|f| ≥ delta` on the `grid_size`-per-axis quadrature grid.
    pub fn unit_phase(&self, delta: f64, grid_size: usize) -> Result<Symbol> {
        if let Some(p) = &self.phase {
            return Ok((**p).clone());
        }
        let mut worst: Option<(f64, Vec<f64>)> = None;
        for_each_grid_point(self.dim, grid_size, GridKind::Midpoint, |theta| {
            let m = self.value(theta).norm();
            if m < delta && worst.as_ref().is_none_or(|(w, _)| m < *w) {
                worst = Some((m, theta.to_vec()));
            }
        });
        if let Some((modulus, theta)) = worst {
            return Err(Error::SingularSymbol {
                modulus,
                theta,
                delta,
            });
        }
        Ok(self.map_pointwise(format!("{0}/|{0}|", self.name), |z| z / z.norm()))
    }

    /// All four derived views at once; see [`SymbolViews`].
    pub fn views(&self, delta: f64, grid_size: usize) -> Result<SymbolViews> {
        Ok(SymbolViews {
            real: self.real_part(),
            imag: self.imag_part(),
            modulus: self.modulus(),
            phase: self.unit_phase(delta, grid_size)?,
        })
    }
}

/// `f_R`, `f_I`, `|f|` and `f/|f|` of a symbol.
#[derive(Clone, Debug)]
pub struct SymbolViews {
    pub real: Symbol,
    pub imag: Symbol,
    pub modulus: Symbol,
    pub phase: Symbol,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum GridKind {
    /// `N` points `-π + (m + 1/2)·2π/N`; avoids `0` and `±π` for even `N`.
    Midpoint,
    /// `N + 1` points `-π + m·2π/N`, both endpoints included.
    Closed,
}

pub(crate) fn grid_axis(n: usize, kind: GridKind) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    match kind {
        GridKind::Midpoint => (0..n).map(|m| -PI + (m as f64 + 0.5) * h).collect(),
        GridKind::Closed => (0..=n).map(|m| -PI + m as f64 * h).collect(),
    }
}

pub(crate) fn for_each_grid_point(
    dim: usize,
    n: usize,
    kind: GridKind,
    mut visit: impl FnMut(&[f64]),
) {
    let axis = grid_axis(n, kind);
    match dim {
        1 => axis.iter().for_each(|&t| visit(&[t])),
        _ => {
            for &t0 in &axis {
                for &t1 in &axis {
                    visit(&[t0, t1]);
                }
            }
        }
    }
}

/// Fourier coefficients `a_j`, `-n_i < j_i < n_i`, stored row-major with
/// the last level fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoefficients {
    dims: Vec<usize>,
    values: Vec<Complex64>,
}

impl FourierCoefficients {
    pub fn from_values(dims: Vec<usize>, values: Vec<Complex64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > 2 || dims.iter().any(|&n| n == 0) {
            return Err(Error::Input(format!("invalid level sizes {dims:?}")));
        }
        let expected: usize = dims.iter().map(|n| 2 * n - 1).product();
        if values.len() != expected {
            return Err(Error::Input(format!(
                "coefficient tensor for sizes {dims:?} needs {expected} entries, got {}",
                values.len()
            )));
        }
        Ok(Self { dims, values })
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[isize]) -> Complex64) -> Result<Self> {
        let ranges: Vec<isize> = dims.iter().map(|&n| n as isize).collect();
        let mut values = Vec::new();
        match ranges.as_slice() {
            [n] => {
                for k in -n + 1..*n {
                    values.push(f(&[k]));
                }
            }
            [n0, n1] => {
                for k0 in -n0 + 1..*n0 {
                    for k1 in -n1 + 1..*n1 {
                        values.push(f(&[k0, k1]));
                    }
                }
            }
            _ => {}
        }
        Self::from_values(dims, values)
    }

    /// Real univariate coefficients given as `a_{-n+1}, …, a_{n-1}`.
    pub fn from_real_lags(lags: &[f64]) -> Result<Self> {
        if lags.len() % 2 == 0 {
            return Err(Error::Input(format!(
                "lag vector must have odd length 2n-1, got {}",
                lags.len()
            )));
        }
        let n = lags.len().div_ceil(2);
        Self::from_values(vec![n], lags.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn extents(&self) -> Vec<usize> {
        self.dims.iter().map(|n| 2 * n - 1).collect()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn offset(&self, k: &[isize]) -> Option<usize> {
        if k.len() != self.dims.len() {
            return None;
        }
        let mut idx = 0usize;
        for (&j, &n) in k.iter().zip(&self.dims) {
            let n = n as isize;
            if j <= -n || j >= n {
                return None;
            }
            idx = idx * (2 * n as usize - 1) + (j + n - 1) as usize;
        }
        Some(idx)
    }

    /// `a_k`, or zero outside the stored range.
    pub fn get(&self, k: &[isize]) -> Complex64 {
        self.offset(k)
            .map(|i| self.values[i])
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Univariate shorthand for `get(&[k])`.
    pub fn lag(&self, k: isize) -> Complex64 {
        self.get(&[k])
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max_j |a_{-j} - conj(a_j)|`; zero for real-valued symbols.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (idx, &a) in self.values.iter().enumerate() {
            // Reversing the row-major tensor negates every index.
            let mirror = self.values[self.values.len() - 1 - idx];
            worst = worst.max((mirror - a.conj()).norm());
        }
        worst
    }

    /// `max_j |a_{-j} - a_j|`; zero when the generated matrix is symmetric.
    pub fn symmetry_defect(&self) -> f64 {
        let len = self.values.len();
        self.values
            .iter()
            .enumerate()
            .map(|(i, &a)| (self.values[len - 1 - i] - a).norm())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(&[isize], Complex64) -> Complex64) -> Self {
        let dims = self.dims.clone();
        Self::from_fn(dims, |k| f(k, self.get(k))).expect("same shape")
    }
}

/// Fourier coefficients of `sym` for a matrix of level sizes `dims`.
///
/// Closed-form coefficients are used when attached; otherwise `f` is sampled
/// on a uniform midpoint grid of `oversample · max(2n_i - 1)` points per axis
/// (rounded up to a power of two) and transformed with an FFT.
pub fn fourier_coeffs(
    sym: &Symbol,
    dims: &[usize],
    oversample: usize,
) -> Result<FourierCoefficients> {
    check_dims(sym, dims)?;
    if let Some(c) = &sym.coeffs {
        return FourierCoefficients::from_fn(dims.to_vec(), |k| c(k));
    }
    if oversample < 4 {
        return Err(Error::Input(format!("oversample must be at least 4, got {oversample}")));
    }
    let widest = dims.iter().map(|n| 2 * n - 1).max().unwrap_or(1);
    fourier_coeffs_sampled(sym, dims, (oversample * widest).next_power_of_two())
}

/// Quadrature coefficients on an explicit `points`-per-axis grid, ignoring
/// any closed form.
pub fn fourier_coeffs_sampled(
    sym: &Symbol,
    dims: &[usize],
    points: usize,
) -> Result<FourierCoefficients> {
    check_dims(sym, dims)?;
    let widest = dims.iter().map(|n| 2 * n - 1).max().unwrap_or(1);
    if points < widest {
        return Err(Error::Input(format!(
            "{points} quadrature points cannot resolve {widest} coefficients"
        )));
    }
    let axis = grid_axis(points, GridKind::Midpoint);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(points);
    let scale = 1.0 / (points as f64).powi(sym.dim as i32);
    // a_k = (1/N) Σ_m f(θ_m) e^{-ikθ_m} = (1/N) (-1)^k e^{-iπk/N} FFT[f]_k.
    let phase = |k: isize| {
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        Complex64::from_polar(sign, -PI * k as f64 / points as f64)
    };
    let wrap = |k: isize| k.rem_euclid(points as isize) as usize;

    match dims {
        [n] => {
            let mut buf: Vec<Complex64> = axis.iter().map(|&t| sym.value(&[t])).collect();
            check_finite(sym, &buf)?;
            fft.process(&mut buf);
            FourierCoefficients::from_fn(vec![*n], |k| buf[wrap(k[0])] * phase(k[0]) * scale)
        }
        [n0, n1] => {
            let mut grid = vec![Complex64::new(0.0, 0.0); points * points];
            for (r, &t0) in axis.iter().enumerate() {
                for (c, &t1) in axis.iter().enumerate() {
                    grid[r * points + c] = sym.value(&[t0, t1]);
                }
            }
            check_finite(sym, &grid)?;
            fft2_in_place(&mut grid, points, points, fft.as_ref());
            FourierCoefficients::from_fn(vec![*n0, *n1], |k| {
                grid[wrap(k[0]) * points + wrap(k[1])] * phase(k[0]) * phase(k[1]) * scale
            })
        }
        _ => unreachable!("checked by check_dims"),
    }
}

fn check_dims(sym: &Symbol, dims: &[usize]) -> Result<()> {
    if dims.len() != sym.dim {
        return Err(Error::Input(format!(
            "symbol has {} variables but {} level sizes were given",
            sym.dim,
            dims.len()
        )));
    }
    if dims.iter().any(|&n| n == 0) {
        return Err(Error::Input("level sizes must be positive".into()));
    }
    Ok(())
}

fn check_finite(sym: &Symbol, samples: &[Complex64]) -> Result<()> {
    if samples.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "symbol '{}' is not finite on the quadrature grid",
            sym.name
        )))
    }
}

/// Square 2D FFT using the same 1D plan along both axes.
fn fft2_in_place(data: &mut [Complex64], rows: usize, cols: usize, fft: &dyn rustfft::Fft<f64>) {
    for row in data.chunks_exact_mut(cols) {
        fft.process(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); rows];
    for c in 0..cols {
        for r in 0..rows {
            column[r] = data[r * cols + c];
        }
        fft.process(&mut column);
        for r in 0..rows {
            data[r * cols + c] = column[r];
        }
    }
}

/// Grid approximation of `ess sup |f_I / f_R|`.
///
/// Samples the closed grid of `grid_size + 1` points per axis. Points where
/// `f_R` vanishes (below `1e-13`) are replaced by one-sided samples at
/// distance `1e-6`, so removable degeneracies still contribute their limit.
/// Nested grids make the result non-decreasing as `grid_size` doubles.
pub fn epsilon_bound(f_imag: &Symbol, f_real: &Symbol, grid_size: usize) -> Result<f64> {
    if f_imag.dim != f_real.dim {
        return Err(Error::Input("f_I and f_R must have the same dimension".into()));
    }
    if grid_size < 2 {
        return Err(Error::Input("grid_size must be at least 2".into()));
    }
    let dim = f_real.dim;
    let mut worst = 0.0f64;
    let mut failure: Option<Error> = None;
    let ratio_at = |theta: &[f64]| -> std::result::Result<Option<f64>, Error> {
        let re = f_real.value(theta).re;
        if re < -REAL_PART_ZERO {
            return Err(Error::Assumption(format!(
                "f_R = {re:e} < 0 at theta = {theta:?}; f_R must be essentially positive"
            )));
        }
        if re <= REAL_PART_ZERO {
            return Ok(None);
        }
        Ok(Some((f_imag.value(theta).re / re).abs()))
    };
    for_each_grid_point(dim, grid_size, GridKind::Closed, |theta| {
        if failure.is_some() {
            return;
        }
        match ratio_at(theta) {
            Ok(Some(r)) => worst = worst.max(r),
            Ok(None) => {
                for axis in 0..dim {
                    for step in [-LIMIT_OFFSET, LIMIT_OFFSET] {
                        let mut probe = theta.to_vec();
                        probe[axis] = (probe[axis] + step).clamp(-PI, PI);
                        match ratio_at(&probe) {
                            Ok(Some(r)) => worst = worst.max(r),
                            Ok(None) => {}
                            Err(e) => failure = Some(e),
                        }
                    }
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(worst),
    }
}

/// Grid infimum and supremum of the real ratio `f / g`; `g` must be positive.
pub fn ratio_range(f: &Symbol, g: &Symbol, grid_size: usize) -> Result<(f64, f64)> {
    if f.dim != g.dim {
        return Err(Error::Input("f and g must have the same dimension".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut failure = None;
    for_each_grid_point(f.dim, grid_size, GridKind::Closed, |theta| {
        let gv = g.value(theta).re;
        if gv < -REAL_PART_ZERO {
            failure.get_or_insert_with(|| {
                Error::Assumption(format!("g = {gv:e} < 0 at theta = {theta:?}"))
            });
            return;
        }
        if gv <= REAL_PART_ZERO {
            return;
        }
        let r = f.value(theta).re / gv;
        lo = lo.min(r);
        hi = hi.max(r);
    });
    match failure {
        Some(e) => Err(e),
        None => Ok((lo, hi)),
    }
}
