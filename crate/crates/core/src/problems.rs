//! The three experiment families: a nonsymmetric Toeplitz matrix with a
//! removable zero in its symbol, and one- and two-dimensional fractional
//! diffusion discretized by shifted Grünwald–Letnikov differences.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::symbol::{fourier_coeffs_sampled, FourierCoefficients, Symbol};
use crate::toeplitz::ToeplitzOperator;

/// Quadrature points used for the banded approximation of `A_n(|φ|)`.
const BANDED_MIN_POINTS: usize = 1 << 16;

/// `g_{α,k} = (-1)^k binom(α, k)`, `k = 0..=K`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrunwaldCoeffs {
    pub alpha: f64,
    pub values: Vec<f64>,
}

impl GrunwaldCoeffs {
    /// `g_k`, zero for negative `k`; extends the table by recurrence past its end.
    pub fn get(&self, k: isize) -> f64 {
        if k < 0 {
            return 0.0;
        }
        let k = k as usize;
        if let Some(&g) = self.values.get(k) {
            return g;
        }
        let mut g = *self.values.last().expect("table holds g_0");
        for j in self.values.len()..=k {
            g *= 1.0 - (self.alpha + 1.0) / j as f64;
        }
        g
    }
}

pub fn grunwald(alpha: f64, k: usize) -> Result<GrunwaldCoeffs> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Input(format!("Grünwald order {alpha} is outside (0, 2]")));
    }
    if k < 1 {
        return Err(Error::Input("need at least g_0 and g_1".into()));
    }
    let mut values = Vec::with_capacity(k + 1);
    values.push(1.0);
    for j in 1..=k {
        let prev = values[j - 1];
        values.push(prev * (1.0 - (alpha + 1.0) / j as f64));
    }
    Ok(GrunwaldCoeffs { alpha, values })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExampleId {
    One,
    Two,
    Three,
}

impl ExampleId {
    pub fn number(self) -> u8 {
        match self {
            ExampleId::One => 1,
            ExampleId::Two => 2,
            ExampleId::Three => 3,
        }
    }
}

/// Parameters an instance was built from. Unused fields stay `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemMeta {
    pub example: ExampleId,
    /// Level sizes; `(n_y, n_x)` for the two-dimensional problem.
    pub dims: Vec<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub d_plus: Option<f64>,
    pub d_minus: Option<f64>,
    pub e_plus: Option<f64>,
    pub e_minus: Option<f64>,
    /// `τ / h^α` on the diagonal (one-dimensional fractional problem).
    pub nu: Option<f64>,
    pub tau: Option<f64>,
    pub h: Option<f64>,
    pub seed: Option<u64>,
}

impl ProblemMeta {
    fn new(example: ExampleId, dims: Vec<usize>) -> Self {
        Self {
            example,
            dims,
            alpha: None,
            beta: None,
            d_plus: None,
            d_minus: None,
            e_plus: None,
            e_minus: None,
            nu: None,
            tau: None,
            h: None,
            seed: None,
        }
    }
}

/// Per-axis factors of `A = I - I⊗L_x - L_y⊗I`.
#[derive(Clone, Debug)]
pub struct KroneckerFactors {
    pub lx: ToeplitzOperator,
    pub ly: ToeplitzOperator,
}

#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub operator: ToeplitzOperator,
    pub rhs: Vec<f64>,
    pub symbol: Symbol,
    pub meta: ProblemMeta,
    pub factors: Option<KroneckerFactors>,
}

impl ProblemInstance {
    pub fn size(&self) -> usize {
        self.operator.size()
    }
}

/// Standard normal vector from a ChaCha8 stream.
pub fn random_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Uniform `[0, 1)` vector from a ChaCha8 stream.
pub fn uniform_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Distribution of the random right-hand side of the first example.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum RhsDistribution {
    /// Uniform on `[0, 1)`.
    #[default]
    Uniform,
    /// Standard normal.
    Normal,
}

impl RhsDistribution {
    pub fn sample(self, n: usize, seed: u64) -> Vec<f64> {
        match self {
            RhsDistribution::Uniform => uniform_rhs(n, seed),
            RhsDistribution::Normal => random_rhs(n, seed),
        }
    }
}

/// Fourier coefficients of `θ` on `(-π, π)`, divided by `i`: `(-1)^m / m`.
fn theta_coeff(m: isize) -> f64 {
    if m == 0 {
        0.0
    } else if m % 2 == 0 {
        1.0 / m as f64
    } else {
        -1.0 / m as f64
    }
}

/// Closed-form `a_k` of `(2 - 2cos θ)(1 + iθ)`; all are real.
pub fn example1_coefficient(k: isize) -> f64 {
    let real = match k.abs() {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    };
    // iθ has coefficients -(-1)^m/m; convolve with (-1, 2, -1).
    real - (2.0 * theta_coeff(k) - theta_coeff(k - 1) - theta_coeff(k + 1))
}

/// `f(θ) = (2 - 2cos θ)(1 + iθ)` with closed-form coefficients and phase
/// `(1 + iθ)/√(1 + θ²)`.
pub fn example1_symbol() -> Symbol {
    let phase = Symbol::new(1, "(1+iθ)/|1+iθ|", |t: &[f64]| {
        Complex64::new(1.0, t[0]) / (1.0 + t[0] * t[0]).sqrt()
    })
    .expect("dim 1 is valid");
    Symbol::new(1, "(2-2cosθ)(1+iθ)", |t: &[f64]| {
        Complex64::new(2.0 - 2.0 * t[0].cos(), 0.0) * Complex64::new(1.0, t[0])
    })
    .expect("dim 1 is valid")
    .with_coefficients(|k: &[isize]| Complex64::new(example1_coefficient(k[0]), 0.0))
    .with_unit_phase(phase)
}

/// The nonsymmetric example with a uniform `[0, 1)` right-hand side.
pub fn example1(n: usize, seed: u64) -> Result<ProblemInstance> {
    example1_with_rhs(n, seed, RhsDistribution::default())
}

pub fn example1_with_rhs(n: usize, seed: u64, rhs: RhsDistribution) -> Result<ProblemInstance> {
    if n < 8 {
        return Err(Error::Input(format!("example 1 needs n >= 8, got {n}")));
    }
    let operator = ToeplitzOperator::from_lag_fn(n, example1_coefficient)?;
    let mut meta = ProblemMeta::new(ExampleId::One, vec![n]);
    meta.seed = Some(seed);
    Ok(ProblemInstance {
        operator,
        rhs: rhs.sample(n, seed),
        symbol: example1_symbol(),
        meta,
        factors: None,
    })
}

/// `f_α(θ) = -e^{-iθ}(1 - e^{iθ})^α` on the principal branch.
pub fn f_alpha(alpha: f64, theta: f64) -> Complex64 {
    let s = (theta / 2.0).sin().abs();
    if s == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    // 1 - e^{iθ} = 2|sin(θ/2)| e^{i(θ - π sgn θ)/2}
    let arg = (theta - PI * theta.signum()) / 2.0;
    let pow = Complex64::from_polar((2.0 * s).powf(alpha), alpha * arg);
    -Complex64::from_polar(1.0, -theta) * pow
}

/// `a_m` of `d₊ f_α(θ) + d₋ f_α(-θ)`, i.e. of `d₊ L_α + d₋ L_αᵀ`.
fn fractional_lag(g: &GrunwaldCoeffs, d_plus: f64, d_minus: f64, m: isize) -> f64 {
    -d_plus * g.get(m + 1) - d_minus * g.get(1 - m)
}

fn check_weights(name: &str, plus: f64, minus: f64) -> Result<()> {
    if !(plus >= 0.0 && minus >= 0.0 && plus.is_finite() && minus.is_finite()) {
        return Err(Error::Input(format!("{name} weights must be finite and nonnegative")));
    }
    if plus == 0.0 && minus == 0.0 {
        return Err(Error::Input(format!("{name} weights must not both vanish")));
    }
    Ok(())
}

/// `φ(θ) = ν + d₊ f_α(θ) + d₋ f_α(-θ)` for `α ∈ (0, 2]`, with closed-form
/// coefficients precomputed up to lag `max_lag`.
pub fn fractional_symbol(
    alpha: f64,
    d_plus: f64,
    d_minus: f64,
    nu: f64,
    max_lag: usize,
) -> Result<Symbol> {
    check_weights("d", d_plus, d_minus)?;
    let g = Arc::new(grunwald(alpha, max_lag.max(1) + 2)?);
    Ok(Symbol::new(1, format!("φ(α={alpha}, d+={d_plus}, d-={d_minus}, ν={nu})"), move |t: &[f64]| {
        Complex64::new(nu, 0.0) + f_alpha(alpha, t[0]) * d_plus + f_alpha(alpha, -t[0]) * d_minus
    })?
    .with_coefficients(move |k: &[isize]| {
        let delta = if k[0] == 0 { nu } else { 0.0 };
        Complex64::new(delta + fractional_lag(&g, d_plus, d_minus, k[0]), 0.0)
    }))
}

/// `τ = 1/⌈n^α⌉`, `h = 1/(n+1)`, `ν = τ/h^α`.
pub fn time_step(n: usize, alpha: f64) -> (f64, f64, f64) {
    let tau = 1.0 / (n as f64).powf(alpha).ceil();
    let h = 1.0 / (n as f64 + 1.0);
    (tau, h, tau / h.powf(alpha))
}

/// Interior nodes `x_i = i h`, `i = 1..=n`.
fn nodes(n: usize) -> Vec<f64> {
    let h = 1.0 / (n as f64 + 1.0);
    (1..=n).map(|i| i as f64 * h).collect()
}

/// One backward-Euler step of one-dimensional fractional diffusion:
/// `(νI + d₊L_α + d₋L_αᵀ) u¹ = ν u⁰` with `u⁰ = 80 sin(20x) cos(10x)`.
pub fn example2(n: usize, alpha: f64, d_plus: f64, d_minus: f64) -> Result<ProblemInstance> {
    if n < 8 {
        return Err(Error::Input(format!("example 2 needs n >= 8, got {n}")));
    }
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Input(format!("example 2 needs α in (1, 2), got {alpha}")));
    }
    check_weights("d", d_plus, d_minus)?;
    let (tau, h, nu) = time_step(n, alpha);
    let g = grunwald(alpha, n + 1)?;
    let operator = ToeplitzOperator::from_lag_fn(n, |m| {
        let diag = if m == 0 { nu } else { 0.0 };
        diag + fractional_lag(&g, d_plus, d_minus, m)
    })?;
    let rhs = nodes(n)
        .into_iter()
        .map(|x| nu * 80.0 * (20.0 * x).sin() * (10.0 * x).cos())
        .collect();
    let mut meta = ProblemMeta::new(ExampleId::Two, vec![n]);
    meta.alpha = Some(alpha);
    meta.d_plus = Some(d_plus);
    meta.d_minus = Some(d_minus);
    meta.nu = Some(nu);
    meta.tau = Some(tau);
    meta.h = Some(h);
    Ok(ProblemInstance {
        operator,
        rhs,
        symbol: fractional_symbol(alpha, d_plus, d_minus, nu, n)?,
        meta,
        factors: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Example3Params {
    pub alpha: f64,
    pub beta: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    pub e_plus: f64,
    pub e_minus: f64,
}

impl Default for Example3Params {
    fn default() -> Self {
        Self {
            alpha: 1.5,
            beta: 1.25,
            d_plus: 2.0,
            d_minus: 0.5,
            e_plus: 0.3,
            e_minus: 1.0,
        }
    }
}

/// One backward-Euler step of two-dimensional fractional diffusion on an
/// `n × n` grid: `(I - I⊗L_x - L_y⊗I) u¹ = u⁰`, `u⁰ = 100 sin(10x) cos(y)`.
///
/// `L_x = -(τ/h^α)(d₊L_α + d₋L_αᵀ)` is the Grünwald approximation of the
/// fractional derivative (negative semidefinite part), so that `A` has
/// positive definite symmetric part. Unknowns are ordered with `x` fastest.
pub fn example3(n: usize, p: Example3Params) -> Result<ProblemInstance> {
    if n < 7 {
        return Err(Error::Input(format!("example 3 needs n >= 7 per axis, got {n}")));
    }
    for (name, v) in [("α", p.alpha), ("β", p.beta)] {
        if !(v > 1.0 && v < 2.0) {
            return Err(Error::Input(format!("example 3 needs {name} in (1, 2), got {v}")));
        }
    }
    check_weights("d", p.d_plus, p.d_minus)?;
    check_weights("e", p.e_plus, p.e_minus)?;
    let tau = 1.0 / (n as f64).powf(p.alpha).ceil();
    let h = 1.0 / (n as f64 + 1.0);
    let cx = tau / h.powf(p.alpha);
    let cy = tau / h.powf(p.beta);
    let gx = grunwald(p.alpha, n + 1)?;
    let gy = grunwald(p.beta, n + 1)?;
    let lx_lag = |m: isize| -cx * fractional_lag(&gx, p.d_plus, p.d_minus, m);
    let ly_lag = |m: isize| -cy * fractional_lag(&gy, p.e_plus, p.e_minus, m);
    let lx = ToeplitzOperator::from_lag_fn(n, lx_lag)?;
    let ly = ToeplitzOperator::from_lag_fn(n, ly_lag)?;

    let coeffs = FourierCoefficients::from_fn(vec![n, n], |k| {
        let (ky, kx) = (k[0], k[1]);
        let mut a = if ky == 0 && kx == 0 { 1.0 } else { 0.0 };
        if ky == 0 {
            a -= lx_lag(kx);
        }
        if kx == 0 {
            a -= ly_lag(ky);
        }
        Complex64::new(a, 0.0)
    })?;
    let operator = ToeplitzOperator::from_coeffs(coeffs)?;

    let xs = nodes(n);
    let mut rhs = Vec::with_capacity(n * n);
    for &y in &xs {
        for &x in &xs {
            rhs.push(100.0 * (10.0 * x).sin() * y.cos());
        }
    }

    let sym_x = fractional_symbol(p.alpha, p.d_plus, p.d_minus, 0.0, n)?;
    let sym_y = fractional_symbol(p.beta, p.e_plus, p.e_minus, 0.0, n)?;
    let (ex, ey) = (sym_x.clone(), sym_y.clone());
    let symbol = Symbol::new(2, "1 + cx φx(θx) + cy φy(θy)", move |t: &[f64]| {
        Complex64::new(1.0, 0.0) + ey.value(&[t[0]]) * cy + ex.value(&[t[1]]) * cx
    })?
    .with_coefficients(move |k: &[isize]| {
        let (ky, kx) = (k[0], k[1]);
        let mut a = Complex64::new(if ky == 0 && kx == 0 { 1.0 } else { 0.0 }, 0.0);
        if ky == 0 {
            a += sym_x.analytic_coefficient(&[kx]).expect("closed form attached") * cx;
        }
        if kx == 0 {
            a += sym_y.analytic_coefficient(&[ky]).expect("closed form attached") * cy;
        }
        a
    });

    let mut meta = ProblemMeta::new(ExampleId::Three, vec![n, n]);
    meta.alpha = Some(p.alpha);
    meta.beta = Some(p.beta);
    meta.d_plus = Some(p.d_plus);
    meta.d_minus = Some(p.d_minus);
    meta.e_plus = Some(p.e_plus);
    meta.e_minus = Some(p.e_minus);
    meta.tau = Some(tau);
    meta.h = Some(h);
    Ok(ProblemInstance {
        operator,
        rhs,
        symbol,
        meta,
        factors: Some(KroneckerFactors { lx, ly }),
    })
}

/// Number of leading row/column entries kept in the banded `A_n(|φ|)`.
pub fn banded_width(n: usize, alpha: f64) -> usize {
    if (alpha - 1.25).abs() < 1e-12 {
        return 50;
    }
    let beta = if (alpha - 1.75).abs() < 1e-12 { 100.0 } else { 40.0 };
    (beta * 1.1f64.powf((n as f64 + 1.0).log2())).ceil() as usize
}

#[derive(Clone, Debug)]
pub struct BandedApproximation {
    pub operator: ToeplitzOperator,
    /// Entries kept in the first row and column, including the diagonal.
    pub width: usize,
    /// Whether the rule asked for more than `n` entries.
    pub clamped: bool,
}

/// Banded Toeplitz approximation of `A_n(|φ|)` keeping the first
/// [`banded_width`] entries of its first row and column.
pub fn banded_am(sym_abs: &Symbol, n: usize, alpha: f64) -> Result<BandedApproximation> {
    if sym_abs.dim() != 1 {
        return Err(Error::Input("banded approximation needs a univariate symbol".into()));
    }
    let wanted = banded_width(n, alpha);
    let width = wanted.min(n);
    let points = BANDED_MIN_POINTS.max((8 * (2 * width - 1)).next_power_of_two());
    let coeffs = fourier_coeffs_sampled(sym_abs, &[width], points)?;
    // |φ| is even, so the exact matrix is symmetric; remove rounding asymmetry.
    let operator =
        ToeplitzOperator::from_lag_fn(n, |k| 0.5 * (coeffs.lag(k).re + coeffs.lag(-k).re))?;
    Ok(BandedApproximation {
        operator,
        width,
        clamped: wanted > n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::fourier_coeffs;
    use nalgebra::DMatrix;

    #[test]
    fn rhs_distributions() {
        let u = uniform_rhs(1000, 4);
        assert!(u.iter().all(|&v| (0.0..1.0).contains(&v)));
        let mean = u.iter().sum::<f64>() / 1000.0;
        assert!((mean - 0.5).abs() < 0.05);
        assert_eq!(u, uniform_rhs(1000, 4));
        let z = RhsDistribution::Normal.sample(1000, 4);
        assert_eq!(z, random_rhs(1000, 4));
        assert!(z.iter().any(|&v| v < 0.0));
        let p = example1_with_rhs(32, 9, RhsDistribution::Normal).unwrap();
        assert_eq!(p.rhs, random_rhs(32, 9));
        assert_eq!(example1(32, 9).unwrap().rhs, uniform_rhs(32, 9));
    }

    #[test]
    fn grunwald_values() {
        let g = grunwald(2.0, 5).unwrap();
        assert_eq!(g.values, vec![1.0, -2.0, 1.0, 0.0, 0.0, 0.0]);
        let g = grunwald(1.5, 3).unwrap();
        assert_eq!(g.values[1], -1.5);
        assert!((g.values[2] - 1.5 * 0.5 / 2.0).abs() < 1e-15);
        assert!((g.get(10) - grunwald(1.5, 10).unwrap().values[10]).abs() < 1e-16);
        assert_eq!(g.get(-1), 0.0);
        assert!(grunwald(2.5, 3).is_err());
        assert!(grunwald(0.0, 3).is_err());
        assert!(grunwald(1.5, 0).is_err());
    }

    #[test]
    fn example1_coefficients_match_quadrature() {
        let sym = example1_symbol();
        let analytic = fourier_coeffs(&sym, &[40], 8).unwrap();
        let quad = fourier_coeffs_sampled(&sym, &[40], 1 << 20).unwrap();
        for k in -39..40 {
            assert!((analytic.lag(k) - quad.lag(k)).norm() < 1e-8, "k={k}");
        }
        assert_eq!(example1_coefficient(0), 2.0);
    }

    #[test]
    fn example1_symmetric_part_is_tridiagonal() {
        let p = example1(64, 3).unwrap();
        let s = p.operator.symmetric_part().unwrap();
        assert_eq!(s.lag(0), 2.0);
        assert!((s.lag(1) + 1.0).abs() < 1e-14);
        for k in 2..64 {
            assert!(s.lag(k).abs() < 1e-14);
        }
        assert!(!p.operator.is_symmetric());
        assert_eq!(p.rhs, uniform_rhs(64, 3));
        assert_ne!(p.rhs, uniform_rhs(64, 4));
    }

    #[test]
    fn f_alpha_at_pi() {
        assert!((f_alpha(2.0, PI) - Complex64::new(4.0, 0.0)).norm() < 1e-13);
        assert_eq!(f_alpha(1.5, 0.0), Complex64::new(0.0, 0.0));
        for &t in &[-2.5, -0.1, 0.4, 3.0] {
            let z = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, t);
            let want = -Complex64::from_polar(1.0, -t) * z.powf(1.5);
            assert!((f_alpha(1.5, t) - want).norm() < 1e-13);
        }
    }

    fn fracdiffmat(n: usize, alpha: f64) -> DMatrix<f64> {
        let g = grunwald(alpha, n + 1).unwrap();
        DMatrix::from_fn(n, n, |i, j| {
            let d = i as isize - j as isize;
            if d >= -1 {
                -g.values[(d + 1) as usize]
            } else {
                0.0
            }
        })
    }

    #[test]
    fn example2_matches_dense_assembly() {
        let (n, alpha, dp, dm) = (8, 1.5, 0.5, 1.0);
        let p = example2(n, alpha, dp, dm).unwrap();
        let nu = p.meta.nu.unwrap();
        let l = fracdiffmat(n, alpha);
        let want = DMatrix::identity(n, n) * nu + &l * dp + l.transpose() * dm;
        assert!((p.operator.to_dense().unwrap() - want).abs().max() < 1e-14);
        assert_eq!(p.meta.tau, Some(1.0 / 23.0));
        assert!((nu - 9f64.powf(1.5) / 23.0).abs() < 1e-14);
    }

    #[test]
    fn example2_symbol_quadrature_matches_operator() {
        for &(alpha, dp, dm) in &[(1.5, 0.5, 1.0), (1.25, 0.0, 3.0), (1.75, 1.0, 3.0)] {
            let p = example2(63, alpha, dp, dm).unwrap();
            let quad = fourier_coeffs_sampled(&p.symbol, &[63], 1 << 16).unwrap();
            for k in -62..63 {
                let err = (quad.lag(k) - Complex64::new(p.operator.lag(k), 0.0)).norm();
                assert!(err < 1e-10, "α={alpha} k={k} err={err}");
            }
        }
    }

    #[test]
    fn example2_symmetric_when_weights_agree() {
        let p = example2(31, 1.5, 1.0, 1.0).unwrap();
        assert!(p.operator.is_symmetric());
        assert!(p.operator.coeffs().symmetry_defect() < 1e-14);
    }

    #[test]
    fn example2_symmetric_part_is_positive_definite() {
        let p = example2(255, 1.5, 0.0, 3.0).unwrap();
        let s = p.operator.symmetric_part().unwrap().to_dense().unwrap();
        assert!(s.cholesky().is_some());
        let re = p.symbol.real_part();
        for m in 1..200 {
            let t = PI * m as f64 / 200.0;
            assert!(re.value(&[t]).re > 0.0 && re.value(&[-t]).re > 0.0);
        }
    }

    #[test]
    fn example2_domain() {
        assert!(example2(7, 1.5, 1.0, 1.0).is_err());
        assert!(example2(15, 2.0, 1.0, 1.0).is_err());
        assert!(example2(15, 1.5, 0.0, 0.0).is_err());
        assert!(example2(15, 1.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn example3_matches_kronecker_assembly() {
        let n = 7;
        let prm = Example3Params::default();
        let p = example3(n, prm).unwrap();
        let h: f64 = 1.0 / 8.0;
        let tau = 1.0 / 7f64.powf(1.5).ceil();
        let lx = (fracdiffmat(n, prm.alpha) * prm.d_plus
            + fracdiffmat(n, prm.alpha).transpose() * prm.d_minus)
            * (-tau / h.powf(prm.alpha));
        let ly = (fracdiffmat(n, prm.beta) * prm.e_plus
            + fracdiffmat(n, prm.beta).transpose() * prm.e_minus)
            * (-tau / h.powf(prm.beta));
        let id = DMatrix::<f64>::identity(n, n);
        let want = DMatrix::<f64>::identity(n * n, n * n) - id.kronecker(&lx) - ly.kronecker(&id);
        assert!((p.operator.to_dense().unwrap() - want).abs().max() < 1e-12);
        let f = p.factors.as_ref().unwrap();
        assert!((f.lx.to_dense().unwrap() - lx).abs().max() < 1e-13);
        assert!((f.ly.to_dense().unwrap() - ly).abs().max() < 1e-13);
        let quad = fourier_coeffs_sampled(&p.symbol, &[n, n], 1 << 10).unwrap();
        let err = quad
            .values()
            .iter()
            .zip(p.operator.coeffs().values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn example3_axis_swap_invariance() {
        let n = 7;
        let prm = Example3Params {
            alpha: 1.5,
            beta: 1.5,
            d_plus: 0.7,
            d_minus: 0.7,
            e_plus: 0.7,
            e_minus: 0.7,
        };
        let p = example3(n, prm).unwrap();
        assert!(p.operator.is_symmetric());
        let a = p.operator.to_dense().unwrap();
        // Permutation swapping the roles of x and y.
        let perm = |i: usize| (i % n) * n + i / n;
        let swapped = DMatrix::from_fn(n * n, n * n, |i, j| a[(perm(i), perm(j))]);
        assert!((swapped - a).abs().max() < 1e-13);
    }

    #[test]
    fn banded_widths() {
        assert_eq!(banded_width(1023, 1.25), 50);
        assert_eq!(banded_width(65535, 1.25), 50);
        assert_eq!(banded_width(1023, 1.5), 104);
        assert_eq!(banded_width(1023, 1.75), 260);
        assert_eq!(banded_width(1023, 1.3), 104);
    }

    #[test]
    fn banded_am_truncates_the_modulus_operator() {
        let p = example2(63, 1.5, 0.5, 1.0).unwrap();
        let abs = p.symbol.modulus();
        let full = fourier_coeffs_sampled(&abs, &[63], 1 << 16).unwrap();
        let band = banded_am(&abs, 63, 1.5).unwrap();
        assert!(band.clamped);
        assert_eq!(band.width, 63);
        for k in -62..63 {
            assert!((band.operator.lag(k) - full.lag(k).re).abs() < 1e-13);
        }
        let p = example2(255, 1.25, 0.5, 1.0).unwrap();
        let band = banded_am(&p.symbol.modulus(), 255, 1.25).unwrap();
        assert!(!band.clamped);
        assert!(band.operator.is_symmetric());
        assert!(band.operator.lag(49) != 0.0);
        assert_eq!(band.operator.lag(50), 0.0);
    }
}
