//! Dense eigenvalue oracles certifying the spectral inclusion results for
//! small sizes: `A_R`-preconditioned symmetrized spectra, the `A_n(f/|f|)`
//! inclusion, generalized eigenvalues of `A_n(g)⁻¹A_n(f)`, and convergence of
//! the absolute-value Strang circulant.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circulant::{sampled_circulant, strang};
use crate::error::{Error, Result};
use crate::operator::{LinearOperator, Preconditioner};
use crate::symbol::{epsilon_bound, fourier_coeffs, fourier_coeffs_sampled, ratio_range, Symbol};
use crate::toeplitz::{flip_rows, ToeplitzOperator};

/// Largest matrix dimension the dense oracles accept.
pub const DENSE_EIG_CAP: usize = 2048;
/// Slack for eigensolver error in exact inclusions.
pub const EIG_TOL: f64 = 1e-8;
/// Extra slack where a grid-approximated supremum enters a bound.
pub const GRID_TOL: f64 = 1e-6;
/// Quadrature points for the coefficients of `f/|f|`, which may jump at `±π`.
pub const PHASE_QUADRATURE_POINTS: usize = 1 << 20;
/// Per-axis grid for `ε` and `(r, R)` on univariate symbols.
pub const GRID_1D: usize = 1 << 16;
/// Per-axis grid for bivariate symbols.
pub const GRID_2D: usize = 1 << 10;
/// Half-width of the windows around `±1` counted by the clustering diagnostic.
pub const CLUSTER_RADIUS: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub description: String,
    pub violations: usize,
    pub max_violation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairingCheck {
    /// Eigenvalues with `|λ| > 1 + EIG_TOL`.
    pub outliers: usize,
    /// Outliers with no `-λ` within `EIG_TOL`.
    pub unpaired: usize,
    pub max_mismatch: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    /// Sorted ascending.
    pub eigenvalues: Vec<f64>,
    pub bound: Option<BoundCheck>,
    pub pairing: Option<PairingCheck>,
    pub epsilon: Option<f64>,
    /// `(r, R)` for generalized eigenvalue checks.
    pub range: Option<(f64, f64)>,
    /// Fraction of eigenvalues within [`CLUSTER_RADIUS`] of `±1`.
    pub clustering_fraction: Option<f64>,
}

impl SpectrumReport {
    fn plain(eigenvalues: Vec<f64>) -> Self {
        Self {
            eigenvalues,
            bound: None,
            pairing: None,
            epsilon: None,
            range: None,
            clustering_fraction: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.bound.as_ref().is_none_or(|b| b.violations == 0)
            && self.pairing.as_ref().is_none_or(|p| p.unpaired == 0)
    }
}

fn check_dense_size(n: usize) -> Result<()> {
    if n > DENSE_EIG_CAP {
        return Err(Error::TooLarge {
            rows: n,
            cap: DENSE_EIG_CAP,
        });
    }
    Ok(())
}

fn symmetry_gap(m: &DMatrix<f64>) -> f64 {
    let scale = m.abs().max().max(f64::MIN_POSITIVE);
    (m - m.transpose()).abs().max() / scale
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Eigenvalues of `S x = λ P x` for SPD `P` and symmetric `S`, via
/// `L⁻¹ S L⁻ᵀ` with `P = L Lᵀ`.
pub fn generalized_symmetric_eigenvalues(p: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = p.nrows();
    if p.ncols() != n || s.nrows() != n || s.ncols() != n {
        return Err(Error::Input("P and S must be square of equal size".into()));
    }
    check_dense_size(n)?;
    if symmetry_gap(p) > 1e-12 || symmetry_gap(s) > 1e-12 {
        return Err(Error::Input("P and S must be symmetric".into()));
    }
    let chol = p
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Input("P is not positive definite".into()))?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(s)
        .ok_or_else(|| Error::Factorization("singular Cholesky factor".into()))?;
    let m = l
        .solve_lower_triangular(&y.transpose())
        .ok_or_else(|| Error::Factorization("singular Cholesky factor".into()))?;
    let m = (&m + m.transpose()) * 0.5;
    Ok(sorted(m.symmetric_eigenvalues().iter().copied().collect()))
}

pub fn preconditioned_spectrum_sym(p: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<SpectrumReport> {
    Ok(SpectrumReport::plain(generalized_symmetric_eigenvalues(p, s)?))
}

/// Dense `P⁻¹` assembled from preconditioner solves with unit vectors.
pub fn preconditioner_inverse_dense(p: &dyn Preconditioner) -> Result<DMatrix<f64>> {
    let n = p.size();
    check_dense_size(n)?;
    let mut out = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        p.solve(&e, &mut col)?;
        out.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    Ok(out)
}

/// Eigenvalues of `P⁻¹ A` for any preconditioner, sorted by real then imaginary part.
pub fn preconditioned_spectrum_general(
    p: &dyn Preconditioner,
    a: &dyn LinearOperator,
) -> Result<Vec<Complex64>> {
    check_dense_size(a.size())?;
    let pinv = preconditioner_inverse_dense(p)?;
    let dense = crate::operator::operator_to_dense(a);
    let mut eigs = general_eigenvalues(pinv * dense)?;
    eigs.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(eigs)
}

/// QR iterations allowed per eigenvalue before giving up.
const SCHUR_ITERATIONS_PER_EIGENVALUE: usize = 100;

/// Deflation thresholds tried in turn; a looser one moves eigenvalues by at
/// most about `threshold · ‖M‖`.
const SCHUR_DEFLATION: [f64; 3] = [f64::EPSILON, 1e-14, 1e-12];

/// Eigenvalues of a general real matrix through a real Schur form with a
/// bounded iteration count. Clustered spectra (near-identity `P⁻¹A`) can stall
/// the Francis iteration, which has no exceptional shifts, at the tightest threshold.
fn general_eigenvalues(m: DMatrix<f64>) -> Result<Vec<Complex64>> {
    let max_iter = SCHUR_ITERATIONS_PER_EIGENVALUE * m.nrows().max(1);
    for eps in SCHUR_DEFLATION {
        if let Some(schur) = nalgebra::linalg::Schur::try_new(m.clone(), eps, max_iter) {
            return Ok(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(Error::Factorization("real Schur iteration did not converge".into()))
}

/// Eigenvalues of `P⁻¹ S` for SPD `P` (given through its solves) and
/// symmetric `S`: with `P⁻¹ = G Gᵀ`, they are those of `Gᵀ S G`.
pub fn preconditioned_spectrum_spd(p: &dyn Preconditioner, s: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_dense_size(s.nrows())?;
    let pinv = preconditioner_inverse_dense(p)?;
    let pinv = (&pinv + pinv.transpose()) * 0.5;
    let g = pinv
        .cholesky()
        .ok_or_else(|| Error::Input("preconditioner inverse is not positive definite".into()))?
        .l();
    let m = g.transpose() * s * &g;
    let m = (&m + m.transpose()) * 0.5;
    Ok(sorted(m.symmetric_eigenvalues().iter().copied().collect()))
}

fn grid_for(dim: usize) -> usize {
    if dim == 1 {
        GRID_1D
    } else {
        GRID_2D
    }
}

/// `ε = ess sup |f_I / f_R|` of a symbol on the default grid.
pub fn symbol_epsilon(sym: &Symbol) -> Result<f64> {
    epsilon_bound(&sym.imag_part(), &sym.real_part(), grid_for(sym.dim()))
}

fn pairing(eigs: &[f64]) -> PairingCheck {
    let mut outliers = 0;
    let mut unpaired = 0;
    let mut max_mismatch = 0.0f64;
    for &l in eigs {
        if l.abs() <= 1.0 + EIG_TOL {
            continue;
        }
        outliers += 1;
        let target = -l;
        let idx = eigs.partition_point(|&v| v < target);
        let mut best = f64::INFINITY;
        for j in [idx.wrapping_sub(1), idx] {
            if let Some(&v) = eigs.get(j) {
                best = best.min((v - target).abs());
            }
        }
        max_mismatch = max_mismatch.max(best);
        if best > EIG_TOL {
            unpaired += 1;
        }
    }
    PairingCheck {
        outliers,
        unpaired,
        max_mismatch,
    }
}

/// Spectrum of `A_R⁻¹ (Y A)` checked against `1 ≤ |λ| ≤ 1 + ε` and
/// negation pairing of the non-unit eigenvalues, for a given `ε`.
pub fn check_symeigs_with_epsilon(op: &ToeplitzOperator, epsilon: f64) -> Result<SpectrumReport> {
    check_dense_size(op.size())?;
    let a = op.to_dense()?;
    let ar = (&a + a.transpose()) * 0.5;
    let s = flip_rows(&a);
    let eigs = generalized_symmetric_eigenvalues(&ar, &s)?;
    let (lo, hi) = (1.0 - EIG_TOL, 1.0 + epsilon + GRID_TOL);
    let mut violations = 0;
    let mut max_violation = 0.0f64;
    for &l in &eigs {
        let m = l.abs();
        let v = (lo - m).max(m - hi).max(0.0);
        if v > 0.0 {
            violations += 1;
            max_violation = max_violation.max(v);
        }
    }
    let pairing = pairing(&eigs);
    Ok(SpectrumReport {
        bound: Some(BoundCheck {
            description: format!("{lo} <= |λ| <= {hi}"),
            violations,
            max_violation,
        }),
        pairing: Some(pairing),
        epsilon: Some(epsilon),
        ..SpectrumReport::plain(eigs)
    })
}

/// [`check_symeigs_with_epsilon`] with `ε` computed from the symbol.
pub fn check_symeigs(op: &ToeplitzOperator, sym: &Symbol) -> Result<SpectrumReport> {
    check_symeigs_with_epsilon(op, symbol_epsilon(sym)?)
}

/// Spectrum of `Y A_n(f/|f|)`, checked against `[-1, 1]`.
pub fn check_absfeigs(sym: &Symbol, dims: &[usize], delta: f64) -> Result<SpectrumReport> {
    let size: usize = dims.iter().product();
    check_dense_size(size)?;
    let phase = sym.unit_phase(delta, grid_for(sym.dim()))?;
    let points = if sym.dim() == 1 {
        PHASE_QUADRATURE_POINTS
    } else {
        GRID_2D
    };
    let coeffs = fourier_coeffs_sampled(&phase, dims, points)?;
    let op = ToeplitzOperator::from_coeffs(coeffs)?;
    if !op.is_real() {
        return Err(Error::Unsupported(
            "A_n(f/|f|) has complex entries; only real symbols are supported".into(),
        ));
    }
    let s = flip_rows(&op.to_dense()?);
    let s = (&s + s.transpose()) * 0.5;
    let eigs = sorted(s.symmetric_eigenvalues().iter().copied().collect());
    let (lo, hi) = (-1.0 - GRID_TOL, 1.0 + GRID_TOL);
    let outside: Vec<f64> = eigs
        .iter()
        .map(|&l| (lo - l).max(l - hi))
        .filter(|&v| v > 0.0)
        .collect();
    let clustered = eigs
        .iter()
        .filter(|&&l| (l.abs() - 1.0).abs() <= CLUSTER_RADIUS)
        .count();
    Ok(SpectrumReport {
        bound: Some(BoundCheck {
            description: format!("{lo} <= λ <= {hi}"),
            violations: outside.len(),
            max_violation: outside.iter().copied().fold(0.0, f64::max),
        }),
        clustering_fraction: Some(clustered as f64 / eigs.len() as f64),
        ..SpectrumReport::plain(eigs)
    })
}

/// Generalized eigenvalues of `A_n(g)⁻¹ A_n(f)` checked against the grid
/// range `(r, R)` of `f/g`.
pub fn check_eigfunction_lemma(f: &Symbol, g: &Symbol, dims: &[usize]) -> Result<SpectrumReport> {
    let size: usize = dims.iter().product();
    check_dense_size(size)?;
    let (r, big_r) = ratio_range(f, g, grid_for(f.dim()))?;
    let af = ToeplitzOperator::from_coeffs(fourier_coeffs(f, dims, 8)?)?.to_dense()?;
    let ag = ToeplitzOperator::from_coeffs(fourier_coeffs(g, dims, 8)?)?.to_dense()?;
    let af = (&af + af.transpose()) * 0.5;
    let ag = (&ag + ag.transpose()) * 0.5;
    let eigs = generalized_symmetric_eigenvalues(&ag, &af)?;
    let (lo, hi) = (r - 1e-9, big_r + 1e-9);
    let mut violations = 0;
    let mut max_violation = 0.0f64;
    for &l in &eigs {
        let v = (lo - l).max(l - hi);
        if v > 0.0 {
            violations += 1;
            max_violation = max_violation.max(v);
        }
    }
    Ok(SpectrumReport {
        bound: Some(BoundCheck {
            description: format!("{lo} <= λ <= {hi}"),
            violations,
            max_violation,
        }),
        range: Some((r, big_r)),
        ..SpectrumReport::plain(eigs)
    })
}

/// Whether every eigenvalue lies strictly inside `(r, R)` by more than `margin`.
pub fn strictly_inside(report: &SpectrumReport, margin: f64) -> bool {
    match report.range {
        Some((r, big_r)) if r < big_r => report
            .eigenvalues
            .iter()
            .all(|&l| l > r + margin && l < big_r - margin),
        _ => true,
    }
}

/// Coefficients checked for summability before running the Strang curve.
pub const WIENER_PROBE: usize = 10_000;

/// Empirical Wiener-class check: the coefficient mass on lags in
/// `[WIENER_PROBE/2, WIENER_PROBE)` must be below `1e-3` of the total.
pub fn wiener_tail_ratio(sym: &Symbol) -> Result<f64> {
    if sym.dim() != 1 {
        return Err(Error::Unsupported("Wiener check is univariate".into()));
    }
    let c = fourier_coeffs(sym, &[WIENER_PROBE], 8)?;
    let k = WIENER_PROBE as isize;
    let total: f64 = (-k + 1..k).map(|j| c.lag(j).norm()).sum();
    let tail: f64 = (k / 2..k).map(|j| c.lag(j).norm() + c.lag(-j).norm()).sum();
    Ok(if total > 0.0 { tail / total } else { 0.0 })
}

/// `max_j | |λ_j(S_n)| - |f|(2πj/n) |` for the Strang circulant `S_n` of
/// `A_n(f)`, one entry per size.
pub fn strang_abs_error_curve(sym: &Symbol, sizes: &[usize]) -> Result<Vec<f64>> {
    let ratio = wiener_tail_ratio(sym)?;
    if ratio > 1e-3 {
        return Err(Error::Assumption(format!(
            "symbol does not look absolutely summable (tail ratio {ratio:e})"
        )));
    }
    let abs = sym.modulus();
    sizes
        .iter()
        .map(|&n| {
            let t = ToeplitzOperator::from_coeffs(fourier_coeffs(sym, &[n], 8)?)?;
            let s = strang(&t)?;
            let c = sampled_circulant(&abs, n)?;
            Ok(s.eigenvalues()
                .iter()
                .zip(c.eigenvalues())
                .map(|(a, b)| (a.norm() - b.re).abs())
                .fold(0.0, f64::max))
        })
        .collect()
}

/// C `%.17g` formatting: shortest of fixed and exponential notation with
/// 17 significant digits and trailing zeros removed.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One `"re im"` line per eigenvalue.
pub fn write_spectrum(path: &Path, eigs: &[Complex64]) -> Result<()> {
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?,
    );
    for z in eigs {
        writeln!(out, "{} {}", format_g17(z.re), format_g17(z.im))
            .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    }
    out.flush()
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Identity;
    use crate::problems::{example1, example2, fractional_symbol};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn general_eigenvalues_of_a_perturbed_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = DMatrix::from_fn(64, 64, |i, j| {
            f64::from(u8::from(i == j)) + 1e-15 * rng.random_range(-1.0..1.0)
        });
        let eigs = general_eigenvalues(m).unwrap();
        assert_eq!(eigs.len(), 64);
        assert!(eigs.iter().all(|z| (z - 1.0).norm() < 1e-10));
    }

    fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &b * b.transpose() + DMatrix::identity(n, n) * (n as f64 * 0.1)
    }

    #[test]
    fn identity_pencil() {
        let p = random_spd(20, 1);
        let eigs = generalized_symmetric_eigenvalues(&p, &p).unwrap();
        assert!(eigs.iter().all(|l| (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn exchange_matrix_spectrum() {
        let n = 10;
        let y = flip_rows(&DMatrix::identity(n, n));
        let eigs = generalized_symmetric_eigenvalues(&DMatrix::identity(n, n), &y).unwrap();
        assert_eq!(eigs.iter().filter(|&&l| (l + 1.0).abs() < 1e-12).count(), 5);
        assert_eq!(eigs.iter().filter(|&&l| (l - 1.0).abs() < 1e-12).count(), 5);
    }

    #[test]
    fn generalized_solver_matches_nonsymmetric_route() {
        for (n, seed) in [(8usize, 2u64), (64, 3), (200, 4)] {
            let p = random_spd(n, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 50);
            let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let s = (&b + b.transpose()) * 0.5;
            let ours = generalized_symmetric_eigenvalues(&p, &s).unwrap();
            let pinv_s = p.clone().lu().solve(&s).unwrap();
            let mut theirs: Vec<f64> = pinv_s.complex_eigenvalues().iter().map(|z| z.re).collect();
            theirs.sort_by(f64::total_cmp);
            for (a, b) in ours.iter().zip(&theirs) {
                assert!((a - b).abs() < 1e-8, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_indefinite_or_oversized() {
        let p = -DMatrix::<f64>::identity(4, 4);
        assert!(generalized_symmetric_eigenvalues(&p, &DMatrix::identity(4, 4)).is_err());
        let big = DMatrix::<f64>::identity(DENSE_EIG_CAP + 1, DENSE_EIG_CAP + 1);
        assert!(matches!(
            generalized_symmetric_eigenvalues(&big, &big),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn symmetric_operator_has_unit_spectrum() {
        let p = example2(64, 1.5, 1.0, 1.0).unwrap();
        let rep = check_symeigs(&p.operator, &p.symbol).unwrap();
        assert!(rep.epsilon.unwrap() < 1e-14);
        assert!(rep.passed());
        assert!(rep.eigenvalues.iter().all(|l| (l.abs() - 1.0).abs() < 1e-8));
    }

    #[test]
    fn example1_symeigs_small() {
        let p = example1(128, 0).unwrap();
        let rep = check_symeigs(&p.operator, &p.symbol).unwrap();
        assert!((rep.epsilon.unwrap() - std::f64::consts::PI).abs() < 1e-3);
        assert!(rep.passed(), "{:?} {:?}", rep.bound, rep.pairing);
        assert!(rep.pairing.as_ref().unwrap().outliers > 0);
    }

    #[test]
    fn halved_epsilon_is_detected() {
        let p = example1(128, 0).unwrap();
        let eps = symbol_epsilon(&p.symbol).unwrap();
        let rep = check_symeigs_with_epsilon(&p.operator, eps / 2.0).unwrap();
        assert!(rep.bound.unwrap().violations > 0);
    }

    #[test]
    fn absfeigs_small() {
        let rep = check_absfeigs(&crate::problems::example1_symbol(), &[128], 1e-12).unwrap();
        assert!(rep.passed(), "{:?}", rep.bound);
        let positive = Symbol::constant(1, Complex64::new(2.0, 0.0)).unwrap();
        let rep = check_absfeigs(&positive, &[9], 1e-12).unwrap();
        assert!(rep.eigenvalues.iter().all(|l| (l.abs() - 1.0).abs() < 1e-12));
        assert_eq!(rep.clustering_fraction, Some(1.0));
    }

    #[test]
    fn eigfunction_lemma_cases() {
        let lap = Symbol::laplacian();
        let rep = check_eigfunction_lemma(&lap, &lap, &[16]).unwrap();
        assert!(rep.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-12));
        assert_eq!(rep.range, Some((1.0, 1.0)));

        let one = Symbol::constant(1, Complex64::new(1.0, 0.0)).unwrap();
        let n = 20;
        let rep = check_eigfunction_lemma(&lap, &one, &[n]).unwrap();
        assert!(rep.passed());
        assert!(strictly_inside(&rep, 1e-12));
        for (k, l) in rep.eigenvalues.iter().enumerate() {
            let want = 2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((l - want).abs() < 1e-12);
        }
    }

    #[test]
    fn strang_curve_cases() {
        let lap = Symbol::laplacian();
        let errs = strang_abs_error_curve(&lap, &[3, 8, 33]).unwrap();
        assert!(errs.iter().all(|&e| e < 1e-13));
        let mode = Symbol::trig_polynomial(vec![(3, Complex64::new(1.0, 0.0))]);
        assert!(strang_abs_error_curve(&mode, &[7, 16]).unwrap().iter().all(|&e| e < 1e-13));
        // The jump of Im f at ±π makes the coefficients decay like 1/k.
        let ex1 = crate::problems::example1_symbol();
        assert!(matches!(strang_abs_error_curve(&ex1, &[16]), Err(Error::Assumption(_))));
        let phi = fractional_symbol(1.5, 0.5, 1.0, 1.0, WIENER_PROBE).unwrap();
        let errs = strang_abs_error_curve(&phi, &[127, 511]).unwrap();
        assert!(errs[1] < errs[0]);
    }

    #[test]
    fn g17_formatting() {
        assert_eq!(format_g17(1.0), "1");
        assert_eq!(format_g17(0.0), "0");
        assert_eq!(format_g17(0.1), "0.10000000000000001");
        assert_eq!(format_g17(-2.5), "-2.5");
        assert_eq!(format_g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_g17(123456.0), "123456");
        assert_eq!(format_g17(1e20), "1e+20");
        for &x in &[0.1, -3.7e-9, 12345.678901234567, 1e300, std::f64::consts::PI] {
            assert_eq!(format_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn spectrum_dump_round_trip() {
        let dir = std::env::temp_dir().join(format!("symtoep-spectrum-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("eigs.txt");
        let id = Identity(5);
        let eigs = preconditioned_spectrum_general(&id, &id).unwrap();
        write_spectrum(&path, &eigs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.lines().all(|l| l == "1 0"));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn spd_route_matches_cholesky_route() {
        let p = example1(64, 0).unwrap();
        let a = p.operator.to_dense().unwrap();
        let ar = (&a + a.transpose()) * 0.5;
        let chol = crate::direct::DenseCholesky::new(ar.clone()).unwrap();
        let s = flip_rows(&a);
        let x = preconditioned_spectrum_spd(&chol, &s).unwrap();
        let y = generalized_symmetric_eigenvalues(&ar, &s).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
