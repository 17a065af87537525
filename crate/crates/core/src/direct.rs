//! Exact solvers used as (ideal) preconditioners and coarse-grid solvers.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use crate::error::{check_len, Error, Result};
use crate::operator::Preconditioner;
use crate::toeplitz::ToeplitzOperator;

/// Dense Cholesky factorization of an SPD matrix.
#[derive(Clone, Debug)]
pub struct DenseCholesky {
    chol: Cholesky<f64, Dyn>,
}

impl DenseCholesky {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Input("Cholesky needs a square matrix".into()));
        }
        let asym = (&a - a.transpose()).abs().max();
        if asym > 1e-12 * a.abs().max().max(1.0) {
            return Err(Error::Factorization(format!(
                "matrix is not symmetric (max asymmetry {asym:e})"
            )));
        }
        Cholesky::new(a)
            .map(|chol| Self { chol })
            .ok_or_else(|| Error::Factorization("matrix is not positive definite".into()))
    }

    pub fn factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }
}

impl Preconditioner for DenseCholesky {
    fn size(&self) -> usize {
        self.chol.l_dirty().nrows()
    }
    fn solve(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        check_len(self.size(), r.len())?;
        let x = self.chol.solve(&DVector::from_column_slice(r));
        z.copy_from_slice(x.as_slice());
        Ok(())
    }
    fn solve_transpose(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.solve(r, z)
    }
    fn is_spd(&self) -> bool {
        true
    }
}

/// Dense LU with partial pivoting; keeps a factorization of `Aᵀ` as well.
#[derive(Clone, Debug)]
pub struct DenseLu {
    lu: LU<f64, Dyn, Dyn>,
    lu_t: LU<f64, Dyn, Dyn>,
    n: usize,
}

impl DenseLu {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Input("LU needs a square matrix".into()));
        }
        let n = a.nrows();
        let scale = a.abs().max().max(f64::MIN_POSITIVE);
        let lu = a.clone().lu();
        let pivot_min = (0..n)
            .map(|i| lu.u()[(i, i)].abs())
            .fold(f64::INFINITY, f64::min);
        if !lu.is_invertible() || pivot_min <= 1e-14 * scale {
            return Err(Error::Factorization(format!(
                "matrix is singular to working precision (smallest pivot {pivot_min:e})"
            )));
        }
        Ok(Self {
            lu,
            lu_t: a.transpose().lu(),
            n,
        })
    }

    fn solve_with(lu: &LU<f64, Dyn, Dyn>, r: &[f64], z: &mut [f64]) -> Result<()> {
        let x = lu
            .solve(&DVector::from_column_slice(r))
            .ok_or_else(|| Error::Factorization("LU solve failed".into()))?;
        z.copy_from_slice(x.as_slice());
        Ok(())
    }
}

impl Preconditioner for DenseLu {
    fn size(&self) -> usize {
        self.n
    }
    fn solve(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        check_len(self.n, r.len())?;
        Self::solve_with(&self.lu, r, z)
    }
    fn solve_transpose(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        check_len(self.n, r.len())?;
        Self::solve_with(&self.lu_t, r, z)
    }
    fn is_spd(&self) -> bool {
        false
    }
}

/// Band Cholesky factorization of a symmetric positive definite banded
/// matrix with half-bandwidth `band` (`a_{ij} = 0` for `|i-j| > band`).
#[derive(Clone, Debug)]
pub struct BandedCholesky {
    n: usize,
    band: usize,
    /// Row `i` holds `L[i, i-band..=i]`, left-padded with zeros.
    rows: Vec<f64>,
}

impl BandedCholesky {
    pub fn new(n: usize, band: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let w = band + 1;
        let mut rows = vec![0.0; n * w];
        for i in 0..n {
            let lo = i.saturating_sub(band);
            for j in lo..=i {
                // L[i][j] sits at rows[i*w + (j + band - i)].
                let mut s = entry(i, j);
                let k_lo = lo.max(j.saturating_sub(band));
                for k in k_lo..j {
                    s -= rows[i * w + k + band - i] * rows[j * w + k + band - j];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::Factorization(format!(
                            "banded matrix is not positive definite (pivot {s:e} at row {i})"
                        )));
                    }
                    rows[i * w + band] = s.sqrt();
                } else {
                    rows[i * w + j + band - i] = s / rows[j * w + band];
                }
            }
        }
        Ok(Self { n, band, rows })
    }

    /// Factorizes the symmetric banded Toeplitz matrix with lags `a_0..=a_band`.
    pub fn from_symmetric_toeplitz(op: &ToeplitzOperator, band: usize) -> Result<Self> {
        if op.levels() != 1 || !op.is_symmetric() {
            return Err(Error::Input(
                "banded Cholesky needs a symmetric one-level Toeplitz operator".into(),
            ));
        }
        let n = op.size();
        let band = band.min(n.saturating_sub(1));
        let lags: Vec<f64> = (0..=band as isize).map(|k| op.lag(k)).collect();
        Self::new(n, band, |i, j| lags[i - j])
    }

    pub fn band(&self) -> usize {
        self.band
    }
}

impl Preconditioner for BandedCholesky {
    fn size(&self) -> usize {
        self.n
    }
    fn solve(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        check_len(self.n, r.len())?;
        let (n, b, w) = (self.n, self.band, self.band + 1);
        // L y = r
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let mut s = r[i];
            for k in lo..i {
                s -= self.rows[i * w + k + b - i] * z[k];
            }
            z[i] = s / self.rows[i * w + b];
        }
        // Lᵀ x = y
        for i in (0..n).rev() {
            let hi = (i + b).min(n - 1);
            let mut s = z[i];
            for k in i + 1..=hi {
                s -= self.rows[k * w + i + b - k] * z[k];
            }
            z[i] = s / self.rows[i * w + b];
        }
        Ok(())
    }
    fn solve_transpose(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.solve(r, z)
    }
    fn is_spd(&self) -> bool {
        true
    }
}

/// Exact inverse of a symmetric positive definite Toeplitz matrix.
///
/// The first column `x` of `T⁻¹` comes from the Levinson recursion in
/// `O(n²)`; the Gohberg–Semencul formula
/// `T⁻¹ = (L(x) L(x)ᵀ - L(v) L(v)ᵀ) / x_0`, `v = (0, x_{n-1}, …, x_1)`,
/// then applies `T⁻¹` with four triangular Toeplitz products in `O(n log n)`.
#[derive(Clone, Debug)]
pub struct ToeplitzSpdSolver {
    n: usize,
    lower_x: ToeplitzOperator,
    lower_v: ToeplitzOperator,
    x0: f64,
}

impl ToeplitzSpdSolver {
    pub fn new(op: &ToeplitzOperator) -> Result<Self> {
        if op.levels() != 1 || !op.is_symmetric() {
            return Err(Error::Input(
                "Toeplitz SPD solver needs a symmetric one-level operator".into(),
            ));
        }
        let n = op.size();
        let t: Vec<f64> = (0..n as isize).map(|k| op.lag(k)).collect();
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let x = levinson(&t, &e1)?;
        let x0 = x[0];
        if !(x0 > 0.0) {
            return Err(Error::Factorization("Toeplitz matrix is not positive definite".into()));
        }
        let mut v = vec![0.0; n];
        for k in 1..n {
            v[k] = x[n - k];
        }
        let lower = |col: &[f64]| {
            ToeplitzOperator::from_lag_fn(n, |k| if k >= 0 { col[k as usize] } else { 0.0 })
        };
        Ok(Self {
            n,
            lower_x: lower(&x)?,
            lower_v: lower(&v)?,
            x0,
        })
    }
}

impl Preconditioner for ToeplitzSpdSolver {
    fn size(&self) -> usize {
        self.n
    }
    fn solve(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        check_len(self.n, r.len())?;
        let a = self.lower_x.matvec(&self.lower_x.matvec_transpose(r)?)?;
        let b = self.lower_v.matvec(&self.lower_v.matvec_transpose(r)?)?;
        for ((zi, ai), bi) in z.iter_mut().zip(a).zip(b) {
            *zi = (ai - bi) / self.x0;
        }
        Ok(())
    }
    fn solve_transpose(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        self.solve(r, z)
    }
    fn is_spd(&self) -> bool {
        true
    }
}

/// Solves `T x = b` for the symmetric positive definite Toeplitz matrix with
/// first column `t` (Levinson recursion).
pub fn levinson(t: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = t.len();
    check_len(n, b.len())?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let t0 = t[0];
    if !(t0 > 0.0) {
        return Err(Error::Factorization("Toeplitz diagonal must be positive".into()));
    }
    let r: Vec<f64> = t.iter().map(|v| v / t0).collect();
    let rhs: Vec<f64> = b.iter().map(|v| v / t0).collect();
    let mut x = vec![0.0; n];
    x[0] = rhs[0];
    if n == 1 {
        return Ok(x);
    }
    let mut y = vec![0.0; n];
    y[0] = -r[1];
    let mut beta = 1.0;
    let mut alpha = -r[1];
    let mut scratch = vec![0.0; n];
    for k in 1..n {
        beta *= 1.0 - alpha * alpha;
        if !(beta > 0.0) {
            return Err(Error::Factorization(
                "Toeplitz matrix is not positive definite (Levinson breakdown)".into(),
            ));
        }
        let mut s = rhs[k];
        for i in 0..k {
            s -= r[i + 1] * x[k - 1 - i];
        }
        let mu = s / beta;
        for i in 0..k {
            x[i] += mu * y[k - 1 - i];
        }
        x[k] = mu;
        if k < n - 1 {
            let mut s = r[k + 1];
            for i in 0..k {
                s += r[i + 1] * y[k - 1 - i];
            }
            alpha = -s / beta;
            for i in 0..k {
                scratch[i] = y[i] + alpha * y[k - 1 - i];
            }
            y[..k].copy_from_slice(&scratch[..k]);
            y[k] = alpha;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spd_lags(n: usize) -> Vec<f64> {
        // Coefficients of the positive symbol 3 + 2cos θ + cos 2θ·0.5 + tail.
        (0..n)
            .map(|k| match k {
                0 => 3.0,
                1 => 1.0,
                2 => 0.25,
                _ => 0.1 / (k * k) as f64,
            })
            .collect()
    }

    fn dense_sym_toeplitz(t: &[f64]) -> DMatrix<f64> {
        let n = t.len();
        DMatrix::from_fn(n, n, |i, j| t[i.abs_diff(j)])
    }

    #[test]
    fn levinson_matches_dense_solve() {
        let t = spd_lags(40);
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.3).sin()).collect();
        let x = levinson(&t, &b).unwrap();
        let check = dense_sym_toeplitz(&t) * DVector::from_column_slice(&x);
        for i in 0..40 {
            assert!((check[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn levinson_detects_indefinite() {
        assert!(levinson(&[1.0, 2.0, 0.0], &[1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn gohberg_semencul_inverse() {
        let n = 97;
        let t = spd_lags(n);
        let op = ToeplitzOperator::from_lag_fn(n, |k| t[k.unsigned_abs()]).unwrap();
        let solver = ToeplitzSpdSolver::new(&op).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut z = vec![0.0; n];
        solver.solve(&r, &mut z).unwrap();
        let back = op.matvec(&z).unwrap();
        for i in 0..n {
            assert!((back[i] - r[i]).abs() < 1e-11);
        }
        let chol = DenseCholesky::new(dense_sym_toeplitz(&t)).unwrap();
        let mut zc = vec![0.0; n];
        chol.solve(&r, &mut zc).unwrap();
        for i in 0..n {
            assert!((zc[i] - z[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn banded_cholesky_solves() {
        let n = 50;
        let op = ToeplitzOperator::from_lag_fn(n, |k| match k.abs() {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        })
        .unwrap();
        let chol = BandedCholesky::from_symmetric_toeplitz(&op, 1).unwrap();
        let r: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let mut z = vec![0.0; n];
        chol.solve(&r, &mut z).unwrap();
        let back = op.matvec(&z).unwrap();
        for i in 0..n {
            assert!((back[i] - r[i]).abs() < 1e-9);
        }
        let t = spd_lags(30);
        let wide = BandedCholesky::new(30, 5, |i, j| if i.abs_diff(j) <= 5 { t[i.abs_diff(j)] } else { 0.0 })
            .unwrap();
        let dense = DMatrix::from_fn(30, 30, |i, j| if i.abs_diff(j) <= 5 { t[i.abs_diff(j)] } else { 0.0 });
        let r: Vec<f64> = (0..30).map(|i| (i as f64).cos()).collect();
        let mut z = vec![0.0; 30];
        wide.solve(&r, &mut z).unwrap();
        let back = dense * DVector::from_column_slice(&z);
        for i in 0..30 {
            assert!((back[i] - r[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn banded_cholesky_rejects_indefinite() {
        assert!(BandedCholesky::new(3, 1, |i, j| if i == j { 1.0 } else { 2.0 }).is_err());
    }

    #[test]
    fn lu_solves_both_sides() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 2.0, 5.0, 1.0, 0.0, 3.0, 6.0]);
        let lu = DenseLu::new(a.clone()).unwrap();
        let r = [1.0, 2.0, 3.0];
        let mut z = [0.0; 3];
        lu.solve(&r, &mut z).unwrap();
        let back = &a * DVector::from_column_slice(&z);
        let mut zt = [0.0; 3];
        lu.solve_transpose(&r, &mut zt).unwrap();
        let back_t = a.transpose() * DVector::from_column_slice(&zt);
        for i in 0..3 {
            assert!((back[i] - r[i]).abs() < 1e-14);
            assert!((back_t[i] - r[i]).abs() < 1e-14);
        }
        assert!(DenseLu::new(DMatrix::zeros(2, 2)).is_err());
    }
}
