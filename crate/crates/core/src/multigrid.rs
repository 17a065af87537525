//! Geometric multigrid V-cycle for (multilevel) Toeplitz operators.
//!
//! Linear (bilinear in 2D) interpolation `P` with stencil `(1/2, 1, 1/2)`,
//! full-weighting restriction `R = Pᵀ/2`, Galerkin coarse operators `R A P`
//! and damped Jacobi smoothing. For a Toeplitz `A` every interpolation
//! stencil lies inside the grid, so `R A P` is again Toeplitz with lags
//! `b_d = (1/8) Σ_m k_m a_{2d+m}`, `k = (1, 4, 6, 4, 1)`, per level. All
//! levels above the coarsest are therefore applied matrix-free by FFT.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::direct::DenseLu;
use crate::error::{check_len, Error, Result};
use crate::operator::{operator_to_dense, LinearOperator, Preconditioner};
use crate::symbol::FourierCoefficients;
use crate::toeplitz::ToeplitzOperator;

/// Largest finest-level size [`GridHierarchy::spd_guard`] assembles.
pub const SPD_GUARD_CAP: usize = 2048;

/// Autocorrelation of the interpolation stencil `(1, 2, 1)`, lags -2..=2.
const GALERKIN_KERNEL: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VCycleConfig {
    pub pre_smooth: usize,
    pub post_smooth: usize,
    /// Jacobi damping factor in `(0, 1]`.
    pub omega: f64,
    /// Coarsening stops at the first level whose sizes are all `<= coarsest_size`.
    pub coarsest_size: usize,
}

impl Default for VCycleConfig {
    fn default() -> Self {
        Self {
            pre_smooth: 2,
            post_smooth: 2,
            omega: 0.7,
            coarsest_size: 7,
        }
    }
}

impl VCycleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pre_smooth + self.post_smooth == 0 {
            return Err(Error::Input("V-cycle needs at least one smoothing sweep".into()));
        }
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(Error::Input(format!("damping factor {} is outside (0, 1]", self.omega)));
        }
        if self.coarsest_size < 3 {
            return Err(Error::Input("coarsest size must be at least 3".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct Level {
    op: ToeplitzOperator,
    diag: f64,
}

/// Galerkin hierarchy; level 0 is the finest.
#[derive(Clone, Debug)]
pub struct GridHierarchy {
    cfg: VCycleConfig,
    levels: Vec<Level>,
    coarsest: DenseLu,
    coarsest_dense: DMatrix<f64>,
}

fn is_coarsenable(n: usize) -> bool {
    n >= 3 && (n + 1).is_power_of_two()
}

/// Galerkin coarse operator `R A P` of a (multilevel) Toeplitz operator.
pub fn galerkin_coarse(op: &ToeplitzOperator) -> Result<ToeplitzOperator> {
    let fine = op.coeffs();
    let dims = op.dims();
    if dims.iter().any(|&n| !is_coarsenable(n)) {
        return Err(Error::Input(format!(
            "level sizes {dims:?} must have the form 2^k - 1 with k >= 2"
        )));
    }
    let coarse_dims: Vec<usize> = dims.iter().map(|n| (n - 1) / 2).collect();
    let coeffs = match dims.len() {
        1 => FourierCoefficients::from_fn(coarse_dims, |d| {
            let mut s = Complex64::new(0.0, 0.0);
            for (i, w) in GALERKIN_KERNEL.iter().enumerate() {
                s += fine.lag(2 * d[0] + i as isize - 2) * *w;
            }
            s / 8.0
        })?,
        _ => FourierCoefficients::from_fn(coarse_dims, |d| {
            let mut s = Complex64::new(0.0, 0.0);
            for (i, wi) in GALERKIN_KERNEL.iter().enumerate() {
                for (j, wj) in GALERKIN_KERNEL.iter().enumerate() {
                    let k = [2 * d[0] + i as isize - 2, 2 * d[1] + j as isize - 2];
                    s += fine.get(&k) * (wi * wj);
                }
            }
            s / 64.0
        })?,
    };
    ToeplitzOperator::from_coeffs(coeffs)
}

impl GridHierarchy {
    pub fn build(op: &ToeplitzOperator, cfg: VCycleConfig) -> Result<Self> {
        cfg.validate()?;
        if !op.is_real() {
            return Err(Error::Input("multigrid needs a real operator".into()));
        }
        let dims = op.dims();
        if dims.iter().any(|&n| !is_coarsenable(n)) {
            return Err(Error::Input(format!(
                "finest level sizes {dims:?} must have the form 2^k - 1"
            )));
        }
        if dims.iter().all(|&n| n <= cfg.coarsest_size) {
            return Err(Error::Input(format!(
                "finest level sizes {dims:?} must exceed the coarsest size {}",
                cfg.coarsest_size
            )));
        }
        let mut levels = Vec::new();
        let mut current = op.clone();
        loop {
            let diag = current.coefficient(&vec![0; current.levels()]);
            let done = current.dims().iter().all(|&n| n <= cfg.coarsest_size)
                || current.dims().iter().any(|&n| !is_coarsenable(n) || n == 3);
            if done {
                let dense = current.to_dense()?;
                let coarsest = DenseLu::new(dense.clone())?;
                levels.push(Level { op: current, diag });
                return Ok(Self {
                    cfg,
                    levels,
                    coarsest,
                    coarsest_dense: dense,
                });
            }
            if diag == 0.0 {
                return Err(Error::Input("Jacobi smoothing needs a nonzero diagonal".into()));
            }
            let next = galerkin_coarse(&current)?;
            levels.push(Level { op: current, diag });
            current = next;
        }
    }

    pub fn config(&self) -> &VCycleConfig {
        &self.cfg
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Level sizes, finest first.
    pub fn level_sizes(&self) -> Vec<Vec<usize>> {
        self.levels.iter().map(|l| l.op.dims().to_vec()).collect()
    }

    pub fn level_operator(&self, level: usize) -> &ToeplitzOperator {
        &self.levels[level].op
    }

    pub fn coarsest_matrix(&self) -> &DMatrix<f64> {
        &self.coarsest_dense
    }

    pub fn size(&self) -> usize {
        self.levels[0].op.size()
    }

    /// One V-cycle with zero initial guess: `z ≈ A⁻¹ r`.
    pub fn vcycle_apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        check_len(self.size(), r.len())?;
        self.cycle(0, r, false)
    }

    fn cycle(&self, level: usize, r: &[f64], transpose: bool) -> Result<Vec<f64>> {
        let n = r.len();
        let mut x = vec![0.0; n];
        if level + 1 == self.levels.len() {
            if transpose {
                self.coarsest.solve_transpose(r, &mut x)?;
            } else {
                self.coarsest.solve(r, &mut x)?;
            }
            return Ok(x);
        }
        let lvl = &self.levels[level];
        let (pre, post) = if transpose {
            (self.cfg.post_smooth, self.cfg.pre_smooth)
        } else {
            (self.cfg.pre_smooth, self.cfg.post_smooth)
        };
        let mut ax = vec![0.0; n];
        let apply = |v: &[f64], out: &mut [f64]| {
            if transpose {
                lvl.op.apply_transpose(v, out)
            } else {
                lvl.op.apply(v, out)
            }
        };
        let step = self.cfg.omega / lvl.diag;
        let mut x_is_zero = true;
        let smooth = |x: &mut Vec<f64>, ax: &mut Vec<f64>, sweeps: usize, x_is_zero: &mut bool| {
            for _ in 0..sweeps {
                if *x_is_zero {
                    x.iter_mut().zip(r).for_each(|(xi, ri)| *xi = step * ri);
                    *x_is_zero = false;
                } else {
                    apply(x, ax);
                    for i in 0..n {
                        x[i] += step * (r[i] - ax[i]);
                    }
                }
            }
        };
        smooth(&mut x, &mut ax, pre, &mut x_is_zero);

        let dims = lvl.op.dims();
        let residual: Vec<f64> = if x_is_zero {
            r.to_vec()
        } else {
            apply(&x, &mut ax);
            r.iter().zip(&ax).map(|(a, b)| a - b).collect()
        };
        let coarse_r = restrict(dims, &residual);
        let coarse_e = self.cycle(level + 1, &coarse_r, transpose)?;
        prolong_add(dims, &coarse_e, &mut x);

        smooth(&mut x, &mut ax, post, &mut false);
        Ok(x)
    }

    /// Assembles the V-cycle operator densely and reports whether it is
    /// symmetric (to `1e-8`, relative) and positive definite.
    pub fn spd_guard(&self) -> Result<bool> {
        let n = self.size();
        if n > SPD_GUARD_CAP {
            return Err(Error::TooLarge {
                rows: n,
                cap: SPD_GUARD_CAP,
            });
        }
        let m = operator_to_dense(&VCycleOperator(self));
        let scale = m.abs().max().max(f64::MIN_POSITIVE);
        if (&m - m.transpose()).abs().max() > 1e-8 * scale {
            return Ok(false);
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(sym.cholesky().is_some())
    }
}

/// The V-cycle viewed as a linear operator `z = M⁻¹ r`.
struct VCycleOperator<'a>(&'a GridHierarchy);

impl LinearOperator for VCycleOperator<'_> {
    fn size(&self) -> usize {
        self.0.size()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let z = self.0.cycle(0, x, false).expect("hierarchy was factorized at build time");
        y.copy_from_slice(&z);
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        let z = self.0.cycle(0, x, true).expect("hierarchy was factorized at build time");
        y.copy_from_slice(&z);
    }
}

impl Preconditioner for GridHierarchy {
    fn size(&self) -> usize {
        GridHierarchy::size(self)
    }
    fn solve(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        check_len(self.size(), r.len())?;
        z.copy_from_slice(&self.cycle(0, r, false)?);
        Ok(())
    }
    fn solve_transpose(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        check_len(self.size(), r.len())?;
        z.copy_from_slice(&self.cycle(0, r, true)?);
        Ok(())
    }
    /// Symmetric operator and symmetric cycle; positivity additionally needs
    /// a convergent smoother, which [`GridHierarchy::spd_guard`] certifies.
    fn is_spd(&self) -> bool {
        self.levels[0].op.is_symmetric() && self.cfg.pre_smooth == self.cfg.post_smooth
    }
}

fn restrict_1d(fine: &[f64], coarse: &mut [f64]) {
    for (j, c) in coarse.iter_mut().enumerate() {
        *c = 0.25 * (fine[2 * j] + 2.0 * fine[2 * j + 1] + fine[2 * j + 2]);
    }
}

fn prolong_add_1d(coarse: &[f64], fine: &mut [f64]) {
    for (j, &c) in coarse.iter().enumerate() {
        fine[2 * j] += 0.5 * c;
        fine[2 * j + 1] += c;
        fine[2 * j + 2] += 0.5 * c;
    }
}

/// Full-weighting restriction (tensor product in 2D).
pub fn restrict(dims: &[usize], fine: &[f64]) -> Vec<f64> {
    match dims {
        [n] => {
            let mut coarse = vec![0.0; (n - 1) / 2];
            restrict_1d(fine, &mut coarse);
            coarse
        }
        [n0, n1] => {
            let (c0, c1) = ((n0 - 1) / 2, (n1 - 1) / 2);
            let mut rows = vec![0.0; n0 * c1];
            for (f, c) in fine.chunks_exact(*n1).zip(rows.chunks_exact_mut(c1)) {
                restrict_1d(f, c);
            }
            let mut out = vec![0.0; c0 * c1];
            let mut col = vec![0.0; *n0];
            let mut ccol = vec![0.0; c0];
            for j in 0..c1 {
                for i in 0..*n0 {
                    col[i] = rows[i * c1 + j];
                }
                restrict_1d(&col, &mut ccol);
                for i in 0..c0 {
                    out[i * c1 + j] = ccol[i];
                }
            }
            out
        }
        _ => unreachable!("levels are 1 or 2"),
    }
}

/// `fine += P coarse` with linear (bilinear in 2D) interpolation.
pub fn prolong_add(dims: &[usize], coarse: &[f64], fine: &mut [f64]) {
    match dims {
        [_] => prolong_add_1d(coarse, fine),
        [n0, n1] => {
            let (c0, c1) = ((n0 - 1) / 2, (n1 - 1) / 2);
            // Interpolate along the slow axis, then along rows.
            let mut cols = vec![0.0; n0 * c1];
            let mut ccol = vec![0.0; c0];
            let mut fcol = vec![0.0; *n0];
            for j in 0..c1 {
                for i in 0..c0 {
                    ccol[i] = coarse[i * c1 + j];
                }
                fcol.iter_mut().for_each(|v| *v = 0.0);
                prolong_add_1d(&ccol, &mut fcol);
                for i in 0..*n0 {
                    cols[i * c1 + j] = fcol[i];
                }
            }
            for (c, f) in cols.chunks_exact(c1).zip(fine.chunks_exact_mut(*n1)) {
                prolong_add_1d(c, f);
            }
        }
        _ => unreachable!("levels are 1 or 2"),
    }
}

/// Dense interpolation matrix for one level (testing and verification).
pub fn prolongation_matrix(dims: &[usize]) -> DMatrix<f64> {
    let fine: usize = dims.iter().product();
    let coarse: usize = dims.iter().map(|n| (n - 1) / 2).product();
    let mut p = DMatrix::zeros(fine, coarse);
    let mut e = vec![0.0; coarse];
    let mut col = vec![0.0; fine];
    for j in 0..coarse {
        e[j] = 1.0;
        col.iter_mut().for_each(|v| *v = 0.0);
        prolong_add(dims, &e, &mut col);
        p.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian(n: usize) -> ToeplitzOperator {
        ToeplitzOperator::from_lag_fn(n, |k| match k.abs() {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        })
        .unwrap()
    }

    fn cfg(pre: usize, post: usize, omega: f64, coarsest: usize) -> VCycleConfig {
        VCycleConfig {
            pre_smooth: pre,
            post_smooth: post,
            omega,
            coarsest_size: coarsest,
        }
    }

    #[test]
    fn level_sizes_halve() {
        let h = GridHierarchy::build(&laplacian(15), cfg(1, 1, 0.7, 3)).unwrap();
        assert_eq!(h.level_sizes(), vec![vec![15], vec![7], vec![3]]);
    }

    #[test]
    fn invalid_sizes_and_configs() {
        assert!(GridHierarchy::build(&laplacian(16), cfg(1, 1, 0.7, 3)).is_err());
        assert!(GridHierarchy::build(&laplacian(7), cfg(1, 1, 0.7, 7)).is_err());
        assert!(GridHierarchy::build(&laplacian(15), cfg(0, 0, 0.7, 3)).is_err());
        assert!(GridHierarchy::build(&laplacian(15), cfg(1, 1, 1.5, 3)).is_err());
        assert!(GridHierarchy::build(&laplacian(15), cfg(1, 1, 0.5, 2)).is_err());
    }

    #[test]
    fn galerkin_of_laplacian() {
        // R A P with R = (1/4)[1 2 1], P = 2Rᵀ gives (1/4)(-1, 2, -1).
        let coarse = galerkin_coarse(&laplacian(7)).unwrap();
        assert_eq!(coarse.dims(), &[3]);
        assert!((coarse.lag(0) - 0.5).abs() < 1e-15);
        assert!((coarse.lag(1) + 0.25).abs() < 1e-15);
        assert!((coarse.lag(-1) + 0.25).abs() < 1e-15);
        assert!(coarse.lag(2).abs() < 1e-15);
        let p = prolongation_matrix(&[7]);
        let r = p.transpose() * 0.5;
        let dense = &r * laplacian(7).to_dense().unwrap() * &p;
        assert!((dense - coarse.to_dense().unwrap()).abs().max() < 1e-14);
    }

    #[test]
    fn galerkin_matches_dense_products_for_random_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let lags: Vec<f64> = (0..61).map(|_| rng.random_range(-1.0..1.0)).collect();
        let op = ToeplitzOperator::from_real_lags(&lags).unwrap();
        let p = prolongation_matrix(&[31]);
        let want = p.transpose() * 0.5 * op.to_dense().unwrap() * &p;
        let got = galerkin_coarse(&op).unwrap().to_dense().unwrap();
        assert!((want - got).abs().max() < 1e-13);

        let coeffs = FourierCoefficients::from_fn(vec![7, 7], |_| {
            Complex64::new(rng.random_range(-1.0..1.0), 0.0)
        })
        .unwrap();
        let op2 = ToeplitzOperator::from_coeffs(coeffs).unwrap();
        let p2 = prolongation_matrix(&[7, 7]);
        let p1 = prolongation_matrix(&[7]);
        assert!((&p2 - p1.kronecker(&p1)).abs().max() < 1e-15);
        let want2 = p2.transpose() * 0.25 * op2.to_dense().unwrap() * &p2;
        let got2 = galerkin_coarse(&op2).unwrap().to_dense().unwrap();
        assert!((want2 - got2).abs().max() < 1e-11);
    }

    #[test]
    fn restriction_is_half_the_prolongation_transpose() {
        for dims in [vec![15usize], vec![7, 15]] {
            let p = prolongation_matrix(&dims);
            let fine: usize = dims.iter().product();
            let scale = 0.5f64.powi(dims.len() as i32);
            let x: Vec<f64> = (0..fine).map(|i| (i as f64 * 0.61).sin()).collect();
            let want = p.transpose() * nalgebra::DVector::from_column_slice(&x) * scale;
            let got = restrict(&dims, &x);
            for i in 0..got.len() {
                assert!((got[i] - want[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn identity_with_one_exact_sweep() {
        let id = ToeplitzOperator::from_lag_fn(15, |k| if k == 0 { 1.0 } else { 0.0 }).unwrap();
        let h = GridHierarchy::build(&id, cfg(1, 0, 1.0, 3)).unwrap();
        let r: Vec<f64> = (0..15).map(|i| i as f64 - 3.0).collect();
        let z = h.vcycle_apply(&r).unwrap();
        for (a, b) in z.iter().zip(&r) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(h.spd_guard().unwrap());
    }

    #[test]
    fn vcycle_is_linear() {
        let h = GridHierarchy::build(&laplacian(63), cfg(2, 2, 0.7, 7)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r1: Vec<f64> = (0..63).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r2: Vec<f64> = (0..63).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (a, b) = (1.7, -0.4);
        let combo: Vec<f64> = r1.iter().zip(&r2).map(|(x, y)| a * x + b * y).collect();
        let z1 = h.vcycle_apply(&r1).unwrap();
        let z2 = h.vcycle_apply(&r2).unwrap();
        let z = h.vcycle_apply(&combo).unwrap();
        for i in 0..63 {
            assert!((z[i] - (a * z1[i] + b * z2[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_cycle_guard() {
        let h = GridHierarchy::build(&laplacian(63), cfg(2, 2, 0.7, 7)).unwrap();
        assert!(h.spd_guard().unwrap());
        assert!(Preconditioner::is_spd(&h));
        let skew = GridHierarchy::build(&laplacian(63), cfg(1, 0, 0.7, 7)).unwrap();
        assert!(!skew.spd_guard().unwrap());
        assert!(!Preconditioner::is_spd(&skew));
    }

    #[test]
    fn laplacian_error_contraction() {
        let n = 127;
        let a = laplacian(n);
        let h = GridHierarchy::build(&a, cfg(2, 2, 0.7, 3)).unwrap();
        let dense = a.to_dense().unwrap();
        let a_norm = |e: &[f64]| {
            let v = nalgebra::DVector::from_column_slice(e);
            (v.transpose() * &dense * &v)[(0, 0)].sqrt()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let e0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            // e1 = (I - M⁻¹A) e0
            let ae = a.matvec(&e0).unwrap();
            let corr = h.vcycle_apply(&ae).unwrap();
            let e1: Vec<f64> = e0.iter().zip(&corr).map(|(x, c)| x - c).collect();
            assert!(a_norm(&e1) * 2.0 <= a_norm(&e0));
        }
    }

    #[test]
    fn transpose_cycle_is_the_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let lags: Vec<f64> = (0..61)
            .map(|i| match i as isize - 30 {
                0 => 4.0,
                -1 => -1.5,
                1 => -0.7,
                k => 0.05 / (k * k) as f64 * rng.random_range(0.5..1.0),
            })
            .collect();
        let op = ToeplitzOperator::from_real_lags(&lags).unwrap();
        let h = GridHierarchy::build(&op, cfg(2, 1, 0.8, 3)).unwrap();
        let m = operator_to_dense(&VCycleOperator(&h));
        let mut mt = DMatrix::zeros(31, 31);
        let mut e = vec![0.0; 31];
        for j in 0..31 {
            e[j] = 1.0;
            let mut col = vec![0.0; 31];
            h.solve_transpose(&e, &mut col).unwrap();
            mt.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        assert!((m.transpose() - mt).abs().max() < 1e-12);
    }

    #[test]
    fn two_level_hierarchy() {
        let coeffs = FourierCoefficients::from_fn(vec![15, 15], |k| {
            let v = match (k[0].abs(), k[1].abs()) {
                (0, 0) => 4.0,
                (1, 0) | (0, 1) => -1.0,
                _ => 0.0,
            };
            Complex64::new(v, 0.0)
        })
        .unwrap();
        let op = ToeplitzOperator::from_coeffs(coeffs).unwrap();
        let h = GridHierarchy::build(&op, cfg(2, 2, 0.8, 7)).unwrap();
        assert_eq!(h.level_sizes(), vec![vec![15, 15], vec![7, 7]]);
        let p = prolongation_matrix(&[15, 15]);
        let want = p.transpose() * 0.25 * op.to_dense().unwrap() * &p;
        assert!((want - h.coarsest_matrix()).abs().max() < 1e-11);
        assert!(h.spd_guard().unwrap());
    }
}
