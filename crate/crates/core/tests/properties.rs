//! Randomized structural invariants checked against naive dense oracles.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use symtoep::circulant::{optimal, strang, CirculantOperator};
use symtoep::direct::{levinson, ToeplitzSpdSolver};
use symtoep::krylov::{gmres_right, minres, MinresStopping, SolveOptions};
use symtoep::multigrid::{galerkin_coarse, prolongation_matrix};
use symtoep::operator::Identity;
use symtoep::toeplitz::{flip, flip_rows, Symmetrized};
use symtoep::{FourierCoefficients, LinearOperator, MatvecKernel, Preconditioner, ToeplitzOperator};

/// `n` and `2n - 1` lags in `[-1, 1]`.
fn lags() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..48).prop_flat_map(|n| (Just(n), prop::collection::vec(-1.0f64..1.0, 2 * n - 1)))
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

/// Entry `(i, j)` is `lags[i - j + n - 1]`, built without the library.
fn naive_dense(n: usize, lags: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| lags[i + n - 1 - j])
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Symmetric, strictly diagonally dominant lags, so the matrix is SPD.
fn spd_lags(n: usize, off: &[f64]) -> Vec<f64> {
    let diag = 1.0 + off.iter().map(|v| 2.0 * v.abs()).sum::<f64>();
    let mut lags = vec![0.0; 2 * n - 1];
    lags[n - 1] = diag;
    for k in 1..n {
        lags[n - 1 + k] = off[k - 1];
        lags[n - 1 - k] = off[k - 1];
    }
    lags
}

proptest! {
    #[test]
    fn flip_is_an_involution(x in vector(37), rows in 1usize..6) {
        prop_assert_eq!(flip(&[37], &flip(&[37], &x).unwrap()).unwrap(), x.clone());
        let cols = 6;
        let y = vector_of(rows * cols, &x);
        prop_assert_eq!(flip(&[rows, cols], &flip(&[rows, cols], &y).unwrap()).unwrap(), y);
    }

    #[test]
    fn fft_and_direct_products_match_the_dense_oracle((n, l) in lags(), seed in any::<u64>()) {
        let x: Vec<f64> = (0..n).map(|i| ((seed as f64 + i as f64) * 0.618).sin()).collect();
        let d = naive_dense(n, &l);
        let xv = DVector::from_column_slice(&x);
        let (want, want_t) = (&d * &xv, d.transpose() * &xv);
        let fft = ToeplitzOperator::from_real_lags(&l).unwrap();
        let direct = fft.clone().with_kernel(MatvecKernel::Direct).unwrap();
        for op in [&fft, &direct] {
            prop_assert!(max_diff(&op.matvec(&x).unwrap(), want.as_slice()) < 1e-12);
            prop_assert!(max_diff(&op.matvec_transpose(&x).unwrap(), want_t.as_slice()) < 1e-12);
        }
    }

    #[test]
    fn flipped_toeplitz_is_exactly_symmetric((n, l) in lags()) {
        let op = ToeplitzOperator::from_real_lags(&l).unwrap();
        let h = flip_rows(&op.to_dense().unwrap());
        prop_assert_eq!(&h, &h.transpose());
        // The matrix-free form agrees with the dense flip.
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
        let mut y = vec![0.0; n];
        Symmetrized::new(&op).apply(&x, &mut y);
        let want = &h * DVector::from_column_slice(&x);
        prop_assert!(max_diff(&y, want.as_slice()) < 1e-12);
    }

    #[test]
    fn two_level_product_matches_kronecker_oracle(
        (n0, n1) in (1usize..6, 1usize..6),
        seed in any::<u64>(),
    ) {
        let value = |k0: isize, k1: isize| ((seed % 1000) as f64 + 3.0 * k0 as f64 + 7.0 * k1 as f64).sin();
        let coeffs = FourierCoefficients::from_fn(vec![n0, n1], |k| Complex64::new(value(k[0], k[1]), 0.0)).unwrap();
        let op = ToeplitzOperator::from_coeffs(coeffs).unwrap();
        let n = n0 * n1;
        let dense = DMatrix::from_fn(n, n, |r, c| {
            value((r / n1) as isize - (c / n1) as isize, (r % n1) as isize - (c % n1) as isize)
        });
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 1.3).sin()).collect();
        let want = &dense * DVector::from_column_slice(&x);
        prop_assert!(max_diff(&op.matvec(&x).unwrap(), want.as_slice()) < 1e-12);
    }

    #[test]
    fn strang_first_column_follows_the_definition((n, l) in lags()) {
        prop_assume!(n >= 2);
        let op = ToeplitzOperator::from_real_lags(&l).unwrap();
        let c = strang(&op).unwrap().first_column();
        for (j, z) in c.iter().enumerate() {
            let k = if j <= n / 2 { j as isize } else { j as isize - n as isize };
            prop_assert!((z.re - l[(k + n as isize - 1) as usize]).abs() < 1e-12);
            prop_assert!(z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn optimal_circulant_averages_wrapped_diagonals((n, l) in lags()) {
        prop_assume!(n >= 2);
        let op = ToeplitzOperator::from_real_lags(&l).unwrap();
        let c = optimal(&op).unwrap().first_column();
        let a = |k: isize| l[(k + n as isize - 1) as usize];
        for (j, z) in c.iter().enumerate() {
            let j = j as isize;
            let want = if j == 0 {
                a(0)
            } else {
                ((n as isize - j) as f64 * a(j) + j as f64 * a(j - n as isize)) / n as f64
            };
            prop_assert!((z.re - want).abs() < 1e-12);
        }
    }

    #[test]
    fn circulant_solve_inverts_apply(col in prop::collection::vec(-1.0f64..1.0, 2..40)) {
        let mut col = col;
        col[0] += 1.0 + col.iter().map(|v| v.abs()).sum::<f64>();
        let c = CirculantOperator::from_real_first_column(&col).unwrap();
        let x: Vec<f64> = (0..col.len()).map(|i| (i as f64).cos()).collect();
        let back = c.solve(&c.apply(&x).unwrap()).unwrap();
        prop_assert!(max_diff(&back, &x) < 1e-10);
        let abs = c.absolute_value();
        prop_assert!(abs.is_spd());
        for (a, b) in abs.eigenvalues().iter().zip(c.eigenvalues()) {
            prop_assert!((a.re - b.norm()).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn galerkin_coarse_operator_equals_dense_triple_product(k in 2usize..6, seed in any::<u64>()) {
        let n = (1 << k) - 1;
        let l: Vec<f64> = (0..2 * n - 1).map(|i| ((seed % 997) as f64 + i as f64 * 0.71).sin()).collect();
        let op = ToeplitzOperator::from_real_lags(&l).unwrap();
        let p = prolongation_matrix(&[n]);
        let rap = p.transpose() * naive_dense(n, &l) * &p * 0.5;
        let coarse = galerkin_coarse(&op).unwrap().to_dense().unwrap();
        prop_assert!((rap - coarse).abs().max() < 1e-12);
    }

    #[test]
    fn levinson_matches_dense_cholesky(off in prop::collection::vec(-1.0f64..1.0, 1..30)) {
        let n = off.len() + 1;
        let l = spd_lags(n, &off);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.9).sin()).collect();
        let dense = naive_dense(n, &l);
        let want = dense.clone().cholesky().unwrap().solve(&DVector::from_column_slice(&b));
        let column: Vec<f64> = l[n - 1..].to_vec();
        prop_assert!(max_diff(&levinson(&column, &b).unwrap(), want.as_slice()) < 1e-10);
        let op = ToeplitzOperator::from_real_lags(&l).unwrap();
        let solver = ToeplitzSpdSolver::new(&op).unwrap();
        let mut z = vec![0.0; n];
        solver.solve(&b, &mut z).unwrap();
        prop_assert!(max_diff(&z, want.as_slice()) < 1e-10);
    }
}

fn vector_of(len: usize, seed: &[f64]) -> Vec<f64> {
    (0..len).map(|i| seed[i % seed.len()] + i as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn minres_residuals_never_increase(off in prop::collection::vec(-1.0f64..1.0, 4..40)) {
        let n = off.len() + 1;
        let mut l = spd_lags(n, &off);
        // Shift the diagonal so Y A is indefinite half the time.
        l[n - 1] -= 1.5 * off.len() as f64 / 4.0;
        let op = ToeplitzOperator::from_real_lags(&l).unwrap();
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64).sin()).collect();
        let opts = SolveOptions::default()
            .with_tol(1e-10)
            .with_maxit(n + 1)
            .with_minres_stopping(MinresStopping::Preconditioned);
        let report = minres(&Symmetrized::new(&op), &Identity(n), &flip(&[n], &b).unwrap(), &opts).unwrap();
        for w in report.residual_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn gmres_residuals_never_increase_and_terminate((n, l) in lags()) {
        let mut l = l;
        l[n - 1] += 2.0 * n as f64;
        let op = ToeplitzOperator::from_real_lags(&l).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let opts = SolveOptions::default().with_tol(1e-10).with_maxit(n + 1);
        let report = gmres_right(&op, &Identity(n), &b, &opts).unwrap();
        prop_assert!(report.converged);
        prop_assert!(report.iterations <= n + 1);
        for w in report.residual_history.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }
}
