//! Operator and preconditioner abstractions shared by the Krylov solvers.

use nalgebra::DMatrix;

use crate::error::Result;

/// A real square linear operator applied matrix-free.
pub trait LinearOperator: Send + Sync {
    fn size(&self) -> usize;

    /// `y = A x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// `y = Aᵀ x`.
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]);

    /// Whether `A = Aᵀ` holds structurally.
    fn is_symmetric(&self) -> bool {
        false
    }
}

/// `z = P⁻¹ r` for a preconditioner `P`.
pub trait Preconditioner: Send + Sync {
    fn size(&self) -> usize;

    fn solve(&self, r: &[f64], z: &mut [f64]) -> Result<()>;

    /// `z = P⁻ᵀ r`.
    fn solve_transpose(&self, r: &[f64], z: &mut [f64]) -> Result<()>;

    /// Whether `P` is known to be symmetric positive definite, as MINRES needs.
    fn is_spd(&self) -> bool;
}

impl LinearOperator for DMatrix<f64> {
    fn size(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nrows();
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            *yi = (0..self.ncols()).map(|j| self[(i, j)] * x[j]).sum();
        }
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        for (j, yj) in y.iter_mut().enumerate().take(self.ncols()) {
            *yj = self.column(j).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn size(&self) -> usize {
        (**self).size()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_transpose(x, y)
    }
    fn is_symmetric(&self) -> bool {
        (**self).is_symmetric()
    }
}

/// `P = I`.
#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl Preconditioner for Identity {
    fn size(&self) -> usize {
        self.0
    }
    fn solve(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(r);
        Ok(())
    }
    fn solve_transpose(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        z.copy_from_slice(r);
        Ok(())
    }
    fn is_spd(&self) -> bool {
        true
    }
}

impl LinearOperator for Identity {
    fn size(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
    fn is_symmetric(&self) -> bool {
        true
    }
}

/// Materializes any operator column by column.
pub fn operator_to_dense(op: &dyn LinearOperator) -> DMatrix<f64> {
    let n = op.size();
    let mut out = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        out.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    out
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
