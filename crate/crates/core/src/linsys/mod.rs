//! Block-sparse linear algebra for the momentum and pressure systems.

mod block;
mod krylov;

pub use block::BlockSparseMatrix;
pub use krylov::{bicgstab_solve, cg_solve, BlockJacobi, ConstantMode, KrylovReport};

/// Report type of the pressure solve.
pub type CgReport = KrylovReport;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinsysError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error(
        "{solver} did not converge: relative residual {residual:e} after {iterations} iterations"
    )]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("block ({0}, {0}) of the preconditioner is singular")]
    SingularBlock(usize),
}

pub(crate) fn dot<T: crate::Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

pub(crate) fn norm<T: crate::Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}
