use nalgebra::{DMatrix, DVector};

use super::{dot, norm, BlockSparseMatrix, LinsysError};
use crate::real::Real;

/// Outcome of a Krylov solve. The residual is recomputed from the returned
/// iterate, not taken from the recurrence.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KrylovReport {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

impl KrylovReport {
    pub fn into_result(self, solver: &'static str) -> Result<Self, LinsysError> {
        if self.converged {
            Ok(self)
        } else {
            Err(LinsysError::NotConverged {
                solver,
                iterations: self.iterations,
                residual: self.relative_residual,
            })
        }
    }
}

/// Orthogonal projector removing the component along the all-ones vector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConstantMode;

impl ConstantMode {
    pub fn project<T: Real>(&self, x: &mut [T]) {
        if x.is_empty() {
            return;
        }
        let mean = x.iter().fold(T::zero(), |a, b| a + *b) / T::from_usize_lossy(x.len());
        x.iter_mut().for_each(|v| *v -= mean);
    }
}

/// Block-Jacobi preconditioner: explicit inverses of the diagonal blocks.
#[derive(Debug, Clone)]
pub struct BlockJacobi<T> {
    block_size: usize,
    inverses: Vec<DMatrix<T>>,
}

impl<T: Real> BlockJacobi<T> {
    pub fn new(a: &BlockSparseMatrix<T>) -> Result<Self, LinsysError> {
        let inverses = a
            .diagonal_blocks()
            .into_iter()
            .enumerate()
            .map(|(i, b)| b.try_inverse().ok_or(LinsysError::SingularBlock(i)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BlockJacobi {
            block_size: a.block_size(),
            inverses,
        })
    }

    /// Symmetric variant for SPD matrices: singular diagonal blocks fall back
    /// to point Jacobi on that block.
    pub fn new_symmetric(a: &BlockSparseMatrix<T>) -> Self {
        let inverses = a
            .diagonal_blocks()
            .into_iter()
            .map(|b| match b.clone().cholesky() {
                Some(ch) => ch.inverse(),
                None => DMatrix::from_diagonal(&DVector::from_iterator(
                    b.nrows(),
                    b.diagonal().iter().map(|d| {
                        if *d != T::zero() {
                            T::one() / *d
                        } else {
                            T::one()
                        }
                    }),
                )),
            })
            .collect();
        BlockJacobi {
            block_size: a.block_size(),
            inverses,
        }
    }

    pub fn apply(&self, r: &[T], z: &mut [T]) {
        let bs = self.block_size;
        for (i, inv) in self.inverses.iter().enumerate() {
            let ri = &r[i * bs..(i + 1) * bs];
            let zi = &mut z[i * bs..(i + 1) * bs];
            for (row, out) in zi.iter_mut().enumerate() {
                let mut acc = T::zero();
                for (col, rv) in ri.iter().enumerate() {
                    acc += inv[(row, col)] * *rv;
                }
                *out = acc;
            }
        }
    }
}

fn residual<T: Real>(
    a: &BlockSparseMatrix<T>,
    x: &[T],
    b: &[T],
    out: &mut [T],
) -> Result<(), LinsysError> {
    a.matvec_into(x, out)?;
    out.iter_mut().zip(b).for_each(|(r, bi)| *r = *bi - *r);
    Ok(())
}

/// Block-Jacobi preconditioned conjugate gradients for symmetric positive
/// (semi-)definite `a`. With `nullspace`, right-hand side, residuals and
/// iterates are kept orthogonal to the constant vector, so the returned
/// solution has zero mean.
///
/// Non-convergence is reported through `converged = false`, never hidden.
pub fn cg_solve<T: Real>(
    a: &BlockSparseMatrix<T>,
    b: &[T],
    tol: T,
    max_iter: usize,
    nullspace: Option<ConstantMode>,
) -> Result<(Vec<T>, KrylovReport), LinsysError> {
    let n = a.nrows();
    if b.len() != n {
        return Err(LinsysError::Dimension {
            expected: n,
            got: b.len(),
        });
    }
    let project = |v: &mut [T]| {
        if let Some(p) = nullspace {
            p.project(v);
        }
    };
    let mut rhs = b.to_vec();
    project(&mut rhs);
    let bnorm = norm(&rhs);
    let mut x = vec![T::zero(); n];
    if bnorm == T::zero() {
        return Ok((
            x,
            KrylovReport {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        ));
    }
    let pre = BlockJacobi::new_symmetric(a);
    let mut r = rhs.clone();
    let mut z = vec![T::zero(); n];
    pre.apply(&r, &mut z);
    project(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    let mut iterations = 0;
    while iterations < max_iter {
        if norm(&r) <= tol * bnorm {
            break;
        }
        a.matvec_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if pap <= T::zero() {
            break;
        }
        let alpha = rz / pap;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * *pi);
        r.iter_mut()
            .zip(&ap)
            .for_each(|(ri, api)| *ri -= alpha * *api);
        project(&mut r);
        pre.apply(&r, &mut z);
        project(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut()
            .zip(&z)
            .for_each(|(pi, zi)| *pi = *zi + beta * *pi);
        iterations += 1;
    }
    project(&mut x);
    let mut res = vec![T::zero(); n];
    residual(a, &x, &rhs, &mut res)?;
    project(&mut res);
    let rel = norm(&res) / bnorm;
    let report = KrylovReport {
        iterations,
        relative_residual: rel.to_f64_lossy(),
        converged: rel <= tol,
    };
    Ok((x, report))
}

/// Right-preconditioned BiCGStab for the non-symmetric space-time momentum
/// systems, started from `x0`.
pub fn bicgstab_solve<T: Real>(
    a: &BlockSparseMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    pre: &BlockJacobi<T>,
    tol: T,
    max_iter: usize,
) -> Result<(Vec<T>, KrylovReport), LinsysError> {
    let n = a.nrows();
    if b.len() != n {
        return Err(LinsysError::Dimension {
            expected: n,
            got: b.len(),
        });
    }
    let bnorm = norm(b);
    let mut x = match x0 {
        Some(x0) if x0.len() == n => x0.to_vec(),
        Some(x0) => {
            return Err(LinsysError::Dimension {
                expected: n,
                got: x0.len(),
            })
        }
        None => vec![T::zero(); n],
    };
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok((
            x,
            KrylovReport {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        ));
    }
    let mut r = vec![T::zero(); n];
    residual(a, &x, b, &mut r)?;
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (T::one(), T::one(), T::one());
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut y = vec![T::zero(); n];
    let mut s = vec![T::zero(); n];
    let mut zs = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    let mut iterations = 0;
    while iterations < max_iter && norm(&r) > tol * bnorm {
        let rho_new = dot(&r_hat, &r);
        if rho_new == T::zero() {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        pre.apply(&p, &mut y);
        a.matvec_into(&y, &mut v)?;
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        iterations += 1;
        if norm(&s) <= tol * bnorm {
            x.iter_mut().zip(&y).for_each(|(xi, yi)| *xi += alpha * *yi);
            r.copy_from_slice(&s);
            break;
        }
        pre.apply(&s, &mut zs);
        a.matvec_into(&zs, &mut t)?;
        let tt = dot(&t, &t);
        omega = if tt > T::zero() {
            dot(&t, &s) / tt
        } else {
            T::zero()
        };
        for i in 0..n {
            x[i] += alpha * y[i] + omega * zs[i];
            r[i] = s[i] - omega * t[i];
        }
        if omega == T::zero() {
            break;
        }
    }
    residual(a, &x, b, &mut r)?;
    let rel = norm(&r) / bnorm;
    Ok((
        x,
        KrylovReport {
            iterations,
            relative_residual: rel.to_f64_lossy(),
            converged: rel <= tol,
        },
    ))
}
