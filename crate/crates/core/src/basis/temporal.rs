use super::{BasisError, INSIDE_TOL, MAX_TEMPORAL_DEGREE};
use crate::real::Real;

/// Lagrange basis on `[0, 1]` through the equidistant nodes `k / p_gamma`.
/// Degree zero uses the single node `tau = 1`.
#[derive(Debug, Clone)]
pub struct TemporalBasis<T> {
    nodes: Vec<T>,
}

impl<T: Real> TemporalBasis<T> {
    pub fn new(p_gamma: usize) -> Result<Self, BasisError> {
        if p_gamma > MAX_TEMPORAL_DEGREE {
            return Err(BasisError::TemporalDegree(p_gamma));
        }
        let nodes = if p_gamma == 0 {
            vec![T::one()]
        } else {
            let d = T::from_usize_lossy(p_gamma);
            (0..=p_gamma).map(|k| T::from_usize_lossy(k) / d).collect()
        };
        Ok(TemporalBasis { nodes })
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn eval(&self, tau: T) -> Result<(Vec<T>, Vec<T>), BasisError> {
        let tol = T::lit(INSIDE_TOL);
        if tau < -tol || tau > T::one() + tol {
            return Err(BasisError::OutsideInterval(tau.to_f64_lossy()));
        }
        Ok(self.eval_unchecked(tau))
    }

    /// Values and derivatives of every Lagrange polynomial at `tau`.
    pub fn eval_unchecked(&self, tau: T) -> (Vec<T>, Vec<T>) {
        let n = self.nodes.len();
        let mut values = vec![T::one(); n];
        let mut derivs = vec![T::zero(); n];
        for k in 0..n {
            for m in 0..n {
                if m == k {
                    continue;
                }
                let denom = self.nodes[k] - self.nodes[m];
                // product rule: d(prod) = sum_j (1/denom_j) prod_{i != j}
                let mut term = T::one() / denom;
                for i in 0..n {
                    if i != k && i != m {
                        term *= (tau - self.nodes[i]) / (self.nodes[k] - self.nodes[i]);
                    }
                }
                derivs[k] += term;
                values[k] *= (tau - self.nodes[m]) / denom;
            }
        }
        (values, derivs)
    }
}
