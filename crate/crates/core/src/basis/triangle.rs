use nalgebra::DMatrix;

use super::{BasisError, SpatialEval, INSIDE_TOL, MAX_DEGREE};
use crate::real::{Real, Vec2};

/// Degree-`p` Lagrange basis on the reference triangle.
///
/// Each function is stored by its coefficients in the monomial frame
/// `xi^a eta^b`, `a + b <= p`, obtained by inverting the nodal Vandermonde
/// matrix once.
#[derive(Debug, Clone)]
pub struct TriangleBasis<T> {
    p: usize,
    nodes: Vec<Vec2<T>>,
    exponents: Vec<(usize, usize)>,
    /// `coeffs[(m, k)]` is the coefficient of monomial `m` in function `k`.
    coeffs: DMatrix<T>,
}

impl<T: Real> TriangleBasis<T> {
    pub fn new(p: usize) -> Result<Self, BasisError> {
        if !(1..=MAX_DEGREE).contains(&p) {
            return Err(BasisError::SpatialDegree(p));
        }
        let pf = T::from_usize_lossy(p);
        let mut nodes = Vec::new();
        for k1 in 0..=p {
            for k2 in 0..=p - k1 {
                nodes.push(Vec2::new(
                    T::from_usize_lossy(k1) / pf,
                    T::from_usize_lossy(k2) / pf,
                ));
            }
        }
        let mut exponents = Vec::new();
        for total in 0..=p {
            for b in 0..=total {
                exponents.push((total - b, b));
            }
        }
        let n = nodes.len();
        let vandermonde = DMatrix::from_fn(n, n, |k, m| {
            let (a, b) = exponents[m];
            nodes[k].x.powi(a as i32) * nodes[k].y.powi(b as i32)
        });
        let coeffs = vandermonde
            .try_inverse()
            .expect("equidistant triangle nodes are unisolvent");
        Ok(TriangleBasis {
            p,
            nodes,
            exponents,
            coeffs,
        })
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec2<T>] {
        &self.nodes
    }

    /// Index of the node `(k1/p, k2/p)`.
    pub fn node_index(&self, k1: usize, k2: usize) -> usize {
        debug_assert!(k1 + k2 <= self.p);
        // rows r < k1 hold p + 1 - r nodes each
        k1 * (self.p + 1) - k1 * k1.saturating_sub(1) / 2 + k2
    }

    pub fn contains(&self, point: Vec2<T>) -> bool {
        let tol = T::lit(INSIDE_TOL);
        point.x >= -tol && point.y >= -tol && point.x + point.y <= T::one() + tol
    }

    /// Evaluate after checking that `point` lies in the reference triangle.
    pub fn eval(&self, point: Vec2<T>) -> Result<SpatialEval<T>, BasisError> {
        if !self.contains(point) {
            return Err(BasisError::OutsideElement {
                element: "triangle",
                xi: point.x.to_f64_lossy(),
                eta: point.y.to_f64_lossy(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    /// Evaluate the polynomials anywhere in the plane.
    pub fn eval_unchecked(&self, point: Vec2<T>) -> SpatialEval<T> {
        let n = self.len();
        let mut values = vec![T::zero(); n];
        let mut gradients = vec![Vec2::zeros(); n];
        self.eval_into(point, &mut values, &mut gradients);
        SpatialEval { values, gradients }
    }

    pub fn values_unchecked(&self, point: Vec2<T>) -> Vec<T> {
        self.eval_unchecked(point).values
    }

    pub(crate) fn eval_into(&self, point: Vec2<T>, values: &mut [T], gradients: &mut [Vec2<T>]) {
        let p = self.p;
        let mut xpow = vec![T::one(); p + 1];
        let mut ypow = vec![T::one(); p + 1];
        for i in 1..=p {
            xpow[i] = xpow[i - 1] * point.x;
            ypow[i] = ypow[i - 1] * point.y;
        }
        values.iter_mut().for_each(|v| *v = T::zero());
        gradients.iter_mut().for_each(|g| *g = Vec2::zeros());
        for (m, &(a, b)) in self.exponents.iter().enumerate() {
            let mono = xpow[a] * ypow[b];
            let dx = if a > 0 {
                T::from_usize_lossy(a) * xpow[a - 1] * ypow[b]
            } else {
                T::zero()
            };
            let dy = if b > 0 {
                T::from_usize_lossy(b) * xpow[a] * ypow[b - 1]
            } else {
                T::zero()
            };
            for k in 0..values.len() {
                let c = self.coeffs[(m, k)];
                values[k] += c * mono;
                gradients[k].x += c * dx;
                gradients[k].y += c * dy;
            }
        }
    }
}
