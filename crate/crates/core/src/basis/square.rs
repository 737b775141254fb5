use super::{BasisError, SpatialEval, TriangleBasis, INSIDE_TOL};
use crate::real::{Real, Vec2};

/// Half of the reference square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum SubTriangle {
    /// `xi + eta <= 1`, vertices `(0,0), (1,0), (0,1)`.
    Lower,
    /// `xi + eta >= 1`, vertices `(1,0), (1,1), (0,1)`.
    Upper,
}

impl SubTriangle {
    pub const BOTH: [SubTriangle; 2] = [SubTriangle::Lower, SubTriangle::Upper];

    pub fn index(self) -> usize {
        match self {
            SubTriangle::Lower => 0,
            SubTriangle::Upper => 1,
        }
    }

    /// Image of a `T_std` point in this half. The upper half is the image of `T_std` under `(a, b) -> (1 - b, 1 - a)`.
    pub fn from_reference_triangle<T: Real>(self, ref_point: Vec2<T>) -> Vec2<T> {
        match self {
            SubTriangle::Lower => ref_point,
            SubTriangle::Upper => Vec2::new(T::one() - ref_point.y, T::one() - ref_point.x),
        }
    }
}

/// Continuous piecewise degree-`p` basis on the split unit square.
///
/// Functions attached to nodes of `T_I` are the triangle Lagrange functions
/// of `T_I` continued to `T_II`; those of `T_II` are pulled back from `T_std`
/// through `(xi, eta) -> (1 - eta, 1 - xi)`. Off-diagonal nodes of one half
/// give functions vanishing identically on the other half; diagonal nodes
/// carry one function per side that agree on the diagonal.
#[derive(Debug, Clone)]
pub struct SquareBasis<T> {
    p: usize,
    triangle: TriangleBasis<T>,
    nodes: Vec<Vec2<T>>,
    /// For each square node, its triangle-node index inside each half.
    local: Vec<[Option<usize>; 2]>,
}

impl<T: Real> SquareBasis<T> {
    pub fn new(p: usize) -> Result<Self, BasisError> {
        let triangle = TriangleBasis::new(p)?;
        let pf = T::from_usize_lossy(p);
        let mut nodes = Vec::with_capacity((p + 1) * (p + 1));
        let mut local = Vec::with_capacity((p + 1) * (p + 1));
        for j in 0..=p {
            for i in 0..=p {
                nodes.push(Vec2::new(
                    T::from_usize_lossy(i) / pf,
                    T::from_usize_lossy(j) / pf,
                ));
                let lower = (i + j <= p).then(|| triangle.node_index(i, j));
                let upper = (i + j >= p).then(|| triangle.node_index(p - j, p - i));
                local.push([lower, upper]);
            }
        }
        Ok(SquareBasis {
            p,
            triangle,
            nodes,
            local,
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

    /// Index of the node `(i/p, j/p)`.
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.p + 1) + i
    }

    /// Whether node `k` lies in the closed half `half`.
    pub fn node_in(&self, k: usize, half: SubTriangle) -> bool {
        self.local[k][half.index()].is_some()
    }

    /// Half used for `point`: the forced one on the diagonal, `T_I` by default.
    pub fn locate(&self, point: Vec2<T>, side: Option<SubTriangle>) -> SubTriangle {
        let s = point.x + point.y - T::one();
        let tol = T::lit(INSIDE_TOL);
        if s.abs() <= tol {
            side.unwrap_or(SubTriangle::Lower)
        } else if s < T::zero() {
            SubTriangle::Lower
        } else {
            SubTriangle::Upper
        }
    }

    pub fn contains(&self, point: Vec2<T>) -> bool {
        let tol = T::lit(INSIDE_TOL);
        let one = T::one() + tol;
        point.x >= -tol && point.y >= -tol && point.x <= one && point.y <= one
    }

    pub fn eval(
        &self,
        point: Vec2<T>,
        side: Option<SubTriangle>,
    ) -> Result<SpatialEval<T>, BasisError> {
        if !self.contains(point) {
            return Err(BasisError::OutsideElement {
                element: "square",
                xi: point.x.to_f64_lossy(),
                eta: point.y.to_f64_lossy(),
            });
        }
        Ok(self.eval_on(self.locate(point, side), point))
    }

    /// Evaluate the polynomial pieces of `half` at `point` (no range check).
    pub fn eval_on(&self, half: SubTriangle, point: Vec2<T>) -> SpatialEval<T> {
        let n_tri = self.triangle.len();
        let mut tv = vec![T::zero(); n_tri];
        let mut tg = vec![Vec2::zeros(); n_tri];
        let (ref_point, flip) = match half {
            SubTriangle::Lower => (point, false),
            // inverse of the (a, b) -> (1 - b, 1 - a) map is itself
            SubTriangle::Upper => (Vec2::new(T::one() - point.y, T::one() - point.x), true),
        };
        self.triangle.eval_into(ref_point, &mut tv, &mut tg);
        let n = self.len();
        let mut values = vec![T::zero(); n];
        let mut gradients = vec![Vec2::zeros(); n];
        for k in 0..n {
            if let Some(m) = self.local[k][half.index()] {
                values[k] = tv[m];
                gradients[k] = if flip {
                    Vec2::new(-tg[m].y, -tg[m].x)
                } else {
                    tg[m]
                };
            }
        }
        SpatialEval { values, gradients }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_corner_hats_continuous_at_center() {
        let b = SquareBasis::<f64>::new(1).unwrap();
        assert_eq!(b.len(), 4);
        let c = Vec2::new(0.5, 0.5);
        let lo = b.eval_on(SubTriangle::Lower, c);
        let hi = b.eval_on(SubTriangle::Upper, c);
        for k in 0..4 {
            assert!((lo.values[k] - hi.values[k]).abs() < 1e-15);
        }
        // corners (0,0) and (1,1) vanish on the diagonal
        assert!(lo.values[0].abs() < 1e-15 && hi.values[3].abs() < 1e-15);
    }

    #[test]
    fn p2_two_sided_agreement_on_diagonal() {
        let b = SquareBasis::<f64>::new(2).unwrap();
        let x = Vec2::new(0.3, 0.7);
        let lo = b.eval(x, Some(SubTriangle::Lower)).unwrap();
        let hi = b.eval(x, Some(SubTriangle::Upper)).unwrap();
        for k in 0..9 {
            assert!((lo.values[k] - hi.values[k]).abs() < 1e-13);
        }
        assert_eq!(b.eval(x, None).unwrap(), lo);
    }

    #[test]
    fn outside_square_rejected() {
        let b = SquareBasis::<f64>::new(2).unwrap();
        assert!(b.eval(Vec2::new(1.1, 0.2), None).is_err());
    }

    #[test]
    fn node_membership() {
        let b = SquareBasis::<f64>::new(2).unwrap();
        let diag = b.node_index(1, 1);
        assert!(b.node_in(diag, SubTriangle::Lower) && b.node_in(diag, SubTriangle::Upper));
        assert!(!b.node_in(b.node_index(0, 0), SubTriangle::Upper));
        assert!(!b.node_in(b.node_index(2, 2), SubTriangle::Lower));
    }
}
