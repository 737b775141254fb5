//! Nodal Lagrange bases on the reference elements.
//!
//! * [`TriangleBasis`]: degree-`p` Lagrange basis on
//!   `T_std = {xi >= 0, eta >= 0, xi + eta <= 1}` through the equidistant
//!   nodes `(k1/p, k2/p)`, `0 <= k2 <= p - k1`, enumerated with `k1` as the
//!   outer and `k2` as the inner loop.
//! * [`SquareBasis`]: continuous piecewise degree-`p` basis on the unit square
//!   split along the diagonal `xi + eta = 1` into `T_I` (lower-left) and
//!   `T_II` (upper-right). Nodes `(i/p, j/p)` are numbered `j * (p + 1) + i`.
//! * [`TemporalBasis`]: Lagrange polynomials on `[0, 1]` through `k/p_gamma`.
//!
//! Space-time functions are tensor products; see [`eval_spacetime_basis`].

mod square;
mod temporal;
mod triangle;

pub use square::{SquareBasis, SubTriangle};
pub use temporal::TemporalBasis;
pub use triangle::TriangleBasis;

use crate::real::{Real, Vec2};

/// Largest admissible spatial degree. Equidistant nodes lose conditioning
/// quickly beyond it.
pub const MAX_DEGREE: usize = 4;
/// Largest admissible temporal degree.
pub const MAX_TEMPORAL_DEGREE: usize = 4;

/// Geometric tolerance for "inside the reference element" checks.
pub(crate) const INSIDE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BasisError {
    #[error("spatial degree p = {0} outside 1..={MAX_DEGREE}")]
    SpatialDegree(usize),
    #[error("temporal degree p_gamma = {0} outside 0..={MAX_TEMPORAL_DEGREE}")]
    TemporalDegree(usize),
    #[error("point ({xi}, {eta}) outside the reference {element}")]
    OutsideElement {
        element: &'static str,
        xi: f64,
        eta: f64,
    },
    #[error("reference time {0} outside [0, 1]")]
    OutsideInterval(f64),
}

/// Spatial and temporal polynomial degrees of a discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct DiscretizationOrder {
    pub p: usize,
    pub p_gamma: usize,
}

impl DiscretizationOrder {
    pub fn new(p: usize, p_gamma: usize) -> Result<Self, BasisError> {
        if !(1..=MAX_DEGREE).contains(&p) {
            return Err(BasisError::SpatialDegree(p));
        }
        if p_gamma > MAX_TEMPORAL_DEGREE {
            return Err(BasisError::TemporalDegree(p_gamma));
        }
        Ok(DiscretizationOrder { p, p_gamma })
    }

    /// Number of triangle basis functions, `(p+1)(p+2)/2`.
    pub fn n_phi(&self) -> usize {
        (self.p + 1) * (self.p + 2) / 2
    }

    /// Number of split-square basis functions, `(p+1)^2`.
    pub fn n_psi(&self) -> usize {
        (self.p + 1) * (self.p + 1)
    }

    /// Number of temporal basis functions, `p_gamma + 1`.
    pub fn n_gamma(&self) -> usize {
        self.p_gamma + 1
    }

    pub fn n_phi_st(&self) -> usize {
        self.n_phi() * self.n_gamma()
    }

    pub fn n_psi_st(&self) -> usize {
        self.n_psi() * self.n_gamma()
    }
}

/// Values and spatial gradients of a family of basis functions at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialEval<T> {
    pub values: Vec<T>,
    pub gradients: Vec<Vec2<T>>,
}

/// Values and derivatives of a family of space-time basis functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeEval<T> {
    pub values: Vec<T>,
    pub gradients: Vec<Vec2<T>>,
    pub time_derivatives: Vec<T>,
}

/// Which spatial factor a space-time basis uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Triangle,
    Square,
}

/// Every reference basis needed by one discretization order.
#[derive(Debug, Clone)]
pub struct ReferenceBasis<T> {
    pub order: DiscretizationOrder,
    pub triangle: TriangleBasis<T>,
    pub square: SquareBasis<T>,
    pub temporal: TemporalBasis<T>,
}

impl<T: Real> ReferenceBasis<T> {
    pub fn new(order: DiscretizationOrder) -> Self {
        let triangle =
            TriangleBasis::new(order.p).expect("degree validated by DiscretizationOrder");
        let square = SquareBasis::new(order.p).expect("degree validated by DiscretizationOrder");
        let temporal =
            TemporalBasis::new(order.p_gamma).expect("degree validated by DiscretizationOrder");
        ReferenceBasis {
            order,
            triangle,
            square,
            temporal,
        }
    }
}

/// Equidistant nodes of the degree-`p` triangle basis, `(i/p, j/p)` with
/// `i + j <= p` and `j` fastest.
pub fn triangle_nodes<T: Real>(p: usize) -> Result<Vec<Vec2<T>>, BasisError> {
    Ok(TriangleBasis::<T>::new(p)?.nodes().to_vec())
}

/// Nodes of the degree-`p` split-square basis, `(i/p, j/p)` with `i` fastest.
pub fn square_nodes<T: Real>(p: usize) -> Result<Vec<Vec2<T>>, BasisError> {
    Ok(SquareBasis::<T>::new(p)?.nodes().to_vec())
}

pub fn temporal_nodes<T: Real>(p_gamma: usize) -> Result<Vec<T>, BasisError> {
    Ok(TemporalBasis::<T>::new(p_gamma)?.nodes().to_vec())
}

/// Values and gradients of all triangle basis functions at `point`.
pub fn eval_triangle_basis<T: Real>(
    p: usize,
    point: Vec2<T>,
) -> Result<SpatialEval<T>, BasisError> {
    TriangleBasis::new(p)?.eval(point)
}

/// Values and gradients of all split-square basis functions at `point`.
/// Points on the diagonal use `side` when given and `T_I` otherwise.
pub fn eval_square_basis<T: Real>(
    p: usize,
    point: Vec2<T>,
    side: Option<SubTriangle>,
) -> Result<SpatialEval<T>, BasisError> {
    SquareBasis::new(p)?.eval(point, side)
}

/// Values and derivatives of the temporal basis at reference time `tau`.
pub fn eval_temporal_basis<T: Real>(
    p_gamma: usize,
    tau: T,
) -> Result<(Vec<T>, Vec<T>), BasisError> {
    TemporalBasis::new(p_gamma)?.eval(tau)
}

/// Space-time tensor-product basis at `(xi, eta, tau)`.
///
/// Function `(k, l)` (spatial `k`, temporal `l`) sits at index
/// `k * n_gamma + l`.
pub fn eval_spacetime_basis<T: Real>(
    order: DiscretizationOrder,
    kind: ElementKind,
    point: Vec2<T>,
    tau: T,
) -> Result<SpaceTimeEval<T>, BasisError> {
    let spatial = match kind {
        ElementKind::Triangle => eval_triangle_basis(order.p, point)?,
        ElementKind::Square => eval_square_basis(order.p, point, None)?,
    };
    let (gamma, dgamma) = eval_temporal_basis(order.p_gamma, tau)?;
    let n = spatial.values.len() * gamma.len();
    let mut out = SpaceTimeEval {
        values: Vec::with_capacity(n),
        gradients: Vec::with_capacity(n),
        time_derivatives: Vec::with_capacity(n),
    };
    for (v, g) in spatial.values.iter().zip(&spatial.gradients) {
        for (gl, dgl) in gamma.iter().zip(&dgamma) {
            out.values.push(*v * *gl);
            out.gradients.push(*g * *gl);
            out.time_derivatives.push(*v * *dgl);
        }
    }
    Ok(out)
}
