use nalgebra::DMatrix;

use crate::basis::{DiscretizationOrder, ReferenceBasis, SubTriangle, TemporalBasis};
use crate::mesh::AffineMap;
use crate::quadrature::{LineRule, TriangleRule};
use crate::real::{Real, Vec2};

/// Map from a reference dual half onto its sub-triangle of `T_std`, for the
/// half on local edge `e` (barycenter plus vertices `e`, `e + 1`).
pub fn reference_half_map<T: Real>(local_edge: usize, kind: SubTriangle) -> AffineMap<T> {
    let v = [
        Vec2::new(T::zero(), T::zero()),
        Vec2::new(T::one(), T::zero()),
        Vec2::new(T::zero(), T::one()),
    ];
    let c = Vec2::new(T::one(), T::one()) / T::lit(3.0);
    let (ve, vn) = (v[local_edge % 3], v[(local_edge + 1) % 3]);
    let corners = match kind {
        SubTriangle::Lower => [c, ve, vn],
        SubTriangle::Upper => [vn, c, ve],
    };
    AffineMap::for_half(kind, &corners).expect("reference half is non-degenerate")
}

/// Point at parameter `s` on a side of the reference half running from the
/// barycenter corner (`s = 0`) to the edge's first (`side = 0`) or second
/// (`side = 1`) vertex.
pub fn side_parameter_point<T: Real>(kind: SubTriangle, side: usize, s: T) -> Vec2<T> {
    let one = T::one();
    match (kind, side) {
        (SubTriangle::Lower, 0) => Vec2::new(s, T::zero()),
        (SubTriangle::Lower, _) => Vec2::new(T::zero(), s),
        (SubTriangle::Upper, 0) => Vec2::new(one - s, one),
        (SubTriangle::Upper, _) => Vec2::new(one, one - s),
    }
}

/// Point at parameter `s` on the diagonal, from `(1,0)` to `(0,1)`.
fn diagonal_point<T: Real>(s: T) -> Vec2<T> {
    Vec2::new(T::one() - s, s)
}

/// Exact reference integrals for one discretization order.
///
/// Spatial tensors of the split-square basis live on the reference half of
/// the given kind (index `kind.index()`); `d` indices are reference
/// derivative directions. Temporal matrices are on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTensors<T> {
    pub order: DiscretizationOrder,
    /// `int_{T_std} phi_k phi_l`.
    pub triangle_mass: DMatrix<T>,
    /// `[kind]`: `int psi_k psi_l` over the reference half.
    pub half_mass: [DMatrix<T>; 2],
    /// `[kind][d1][d2]`: `int d_{d1} psi_k d_{d2} psi_l`.
    pub half_stiffness: [[[DMatrix<T>; 2]; 2]; 2],
    /// `[kind][d]`: `int d_d psi_k psi_a psi_b` at `(k, a * n_psi + b)`.
    pub half_convection: [[DMatrix<T>; 2]; 2],
    /// `[e][kind][d]`: `int psi_k (d_d phi_l)(A x)` with `A` the half's
    /// position in `T_std` and `d` a `T_std` direction.
    pub gradient_coupling: [[[DMatrix<T>; 2]; 2]; 3],
    /// `[e][kind]`: `int_0^1 psi_k phi_l` along the diagonal.
    pub diagonal_trace: [[DMatrix<T>; 2]; 3],
    /// `[kind][side][d]`: `int_0^1 (d_d psi_k) l_i` along a side, with `l_i`
    /// the 1D Lagrange function of the `i`-th node on that side.
    pub side_gradient: [[[DMatrix<T>; 2]; 2]; 2],
    /// `int_0^1 l_i l_j` for `p + 1` equidistant nodes.
    pub line_mass: DMatrix<T>,
    /// `int_0^1 l_i l_j l_m` at `(i, j * (p + 1) + m)`.
    pub line_triple: DMatrix<T>,
    /// `[kind][side]`: square-node indices on a side, ordered by parameter.
    pub side_nodes: [[Vec<usize>; 2]; 2],
    /// `int_0^1 gamma_m gamma_l`.
    pub time_mass: DMatrix<T>,
    /// `int_0^1 gamma_m gamma_l'`.
    pub time_derivative: DMatrix<T>,
    /// `gamma_m(0)` and `gamma_m(1)`.
    pub time_start: Vec<T>,
    pub time_end: Vec<T>,
}

impl<T: Real> ReferenceTensors<T> {
    /// Integrate every reference tensor with Gauss rules of degree
    /// `max(2p + 2, 3p)` (space) and `2 p_gamma + 2` (time), exact for the
    /// polynomial integrands (the convective triple products have degree
    /// `3p - 1` on halves and `3p` on sides).
    pub fn precompute(order: DiscretizationOrder) -> Self {
        Self::precompute_with(order, 0)
    }

    /// Same as [`precompute`](Self::precompute) with `extra` added to every
    /// rule degree.
    pub fn precompute_with(order: DiscretizationOrder, extra: usize) -> Self {
        let basis = ReferenceBasis::<T>::new(order);
        let p = order.p;
        let n_phi = order.n_phi();
        let n_psi = order.n_psi();
        let degree = (2 * p + 2).max(3 * p) + extra;
        let tri_rule = TriangleRule::<T>::exact_for(degree);
        let line_rule = LineRule::<T>::exact_for(degree);

        let mut triangle_mass = DMatrix::zeros(n_phi, n_phi);
        for (x, w) in tri_rule.points.iter().zip(&tri_rule.weights) {
            let v = basis.triangle.values_unchecked(*x);
            triangle_mass += DMatrix::from_fn(n_phi, n_phi, |k, l| *w * v[k] * v[l]);
        }

        let zeros = |r: usize, c: usize| DMatrix::<T>::zeros(r, c);
        let mut half_mass = [zeros(n_psi, n_psi), zeros(n_psi, n_psi)];
        let mut half_stiffness: [[[DMatrix<T>; 2]; 2]; 2] = std::array::from_fn(|_| {
            std::array::from_fn(|_| std::array::from_fn(|_| zeros(n_psi, n_psi)))
        });
        let mut half_convection: [[DMatrix<T>; 2]; 2] =
            std::array::from_fn(|_| std::array::from_fn(|_| zeros(n_psi, n_psi * n_psi)));
        let mut gradient_coupling: [[[DMatrix<T>; 2]; 2]; 3] = std::array::from_fn(|_| {
            std::array::from_fn(|_| std::array::from_fn(|_| zeros(n_psi, n_phi)))
        });
        let mut diagonal_trace: [[DMatrix<T>; 2]; 3] =
            std::array::from_fn(|_| std::array::from_fn(|_| zeros(n_psi, n_phi)));
        let mut side_gradient: [[[DMatrix<T>; 2]; 2]; 2] = std::array::from_fn(|_| {
            std::array::from_fn(|_| std::array::from_fn(|_| zeros(n_psi, p + 1)))
        });

        let edge_basis = TemporalBasis::<T>::new(p).expect("p within the temporal cap");

        for kind in SubTriangle::BOTH {
            let ki = kind.index();
            for (x_ref, w) in tri_rule.points.iter().zip(&tri_rule.weights) {
                // the Lower half is T_std itself, the Upper half its mirror
                // (unit Jacobian determinant)
                let x = kind.from_reference_triangle(*x_ref);
                let psi = basis.square.eval_on(kind, x);
                for k in 0..n_psi {
                    for l in 0..n_psi {
                        half_mass[ki][(k, l)] += *w * psi.values[k] * psi.values[l];
                        for d1 in 0..2 {
                            for d2 in 0..2 {
                                half_stiffness[ki][d1][d2][(k, l)] +=
                                    *w * psi.gradients[k][d1] * psi.gradients[l][d2];
                            }
                            let wg = *w * psi.gradients[k][d1] * psi.values[l];
                            for b in 0..n_psi {
                                half_convection[ki][d1][(k, l * n_psi + b)] += wg * psi.values[b];
                            }
                        }
                    }
                }
                for e in 0..3 {
                    let map = reference_half_map::<T>(e, kind);
                    let phi = basis.triangle.eval_unchecked(map.apply(x));
                    for k in 0..n_psi {
                        for l in 0..n_phi {
                            for d in 0..2 {
                                gradient_coupling[e][ki][d][(k, l)] +=
                                    *w * psi.values[k] * phi.gradients[l][d];
                            }
                        }
                    }
                }
            }
            for (s, w) in line_rule.points.iter().zip(&line_rule.weights) {
                let x = diagonal_point(*s);
                let psi = basis.square.eval_on(kind, x);
                for e in 0..3 {
                    let map = reference_half_map::<T>(e, kind);
                    let phi = basis.triangle.values_unchecked(map.apply(x));
                    for k in 0..n_psi {
                        for l in 0..n_phi {
                            diagonal_trace[e][ki][(k, l)] += *w * psi.values[k] * phi[l];
                        }
                    }
                }
                let (ell, _) = edge_basis.eval_unchecked(*s);
                for side in 0..2 {
                    let psi = basis
                        .square
                        .eval_on(kind, side_parameter_point(kind, side, *s));
                    for k in 0..n_psi {
                        for (i, li) in ell.iter().enumerate() {
                            for d in 0..2 {
                                side_gradient[ki][side][d][(k, i)] +=
                                    *w * psi.gradients[k][d] * *li;
                            }
                        }
                    }
                }
            }
        }

        let mut line_mass = zeros(p + 1, p + 1);
        let mut line_triple = zeros(p + 1, (p + 1) * (p + 1));
        for (s, w) in line_rule.points.iter().zip(&line_rule.weights) {
            let (ell, _) = edge_basis.eval_unchecked(*s);
            line_mass += DMatrix::from_fn(p + 1, p + 1, |i, j| *w * ell[i] * ell[j]);
            line_triple += DMatrix::from_fn(p + 1, (p + 1) * (p + 1), |i, jm| {
                *w * ell[i] * ell[jm / (p + 1)] * ell[jm % (p + 1)]
            });
        }

        let side_nodes = side_node_lists(&basis);

        let n_gamma = order.n_gamma();
        let time_rule = LineRule::<T>::exact_for(2 * order.p_gamma + 2 + extra);
        let mut time_mass = zeros(n_gamma, n_gamma);
        let mut time_derivative = zeros(n_gamma, n_gamma);
        for (tau, w) in time_rule.points.iter().zip(&time_rule.weights) {
            let (g, dg) = basis.temporal.eval_unchecked(*tau);
            time_mass += DMatrix::from_fn(n_gamma, n_gamma, |m, l| *w * g[m] * g[l]);
            time_derivative += DMatrix::from_fn(n_gamma, n_gamma, |m, l| *w * g[m] * dg[l]);
        }
        let (time_start, _) = basis.temporal.eval_unchecked(T::zero());
        let (time_end, _) = basis.temporal.eval_unchecked(T::one());

        ReferenceTensors {
            order,
            triangle_mass,
            half_mass,
            half_stiffness,
            half_convection,
            gradient_coupling,
            diagonal_trace,
            side_gradient,
            line_mass,
            line_triple,
            side_nodes,
            time_mass,
            time_derivative,
            time_start,
            time_end,
        }
    }

    /// Upwind-in-time slab operator `int gamma_m gamma_l' + gamma_m(0) gamma_l(0)`:
    /// the time derivative integrated by parts with the inflow trace taken
    /// from the previous slab.
    pub fn time_upwind(&self) -> DMatrix<T> {
        let n = self.time_start.len();
        &self.time_derivative
            + DMatrix::from_fn(n, n, |m, l| self.time_start[m] * self.time_start[l])
    }

    /// Space-time mass of the triangle basis (time-major Kronecker product).
    pub fn spacetime_triangle_mass(&self) -> DMatrix<T> {
        self.time_mass.kronecker(&self.triangle_mass)
    }

    /// Space-time mass of the split-square basis on the full reference square.
    pub fn spacetime_square_mass(&self) -> DMatrix<T> {
        self.time_mass
            .kronecker(&(&self.half_mass[0] + &self.half_mass[1]))
    }

    /// Every dense tensor in a fixed order (used by the binary dump).
    pub(crate) fn matrices_mut(&mut self) -> Vec<&mut DMatrix<T>> {
        let mut out: Vec<&mut DMatrix<T>> = vec![&mut self.triangle_mass];
        out.extend(self.half_mass.iter_mut());
        out.extend(self.half_stiffness.iter_mut().flatten().flatten());
        out.extend(self.half_convection.iter_mut().flatten());
        out.extend(self.gradient_coupling.iter_mut().flatten().flatten());
        out.extend(self.diagonal_trace.iter_mut().flatten());
        out.extend(self.side_gradient.iter_mut().flatten().flatten());
        out.push(&mut self.line_mass);
        out.push(&mut self.line_triple);
        out.push(&mut self.time_mass);
        out.push(&mut self.time_derivative);
        out
    }
}

fn side_node_lists<T: Real>(basis: &ReferenceBasis<T>) -> [[Vec<usize>; 2]; 2] {
    let p = basis.order.p;
    let sq = &basis.square;
    [
        [
            (0..=p).map(|i| sq.node_index(i, 0)).collect(),
            (0..=p).map(|i| sq.node_index(0, i)).collect(),
        ],
        [
            (0..=p).map(|i| sq.node_index(p - i, p)).collect(),
            (0..=p).map(|i| sq.node_index(p, p - i)).collect(),
        ],
    ]
}
