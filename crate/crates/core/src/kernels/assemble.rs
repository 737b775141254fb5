use nalgebra::DMatrix;

use super::ReferenceTensors;
use crate::basis::SubTriangle;
use crate::linsys::BlockSparseMatrix;
use crate::mesh::{DualMesh, ElementGeometry};
use crate::real::{Real, Vec2};

/// Interior-penalty constant `eta_p` in `eta_p (p+1)^2 / h`.
pub const DEFAULT_PENALTY: f64 = 10.0;

/// Geometric contraction coefficients of one dual half.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfCoefficients<T> {
    pub element: usize,
    pub triangle: usize,
    pub local_edge: usize,
    pub kind: SubTriangle,
    /// Jacobian determinant of the half's map.
    pub det: T,
    /// `det * sum_i inv[d1][i] inv[d2][i]`: stiffness weights.
    pub stiffness: [[T; 2]; 2],
    /// `det * inv[d][i]`: weights turning reference derivatives of the half
    /// basis into physical divergence terms.
    pub convection: [[T; 2]; 2],
    /// `det * inv_t[d][i]` with `inv_t` the inverse Jacobian of the primary
    /// triangle: weights for the pressure gradient coupling.
    pub gradient: [[T; 2]; 2],
    /// Primary edge length times the triangle's outward normal.
    pub edge_normal: Vec2<T>,
}

/// Per-segment data for the interface flux terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentFlux<T> {
    pub elements: [usize; 2],
    pub halves: [usize; 2],
    /// Square-node indices of each side's trace, ordered from the barycenter
    /// to the primary vertex.
    pub nodes: [Vec<usize>; 2],
    /// Unit normal from the first element into the second.
    pub normal: Vec2<T>,
    pub length: T,
}

/// Pressure-gradient block of a dual element against one primary triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBlock<T> {
    pub triangle: usize,
    /// Per component: `n_psi x n_phi`.
    pub blocks: [DMatrix<T>; 2],
}

/// Physical element matrices for one mesh, viscosity and time step.
///
/// Spatial blocks are indexed by split-square function (rows) and triangle
/// function (columns). The space-time momentum operator uses time-major
/// block layout: entry `(m * n_psi + k, l * n_psi + j)`.
#[derive(Debug, Clone)]
pub struct ElementMatrices<T> {
    pub nu: T,
    pub dt: T,
    pub halves: Vec<HalfCoefficients<T>>,
    /// Spatial mass per dual element.
    pub mass: Vec<DMatrix<T>>,
    pub mass_inverse: Vec<DMatrix<T>>,
    /// `nu` times the symmetric interior-penalty Laplacian.
    pub viscous: BlockSparseMatrix<T>,
    /// Per dual element, one block per adjacent triangle.
    pub gradient: Vec<Vec<GradientBlock<T>>>,
    /// Per triangle and local edge: the dual element and the divergence
    /// blocks (`n_phi x n_psi` per component).
    pub divergence: Vec<[(usize, [DMatrix<T>; 2]); 3]>,
    pub segments: Vec<SegmentFlux<T>>,
    /// `K_t (x) M + dt M_t (x) V`, the implicit part of the momentum
    /// predictor (identical for both velocity components).
    pub spacetime: BlockSparseMatrix<T>,
}

fn mat_entries<T: Real>(m: &nalgebra::Matrix2<T>) -> [[T; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// Contract the reference tensors with the element geometry.
///
/// No quadrature happens here: every entry is a combination of reference
/// tensor entries with Jacobian, normal and length coefficients.
pub fn assemble_element_matrices<T: Real>(
    tensors: &ReferenceTensors<T>,
    geom: &ElementGeometry<T>,
    dual: &DualMesh<T>,
    nu: T,
    dt: T,
) -> ElementMatrices<T> {
    assemble_with_penalty(tensors, geom, dual, nu, dt, T::lit(DEFAULT_PENALTY))
}

pub fn assemble_with_penalty<T: Real>(
    tensors: &ReferenceTensors<T>,
    geom: &ElementGeometry<T>,
    dual: &DualMesh<T>,
    nu: T,
    dt: T,
    penalty: T,
) -> ElementMatrices<T> {
    let order = tensors.order;
    let n_psi = order.n_psi();
    let n_phi = order.n_phi();
    let n_el = dual.n_elements();

    let halves: Vec<HalfCoefficients<T>> = dual
        .halves
        .iter()
        .zip(&geom.halves)
        .map(|(h, map)| {
            let inv = mat_entries(&map.inverse);
            let inv_t = mat_entries(&geom.triangles[h.triangle].inverse);
            let det = map.det;
            let stiffness = std::array::from_fn(|a| {
                std::array::from_fn(|b| det * (inv[a][0] * inv[b][0] + inv[a][1] * inv[b][1]))
            });
            HalfCoefficients {
                element: h.element,
                triangle: h.triangle,
                local_edge: h.local_edge,
                kind: h.kind,
                det,
                stiffness,
                convection: std::array::from_fn(|d| std::array::from_fn(|i| det * inv[d][i])),
                gradient: std::array::from_fn(|d| std::array::from_fn(|i| det * inv_t[d][i])),
                edge_normal: geom.outward_normals[h.triangle][h.local_edge]
                    * geom.local_edge_lengths[h.triangle][h.local_edge],
            }
        })
        .collect();

    let mut mass = vec![DMatrix::zeros(n_psi, n_psi); n_el];
    for hc in &halves {
        mass[hc.element] += &tensors.half_mass[hc.kind.index()] * hc.det;
    }
    let mass_inverse = mass.iter().map(active_inverse).collect();

    let mut gradient: Vec<Vec<GradientBlock<T>>> = vec![Vec::new(); n_el];
    let mut divergence: Vec<[(usize, [DMatrix<T>; 2]); 3]> = (0..geom.triangles.len())
        .map(|_| {
            std::array::from_fn(|_| (usize::MAX, [DMatrix::zeros(0, 0), DMatrix::zeros(0, 0)]))
        })
        .collect();
    for hc in &halves {
        let (e, ki) = (hc.local_edge, hc.kind.index());
        let blocks: [DMatrix<T>; 2] = std::array::from_fn(|i| {
            let mut g = &tensors.gradient_coupling[e][ki][0] * hc.gradient[0][i]
                + &tensors.gradient_coupling[e][ki][1] * hc.gradient[1][i];
            // jump of the pressure across the primary edge inside the element
            g -= &tensors.diagonal_trace[e][ki] * hc.edge_normal[i];
            g
        });
        let div: [DMatrix<T>; 2] = std::array::from_fn(|i| {
            let volume = &tensors.gradient_coupling[e][ki][0] * hc.gradient[0][i]
                + &tensors.gradient_coupling[e][ki][1] * hc.gradient[1][i];
            (&tensors.diagonal_trace[e][ki] * hc.edge_normal[i] - volume).transpose()
        });
        divergence[hc.triangle][e] = (hc.element, div);
        gradient[hc.element].push(GradientBlock {
            triangle: hc.triangle,
            blocks,
        });
    }
    debug_assert!(gradient
        .iter()
        .all(|g| g.iter().all(|b| b.blocks[0].shape() == (n_psi, n_phi))));

    let segments: Vec<SegmentFlux<T>> = dual
        .segments
        .iter()
        .zip(&geom.segments)
        .map(|(s, g)| {
            let [a, b] = s.halves;
            let (ka, kb) = (dual.halves[a].kind.index(), dual.halves[b].kind.index());
            SegmentFlux {
                elements: [dual.halves[a].element, dual.halves[b].element],
                halves: [a, b],
                nodes: [
                    tensors.side_nodes[ka][0].clone(),
                    tensors.side_nodes[kb][1].clone(),
                ],
                normal: g.normal,
                length: g.length,
            }
        })
        .collect();

    let viscous = viscous_operator(tensors, &halves, &segments, nu, penalty);
    let spacetime = spacetime_operator(tensors, &mass, &viscous, dt);

    ElementMatrices {
        nu,
        dt,
        halves,
        mass,
        mass_inverse,
        viscous,
        gradient,
        divergence,
        segments,
        spacetime,
    }
}

/// Inverse of a dual mass matrix restricted to its nonzero rows. Degenerate
/// boundary elements own one half only; the other half's nodes stay zero.
fn active_inverse<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let active: Vec<usize> = (0..m.nrows()).filter(|&k| m[(k, k)] > T::zero()).collect();
    let sub = DMatrix::from_fn(active.len(), active.len(), |i, j| m[(active[i], active[j])]);
    let inv = sub
        .cholesky()
        .expect("dual mass is SPD on its support")
        .inverse();
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (i, &a) in active.iter().enumerate() {
        for (j, &b) in active.iter().enumerate() {
            out[(a, b)] = inv[(i, j)];
        }
    }
    out
}

/// Normal-gradient moments of one side: `int (grad psi_k . n) l_i`, divided
/// by the side length.
fn normal_gradient_moments<T: Real>(
    tensors: &ReferenceTensors<T>,
    hc: &HalfCoefficients<T>,
    side: usize,
    normal: Vec2<T>,
) -> DMatrix<T> {
    // (J^{-1} n)_d = (det J^{-1} row d) . n / det
    let w: [T; 2] = std::array::from_fn(|d| {
        (hc.convection[d][0] * normal.x + hc.convection[d][1] * normal.y) / hc.det
    });
    let sg = &tensors.side_gradient[hc.kind.index()][side];
    &sg[0] * w[0] + &sg[1] * w[1]
}

fn viscous_operator<T: Real>(
    tensors: &ReferenceTensors<T>,
    halves: &[HalfCoefficients<T>],
    segments: &[SegmentFlux<T>],
    nu: T,
    penalty: T,
) -> BlockSparseMatrix<T> {
    let n_psi = tensors.order.n_psi();
    let n_el = halves.iter().map(|h| h.element + 1).max().unwrap_or(0);
    let mut blocks = Vec::new();
    for hc in halves {
        let st = &tensors.half_stiffness[hc.kind.index()];
        let mut k = DMatrix::zeros(n_psi, n_psi);
        for d1 in 0..2 {
            for d2 in 0..2 {
                k += &st[d1][d2] * hc.stiffness[d1][d2];
            }
        }
        blocks.push((hc.element, hc.element, k * nu));
    }
    let p1 = tensors.order.p + 1;
    let sigma_base = penalty * T::from_usize_lossy(p1 * p1);
    let half = T::lit(0.5);
    let mut area = vec![T::zero(); n_el];
    for hc in halves {
        area[hc.element] += hc.det * half;
    }
    for seg in segments {
        let hcs = [&halves[seg.halves[0]], &halves[seg.halves[1]]];
        let ng = [
            normal_gradient_moments(tensors, hcs[0], 0, seg.normal),
            normal_gradient_moments(tensors, hcs[1], 1, seg.normal),
        ];
        // h = min dual element area / |f|
        let sigma = sigma_base * seg.length / area[seg.elements[0]].min(area[seg.elements[1]]);
        let sign = [T::one(), -T::one()];
        for x in 0..2 {
            for y in 0..2 {
                let mut b = DMatrix::zeros(n_psi, n_psi);
                // consistency: -{grad u . n}[w]
                for (i, &k) in seg.nodes[x].iter().enumerate() {
                    for l in 0..n_psi {
                        b[(k, l)] -= half * sign[x] * ng[y][(l, i)];
                    }
                }
                // symmetry: -{grad w . n}[u]
                for (j, &l) in seg.nodes[y].iter().enumerate() {
                    for k in 0..n_psi {
                        b[(k, l)] -= half * sign[y] * ng[x][(k, j)];
                    }
                }
                // penalty: sigma [u][w]
                for (i, &k) in seg.nodes[x].iter().enumerate() {
                    for (j, &l) in seg.nodes[y].iter().enumerate() {
                        b[(k, l)] += sigma * sign[x] * sign[y] * tensors.line_mass[(i, j)];
                    }
                }
                blocks.push((seg.elements[x], seg.elements[y], b * (nu * seg.length)));
            }
        }
    }
    BlockSparseMatrix::from_blocks(n_el, n_el, n_psi, blocks)
}

fn spacetime_operator<T: Real>(
    tensors: &ReferenceTensors<T>,
    mass: &[DMatrix<T>],
    viscous: &BlockSparseMatrix<T>,
    dt: T,
) -> BlockSparseMatrix<T> {
    let n_el = mass.len();
    let k_t = tensors.time_upwind();
    let m_dt = &tensors.time_mass * dt;
    let bs = tensors.order.n_psi_st();
    let mut blocks = Vec::with_capacity(viscous.n_blocks() + n_el);
    for (q, m) in mass.iter().enumerate() {
        blocks.push((q, q, k_t.kronecker(m)));
    }
    for i in 0..viscous.n_block_rows() {
        for &j in viscous.row_columns(i) {
            let v = viscous.block(i, j).expect("stored block");
            if v.amax() > T::zero() {
                blocks.push((i, j, m_dt.kronecker(&v)));
            }
        }
    }
    BlockSparseMatrix::from_blocks(n_el, n_el, bs, blocks)
}

impl<T: Real> ElementMatrices<T> {
    /// Rebuild the space-time momentum operator for a new time step.
    pub fn set_time_step(&mut self, tensors: &ReferenceTensors<T>, dt: T) {
        self.dt = dt;
        self.spacetime = spacetime_operator(tensors, &self.mass, &self.viscous, dt);
    }

    /// `G q`: per element, per component, the `n_psi` moments of the
    /// pressure gradient for triangle coefficients `q` (`n_phi` per triangle).
    pub fn apply_gradient(&self, q: &[T], n_phi: usize) -> Vec<[Vec<T>; 2]> {
        self.gradient
            .iter()
            .map(|blocks| {
                let n_psi = blocks[0].blocks[0].nrows();
                let mut out = [vec![T::zero(); n_psi], vec![T::zero(); n_psi]];
                for gb in blocks {
                    let qt = &q[gb.triangle * n_phi..(gb.triangle + 1) * n_phi];
                    for c in 0..2 {
                        for k in 0..n_psi {
                            let mut acc = T::zero();
                            for (l, ql) in qt.iter().enumerate() {
                                acc += gb.blocks[c][(k, l)] * *ql;
                            }
                            out[c][k] += acc;
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// `D v` per triangle for element velocity coefficients `v[element][c]`.
    pub fn apply_divergence(&self, v: &[[Vec<T>; 2]]) -> Vec<T> {
        let n_phi = self
            .divergence
            .first()
            .map(|d| d[0].1[0].nrows())
            .unwrap_or(0);
        let mut out = vec![T::zero(); self.divergence.len() * n_phi];
        for (t, blocks) in self.divergence.iter().enumerate() {
            for (q, d) in blocks {
                for c in 0..2 {
                    for l in 0..n_phi {
                        let mut acc = T::zero();
                        for (k, vk) in v[*q][c].iter().enumerate() {
                            acc += d[c][(l, k)] * *vk;
                        }
                        out[t * n_phi + l] += acc;
                    }
                }
            }
        }
        out
    }
}
