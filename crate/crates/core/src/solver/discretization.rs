use nalgebra::DMatrix;

use super::SolverError;
use crate::basis::{DiscretizationOrder, ReferenceBasis, SubTriangle};
use crate::kernels::{assemble_element_matrices, ElementMatrices, ReferenceTensors};
use crate::linsys::BlockSparseMatrix;
use crate::mesh::{build_dual_grid, compute_geometry, DualMesh, ElementGeometry, PrimaryMesh};
use crate::quadrature::TriangleRule;
use crate::real::{Real, Vec2};

/// Everything that stays fixed over a run: meshes, geometry, reference
/// tensors, element matrices and the pressure operator.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    pub order: DiscretizationOrder,
    pub mesh: PrimaryMesh<T>,
    pub dual: DualMesh<T>,
    pub geom: ElementGeometry<T>,
    pub basis: ReferenceBasis<T>,
    pub tensors: ReferenceTensors<T>,
    pub matrices: ElementMatrices<T>,
    /// Physical position of every split-square node, per dual element.
    pub nodes: Vec<Vec<Vec2<T>>>,
    pressure: BlockSparseMatrix<T>,
    /// `dt K_t^{-1} M_t`, the temporal factor of the pressure correction.
    time_weight: DMatrix<T>,
    time_weight_inverse: DMatrix<T>,
}

impl<T: Real> Discretization<T> {
    pub fn new(
        mesh: PrimaryMesh<T>,
        order: DiscretizationOrder,
        nu: T,
    ) -> Result<Self, SolverError> {
        Self::with_tensors(mesh, ReferenceTensors::precompute(order), nu)
    }

    /// Build from already computed (e.g. loaded) reference tensors.
    pub fn with_tensors(
        mesh: PrimaryMesh<T>,
        tensors: ReferenceTensors<T>,
        nu: T,
    ) -> Result<Self, SolverError> {
        if mesh.periodic_pairs().is_empty()
            || mesh
                .boundary_tags()
                .iter()
                .any(|t| matches!(t, crate::mesh::BoundaryTag::Boundary))
        {
            return Err(SolverError::NotPeriodic);
        }
        let order = tensors.order;
        let dual = build_dual_grid(&mesh, true)?;
        let geom = compute_geometry(&mesh, &dual)?;
        let basis = ReferenceBasis::new(order);
        let dt = T::one();
        let matrices = assemble_element_matrices(&tensors, &geom, &dual, nu, dt);
        let pressure = super::step::pressure_operator(&matrices, mesh.n_triangles(), order.n_phi());
        let nodes = (0..dual.n_elements())
            .map(|q| {
                (0..order.n_psi())
                    .map(|k| {
                        let [lo, hi] = dual.elements[q].halves;
                        let (h, kind) = match lo {
                            Some(h) if basis.square.node_in(k, SubTriangle::Lower) => {
                                (h, SubTriangle::Lower)
                            }
                            _ => (hi.or(lo).expect("element has a half"), SubTriangle::Upper),
                        };
                        debug_assert_eq!(dual.halves[h].kind, kind);
                        geom.halves[h].apply(basis.square.nodes()[k])
                    })
                    .collect()
            })
            .collect();
        let mut disc = Discretization {
            order,
            mesh,
            dual,
            geom,
            basis,
            tensors,
            matrices,
            nodes,
            pressure,
            time_weight: DMatrix::zeros(0, 0),
            time_weight_inverse: DMatrix::zeros(0, 0),
        };
        disc.update_time_weight(dt);
        Ok(disc)
    }

    fn update_time_weight(&mut self, dt: T) {
        let k_inv = self
            .tensors
            .time_upwind()
            .try_inverse()
            .expect("upwind time operator is invertible");
        self.time_weight = k_inv * &self.tensors.time_mass * dt;
        self.time_weight_inverse = self
            .time_weight
            .clone()
            .try_inverse()
            .expect("time mass is invertible");
    }

    /// Rebuild the dt-dependent operators.
    pub fn set_time_step(&mut self, dt: T) {
        if dt != self.matrices.dt {
            self.matrices.set_time_step(&self.tensors, dt);
            self.update_time_weight(dt);
        }
    }

    pub fn dt(&self) -> T {
        self.matrices.dt
    }

    pub fn n_elements(&self) -> usize {
        self.dual.n_elements()
    }

    pub fn n_triangles(&self) -> usize {
        self.mesh.n_triangles()
    }

    /// `D M^{-1} G` with sign flipped (`G^T M^{-1} G`): symmetric positive
    /// semi-definite, constant pressures in its kernel.
    pub fn pressure_matrix(&self) -> &BlockSparseMatrix<T> {
        &self.pressure
    }

    pub(crate) fn time_weight(&self) -> &DMatrix<T> {
        &self.time_weight
    }

    pub(crate) fn time_weight_inverse(&self) -> &DMatrix<T> {
        &self.time_weight_inverse
    }

    /// Quadrature over dual half `h`: `(reference square point, physical
    /// point, weight)`.
    pub fn half_quadrature<'a>(
        &'a self,
        h: usize,
        rule: &'a TriangleRule<T>,
    ) -> impl Iterator<Item = (Vec2<T>, Vec2<T>, T)> + 'a {
        let half = &self.dual.halves[h];
        let map = &self.geom.halves[h];
        rule.points.iter().zip(&rule.weights).map(move |(x, w)| {
            let xi = half.kind.from_reference_triangle(*x);
            (xi, map.apply(xi), *w * map.det.abs())
        })
    }

    /// Quadrature over primary triangle `t`: `(reference point, physical
    /// point, weight)`.
    pub fn triangle_quadrature<'a>(
        &'a self,
        t: usize,
        rule: &'a TriangleRule<T>,
    ) -> impl Iterator<Item = (Vec2<T>, Vec2<T>, T)> + 'a {
        let map = &self.geom.triangles[t];
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(move |(x, w)| (*x, map.apply(*x), *w * map.det.abs()))
    }
}
