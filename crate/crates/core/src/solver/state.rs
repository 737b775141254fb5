use super::Discretization;
use crate::basis::DiscretizationOrder;
use crate::quadrature::TriangleRule;
use crate::real::{Real, Vec2};

/// Space-time coefficients of one slab `[t_start, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeState<T> {
    pub order: DiscretizationOrder,
    pub t_start: T,
    pub t_end: T,
    pub pressure: Vec<T>,
    pub velocity: [Vec<T>; 2],
}

impl<T: Real> SpaceTimeState<T> {
    pub fn zeros(order: DiscretizationOrder, n_triangles: usize, n_elements: usize, t: T) -> Self {
        SpaceTimeState {
            order,
            t_start: t,
            t_end: t,
            pressure: vec![T::zero(); n_triangles * order.n_phi_st()],
            velocity: [
                vec![T::zero(); n_elements * order.n_psi_st()],
                vec![T::zero(); n_elements * order.n_psi_st()],
            ],
        }
    }

    pub fn n_triangles(&self) -> usize {
        self.pressure.len() / self.order.n_phi_st()
    }

    pub fn n_elements(&self) -> usize {
        self.velocity[0].len() / self.order.n_psi_st()
    }

    /// Slab with the spatial fields replicated at every temporal node.
    pub fn replicated(
        order: DiscretizationOrder,
        pressure: &[T],
        velocity: &[Vec<T>; 2],
        t_start: T,
        t_end: T,
    ) -> Self {
        let ng = order.n_gamma();
        let rep = |x: &[T], n: usize| -> Vec<T> {
            x.chunks(n)
                .flat_map(|c| std::iter::repeat(c).take(ng).flatten().copied())
                .collect()
        };
        SpaceTimeState {
            order,
            t_start,
            t_end,
            pressure: rep(pressure, order.n_phi()),
            velocity: [
                rep(&velocity[0], order.n_psi()),
                rep(&velocity[1], order.n_psi()),
            ],
        }
    }

    /// Spatial coefficients at temporal weights `w` (`n_gamma` entries).
    fn combine(x: &[T], n: usize, w: &[T]) -> Vec<T> {
        let ng = w.len();
        x.chunks(n * ng)
            .flat_map(|block| {
                (0..n).map(move |k| (0..ng).fold(T::zero(), |acc, l| acc + w[l] * block[l * n + k]))
            })
            .collect()
    }

    /// Velocity at reference time `tau`, per element spatial coefficients.
    pub fn velocity_at(&self, tau: T) -> [Vec<T>; 2] {
        let (w, _) = crate::basis::TemporalBasis::new(self.order.p_gamma)
            .expect("validated order")
            .eval_unchecked(tau);
        let n = self.order.n_psi();
        [
            Self::combine(&self.velocity[0], n, &w),
            Self::combine(&self.velocity[1], n, &w),
        ]
    }

    pub fn pressure_at(&self, tau: T) -> Vec<T> {
        let (w, _) = crate::basis::TemporalBasis::new(self.order.p_gamma)
            .expect("validated order")
            .eval_unchecked(tau);
        Self::combine(&self.pressure, self.order.n_phi(), &w)
    }

    pub fn end_velocity(&self) -> [Vec<T>; 2] {
        self.velocity_at(T::one())
    }

    pub fn end_pressure(&self) -> Vec<T> {
        self.pressure_at(T::one())
    }

    /// `[u, v]` coefficients of temporal node `l`, per element.
    pub fn velocity_node(&self, l: usize) -> Vec<[Vec<T>; 2]> {
        let (n, ng) = (self.order.n_psi(), self.order.n_gamma());
        (0..self.n_elements())
            .map(|q| {
                std::array::from_fn(|c| {
                    self.velocity[c][(q * ng + l) * n..(q * ng + l + 1) * n].to_vec()
                })
            })
            .collect()
    }

    /// Pressure coefficients of temporal node `l`, `n_phi` per triangle.
    pub fn pressure_node(&self, l: usize) -> Vec<T> {
        let (n, ng) = (self.order.n_phi(), self.order.n_gamma());
        (0..self.n_triangles())
            .flat_map(|t| self.pressure[(t * ng + l) * n..(t * ng + l + 1) * n].to_vec())
            .collect()
    }

    /// Discrete kinetic energy `1/2 |v_h|^2` at the end of the slab.
    pub fn kinetic_energy(&self, disc: &Discretization<T>) -> T {
        self.kinetic_energy_with(&disc.matrices.mass)
    }

    /// Same as [`kinetic_energy`](Self::kinetic_energy) from the dual mass
    /// matrices alone.
    pub fn kinetic_energy_with(&self, mass: &[nalgebra::DMatrix<T>]) -> T {
        let v = self.end_velocity();
        let n = self.order.n_psi();
        let mut e = T::zero();
        for (q, m) in mass.iter().enumerate() {
            for c in &v {
                let x = &c[q * n..(q + 1) * n];
                for i in 0..n {
                    for j in 0..n {
                        e += x[i] * m[(i, j)] * x[j];
                    }
                }
            }
        }
        e * T::lit(0.5)
    }

    /// Add a constant to every pressure coefficient.
    pub fn shift_pressure(&mut self, c: T) {
        self.pressure.iter_mut().for_each(|p| *p += c);
    }
}

/// Element-wise L2 projection of `(velocity, pressure)` at `t`, replicated
/// over the temporal nodes of a zero-length slab at `t`.
pub fn project_initial_condition<T: Real>(
    disc: &Discretization<T>,
    fields: impl Fn(Vec2<T>) -> (Vec2<T>, T),
    t: T,
) -> SpaceTimeState<T> {
    let order = disc.order;
    let (n_psi, n_phi) = (order.n_psi(), order.n_phi());
    let rule = TriangleRule::<T>::exact_for(2 * order.p + 2);

    let mut velocity = [
        vec![T::zero(); disc.n_elements() * n_psi],
        vec![T::zero(); disc.n_elements() * n_psi],
    ];
    let mut loads = vec![[vec![T::zero(); n_psi], vec![T::zero(); n_psi]]; disc.n_elements()];
    for (h, half) in disc.dual.halves.iter().enumerate() {
        for (xi, x, w) in disc.half_quadrature(h, &rule) {
            let psi = disc.basis.square.eval_on(half.kind, xi).values;
            let (v, _) = fields(x);
            for k in 0..n_psi {
                loads[half.element][0][k] += w * psi[k] * v.x;
                loads[half.element][1][k] += w * psi[k] * v.y;
            }
        }
    }
    for (q, load) in loads.iter().enumerate() {
        for c in 0..2 {
            let coeffs =
                &disc.matrices.mass_inverse[q] * nalgebra::DVector::from_column_slice(&load[c]);
            velocity[c][q * n_psi..(q + 1) * n_psi].copy_from_slice(coeffs.as_slice());
        }
    }

    let mut pressure = vec![T::zero(); disc.n_triangles() * n_phi];
    for t_idx in 0..disc.n_triangles() {
        let det = disc.geom.triangles[t_idx].det.abs();
        let mut load = nalgebra::DVector::zeros(n_phi);
        for (xi, x, w) in disc.triangle_quadrature(t_idx, &rule) {
            let phi = disc.basis.triangle.values_unchecked(xi);
            let (_, p) = fields(x);
            for k in 0..n_phi {
                load[k] += w * phi[k] * p;
            }
        }
        let m = &disc.tensors.triangle_mass * det;
        let coeffs = m.cholesky().expect("triangle mass is SPD").solve(&load);
        pressure[t_idx * n_phi..(t_idx + 1) * n_phi].copy_from_slice(coeffs.as_slice());
    }
    SpaceTimeState::replicated(order, &pressure, &velocity, t, t)
}
