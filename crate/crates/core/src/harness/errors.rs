use crate::quadrature::TriangleRule;
use crate::real::{Real, Vec2};
use crate::solver::{Discretization, SpaceTimeState};

/// Taylor-Green vortex `(u, v)` and `p` at `x`, `t`.
pub fn taylor_green_exact<T: Real>(x: Vec2<T>, t: T, nu: T) -> (Vec2<T>, T) {
    let decay_v = (-T::lit(2.0) * nu * t).exp();
    let decay_p = (-T::lit(4.0) * nu * t).exp();
    let two = T::lit(2.0);
    let u = x.x.sin() * x.y.cos() * decay_v;
    let v = -x.x.cos() * x.y.sin() * decay_v;
    let p = T::lit(0.25) * ((two * x.x).cos() + (two * x.y).cos()) * decay_p;
    (Vec2::new(u, v), p)
}

/// `log(E1 / E2) / log(h1 / h2)`.
pub fn sigma(e1: f64, e2: f64, h1: f64, h2: f64) -> f64 {
    (e1 / e2).ln() / (h1 / h2).ln()
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ErrorReport {
    pub elements: usize,
    pub h_min: f64,
    pub e2_p: f64,
    pub e2_v: f64,
    /// Order against the previous level, if any.
    pub sigma_v: Option<f64>,
    pub steps: usize,
    pub cpu_s: f64,
    pub mem_mb: f64,
}

/// L2 errors of pressure and velocity at the end of the slab. The pressure
/// difference is taken after removing its mean. Quadrature has degree
/// `2p + 2 + extra_degree` on every half and triangle.
pub fn compute_l2_errors<T: Real>(
    disc: &Discretization<T>,
    state: &SpaceTimeState<T>,
    exact: impl Fn(Vec2<T>) -> (Vec2<T>, T),
    extra_degree: usize,
) -> (f64, f64) {
    let order = disc.order;
    let rule = TriangleRule::<T>::exact_for(2 * order.p + 2 + extra_degree);
    let (n_psi, n_phi) = (order.n_psi(), order.n_phi());

    let v = state.end_velocity();
    let mut e_v = T::zero();
    for (h, half) in disc.dual.halves.iter().enumerate() {
        let q = half.element;
        for (xi, x, w) in disc.half_quadrature(h, &rule) {
            let psi = disc.basis.square.eval_on(half.kind, xi).values;
            let mut vh = Vec2::zeros();
            for k in 0..n_psi {
                vh += Vec2::new(v[0][q * n_psi + k], v[1][q * n_psi + k]) * psi[k];
            }
            e_v += w * (vh - exact(x).0).norm_squared();
        }
    }

    let p = state.end_pressure();
    let mut samples = Vec::new();
    let (mut mean, mut area) = (T::zero(), T::zero());
    for t in 0..disc.n_triangles() {
        for (xi, x, w) in disc.triangle_quadrature(t, &rule) {
            let phi = disc.basis.triangle.values_unchecked(xi);
            let ph = (0..n_phi).fold(T::zero(), |acc, k| acc + p[t * n_phi + k] * phi[k]);
            let d = ph - exact(x).1;
            mean += w * d;
            area += w;
            samples.push((d, w));
        }
    }
    mean /= area;
    let e_p = samples.iter().fold(T::zero(), |acc, (d, w)| {
        acc + *w * (*d - mean) * (*d - mean)
    });
    (e_p.sqrt().to_f64_lossy(), e_v.sqrt().to_f64_lossy())
}
