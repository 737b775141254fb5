//! Shared fixtures for the integration tests: random meshes and a direct
//! physical-space quadrature assembly used as an oracle for the kernels.

#![allow(dead_code)]

pub mod basis_props;

use nalgebra::{DMatrix, Matrix2, Vector2};
use nssolver::basis::{DiscretizationOrder, ReferenceBasis, SubTriangle};
use nssolver::kernels::{
    assemble_element_matrices, convective_residual, ElementMatrices, ReferenceTensors,
};
use nssolver::mesh::{
    build_dual_grid, compute_geometry, generate_structured_mesh, DualMesh, ElementGeometry,
    PrimaryMesh, Rect,
};
use nssolver::quadrature::{LineRule, TriangleRule};
use rand::Rng;

pub type V2 = Vector2<f64>;

pub struct Fixture {
    pub mesh: PrimaryMesh<f64>,
    pub dual: DualMesh<f64>,
    pub geom: ElementGeometry<f64>,
}

impl Fixture {
    pub fn new(mesh: PrimaryMesh<f64>, periodic: bool) -> Self {
        let dual = build_dual_grid(&mesh, periodic).unwrap();
        let geom = compute_geometry(&mesh, &dual).unwrap();
        Fixture { mesh, dual, geom }
    }
}

/// Random affine image of the 2x2 structured unit-square mesh with its
/// interior vertex perturbed. Periodic pairing survives the affine map.
pub fn random_affine_mesh<R: Rng>(rng: &mut R) -> PrimaryMesh<f64> {
    let base = generate_structured_mesh(2, Rect::new(0.0, 1.0, 0.0, 1.0)).unwrap();
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    let rot = Matrix2::new(theta.cos(), -theta.sin(), theta.sin(), theta.cos());
    let stretch = Matrix2::new(
        rng.gen_range(0.6..1.6),
        rng.gen_range(-0.4..0.4),
        0.0,
        rng.gen_range(0.6..1.6),
    );
    let a = rot * stretch * rng.gen_range(0.2..3.0);
    let b = V2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let mut verts: Vec<V2> = base.vertices().to_vec();
    verts[4] += V2::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
    let verts = verts.into_iter().map(|v| a * v + b).collect();
    PrimaryMesh::new(verts, base.triangles().to_vec())
        .unwrap()
        .with_periodic_pairs(&base.periodic_pairs())
        .unwrap()
}

/// Affine map from three reference points onto three physical points,
/// returned as `(pull_back, jacobian_inverse)`.
fn pull_back(reference: [V2; 3], physical: [V2; 3]) -> (impl Fn(V2) -> V2, Matrix2<f64>) {
    let r = Matrix2::from_columns(&[reference[1] - reference[0], reference[2] - reference[0]]);
    let p = Matrix2::from_columns(&[physical[1] - physical[0], physical[2] - physical[0]]);
    let jac = p * r.try_inverse().unwrap();
    let inv = jac.try_inverse().unwrap();
    let (x0, r0) = (physical[0], reference[0]);
    (move |x: V2| r0 + inv * (x - x0), inv)
}

fn half_reference_corners(kind: SubTriangle) -> [V2; 3] {
    match kind {
        SubTriangle::Lower => [V2::new(0.0, 0.0), V2::new(1.0, 0.0), V2::new(0.0, 1.0)],
        SubTriangle::Upper => [V2::new(1.0, 0.0), V2::new(1.0, 1.0), V2::new(0.0, 1.0)],
    }
}

/// Physical values and gradients of every split-square function of a half.
struct HalfEval<'a> {
    basis: &'a ReferenceBasis<f64>,
    kind: SubTriangle,
    inv: Matrix2<f64>,
    back: Box<dyn Fn(V2) -> V2 + 'a>,
}

impl<'a> HalfEval<'a> {
    fn new(basis: &'a ReferenceBasis<f64>, fx: &Fixture, h: usize) -> Self {
        let half = &fx.dual.halves[h];
        let (back, inv) = pull_back(half_reference_corners(half.kind), half.corners);
        HalfEval {
            basis,
            kind: half.kind,
            inv,
            back: Box::new(back),
        }
    }

    fn eval(&self, x: V2) -> (Vec<f64>, Vec<V2>) {
        let e = self.basis.square.eval_on(self.kind, (self.back)(x));
        let g = e
            .gradients
            .iter()
            .map(|g| self.inv.transpose() * g)
            .collect();
        (e.values, g)
    }
}

fn triangle_eval<'a>(
    basis: &'a ReferenceBasis<f64>,
    fx: &Fixture,
    t: usize,
) -> impl Fn(V2) -> (Vec<f64>, Vec<V2>) + 'a {
    let refc = [V2::new(0.0, 0.0), V2::new(1.0, 0.0), V2::new(0.0, 1.0)];
    let (back, inv) = pull_back(refc, fx.mesh.triangle_vertices(t));
    move |x| {
        let e = basis.triangle.eval_unchecked(back(x));
        (
            e.values,
            e.gradients.iter().map(|g| inv.transpose() * g).collect(),
        )
    }
}

fn equispaced(p: usize) -> Vec<f64> {
    if p == 0 {
        vec![1.0]
    } else {
        (0..=p).map(|i| i as f64 / p as f64).collect()
    }
}

fn lagrange_1d(p: usize, s: f64) -> Vec<f64> {
    let t = equispaced(p);
    (0..=p)
        .map(|i| {
            (0..=p)
                .filter(|&j| j != i)
                .map(|j| (s - t[j]) / (t[i] - t[j]))
                .product()
        })
        .collect()
}

fn lagrange_1d_derivative(p: usize, s: f64) -> Vec<f64> {
    let t = equispaced(p);
    (0..=p)
        .map(|i| {
            (0..=p)
                .filter(|&j| j != i)
                .map(|j| {
                    let rest: f64 = (0..=p)
                        .filter(|&m| m != i && m != j)
                        .map(|m| (s - t[m]) / (t[i] - t[m]))
                        .product();
                    rest / (t[i] - t[j])
                })
                .sum()
        })
        .collect()
}

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

/// Largest relative defect, per matrix kind, between the contracted
/// element matrices and a direct physical-space quadrature assembly.
pub fn oracle_defects<R: Rng>(
    order: DiscretizationOrder,
    fx: &Fixture,
    nu: f64,
    dt: f64,
    penalty: f64,
    rng: &mut R,
) -> Vec<(&'static str, f64)> {
    let tensors = ReferenceTensors::<f64>::precompute(order);
    let m: ElementMatrices<f64> = assemble_element_matrices(&tensors, &fx.geom, &fx.dual, nu, dt);
    let basis = ReferenceBasis::<f64>::new(order);
    let (p, n_psi, n_phi) = (order.p, order.n_psi(), order.n_phi());
    let n_el = fx.dual.n_elements();
    let deg = 2 * p + 6;
    let tri_rule = TriangleRule::<f64>::exact_for(deg);
    let line_rule = LineRule::<f64>::exact_for(deg);

    let mut mass = vec![DMatrix::zeros(n_psi, n_psi); n_el];
    let mut viscous = DMatrix::zeros(n_el * n_psi, n_el * n_psi);
    let mut grad_defect: f64 = 0.0;
    let mut div_defect: f64 = 0.0;
    let mut conv = vec![[vec![0.0; n_psi], vec![0.0; n_psi]]; n_el];
    let velocity: Vec<[Vec<f64>; 2]> = (0..n_el)
        .map(|_| std::array::from_fn(|_| (0..n_psi).map(|_| rng.gen_range(-1.0..1.0)).collect()))
        .collect();
    let vel_at = |q: usize, vals: &[f64]| -> V2 {
        V2::new(
            vals.iter().zip(&velocity[q][0]).map(|(a, b)| a * b).sum(),
            vals.iter().zip(&velocity[q][1]).map(|(a, b)| a * b).sum(),
        )
    };

    for (h, half) in fx.dual.halves.iter().enumerate() {
        let q = half.element;
        let he = HalfEval::new(&basis, fx, h);
        let tri = triangle_eval(&basis, fx, half.triangle);
        let rule = tri_rule.mapped(half.corners[0], half.corners[1], half.corners[2]);
        let mut g = [DMatrix::zeros(n_psi, n_phi), DMatrix::zeros(n_psi, n_phi)];
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let w = w.abs();
            let (psi, dpsi) = he.eval(*x);
            let (_, dphi) = tri(*x);
            let vx = vel_at(q, &psi);
            let flux = vx * vx.transpose();
            for k in 0..n_psi {
                for l in 0..n_psi {
                    mass[q][(k, l)] += w * psi[k] * psi[l];
                    viscous[(q * n_psi + k, q * n_psi + l)] += w * nu * dpsi[k].dot(&dpsi[l]);
                }
                for l in 0..n_phi {
                    for i in 0..2 {
                        g[i][(k, l)] += w * psi[k] * dphi[l][i];
                    }
                }
                for c in 0..2 {
                    conv[q][c][k] -= w * (dpsi[k][0] * flux[(0, c)] + dpsi[k][1] * flux[(1, c)]);
                }
            }
        }
        // primary-edge term with the triangle's outward normal
        let (a, b) = match half.kind {
            SubTriangle::Lower => (half.corners[1], half.corners[2]),
            SubTriangle::Upper => (half.corners[2], half.corners[0]),
        };
        let len = (b - a).norm();
        let n = V2::new((b - a).y, -(b - a).x) / len;
        for (s, w) in line_rule.points.iter().zip(&line_rule.weights) {
            let x = a + (b - a) * *s;
            let (psi, _) = he.eval(x);
            let (phi, _) = tri(x);
            for k in 0..n_psi {
                for l in 0..n_phi {
                    for i in 0..2 {
                        g[i][(k, l)] -= w * len * psi[k] * phi[l] * n[i];
                    }
                }
            }
        }
        let block = m.gradient[q]
            .iter()
            .find(|b| b.triangle == half.triangle)
            .unwrap();
        let div = &m.divergence[half.triangle][half.local_edge];
        assert_eq!(div.0, q);
        for i in 0..2 {
            grad_defect = grad_defect.max(rel(&block.blocks[i], &g[i]));
            div_defect = div_defect.max(rel(&div.1[i], &(-g[i].transpose())));
        }
    }

    let sigma_base = penalty * ((p + 1) * (p + 1)) as f64;
    let mut el_area = vec![0.0; fx.dual.n_elements()];
    for h in &fx.dual.halves {
        el_area[h.element] += h.area();
    }
    for seg in &fx.dual.segments {
        let [ha, hb] = seg.halves;
        let ev = [HalfEval::new(&basis, fx, ha), HalfEval::new(&basis, fx, hb)];
        let els = [fx.dual.halves[ha].element, fx.dual.halves[hb].element];
        let d = seg.to - seg.from;
        let len = d.norm();
        let n = V2::new(d.y, -d.x) / len;
        let area = el_area[els[0]].min(el_area[els[1]]);
        let sigma = sigma_base * len / area;
        let sign = [1.0, -1.0];
        // Rusanov speed: largest nodal value along the segment
        let speed = (0..=p)
            .map(|i| {
                let x = seg.from + d * (i as f64 / p as f64);
                let va = vel_at(els[0], &ev[0].eval(x).0);
                let vb = vel_at(els[1], &ev[1].eval(x).0);
                2.0 * va.dot(&n).abs().max(vb.dot(&n).abs())
            })
            .fold(0.0, f64::max);
        for (s, w) in line_rule.points.iter().zip(&line_rule.weights) {
            let x = seg.from + d * *s;
            let w = w * len;
            let vals = [ev[0].eval(x), ev[1].eval(x)];
            let (va, vb) = (vel_at(els[0], &vals[0].0), vel_at(els[1], &vals[1].0));
            let f = (va * va.dot(&n) + vb * vb.dot(&n)) * 0.5 - (vb - va) * (0.5 * speed);
            for xs in 0..2 {
                for k in 0..n_psi {
                    for c in 0..2 {
                        conv[els[xs]][c][k] += sign[xs] * w * vals[xs].0[k] * f[c];
                    }
                    for ys in 0..2 {
                        for l in 0..n_psi {
                            let (wk, dwk) = (vals[xs].0[k], vals[xs].1[k].dot(&n));
                            let (ul, dul) = (vals[ys].0[l], vals[ys].1[l].dot(&n));
                            let e = -0.5 * dul * sign[xs] * wk - 0.5 * dwk * sign[ys] * ul
                                + sigma * sign[xs] * sign[ys] * wk * ul;
                            viscous[(els[xs] * n_psi + k, els[ys] * n_psi + l)] += nu * w * e;
                        }
                    }
                }
            }
        }
    }

    let mass_defect = (0..n_el)
        .map(|q| rel(&m.mass[q], &mass[q]))
        .fold(0.0, f64::max);
    let viscous_defect = rel(&m.viscous.to_dense(), &viscous);

    // temporal tensors straight from the Lagrange polynomials
    let n_gamma = order.n_gamma();
    let time_rule = LineRule::<f64>::exact_for(2 * order.p_gamma + 6);
    let mut mt = DMatrix::zeros(n_gamma, n_gamma);
    let mut kt = DMatrix::zeros(n_gamma, n_gamma);
    let gamma = |t: f64| lagrange_1d(order.p_gamma, t);
    for (t, w) in time_rule.points.iter().zip(&time_rule.weights) {
        let g = gamma(*t);
        let dg = lagrange_1d_derivative(order.p_gamma, *t);
        for a in 0..n_gamma {
            for b in 0..n_gamma {
                mt[(a, b)] += w * g[a] * g[b];
                kt[(a, b)] += w * g[a] * dg[b];
            }
        }
    }
    let g0 = gamma(0.0);
    kt += DMatrix::from_fn(n_gamma, n_gamma, |a, b| g0[a] * g0[b]);
    let bs = n_gamma * n_psi;
    let mut st = DMatrix::zeros(n_el * bs, n_el * bs);
    for q in 0..n_el {
        for r in 0..n_el {
            let v = viscous
                .view((q * n_psi, r * n_psi), (n_psi, n_psi))
                .clone_owned();
            let mut blk = (&mt * dt).kronecker(&v);
            if q == r {
                blk += kt.kronecker(&mass[q]);
            }
            st.view_mut((q * bs, r * bs), (bs, bs)).copy_from(&blk);
        }
    }
    let spacetime_defect = rel(&m.spacetime.to_dense(), &st);

    let residual = convective_residual(&tensors, &m, &velocity);
    let scale = conv
        .iter()
        .flat_map(|c| c.iter().flatten())
        .fold(1.0f64, |a, b| a.max(b.abs()));
    let conv_defect = residual
        .iter()
        .zip(&conv)
        .flat_map(|(a, b)| a.iter().flatten().zip(b.iter().flatten()))
        .map(|(a, b)| (a - b).abs() / scale)
        .fold(0.0, f64::max);

    vec![
        ("mass", mass_defect),
        ("viscous", viscous_defect),
        ("gradient", grad_defect),
        ("divergence", div_defect),
        ("convection", conv_defect),
        ("spacetime", spacetime_defect),
    ]
}
