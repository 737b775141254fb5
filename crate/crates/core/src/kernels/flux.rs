use super::{ElementMatrices, ReferenceTensors, SegmentFlux};
use crate::real::{Real, Vec2};

/// Rusanov flux `F_hat . n` of the convective tensor `v (x) v` between the
/// states `a` (inside) and `b` (outside) for signal speed `speed`.
pub fn rusanov_flux<T: Real>(a: Vec2<T>, b: Vec2<T>, n: Vec2<T>, speed: T) -> Vec2<T> {
    let half = T::lit(0.5);
    (a * a.dot(&n) + b * b.dot(&n)) * half - (b - a) * (half * speed)
}

/// Signal speed of one interface: the largest `2 max(|a.n|, |b.n|)` over
/// its trace nodes.
pub fn segment_speed<T: Real>(first: &[Vec2<T>], second: &[Vec2<T>], n: Vec2<T>) -> T {
    first.iter().zip(second).fold(T::zero(), |s, (a, b)| {
        s.max(T::lit(2.0) * a.dot(&n).abs().max(b.dot(&n).abs()))
    })
}

/// Interface term `int_f psi F_hat . n` for one dual segment, given the
/// nodal velocities of both sides' traces (ordered as `seg.nodes`).
///
/// The Rusanov flux uses the segment's constant [`segment_speed`], so the
/// integrand is a polynomial and the line triple-product and mass tensors
/// integrate it exactly. Returns the contributions to the trace test
/// functions of the first and second element, in trace-node order.
pub fn contract_flux_terms<T: Real>(
    tensors: &ReferenceTensors<T>,
    seg: &SegmentFlux<T>,
    first: &[Vec2<T>],
    second: &[Vec2<T>],
) -> [Vec<Vec2<T>>; 2] {
    let n = seg.normal;
    let np = first.len();
    let half = T::lit(0.5);
    let speed = segment_speed(first, second, n);
    let (an, bn): (Vec<T>, Vec<T>) = first
        .iter()
        .zip(second)
        .map(|(a, b)| (a.dot(&n), b.dot(&n)))
        .unzip();
    let into_first: Vec<Vec2<T>> = (0..np)
        .map(|i| {
            let mut central = Vec2::zeros();
            for j in 0..np {
                for m in 0..np {
                    let t = tensors.line_triple[(i, j * np + m)];
                    central += (first[j] * an[m] + second[j] * bn[m]) * t;
                }
            }
            let jump = (0..np).fold(Vec2::zeros(), |acc, j| {
                acc + (second[j] - first[j]) * tensors.line_mass[(i, j)]
            });
            (central - jump * speed) * (half * seg.length)
        })
        .collect();
    let into_second = into_first.iter().map(|v| -v).collect();
    [into_first, into_second]
}

/// Weak convective operator `-int grad psi . (v (x) v) + int_f psi F_hat . n`
/// at one temporal node. Volume terms are exact through the triple-product
/// tensors.
///
/// `velocity[q]` holds the nodal `u` and `v` values of dual element `q`;
/// the result has the same layout.
pub fn convective_residual<T: Real>(
    tensors: &ReferenceTensors<T>,
    matrices: &ElementMatrices<T>,
    velocity: &[[Vec<T>; 2]],
) -> Vec<[Vec<T>; 2]> {
    let n_psi = tensors.order.n_psi();
    let mut out: Vec<[Vec<T>; 2]> = velocity
        .iter()
        .map(|_| [vec![T::zero(); n_psi], vec![T::zero(); n_psi]])
        .collect();
    let mut weights = vec![[T::zero(); 2]; n_psi];
    let mut y = vec![T::zero(); n_psi * n_psi];
    for hc in &matrices.halves {
        let vel = &velocity[hc.element];
        for (a, w) in weights.iter_mut().enumerate() {
            for (d, wd) in w.iter_mut().enumerate() {
                *wd = hc.convection[d][0] * vel[0][a] + hc.convection[d][1] * vel[1][a];
            }
        }
        let conv = &tensors.half_convection[hc.kind.index()];
        let res = &mut out[hc.element];
        for c in 0..2 {
            for d in 0..2 {
                for a in 0..n_psi {
                    for b in 0..n_psi {
                        y[a * n_psi + b] = weights[a][d] * vel[c][b];
                    }
                }
                for k in 0..n_psi {
                    let mut acc = T::zero();
                    for (ab, yv) in y.iter().enumerate() {
                        acc += conv[d][(k, ab)] * *yv;
                    }
                    res[c][k] -= acc;
                }
            }
        }
    }
    for seg in &matrices.segments {
        let trace = |x: usize| -> Vec<Vec2<T>> {
            let v = &velocity[seg.elements[x]];
            seg.nodes[x]
                .iter()
                .map(|&k| Vec2::new(v[0][k], v[1][k]))
                .collect()
        };
        let contributions = contract_flux_terms(tensors, seg, &trace(0), &trace(1));
        for (x, contrib) in contributions.iter().enumerate() {
            let res = &mut out[seg.elements[x]];
            for (&k, c) in seg.nodes[x].iter().zip(contrib) {
                res[0][k] += c.x;
                res[1][k] += c.y;
            }
        }
    }
    out
}
