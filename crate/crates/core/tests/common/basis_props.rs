//! Property checks of the reference bases, shared by the proptest suite and
//! the acceptance runner. Each check returns the worst defect it saw.

use nssolver::basis::{
    eval_spacetime_basis, eval_square_basis, eval_temporal_basis, eval_triangle_basis,
    square_nodes, temporal_nodes, triangle_nodes, DiscretizationOrder, ElementKind, SquareBasis,
    SubTriangle,
};

use super::V2;

/// Five-point stencil step; the stencil is exact for degree <= 4, so only
/// rounding remains.
pub const FD_STEP: f64 = 1e-3;

fn stencil(f: impl Fn(f64) -> Vec<f64>) -> Vec<f64> {
    let h = FD_STEP;
    let (a, b, c, d) = (f(-2.0 * h), f(-h), f(h), f(2.0 * h));
    (0..a.len())
        .map(|k| (a[k] - 8.0 * b[k] + 8.0 * c[k] - d[k]) / (12.0 * h))
        .collect()
}

fn delta_defect(values: &[f64], k: usize) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| (v - if i == k { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

/// Map `(a, b)` in `[0,1]^2` to a point of `T_std`.
pub fn fold_into_triangle(a: f64, b: f64) -> V2 {
    if a + b <= 1.0 {
        V2::new(a, b)
    } else {
        V2::new(1.0 - b, 1.0 - a)
    }
}

pub fn triangle_delta(p: usize) -> f64 {
    let nodes = triangle_nodes::<f64>(p).unwrap();
    nodes
        .iter()
        .enumerate()
        .map(|(k, x)| delta_defect(&eval_triangle_basis(p, *x).unwrap().values, k))
        .fold(0.0, f64::max)
}

pub fn square_delta(p: usize) -> f64 {
    let nodes = square_nodes::<f64>(p).unwrap();
    let sq = SquareBasis::<f64>::new(p).unwrap();
    let mut worst = 0.0f64;
    for (k, x) in nodes.iter().enumerate() {
        for side in SubTriangle::BOTH {
            if sq.node_in(k, side) {
                worst = worst.max(delta_defect(
                    &eval_square_basis(p, *x, Some(side)).unwrap().values,
                    k,
                ));
            }
        }
    }
    worst
}

pub fn temporal_delta(pg: usize) -> f64 {
    let nodes = temporal_nodes::<f64>(pg).unwrap();
    nodes
        .iter()
        .enumerate()
        .map(|(k, t)| delta_defect(&eval_temporal_basis(pg, *t).unwrap().0, k))
        .fold(0.0, f64::max)
}

pub fn spacetime_delta(order: DiscretizationOrder) -> f64 {
    let tn = temporal_nodes::<f64>(order.p_gamma).unwrap();
    let ng = tn.len();
    let mut worst = 0.0f64;
    for (kind, nodes) in [
        (
            ElementKind::Triangle,
            triangle_nodes::<f64>(order.p).unwrap(),
        ),
        (ElementKind::Square, square_nodes::<f64>(order.p).unwrap()),
    ] {
        for (k, x) in nodes.iter().enumerate() {
            // diagonal nodes of the square carry a function per side; skip
            // those, they are covered by square_delta
            if kind == ElementKind::Square && (x.x + x.y - 1.0).abs() < 1e-12 {
                continue;
            }
            for (l, t) in tn.iter().enumerate() {
                let e = eval_spacetime_basis(order, kind, *x, *t).unwrap();
                worst = worst.max(delta_defect(&e.values, k * ng + l));
            }
        }
    }
    worst
}

/// Partition of unity (values and gradients) of all bases at a point.
pub fn partition_of_unity(order: DiscretizationOrder, a: f64, b: f64, tau: f64) -> f64 {
    let tri = eval_triangle_basis(order.p, fold_into_triangle(a, b)).unwrap();
    let sq = eval_square_basis(order.p, V2::new(a, b), None).unwrap();
    let (g, dg) = eval_temporal_basis(order.p_gamma, tau).unwrap();
    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let gsum = |v: &[V2]| v.iter().fold(V2::zeros(), |s, x| s + x).amax();
    let st = eval_spacetime_basis(order, ElementKind::Square, V2::new(a, b), tau).unwrap();
    [
        (sum(&tri.values) - 1.0).abs(),
        gsum(&tri.gradients),
        (sum(&sq.values) - 1.0).abs(),
        gsum(&sq.gradients),
        (sum(&g) - 1.0).abs(),
        sum(&dg).abs(),
        (sum(&st.values) - 1.0).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Two-sided evaluation on the diagonal point `(s, 1 - s)`.
pub fn diagonal_continuity(p: usize, s: f64) -> f64 {
    let x = V2::new(s, 1.0 - s);
    let lo = eval_square_basis(p, x, Some(SubTriangle::Lower)).unwrap();
    let hi = eval_square_basis(p, x, Some(SubTriangle::Upper)).unwrap();
    lo.values
        .iter()
        .zip(&hi.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn fd_defect(f: impl Fn(V2) -> Vec<f64>, grads: &[V2], x: V2) -> f64 {
    let mut worst = 0.0f64;
    for d in 0..2 {
        let mut e = V2::zeros();
        e[d] = 1.0;
        let fd = stencil(|s| f(x + e * s));
        for (k, g) in grads.iter().enumerate() {
            worst = worst.max((fd[k] - g[d]).abs());
        }
    }
    worst
}

/// Gradients against a five-point stencil at a point; `(a, b)` is pulled
/// away from the boundary and the diagonal so the stencil stays on one
/// polynomial piece.
pub fn gradient_vs_fd(order: DiscretizationOrder, a: f64, b: f64, tau: f64) -> f64 {
    let shrink = |t: f64| 0.05 + 0.9 * t;
    let x = fold_into_triangle(shrink(a), shrink(b));
    let x = if x.x + x.y > 0.95 {
        x * (0.95 / (x.x + x.y))
    } else {
        x
    };
    let p = order.p;
    let tri = eval_triangle_basis(p, x).unwrap();
    let mut worst = fd_defect(
        |y| eval_triangle_basis(p, y).unwrap().values,
        &tri.gradients,
        x,
    );

    let sq = SquareBasis::<f64>::new(p).unwrap();
    for half in SubTriangle::BOTH {
        let y = half.from_reference_triangle(x);
        let e = sq.eval_on(half, y);
        worst = worst.max(fd_defect(|z| sq.eval_on(half, z).values, &e.gradients, y));
    }

    let t = 0.05 + 0.9 * tau;
    let (_, dg) = eval_temporal_basis(order.p_gamma, t).unwrap();
    let fd = stencil(|s| eval_temporal_basis(order.p_gamma, t + s).unwrap().0);
    for k in 0..dg.len() {
        worst = worst.max((fd[k] - dg[k]).abs());
    }
    worst
}

/// Each half's restriction interpolated at that half's nodes reproduces the
/// function at `(a, b)`.
pub fn piecewise_polynomial(p: usize, a: f64, b: f64) -> f64 {
    let sq = SquareBasis::<f64>::new(p).unwrap();
    let r = fold_into_triangle(a, b);
    let lagrange = eval_triangle_basis(p, r).unwrap().values;
    let tri_nodes = triangle_nodes::<f64>(p).unwrap();
    let mut worst = 0.0f64;
    for half in SubTriangle::BOTH {
        let x = half.from_reference_triangle(r);
        let direct = sq.eval_on(half, x).values;
        for k in 0..sq.len() {
            let mut interp = 0.0;
            for (m, tn) in tri_nodes.iter().enumerate() {
                let node = half.from_reference_triangle(*tn);
                interp += sq.eval_on(half, node).values[k] * lagrange[m];
            }
            worst = worst.max((interp - direct[k]).abs());
        }
    }
    worst
}

/// p=1 split-square space reproduces `c0 + c1 xi + c2 eta`.
pub fn affine_reproduction(c: [f64; 3], a: f64, b: f64) -> f64 {
    let f = |x: V2| c[0] + c[1] * x.x + c[2] * x.y;
    let nodes = square_nodes::<f64>(1).unwrap();
    let x = V2::new(a, b);
    let e = eval_square_basis(1, x, None).unwrap();
    let v: f64 = nodes.iter().zip(&e.values).map(|(n, w)| f(*n) * w).sum();
    (v - f(x)).abs()
}
