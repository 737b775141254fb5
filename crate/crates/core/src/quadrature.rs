//! Gauss rules used at precompute time and by the error and projection
//! routines. The time-stepping loop never calls into this module.

use crate::real::{Real, Vec2};

/// Gauss-Legendre rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct LineRule<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

/// Rule on the reference triangle `{xi >= 0, eta >= 0, xi + eta <= 1}`.
#[derive(Clone, Debug)]
pub struct TriangleRule<T> {
    pub points: Vec<Vec2<T>>,
    pub weights: Vec<T>,
}

/// `n`-point Gauss-Legendre nodes and weights on `[-1, 1]`, computed in `f64`
/// by Newton iteration on the three-term recurrence.
fn gauss_legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "at least one Gauss point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

impl<T: Real> LineRule<T> {
    /// Rule with `n` points, exact for polynomials of degree `2n - 1`.
    pub fn with_points(n: usize) -> Self {
        let (x, w) = gauss_legendre_f64(n);
        LineRule {
            points: x.iter().map(|&xi| T::lit(0.5 * (xi + 1.0))).collect(),
            weights: w.iter().map(|&wi| T::lit(0.5 * wi)).collect(),
        }
    }

    /// Smallest rule exact for polynomials of degree `degree`.
    pub fn exact_for(degree: usize) -> Self {
        Self::with_points(degree / 2 + 1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl<T: Real> TriangleRule<T> {
    /// Collapsed (Duffy) tensor rule exact for polynomials of total degree
    /// `degree` on the reference triangle.
    pub fn exact_for(degree: usize) -> Self {
        // the collapse adds one power of (1 - u) to the integrand
        let outer = LineRule::<T>::exact_for(degree + 1);
        let inner = LineRule::<T>::exact_for(degree);
        let mut points = Vec::with_capacity(outer.len() * inner.len());
        let mut weights = Vec::with_capacity(outer.len() * inner.len());
        for (&u, &wu) in outer.points.iter().zip(&outer.weights) {
            for (&v, &wv) in inner.points.iter().zip(&inner.weights) {
                let one_minus_u = T::one() - u;
                points.push(Vec2::new(u, v * one_minus_u));
                weights.push(wu * wv * one_minus_u);
            }
        }
        TriangleRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The same rule pushed forward onto the triangle `(a, b, c)`; weights
    /// absorb the absolute Jacobian determinant.
    pub fn mapped(&self, a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> TriangleRule<T> {
        let e1 = b - a;
        let e2 = c - a;
        let det = (e1.x * e2.y - e1.y * e2.x).abs();
        TriangleRule {
            points: self
                .points
                .iter()
                .map(|q| a + e1 * q.x + e2 * q.y)
                .collect(),
            weights: self.weights.iter().map(|&w| w * det).collect(),
        }
    }
}
