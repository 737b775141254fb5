use super::{MeshError, PrimaryMesh};
use crate::real::{Real, Vec2};

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect<T> {
    pub x0: T,
    pub x1: T,
    pub y0: T,
    pub y1: T,
}

impl<T: Real> Rect<T> {
    pub fn new(x0: T, x1: T, y0: T, y1: T) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    /// `[-pi, pi]^2`.
    pub fn periodic_box() -> Self {
        let pi = T::pi();
        Rect::new(-pi, pi, -pi, pi)
    }

    pub fn area(&self) -> T {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

/// `n x n` cells, each split along its lower-left to upper-right diagonal,
/// giving `2 n^2` counterclockwise triangles. Opposite boundary edges are
/// recorded as periodic pairs; whether they are used is decided when the
/// dual grid is built.
pub fn generate_structured_mesh<T: Real>(
    n: usize,
    domain: Rect<T>,
) -> Result<PrimaryMesh<T>, MeshError> {
    if n == 0 {
        return Err(MeshError::NoSubdivisions);
    }
    if !(domain.x1 > domain.x0) || !(domain.y1 > domain.y0) {
        return Err(MeshError::DegenerateDomain(format!(
            "[{}, {}] x [{}, {}]",
            domain.x0, domain.x1, domain.y0, domain.y1
        )));
    }
    let nf = T::from_usize_lossy(n);
    let hx = (domain.x1 - domain.x0) / nf;
    let hy = (domain.y1 - domain.y0) / nf;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            // pin the far sides exactly so periodic translations are exact
            let x = if i == n {
                domain.x1
            } else {
                domain.x0 + hx * T::from_usize_lossy(i)
            };
            let y = if j == n {
                domain.y1
            } else {
                domain.y0 + hy * T::from_usize_lossy(j)
            };
            vertices.push(Vec2::new(x, y));
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let mesh = PrimaryMesh::new(vertices, triangles)?;
    let edge = |a: usize, b: usize| mesh.edge_between(a, b).expect("structured boundary edge");
    let mut pairs = Vec::with_capacity(2 * n);
    for i in 0..n {
        pairs.push((edge(id(i, 0), id(i + 1, 0)), edge(id(i, n), id(i + 1, n))));
    }
    for j in 0..n {
        pairs.push((edge(id(0, j), id(0, j + 1)), edge(id(n, j), id(n, j + 1))));
    }
    mesh.with_periodic_pairs(&pairs)
}
