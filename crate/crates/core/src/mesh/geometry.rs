use super::{DualMesh, MeshError, PrimaryMesh};
use crate::basis::SubTriangle;
use crate::real::{Mat2, Real, Vec2};

/// `x = origin + jacobian * xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap<T> {
    pub origin: Vec2<T>,
    pub jacobian: Mat2<T>,
    pub inverse: Mat2<T>,
    pub det: T,
}

impl<T: Real> AffineMap<T> {
    /// Map sending `(0,0), (1,0), (0,1)` to `p0, p1, p2`. `None` when the
    /// image is degenerate.
    pub fn from_images(p0: Vec2<T>, p1: Vec2<T>, p2: Vec2<T>) -> Option<Self> {
        let jacobian = Mat2::from_columns(&[p1 - p0, p2 - p0]);
        let det = jacobian.determinant();
        let inverse = jacobian.try_inverse()?;
        Some(AffineMap {
            origin: p0,
            jacobian,
            inverse,
            det,
        })
    }

    /// Map of a dual half from its reference sub-triangle, given the half's
    /// corners in the order documented on [`super::Half`].
    pub fn for_half(kind: SubTriangle, corners: &[Vec2<T>; 3]) -> Option<Self> {
        match kind {
            SubTriangle::Lower => Self::from_images(corners[0], corners[1], corners[2]),
            SubTriangle::Upper => {
                // corners are the images of (1,0), (1,1), (0,1)
                let col_xi = corners[1] - corners[2];
                let col_eta = corners[1] - corners[0];
                let origin = corners[0] - col_xi;
                Self::from_images(origin, origin + col_xi, origin + col_eta)
            }
        }
    }

    pub fn apply(&self, xi: Vec2<T>) -> Vec2<T> {
        self.origin + self.jacobian * xi
    }

    pub fn pull_back(&self, x: Vec2<T>) -> Vec2<T> {
        self.inverse * (x - self.origin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentGeometry<T> {
    /// Unit normal from the segment's first half into its second.
    pub normal: Vec2<T>,
    pub length: T,
}

/// Affine maps and metric data for every primary and dual sub-element.
#[derive(Debug, Clone)]
pub struct ElementGeometry<T> {
    pub triangles: Vec<AffineMap<T>>,
    pub halves: Vec<AffineMap<T>>,
    /// Outward unit normal of each local edge of each triangle.
    pub outward_normals: Vec<[Vec2<T>; 3]>,
    pub local_edge_lengths: Vec<[T; 3]>,
    /// Unit normal of each primary edge, pointing out of its left triangle.
    pub edge_normals: Vec<Vec2<T>>,
    pub edge_lengths: Vec<T>,
    pub segments: Vec<SegmentGeometry<T>>,
    pub inradii: Vec<T>,
    /// Smallest inscribed-circle radius over the primary triangles.
    pub h_min: T,
}

/// Inscribed-circle radius `2 A / P` of a triangle.
pub fn inradius<T: Real>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> T {
    let area = super::signed_area(a, b, c).abs();
    let perimeter = (b - a).norm() + (c - b).norm() + (a - c).norm();
    T::lit(2.0) * area / perimeter
}

fn outward<T: Real>(a: Vec2<T>, b: Vec2<T>) -> Vec2<T> {
    let d = b - a;
    Vec2::new(d.y, -d.x) / d.norm()
}

pub fn compute_geometry<T: Real>(
    mesh: &PrimaryMesh<T>,
    dual: &DualMesh<T>,
) -> Result<ElementGeometry<T>, MeshError> {
    let nt = mesh.n_triangles();
    let mut triangles = Vec::with_capacity(nt);
    let mut outward_normals = Vec::with_capacity(nt);
    let mut local_edge_lengths = Vec::with_capacity(nt);
    let mut inradii = Vec::with_capacity(nt);
    for t in 0..nt {
        let [a, b, c] = mesh.triangle_vertices(t);
        let map = AffineMap::from_images(a, b, c)
            .filter(|m| m.det > T::zero())
            .ok_or(MeshError::NonPositiveArea {
                triangle: t,
                area: mesh.triangle_area(t).to_f64_lossy(),
            })?;
        triangles.push(map);
        let v = [a, b, c];
        outward_normals.push([0, 1, 2].map(|e| outward(v[e], v[(e + 1) % 3])));
        local_edge_lengths.push([0, 1, 2].map(|e| (v[(e + 1) % 3] - v[e]).norm()));
        inradii.push(inradius(a, b, c));
    }
    let mut halves = Vec::with_capacity(dual.halves.len());
    for h in &dual.halves {
        let map = AffineMap::for_half(h.kind, &h.corners)
            .filter(|m| m.det > T::zero())
            .ok_or(MeshError::NonPositiveArea {
                triangle: h.triangle,
                area: h.area().to_f64_lossy(),
            })?;
        halves.push(map);
    }
    let verts = mesh.vertices();
    let edge_normals = mesh
        .edges()
        .iter()
        .map(|e| outward(verts[e.vertices[0]], verts[e.vertices[1]]))
        .collect();
    let edge_lengths = mesh
        .edges()
        .iter()
        .map(|e| (verts[e.vertices[1]] - verts[e.vertices[0]]).norm())
        .collect();
    let segments = dual
        .segments
        .iter()
        .map(|s| SegmentGeometry {
            normal: s.normal(),
            length: s.length(),
        })
        .collect();
    let h_min = inradii
        .iter()
        .copied()
        .fold(T::max_value().unwrap(), |a: T, b: T| a.min(b));
    Ok(ElementGeometry {
        triangles,
        halves,
        outward_normals,
        local_edge_lengths,
        edge_normals,
        edge_lengths,
        segments,
        inradii,
        h_min,
    })
}
