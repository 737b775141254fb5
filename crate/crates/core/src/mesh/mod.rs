//! Primary triangular grid, edge-based dual grid and element geometry.
//!
//! Edges are numbered in order of first appearance while sweeping triangles
//! in order and, inside a triangle, its local edges `(v0,v1), (v1,v2),
//! (v2,v0)`. Local edge `e` of a triangle joins local vertices `e` and
//! `e + 1 (mod 3)`. An edge stores its endpoints in the counterclockwise
//! order of its left triangle, which is the triangle that created it.

mod dual;
mod generate;
mod geometry;
mod io;

pub use dual::{build_dual_grid, DualElement, DualMesh, DualSegment, Half};
pub use generate::{generate_structured_mesh, Rect};
pub use geometry::{compute_geometry, AffineMap, ElementGeometry, SegmentGeometry};
pub use io::{format_mesh, load_mesh, parse_mesh, write_mesh};

use std::collections::HashMap;

use crate::real::{Real, Vec2};

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("triangle {triangle}: vertex index {index} out of range")]
    VertexIndex { triangle: usize, index: usize },
    #[error("triangle {triangle}: non-positive area {area:e} (vertices must be counterclockwise)")]
    NonPositiveArea { triangle: usize, area: f64 },
    #[error("triangle {triangle}: edge ({a}, {b}) already has two neighbours")]
    NonManifoldEdge { triangle: usize, a: usize, b: usize },
    #[error(
        "triangle {triangle}: edge ({a}, {b}) traversed in the same direction as its neighbour"
    )]
    InconsistentOrientation { triangle: usize, a: usize, b: usize },
    #[error("periodic pair {pair}: {reason}")]
    PeriodicPair { pair: usize, reason: String },
    #[error("boundary edge {edge} has no periodic partner")]
    UnpairedBoundaryEdge { edge: usize },
    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),
    #[error("subdivision count must be at least 1")]
    NoSubdivisions,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An edge of the primary grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// Endpoints, counterclockwise with respect to `left`.
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
}

/// Boundary classification of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    Interior,
    Boundary,
    /// Boundary edge identified with the given partner edge.
    Periodic(usize),
}

/// Triangular grid carrying the pressure.
#[derive(Debug, Clone)]
pub struct PrimaryMesh<T> {
    vertices: Vec<Vec2<T>>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// Edge index of each local edge.
    triangle_edges: Vec<[usize; 3]>,
    tags: Vec<BoundaryTag>,
}

impl<T: Real> PrimaryMesh<T> {
    /// Build the edge structure and validate orientation and connectivity.
    pub fn new(vertices: Vec<Vec2<T>>, triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let mut edges: Vec<Edge> = Vec::with_capacity(triangles.len() * 3 / 2 + 4);
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for &index in tri {
                if index >= vertices.len() {
                    return Err(MeshError::VertexIndex { triangle: t, index });
                }
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area <= T::zero() {
                return Err(MeshError::NonPositiveArea {
                    triangle: t,
                    area: area.to_f64_lossy(),
                });
            }
            let mut local = [0usize; 3];
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        lookup.insert(key, edges.len());
                        local[e] = edges.len();
                        edges.push(Edge {
                            vertices: [a, b],
                            left: t,
                            right: None,
                        });
                    }
                    Some(&id) => {
                        let edge = &mut edges[id];
                        if edge.right.is_some() {
                            return Err(MeshError::NonManifoldEdge { triangle: t, a, b });
                        }
                        if edge.vertices != [b, a] {
                            return Err(MeshError::InconsistentOrientation { triangle: t, a, b });
                        }
                        edge.right = Some(t);
                        local[e] = id;
                    }
                }
            }
            triangle_edges.push(local);
        }
        let tags = edges
            .iter()
            .map(|e| {
                if e.right.is_some() {
                    BoundaryTag::Interior
                } else {
                    BoundaryTag::Boundary
                }
            })
            .collect();
        Ok(PrimaryMesh {
            vertices,
            triangles,
            edges,
            triangle_edges,
            tags,
        })
    }

    /// Identify boundary edges pairwise. Each pair must join two distinct
    /// unpaired boundary edges of equal length whose endpoints differ by a
    /// common translation (the edges run in opposite directions).
    pub fn with_periodic_pairs(mut self, pairs: &[(usize, usize)]) -> Result<Self, MeshError> {
        let scale = self.bounding_scale();
        let tol = T::lit(1e-9) * scale;
        for (pair, &(ea, eb)) in pairs.iter().enumerate() {
            let err = |reason: String| MeshError::PeriodicPair { pair, reason };
            if ea >= self.edges.len() || eb >= self.edges.len() {
                return Err(err(format!("edge index out of range ({ea}, {eb})")));
            }
            if ea == eb {
                return Err(err("edge paired with itself".into()));
            }
            for e in [ea, eb] {
                if self.tags[e] != BoundaryTag::Boundary {
                    return Err(err(format!("edge {e} is not an unpaired boundary edge")));
                }
            }
            let [a, b] = self.edges[ea].vertices;
            let [c, d] = self.edges[eb].vertices;
            let (a, b, c, d) = (
                self.vertices[a],
                self.vertices[b],
                self.vertices[c],
                self.vertices[d],
            );
            if ((b - a).norm() - (d - c).norm()).abs() > tol {
                return Err(err("edge lengths differ".into()));
            }
            // a ~ d and b ~ c under one translation
            if ((a - d) - (b - c)).norm() > tol {
                return Err(err("endpoints are not related by a translation".into()));
            }
            self.tags[ea] = BoundaryTag::Periodic(eb);
            self.tags[eb] = BoundaryTag::Periodic(ea);
        }
        Ok(self)
    }

    fn bounding_scale(&self) -> T {
        let mut lo = Vec2::new(T::max_value().unwrap(), T::max_value().unwrap());
        let mut hi = -lo;
        for v in &self.vertices {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (hi - lo).norm().max(T::one())
    }

    pub fn vertices(&self) -> &[Vec2<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangle_edges(&self) -> &[[usize; 3]] {
        &self.triangle_edges
    }

    pub fn boundary_tags(&self) -> &[BoundaryTag] {
        &self.tags
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Orientation sign of local edge `e` of triangle `t`: `+1` when `t` is the
    /// edge's left triangle, `-1` otherwise.
    pub fn edge_sign(&self, t: usize, e: usize) -> i8 {
        if self.edges[self.triangle_edges[t][e]].left == t {
            1
        } else {
            -1
        }
    }

    /// Edge joining two vertices, if any.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edges
            .iter()
            .position(|e| e.vertices == [a, b] || e.vertices == [b, a])
    }

    /// Physical corners of triangle `t`.
    pub fn triangle_vertices(&self, t: usize) -> [Vec2<T>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> T {
        let [a, b, c] = self.triangle_vertices(t);
        signed_area(a, b, c)
    }

    pub fn barycenter(&self, t: usize) -> Vec2<T> {
        let [a, b, c] = self.triangle_vertices(t);
        (a + b + c) / T::lit(3.0)
    }

    /// Periodic pairs `(a, b)` with `a < b`, in increasing order of `a`.
    pub fn periodic_pairs(&self) -> Vec<(usize, usize)> {
        self.tags
            .iter()
            .enumerate()
            .filter_map(|(e, tag)| match *tag {
                BoundaryTag::Periodic(other) if e < other => Some((e, other)),
                _ => None,
            })
            .collect()
    }

    /// Order-dependent FNV-1a hash of coordinates, connectivity and pairing.
    pub fn checksum(&self) -> u64 {
        const PRIME: u64 = 0x100000001b3;
        let mut h: u64 = 0xcbf29ce484222325;
        let mut feed = |x: u64| {
            for byte in x.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        for v in &self.vertices {
            feed(v.x.to_f64_lossy().to_bits());
            feed(v.y.to_f64_lossy().to_bits());
        }
        for t in &self.triangles {
            t.iter().for_each(|&i| feed(i as u64));
        }
        for (a, b) in self.periodic_pairs() {
            feed(a as u64);
            feed(b as u64);
        }
        h
    }
}

/// Twice-halved cross product: positive for counterclockwise `(a, b, c)`.
pub fn signed_area<T: Real>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> T {
    let u = b - a;
    let v = c - a;
    (u.x * v.y - u.y * v.x) * T::lit(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> (Vec<Vec2<f64>>, Vec<[usize; 3]>) {
        let v = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        (v, vec![[0, 1, 2], [0, 2, 3]])
    }

    #[test]
    fn two_triangle_square_has_five_edges() {
        let (v, t) = two_triangles();
        let m = PrimaryMesh::new(v, t).unwrap();
        assert_eq!(m.n_edges(), 5);
        let interior = m
            .boundary_tags()
            .iter()
            .filter(|t| **t == BoundaryTag::Interior)
            .count();
        assert_eq!(interior, 1);
        let diag = m.edge_between(0, 2).unwrap();
        assert_eq!(
            m.edges()[diag],
            Edge {
                vertices: [2, 0],
                left: 0,
                right: Some(1)
            }
        );
        assert_eq!(m.edge_sign(1, 0), -1);
    }

    #[test]
    fn clockwise_triangle_named() {
        let (v, _) = two_triangles();
        let err = PrimaryMesh::new(v, vec![[0, 1, 2], [0, 3, 2]]).unwrap_err();
        assert!(
            matches!(err, MeshError::NonPositiveArea { triangle: 1, .. }),
            "{err}"
        );
    }

    #[test]
    fn bad_vertex_index_named() {
        let (v, _) = two_triangles();
        let err = PrimaryMesh::new(v, vec![[0, 1, 7]]).unwrap_err();
        assert!(matches!(
            err,
            MeshError::VertexIndex {
                triangle: 0,
                index: 7
            }
        ));
    }

    #[test]
    fn periodic_pairing_checks() {
        let (v, t) = two_triangles();
        let m = PrimaryMesh::new(v, t).unwrap();
        let bottom = m.edge_between(0, 1).unwrap();
        let top = m.edge_between(2, 3).unwrap();
        let left = m.edge_between(3, 0).unwrap();
        let right = m.edge_between(1, 2).unwrap();
        let diag = m.edge_between(0, 2).unwrap();
        assert!(m.clone().with_periodic_pairs(&[(bottom, diag)]).is_err());
        assert!(m.clone().with_periodic_pairs(&[(bottom, bottom)]).is_err());
        let p = m
            .with_periodic_pairs(&[(bottom, top), (left, right)])
            .unwrap();
        assert_eq!(p.boundary_tags()[bottom], BoundaryTag::Periodic(top));
        assert_eq!(p.boundary_tags()[top], BoundaryTag::Periodic(bottom));
        assert_eq!(p.periodic_pairs().len(), 2);
        assert!(p.with_periodic_pairs(&[(bottom, top)]).is_err());
    }
}
