use super::{signed_area, BoundaryTag, MeshError, PrimaryMesh};
use crate::basis::SubTriangle;
use crate::real::{Real, Vec2};

/// One sub-triangle of a dual element: the part of the element inside a
/// single primary triangle, bounded by a primary edge and the triangle's
/// barycenter.
#[derive(Debug, Clone, PartialEq)]
pub struct Half<T> {
    pub element: usize,
    pub triangle: usize,
    /// Local index `e` of the primary edge inside `triangle`.
    pub local_edge: usize,
    pub kind: SubTriangle,
    /// Physical images of the half's reference corners, listed as
    /// `(0,0), (1,0), (0,1)` for [`SubTriangle::Lower`] and
    /// `(1,0), (1,1), (0,1)` for [`SubTriangle::Upper`].
    pub corners: [Vec2<T>; 3],
}

impl<T: Real> Half<T> {
    pub fn area(&self) -> T {
        signed_area(self.corners[0], self.corners[1], self.corners[2])
    }
}

/// Dual element attached to one primary edge (or one periodic pair of edges).
///
/// The reference square's diagonal maps onto the primary edge: `(1,0)` to its
/// first endpoint and `(0,1)` to its second, in the left triangle's
/// counterclockwise order. The lower half lies in the left triangle, the
/// upper half in the right one (or in the partner edge's triangle).
#[derive(Debug, Clone, PartialEq)]
pub struct DualElement {
    pub edge: usize,
    pub partner: Option<usize>,
    /// Half indices, `[lower, upper]`; `upper` is missing on a
    /// non-periodic boundary, where the element degenerates to one triangle.
    pub halves: [Option<usize>; 2],
}

impl DualElement {
    pub fn half_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.halves.iter().flatten().copied()
    }

    pub fn is_degenerate(&self) -> bool {
        self.halves[1].is_none()
    }
}

/// Interface between two dual elements: the segment from a triangle's
/// barycenter to one of its vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSegment<T> {
    pub triangle: usize,
    /// Local vertex `m` the segment runs to.
    pub vertex: usize,
    /// `[a, b]`: `a` is the half on local edge `m` (segment is its side
    /// towards its first vertex), `b` the half on local edge `m - 1` (side
    /// towards its second vertex). `a` lies to the left of `from -> to`.
    pub halves: [usize; 2],
    pub from: Vec2<T>,
    pub to: Vec2<T>,
}

impl<T: Real> DualSegment<T> {
    pub fn length(&self) -> T {
        (self.to - self.from).norm()
    }

    /// Unit normal pointing from half `a` into half `b`.
    pub fn normal(&self) -> Vec2<T> {
        let d = self.to - self.from;
        Vec2::new(d.y, -d.x) / d.norm()
    }
}

/// Staggered edge-based grid carrying the velocity.
#[derive(Debug, Clone)]
pub struct DualMesh<T> {
    pub periodic: bool,
    pub elements: Vec<DualElement>,
    pub halves: Vec<Half<T>>,
    /// Half index of each local edge of each primary triangle.
    pub triangle_halves: Vec<[usize; 3]>,
    pub segments: Vec<DualSegment<T>>,
}

impl<T: Real> DualMesh<T> {
    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    /// Primary triangles an element straddles, `[lower, upper]`.
    pub fn element_triangles(&self, element: usize) -> [Option<usize>; 2] {
        self.elements[element]
            .halves
            .map(|h| h.map(|h| self.halves[h].triangle))
    }

    pub fn element_area(&self, element: usize) -> T {
        self.elements[element]
            .half_indices()
            .map(|h| self.halves[h].area())
            .fold(T::zero(), |a, b| a + b)
    }

    /// Images of the reference square corners `(0,0), (1,0), (1,1), (0,1)`;
    /// `(1,1)` is missing for degenerate elements. For periodic elements the
    /// upper corner lives next to the partner edge.
    pub fn element_corners(&self, element: usize) -> [Option<Vec2<T>>; 4] {
        let [lo, hi] = self.elements[element].halves;
        let lo = &self.halves[lo.expect("every element has a lower half")];
        [
            Some(lo.corners[0]),
            Some(lo.corners[1]),
            hi.map(|h| self.halves[h].corners[1]),
            Some(lo.corners[2]),
        ]
    }

    /// Segments bounding each element, in no particular order.
    pub fn element_segments(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.elements.len()];
        for (s, seg) in self.segments.iter().enumerate() {
            for h in seg.halves {
                out[self.halves[h].element].push(s);
            }
        }
        out
    }
}

/// Build the dual grid. With `periodic`, every boundary edge must carry a
/// periodic partner and each pair shares one element; otherwise boundary
/// edges get degenerate single-triangle elements.
pub fn build_dual_grid<T: Real>(
    mesh: &PrimaryMesh<T>,
    periodic: bool,
) -> Result<DualMesh<T>, MeshError> {
    let mut elements = Vec::new();
    let mut element_of_edge = vec![usize::MAX; mesh.n_edges()];
    for e in 0..mesh.n_edges() {
        let tag = mesh.boundary_tags()[e];
        match (tag, periodic) {
            (BoundaryTag::Interior, _) | (_, false) => {
                element_of_edge[e] = elements.len();
                elements.push(DualElement {
                    edge: e,
                    partner: None,
                    halves: [None, None],
                });
            }
            (BoundaryTag::Periodic(other), true) => {
                if other > e {
                    element_of_edge[e] = elements.len();
                    element_of_edge[other] = elements.len();
                    elements.push(DualElement {
                        edge: e,
                        partner: Some(other),
                        halves: [None, None],
                    });
                }
            }
            (BoundaryTag::Boundary, true) => {
                return Err(MeshError::UnpairedBoundaryEdge { edge: e })
            }
        }
    }

    let mut halves = Vec::with_capacity(3 * mesh.n_triangles());
    let mut triangle_halves = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let verts = mesh.triangle_vertices(t);
        let c = mesh.barycenter(t);
        let mut local = [0usize; 3];
        for e in 0..3 {
            let edge_id = mesh.triangle_edges()[t][e];
            let element = element_of_edge[edge_id];
            let dual = &elements[element];
            // the element's own edge, seen from its left triangle, is the lower half
            let kind = if dual.edge == edge_id && mesh.edges()[edge_id].left == t {
                SubTriangle::Lower
            } else {
                SubTriangle::Upper
            };
            let (ve, vn) = (verts[e], verts[(e + 1) % 3]);
            let corners = match kind {
                SubTriangle::Lower => [c, ve, vn],
                SubTriangle::Upper => [vn, c, ve],
            };
            local[e] = halves.len();
            elements[element].halves[kind.index()] = Some(halves.len());
            halves.push(Half {
                element,
                triangle: t,
                local_edge: e,
                kind,
                corners,
            });
        }
        triangle_halves.push(local);
    }

    let mut segments = Vec::with_capacity(3 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let verts = mesh.triangle_vertices(t);
        let c = mesh.barycenter(t);
        for m in 0..3 {
            segments.push(DualSegment {
                triangle: t,
                vertex: m,
                halves: [triangle_halves[t][m], triangle_halves[t][(m + 2) % 3]],
                from: c,
                to: verts[m],
            });
        }
    }
    Ok(DualMesh {
        periodic,
        elements,
        halves,
        triangle_halves,
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured_mesh, Rect};

    fn unit(n: usize) -> PrimaryMesh<f64> {
        generate_structured_mesh(n, Rect::new(0.0, 1.0, 0.0, 1.0)).unwrap()
    }

    #[test]
    fn single_cell_periodic_tiles_square() {
        let dual = build_dual_grid(&unit(1), true).unwrap();
        // 5 edges, two periodic pairs collapse to one element each
        assert_eq!(dual.n_elements(), 3);
        let total: f64 = (0..3).map(|q| dual.element_area(q)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_cell_open_has_degenerate_elements() {
        let dual = build_dual_grid(&unit(1), false).unwrap();
        assert_eq!(dual.n_elements(), 5);
        assert_eq!(
            dual.elements.iter().filter(|e| e.is_degenerate()).count(),
            4
        );
        let total: f64 = (0..5).map(|q| dual.element_area(q)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interior_element_corners() {
        let mesh = unit(1);
        let dual = build_dual_grid(&mesh, false).unwrap();
        let diag = mesh.edge_between(0, 3).unwrap();
        let q = dual.elements.iter().position(|e| e.edge == diag).unwrap();
        let corners = dual.element_corners(q);
        let [a, b] = mesh.edges()[diag].vertices;
        let expect = [
            mesh.barycenter(0),
            mesh.vertices()[a],
            mesh.barycenter(1),
            mesh.vertices()[b],
        ];
        for (c, e) in corners.iter().zip(expect) {
            assert!((c.unwrap() - e).norm() < 1e-15);
        }
    }

    #[test]
    fn structured_periodic_counts() {
        let mesh = generate_structured_mesh(6, Rect::<f64>::periodic_box()).unwrap();
        let dual = build_dual_grid(&mesh, true).unwrap();
        assert_eq!(dual.n_elements(), 108);
        let tri: f64 = (0..mesh.n_triangles()).map(|t| mesh.triangle_area(t)).sum();
        let quad: f64 = (0..dual.n_elements()).map(|q| dual.element_area(q)).sum();
        assert!(((tri - quad) / tri).abs() < 1e-12);
        // every triangle in exactly three elements, every element in two triangles
        let mut count = vec![0; mesh.n_triangles()];
        for q in 0..dual.n_elements() {
            let tris = dual.element_triangles(q);
            assert!(tris.iter().all(Option::is_some));
            tris.iter().flatten().for_each(|&t| count[t] += 1);
        }
        assert!(count.iter().all(|&c| c == 3));
        // every segment shared by exactly two different elements
        for seg in &dual.segments {
            let [a, b] = seg.halves;
            assert_ne!(dual.halves[a].element, dual.halves[b].element);
        }
        assert!(dual.halves.iter().all(|h| h.area() > 0.0));
    }

    #[test]
    fn unpaired_boundary_rejected() {
        let mesh = PrimaryMesh::new(
            vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(1.0, 0.0),
                Vec2::new(0.0, 1.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(
            build_dual_grid(&mesh, true),
            Err(MeshError::UnpairedBoundaryEdge { .. })
        ));
    }

    #[test]
    fn periodic_halves_share_diagonal_up_to_translation() {
        let mesh = generate_structured_mesh(3, Rect::<f64>::periodic_box()).unwrap();
        let dual = build_dual_grid(&mesh, true).unwrap();
        for el in dual.elements.iter().filter(|e| e.partner.is_some()) {
            let lo = &dual.halves[el.halves[0].unwrap()];
            let hi = &dual.halves[el.halves[1].unwrap()];
            // lower (1,0),(0,1) = corners[1], corners[2]; upper (1,0),(0,1) = corners[0], corners[2]
            let shift_a = hi.corners[0] - lo.corners[1];
            let shift_b = hi.corners[2] - lo.corners[2];
            assert!((shift_a - shift_b).norm() < 1e-12);
            assert!(shift_a.norm() > 1.0);
        }
    }
}
