use std::fmt::Write as _;
use std::path::Path;

use crate::real::Real;
use crate::solver::{Discretization, SpaceTimeState};

/// Legacy ASCII VTK of the end-of-slab fields on the primary mesh.
///
/// Cell data `pressure` is the mean of the triangle's pressure at its three
/// vertices; point data `velocity` averages the dual representation over
/// every half touching the vertex.
pub fn format_vtk<T: Real>(
    disc: &Discretization<T>,
    state: &SpaceTimeState<T>,
    title: &str,
) -> String {
    let mesh = &disc.mesh;
    let (n_psi, n_phi) = (disc.order.n_psi(), disc.order.n_phi());
    let v = state.end_velocity();
    let p = state.end_pressure();

    let mut vel = vec![(0.0f64, 0.0f64, 0usize); mesh.n_vertices()];
    for (h, half) in disc.dual.halves.iter().enumerate() {
        let tri = mesh.triangles()[half.triangle];
        let e = half.local_edge;
        for &gv in &[tri[e], tri[(e + 1) % 3]] {
            let xi = disc.geom.halves[h].pull_back(mesh.vertices()[gv]);
            let psi = disc.basis.square.eval_on(half.kind, xi).values;
            let q = half.element;
            let (mut u, mut w) = (T::zero(), T::zero());
            for k in 0..n_psi {
                u += psi[k] * v[0][q * n_psi + k];
                w += psi[k] * v[1][q * n_psi + k];
            }
            let slot = &mut vel[gv];
            slot.0 += u.to_f64_lossy();
            slot.1 += w.to_f64_lossy();
            slot.2 += 1;
        }
    }

    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.lines().next().unwrap_or(""));
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.n_vertices());
    for x in mesh.vertices() {
        let _ = writeln!(s, "{:e} {:e} 0", x.x.to_f64_lossy(), x.y.to_f64_lossy());
    }
    let nt = mesh.n_triangles();
    let _ = writeln!(s, "CELLS {} {}", nt, 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        let _ = writeln!(s, "5");
    }
    let _ = writeln!(
        s,
        "CELL_DATA {nt}\nSCALARS pressure double 1\nLOOKUP_TABLE default"
    );
    let corners = [
        crate::real::Vec2::new(T::zero(), T::zero()),
        crate::real::Vec2::new(T::one(), T::zero()),
        crate::real::Vec2::new(T::zero(), T::one()),
    ];
    for t in 0..nt {
        let mut mean = 0.0;
        for c in corners {
            let phi = disc.basis.triangle.values_unchecked(c);
            mean += (0..n_phi)
                .fold(T::zero(), |a, k| a + phi[k] * p[t * n_phi + k])
                .to_f64_lossy();
        }
        let _ = writeln!(s, "{:e}", mean / 3.0);
    }
    let _ = writeln!(
        s,
        "POINT_DATA {}\nVECTORS velocity double",
        mesh.n_vertices()
    );
    for (u, w, n) in vel {
        let n = n.max(1) as f64;
        let _ = writeln!(s, "{:e} {:e} 0", u / n, w / n);
    }
    s
}

pub fn write_vtk<T: Real>(
    disc: &Discretization<T>,
    state: &SpaceTimeState<T>,
    path: impl AsRef<Path>,
) -> std::io::Result<()> {
    let title = format!("nssolver t = {}", state.t_end);
    std::fs::write(path, format_vtk(disc, state, &title))
}
