//! ASCII mesh format:
//!
//! ```text
//! NV NT NPERIODIC
//! x y            (NV lines)
//! i j k          (NT lines, 0-based, counterclockwise)
//! edgeA edgeB    (NPERIODIC lines)
//! ```
//!
//! Tokens are whitespace separated and `#` starts a comment running to the
//! end of the line. Edge indices follow the numbering documented in
//! [`crate::mesh`].

use std::fmt::Write as _;
use std::path::Path;

use super::{MeshError, PrimaryMesh};
use crate::real::{Real, Vec2};

pub fn load_mesh<T: Real>(path: impl AsRef<Path>) -> Result<PrimaryMesh<T>, MeshError> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text)
}

/// Parse and validate a mesh from its textual form.
pub fn parse_mesh<T: Real>(text: &str) -> Result<PrimaryMesh<T>, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let mut record = |expected: usize, what: &str| -> Result<(usize, Vec<String>), MeshError> {
        let (line, content) = lines.next().ok_or(MeshError::Parse {
            line: text.lines().count(),
            msg: format!("unexpected end of file, expected {what}"),
        })?;
        let tokens: Vec<String> = content.split_whitespace().map(str::to_owned).collect();
        if tokens.len() != expected {
            return Err(MeshError::Parse {
                line,
                msg: format!(
                    "expected {expected} values for {what}, found {}",
                    tokens.len()
                ),
            });
        }
        Ok((line, tokens))
    };
    fn int(line: usize, tok: &str) -> Result<usize, MeshError> {
        tok.parse().map_err(|_| MeshError::Parse {
            line,
            msg: format!("invalid index '{tok}'"),
        })
    }
    fn real<T: Real>(line: usize, tok: &str) -> Result<T, MeshError> {
        let x: f64 = tok.parse().map_err(|_| MeshError::Parse {
            line,
            msg: format!("invalid number '{tok}'"),
        })?;
        Ok(T::lit(x))
    }

    let (line, header) = record(3, "header NV NT NPERIODIC")?;
    let nv = int(line, &header[0])?;
    let nt = int(line, &header[1])?;
    let np = int(line, &header[2])?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, tok) = record(2, "vertex")?;
        vertices.push(Vec2::new(real(line, &tok[0])?, real(line, &tok[1])?));
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, tok) = record(3, "triangle")?;
        triangles.push([
            int(line, &tok[0])?,
            int(line, &tok[1])?,
            int(line, &tok[2])?,
        ]);
    }
    let mut pairs = Vec::with_capacity(np);
    for _ in 0..np {
        let (line, tok) = record(2, "periodic pair")?;
        pairs.push((int(line, &tok[0])?, int(line, &tok[1])?));
    }
    if let Some((line, _)) = lines.next() {
        return Err(MeshError::Parse {
            line,
            msg: "trailing data after mesh records".into(),
        });
    }
    PrimaryMesh::new(vertices, triangles)?.with_periodic_pairs(&pairs)
}

/// Textual form read back by [`parse_mesh`]. Coordinates use shortest
/// round-trip formatting.
pub fn format_mesh<T: Real>(mesh: &PrimaryMesh<T>) -> String {
    let pairs = mesh.periodic_pairs();
    let mut out = String::new();
    let _ = writeln!(out, "# NV NT NPERIODIC");
    let _ = writeln!(
        out,
        "{} {} {}",
        mesh.n_vertices(),
        mesh.n_triangles(),
        pairs.len()
    );
    for v in mesh.vertices() {
        let _ = writeln!(out, "{:?} {:?}", v.x.to_f64_lossy(), v.y.to_f64_lossy());
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    for (a, b) in pairs {
        let _ = writeln!(out, "{a} {b}");
    }
    out
}

pub fn write_mesh<T: Real>(mesh: &PrimaryMesh<T>, path: impl AsRef<Path>) -> Result<(), MeshError> {
    std::fs::write(path, format_mesh(mesh))?;
    Ok(())
}
