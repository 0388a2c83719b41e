//! Plain-text mesh format: `nv nt`, then `nv` lines `x y`, then `nt` lines
//! `i j k` (0-based). `#` starts a comment. Edges are rebuilt on load.

use std::io::{self, BufRead, Write};

use super::{Mesh, MeshError, Orientation};

fn parse_err(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse { line, message: message.into() }
}

/// Reads a mesh. With `strict`, clockwise triangles are rejected; otherwise
/// they are reoriented with a warning.
pub fn read_mesh<R: BufRead>(reader: R, strict: bool) -> Result<Mesh, MeshError> {
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| parse_err(i + 1, e.to_string()))?;
        let body = line.split('#').next().unwrap_or("").trim().to_string();
        if !body.is_empty() {
            lines.push((i + 1, body));
        }
    }
    let mut it = lines.into_iter();
    let (hl, header) = it.next().ok_or_else(|| parse_err(0, "missing header"))?;
    let counts: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| parse_err(hl, format!("bad header: {e}")))?;
    let [nv, nt] = counts[..] else {
        return Err(parse_err(hl, "header must be `nv nt`"));
    };

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = it.next().ok_or_else(|| parse_err(0, format!("expected {nv} vertices")))?;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| parse_err(ln, e.to_string()))?;
        match v[..] {
            [x, y] if x.is_finite() && y.is_finite() => vertices.push([x, y]),
            _ => return Err(parse_err(ln, "vertex line must be two finite numbers")),
        }
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, l) = it.next().ok_or_else(|| parse_err(0, format!("expected {nt} triangles")))?;
        let t: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| parse_err(ln, e.to_string()))?;
        match t[..] {
            [a, b, c] => triangles.push([a, b, c]),
            _ => return Err(parse_err(ln, "triangle line must be three indices")),
        }
    }
    if let Some((ln, _)) = it.next() {
        return Err(parse_err(ln, "trailing data after triangles"));
    }
    let orientation = if strict { Orientation::Strict } else { Orientation::Reorient };
    Mesh::new(vertices, triangles, orientation)
}

/// Writes a mesh in the format accepted by [`read_mesh`]. Coordinates use the
/// shortest representation that round-trips exactly.
pub fn write_mesh<W: Write>(mesh: &Mesh, mut out: W) -> io::Result<()> {
    writeln!(out, "{} {}", mesh.n_vertices(), mesh.n_triangles())?;
    for v in mesh.vertices() {
        writeln!(out, "{:?} {:?}", v[0], v[1])?;
    }
    for t in mesh.triangles() {
        writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}
