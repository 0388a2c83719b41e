//! Triangular meshes of discs and rings with globally oriented edges.
//!
//! Edges are stored as vertex pairs `(a, b)` with `a < b`; that orientation
//! fixes the sign of every tangential degree of freedom in the crate. Local
//! edge `j` of a triangle is the edge opposite its local vertex `j`, traversed
//! from local vertex `j + 1` to `j + 2` (mod 3).

mod generate;
mod io;
mod partition;

use std::collections::HashMap;

pub use generate::{generate_disc, generate_nested, generate_ring, NestedMeshes, SPACING_RATIO};
pub use io::{read_mesh, write_mesh};
pub use partition::{partition_boundary, BoundaryPart, BoundaryPartition, PartitionConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("invalid mesh parameter: {0}")]
    InvalidParameter(String),
    #[error("mesh has no triangles")]
    Empty,
    #[error("triangle {triangle} references vertex {index} (only {n_vertices} vertices)")]
    IndexOutOfRange { triangle: usize, index: usize, n_vertices: usize },
    #[error("triangle {0} is degenerate")]
    Degenerate(usize),
    #[error("triangle {0} is oriented clockwise")]
    Inverted(usize),
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifold(usize, usize),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid partition: {0}")]
    Partition(String),
}

/// What to do with clockwise triangles when building a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Reject clockwise triangles.
    Strict,
    /// Swap two vertices of clockwise triangles and log a warning.
    Reorient,
}

/// A 2D conforming triangulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[usize; 3]>,
    tri_signs: Vec<[f64; 3]>,
    /// first and (for interior edges) second adjacent triangle
    edge_tris: Vec<[usize; 2]>,
    boundary_edges: Vec<usize>,
    boundary_normals: Vec<[f64; 2]>,
    boundary_slot: HashMap<usize, usize>,
    boundary_loops: Vec<Vec<usize>>,
}

const NONE: usize = usize::MAX;

pub(crate) fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
}

impl Mesh {
    /// Validates the raw arrays and rebuilds the edge structure.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        mut triangles: Vec<[usize; 3]>,
        orientation: Orientation,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        let mut reoriented = 0usize;
        for (t, tri) in triangles.iter_mut().enumerate() {
            for &v in tri.iter() {
                if v >= nv {
                    return Err(MeshError::IndexOutOfRange { triangle: t, index: v, n_vertices: nv });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::Degenerate(t));
            }
            let area = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area == 0.0 || !area.is_finite() {
                return Err(MeshError::Degenerate(t));
            }
            if area < 0.0 {
                match orientation {
                    Orientation::Strict => return Err(MeshError::Inverted(t)),
                    Orientation::Reorient => {
                        tri.swap(1, 2);
                        reoriented += 1;
                    }
                }
            }
        }
        if reoriented > 0 {
            log::warn!("reoriented {reoriented} clockwise triangle(s)");
        }

        let mut half: Vec<([usize; 2], usize, usize)> = Vec::with_capacity(3 * triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            for j in 0..3 {
                let a = tri[(j + 1) % 3];
                let b = tri[(j + 2) % 3];
                half.push(([a.min(b), a.max(b)], t, j));
            }
        }
        half.sort_unstable();

        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut edge_tris: Vec<[usize; 2]> = Vec::new();
        let mut tri_edges = vec![[0usize; 3]; triangles.len()];
        let mut tri_signs = vec![[0.0f64; 3]; triangles.len()];
        for (key, t, j) in half {
            if edges.last() != Some(&key) {
                edges.push(key);
                edge_tris.push([t, NONE]);
            } else {
                let slot = edge_tris.last_mut().unwrap();
                if slot[1] != NONE {
                    return Err(MeshError::NonManifold(key[0], key[1]));
                }
                slot[1] = t;
            }
            let e = edges.len() - 1;
            tri_edges[t][j] = e;
            let from = triangles[t][(j + 1) % 3];
            tri_signs[t][j] = if from == key[0] { 1.0 } else { -1.0 };
        }

        let mut boundary_edges = Vec::new();
        let mut boundary_normals = Vec::new();
        let mut boundary_slot = HashMap::new();
        for (e, et) in edge_tris.iter().enumerate() {
            if et[1] == NONE {
                let t = et[0];
                let j = (0..3).find(|&j| tri_edges[t][j] == e).unwrap();
                // CCW triangle: outward normal is the directed local edge rotated clockwise
                let p = vertices[triangles[t][(j + 1) % 3]];
                let q = vertices[triangles[t][(j + 2) % 3]];
                let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                let len = dx.hypot(dy);
                boundary_slot.insert(e, boundary_edges.len());
                boundary_edges.push(e);
                boundary_normals.push([dy / len, -dx / len]);
            }
        }
        let boundary_loops = find_loops(&edges, &boundary_edges);

        Ok(Self {
            vertices,
            triangles,
            edges,
            tri_edges,
            tri_signs,
            edge_tris,
            boundary_edges,
            boundary_normals,
            boundary_slot,
            boundary_loops,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
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

    /// Global edge indices of the three local edges of triangle `t`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    /// `+1` where the local edge direction agrees with the global one.
    pub fn triangle_signs(&self, t: usize) -> [f64; 3] {
        self.tri_signs[t]
    }

    pub fn triangle_points(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [p, q, r] = self.triangle_points(t);
        signed_area(p, q, r)
    }

    /// Triangles adjacent to edge `e` (second entry `None` on the boundary).
    pub fn edge_triangles(&self, e: usize) -> (usize, Option<usize>) {
        let [a, b] = self.edge_tris[e];
        (a, (b != NONE).then_some(b))
    }

    pub fn edge_points(&self, e: usize) -> ([f64; 2], [f64; 2]) {
        let [a, b] = self.edges[e];
        (self.vertices[a], self.vertices[b])
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let (p, q) = self.edge_points(e);
        (q[0] - p[0]).hypot(q[1] - p[1])
    }

    pub fn edge_midpoint(&self, e: usize) -> [f64; 2] {
        let (p, q) = self.edge_points(e);
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
    }

    /// Mesh parameter: largest triangle diameter.
    pub fn h(&self) -> f64 {
        self.tri_edges.iter().flat_map(|es| es.iter().map(|&e| self.edge_length(e))).fold(0.0, f64::max)
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary_slot.contains_key(&e)
    }

    /// Outward unit normal of boundary edge `e`.
    pub fn boundary_normal(&self, e: usize) -> Option<[f64; 2]> {
        self.boundary_slot.get(&e).map(|&k| self.boundary_normals[k])
    }

    /// Boundary tangent `(-n2, n1)`: the outer boundary is traversed
    /// counter-clockwise, holes clockwise.
    pub fn boundary_tangent(&self, e: usize) -> Option<[f64; 2]> {
        self.boundary_normal(e).map(|n| [-n[1], n[0]])
    }

    /// `+1` if the global edge direction follows the boundary tangent.
    pub fn boundary_sign(&self, e: usize) -> Option<f64> {
        let t = self.boundary_tangent(e)?;
        let (p, q) = self.edge_points(e);
        let d = (q[0] - p[0]) * t[0] + (q[1] - p[1]) * t[1];
        Some(if d > 0.0 { 1.0 } else { -1.0 })
    }

    /// Connected components of the boundary, as lists of edge indices.
    pub fn boundary_loops(&self) -> &[Vec<usize>] {
        &self.boundary_loops
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_edges.iter().map(|&e| self.edge_length(e)).sum()
    }

    /// `V - E + T`: 1 for a disc, 0 for an annulus.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_triangles() as i64
    }

    /// Every boundary vertex has exactly two boundary edges.
    pub fn boundary_is_closed(&self) -> bool {
        let mut deg: HashMap<usize, usize> = HashMap::new();
        for &e in &self.boundary_edges {
            for v in self.edges[e] {
                *deg.entry(v).or_default() += 1;
            }
        }
        deg.values().all(|&d| d == 2)
    }

    /// Index of the edge joining `a` and `b`, if any.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        let key = [a.min(b), a.max(b)];
        self.edges.binary_search(&key).ok()
    }
}

fn find_loops(edges: &[[usize; 2]], boundary: &[usize]) -> Vec<Vec<usize>> {
    let mut by_vertex: HashMap<usize, Vec<usize>> = HashMap::new();
    for &e in boundary {
        for v in edges[e] {
            by_vertex.entry(v).or_default().push(e);
        }
    }
    let mut seen: HashMap<usize, bool> = boundary.iter().map(|&e| (e, false)).collect();
    let mut loops = Vec::new();
    for &start in boundary {
        if seen[&start] {
            continue;
        }
        let mut component = Vec::new();
        let mut stack = vec![start];
        seen.insert(start, true);
        while let Some(e) = stack.pop() {
            component.push(e);
            for v in edges[e] {
                for &f in &by_vertex[&v] {
                    if !seen[&f] {
                        seen.insert(f, true);
                        stack.push(f);
                    }
                }
            }
        }
        component.sort_unstable();
        loops.push(component);
    }
    loops
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Mesh {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        Mesh::new(v, vec![[0, 1, 2], [0, 2, 3]], Orientation::Strict).unwrap()
    }

    #[test]
    fn square_topology() {
        let m = square();
        assert_eq!(m.n_edges(), 5);
        assert_eq!(m.boundary_edges().len(), 4);
        assert_eq!(m.boundary_loops().len(), 1);
        assert_eq!(m.euler_characteristic(), 1);
        assert!(m.edges().iter().all(|e| e[0] < e[1]));
        let diag = m.find_edge(0, 2).unwrap();
        assert!(!m.is_boundary_edge(diag));
        assert!(m.edge_triangles(diag).1.is_some());
    }

    #[test]
    fn outward_normals_and_tangents() {
        let m = square();
        let bottom = m.find_edge(0, 1).unwrap();
        assert_eq!(m.boundary_normal(bottom).unwrap(), [0.0, -1.0]);
        assert_eq!(m.boundary_tangent(bottom).unwrap(), [1.0, 0.0]);
        assert_eq!(m.boundary_sign(bottom), Some(1.0));
        let left = m.find_edge(0, 3).unwrap();
        // (0,3) points up, the counter-clockwise tangent on the left side points down
        assert_eq!(m.boundary_sign(left), Some(-1.0));
    }

    #[test]
    fn signs_match_local_direction() {
        let m = square();
        for t in 0..m.n_triangles() {
            let tri = m.triangles()[t];
            for j in 0..3 {
                let e = m.triangle_edges(t)[j];
                let from = tri[(j + 1) % 3];
                let expect = if m.edges()[e][0] == from { 1.0 } else { -1.0 };
                assert_eq!(m.triangle_signs(t)[j], expect);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(matches!(
            Mesh::new(v.clone(), vec![[0, 1, 5]], Orientation::Strict),
            Err(MeshError::IndexOutOfRange { index: 5, .. })
        ));
        assert!(matches!(Mesh::new(v.clone(), vec![[0, 2, 1]], Orientation::Strict), Err(MeshError::Inverted(0))));
        let m = Mesh::new(v.clone(), vec![[0, 2, 1]], Orientation::Reorient).unwrap();
        assert!(m.triangle_area(0) > 0.0);
        let collinear = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(Mesh::new(collinear, vec![[0, 1, 2]], Orientation::Strict), Err(MeshError::Degenerate(0))));
    }

    #[test]
    fn non_manifold_edge_rejected() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 2.0]];
        let t = vec![[0, 1, 2], [0, 3, 1], [1, 0, 4]];
        let r = Mesh::new(v, t, Orientation::Reorient);
        assert!(matches!(r, Err(MeshError::NonManifold(0, 1))));
    }
}
