//! Structured polar triangulations: concentric vertex rings stitched together
//! by an angular merge, with a fan around the centre of a disc.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::{signed_area, Mesh, MeshError, Orientation};

/// Ratio between the requested `h_target` and the radial grid spacing. The
/// stitched triangles have a diameter of roughly this multiple of the spacing.
pub const SPACING_RATIO: f64 = 1.76;

/// A disc mesh that contains a ring mesh as its first triangles.
#[derive(Debug, Clone)]
pub struct NestedMeshes {
    pub disc: Mesh,
    pub ring: Mesh,
    /// Disc edge index of every ring edge.
    pub ring_edge_to_disc: Vec<usize>,
}

struct Builder {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
}

impl Builder {
    fn new() -> Self {
        Self { vertices: Vec::new(), triangles: Vec::new() }
    }

    fn circle(&mut self, radius: f64, count: usize) -> Vec<usize> {
        (0..count)
            .map(|i| {
                let theta = 2.0 * PI * i as f64 / count as f64;
                self.vertices.push([radius * theta.cos(), radius * theta.sin()]);
                self.vertices.len() - 1
            })
            .collect()
    }

    fn point(&mut self, p: [f64; 2]) -> usize {
        self.vertices.push(p);
        self.vertices.len() - 1
    }

    fn tri(&mut self, a: usize, b: usize, c: usize) {
        let area = signed_area(self.vertices[a], self.vertices[b], self.vertices[c]);
        if area > 0.0 {
            self.triangles.push([a, b, c]);
        } else {
            self.triangles.push([a, c, b]);
        }
    }

    /// Triangulates the band between two circles of vertices.
    fn stitch(&mut self, inner: &[usize], outer: &[usize]) {
        let (na, nb) = (inner.len(), outer.len());
        let (mut i, mut j) = (0, 0);
        while i < na || j < nb {
            let next_a = (i + 1) as f64 / na as f64;
            let next_b = (j + 1) as f64 / nb as f64;
            if j == nb || (i < na && next_a <= next_b) {
                self.tri(inner[i], inner[(i + 1) % na], outer[j % nb]);
                i += 1;
            } else {
                self.tri(inner[i % na], outer[(j + 1) % nb], outer[j]);
                j += 1;
            }
        }
    }

    fn fan(&mut self, centre: usize, ring: &[usize]) {
        let n = ring.len();
        for j in 0..n {
            self.tri(centre, ring[j], ring[(j + 1) % n]);
        }
    }

    fn finish(self) -> Result<Mesh, MeshError> {
        Mesh::new(self.vertices, self.triangles, Orientation::Strict)
    }
}

fn circle_count(radius: f64, spacing: f64) -> usize {
    ((2.0 * PI * radius / spacing).round() as usize).max(6)
}

fn check_positive(name: &str, value: f64) -> Result<(), MeshError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(MeshError::InvalidParameter(format!("{name} must be positive and finite, got {value}")))
    }
}

/// Adds concentric circles from `radius` inwards to the centre, attached to
/// the already created `boundary` circle.
fn fill_disc(b: &mut Builder, boundary: &[usize], radius: f64, spacing: f64) {
    let layers = ((radius / spacing).ceil() as usize).max(1);
    let dr = radius / layers as f64;
    let mut outer = boundary.to_vec();
    for j in (1..layers).rev() {
        let r = dr * j as f64;
        let inner = b.circle(r, circle_count(r, dr));
        b.stitch(&inner, &outer);
        outer = inner;
    }
    let centre = b.point([0.0, 0.0]);
    b.fan(centre, &outer);
}

/// Builds the ring band; returns the inner circle's vertex ids.
fn fill_ring(b: &mut Builder, r_inner: f64, r_outer: f64, spacing: f64) -> Vec<usize> {
    let layers = (((r_outer - r_inner) / spacing).ceil() as usize).max(1);
    let dr = (r_outer - r_inner) / layers as f64;
    let mut outer = b.circle(r_outer, circle_count(r_outer, dr));
    for j in (0..layers).rev() {
        let r = r_inner + dr * j as f64;
        let inner = b.circle(r, circle_count(r, dr));
        b.stitch(&inner, &outer);
        outer = inner;
    }
    outer
}

/// Polar triangulation of the disc of the given radius centred at the origin.
pub fn generate_disc(radius: f64, h_target: f64) -> Result<Mesh, MeshError> {
    check_positive("radius", radius)?;
    check_positive("h_target", h_target)?;
    if h_target >= radius {
        return Err(MeshError::InvalidParameter(format!("h_target {h_target} must be below the radius {radius}")));
    }
    let spacing = h_target / SPACING_RATIO;
    let layers = ((radius / spacing).ceil() as usize).max(1);
    let dr = radius / layers as f64;
    let mut b = Builder::new();
    let boundary = b.circle(radius, circle_count(radius, dr));
    fill_disc(&mut b, &boundary, radius, spacing);
    b.finish()
}

/// Polar triangulation of the annulus `r_inner < |x| < r_outer`.
pub fn generate_ring(r_inner: f64, r_outer: f64, h_target: f64) -> Result<Mesh, MeshError> {
    check_ring(r_inner, r_outer, h_target)?;
    let mut b = Builder::new();
    fill_ring(&mut b, r_inner, r_outer, h_target / SPACING_RATIO);
    b.finish()
}

fn check_ring(r_inner: f64, r_outer: f64, h_target: f64) -> Result<(), MeshError> {
    check_positive("r_inner", r_inner)?;
    check_positive("r_outer", r_outer)?;
    check_positive("h_target", h_target)?;
    if r_inner >= r_outer {
        return Err(MeshError::InvalidParameter(format!("r_inner {r_inner} must be below r_outer {r_outer}")));
    }
    Ok(())
}

/// A ring mesh and a disc mesh whose first triangles are exactly the ring's,
/// so ring fields are restrictions of disc fields without interpolation.
pub fn generate_nested(r_inner: f64, r_outer: f64, h_target: f64) -> Result<NestedMeshes, MeshError> {
    check_ring(r_inner, r_outer, h_target)?;
    let spacing = h_target / SPACING_RATIO;
    let mut b = Builder::new();
    let interface = fill_ring(&mut b, r_inner, r_outer, spacing);
    let ring = Mesh::new(b.vertices.clone(), b.triangles.clone(), Orientation::Strict)?;
    fill_disc(&mut b, &interface, r_inner, spacing);
    let disc = b.finish()?;

    let lookup: HashMap<[usize; 2], usize> = disc.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let ring_edge_to_disc = ring.edges().iter().map(|e| lookup[e]).collect();
    Ok(NestedMeshes { disc, ring, ring_edge_to_disc })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn within(actual: usize, target: f64, frac: f64) -> bool {
        (actual as f64 - target).abs() <= frac * target
    }

    #[test]
    fn coarse_disc_is_valid() {
        let m = generate_disc(1.0, 0.5).unwrap();
        assert!(m.n_triangles() >= 8);
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.boundary_loops().len(), 1);
        assert!(m.boundary_is_closed());
        assert!((0..m.n_triangles()).all(|t| m.triangle_area(t) > 0.0));
        assert!(m.h() < 1.0 && m.h() > 0.25);
    }

    #[test]
    fn disc_euler_and_h() {
        let m = generate_disc(1.0, 0.1).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        assert!(m.h() <= 0.2 && m.h() >= 0.05, "h = {}", m.h());
        let perimeter = m.boundary_length();
        assert!((perimeter - 2.0 * PI).abs() < 0.01);
    }

    #[test]
    fn disc_counts_match_reference_scale() {
        let m = generate_disc(1.0, 2.26e-2).unwrap();
        assert!(within(m.n_triangles(), 43256.0, 0.2), "{}", m.n_triangles());
        assert!(within(m.n_edges(), 65134.0, 0.2), "{}", m.n_edges());
    }

    #[test]
    fn ring_counts_match_reference_scale() {
        let m = generate_ring(0.75, 1.0, 2.05e-2).unwrap();
        assert!(within(m.n_triangles(), 17919.0, 0.2), "{}", m.n_triangles());
        assert!(within(m.n_edges(), 27316.0, 0.2), "{}", m.n_edges());
    }

    #[test]
    fn ring_topology() {
        let m = generate_ring(0.5, 1.0, 0.4).unwrap();
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.boundary_loops().len(), 2);
        for &e in m.boundary_edges() {
            let p = m.edge_midpoint(e);
            let n = m.boundary_normal(e).unwrap();
            let radial = (p[0] * n[0] + p[1] * n[1]) / p[0].hypot(p[1]);
            if p[0].hypot(p[1]) > 0.75 {
                assert!(radial > 0.9);
            } else {
                assert!(radial < -0.9);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_disc(0.0, 0.1).is_err());
        assert!(generate_disc(1.0, -0.1).is_err());
        assert!(generate_disc(1.0, 1.5).is_err());
        assert!(generate_ring(1.0, 1.0, 0.1).is_err());
        assert!(generate_ring(1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn nested_meshes_share_the_ring() {
        let n = generate_nested(0.75, 1.0, 0.1).unwrap();
        assert_eq!(n.disc.euler_characteristic(), 1);
        assert_eq!(n.ring.euler_characteristic(), 0);
        assert_eq!(&n.disc.triangles()[..n.ring.n_triangles()], n.ring.triangles());
        for (e, &d) in n.ring_edge_to_disc.iter().enumerate() {
            assert_eq!(n.ring.edges()[e], n.disc.edges()[d]);
        }
        let standalone = generate_ring(0.75, 1.0, 0.1).unwrap();
        assert_eq!(standalone, n.ring);
    }
}
