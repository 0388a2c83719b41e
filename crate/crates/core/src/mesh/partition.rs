use std::f64::consts::PI;

use super::{Mesh, MeshError};

/// Which boundary edges carry measured data.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionConfig {
    /// Outer arc with polar angle in `[0, 3π/2)`.
    G34,
    /// `count` equally spaced electrodes of the given arc length, the first
    /// starting at angle 0.
    Electrodes { count: usize, length: f64 },
    /// The whole outer boundary (rings only).
    GExt,
    /// Explicit angular intervals `[a, b)` in radians; `b < a` wraps through 0.
    Intervals(Vec<(f64, f64)>),
}

impl PartitionConfig {
    pub const GE37_COUNT: usize = 37;
    pub const GE37_LENGTH: f64 = PI / 25.0;

    pub fn ge37() -> Self {
        Self::Electrodes { count: Self::GE37_COUNT, length: Self::GE37_LENGTH }
    }
}

/// Role of a boundary edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPart {
    Gamma0,
    Gamma1,
    GammaI,
}

/// Boundary edges split into accessible (`gamma0`), inaccessible outer
/// (`gamma1`) and inner (`gammai`) parts. Each list is sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryPartition {
    pub gamma0: Vec<usize>,
    pub gamma1: Vec<usize>,
    pub gammai: Vec<usize>,
}

impl BoundaryPartition {
    pub fn part_of(&self, e: usize) -> Option<BoundaryPart> {
        if self.gamma0.binary_search(&e).is_ok() {
            Some(BoundaryPart::Gamma0)
        } else if self.gamma1.binary_search(&e).is_ok() {
            Some(BoundaryPart::Gamma1)
        } else if self.gammai.binary_search(&e).is_ok() {
            Some(BoundaryPart::GammaI)
        } else {
            None
        }
    }

    /// Inaccessible edges, `gamma1 ∪ gammai`, sorted.
    pub fn inaccessible(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.gamma1.iter().chain(&self.gammai).copied().collect();
        all.sort_unstable();
        all
    }

    /// Total length of the given edges divided by the boundary length.
    pub fn length_fraction(mesh: &Mesh, edges: &[usize]) -> f64 {
        edges.iter().map(|&e| mesh.edge_length(e)).sum::<f64>() / mesh.boundary_length()
    }

    /// Checks that the three parts are disjoint, cover the mesh boundary and
    /// that `gamma0` is nonempty.
    pub fn validate(&self, mesh: &Mesh) -> Result<(), MeshError> {
        if self.gamma0.is_empty() {
            return Err(MeshError::Partition("gamma0 is empty".into()));
        }
        let mut all: Vec<usize> = self.gamma0.iter().chain(&self.gamma1).chain(&self.gammai).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(MeshError::Partition("boundary parts overlap".into()));
        }
        if all != mesh.boundary_edges() {
            return Err(MeshError::Partition("boundary parts do not cover the mesh boundary".into()));
        }
        Ok(())
    }
}

fn angle_of(p: [f64; 2]) -> f64 {
    p[1].atan2(p[0]).rem_euclid(2.0 * PI)
}

fn mean_radius(mesh: &Mesh, edges: &[usize]) -> f64 {
    edges
        .iter()
        .map(|&e| {
            let p = mesh.edge_midpoint(e);
            p[0].hypot(p[1])
        })
        .sum::<f64>()
        / edges.len() as f64
}

/// Assigns every boundary edge by the polar angle of its midpoint. On a ring
/// the inner loop is always `gammai`.
pub fn partition_boundary(mesh: &Mesh, config: &PartitionConfig) -> Result<BoundaryPartition, MeshError> {
    let loops = mesh.boundary_loops();
    let (outer, inner): (&[usize], &[usize]) = match loops.len() {
        1 => (&loops[0], &[]),
        2 => {
            if mean_radius(mesh, &loops[0]) > mean_radius(mesh, &loops[1]) {
                (&loops[0], &loops[1])
            } else {
                (&loops[1], &loops[0])
            }
        }
        n => return Err(MeshError::Partition(format!("expected one or two boundary loops, found {n}"))),
    };
    let radius = mean_radius(mesh, outer);

    let accessible: Box<dyn Fn(f64) -> bool> = match config {
        PartitionConfig::G34 => Box::new(|theta| theta < 1.5 * PI),
        PartitionConfig::GExt => {
            if inner.is_empty() {
                return Err(MeshError::Partition("GExt requires a ring mesh".into()));
            }
            Box::new(|_| true)
        }
        &PartitionConfig::Electrodes { count, length } => {
            if count == 0 || !(length > 0.0) || !length.is_finite() {
                return Err(MeshError::Partition(format!("invalid electrodes: count {count}, length {length}")));
            }
            let width = length / radius;
            let pitch = 2.0 * PI / count as f64;
            if width > pitch {
                return Err(MeshError::Partition(format!(
                    "{count} electrodes of length {length} overlap on a boundary of radius {radius:.6}"
                )));
            }
            Box::new(move |theta| {
                let k = (theta / pitch).floor();
                theta - k * pitch < width
            })
        }
        PartitionConfig::Intervals(list) => {
            if list.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
                return Err(MeshError::Partition("interval bounds must be finite".into()));
            }
            let list: Vec<(f64, f64)> =
                list.iter().map(|&(a, b)| (a.rem_euclid(2.0 * PI), b.rem_euclid(2.0 * PI))).collect();
            Box::new(move |theta| {
                list.iter().any(|&(a, b)| if a <= b { a <= theta && theta < b } else { theta >= a || theta < b })
            })
        }
    };

    let mut gamma0 = Vec::new();
    let mut gamma1 = Vec::new();
    for &e in outer {
        if accessible(angle_of(mesh.edge_midpoint(e))) {
            gamma0.push(e);
        } else {
            gamma1.push(e);
        }
    }
    let partition = BoundaryPartition { gamma0, gamma1, gammai: inner.to_vec() };
    partition.validate(mesh)?;
    Ok(partition)
}
