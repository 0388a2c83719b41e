use std::time::Instant;

use crate::formulations::{build, QrParams};
use crate::mesh::{partition_boundary, NestedMeshes, PartitionConfig};
use crate::par::Exec;
use crate::synth::CauchyData;
use crate::C64;

use super::{compute_metrics, DriverError, Problem, QrSolution, QrSolver};

/// A ring problem together with the disc that extends it inward.
#[derive(Debug, Clone)]
pub struct ExtendedProblem {
    pub ring: Problem,
    pub disc: Problem,
    ring_to_disc: Vec<usize>,
}

impl ExtendedProblem {
    /// Builds the disc problem from `nested`, whose ring part must coincide
    /// with `ring.mesh`. The disc boundary is partitioned with `config` and
    /// must reproduce the ring's outer partition; `kappa` is the coefficient
    /// on the whole disc.
    pub fn new<K>(
        ring: Problem,
        nested: &NestedMeshes,
        config: &PartitionConfig,
        kappa: K,
        exec: Exec,
    ) -> Result<Self, DriverError>
    where
        K: Fn([f64; 2]) -> C64 + Sync + Send,
    {
        let same_vertices = ring.mesh.n_vertices() == nested.ring.n_vertices()
            && ring
                .mesh
                .vertices()
                .iter()
                .zip(nested.ring.vertices())
                .all(|(a, b)| (a[0] - b[0]).abs() <= 1e-12 && (a[1] - b[1]).abs() <= 1e-12);
        if !same_vertices || ring.mesh.edges() != nested.ring.edges() {
            return Err(DriverError::NotNested("ring mesh differs from the ring part of the disc mesh".into()));
        }
        let map = nested.ring_edge_to_disc.clone();
        let disc_partition = partition_boundary(&nested.disc, config)?;
        let mapped = |edges: &[usize]| {
            let mut v: Vec<usize> = edges.iter().map(|&e| map[e]).collect();
            v.sort_unstable();
            v
        };
        if mapped(&ring.partition.gamma0) != disc_partition.gamma0
            || mapped(&ring.partition.gamma1) != disc_partition.gamma1
        {
            return Err(DriverError::NotNested("outer boundary partitions do not match".into()));
        }
        let data = CauchyData { edges: ring.data.edges.iter().map(|&e| map[e]).collect(), ..ring.data.clone() };
        let disc = Problem::assemble(nested.disc.clone(), disc_partition, ring.forms.k, kappa, data, None, exec)?;
        Ok(Self { ring, disc, ring_to_disc: map })
    }

    /// Restricts a disc edge vector to the ring.
    pub fn restrict(&self, v: &[C64]) -> Vec<C64> {
        self.ring_to_disc.iter().map(|&e| v[e]).collect()
    }
}

/// Solves on the disc and restricts `E` and `F` to the ring, where the
/// metrics are evaluated.
pub fn extension_restriction(problem: &ExtendedProblem, params: &QrParams) -> Result<QrSolution, DriverError> {
    let start = Instant::now();
    let system = build(&problem.disc.forms, &problem.disc.data, params)?;
    let (e_disc, f_disc) = system.solve()?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let (e, f) = (problem.restrict(&e_disc), problem.restrict(&f_disc));
    let metrics = compute_metrics(&problem.ring.forms, &e, &f, problem.ring.reference.as_deref());
    Ok(QrSolution { e, f, params: *params, metrics, wall_ms })
}

impl QrSolver for ExtendedProblem {
    fn solve(&self, params: &QrParams) -> Result<QrSolution, DriverError> {
        extension_restriction(self, params)
    }
}
