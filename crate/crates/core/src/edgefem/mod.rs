//! Lowest-order edge elements: degrees of freedom, element matrices, global
//! assembly and interpolation.
//!
//! The degree of freedom of edge `e = (a, b)`, `a < b`, is the tangential
//! moment `∫_e u·t ds` with `t` pointing from vertex `a` to vertex `b`.
//! Boundary traces use the tangent `τ = (−n₂, n₁)` for the outward normal `n`,
//! which makes `∫ curl u curl ψ − ∫ curl curl u · ψ = ∫_Γ curl u (ψ·τ)`.

mod assemble;
mod element;
mod interp;

use crate::mesh::{BoundaryPart, BoundaryPartition, Mesh, MeshError};
use crate::C64;

pub use assemble::{apply_complex, assemble, AssembledForms};
pub use element::{element_matrices, ElementMatrices, TriangleGeometry};
pub use interp::{boundary_trace_terms, evaluate, interpolate, l2_hcurl_error, FieldErrors};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error("degenerate triangle (area {area:e})")]
    DegenerateTriangle { area: f64 },
    #[error("partition does not match the mesh: {0}")]
    Partition(#[from] MeshError),
    #[error("data given on edge {0}, which is not in gamma0")]
    NotGamma0(usize),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

/// Role of a degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    Interior,
    Gamma0,
    Gamma1,
    GammaI,
}

/// One degree of freedom per edge, classified by boundary part.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    kinds: Vec<DofKind>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, partition: &BoundaryPartition) -> Result<Self, FemError> {
        partition.validate(mesh)?;
        let kinds = (0..mesh.n_edges())
            .map(|e| match partition.part_of(e) {
                None => DofKind::Interior,
                Some(BoundaryPart::Gamma0) => DofKind::Gamma0,
                Some(BoundaryPart::Gamma1) => DofKind::Gamma1,
                Some(BoundaryPart::GammaI) => DofKind::GammaI,
            })
            .collect();
        Ok(Self { kinds })
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn kind(&self, e: usize) -> DofKind {
        self.kinds[e]
    }

    pub fn kinds(&self) -> &[DofKind] {
        &self.kinds
    }

    /// Edge indices whose kind satisfies `pred`, ascending.
    pub fn select(&self, pred: impl Fn(DofKind) -> bool) -> Vec<usize> {
        (0..self.kinds.len()).filter(|&e| pred(self.kinds[e])).collect()
    }

    pub fn count(&self, kind: DofKind) -> usize {
        self.kinds.iter().filter(|&&k| k == kind).count()
    }
}

/// A complex vector field with a known scalar curl.
pub trait FieldFunction: Sync {
    fn value(&self, x: [f64; 2]) -> [C64; 2];
    fn curl(&self, x: [f64; 2]) -> C64;
}

/// Field defined by a pair of closures.
pub struct FnField<V, C> {
    pub value: V,
    pub curl: C,
}

impl<V, C> FieldFunction for FnField<V, C>
where
    V: Fn([f64; 2]) -> [C64; 2] + Sync,
    C: Fn([f64; 2]) -> C64 + Sync,
{
    fn value(&self, x: [f64; 2]) -> [C64; 2] {
        (self.value)(x)
    }

    fn curl(&self, x: [f64; 2]) -> C64 {
        (self.curl)(x)
    }
}
