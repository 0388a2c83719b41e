//! Data completion for the 2D time-harmonic Maxwell equations by
//! quasi-reversibility, discretized with lowest-order edge elements.
//!
//! The crate is organized bottom-up:
//!
//! * [`mesh`] builds polar triangulations of discs and rings and tags the
//!   accessible / inaccessible boundary parts.
//! * [`edgefem`] assembles the Nédélec element matrices and interpolates fields.
//! * [`formulations`] turns assembled forms into the mixed systems of the
//!   classical, relaxed and relaxed-regularized methods, solved in complex form.
//! * [`linalg`] provides the real/complex sparse LU solver and a dense reference
//!   solver.
//! * [`synth`] manufactures reference fields, Cauchy data and noise.
//! * [`driver`] runs solves, parameter sweeps, L-curves and consistency checks.

pub mod driver;
pub mod edgefem;
pub mod formulations;
pub mod linalg;
pub mod mesh;
pub mod par;
pub mod synth;

pub use num_complex::Complex64 as C64;

/// Errors surfaced by the high-level API.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] mesh::MeshError),
    #[error(transparent)]
    Fem(#[from] edgefem::FemError),
    #[error(transparent)]
    Formulation(#[from] formulations::FormulationError),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Synth(#[from] synth::SynthError),
    #[error(transparent)]
    Driver(#[from] driver::DriverError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
