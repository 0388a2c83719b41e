//! Experiment orchestration: single solves with error metrics, δ-sweeps,
//! automatic η, extension/restriction, L-curve corners and the Tikhonov
//! stationarity check.

mod eta;
mod extension;
pub mod invariants;
mod lcurve;
mod sweep;
mod tikhonov;

use std::time::Instant;

use crate::edgefem::{assemble, AssembledForms, FemError};
use crate::formulations::{build, FormulationError, QrParams};
use crate::linalg::{LinalgError, SparseMatrix};
use crate::mesh::{BoundaryPartition, Mesh, MeshError};
use crate::par::Exec;
use crate::synth::{CauchyData, SynthError};
use crate::C64;

pub use eta::auto_eta;
pub use extension::{extension_restriction, ExtendedProblem};
pub use lcurve::{l_curve, LCurve, MIN_LCURVE_POINTS};
pub use sweep::{delta_grid, sweep_delta, SweepPoint, SweepRecord, CSV_HEADER, DEFAULT_GRID};
pub use tikhonov::{tikhonov_gradient_check, TikhonovCheck, TikhonovFunctional};

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("invalid delta grid: {0}")]
    InvalidGrid(String),
    #[error("automatic eta is undefined: {0}")]
    AutoEta(&'static str),
    #[error("meshes are not nested: {0}")]
    NotNested(String),
    #[error("L-curve needs at least {min} usable points, got {found}")]
    TooFewPoints { found: usize, min: usize },
    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch { what: &'static str, expected: usize, found: usize },
}

/// Everything needed to run a method on one mesh: geometry, assembled forms,
/// Cauchy data and an optional reference solution (as edge moments) used for
/// error metrics.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: Mesh,
    pub partition: BoundaryPartition,
    pub forms: AssembledForms,
    pub data: CauchyData,
    pub reference: Option<Vec<C64>>,
}

impl Problem {
    pub fn new(
        mesh: Mesh,
        partition: BoundaryPartition,
        forms: AssembledForms,
        data: CauchyData,
        reference: Option<Vec<C64>>,
    ) -> Result<Self, DriverError> {
        let n = mesh.n_edges();
        if forms.n() != n {
            return Err(DriverError::LengthMismatch { what: "assembled forms", expected: n, found: forms.n() });
        }
        if let Some(r) = &reference {
            if r.len() != n {
                return Err(DriverError::LengthMismatch { what: "reference", expected: n, found: r.len() });
            }
        }
        if data.f.len() != data.edges.len() || data.g.len() != data.edges.len() {
            return Err(DriverError::LengthMismatch {
                what: "cauchy data",
                expected: data.edges.len(),
                found: data.f.len().min(data.g.len()),
            });
        }
        Ok(Self { mesh, partition, forms, data, reference })
    }

    /// Assembles the forms for wavenumber `k` and coefficient `kappa`.
    pub fn assemble<K>(
        mesh: Mesh,
        partition: BoundaryPartition,
        k: f64,
        kappa: K,
        data: CauchyData,
        reference: Option<Vec<C64>>,
        exec: Exec,
    ) -> Result<Self, DriverError>
    where
        K: Fn([f64; 2]) -> C64 + Sync + Send,
    {
        let forms = assemble(&mesh, &partition, k, kappa, exec)?;
        Self::new(mesh, partition, forms, data, reference)
    }

    /// Same geometry and forms with other data.
    pub fn with_data(&self, data: CauchyData) -> Self {
        Self { data, ..self.clone() }
    }
}

/// Anything that turns method parameters into a solution with metrics.
pub trait QrSolver: Sync {
    fn solve(&self, params: &QrParams) -> Result<QrSolution, DriverError>;
}

impl QrSolver for Problem {
    fn solve(&self, params: &QrParams) -> Result<QrSolution, DriverError> {
        solve_once(self, params)
    }
}

/// Error metrics of one solution. Errors are relative to the reference and
/// are `NaN` when there is no reference or the reference vanishes on the
/// region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub err_l2_omega: f64,
    pub err_gamma0: f64,
    pub err_gamma1: f64,
    pub err_gammai: f64,
    /// `‖E‖_{0,Ω}`
    pub norm_e: f64,
    /// `‖F‖_{0,Ω}`
    pub norm_f: f64,
}

#[derive(Debug, Clone)]
pub struct QrSolution {
    pub e: Vec<C64>,
    pub f: Vec<C64>,
    pub params: QrParams,
    pub metrics: Metrics,
    pub wall_ms: f64,
}

/// `zᴴ A z` for a real symmetric `A`.
pub(crate) fn hermitian_form(a: &SparseMatrix, z: &[C64]) -> f64 {
    let re: Vec<f64> = z.iter().map(|c| c.re).collect();
    let im: Vec<f64> = z.iter().map(|c| c.im).collect();
    a.quad_form(&re) + a.quad_form(&im)
}

fn relative(a: &SparseMatrix, u: &[C64], reference: &[C64]) -> f64 {
    let diff: Vec<C64> = u.iter().zip(reference).map(|(x, y)| x - y).collect();
    let den = hermitian_form(a, reference);
    if den > 0.0 {
        (hermitian_form(a, &diff) / den).sqrt()
    } else {
        f64::NAN
    }
}

/// L²(Ω) errors through the mass matrix and trace errors through the
/// boundary matrices.
pub fn compute_metrics(forms: &AssembledForms, e: &[C64], f: &[C64], reference: Option<&[C64]>) -> Metrics {
    let (err_l2_omega, err_gamma0, err_gamma1, err_gammai) = match reference {
        Some(r) => (
            relative(&forms.mass, e, r),
            relative(&forms.b_gamma0, e, r),
            relative(&forms.b_gamma1, e, r),
            relative(&forms.b_gammai, e, r),
        ),
        None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
    };
    Metrics {
        err_l2_omega,
        err_gamma0,
        err_gamma1,
        err_gammai,
        norm_e: hermitian_form(&forms.mass, e).sqrt(),
        norm_f: hermitian_form(&forms.mass, f).sqrt(),
    }
}

/// Builds and solves the mixed system of `params.variant`, then evaluates
/// the metrics.
pub fn solve_once(problem: &Problem, params: &QrParams) -> Result<QrSolution, DriverError> {
    let start = Instant::now();
    let system = build(&problem.forms, &problem.data, params)?;
    let (e, f) = system.solve()?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let metrics = compute_metrics(&problem.forms, &e, &f, problem.reference.as_deref());
    Ok(QrSolution { e, f, params: *params, metrics, wall_ms })
}

#[cfg(test)]
mod tests;
