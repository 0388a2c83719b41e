//! Algebraic invariants that hold exactly (up to rounding) for any mesh and
//! are cheap enough to run on coarse meshes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::formulations::{build, QrParams, Variant};
use crate::linalg::SparseMatrix;
use crate::synth::{add_noise, CauchyData};
use crate::C64;

use super::{hermitian_form, solve_once, tikhonov_gradient_check, DriverError, Problem};

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantResult {
    pub name: &'static str,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl InvariantResult {
    fn new(name: &'static str, worst: f64, tolerance: f64) -> Self {
        Self { name, worst, tolerance, passed: worst <= tolerance }
    }
}

fn all_variants(delta: f64, eta: f64) -> [QrParams; 3] {
    [QrParams::qr(delta), QrParams::rqr(delta, eta), QrParams::rrqr(delta, eta, delta)]
}

fn rel_diff(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Sparse and dense solves of the three mixed systems agree. Meant for
/// meshes with at most a few hundred edges.
pub fn sparse_dense_agreement(problem: &Problem) -> Result<InvariantResult, DriverError> {
    let mut worst: f64 = 0.0;
    for params in all_variants(1e-3, 2.0) {
        let sys = build(&problem.forms, &problem.data, &params)?;
        let (e1, f1) = sys.solve()?;
        let (e2, f2) = sys.solve_dense()?;
        worst = worst.max(rel_diff(&e1, &e2)).max(rel_diff(&f1, &f2));
    }
    Ok(InvariantResult::new("sparse/dense agreement", worst, 1e-10))
}

/// The symmetric part of each system matrix is the block-diagonal norm
/// `diag(P, P, H, H)`, checked through quadratic forms on random vectors.
pub fn coercivity_identity(problem: &Problem, samples: usize, seed: u64) -> Result<InvariantResult, DriverError> {
    let forms = &problem.forms;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for params in
        [QrParams::qr(1e-3), QrParams::rqr(1e-3, 2.0), QrParams { nu_inner: 3e-3, ..QrParams::rrqr(1e-3, 2.0, 1e-3) }]
    {
        let sys = build(forms, &problem.data, &params)?;
        let sym = sys.symmetric_part();
        let h = forms.hcurl();
        let v = forms.v_norm();
        let w = forms.w_norm();
        for _ in 0..samples {
            let x: Vec<f64> = (0..sys.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (mut u, f) = sys.unpack(&x);
            for &(e, _) in &sys.e_fixed {
                u[e] = C64::new(0.0, 0.0);
            }
            let q = |a: &SparseMatrix, z: &[C64]| hermitian_form(a, z);
            let expect = match params.variant {
                Variant::Qr => params.delta * q(&h, &u) + q(&h, &f),
                Variant::Rqr => params.delta * q(&v, &u) + params.eta.powi(2) * q(&forms.b_gamma0, &u) + q(&v, &f),
                Variant::Rrqr => {
                    params.delta * q(&v, &u)
                        + params.eta.powi(2) * q(&forms.b_gamma0, &u)
                        + params.nu_outer * q(&forms.b_gamma1, &u)
                        + params.nu_inner * q(&forms.b_gammai, &u)
                        + q(&w, &f)
                }
            };
            let got = sym.quad_form(&x);
            worst = worst.max((got - expect).abs() / expect.abs());
        }
    }
    Ok(InvariantResult::new("coercivity identity", worst, 1e-12))
}

/// Relaxed estimates with discrete-oracle data: `‖F‖ ≤ √δ‖E_h‖` and
/// `‖γ_t E − f‖_{Γ0} ≤ (√δ/η)‖E_h‖`, in the V norm for RQR and in the W norm
/// for RRQR with `ν = δ`. Returns the worst ratio of left to right side, so
/// the invariant holds when it is at most `1 + 1e-10`.
pub fn relaxed_estimates(
    problem: &Problem,
    exact: &[C64],
    deltas: &[f64],
    etas: &[f64],
) -> Result<InvariantResult, DriverError> {
    let forms = &problem.forms;
    let (v, w) = (forms.v_norm(), forms.w_norm());
    let f_full = problem.data.f_full(forms.n());
    let mut worst: f64 = 0.0;
    for &delta in deltas {
        for &eta in etas {
            for params in [QrParams::rqr(delta, eta), QrParams::rrqr(delta, eta, delta)] {
                let norm = if params.variant == Variant::Rqr { &v } else { &w };
                let e_norm = hermitian_form(norm, exact).sqrt();
                let s = solve_once(problem, &params)?;
                let f_norm = hermitian_form(norm, &s.f).sqrt();
                let trace: Vec<C64> = s.e.iter().zip(&f_full).map(|(a, b)| a - b).collect();
                let t_norm = hermitian_form(&forms.b_gamma0, &trace).sqrt();
                let bound = delta.sqrt() * e_norm;
                worst = worst.max(f_norm / bound).max(t_norm / (bound / eta));
            }
        }
    }
    Ok(InvariantResult::new("relaxed estimates (ratio)", worst, 1.0 + 1e-10))
}

/// `‖f^p − f‖/‖f‖ = p` and likewise for `g`.
pub fn noise_calibration(data: &CauchyData, levels: &[f64], seed: u64) -> Result<InvariantResult, DriverError> {
    let norm = |v: &[C64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut worst: f64 = 0.0;
    for &p in levels {
        let noisy = add_noise(data, p, seed)?;
        let df: Vec<C64> = noisy.f.iter().zip(&data.f).map(|(a, b)| a - b).collect();
        let dg: Vec<C64> = noisy.g.iter().zip(&data.g).map(|(a, b)| a - b).collect();
        worst = worst.max((norm(&df) / norm(&data.f) - p).abs()).max((norm(&dg) / norm(&data.g) - p).abs());
    }
    Ok(InvariantResult::new("noise calibration", worst, 1e-14))
}

/// Finite-difference stationarity of the Tikhonov cost for all methods.
pub fn tikhonov_stationarity(problem: &Problem, directions: usize, seed: u64) -> Result<InvariantResult, DriverError> {
    let mut worst: f64 = 0.0;
    for params in all_variants(1e-3, 2.0) {
        let s = solve_once(problem, &params)?;
        let check = tikhonov_gradient_check(&s, &problem.forms, &problem.data, directions, seed)?;
        worst = worst.max(check.max_relative);
    }
    Ok(InvariantResult::new("tikhonov stationarity", worst, 1e-6))
}
