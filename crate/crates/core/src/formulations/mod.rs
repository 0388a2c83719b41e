//! Mixed systems of the classical (QR), relaxed (RQR) and
//! relaxed-regularized (RRQR) quasi-reversibility methods.
//!
//! With `A = K − k² Mκ` and inner-product matrices `P` (first equation) and
//! `H` (second equation), the complex system in `(E, F)` is
//!
//! ```text
//!   P E + Aᴴ F =  r₁      (tests φ: free E degrees of freedom)
//!  −A E + H  F = −b_g     (tests ψ: free F degrees of freedom)
//! ```
//!
//! It is solved in real form for `x = (Re E, Im E, Re G, Im G)` with
//! `G = conj(F)`:
//!
//! ```text
//!   [  P    0    A_r  −A_i ]
//!   [  0    P   −A_i  −A_r ]
//!   [ −A_rᵀ A_iᵀ  H     0  ]
//!   [  A_iᵀ A_rᵀ  0     H  ]
//! ```
//!
//! whose symmetric part is `diag(P, P, H, H)`.

use std::io::{self, Write};

use crate::edgefem::{boundary_trace_terms, AssembledForms, DofKind, FemError};
use crate::linalg::{dense_solve, sparse_lu_solve, sparse_lu_solve_complex, LinalgError, SparseMatrix, TripletBuilder};
use crate::synth::CauchyData;
use crate::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormulationError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("expected a {expected:?} parameter set, got {found:?}")]
    VariantMismatch { expected: Variant, found: Variant },
    #[error("no data for gamma0 edge {0}")]
    MissingData(usize),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Qr,
    Rqr,
    Rrqr,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Self::Qr => "QR",
            Self::Rqr => "RQR",
            Self::Rrqr => "RRQR",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qr" => Ok(Self::Qr),
            "rqr" => Ok(Self::Rqr),
            "rrqr" | "rr-qr" => Ok(Self::Rrqr),
            _ => Err(format!("unknown method `{s}` (expected QR, RQR or RRQR)")),
        }
    }
}

/// Method parameters. `eta` is unused by QR; `nu_outer`/`nu_inner` weight
/// the trace on Γ1 and Γi for RRQR only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrParams {
    pub variant: Variant,
    pub delta: f64,
    pub eta: f64,
    pub nu_outer: f64,
    pub nu_inner: f64,
}

impl QrParams {
    pub fn qr(delta: f64) -> Self {
        Self { variant: Variant::Qr, delta, eta: 0.0, nu_outer: 0.0, nu_inner: 0.0 }
    }

    pub fn rqr(delta: f64, eta: f64) -> Self {
        Self { variant: Variant::Rqr, delta, eta, nu_outer: 0.0, nu_inner: 0.0 }
    }

    /// RRQR with the same `nu` on Γ1 and Γi.
    pub fn rrqr(delta: f64, eta: f64, nu: f64) -> Self {
        Self { variant: Variant::Rrqr, delta, eta, nu_outer: nu, nu_inner: nu }
    }

    /// Same parameters with a different `delta`; RRQR weights tied to
    /// `delta` through `nu = delta` are updated when `tie_nu` is set.
    pub fn with_delta(self, delta: f64, tie_nu: bool) -> Self {
        let mut p = self;
        p.delta = delta;
        if tie_nu && p.variant == Variant::Rrqr {
            p.nu_outer = delta;
            p.nu_inner = delta;
        }
        p
    }

    pub fn validate(&self) -> Result<(), FormulationError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(FormulationError::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("delta", self.delta)?;
        if self.variant != Variant::Qr {
            positive("eta", self.eta)?;
        }
        if self.variant == Variant::Rrqr {
            positive("nu (outer)", self.nu_outer)?;
            positive("nu (inner)", self.nu_inner)?;
        }
        Ok(())
    }

    fn expect(&self, variant: Variant) -> Result<(), FormulationError> {
        if self.variant != variant {
            return Err(FormulationError::VariantMismatch { expected: variant, found: self.variant });
        }
        self.validate()
    }
}

/// The mixed system of one method in real-split form, its complex
/// counterpart (used by [`MixedSystem::solve`]) and the index maps needed to
/// recover `(E, F)`.
#[derive(Debug, Clone)]
pub struct MixedSystem {
    pub params: QrParams,
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Edges carrying unknown E values, ascending.
    pub e_free: Vec<usize>,
    /// Edges carrying unknown F values, ascending; F vanishes elsewhere.
    pub f_free: Vec<usize>,
    /// Strongly imposed E values.
    pub e_fixed: Vec<(usize, C64)>,
    n_edges: usize,
    /// The same operator in complex form on `(E, F)`.
    complex: (SparseMatrix, SparseMatrix),
}

fn complex_mul(re: &SparseMatrix, im: &SparseMatrix, x: &[C64]) -> Vec<C64> {
    crate::edgefem::apply_complex(re, im, x)
}

/// The two inner-product matrices of a method on the full edge space.
pub fn norm_matrices(forms: &AssembledForms, params: &QrParams) -> (SparseMatrix, SparseMatrix) {
    match params.variant {
        Variant::Qr => {
            let h = forms.hcurl();
            (h.scale(params.delta), h)
        }
        Variant::Rqr => {
            let v = forms.v_norm();
            (v.add(params.delta, &forms.b_gamma0, params.eta * params.eta), v)
        }
        Variant::Rrqr => {
            let p = forms
                .v_norm()
                .add(params.delta, &forms.b_gamma0, params.eta * params.eta)
                .add(1.0, &forms.b_gamma1, params.nu_outer)
                .add(1.0, &forms.b_gammai, params.nu_inner);
            (p, forms.w_norm())
        }
    }
}

/// Builds the classical QR system: E is lifted strongly to `f` on Γ0, which
/// therefore must cover every Γ0 edge.
pub fn build_qr(forms: &AssembledForms, data: &CauchyData, params: &QrParams) -> Result<MixedSystem, FormulationError> {
    params.expect(Variant::Qr)?;
    build(forms, data, params)
}

/// Builds the relaxed system, with the Γ0 condition imposed by an η² penalty.
pub fn build_rqr(
    forms: &AssembledForms,
    data: &CauchyData,
    params: &QrParams,
) -> Result<MixedSystem, FormulationError> {
    params.expect(Variant::Rqr)?;
    build(forms, data, params)
}

/// Builds the relaxed-regularized system, adding ν-weighted traces on the
/// inaccessible boundary.
pub fn build_rrqr(
    forms: &AssembledForms,
    data: &CauchyData,
    params: &QrParams,
) -> Result<MixedSystem, FormulationError> {
    params.expect(Variant::Rrqr)?;
    build(forms, data, params)
}

/// Dispatches on `params.variant`.
pub fn build(forms: &AssembledForms, data: &CauchyData, params: &QrParams) -> Result<MixedSystem, FormulationError> {
    params.validate()?;
    let n = forms.n();
    let (b_f, b_g) = boundary_trace_terms(forms, &data.edges, &data.f, &data.g)?;

    let gamma0 = forms.dofs.select(|k| k == DofKind::Gamma0);
    let f_free = forms.dofs.select(|k| matches!(k, DofKind::Interior | DofKind::Gamma0));
    let (e_free, e_fixed) = if params.variant == Variant::Qr {
        let mut lifted = vec![None; n];
        for (&e, &v) in data.edges.iter().zip(&data.f) {
            lifted[e] = Some(v);
        }
        let fixed = gamma0
            .iter()
            .map(|&e| lifted[e].map(|v| (e, v)).ok_or(FormulationError::MissingData(e)))
            .collect::<Result<Vec<_>, _>>()?;
        (forms.dofs.select(|k| k != DofKind::Gamma0), fixed)
    } else {
        ((0..n).collect(), Vec::new())
    };

    let (p, h) = norm_matrices(forms, params);
    let (are, aim) = (forms.a_re(), forms.a_im());

    let mut lift = vec![C64::new(0.0, 0.0); n];
    for &(e, v) in &e_fixed {
        lift[e] = v;
    }
    let p_lift = complex_mul(&p, &SparseMatrix::zeros(n, n), &lift);
    let a_lift = complex_mul(&are, &aim, &lift);
    let eta2 = params.eta * params.eta;
    let r1: Vec<C64> =
        e_free.iter().map(|&e| if params.variant == Variant::Qr { -p_lift[e] } else { b_f[e] * eta2 }).collect();
    let r2: Vec<C64> = f_free.iter().map(|&e| a_lift[e] - b_g[e]).collect();

    let (p, h) = (p.submatrix(&e_free, &e_free), h.submatrix(&f_free, &f_free));
    let (ar, ai) = (are.submatrix(&e_free, &f_free), aim.submatrix(&e_free, &f_free));
    let matrix = assemble_block(&p, &h, &ar, &ai);
    let complex = complex_block(&p, &h, &ar, &ai);
    let rhs = r1
        .iter()
        .map(|z| z.re)
        .chain(r1.iter().map(|z| z.im))
        .chain(r2.iter().map(|z| z.re))
        .chain(r2.iter().map(|z| -z.im))
        .collect();
    Ok(MixedSystem { params: *params, matrix, rhs, e_free, f_free, e_fixed, n_edges: n, complex })
}

fn assemble_block(p: &SparseMatrix, h: &SparseMatrix, ar: &SparseMatrix, ai: &SparseMatrix) -> SparseMatrix {
    let (ne, nf) = (p.n_rows(), h.n_rows());
    let dim = 2 * ne + 2 * nf;
    let cap = 2 * (p.nnz() + h.nnz()) + 8 * (ar.nnz() + ai.nnz());
    let mut t = TripletBuilder::with_capacity(dim, dim, cap);
    let (c, d) = (2 * ne, 2 * ne + nf);
    for i in 0..ne {
        for (j, v) in p.row(i) {
            t.push(i, j, v);
            t.push(ne + i, ne + j, v);
        }
        for (j, v) in ar.row(i) {
            t.push(i, c + j, v);
            t.push(ne + i, d + j, -v);
            t.push(c + j, i, -v);
            t.push(d + j, ne + i, v);
        }
        for (j, v) in ai.row(i) {
            t.push(i, d + j, -v);
            t.push(ne + i, c + j, -v);
            t.push(c + j, ne + i, v);
            t.push(d + j, i, v);
        }
    }
    for i in 0..nf {
        for (j, v) in h.row(i) {
            t.push(c + i, c + j, v);
            t.push(d + i, d + j, v);
        }
    }
    t.build()
}

/// Complex form `[[P, A_r − iA_i], [−(A_r + iA_i)ᵀ, H]]` acting on `(E, F)`.
fn complex_block(
    p: &SparseMatrix,
    h: &SparseMatrix,
    ar: &SparseMatrix,
    ai: &SparseMatrix,
) -> (SparseMatrix, SparseMatrix) {
    let (ne, nf) = (p.n_rows(), h.n_rows());
    let dim = ne + nf;
    let mut re = TripletBuilder::with_capacity(dim, dim, p.nnz() + h.nnz() + 2 * ar.nnz());
    let mut im = TripletBuilder::with_capacity(dim, dim, 2 * ai.nnz());
    for i in 0..ne {
        for (j, v) in p.row(i) {
            re.push(i, j, v);
        }
        for (j, v) in ar.row(i) {
            re.push(i, ne + j, v);
            re.push(ne + j, i, -v);
        }
        for (j, v) in ai.row(i) {
            im.push(i, ne + j, -v);
            im.push(ne + j, i, -v);
        }
    }
    for i in 0..nf {
        for (j, v) in h.row(i) {
            re.push(ne + i, ne + j, v);
        }
    }
    (re.build(), im.build())
}

impl MixedSystem {
    pub fn dim(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    /// Splits a real solution vector into full-length E and F.
    pub fn unpack(&self, x: &[f64]) -> (Vec<C64>, Vec<C64>) {
        let (ne, nf) = (self.e_free.len(), self.f_free.len());
        let mut e = vec![C64::new(0.0, 0.0); self.n_edges];
        let mut f = vec![C64::new(0.0, 0.0); self.n_edges];
        for &(k, v) in &self.e_fixed {
            e[k] = v;
        }
        for (i, &k) in self.e_free.iter().enumerate() {
            e[k] = C64::new(x[i], x[ne + i]);
        }
        for (i, &k) in self.f_free.iter().enumerate() {
            // F = conj(G)
            f[k] = C64::new(x[2 * ne + i], -x[2 * ne + nf + i]);
        }
        (e, f)
    }

    /// Inverse of [`unpack`](Self::unpack) on the free entries.
    pub fn pack(&self, e: &[C64], f: &[C64]) -> Vec<f64> {
        let re = self.e_free.iter().map(|&k| e[k].re);
        let ie = self.e_free.iter().map(|&k| e[k].im);
        let rg = self.f_free.iter().map(|&k| f[k].re);
        let ig = self.f_free.iter().map(|&k| -f[k].im);
        re.chain(ie).chain(rg).chain(ig).collect()
    }

    /// Sparse LU solve of the complex form.
    pub fn solve(&self) -> Result<(Vec<C64>, Vec<C64>), FormulationError> {
        let (ne, nf) = (self.e_free.len(), self.f_free.len());
        let (c, d) = (2 * ne, 2 * ne + nf);
        let r = &self.rhs;
        let b: Vec<C64> =
            (0..ne).map(|i| C64::new(r[i], r[ne + i])).chain((0..nf).map(|i| C64::new(r[c + i], -r[d + i]))).collect();
        let z = sparse_lu_solve_complex(&self.complex.0, &self.complex.1, &b)?;
        let mut x = vec![0.0; self.dim()];
        for i in 0..ne {
            x[i] = z[i].re;
            x[ne + i] = z[i].im;
        }
        for i in 0..nf {
            // G = conj(F)
            x[c + i] = z[ne + i].re;
            x[d + i] = -z[ne + i].im;
        }
        Ok(self.unpack(&x))
    }

    /// Sparse LU solve of the real form.
    pub fn solve_real(&self) -> Result<(Vec<C64>, Vec<C64>), FormulationError> {
        let x = sparse_lu_solve(&self.matrix, &self.rhs)?;
        Ok(self.unpack(&x))
    }

    /// Dense LU solve, for cross-checking small systems.
    pub fn solve_dense(&self) -> Result<(Vec<C64>, Vec<C64>), FormulationError> {
        let x = dense_solve(&self.matrix.to_dense(), &self.rhs)?;
        Ok(self.unpack(&x))
    }

    pub fn symmetric_part(&self) -> SparseMatrix {
        self.matrix.symmetric_part()
    }

    /// Writes the matrix and right-hand side in coordinate format.
    pub fn write_coo<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "# {} delta={:e} eta={:e} nu={:e}/{:e}",
            self.params.variant.name(),
            self.params.delta,
            self.params.eta,
            self.params.nu_outer,
            self.params.nu_inner
        )?;
        self.matrix.write_coo(&mut out)?;
        writeln!(out, "# rhs")?;
        for (i, v) in self.rhs.iter().enumerate() {
            writeln!(out, "{i} {v:e}")?;
        }
        Ok(())
    }
}
