use crate::edgefem::{boundary_trace_terms, AssembledForms, DofKind};
use crate::linalg::SparseLu;
use crate::synth::CauchyData;
use crate::C64;

use super::{hermitian_form, DriverError};

/// `η = ‖G‖_W / ‖f‖_{0,Γ0}`, where `G` is the Riesz representative in the
/// W-inner product, over the test space, of the functional `ψ ↦ (g, ψ·τ)_{Γ0}`.
pub fn auto_eta(forms: &AssembledForms, data: &CauchyData) -> Result<f64, DriverError> {
    let n = forms.n();
    let f_full = data.f_full(n);
    let norm_f = hermitian_form(&forms.b_gamma0, &f_full).sqrt();
    if norm_f == 0.0 {
        return Err(DriverError::AutoEta("f vanishes on gamma0"));
    }
    let (_, b_g) = boundary_trace_terms(forms, &data.edges, &data.f, &data.g)?;
    let free = forms.dofs.select(|k| matches!(k, DofKind::Interior | DofKind::Gamma0));
    let w = forms.w_norm().submatrix(&free, &free);
    let lu = SparseLu::factorize(&w)?;
    let rhs_re: Vec<f64> = free.iter().map(|&e| b_g[e].re).collect();
    let rhs_im: Vec<f64> = free.iter().map(|&e| b_g[e].im).collect();
    let (re, _) = lu.solve_refined(&w, &rhs_re)?;
    let (im, _) = lu.solve_refined(&w, &rhs_im)?;
    let g: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
    let eta = hermitian_form(&w, &g).sqrt() / norm_f;
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(DriverError::AutoEta("g vanishes on gamma0, so eta = 0"));
    }
    Ok(eta)
}
