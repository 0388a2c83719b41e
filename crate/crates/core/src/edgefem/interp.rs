use crate::mesh::Mesh;
use crate::C64;

use super::element::{edge_rule, triangle_rule, TriangleGeometry};
use super::{AssembledForms, DofKind, FemError, FieldFunction};

/// Edge moments `∫_e field·t ds` by two-point Gauss, `t` along the global
/// edge direction.
pub fn interpolate(field: &dyn FieldFunction, mesh: &Mesh) -> Vec<C64> {
    (0..mesh.n_edges())
        .map(|e| {
            let (p, q) = mesh.edge_points(e);
            let d = [q[0] - p[0], q[1] - p[1]];
            edge_rule()
                .iter()
                .map(|&(s, w)| {
                    let v = field.value([p[0] + s * d[0], p[1] + s * d[1]]);
                    (v[0] * d[0] + v[1] * d[1]) * w
                })
                .sum()
        })
        .collect()
}

/// Value and curl of the discrete field `Σ u_e N_e` inside triangle `t` at
/// barycentric point `lambda`.
pub fn evaluate(mesh: &Mesh, u: &[C64], t: usize, lambda: [f64; 3]) -> Result<([C64; 2], C64), FemError> {
    let g = TriangleGeometry::new(mesh.triangle_points(t))?;
    let basis = g.basis(lambda);
    let es = mesh.triangle_edges(t);
    let signs = mesh.triangle_signs(t);
    let mut v = [C64::new(0.0, 0.0); 2];
    let mut c = C64::new(0.0, 0.0);
    for j in 0..3 {
        let coef = u[es[j]] * signs[j];
        v[0] += coef * basis[j][0];
        v[1] += coef * basis[j][1];
        c += coef * g.basis_curl();
    }
    Ok((v, c))
}

/// Absolute errors of a discrete field against an analytic one, and the
/// analytic norms, all by a degree-5 rule per triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldErrors {
    pub l2: f64,
    pub curl: f64,
    pub l2_ref: f64,
    pub curl_ref: f64,
}

impl FieldErrors {
    pub fn hcurl(&self) -> f64 {
        self.l2.hypot(self.curl)
    }

    pub fn hcurl_ref(&self) -> f64 {
        self.l2_ref.hypot(self.curl_ref)
    }
}

pub fn l2_hcurl_error(mesh: &Mesh, u: &[C64], field: &dyn FieldFunction) -> Result<FieldErrors, FemError> {
    let mut acc = [0.0f64; 4];
    for t in 0..mesh.n_triangles() {
        let g = TriangleGeometry::new(mesh.triangle_points(t))?;
        for (lambda, w) in triangle_rule() {
            let x = g.point_at(lambda);
            let (v, c) = evaluate(mesh, u, t, lambda)?;
            let (fv, fc) = (field.value(x), field.curl(x));
            let wa = w * g.area;
            acc[0] += wa * ((v[0] - fv[0]).norm_sqr() + (v[1] - fv[1]).norm_sqr());
            acc[1] += wa * (c - fc).norm_sqr();
            acc[2] += wa * (fv[0].norm_sqr() + fv[1].norm_sqr());
            acc[3] += wa * fc.norm_sqr();
        }
    }
    Ok(FieldErrors { l2: acc[0].sqrt(), curl: acc[1].sqrt(), l2_ref: acc[2].sqrt(), curl_ref: acc[3].sqrt() })
}

/// Load vectors from Γ0 data. `f` are edge moments of the tangential trace,
/// `g` edge means of the scalar curl. Returns `(b_f, b_g)` with
/// `b_f = B_Γ0 f` and `(b_g)_e = ∫_e g (N_e·τ) ds`.
pub fn boundary_trace_terms(
    forms: &AssembledForms,
    edges: &[usize],
    f: &[C64],
    g: &[C64],
) -> Result<(Vec<C64>, Vec<C64>), FemError> {
    for (len, v) in [(f.len(), f), (g.len(), g)] {
        if len != edges.len() {
            return Err(FemError::LengthMismatch { expected: edges.len(), found: v.len() });
        }
    }
    let n = forms.n();
    let mut b_f = vec![C64::new(0.0, 0.0); n];
    let mut b_g = vec![C64::new(0.0, 0.0); n];
    for (i, &e) in edges.iter().enumerate() {
        if e >= n || forms.dofs.kind(e) != DofKind::Gamma0 {
            return Err(FemError::NotGamma0(e));
        }
        b_f[e] = f[i] * forms.b_gamma0.get(e, e);
        b_g[e] = g[i] * forms.boundary_sign[e];
    }
    Ok((b_f, b_g))
}
