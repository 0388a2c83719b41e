use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::mesh::{BoundaryPartition, Mesh};
use crate::par::{map_indexed, Exec};
use crate::C64;

use super::element::{edge_rule, element_matrices, ElementMatrices, TriangleGeometry};
use super::{DofKind, DofMap, FemError};

/// Global real matrices of all bilinear forms on one mesh.
#[derive(Debug, Clone)]
pub struct AssembledForms {
    pub dofs: DofMap,
    /// wavenumber `k`
    pub k: f64,
    /// `∫ u·v`
    pub mass: SparseMatrix,
    /// `∫ curl u curl v`
    pub curl: SparseMatrix,
    /// `∫ Re κ u·v`
    pub kappa_re: SparseMatrix,
    /// `∫ Im κ u·v`
    pub kappa_im: SparseMatrix,
    /// `∫_Γ0 (u·τ)(v·τ)`
    pub b_gamma0: SparseMatrix,
    /// `∫_Γ1 (u·τ)(v·τ)`
    pub b_gamma1: SparseMatrix,
    /// `∫_Γi (u·τ)(v·τ)`
    pub b_gammai: SparseMatrix,
    /// sign of the global edge direction relative to `τ`, 0 on interior edges
    pub boundary_sign: Vec<f64>,
}

impl AssembledForms {
    pub fn n(&self) -> usize {
        self.dofs.len()
    }

    /// H(curl) inner product `M + K`.
    pub fn hcurl(&self) -> SparseMatrix {
        self.mass.add(1.0, &self.curl, 1.0)
    }

    /// Inner product of `V`: H(curl) plus the Γ0 trace.
    pub fn v_norm(&self) -> SparseMatrix {
        self.hcurl().add(1.0, &self.b_gamma0, 1.0)
    }

    /// Inner product of `W`: H(curl) plus the trace on the whole boundary.
    pub fn w_norm(&self) -> SparseMatrix {
        self.v_norm().add(1.0, &self.b_gamma1, 1.0).add(1.0, &self.b_gammai, 1.0)
    }

    /// Real part of the Maxwell form matrix: `K − k² Re(Mκ)`.
    pub fn a_re(&self) -> SparseMatrix {
        self.curl.add(1.0, &self.kappa_re, -self.k * self.k)
    }

    /// Imaginary part of the Maxwell form matrix: `−k² Im(Mκ)`.
    pub fn a_im(&self) -> SparseMatrix {
        self.kappa_im.scale(-self.k * self.k)
    }

    /// Complex product `(A_re + i A_im) x` with the Maxwell form.
    pub fn apply_a(&self, x: &[C64]) -> Vec<C64> {
        apply_complex(&self.a_re(), &self.a_im(), x)
    }
}

/// `(re + i im) x` for real sparse `re`, `im`.
pub fn apply_complex(re: &SparseMatrix, im: &SparseMatrix, x: &[C64]) -> Vec<C64> {
    let xr: Vec<f64> = x.iter().map(|z| z.re).collect();
    let xi: Vec<f64> = x.iter().map(|z| z.im).collect();
    let (rr, ri, ir, ii) = (re.mul_vec(&xr), re.mul_vec(&xi), im.mul_vec(&xr), im.mul_vec(&xi));
    (0..rr.len()).map(|i| C64::new(rr[i] - ii[i], ri[i] + ir[i])).collect()
}

/// Assembles all forms. `kappa` is evaluated at triangle centroids.
pub fn assemble<F>(
    mesh: &Mesh,
    partition: &BoundaryPartition,
    k: f64,
    kappa: F,
    exec: Exec,
) -> Result<AssembledForms, FemError>
where
    F: Fn([f64; 2]) -> C64 + Sync + Send,
{
    let dofs = DofMap::new(mesh, partition)?;
    let locals: Vec<Result<ElementMatrices, FemError>> = map_indexed(mesh.n_triangles(), exec, |t| {
        let pts = mesh.triangle_points(t);
        let centroid = [(pts[0][0] + pts[1][0] + pts[2][0]) / 3.0, (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0];
        element_matrices(pts, mesh.triangle_signs(t), kappa(centroid))
    });

    let n = mesh.n_edges();
    let cap = 9 * mesh.n_triangles();
    let mut mass = TripletBuilder::with_capacity(n, n, cap);
    let mut curl = TripletBuilder::with_capacity(n, n, cap);
    let mut kre = TripletBuilder::with_capacity(n, n, cap);
    let mut kim = TripletBuilder::with_capacity(n, n, cap);
    for (t, local) in locals.into_iter().enumerate() {
        let local = local?;
        let es = mesh.triangle_edges(t);
        for i in 0..3 {
            for j in 0..3 {
                mass.push(es[i], es[j], local.mass[i][j]);
                curl.push(es[i], es[j], local.stiffness[i][j]);
                kre.push(es[i], es[j], local.kappa_mass[i][j].re);
                kim.push(es[i], es[j], local.kappa_mass[i][j].im);
            }
        }
    }

    let mut b = [TripletBuilder::new(n, n), TripletBuilder::new(n, n), TripletBuilder::new(n, n)];
    let mut boundary_sign = vec![0.0; n];
    for &e in mesh.boundary_edges() {
        let slot = match dofs.kind(e) {
            DofKind::Gamma0 => 0,
            DofKind::Gamma1 => 1,
            DofKind::GammaI => 2,
            DofKind::Interior => unreachable!("boundary edge classified as interior"),
        };
        b[slot].push(e, e, boundary_self_mass(mesh, e)?);
        boundary_sign[e] = mesh.boundary_sign(e).unwrap();
    }
    let [b0, b1, bi] = b;

    Ok(AssembledForms {
        dofs,
        k,
        mass: mass.build(),
        curl: curl.build(),
        kappa_re: kre.build(),
        kappa_im: kim.build(),
        b_gamma0: b0.build(),
        b_gamma1: b1.build(),
        b_gammai: bi.build(),
        boundary_sign,
    })
}

/// `∫_e (N_e·τ)² ds` by two-point Gauss. The other basis functions of the
/// adjacent triangle have zero tangential trace on `e`.
fn boundary_self_mass(mesh: &Mesh, e: usize) -> Result<f64, FemError> {
    let (t, _) = mesh.edge_triangles(e);
    let j = mesh.triangle_edges(t).iter().position(|&x| x == e).unwrap();
    let g = TriangleGeometry::new(mesh.triangle_points(t))?;
    let tau = mesh.boundary_tangent(e).unwrap();
    let len = mesh.edge_length(e);
    let (a, bb) = ((j + 1) % 3, (j + 2) % 3);
    let mut acc = 0.0;
    for (s, w) in edge_rule() {
        let mut lambda = [0.0; 3];
        lambda[a] = 1.0 - s;
        lambda[bb] = s;
        let n = g.basis(lambda)[j];
        let nt = n[0] * tau[0] + n[1] * tau[1];
        acc += w * len * nt * nt;
    }
    Ok(acc)
}
