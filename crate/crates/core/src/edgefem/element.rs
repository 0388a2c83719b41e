//! Whitney (lowest-order Nédélec) element on a single triangle.
//!
//! Local edge `j` joins local vertices `j+1 → j+2` and carries the basis
//! `N_j = λ_{j+1}∇λ_{j+2} − λ_{j+2}∇λ_{j+1}`, multiplied by the global
//! orientation sign.

use crate::C64;

use super::FemError;

/// Geometry of one triangle: area and barycentric gradients.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeometry {
    pub points: [[f64; 2]; 3],
    pub area: f64,
    pub grad: [[f64; 2]; 3],
}

impl TriangleGeometry {
    pub fn new(points: [[f64; 2]; 3]) -> Result<Self, FemError> {
        let [p0, p1, p2] = points;
        let area = 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]));
        if !(area > 0.0) || !area.is_finite() {
            return Err(FemError::DegenerateTriangle { area });
        }
        let s = 0.5 / area;
        let grad = [
            [(p1[1] - p2[1]) * s, (p2[0] - p1[0]) * s],
            [(p2[1] - p0[1]) * s, (p0[0] - p2[0]) * s],
            [(p0[1] - p1[1]) * s, (p1[0] - p0[0]) * s],
        ];
        Ok(Self { points, area, grad })
    }

    /// Barycentric coordinates of `x`.
    pub fn barycentric(&self, x: [f64; 2]) -> [f64; 3] {
        let p0 = self.points[0];
        let l1 = self.grad[1][0] * (x[0] - p0[0]) + self.grad[1][1] * (x[1] - p0[1]);
        let l2 = self.grad[2][0] * (x[0] - p0[0]) + self.grad[2][1] * (x[1] - p0[1]);
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn point_at(&self, lambda: [f64; 3]) -> [f64; 2] {
        let mut x = [0.0; 2];
        for (l, p) in lambda.iter().zip(&self.points) {
            x[0] += l * p[0];
            x[1] += l * p[1];
        }
        x
    }

    pub fn centroid(&self) -> [f64; 2] {
        self.point_at([1.0 / 3.0; 3])
    }

    fn dot(&self, p: usize, q: usize) -> f64 {
        self.grad[p][0] * self.grad[q][0] + self.grad[p][1] * self.grad[q][1]
    }

    /// Unsigned local basis functions at barycentric point `lambda`.
    pub fn basis(&self, lambda: [f64; 3]) -> [[f64; 2]; 3] {
        let mut out = [[0.0; 2]; 3];
        for (j, n) in out.iter_mut().enumerate() {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            n[0] = lambda[a] * self.grad[b][0] - lambda[b] * self.grad[a][0];
            n[1] = lambda[a] * self.grad[b][1] - lambda[b] * self.grad[a][1];
        }
        out
    }

    /// Unsigned constant curl of each local basis function.
    pub fn basis_curl(&self) -> f64 {
        1.0 / self.area
    }
}

/// Local matrices of one element, with orientation signs applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMatrices {
    pub mass: [[f64; 3]; 3],
    pub stiffness: [[f64; 3]; 3],
    pub kappa_mass: [[C64; 3]; 3],
}

/// Exact mass, curl-curl and κ-weighted mass matrices for a positively
/// oriented triangle with constant κ.
pub fn element_matrices(points: [[f64; 2]; 3], signs: [f64; 3], kappa: C64) -> Result<ElementMatrices, FemError> {
    let g = TriangleGeometry::new(points)?;
    let area = g.area;
    let m = |p: usize, q: usize| if p == q { area / 6.0 } else { area / 12.0 };
    let mut mass = [[0.0; 3]; 3];
    let mut stiffness = [[0.0; 3]; 3];
    let mut kappa_mass = [[C64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        let (a, b) = ((i + 1) % 3, (i + 2) % 3);
        for j in 0..3 {
            let (c, d) = ((j + 1) % 3, (j + 2) % 3);
            let v = m(a, c) * g.dot(b, d) - m(a, d) * g.dot(b, c) - m(b, c) * g.dot(a, d) + m(b, d) * g.dot(a, c);
            let s = signs[i] * signs[j];
            mass[i][j] = s * v;
            stiffness[i][j] = s / area;
            kappa_mass[i][j] = kappa * (s * v);
        }
    }
    Ok(ElementMatrices { mass, stiffness, kappa_mass })
}

/// Symmetric 7-point rule of degree 5 on the reference triangle, as
/// (barycentric point, weight) with weights summing to 1.
pub(crate) fn triangle_rule() -> [([f64; 3], f64); 7] {
    let a1 = 0.059_715_871_789_770;
    let b1 = 0.470_142_064_105_115;
    let a2 = 0.797_426_985_353_087;
    let b2 = 0.101_286_507_323_456;
    let w1 = 0.132_394_152_788_506;
    let w2 = 0.125_939_180_544_827;
    [
        ([1.0 / 3.0; 3], 0.225),
        ([a1, b1, b1], w1),
        ([b1, a1, b1], w1),
        ([b1, b1, a1], w1),
        ([a2, b2, b2], w2),
        ([b2, a2, b2], w2),
        ([b2, b2, a2], w2),
    ]
}

/// Two-point Gauss rule on `[0, 1]` as (parameter, weight).
pub(crate) fn edge_rule() -> [(f64, f64); 2] {
    let d = 0.5 / 3f64.sqrt();
    [(0.5 - d, 0.5), (0.5 + d, 0.5)]
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn reference_stiffness() {
        let e = element_matrices(UNIT, [1.0, -1.0, 1.0], C64::new(1.0, 0.0)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((e.stiffness[i][j].abs() - 2.0).abs() < 1e-15);
            }
        }
        assert_eq!(e.stiffness[0][1], -2.0);
    }

    #[test]
    fn mass_matches_quadrature() {
        let pts = [[0.2, -0.1], [1.3, 0.4], [0.1, 0.9]];
        let e = element_matrices(pts, [1.0; 3], C64::new(0.0, 0.0)).unwrap();
        let g = TriangleGeometry::new(pts).unwrap();
        let mut q = [[0.0; 3]; 3];
        for (lambda, w) in triangle_rule() {
            let n = g.basis(lambda);
            for i in 0..3 {
                for j in 0..3 {
                    q[i][j] += w * g.area * (n[i][0] * n[j][0] + n[i][1] * n[j][1]);
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                assert!((q[i][j] - e.mass[i][j]).abs() < 1e-14, "{i} {j}");
            }
        }
        assert!(e.kappa_mass.iter().flatten().all(|z| *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn local_gradient_in_kernel() {
        let pts = [[0.0, 0.0], [0.7, 0.1], [0.2, 0.5]];
        let signs = [1.0, -1.0, -1.0];
        let e = element_matrices(pts, signs, C64::new(1.0, 1.0)).unwrap();
        // moments of ∇λ_0 along directed local edges (λ_0 differences)
        let lam0 = [1.0, 0.0, 0.0];
        let w: Vec<f64> = (0..3).map(|j| signs[j] * (lam0[(j + 2) % 3] - lam0[(j + 1) % 3])).collect();
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| e.stiffness[i][j] * w[j]).sum();
            assert!(r.abs() < 1e-13);
        }
    }

    #[test]
    fn tangential_moments_are_unit() {
        let g = TriangleGeometry::new([[0.0, 0.0], [2.0, 0.5], [0.3, 1.2]]).unwrap();
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (pa, pb) = (g.points[a], g.points[b]);
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            for k in 0..3 {
                let mut moment = 0.0;
                for (t, w) in edge_rule() {
                    let mut lambda = [0.0; 3];
                    lambda[a] = 1.0 - t;
                    lambda[b] = t;
                    let n = g.basis(lambda)[k];
                    moment += w * (n[0] * d[0] + n[1] * d[1]);
                }
                let expect = if k == j { 1.0 } else { 0.0 };
                assert!((moment - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn degenerate_rejected() {
        assert!(element_matrices([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]], [1.0; 3], C64::new(1.0, 0.0)).is_err());
    }
}
