use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::edgefem::{boundary_trace_terms, AssembledForms, DofKind};
use crate::formulations::{norm_matrices, QrParams, Variant};
use crate::linalg::{SparseLu, SparseMatrix};
use crate::synth::CauchyData;
use crate::C64;

use super::{hermitian_form, DriverError, QrSolution};

/// Relative step of the central differences.
const FD_STEP: f64 = 1e-5;

/// The cost whose minimizer is the method's solution:
///
/// ```text
/// J(v) = ½‖Av − G‖²_H + ½ vᴴ P v − Re(cᴴ v) + const
/// ```
///
/// where `‖Av − G‖_H` is the H-norm of the Riesz representative of the
/// residual on the test space, `P` the first inner-product matrix and `c` the
/// Γ0 load (zero for QR, whose admissible directions vanish on Γ0).
pub struct TikhonovFunctional<'a> {
    forms: &'a AssembledForms,
    p: SparseMatrix,
    h: SparseMatrix,
    h_lu: SparseLu,
    test: Vec<usize>,
    admissible: Vec<usize>,
    b_g: Vec<C64>,
    c: Vec<C64>,
    constant: f64,
}

impl<'a> TikhonovFunctional<'a> {
    pub fn new(forms: &'a AssembledForms, data: &CauchyData, params: &QrParams) -> Result<Self, DriverError> {
        params.validate()?;
        let (b_f, b_g) = boundary_trace_terms(forms, &data.edges, &data.f, &data.g)?;
        let (p, h_full) = norm_matrices(forms, params);
        let test = forms.dofs.select(|k| matches!(k, DofKind::Interior | DofKind::Gamma0));
        let h = h_full.submatrix(&test, &test);
        let h_lu = SparseLu::factorize(&h)?;
        let (admissible, c, constant) = if params.variant == Variant::Qr {
            (forms.dofs.select(|k| k != DofKind::Gamma0), vec![C64::new(0.0, 0.0); forms.n()], 0.0)
        } else {
            let eta2 = params.eta * params.eta;
            let constant = 0.5 * eta2 * hermitian_form(&forms.b_gamma0, &data.f_full(forms.n()));
            ((0..forms.n()).collect(), b_f.iter().map(|z| z * eta2).collect(), constant)
        };
        Ok(Self { forms, p, h, h_lu, test, admissible, b_g, c, constant })
    }

    /// Edges along which `v` may vary.
    pub fn admissible(&self) -> &[usize] {
        &self.admissible
    }

    fn h_inv_form(&self, r: &[C64]) -> Result<f64, DriverError> {
        let re: Vec<f64> = r.iter().map(|z| z.re).collect();
        let im: Vec<f64> = r.iter().map(|z| z.im).collect();
        let (sr, _) = self.h_lu.solve_refined(&self.h, &re)?;
        let (si, _) = self.h_lu.solve_refined(&self.h, &im)?;
        Ok(re.iter().zip(&sr).map(|(a, b)| a * b).sum::<f64>() + im.iter().zip(&si).map(|(a, b)| a * b).sum::<f64>())
    }

    fn residual(&self, v: &[C64], with_data: bool) -> Vec<C64> {
        let av = self.forms.apply_a(v);
        self.test.iter().map(|&e| if with_data { av[e] - self.b_g[e] } else { av[e] }).collect()
    }

    pub fn cost(&self, v: &[C64]) -> Result<f64, DriverError> {
        let misfit = self.h_inv_form(&self.residual(v, true))?;
        let load: f64 = self.c.iter().zip(v).map(|(c, x)| (c.conj() * x).re).sum();
        Ok(0.5 * misfit + 0.5 * hermitian_form(&self.p, v) - load + self.constant)
    }

    /// The Hessian form `Q(d, d)`, twice the quadratic part of `J`.
    pub fn quadratic(&self, d: &[C64]) -> Result<f64, DriverError> {
        Ok(self.h_inv_form(&self.residual(d, false))? + hermitian_form(&self.p, d))
    }

    /// Central difference of `J` at `v` along `d` with step `t`.
    pub fn directional_derivative(&self, v: &[C64], d: &[C64], t: f64) -> Result<f64, DriverError> {
        let shift = |s: f64| v.iter().zip(d).map(|(x, y)| x + y * s).collect::<Vec<_>>();
        Ok((self.cost(&shift(t))? - self.cost(&shift(-t))?) / (2.0 * t))
    }

    /// Random complex direction supported on the admissible edges.
    pub fn random_direction(&self, rng: &mut ChaCha20Rng) -> Vec<C64> {
        let mut d = vec![C64::new(0.0, 0.0); self.forms.n()];
        for &e in &self.admissible {
            let (re, im): (f64, f64) = (StandardNormal.sample(rng), StandardNormal.sample(rng));
            d[e] = C64::new(re, im);
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TikhonovCheck {
    /// `max |J'(E) d| / sqrt(Q(d, d) Q(E, E))` over the directions.
    pub max_relative: f64,
    pub cost: f64,
    pub directions: usize,
}

/// Finite-difference stationarity of the cost at a computed solution.
pub fn tikhonov_gradient_check(
    solution: &QrSolution,
    forms: &AssembledForms,
    data: &CauchyData,
    n_directions: usize,
    seed: u64,
) -> Result<TikhonovCheck, DriverError> {
    let j = TikhonovFunctional::new(forms, data, &solution.params)?;
    let e = &solution.e;
    let q_e = j.quadratic(e)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut max_relative: f64 = 0.0;
    for _ in 0..n_directions {
        let d = j.random_direction(&mut rng);
        let q_d = j.quadratic(&d)?;
        let scale = (q_d * q_e).sqrt();
        if scale == 0.0 {
            continue;
        }
        let t = FD_STEP * (q_e / q_d).sqrt();
        let deriv = j.directional_derivative(e, &d, t)?;
        max_relative = max_relative.max(deriv.abs() / scale);
    }
    Ok(TikhonovCheck { max_relative, cost: j.cost(e)?, directions: n_directions })
}
