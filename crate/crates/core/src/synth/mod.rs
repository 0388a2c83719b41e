//! Reference fields, Cauchy data and noise.

mod data;

use crate::edgefem::FieldFunction;
use crate::C64;

pub use data::{
    add_noise, discrete_oracle, plane_wave_data, read_cauchy, solve_direct, write_cauchy, CauchyData, DataSource,
    RNG_NAME,
};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("relative noise is undefined for zero {0} data")]
    ZeroData(&'static str),
    #[error("noise level must be finite and nonnegative, got {0}")]
    InvalidNoise(f64),
    #[error("invalid plane wave: {0}")]
    InvalidWave(String),
    #[error("discrete direct problem failed (resonant frequency?): {0}")]
    DirectSolve(#[from] crate::linalg::LinalgError),
    #[error(transparent)]
    Fem(#[from] crate::edgefem::FemError),
    #[error("cauchy data parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `E(x) = η⊥ exp(ik√κ η·x)` with `η⊥ = (−η₂, η₁)`, which solves
/// `curl curl E − k²κ E = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub direction: [f64; 2],
    pub k: f64,
    pub kappa: C64,
}

impl PlaneWave {
    pub fn new(direction: [f64; 2], k: f64, kappa: C64) -> Result<Self, SynthError> {
        let norm = direction[0].hypot(direction[1]);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(SynthError::InvalidWave(format!("direction must be a unit vector, |η| = {norm}")));
        }
        if !(kappa.re > 0.0) {
            return Err(SynthError::InvalidWave(format!("Re κ must be positive, κ = {kappa}")));
        }
        if !k.is_finite() {
            return Err(SynthError::InvalidWave(format!("k must be finite, got {k}")));
        }
        Ok(Self { direction, k, kappa })
    }

    /// The default reference wave: `η = (1, 0)`, `k = 1`, `κ = 1 + i`.
    pub fn reference() -> Self {
        Self { direction: [1.0, 0.0], k: 1.0, kappa: C64::new(1.0, 1.0) }
    }

    /// `ik√κ` with the principal square root.
    pub fn exponent(&self) -> C64 {
        C64::new(0.0, self.k) * self.kappa.sqrt()
    }

    fn phase(&self, x: [f64; 2]) -> C64 {
        (self.exponent() * (self.direction[0] * x[0] + self.direction[1] * x[1])).exp()
    }

    /// `curl curl E − k²κ E` evaluated from closed-form second derivatives.
    pub fn pde_residual(&self, x: [f64; 2]) -> [C64; 2] {
        let s = self.exponent();
        let e = self.value(x);
        let [n1, n2] = self.direction;
        // curl E = s e^{...}, so curl curl E = (∂₂, −∂₁)(s e^{...}) = s² (n₂, −n₁) e^{...}
        let ph = self.phase(x);
        let cc = [s * s * n2 * ph, -(s * s) * n1 * ph];
        let k2k = self.kappa * (self.k * self.k);
        [cc[0] - k2k * e[0], cc[1] - k2k * e[1]]
    }
}

impl FieldFunction for PlaneWave {
    fn value(&self, x: [f64; 2]) -> [C64; 2] {
        let ph = self.phase(x);
        [ph * -self.direction[1], ph * self.direction[0]]
    }

    fn curl(&self, x: [f64; 2]) -> C64 {
        self.exponent() * self.phase(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn curl_at_origin() {
        let pw = PlaneWave::reference();
        let expect = C64::new(0.0, 1.0) * C64::new(1.0, 1.0).sqrt();
        assert!((pw.curl([0.0, 0.0]) - expect).norm() < 1e-15);
    }

    #[test]
    fn pde_residual_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dir in [[1.0, 0.0], [0.6, 0.8]] {
            let pw = PlaneWave::new(dir, 1.3, C64::new(1.0, 1.0)).unwrap();
            for _ in 0..100 {
                let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
                let r = pw.pde_residual(x);
                assert!(r[0].norm() + r[1].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn curl_matches_finite_difference() {
        let pw = PlaneWave::new([0.6, 0.8], 1.0, C64::new(1.0, 1.0)).unwrap();
        let x = [0.3, -0.2];
        let h = 1e-6;
        let d1e2 = (pw.value([x[0] + h, x[1]])[1] - pw.value([x[0] - h, x[1]])[1]) / (2.0 * h);
        let d2e1 = (pw.value([x[0], x[1] + h])[0] - pw.value([x[0], x[1] - h])[0]) / (2.0 * h);
        assert!((d1e2 - d2e1 - pw.curl(x)).norm() < 1e-8);
    }

    #[test]
    fn rotation_symmetry() {
        let a = PlaneWave::new([1.0, 0.0], 1.0, C64::new(1.0, 1.0)).unwrap();
        let b = PlaneWave::new([0.0, 1.0], 1.0, C64::new(1.0, 1.0)).unwrap();
        let x = [0.3, 0.4];
        let rx = [-x[1], x[0]];
        let (va, vb) = (a.value(x), b.value(rx));
        // rotating the field by 90° maps one onto the other
        assert!((vb[0] - (-va[1])).norm() < 1e-15 && (vb[1] - va[0]).norm() < 1e-15);
        assert!((a.curl(x) - b.curl(rx)).norm() < 1e-15);
    }

    #[test]
    fn invalid_waves() {
        assert!(PlaneWave::new([1.0, 1.0], 1.0, C64::new(1.0, 0.0)).is_err());
        assert!(PlaneWave::new([1.0, 0.0], 1.0, C64::new(-1.0, 1.0)).is_err());
    }
}
