use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::edgefem::{interpolate, AssembledForms, DofKind};
use crate::linalg::solve_complex;
use crate::mesh::{BoundaryPartition, Mesh};
use crate::C64;

use super::{PlaneWave, SynthError};

/// Generator used for noise vectors.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha), standard normal via rand_distr";

/// Origin of a data set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataSource {
    Analytic,
    DiscreteOracle,
    Perturbed,
    File,
}

impl DataSource {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::DiscreteOracle => "discrete-oracle",
            Self::Perturbed => "perturbed",
            Self::File => "file",
        }
    }
}

/// Tangential data on the accessible boundary: `f[i]` is the edge moment of
/// `E·t` and `g[i]` the edge mean of `curl E` on edge `edges[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub edges: Vec<usize>,
    pub f: Vec<C64>,
    pub g: Vec<C64>,
    pub source: DataSource,
    pub noise: f64,
    pub seed: Option<u64>,
}

impl CauchyData {
    /// All-zero data on the given edges.
    pub fn zeros(edges: &[usize]) -> Self {
        let z = vec![C64::new(0.0, 0.0); edges.len()];
        Self { edges: edges.to_vec(), f: z.clone(), g: z, source: DataSource::Analytic, noise: 0.0, seed: None }
    }

    /// `f` scattered into a vector over all `n` edges.
    pub fn f_full(&self, n: usize) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (&e, &v) in self.edges.iter().zip(&self.f) {
            out[e] = v;
        }
        out
    }

    /// Multiplies `f` and `g` by separate real factors.
    pub fn scaled(&self, cf: f64, cg: f64) -> Self {
        let mut out = self.clone();
        out.f.iter_mut().for_each(|z| *z *= cf);
        out.g.iter_mut().for_each(|z| *z *= cg);
        out
    }
}

fn edge_mean_curl(pw: &PlaneWave, mesh: &Mesh, e: usize) -> C64 {
    use crate::edgefem::FieldFunction;
    let (p, q) = mesh.edge_points(e);
    let d = 0.5 / 3f64.sqrt();
    [0.5 - d, 0.5 + d].iter().map(|&s| pw.curl([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]) * 0.5).sum()
}

/// Data of the analytic plane wave on Γ0 and its full interpolant.
pub fn plane_wave_data(pw: &PlaneWave, mesh: &Mesh, partition: &BoundaryPartition) -> (CauchyData, Vec<C64>) {
    let exact = interpolate(pw, mesh);
    let edges = partition.gamma0.clone();
    let f = edges.iter().map(|&e| exact[e]).collect();
    let g = edges.iter().map(|&e| edge_mean_curl(pw, mesh, e)).collect();
    let data = CauchyData { edges, f, g, source: DataSource::Analytic, noise: 0.0, seed: None };
    (data, exact)
}

/// Solves the discrete direct problem with the boundary degrees of freedom
/// of `boundary` (all other entries ignored) imposed strongly.
pub fn solve_direct(forms: &AssembledForms, boundary: &[C64]) -> Result<Vec<C64>, SynthError> {
    let interior = forms.dofs.select(|k| k == DofKind::Interior);
    let fixed = forms.dofs.select(|k| k != DofKind::Interior);
    let (are, aim) = (forms.a_re(), forms.a_im());
    let lift: Vec<C64> = {
        let mut v = vec![C64::new(0.0, 0.0); forms.n()];
        for &e in &fixed {
            v[e] = boundary[e];
        }
        v
    };
    let a_lift = crate::edgefem::apply_complex(&are, &aim, &lift);
    let rhs: Vec<C64> = interior.iter().map(|&e| -a_lift[e]).collect();
    let x = solve_complex(&are.submatrix(&interior, &interior), &aim.submatrix(&interior, &interior), &rhs)?;
    let mut out = lift;
    for (i, &e) in interior.iter().enumerate() {
        out[e] = x[i];
    }
    Ok(out)
}

/// Data lying exactly in the discrete Cauchy set: `E_h` solves the discrete
/// direct problem with the plane wave's boundary moments, `f` is its Γ0
/// trace and `g` is chosen so that `a(E_h, ψ) = ℓ(ψ)` for every discrete `ψ`
/// vanishing on the inaccessible boundary.
pub fn discrete_oracle(
    pw: &PlaneWave,
    mesh: &Mesh,
    forms: &AssembledForms,
) -> Result<(CauchyData, Vec<C64>), SynthError> {
    let boundary = interpolate(pw, mesh);
    let exact = solve_direct(forms, &boundary)?;
    let residual = forms.apply_a(&exact);
    let edges = forms.dofs.select(|k| k == DofKind::Gamma0);
    let f = edges.iter().map(|&e| exact[e]).collect();
    let g = edges.iter().map(|&e| residual[e] * forms.boundary_sign[e]).collect();
    Ok((CauchyData { edges, f, g, source: DataSource::DiscreteOracle, noise: 0.0, seed: None }, exact))
}

fn normal_vector(rng: &mut ChaCha20Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `f^p = f + p‖f‖/‖b_f‖ b_f` and likewise for `g`, with `b_•` having
/// independent standard normal real and imaginary parts.
pub fn add_noise(data: &CauchyData, p: f64, seed: u64) -> Result<CauchyData, SynthError> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(SynthError::InvalidNoise(p));
    }
    if p == 0.0 {
        return Ok(data.clone());
    }
    let (nf, ng) = (norm(&data.f), norm(&data.g));
    if nf == 0.0 {
        return Err(SynthError::ZeroData("f"));
    }
    if ng == 0.0 {
        return Err(SynthError::ZeroData("g"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let bf = normal_vector(&mut rng, data.f.len());
    let bg = normal_vector(&mut rng, data.g.len());
    let (sf, sg) = (p * nf / norm(&bf), p * ng / norm(&bg));
    let f = data.f.iter().zip(&bf).map(|(x, b)| x + b * sf).collect();
    let g = data.g.iter().zip(&bg).map(|(x, b)| x + b * sg).collect();
    Ok(CauchyData { edges: data.edges.clone(), f, g, source: DataSource::Perturbed, noise: p, seed: Some(seed) })
}

/// Writes `nedges p seed` followed by `edge Re_f Im_f Re_g Im_g` lines. A
/// missing seed is written as `-`.
pub fn write_cauchy<W: Write>(data: &CauchyData, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# source {}", data.source.tag())?;
    let seed = data.seed.map_or("-".to_string(), |s| s.to_string());
    writeln!(out, "{} {:?} {}", data.edges.len(), data.noise, seed)?;
    for i in 0..data.edges.len() {
        let (f, g) = (data.f[i], data.g[i]);
        writeln!(out, "{} {:?} {:?} {:?} {:?}", data.edges[i], f.re, f.im, g.re, g.im)?;
    }
    Ok(())
}

pub fn read_cauchy<R: BufRead>(reader: R) -> Result<CauchyData, SynthError> {
    let err = |line: usize, message: &str| SynthError::Parse { line, message: message.to_string() };
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() {
            rows.push((i + 1, body.split_whitespace().map(str::to_string).collect::<Vec<_>>()));
        }
    }
    let mut it = rows.into_iter();
    let (hl, header) = it.next().ok_or_else(|| err(0, "missing header"))?;
    if header.len() != 3 {
        return Err(err(hl, "header must be `nedges p seed`"));
    }
    let n: usize = header[0].parse().map_err(|_| err(hl, "bad edge count"))?;
    let noise: f64 = header[1].parse().map_err(|_| err(hl, "bad noise level"))?;
    let seed = match header[2].as_str() {
        "-" => None,
        s => Some(s.parse::<u64>().map_err(|_| err(hl, "bad seed"))?),
    };
    let mut data = CauchyData {
        edges: Vec::with_capacity(n),
        f: Vec::with_capacity(n),
        g: Vec::with_capacity(n),
        source: if noise > 0.0 { DataSource::Perturbed } else { DataSource::File },
        noise,
        seed,
    };
    for _ in 0..n {
        let (ln, row) = it.next().ok_or_else(|| err(0, "fewer data lines than announced"))?;
        if row.len() != 5 {
            return Err(err(ln, "expected `edge Re_f Im_f Re_g Im_g`"));
        }
        data.edges.push(row[0].parse().map_err(|_| err(ln, "bad edge index"))?);
        let v: Vec<f64> =
            row[1..].iter().map(|t| t.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| err(ln, "bad number"))?;
        data.f.push(C64::new(v[0], v[1]));
        data.g.push(C64::new(v[2], v[3]));
    }
    if let Some((ln, _)) = it.next() {
        return Err(err(ln, "trailing data"));
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edgefem::assemble;
    use crate::mesh::{generate_disc, partition_boundary, PartitionConfig};
    use crate::par::Exec;

    fn setup(h: f64) -> (Mesh, BoundaryPartition, AssembledForms) {
        let m = generate_disc(1.0, h).unwrap();
        let p = partition_boundary(&m, &PartitionConfig::G34).unwrap();
        let f = assemble(&m, &p, 1.0, |_| C64::new(1.0, 1.0), Exec::Sequential).unwrap();
        (m, p, f)
    }

    #[test]
    fn noise_is_calibrated() {
        let (m, p, _) = setup(0.2);
        let (data, _) = plane_wave_data(&PlaneWave::reference(), &m, &p);
        for level in [0.01, 0.05, 0.1] {
            let noisy = add_noise(&data, level, 7).unwrap();
            let df: Vec<C64> = noisy.f.iter().zip(&data.f).map(|(a, b)| a - b).collect();
            let dg: Vec<C64> = noisy.g.iter().zip(&data.g).map(|(a, b)| a - b).collect();
            assert!((norm(&df) / norm(&data.f) - level).abs() < 1e-14);
            assert!((norm(&dg) / norm(&data.g) - level).abs() < 1e-14);
            assert_eq!(noisy, add_noise(&data, level, 7).unwrap());
            assert_ne!(noisy.f, add_noise(&data, level, 8).unwrap().f);
        }
        assert_eq!(add_noise(&data, 0.0, 1).unwrap(), data);
        assert!(add_noise(&CauchyData::zeros(&data.edges), 0.1, 1).is_err());
    }

    #[test]
    fn oracle_is_consistent() {
        let (m, _, forms) = setup(0.25);
        let (data, exact) = discrete_oracle(&PlaneWave::reference(), &m, &forms).unwrap();
        let (_, bg) = crate::edgefem::boundary_trace_terms(&forms, &data.edges, &data.f, &data.g).unwrap();
        let r = forms.apply_a(&exact);
        let scale = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for e in 0..forms.n() {
            if matches!(forms.dofs.kind(e), DofKind::Interior | DofKind::Gamma0) {
                assert!((r[e] - bg[e]).norm() <= 1e-12 * scale, "edge {e}");
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let (m, p, _) = setup(0.3);
        let (data, _) = plane_wave_data(&PlaneWave::reference(), &m, &p);
        let noisy = add_noise(&data, 0.05, 42).unwrap();
        let mut buf = Vec::new();
        write_cauchy(&noisy, &mut buf).unwrap();
        let back = read_cauchy(&buf[..]).unwrap();
        assert_eq!(back, noisy);
        assert!(read_cauchy("2 0 -\n1 0 0 0 0\n".as_bytes()).is_err());
    }
}
