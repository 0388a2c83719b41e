use proptest::prelude::*;

use maxwell_qr::driver::delta_grid;
use maxwell_qr::linalg::{sparse_lu_solve, sparse_lu_solve_complex, TripletBuilder};
use maxwell_qr::mesh::{generate_disc, generate_ring, partition_boundary, PartitionConfig};
use maxwell_qr::synth::{add_noise, plane_wave_data, PlaneWave};
use maxwell_qr::C64;

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn disc_meshes_are_valid(h in 0.12f64..0.6) {
        let m = generate_disc(1.0, h).unwrap();
        prop_assert_eq!(m.euler_characteristic(), 1);
        prop_assert!(m.boundary_is_closed());
        prop_assert!(m.h() <= 1.5 * h);
        let area: f64 = (0..m.n_triangles()).map(|t| m.triangle_area(t)).sum();
        prop_assert!(area > 0.0 && area < std::f64::consts::PI);
    }

    #[test]
    fn partitions_cover_the_boundary(h in 0.1f64..0.4, inner in 0.3f64..0.8) {
        let m = generate_ring(inner, 1.0, h.min(0.5 * (1.0 - inner))).unwrap();
        for cfg in [PartitionConfig::G34, PartitionConfig::ge37(), PartitionConfig::GExt] {
            let p = partition_boundary(&m, &cfg).unwrap();
            let mut all: Vec<usize> = p.gamma0.iter().chain(&p.gamma1).chain(&p.gammai).copied().collect();
            all.sort_unstable();
            let mut boundary = m.boundary_edges().to_vec();
            boundary.sort_unstable();
            prop_assert_eq!(all, boundary);
            prop_assert!(!p.gamma0.is_empty() && !p.gammai.is_empty());
        }
    }

    #[test]
    fn noise_hits_the_requested_level(p in 0.0f64..0.5, seed in any::<u64>()) {
        let m = generate_disc(1.0, 0.3).unwrap();
        let part = partition_boundary(&m, &PartitionConfig::G34).unwrap();
        let (data, _) = plane_wave_data(&PlaneWave::reference(), &m, &part);
        let noisy = add_noise(&data, p, seed).unwrap();
        let df: Vec<C64> = noisy.f.iter().zip(&data.f).map(|(a, b)| a - b).collect();
        let dg: Vec<C64> = noisy.g.iter().zip(&data.g).map(|(a, b)| a - b).collect();
        prop_assert!((norm(&df) / norm(&data.f) - p).abs() < 1e-13);
        prop_assert!((norm(&dg) / norm(&data.g) - p).abs() < 1e-13);
        prop_assert_eq!(noisy, add_noise(&data, p, seed).unwrap());
    }

    #[test]
    fn grids_are_geometric(lo_exp in -14i32..-2, span in 1i32..10, n in 2usize..40) {
        let (lo, hi) = (10f64.powi(lo_exp), 10f64.powi(lo_exp + span));
        let g = delta_grid(lo, hi, n).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!((g[0], g[n - 1]), (lo, hi));
        let r = g[1] / g[0];
        for w in g.windows(2) {
            prop_assert!(((w[1] / w[0]) / r - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sparse_lu_solves_random_systems(
        n in 5usize..60,
        entries in prop::collection::vec((0usize..60, 0usize..60, -1.0f64..1.0, -1.0f64..1.0), 0..300),
        rhs in prop::collection::vec(-1.0f64..1.0, 60),
    ) {
        let (mut re, mut im) = (TripletBuilder::new(n, n), TripletBuilder::new(n, n));
        // scaled permutation with zero diagonal on the first half, so pivoting
        // is exercised; the perturbation keeps every row dominated by the 4
        for i in 0..n {
            let j = if i < 2 * (n / 4) { i ^ 1 } else { i };
            re.push(i, j, 4.0);
        }
        let scale = 1.0 / (entries.len() + 1) as f64;
        for &(i, j, a, b) in &entries {
            re.push(i % n, j % n, scale * a);
            im.push(i % n, j % n, scale * b);
        }
        let (re, im) = (re.build(), im.build());
        let b = &rhs[..n];
        let x = sparse_lu_solve(&re, b).unwrap();
        let r: f64 = re.mul_vec(&x).iter().zip(b).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
        prop_assert!(r <= 1e-10 * (1.0 + b.iter().map(|v| v * v).sum::<f64>().sqrt()));

        let bc: Vec<C64> = b.iter().enumerate().map(|(i, &v)| C64::new(v, rhs[(i + 7) % 60])).collect();
        let z = sparse_lu_solve_complex(&re, &im, &bc).unwrap();
        let zr: Vec<f64> = z.iter().map(|c| c.re).collect();
        let zi: Vec<f64> = z.iter().map(|c| c.im).collect();
        let (rr, ri, ir, ii) = (re.mul_vec(&zr), re.mul_vec(&zi), im.mul_vec(&zr), im.mul_vec(&zi));
        let res: f64 = (0..n)
            .map(|k| (C64::new(rr[k] - ii[k], ri[k] + ir[k]) - bc[k]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        prop_assert!(res <= 1e-10 * (1.0 + norm(&bc)));
    }
}
