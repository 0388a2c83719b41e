use super::*;
use crate::formulations::Variant;
use crate::mesh::{generate_disc, generate_nested, partition_boundary, PartitionConfig};
use crate::synth::{add_noise, plane_wave_data, PlaneWave};

fn kappa(_: [f64; 2]) -> C64 {
    C64::new(1.0, 1.0)
}

fn disc_problem(h: f64) -> Problem {
    let mesh = generate_disc(1.0, h).unwrap();
    let partition = partition_boundary(&mesh, &PartitionConfig::G34).unwrap();
    let (data, exact) = plane_wave_data(&PlaneWave::reference(), &mesh, &partition);
    Problem::assemble(mesh, partition, 1.0, kappa, data, Some(exact), Exec::Sequential).unwrap()
}

#[test]
fn zero_data_gives_unit_errors() {
    let p = disc_problem(0.3);
    let zero = p.with_data(CauchyData::zeros(&p.data.edges));
    for params in [QrParams::qr(1e-4), QrParams::rqr(1e-4, 1.0), QrParams::rrqr(1e-4, 1.0, 1e-4)] {
        let s = solve_once(&zero, &params).unwrap();
        let m = s.metrics;
        assert_eq!((m.norm_e, m.norm_f), (0.0, 0.0));
        assert_eq!((m.err_l2_omega, m.err_gamma0, m.err_gamma1), (1.0, 1.0, 1.0));
        assert!(m.err_gammai.is_nan());
    }
}

#[test]
fn metrics_are_recomputable() {
    let p = disc_problem(0.3);
    let s = solve_once(&p, &QrParams::rqr(1e-5, 1.0)).unwrap();
    let again = compute_metrics(&p.forms, &s.e, &s.f, p.reference.as_deref());
    // NaN-aware comparison: Γi is empty on the disc
    assert_eq!(format!("{again:?}"), format!("{:?}", s.metrics));
}

#[test]
fn grid_construction_and_validation() {
    let g = delta_grid(1e-12, 1e-2, 25).unwrap();
    assert_eq!(g.len(), 25);
    assert_eq!((g[0], g[24]), (1e-12, 1e-2));
    assert!(g.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(delta_grid(1e-3, 1e-1, 1).unwrap(), vec![1e-3]);
    assert!(delta_grid(0.0, 1.0, 3).is_err());

    let p = disc_problem(0.5);
    let base = QrParams::qr(1.0);
    for bad in [vec![], vec![1e-3, 1e-3], vec![1e-4, 1e-3, 1e-1], vec![1e-3, -1.0]] {
        assert!(matches!(sweep_delta(&p, &base, &bad, false, Exec::Sequential), Err(DriverError::InvalidGrid(_))));
    }
}

#[test]
fn single_point_sweep() {
    let p = disc_problem(0.5);
    let r = sweep_delta(&p, &QrParams::qr(1.0), &[1e-4], false, Exec::Sequential).unwrap();
    assert_eq!(r.points.len(), 1);
    assert_eq!(r.argmin_delta(), Some(1e-4));
}

#[test]
fn sweep_is_u_shaped_and_f_decreases() {
    let p = disc_problem(0.1);
    let grid = delta_grid(1e-12, 1e-2, 11).unwrap();
    let r = sweep_delta(&p, &QrParams::qr(1.0), &grid, false, Exec::Parallel).unwrap();
    assert!(r.argmin_is_interior(), "argmin {:?}", r.argmin);
    let norms: Vec<f64> = r.points.iter().map(|p| p.outcome.as_ref().unwrap().norm_f).collect();
    assert!(norms.windows(2).all(|w| w[0] <= w[1]), "{norms:?}");
    let seq = sweep_delta(&p, &QrParams::qr(1.0), &grid, false, Exec::Sequential).unwrap();
    let errs = |r: &SweepRecord| r.points.iter().map(|p| p.outcome.clone().unwrap().err_l2_omega).collect::<Vec<_>>();
    assert_eq!(errs(&r), errs(&seq));
}

#[test]
fn csv_layout_and_reproducibility() {
    let p = disc_problem(0.5);
    let grid = delta_grid(1e-6, 1e-2, 3).unwrap();
    let run = || {
        let r = sweep_delta(&p, &QrParams::rrqr(1.0, 2.0, 1.0), &grid, true, Exec::Parallel).unwrap();
        let mut out = Vec::new();
        r.write_csv(&mut out, &["test".into()], false).unwrap();
        String::from_utf8(out).unwrap()
    };
    let a = run();
    assert_eq!(a, run());
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "# test");
    assert_eq!(lines[1], CSV_HEADER);
    assert_eq!(lines.len(), 5);
    let fields: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(fields.len(), 9);
    // nu follows delta
    assert_eq!(fields[0], fields[7]);
    assert_eq!(fields[6], "2e0");
}

#[test]
fn auto_eta_scaling_and_zero_data() {
    let p = disc_problem(0.3);
    let eta = auto_eta(&p.forms, &p.data).unwrap();
    assert!(eta > 0.0);
    let eta_g = auto_eta(&p.forms, &p.data.scaled(1.0, 3.0)).unwrap();
    let eta_f = auto_eta(&p.forms, &p.data.scaled(4.0, 1.0)).unwrap();
    assert!((eta_g / eta - 3.0).abs() < 1e-12);
    assert!((eta_f / eta - 0.25).abs() < 1e-12);
    assert!(matches!(auto_eta(&p.forms, &p.data.scaled(1.0, 0.0)), Err(DriverError::AutoEta(_))));
    assert!(matches!(auto_eta(&p.forms, &p.data.scaled(0.0, 1.0)), Err(DriverError::AutoEta(_))));
}

#[test]
fn auto_eta_is_competitive_on_noisy_disc() {
    let p = disc_problem(0.2);
    let noisy = p.with_data(add_noise(&p.data, 0.05, 7).unwrap());
    let eta = auto_eta(&noisy.forms, &noisy.data).unwrap();
    let grid = delta_grid(1e-8, 1e-1, 8).unwrap();
    let best = |eta: f64| {
        let r = sweep_delta(&noisy, &QrParams::rrqr(1.0, eta, 1.0), &grid, true, Exec::Parallel).unwrap();
        r.min_error().unwrap()
    };
    let auto = best(eta);
    let grid_best = [0.01, 0.1, 1.0, 10.0, 100.0].iter().map(|&e| best(e * eta)).fold(f64::INFINITY, f64::min);
    assert!(auto <= 2.0 * grid_best, "auto {auto} grid {grid_best}");
}

fn ring_problems(config: &PartitionConfig, h: f64) -> (Problem, ExtendedProblem) {
    let nested = generate_nested(0.5, 1.0, h).unwrap();
    let partition = partition_boundary(&nested.ring, config).unwrap();
    let (data, exact) = plane_wave_data(&PlaneWave::reference(), &nested.ring, &partition);
    let ring =
        Problem::assemble(nested.ring.clone(), partition, 1.0, kappa, data, Some(exact), Exec::Sequential).unwrap();
    let ext = ExtendedProblem::new(ring.clone(), &nested, config, kappa, Exec::Sequential).unwrap();
    (ring, ext)
}

#[test]
fn restriction_is_extraction() {
    let (ring, ext) = ring_problems(&PartitionConfig::G34, 0.3);
    let disc_vec: Vec<C64> = (0..ext.disc.forms.n()).map(|i| C64::new(i as f64, -(i as f64))).collect();
    let r = ext.restrict(&disc_vec);
    assert_eq!(r.len(), ring.forms.n());
    // data edges map onto the disc data edges
    for (i, &e) in ring.data.edges.iter().enumerate() {
        assert_eq!(r[e], disc_vec[ext.disc.data.edges[i]]);
    }
}

#[test]
fn extension_improves_inner_trace() {
    let (ring, ext) = ring_problems(&PartitionConfig::G34, 0.1);
    let grid = delta_grid(1e-10, 1e-2, 9).unwrap();
    let gammai = |r: &SweepRecord| r.best().unwrap().1.err_gammai;
    let plain = sweep_delta(&ring, &QrParams::qr(1.0), &grid, false, Exec::Parallel).unwrap();
    let extended = sweep_delta(&ext, &QrParams::qr(1.0), &grid, false, Exec::Parallel).unwrap();
    assert!(gammai(&plain) > 3.0 * gammai(&extended), "{} vs {}", gammai(&plain), gammai(&extended));
}

#[test]
fn extension_rejects_foreign_ring() {
    let nested = generate_nested(0.5, 1.0, 0.3).unwrap();
    let other = generate_nested(0.5, 1.0, 0.25).unwrap();
    let partition = partition_boundary(&other.ring, &PartitionConfig::G34).unwrap();
    let (data, _) = plane_wave_data(&PlaneWave::reference(), &other.ring, &partition);
    let ring = Problem::assemble(other.ring.clone(), partition, 1.0, kappa, data, None, Exec::Sequential).unwrap();
    assert!(matches!(
        ExtendedProblem::new(ring, &nested, &PartitionConfig::G34, kappa, Exec::Sequential),
        Err(DriverError::NotNested(_))
    ));
}

#[test]
fn tikhonov_stationary_for_all_variants() {
    let p = disc_problem(0.3);
    for params in [QrParams::qr(1e-3), QrParams::rqr(1e-3, 2.0), QrParams::rrqr(1e-3, 2.0, 1e-3)] {
        let s = solve_once(&p, &params).unwrap();
        let check = tikhonov_gradient_check(&s, &p.forms, &p.data, 20, 3).unwrap();
        assert!(check.max_relative <= 1e-6, "{:?}: {}", params.variant, check.max_relative);
    }
}

#[test]
fn tikhonov_perturbed_point_has_positive_slope() {
    let p = disc_problem(0.3);
    let params = QrParams::rqr(1e-3, 2.0);
    let s = solve_once(&p, &params).unwrap();
    let j = TikhonovFunctional::new(&p.forms, &p.data, &params).unwrap();
    let mut rng = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::seed_from_u64(5);
    let d = j.random_direction(&mut rng);
    let scale = (j.quadratic(&s.e).unwrap() / j.quadratic(&d).unwrap()).sqrt();
    let d: Vec<C64> = d.iter().map(|z| z * scale).collect();
    let moved: Vec<C64> = s.e.iter().zip(&d).map(|(x, y)| x + y * 0.1).collect();
    let slope = j.directional_derivative(&moved, &d, 1e-3).unwrap();
    // J is quadratic, so the slope is exactly 0.1 Q(d, d)
    let expect = 0.1 * j.quadratic(&d).unwrap();
    assert!(slope > 0.0 && (slope - expect).abs() <= 1e-6 * expect);
}

#[test]
fn tikhonov_cost_at_zero_is_independent_of_delta() {
    let p = disc_problem(0.3);
    let zero = vec![C64::new(0.0, 0.0); p.forms.n()];
    let a = TikhonovFunctional::new(&p.forms, &p.data, &QrParams::qr(1e-6)).unwrap().cost(&zero).unwrap();
    let b = TikhonovFunctional::new(&p.forms, &p.data, &QrParams::qr(1.0)).unwrap().cost(&zero).unwrap();
    assert!(a > 0.0);
    assert!((a - b).abs() <= 1e-12 * a);
    assert_eq!(QrParams::qr(1.0).variant, Variant::Qr);
}

#[test]
fn invariant_suite_passes_on_coarse_meshes() {
    use crate::edgefem::assemble;
    use crate::synth::discrete_oracle;
    let small = disc_problem(0.5);
    assert!(small.mesh.n_edges() <= 200);
    let checks = [
        invariants::sparse_dense_agreement(&small).unwrap(),
        invariants::coercivity_identity(&small, 20, 1).unwrap(),
        invariants::noise_calibration(&small.data, &[0.01, 0.05, 0.1], 1).unwrap(),
        invariants::tikhonov_stationarity(&small, 5, 1).unwrap(),
    ];
    for c in &checks {
        assert!(c.passed, "{c:?}");
    }
    let mesh = generate_disc(1.0, 0.3).unwrap();
    let partition = partition_boundary(&mesh, &PartitionConfig::G34).unwrap();
    let forms = assemble(&mesh, &partition, 1.0, kappa, Exec::Sequential).unwrap();
    let (data, exact) = discrete_oracle(&PlaneWave::reference(), &mesh, &forms).unwrap();
    let p = Problem::new(mesh, partition, forms, data, Some(exact.clone())).unwrap();
    let est = invariants::relaxed_estimates(&p, &exact, &[1e-6, 1e-2, 1.0], &[0.1, 10.0]).unwrap();
    assert!(est.passed, "{est:?}");
}
