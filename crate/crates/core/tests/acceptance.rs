//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use maxwell_qr::driver::{
    auto_eta, delta_grid, invariants, sweep_delta, ExtendedProblem, LCurve, Problem, QrSolver, SweepRecord,
    DEFAULT_GRID,
};
use maxwell_qr::edgefem::{assemble, interpolate, l2_hcurl_error};
use maxwell_qr::formulations::QrParams;
use maxwell_qr::mesh::{generate_disc, generate_nested, partition_boundary, PartitionConfig};
use maxwell_qr::par::Exec;
use maxwell_qr::synth::{add_noise, discrete_oracle, plane_wave_data, solve_direct, PlaneWave};
use maxwell_qr::C64;

const SEED: u64 = 42;
const NOISE: f64 = 0.05;
const H_FINE: f64 = 0.05;
const INNER_RADIUS: f64 = 0.75;
const EXEC: Exec = Exec::Parallel;

type Check = Result<(bool, String), String>;
type Criterion = (u32, &'static str, fn() -> Check);

fn kappa(_: [f64; 2]) -> C64 {
    PlaneWave::reference().kappa
}

fn grid() -> Vec<f64> {
    let (lo, hi, n) = DEFAULT_GRID;
    delta_grid(lo, hi, n).unwrap()
}

fn disc_problem(h: f64, config: &PartitionConfig) -> Result<Problem, String> {
    let mesh = generate_disc(1.0, h).map_err(|e| e.to_string())?;
    let partition = partition_boundary(&mesh, config).map_err(|e| e.to_string())?;
    let (data, exact) = plane_wave_data(&PlaneWave::reference(), &mesh, &partition);
    Problem::assemble(mesh, partition, 1.0, kappa, data, Some(exact), EXEC).map_err(|e| e.to_string())
}

fn oracle_problem(h: f64) -> Result<(Problem, Vec<C64>), String> {
    let mesh = generate_disc(1.0, h).map_err(|e| e.to_string())?;
    let partition = partition_boundary(&mesh, &PartitionConfig::G34).map_err(|e| e.to_string())?;
    let forms = assemble(&mesh, &partition, 1.0, kappa, EXEC).map_err(|e| e.to_string())?;
    let (data, exact) = discrete_oracle(&PlaneWave::reference(), &mesh, &forms).map_err(|e| e.to_string())?;
    let p = Problem::new(mesh, partition, forms, data, Some(exact.clone())).map_err(|e| e.to_string())?;
    Ok((p, exact))
}

/// Plain ring problem and its extension through the disc.
fn ring_problems(config: &PartitionConfig, noise: Option<u64>) -> Result<(Problem, ExtendedProblem), String> {
    let nested = generate_nested(INNER_RADIUS, 1.0, H_FINE).map_err(|e| e.to_string())?;
    let partition = partition_boundary(&nested.ring, config).map_err(|e| e.to_string())?;
    let (mut data, exact) = plane_wave_data(&PlaneWave::reference(), &nested.ring, &partition);
    if let Some(seed) = noise {
        data = add_noise(&data, NOISE, seed).map_err(|e| e.to_string())?;
    }
    let ring = Problem::assemble(nested.ring.clone(), partition, 1.0, kappa, data, Some(exact), EXEC)
        .map_err(|e| e.to_string())?;
    let ext = ExtendedProblem::new(ring.clone(), &nested, config, kappa, EXEC).map_err(|e| e.to_string())?;
    Ok((ring, ext))
}

fn sweep<S: QrSolver + ?Sized>(solver: &S, base: QrParams, tie_nu: bool) -> Result<SweepRecord, String> {
    sweep_delta(solver, &base, &grid(), tie_nu, EXEC).map_err(|e| e.to_string())
}

fn min_error(r: &SweepRecord) -> Result<f64, String> {
    r.min_error().ok_or_else(|| "sweep produced no finite error".to_string())
}

fn gammai_at_argmin(r: &SweepRecord) -> Result<f64, String> {
    r.best().map(|(_, m)| m.err_gammai).ok_or_else(|| "sweep produced no finite error".to_string())
}

fn within(limit_s: f64, start: Instant) -> (bool, String) {
    let s = start.elapsed().as_secs_f64();
    (s <= limit_s, format!("{s:.1}s of {limit_s:.0}s"))
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let pw = PlaneWave::reference();
    let mut samples = Vec::new();
    for h in [0.2, 0.1, 0.05] {
        let mesh = generate_disc(1.0, h).map_err(|e| e.to_string())?;
        let partition = partition_boundary(&mesh, &PartitionConfig::G34).map_err(|e| e.to_string())?;
        let forms = assemble(&mesh, &partition, pw.k, kappa, EXEC).map_err(|e| e.to_string())?;
        let u = solve_direct(&forms, &interpolate(&pw, &mesh)).map_err(|e| e.to_string())?;
        let err = l2_hcurl_error(&mesh, &u, &pw).map_err(|e| e.to_string())?;
        samples.push((mesh.h(), err.hcurl()));
    }
    let rates: Vec<f64> = samples.windows(2).map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln()).collect();
    let worst = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let (fast, time) = within(120.0, start);
    let errs: Vec<String> = samples.iter().map(|(h, e)| format!("h={h:.3} err={e:.3e}")).collect();
    Ok((worst >= 0.9 && fast, format!("rates {rates:.3?} (need >= 0.9); {}; {time}", errs.join(", "))))
}

fn criterion_2() -> Check {
    let start = Instant::now();
    let g34 = sweep(&disc_problem(H_FINE, &PartitionConfig::G34)?, QrParams::qr(1.0), false)?;
    let ge37 = sweep(&disc_problem(H_FINE, &PartitionConfig::ge37())?, QrParams::qr(1.0), false)?;
    let (a, b) = (min_error(&g34)?, min_error(&ge37)?);
    let (fast, time) = within(600.0, start);
    let ok = g34.argmin_is_interior() && a <= 5e-2 && b < a && fast;
    Ok((
        ok,
        format!(
            "G34 min L2 {a:.4e} at delta {:e} (interior {}), GE37 min L2 {b:.4e}; {time}",
            g34.argmin_delta().unwrap_or(f64::NAN),
            g34.argmin_is_interior()
        ),
    ))
}

fn criterion_3() -> Check {
    let start = Instant::now();
    let (p, exact) = oracle_problem(0.12)?;
    let n = p.mesh.n_edges();
    if n > 3000 {
        return Err(format!("mesh has {n} edges, more than 3000"));
    }
    let r = invariants::relaxed_estimates(&p, &exact, &[1e-8, 1e-6, 1e-4, 1e-2, 1.0], &[0.1, 1.0, 10.0])
        .map_err(|e| e.to_string())?;
    let (fast, time) = within(300.0, start);
    Ok((r.passed && fast, format!("{n} edges, worst ratio {:.12} (limit {}); {time}", r.worst, r.tolerance)))
}

fn criterion_4() -> Check {
    let start = Instant::now();
    let (p, _) = oracle_problem(0.5)?;
    let n = p.mesh.n_edges();
    if n > 200 {
        return Err(format!("mesh has {n} edges, more than 200"));
    }
    let r = invariants::sparse_dense_agreement(&p).map_err(|e| e.to_string())?;
    let (fast, time) = within(60.0, start);
    Ok((r.passed && fast, format!("{n} edges, worst relative difference {:.3e}; {time}", r.worst)))
}

fn criterion_5() -> Check {
    let (p, _) = oracle_problem(0.2)?;
    let r = invariants::coercivity_identity(&p, 100, SEED).map_err(|e| e.to_string())?;
    Ok((r.passed, format!("worst relative deviation {:.3e} over 100 vectors per method", r.worst)))
}

fn criterion_6() -> Check {
    let p = disc_problem(0.1, &PartitionConfig::G34)?;
    let r = invariants::noise_calibration(&p.data, &[0.01, 0.05, 0.1], SEED).map_err(|e| e.to_string())?;
    Ok((r.passed, format!("worst |measured - p| {:.3e}", r.worst)))
}

fn criterion_7(ring_sweep: &SweepRecord, ring_secs: f64) -> Check {
    let start = Instant::now();
    let mut disc = disc_problem(H_FINE, &PartitionConfig::G34)?;
    disc.data = add_noise(&disc.data, NOISE, SEED).map_err(|e| e.to_string())?;
    let eta = auto_eta(&disc.forms, &disc.data).map_err(|e| e.to_string())?;
    let rec = sweep(&disc, QrParams::rrqr(1.0, eta, 1.0), true)?;
    let disc_err = min_error(&rec)?;
    let ring_gi = gammai_at_argmin(ring_sweep)?;
    let total = start.elapsed().as_secs_f64() + ring_secs;
    let fast = total <= 900.0;
    Ok((
        disc_err <= 1e-1 && ring_gi <= 8e-2 && fast,
        format!(
            "disc G34 min L2 {disc_err:.4e} (eta {eta:.4}, ratio eta/delta {:.3e}); ring GE37 extended Gamma_i {ring_gi:.4e} at delta {:e}; {total:.1}s of 900s",
            rec.eta_delta_ratio().unwrap_or(f64::NAN),
            ring_sweep.argmin_delta().unwrap_or(f64::NAN),
        ),
    ))
}

fn criterion_8() -> Check {
    let (ring, ext) = ring_problems(&PartitionConfig::G34, None)?;
    let plain = sweep(&ring, QrParams::qr(1.0), false)?;
    let extended = sweep(&ext, QrParams::qr(1.0), false)?;
    let (a, b) = (gammai_at_argmin(&plain)?, gammai_at_argmin(&extended)?);
    Ok((a / b >= 10.0, format!("Gamma_i error {a:.4e} -> {b:.4e}, improvement {:.1}x", a / b)))
}

fn criterion_9() -> Check {
    let p = disc_problem(0.1, &PartitionConfig::G34)?;
    let r = invariants::tikhonov_stationarity(&p, 20, SEED).map_err(|e| e.to_string())?;
    Ok((r.passed, format!("worst relative derivative {:.3e} over 20 directions per method", r.worst)))
}

/// δ with the smallest Γi error, where the corner is expected to sit.
fn gammai_argmin(r: &SweepRecord) -> Option<f64> {
    r.points
        .iter()
        .filter_map(|p| p.outcome.as_ref().ok().map(|m| (p.delta, m.err_gammai)))
        .filter(|(_, e)| e.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(d, _)| d)
}

fn criterion_10(ring_sweep: &SweepRecord) -> Check {
    let curve = LCurve::from_sweep(ring_sweep).map_err(|e| e.to_string())?;
    let best = gammai_argmin(ring_sweep).ok_or("no finite Gamma_i error")?;
    let Some(corner) = curve.corner_delta() else {
        return Ok((false, "L-curve is degenerate, no corner".into()));
    };
    let decades = (corner / best).log10().abs();
    Ok((
        decades <= 1.0,
        format!("corner delta {corner:e}, Gamma_i argmin {best:e}, {decades:.2} decades apart (limit 1)"),
    ))
}

fn noisy_ring_sweep() -> Result<SweepRecord, String> {
    let (_, ext) = ring_problems(&PartitionConfig::ge37(), Some(SEED))?;
    let eta = auto_eta(&ext.disc.forms, &ext.disc.data).map_err(|e| e.to_string())?;
    sweep(&ext, QrParams::rrqr(1.0, eta, 1.0), true)
}

fn report(id: u32, name: &str, start: Instant, check: Check) -> bool {
    let secs = start.elapsed().as_secs_f64();
    let (ok, detail) = match check {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    println!("criterion {id:2} {name}: {} ({detail}) [{secs:.1}s]", if ok { "PASS" } else { "FAIL" });
    ok
}

fn main() -> ExitCode {
    let mut all = true;
    let simple: [Criterion; 6] = [
        (1, "direct-problem convergence", criterion_1),
        (2, "QR noiseless replication", criterion_2),
        (3, "exact discrete estimates", criterion_3),
        (4, "oracle equivalence", criterion_4),
        (5, "coercivity identity", criterion_5),
        (6, "noise calibration", criterion_6),
    ];
    for (id, name, f) in simple {
        let t = Instant::now();
        all &= report(id, name, t, f());
    }

    let t = Instant::now();
    let ring = noisy_ring_sweep();
    let ring_secs = t.elapsed().as_secs_f64();
    let t7 = Instant::now();
    let c7 = ring.as_ref().map_err(Clone::clone).and_then(|r| criterion_7(r, ring_secs));
    all &= report(7, "noisy RR-QR replication", t7, c7);

    let t = Instant::now();
    all &= report(8, "extension/restriction improvement", t, criterion_8());
    let t = Instant::now();
    all &= report(9, "Tikhonov stationarity", t, criterion_9());
    let t = Instant::now();
    let c10 = ring.as_ref().map_err(Clone::clone).and_then(criterion_10);
    all &= report(10, "L-curve corner", t, c10);

    if all {
        println!("acceptance: all criteria PASS");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: some criteria FAIL");
        ExitCode::FAILURE
    }
}
