use std::fs::File;
use std::io::{BufReader, Write};

use log::info;
use maxwell_qr::driver::{
    auto_eta, invariants, invariants::InvariantResult, sweep_delta, ExtendedProblem, LCurve, Problem, QrSolver,
    SweepPoint, SweepRecord,
};
use maxwell_qr::formulations::Variant;
use maxwell_qr::mesh::{
    generate_disc, generate_nested, generate_ring, partition_boundary, write_mesh, BoundaryPart, BoundaryPartition,
    Mesh, NestedMeshes,
};
use maxwell_qr::par::Exec;
use maxwell_qr::synth::{
    add_noise, discrete_oracle, plane_wave_data, read_cauchy, write_cauchy, CauchyData, PlaneWave,
};
use maxwell_qr::C64;

use crate::config::{DataSource, EtaRule, Experiment, Shape};
use crate::error::CliError;
use crate::report::{header, svg_field, svg_loglog, OutDir};

pub struct Context {
    pub exp: Experiment,
    pub seed: Option<u64>,
    pub exec: Exec,
    pub out: OutDir,
    pub command: &'static str,
}

impl Context {
    fn header(&self) -> Vec<String> {
        header(self.command, &self.exp.hash, self.seed)
    }
}

struct Setup {
    problem: Problem,
    extended: Option<ExtendedProblem>,
}

impl Setup {
    /// The problem actually solved: the disc when extending, otherwise the
    /// configured domain.
    fn solve_domain(&self) -> &Problem {
        self.extended.as_ref().map_or(&self.problem, |x| &x.disc)
    }

    fn solver(&self) -> &dyn QrSolver {
        match &self.extended {
            Some(x) => x,
            None => &self.problem,
        }
    }
}

fn build_mesh(exp: &Experiment, nested: bool) -> Result<(Mesh, Option<NestedMeshes>), CliError> {
    match exp.shape {
        Shape::Disc => Ok((generate_disc(exp.radius, exp.h)?, None)),
        Shape::Ring if nested => {
            let n = generate_nested(exp.inner_radius, exp.radius, exp.h)?;
            Ok((n.ring.clone(), Some(n)))
        }
        Shape::Ring => Ok((generate_ring(exp.inner_radius, exp.radius, exp.h)?, None)),
    }
}

fn load_data(
    exp: &Experiment,
    mesh: &Mesh,
    partition: &BoundaryPartition,
    problem_forms: impl FnOnce() -> Result<maxwell_qr::edgefem::AssembledForms, CliError>,
) -> Result<(CauchyData, Option<Vec<C64>>, Option<maxwell_qr::edgefem::AssembledForms>), CliError> {
    match &exp.source {
        DataSource::PlaneWave { direction } => {
            let pw = PlaneWave::new(*direction, exp.k, exp.kappa)?;
            let (d, exact) = plane_wave_data(&pw, mesh, partition);
            Ok((d, Some(exact), None))
        }
        DataSource::DiscreteOracle { direction } => {
            let pw = PlaneWave::new(*direction, exp.k, exp.kappa)?;
            let forms = problem_forms()?;
            let (d, exact) = discrete_oracle(&pw, mesh, &forms)?;
            Ok((d, Some(exact), Some(forms)))
        }
        DataSource::File(path) => {
            let file = File::open(path)
                .map_err(|e| CliError::Config(format!("cannot open data file {}: {e}", path.display())))?;
            let d = read_cauchy(BufReader::new(file))?;
            if let Some(&e) = d.edges.iter().find(|&&e| partition.part_of(e) != Some(BoundaryPart::Gamma0)) {
                return Err(CliError::Config(format!("data file lists edge {e}, which is not an accessible edge")));
            }
            Ok((d, None, None))
        }
    }
}

fn setup(ctx: &Context, with_extension: bool) -> Result<Setup, CliError> {
    let exp = &ctx.exp;
    let (mesh, nested) = build_mesh(exp, with_extension)?;
    let partition = partition_boundary(&mesh, &exp.partition)?;
    let kappa = exp.kappa;
    let assemble = || {
        maxwell_qr::edgefem::assemble(&mesh, &partition, exp.k, move |_| kappa, ctx.exec)
            .map_err(|e| CliError::from(maxwell_qr::driver::DriverError::from(e)))
    };
    let (mut data, reference, forms) = load_data(exp, &mesh, &partition, assemble)?;
    if exp.noise > 0.0 {
        let seed = ctx.seed.ok_or_else(|| CliError::Config("data.noise > 0 needs --seed".into()))?;
        data = add_noise(&data, exp.noise, seed)?;
    }
    let problem = match forms {
        Some(forms) => Problem::new(mesh, partition, forms, data, reference)?,
        None => Problem::assemble(mesh, partition, exp.k, move |_| kappa, data, reference, ctx.exec)?,
    };
    let extended = match nested {
        Some(n) => Some(ExtendedProblem::new(problem.clone(), &n, &exp.partition, move |_| kappa, ctx.exec)?),
        None => None,
    };
    Ok(Setup { problem, extended })
}

fn resolve_eta(exp: &Experiment, problem: &Problem) -> Result<f64, CliError> {
    match (exp.variant, exp.eta) {
        (Variant::Qr, _) => Ok(0.0),
        (_, EtaRule::Fixed(v)) => Ok(v),
        (_, EtaRule::Auto) => {
            let eta = auto_eta(&problem.forms, &problem.data)?;
            info!("automatic eta = {eta:e}");
            Ok(eta)
        }
    }
}

fn sweep(ctx: &Context, solver: &dyn QrSolver, eta: f64) -> Result<SweepRecord, CliError> {
    let exp = &ctx.exp;
    let base = exp.params(exp.grid[0], eta);
    info!("sweeping {} values of delta with {}", exp.grid.len(), exp.variant.name());
    Ok(sweep_delta(solver, &base, &exp.grid, exp.nu_tied(), ctx.exec)?)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:e}"))
}

fn part_name(p: BoundaryPart) -> &'static str {
    match p {
        BoundaryPart::Gamma0 => "gamma0",
        BoundaryPart::Gamma1 => "gamma1",
        BoundaryPart::GammaI => "gammai",
    }
}

pub fn mesh(ctx: &mut Context) -> Result<(), CliError> {
    let (mesh, nested) = build_mesh(&ctx.exp, ctx.exp.extension)?;
    let partition = partition_boundary(&mesh, &ctx.exp.partition)?;
    let hdr = ctx.header();
    let mut out = ctx.out.file("mesh.txt", &hdr)?;
    write_mesh(&mesh, &mut out)?;
    out.flush()?;
    let mut out = ctx.out.file("partition.txt", &hdr)?;
    writeln!(out, "# gamma0 fraction {:.6}", BoundaryPartition::length_fraction(&mesh, &partition.gamma0))?;
    writeln!(out, "edge,part")?;
    for &e in mesh.boundary_edges() {
        if let Some(p) = partition.part_of(e) {
            writeln!(out, "{e},{}", part_name(p))?;
        }
    }
    out.flush()?;
    if let Some(n) = nested {
        let mut out = ctx.out.file("disc_mesh.txt", &hdr)?;
        write_mesh(&n.disc, &mut out)?;
        out.flush()?;
    }
    info!(
        "mesh: {} vertices, {} triangles, {} edges, h = {:.4}",
        mesh.n_vertices(),
        mesh.n_triangles(),
        mesh.n_edges(),
        mesh.h()
    );
    Ok(())
}

pub fn synth(ctx: &mut Context) -> Result<(), CliError> {
    let s = setup(ctx, false)?;
    let hdr = ctx.header();
    let mut out = ctx.out.file("data.txt", &hdr)?;
    write_cauchy(&s.problem.data, &mut out)?;
    out.flush()?;
    info!("data on {} accessible edges", s.problem.data.edges.len());
    Ok(())
}

pub fn solve(ctx: &mut Context) -> Result<(), CliError> {
    let s = setup(ctx, ctx.exp.extension)?;
    let exp = &ctx.exp;
    let eta = resolve_eta(exp, s.solve_domain())?;
    let params = exp.params(exp.delta, eta);
    let sol = s.solver().solve(&params)?;
    let record = SweepRecord {
        points: vec![SweepPoint { delta: exp.delta, params, outcome: Ok(sol.metrics), wall_ms: sol.wall_ms }],
        argmin: Some(0),
        eta,
        nu_tied: exp.nu_tied(),
    };
    let hdr = ctx.header();
    let mut out = ctx.out.file("solve.csv", &[])?;
    record.write_csv(&mut out, &hdr, exp.timings)?;
    out.flush()?;
    let mut out = ctx.out.file("fields.csv", &hdr)?;
    writeln!(out, "edge,re_E,im_E,re_F,im_F")?;
    for (i, (e, f)) in sol.e.iter().zip(&sol.f).enumerate() {
        writeln!(out, "{i},{:e},{:e},{:e},{:e}", e.re, e.im, f.re, f.im)?;
    }
    out.flush()?;
    if exp.svg {
        let title = if s.problem.reference.is_some() { "|E - E_ref| per triangle" } else { "|E| per triangle" };
        let body = svg_field(title, &s.problem.mesh, &sol.e, s.problem.reference.as_deref())?;
        ctx.out.svg("solve.svg", &hdr, &body)?;
    }
    let m = sol.metrics;
    info!(
        "|E| = {:e}, |F| = {:e}, L2 error = {:e}, Gamma_i error = {:e}",
        m.norm_e, m.norm_f, m.err_l2_omega, m.err_gammai
    );
    Ok(())
}

fn error_series(record: &SweepRecord) -> Vec<(&'static str, Vec<(f64, f64)>)> {
    let col = |f: fn(&maxwell_qr::driver::Metrics) -> f64| {
        record.points.iter().filter_map(|p| p.outcome.as_ref().ok().map(|m| (p.delta, f(m)))).collect()
    };
    vec![
        ("L2(Omega)", col(|m| m.err_l2_omega)),
        ("Gamma0", col(|m| m.err_gamma0)),
        ("Gamma1", col(|m| m.err_gamma1)),
        ("Gamma_i", col(|m| m.err_gammai)),
    ]
}

fn failed(record: &SweepRecord) -> usize {
    record.points.iter().filter(|p| p.outcome.is_err()).count()
}

pub fn sweep_cmd(ctx: &mut Context) -> Result<(), CliError> {
    let s = setup(ctx, ctx.exp.extension)?;
    let eta = resolve_eta(&ctx.exp, s.solve_domain())?;
    let record = sweep(ctx, s.solver(), eta)?;
    let hdr = ctx.header();
    let mut out = ctx.out.file("sweep.csv", &[])?;
    record.write_csv(&mut out, &hdr, ctx.exp.timings)?;
    out.flush()?;
    let mut out = ctx.out.file("summary.txt", &hdr)?;
    writeln!(out, "variant {}", ctx.exp.variant.name())?;
    writeln!(out, "eta {eta:e}")?;
    writeln!(out, "argmin_delta {}", fmt_opt(record.argmin_delta()))?;
    writeln!(out, "min_err_L2_Omega {}", fmt_opt(record.min_error()))?;
    writeln!(out, "argmin_interior {}", record.argmin_is_interior())?;
    writeln!(out, "eta_over_delta {}", fmt_opt(if eta > 0.0 { record.eta_delta_ratio() } else { None }))?;
    writeln!(out, "failed_points {}", failed(&record))?;
    out.flush()?;
    if ctx.exp.svg {
        let body = svg_loglog("relative errors", "delta", "error", &error_series(&record));
        ctx.out.svg("sweep.svg", &hdr, &body)?;
    }
    info!("argmin delta = {}, min L2 error = {}", fmt_opt(record.argmin_delta()), fmt_opt(record.min_error()));
    Ok(())
}

/// δ minimizing the Γi error, the quantity the corner is meant to track.
fn gammai_argmin(record: &SweepRecord) -> Option<f64> {
    record
        .points
        .iter()
        .filter_map(|p| p.outcome.as_ref().ok().map(|m| (p.delta, m.err_gammai)))
        .filter(|(_, e)| e.is_finite())
        .fold(None, |best: Option<(f64, f64)>, (d, e)| match best {
            Some((_, b)) if b <= e => best,
            _ => Some((d, e)),
        })
        .map(|(d, _)| d)
}

pub fn lcurve(ctx: &mut Context) -> Result<(), CliError> {
    let s = setup(ctx, ctx.exp.extension)?;
    let eta = resolve_eta(&ctx.exp, s.solve_domain())?;
    let record = sweep(ctx, s.solver(), eta)?;
    let curve = LCurve::from_sweep(&record)?;
    let hdr = ctx.header();
    let mut out = ctx.out.file("lcurve.csv", &hdr)?;
    writeln!(out, "delta,norm_F,norm_E,angle")?;
    for i in 0..curve.deltas.len() {
        writeln!(out, "{:e},{:e},{:e},{:e}", curve.deltas[i], curve.norm_f[i], curve.norm_e[i], curve.angles[i])?;
    }
    out.flush()?;
    let corner = curve.corner_delta();
    let best = gammai_argmin(&record);
    let mut out = ctx.out.file("corner.txt", &hdr)?;
    writeln!(out, "corner_delta {}", fmt_opt(corner))?;
    writeln!(out, "degenerate {}", curve.degenerate)?;
    writeln!(out, "gammai_argmin_delta {}", fmt_opt(best))?;
    writeln!(out, "l2_argmin_delta {}", fmt_opt(record.argmin_delta()))?;
    let decades = corner.zip(best).map(|(c, b)| (c / b).log10().abs());
    writeln!(out, "decades_from_gammai_argmin {}", fmt_opt(decades))?;
    out.flush()?;
    if ctx.exp.svg {
        let pts = curve.norm_f.iter().copied().zip(curve.norm_e.iter().copied()).collect();
        let body = svg_loglog("L-curve", "|F|", "|E|", &[("L-curve", pts)]);
        ctx.out.svg("lcurve.svg", &hdr, &body)?;
    }
    info!("corner delta = {}", fmt_opt(corner));
    Ok(())
}

pub fn extend(ctx: &mut Context) -> Result<(), CliError> {
    if ctx.exp.shape != Shape::Ring {
        return Err(CliError::Config("extend needs domain.shape = \"ring\"".into()));
    }
    let s = setup(ctx, true)?;
    let ext = s.extended.as_ref().expect("ring setup with extension");
    let plain_eta = resolve_eta(&ctx.exp, &s.problem)?;
    let ext_eta = resolve_eta(&ctx.exp, &ext.disc)?;
    let plain = sweep(ctx, &s.problem, plain_eta)?;
    let extended = sweep(ctx, ext, ext_eta)?;
    let hdr = ctx.header();
    for (name, rec) in [("plain.csv", &plain), ("extended.csv", &extended)] {
        let mut out = ctx.out.file(name, &[])?;
        rec.write_csv(&mut out, &hdr, ctx.exp.timings)?;
        out.flush()?;
    }
    let gi = |r: &SweepRecord| r.best().map(|(_, m)| m.err_gammai);
    let ratio = gi(&plain).zip(gi(&extended)).map(|(a, b)| a / b);
    let mut out = ctx.out.file("extend.txt", &hdr)?;
    for (label, r) in [("plain", &plain), ("extended", &extended)] {
        writeln!(out, "{label}_argmin_delta {}", fmt_opt(r.argmin_delta()))?;
        writeln!(out, "{label}_err_L2_Omega {}", fmt_opt(r.min_error()))?;
        writeln!(out, "{label}_err_Gammai {}", fmt_opt(gi(r)))?;
    }
    writeln!(out, "gammai_improvement {}", fmt_opt(ratio))?;
    out.flush()?;
    if ctx.exp.svg {
        let col = |r: &SweepRecord| -> Vec<(f64, f64)> {
            r.points.iter().filter_map(|p| p.outcome.as_ref().ok().map(|m| (p.delta, m.err_gammai))).collect()
        };
        let body =
            svg_loglog("Gamma_i error", "delta", "error", &[("plain", col(&plain)), ("extended", col(&extended))]);
        ctx.out.svg("extend.svg", &hdr, &body)?;
    }
    info!("Gamma_i improvement = {}", fmt_opt(ratio));
    Ok(())
}

/// Mesh sizes, relative to the radius, used by `check`.
pub const CHECK_SIZES: [f64; 2] = [0.5, 0.2];
/// Sparse/dense agreement only runs below this many edges.
const DENSE_LIMIT: usize = 400;

pub fn check(ctx: &mut Context) -> Result<(), CliError> {
    let seed = ctx.seed.ok_or_else(|| CliError::Config("check draws random vectors and needs --seed".into()))?;
    let exp = &ctx.exp;
    let direction = match &exp.source {
        DataSource::PlaneWave { direction } | DataSource::DiscreteOracle { direction } => *direction,
        DataSource::File(_) => [1.0, 0.0],
    };
    let pw = PlaneWave::new(direction, exp.k, exp.kappa)?;
    let kappa = exp.kappa;
    let mut rows: Vec<(f64, InvariantResult)> = Vec::new();
    for rel in CHECK_SIZES {
        let h = rel * exp.radius;
        let mesh = match exp.shape {
            Shape::Disc => generate_disc(exp.radius, h)?,
            Shape::Ring => generate_ring(exp.inner_radius, exp.radius, h.min(0.5 * (exp.radius - exp.inner_radius)))?,
        };
        let partition = partition_boundary(&mesh, &exp.partition)?;
        let forms = maxwell_qr::edgefem::assemble(&mesh, &partition, exp.k, move |_| kappa, ctx.exec)
            .map_err(|e| CliError::from(maxwell_qr::driver::DriverError::from(e)))?;
        let (data, exact) = discrete_oracle(&pw, &mesh, &forms)?;
        let n_edges = mesh.n_edges();
        let problem = Problem::new(mesh, partition, forms, data, Some(exact.clone()))?;
        info!("check: h = {h}, {n_edges} edges");
        if n_edges <= DENSE_LIMIT {
            rows.push((h, invariants::sparse_dense_agreement(&problem)?));
        }
        rows.push((h, invariants::coercivity_identity(&problem, 10, seed)?));
        rows.push((h, invariants::relaxed_estimates(&problem, &exact, &[1e-2, 1e-4, 1e-6], &[0.5, 2.0])?));
        rows.push((h, invariants::noise_calibration(&problem.data, &[0.01, 0.05, 0.2], seed)?));
        rows.push((h, invariants::tikhonov_stationarity(&problem, 20, seed)?));
    }
    let hdr = ctx.header();
    let mut out = ctx.out.file("check.txt", &hdr)?;
    writeln!(out, "h,invariant,worst,tolerance,status")?;
    for (h, r) in &rows {
        writeln!(out, "{h},{},{:e},{:e},{}", r.name, r.worst, r.tolerance, if r.passed { "PASS" } else { "FAIL" })?;
    }
    out.flush()?;
    let failures: Vec<String> =
        rows.iter().filter(|(_, r)| !r.passed).map(|(h, r)| format!("{} at h = {h} ({:e})", r.name, r.worst)).collect();
    if failures.is_empty() {
        info!("all {} invariants hold", rows.len());
        Ok(())
    } else {
        Err(CliError::Invariant(failures.join("; ")))
    }
}
