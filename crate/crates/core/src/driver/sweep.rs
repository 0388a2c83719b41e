use std::io::{self, Write};

use crate::formulations::QrParams;
use crate::par::{map_slice, Exec};

use super::{DriverError, Metrics, QrSolver};

/// Default grid: 25 geometric points from `1e-12` to `1e-2`.
pub const DEFAULT_GRID: (f64, f64, usize) = (1e-12, 1e-2, 25);

pub const CSV_HEADER: &str = "delta,err_L2_Omega,err_Gamma0,err_Gamma1,err_Gammai,norm_F,eta,nu,wall_ms";

/// `n` geometrically spaced values from `lo` to `hi` inclusive.
pub fn delta_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, DriverError> {
    if !(lo > 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) || n == 0 {
        return Err(DriverError::InvalidGrid(format!("need 0 < lo, hi and n >= 1 (lo={lo}, hi={hi}, n={n})")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    if lo == hi {
        return Err(DriverError::InvalidGrid("endpoints coincide".into()));
    }
    let (a, b) = (lo.log10(), hi.log10());
    let mut grid: Vec<f64> = (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    Ok(grid)
}

fn check_grid(grid: &[f64]) -> Result<(), DriverError> {
    if grid.is_empty() {
        return Err(DriverError::InvalidGrid("empty".into()));
    }
    if let Some(d) = grid.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(DriverError::InvalidGrid(format!("nonpositive value {d}")));
    }
    if grid.len() < 2 {
        return Ok(());
    }
    let increasing = grid[1] > grid[0];
    let ratio = (grid[1] / grid[0]).ln();
    for w in grid.windows(2) {
        if (w[1] > w[0]) != increasing || w[1] == w[0] {
            return Err(DriverError::InvalidGrid("values must be strictly monotone".into()));
        }
        if ((w[1] / w[0]).ln() - ratio).abs() > 1e-6 * ratio.abs() {
            return Err(DriverError::InvalidGrid("values must be geometrically spaced".into()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub delta: f64,
    pub params: QrParams,
    /// Metrics, or the error message of a failed solve.
    pub outcome: Result<Metrics, String>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub points: Vec<SweepPoint>,
    /// Index of the point with the smallest relative L²(Ω) error.
    pub argmin: Option<usize>,
    pub eta: f64,
    /// Whether ν followed δ along the sweep.
    pub nu_tied: bool,
}

impl SweepRecord {
    pub fn best(&self) -> Option<(&SweepPoint, &Metrics)> {
        let p = &self.points[self.argmin?];
        p.outcome.as_ref().ok().map(|m| (p, m))
    }

    pub fn argmin_delta(&self) -> Option<f64> {
        self.argmin.map(|i| self.points[i].delta)
    }

    /// `η / δ*`, recorded for the relaxed methods.
    pub fn eta_delta_ratio(&self) -> Option<f64> {
        self.argmin_delta().filter(|_| self.eta > 0.0).map(|d| self.eta / d)
    }

    pub fn min_error(&self) -> Option<f64> {
        self.best().map(|(_, m)| m.err_l2_omega)
    }

    /// Whether the argmin lies strictly inside the grid.
    pub fn argmin_is_interior(&self) -> bool {
        matches!(self.argmin, Some(i) if i > 0 && i + 1 < self.points.len())
    }

    /// Writes the CSV table after `#`-prefixed header lines. Failed points
    /// are written as `NaN`; `wall_ms` is written as 0 unless `timings` is set,
    /// so repeated runs are byte-identical.
    pub fn write_csv<W: Write>(&self, mut out: W, header: &[String], timings: bool) -> io::Result<()> {
        for line in header {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "{CSV_HEADER}")?;
        for p in &self.points {
            let m = p.outcome.as_ref().ok();
            let get = |f: fn(&Metrics) -> f64| m.map_or(f64::NAN, f);
            writeln!(
                out,
                "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
                p.delta,
                get(|m| m.err_l2_omega),
                get(|m| m.err_gamma0),
                get(|m| m.err_gamma1),
                get(|m| m.err_gammai),
                get(|m| m.norm_f),
                p.params.eta,
                p.params.nu_outer,
                if timings { format!("{:.3}", p.wall_ms) } else { "0".into() }
            )?;
        }
        Ok(())
    }
}

/// Solves at every δ of `grid` (in parallel under `exec`), keeping the other
/// parameters of `base`; with `tie_nu`, RRQR uses `ν = δ`.
pub fn sweep_delta<S: QrSolver + ?Sized>(
    solver: &S,
    base: &QrParams,
    grid: &[f64],
    tie_nu: bool,
    exec: Exec,
) -> Result<SweepRecord, DriverError> {
    check_grid(grid)?;
    let points = map_slice(grid, exec, |&delta| {
        let params = base.with_delta(delta, tie_nu);
        match solver.solve(&params) {
            Ok(s) => SweepPoint { delta, params, outcome: Ok(s.metrics), wall_ms: s.wall_ms },
            Err(err) => {
                log::warn!("sweep point delta={delta:e} failed: {err}");
                SweepPoint { delta, params, outcome: Err(err.to_string()), wall_ms: 0.0 }
            }
        }
    });
    let argmin = points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.outcome.as_ref().ok().map(|m| (i, m.err_l2_omega)))
        .filter(|(_, e)| e.is_finite())
        .fold(None, |best: Option<(usize, f64)>, (i, e)| match best {
            Some((_, b)) if b <= e => best,
            _ => Some((i, e)),
        })
        .map(|(i, _)| i);
    Ok(SweepRecord { points, argmin, eta: base.eta, nu_tied: tie_nu })
}
