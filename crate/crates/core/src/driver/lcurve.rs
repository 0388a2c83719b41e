use std::f64::consts::PI;

use super::{DriverError, SweepRecord};

pub const MIN_LCURVE_POINTS: usize = 5;

/// Angles within this distance of π count as straight.
const STRAIGHT_TOL: f64 = 1e-6;

/// The curve `(log₁₀‖F_δ‖, log₁₀‖E_δ‖)` ordered by increasing δ, with the
/// corner picked by the triangle method.
#[derive(Debug, Clone, PartialEq)]
pub struct LCurve {
    pub deltas: Vec<f64>,
    pub norm_f: Vec<f64>,
    pub norm_e: Vec<f64>,
    /// Angle at each point of the triangle it forms with the two endpoints;
    /// `NaN` at the endpoints.
    pub angles: Vec<f64>,
    pub corner: Option<usize>,
    /// Set when every interior point is collinear with the endpoints.
    pub degenerate: bool,
}

impl LCurve {
    pub fn corner_delta(&self) -> Option<f64> {
        self.corner.map(|i| self.deltas[i])
    }

    /// Builds the curve from the successful points of a sweep.
    pub fn from_sweep(record: &SweepRecord) -> Result<Self, DriverError> {
        let pts: Vec<(f64, f64, f64)> = record
            .points
            .iter()
            .filter_map(|p| p.outcome.as_ref().ok().map(|m| (p.delta, m.norm_f, m.norm_e)))
            .collect();
        l_curve(&pts)
    }
}

/// Triangle-method corner of `(δ, ‖F_δ‖, ‖E_δ‖)` samples. Points with
/// nonpositive or nonfinite norms are dropped. Among interior points the
/// corner minimizes the angle of the triangle with the endpoints; ties go to
/// the larger δ.
pub fn l_curve(points: &[(f64, f64, f64)]) -> Result<LCurve, DriverError> {
    let mut pts: Vec<(f64, f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(d, f, e)| d > 0.0 && f > 0.0 && e > 0.0 && f.is_finite() && e.is_finite())
        .collect();
    if pts.len() < MIN_LCURVE_POINTS {
        return Err(DriverError::TooFewPoints { found: pts.len(), min: MIN_LCURVE_POINTS });
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let xy: Vec<[f64; 2]> = pts.iter().map(|&(_, f, e)| [f.log10(), e.log10()]).collect();
    let (a, b) = (xy[0], xy[xy.len() - 1]);

    let mut angles = vec![f64::NAN; xy.len()];
    for i in 1..xy.len() - 1 {
        let p = xy[i];
        let u = [a[0] - p[0], a[1] - p[1]];
        let v = [b[0] - p[0], b[1] - p[1]];
        if u == [0.0, 0.0] || v == [0.0, 0.0] {
            continue;
        }
        let cross = u[0] * v[1] - u[1] * v[0];
        let dot = u[0] * v[0] + u[1] * v[1];
        angles[i] = cross.abs().atan2(dot);
    }
    let mut corner: Option<usize> = None;
    for (i, &t) in angles.iter().enumerate() {
        if t.is_nan() {
            continue;
        }
        match corner {
            Some(c) if angles[c] < t => {}
            _ => corner = Some(i),
        }
    }
    let degenerate = corner.is_none_or(|c| angles[c] >= PI - STRAIGHT_TOL);
    Ok(LCurve {
        deltas: pts.iter().map(|p| p.0).collect(),
        norm_f: pts.iter().map(|p| p.1).collect(),
        norm_e: pts.iter().map(|p| p.2).collect(),
        angles,
        corner: if degenerate { None } else { corner },
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l_shape_corner_at_breakpoint() {
        // vertical then horizontal segment in log-log, breakpoint at index 4
        let mut pts = Vec::new();
        for i in 0..9 {
            let delta = 10f64.powi(i - 8);
            let (x, y) = if i <= 4 { (0.0, 4.0 - i as f64) } else { (i as f64 - 4.0, 0.0) };
            pts.push((delta, 10f64.powf(x), 10f64.powf(y)));
        }
        let c = l_curve(&pts).unwrap();
        assert_eq!(c.corner, Some(4));
        assert!(!c.degenerate);
        assert!((c.angles[4] - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn straight_line_is_degenerate() {
        let pts: Vec<_> = (0..7).map(|i| (10f64.powi(-i), 10f64.powi(i), 10f64.powi(2 * i))).collect();
        let c = l_curve(&pts).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.corner, None);
    }

    #[test]
    fn ties_prefer_larger_delta() {
        // points 1 and 3 mirror each other
        let xy = [(0.0, 2.0), (1.0, 0.0), (2.0, 1.0), (3.0, 0.0), (4.0, 2.0)];
        let pts: Vec<_> =
            xy.iter().enumerate().map(|(i, &(x, y))| (10f64.powi(i as i32), 10f64.powf(x), 10f64.powf(y))).collect();
        let c = l_curve(&pts).unwrap();
        assert_eq!(c.angles[1], c.angles[3]);
        assert_eq!(c.corner, Some(3));
    }

    #[test]
    fn too_few_points() {
        let pts = [(1.0, 1.0, 1.0), (2.0, 2.0, 2.0), (3.0, 0.0, 1.0)];
        assert!(matches!(l_curve(&pts), Err(DriverError::TooFewPoints { found: 2, .. })));
    }
}
