//! Output files: header comments, small text reports and SVG plots.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use maxwell_qr::edgefem::evaluate;
use maxwell_qr::mesh::Mesh;
use maxwell_qr::C64;

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance lines written at the top of every output file.
pub fn header(command: &str, hash: &str, seed: Option<u64>) -> Vec<String> {
    vec![
        format!("maxwell-qr {VERSION}"),
        format!("command {command}"),
        format!("config-sha256 {hash}"),
        format!("seed {}", seed.map_or("-".to_string(), |s| s.to_string())),
    ]
}

pub struct OutDir {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    /// Opens `name` for writing and emits the header comment.
    pub fn file(&mut self, name: &str, header: &[String]) -> Result<BufWriter<File>, CliError> {
        let path = self.dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        for line in header {
            writeln!(out, "# {line}")?;
        }
        self.written.push(path);
        Ok(out)
    }

    /// Writes an SVG document (comments go inside the root element).
    pub fn svg(&mut self, name: &str, header: &[String], body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut out = BufWriter::new(File::create(&path)?);
        let mut lines = body.lines();
        if let Some(first) = lines.next() {
            writeln!(out, "{first}")?;
        }
        for line in header {
            writeln!(out, "<!-- {line} -->")?;
        }
        for line in lines {
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        self.written.push(path);
        Ok(())
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Log-log line plot of one or more named series.
pub fn svg_loglog(title: &str, x_label: &str, y_label: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, s)| s.iter().copied())
        .filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#, W / 2.0);
    if pts.is_empty() {
        let _ = writeln!(s, "</svg>");
        return s;
    }
    let (x0, x1) = bounds(pts.iter().map(|p| p.0));
    let (y0, y1) = bounds(pts.iter().map(|p| p.1));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    for d in x0.ceil() as i32..=x1.floor() as i32 {
        let _ =
            writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">1e{d}</text>"#, sx(d as f64), H - MARGIN + 16.0);
    }
    for d in y0.ceil() as i32..=y1.floor() as i32 {
        let _ =
            writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">1e{d}</text>"#, MARGIN - 4.0, sy(d as f64) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, W / 2.0, H - 16.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">{y_label}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (k, (name, data)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = data
            .iter()
            .filter(|&&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x.log10()), sy(y.log10())))
            .collect();
        let _ =
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{name}</text>"#,
            W - MARGIN - 120.0,
            MARGIN + 16.0 * (k + 1) as f64
        );
    }
    let _ = writeln!(s, "</svg>");
    s
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Triangles shaded by the magnitude of `u − reference` (or of `u`) at their
/// centroids.
pub fn svg_field(title: &str, mesh: &Mesh, u: &[C64], reference: Option<&[C64]>) -> Result<String, CliError> {
    let third = [1.0 / 3.0; 3];
    let mut values = Vec::with_capacity(mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let (v, _) = evaluate(mesh, u, t, third).map_err(|e| CliError::Numerical(e.to_string()))?;
        let v = match reference {
            Some(r) => {
                let (w, _) = evaluate(mesh, r, t, third).map_err(|e| CliError::Numerical(e.to_string()))?;
                [v[0] - w[0], v[1] - w[1]]
            }
            None => v,
        };
        values.push((v[0].norm_sqr() + v[1].norm_sqr()).sqrt());
    }
    let vmax = values.iter().copied().fold(0.0, f64::max);
    let (x0, x1) = bounds(mesh.vertices().iter().map(|p| p[0]));
    let (y0, y1) = bounds(mesh.vertices().iter().map(|p| p[1]));
    let side = H - 2.0 * MARGIN;
    let scale = side / (x1 - x0).max(y1 - y0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{H}" height="{}" font-family="sans-serif" font-size="12">"#,
        H + 20.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{title} (max {vmax:.3e})</text>"#, H / 2.0);
    for (t, &v) in values.iter().enumerate() {
        let level = if vmax > 0.0 { v / vmax } else { 0.0 };
        let shade = (255.0 * (1.0 - level)).round() as u8;
        let pts: Vec<String> = mesh
            .triangle_points(t)
            .iter()
            .map(|p| format!("{:.2},{:.2}", MARGIN + (p[0] - x0) * scale, H - MARGIN - (p[1] - y0) * scale + 20.0))
            .collect();
        let _ = writeln!(s, r#"<polygon points="{}" fill="rgb(255,{shade},{shade})"/>"#, pts.join(" "));
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}
