//! Result files: CSV tables, JSON documents, mesh dumps and small SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use weyl_core::Mesh;

use crate::error::LabError;

/// Collects the files written into one run directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, LabError> {
        fs::create_dir_all(root).map_err(|e| LabError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }

    fn path(&mut self, name: &str) -> PathBuf {
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        self.root.join(name)
    }

    /// Write a table. Floats are printed with `{:e}`-free shortest
    /// round-trip formatting so reruns are byte-identical.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), LabError> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| LabError::Output(format!("{}: {e}", path.display())))?;
        let err = |e: csv::Error| LabError::Output(format!("{}: {e}", path.display()));
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(row.iter().map(|v| format_number(*v))).map_err(err)?;
        }
        w.flush().map_err(|e| LabError::io(&path, e))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), LabError> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(value).map_err(|e| LabError::Output(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| LabError::io(&path, e))
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), LabError> {
        let path = self.path(name);
        fs::write(&path, body).map_err(|e| LabError::io(&path, e))
    }

    pub fn mesh(&mut self, name: &str, mesh: &Mesh) -> Result<(), LabError> {
        self.text(name, &mesh_text(mesh))
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    if v.is_finite() && v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Plain-text mesh: a node block `x y boundary` then an element block of
/// node indices.
pub fn mesh_text(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "nodes {}", mesh.nodes.len());
    for (p, b) in mesh.nodes.iter().zip(&mesh.boundary_mask) {
        let _ = writeln!(s, "{} {} {}", format_number(p.x), format_number(p.y), u8::from(*b));
    }
    let _ = writeln!(s, "elements {}", mesh.elements.len());
    for e in &mesh.elements {
        let idx: Vec<String> = e.node_slice().iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{}", idx.join(" "));
    }
    s
}

/// One polyline of a plot.
pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// A minimal line chart, optionally on log-log axes.
pub fn svg_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], log_log: bool) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let tf = |v: f64| if log_log { v.log10() } else { v };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|(x, y)| !log_log || (*x > 0.0 && *y > 0.0))
                .map(|&(x, y)| (tf(x), tf(y)))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let axis = |v: f64| if log_log { format!("1e{v:.1}") } else { format!("{v:.3}") };
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}">{}</text>"#, H - PAD + 16.0, axis(x0));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, W - PAD, H - PAD + 16.0, axis(x1));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PAD - 4.0, H - PAD, axis(y0));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, PAD - 4.0, PAD + 10.0, axis(y1));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for (i, (ser, p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            PAD + 8.0,
            PAD + 16.0 * (i as f64 + 1.0),
            escape(ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
