//! Report emission: CSV tables, the SVG line chart and the run manifest.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Format;

/// One file a command produces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub format: Format,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: &str, format: Format, bytes: impl Into<Vec<u8>>) -> Artifact {
        Artifact {
            name: name.to_string(),
            format,
            bytes: bytes.into(),
        }
    }

    pub fn json<T: Serialize>(name: &str, value: &T) -> anyhow::Result<Artifact> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(Artifact::new(name, Format::Json, bytes))
    }

    pub fn sha256(&self) -> String {
        sha256_hex(&self.bytes)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Minimal CSV writer; fields containing separators or quotes are quoted.
#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn with_header(cols: &[&str]) -> Csv {
        let mut c = Csv::default();
        c.row(cols.iter().map(|s| s.to_string()));
        c
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let mut first = true;
        for f in fields {
            if !first {
                self.text.push(',');
            }
            first = false;
            if f.contains([',', '"', '\n']) {
                self.text.push('"');
                self.text.push_str(&f.replace('"', "\"\""));
                self.text.push('"');
            } else {
                self.text.push_str(&f);
            }
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// A vertical marker on the chart.
#[derive(Debug, Clone, Serialize)]
pub struct Overlay {
    pub label: String,
    pub p: f64,
}

/// Line chart of `(x, y)` with `x, y ∈ [0, 1]`, plus labelled vertical markers.
pub fn svg_line_chart(title: &str, x_label: &str, y_label: &str, points: &[(f64, f64)], overlays: &[Overlay]) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (60.0, 20.0, 40.0, 50.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + x.clamp(0.0, 1.0) * pw;
    let sy = |y: f64| top + (1.0 - y.clamp(0.0, 1.0)) * ph;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} V{} H{}" fill="none" stroke="black"/>"#,
        top + ph,
        left + pw
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{t}</text>"#,
            sx(t),
            top + ph + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{t}</text>"#,
            left - 6.0,
            sy(t) + 4.0
        );
        let _ = writeln!(s, r##"<line x1="{left}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/>"##, left + pw, sy(t), sy(t));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(y_label)
    );
    for (i, o) in overlays.iter().filter(|o| o.p.is_finite() && (0.0..=1.0).contains(&o.p)).enumerate() {
        let x = sx(o.p);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" x2="{x:.1}" y1="{top}" y2="{:.1}" stroke="#c33" stroke-dasharray="4 3"/>"##,
            top + ph
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" fill="#c33">{}</text>"##,
            x + 3.0,
            top + 12.0 + 13.0 * i as f64,
            escape(&o.label)
        );
    }
    let pts: Vec<String> = points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="#1f5fbf" stroke-width="2"/>"##, pts.join(" "));
    for p in &pts {
        let (x, y) = p.split_once(',').unwrap_or(("0", "0"));
        let _ = writeln!(s, r##"<circle cx="{x}" cy="{y}" r="2.5" fill="#1f5fbf"/>"##);
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a std::collections::BTreeMap<String, String>,
    pub input_sha256: String,
    pub wall_time_seconds: f64,
    pub files: Vec<ManifestEntry>,
}

/// Writes every artifact into `dir` followed by `manifest.json`.
pub fn write_run(
    dir: &Path,
    command: &str,
    config: &std::collections::BTreeMap<String, String>,
    input_sha256: String,
    wall_time_seconds: f64,
    artifacts: &[Artifact],
) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for a in artifacts {
        std::fs::write(dir.join(&a.name), &a.bytes)?;
        files.push(ManifestEntry {
            name: a.name.clone(),
            sha256: a.sha256(),
            bytes: a.bytes.len(),
        });
    }
    let manifest = RunManifest {
        tool: "aon",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        input_sha256,
        wall_time_seconds,
        files,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    std::fs::write(dir.join("manifest.json"), bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        let mut c = Csv::with_header(&["a", "b"]);
        c.row(["x,y".to_string(), "say \"hi\"".to_string()]);
        assert_eq!(c.finish(), "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let s = svg_line_chart("t <1>", "p", "y", &[(0.0, 0.0), (0.5, 0.2), (1.0, 0.9)], &[Overlay { label: "p1M".into(), p: 0.3 }]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("t &lt;1&gt;"));
        assert_eq!(s.matches("<circle").count(), 3);
    }

    #[test]
    fn hashes() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
