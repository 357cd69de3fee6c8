use crate::args::Command;
use hetren_core::renorm_engine::RenormRecord;
use hetren_core::Precision;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

/// Record of one invocation: enough to replay it and locate what it wrote.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    /// Fully resolved arguments, precision included.
    pub parameters: Command,
    pub precision: Option<Precision>,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

impl RunManifest {
    pub fn new(parameters: &Command, started_unix_ms: u128) -> Self {
        let (command, config_path, precision) = match parameters {
            Command::CheckModel { config } => ("check-model", Some(config.clone()), None),
            Command::SearchSojourn(a) => ("search-sojourn", Some(a.config.clone()), None),
            Command::Renormalize(a) => ("renormalize", Some(a.config.clone()), a.precision),
            Command::Certify(a) => ("certify", Some(a.config.clone()), a.precision),
            Command::Orbit(_) => ("orbit", None, None),
            Command::Replay { .. } => ("replay", None, None),
        };
        RunManifest {
            command: command.into(),
            config_path,
            parameters: parameters.clone(),
            precision,
            started_unix_ms,
            finished_unix_ms: started_unix_ms,
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    /// Stamps the finish time, lists the manifest itself and writes it.
    pub fn write(mut self, path: &Path) -> std::io::Result<()> {
        self.outputs.push(path.to_path_buf());
        self.finished_unix_ms = now_ms();
        std::fs::write(path, serde_json::to_string_pretty(&self).expect("manifest serializes") + "\n")
    }
}

/// Sibling manifest path for a single-file output: `a/b.json` gives `a/b.manifest.json`.
pub fn manifest_beside(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

pub fn write_report_csv(path: &Path, records: &[RenormRecord]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    if records.is_empty() {
        w.write_record(hetren_core::renorm_engine::REPORT_COLUMNS)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

const SERIES: [(&str, &str); 3] = [("sup_c0_error", "#1f77b4"), ("sup_c1_error", "#d62728"), ("lp_s2m_s2n", "#2ca02c")];

fn series_values(r: &RenormRecord, i: usize) -> f64 {
    match i {
        0 => r.sup_c0_error,
        1 => r.sup_c1_error,
        _ => r.lp_s2m_s2n,
    }
}

/// Log-scale error-versus-k line chart as standalone SVG.
pub fn report_svg(records: &[RenormRecord]) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (70.0, 170.0, 30.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let logs: Vec<f64> = records
        .iter()
        .flat_map(|r| (0..SERIES.len()).map(move |i| series_values(r, i)))
        .filter(|v| v.is_finite() && *v > 0.0)
        .map(f64::log10)
        .collect();
    let (mut lo, mut hi) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 0.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil().max(lo.floor() + 1.0));
    let ks: Vec<f64> = records.iter().map(|r| r.k as f64).collect();
    let (k0, k1) = match (ks.first(), ks.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        (Some(&a), _) => (a - 0.5, a + 0.5),
        _ => (0.0, 1.0),
    };
    let px = |k: f64| left + pw * (k - k0) / (k1 - k0);
    let py = |l: f64| top + ph * (hi - l) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let mut d = lo as i64;
    while d <= hi as i64 {
        let y = py(d as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">1e{d}</text>"##,
            left + pw,
            left - 6.0,
            y + 4.0
        );
        d += 1;
    }
    for &k in &ks {
        let x = px(k);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{k}</text>"#,
            top + ph + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">k</text>"#,
        left + pw / 2.0,
        h - 12.0
    );
    for (i, (name, colour)) in SERIES.iter().enumerate() {
        let pts: Vec<String> = records
            .iter()
            .filter_map(|r| {
                let v = series_values(r, i);
                (v.is_finite() && v > 0.0).then(|| format!("{:.2},{:.2}", px(r.k as f64), py(v.log10())))
            })
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
                pts.join(" ")
            );
            for p in &pts {
                let (x, y) = p.split_once(',').unwrap();
                let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{colour}"/>"#);
            }
        }
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="11">{name}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}
