//! Benchmark reports: CSV with `#` metadata lines, and a Markdown rendering.

use std::fmt::Write as _;

use dualprec_render::{TimingSource, VariantKind};

use crate::error::{CliError, Result};

pub const CSV_COLUMNS: &str = "dataset,vertices,variant,gpu_render_ms,fps,timing,status,note";

#[derive(Clone, Debug, PartialEq)]
pub enum RowStatus {
    Ok,
    /// The device lacks a feature the variant needs; the reason says which.
    Unsupported(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub dataset: String,
    pub vertices: u64,
    pub variant: VariantKind,
    pub gpu_render_ms: Option<f64>,
    pub fps: Option<f64>,
    pub timing: Option<TimingSource>,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub tool_version: String,
    pub device: String,
    /// RFC 3339.
    pub timestamp: String,
    pub frames: u32,
    pub resolution: (u32, u32),
    pub rows: Vec<BenchRow>,
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn split_row(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match (c, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                cur.push('"');
                chars.next();
            }
            ('"', _) => quoted = !quoted,
            (',', false) => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// Whole frames at interactive rates, two decimals below ten.
fn fps_text(fps: f64) -> String {
    if fps >= 10.0 {
        format!("{fps:.0}")
    } else {
        format!("{fps:.2}")
    }
}

impl BenchRow {
    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }
}

impl BenchReport {
    /// Median note attached to every render time.
    pub fn aggregation(&self) -> String {
        format!(
            "median of {} frames at {}x{}",
            self.frames, self.resolution.0, self.resolution.1
        )
    }

    /// Every measured row has positive time and rate.
    pub fn check(&self) -> Result<()> {
        for r in self.rows.iter().filter(|r| r.is_ok()) {
            let positive = |v: Option<f64>| v.is_some_and(|x| x > 0.0 && x.is_finite());
            if !positive(r.gpu_render_ms) || !positive(r.fps) {
                return Err(CliError::Usage(format!(
                    "row {} / {} has a non-positive measurement",
                    r.dataset, r.variant
                )));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# tool: {}", self.tool_version).unwrap();
        writeln!(s, "# device: {}", self.device).unwrap();
        writeln!(s, "# timestamp: {}", self.timestamp).unwrap();
        writeln!(s, "# gpu_render_ms: {}", self.aggregation()).unwrap();
        writeln!(s, "{CSV_COLUMNS}").unwrap();
        for r in &self.rows {
            let (status, note) = match &r.status {
                RowStatus::Ok => ("ok", ""),
                RowStatus::Unsupported(why) => ("unsupported", why.as_str()),
            };
            writeln!(
                s,
                "{},{},{},{},{},{},{status},{}",
                quote(&r.dataset),
                r.vertices,
                r.variant,
                num(r.gpu_render_ms),
                num(r.fps),
                r.timing.map(|t| t.as_str()).unwrap_or(""),
                quote(note)
            )
            .unwrap();
        }
        s
    }

    /// One table per variant, in report order.
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        writeln!(s, "Device: {}  ", self.device).unwrap();
        writeln!(s, "Tool: {}  ", self.tool_version).unwrap();
        writeln!(s, "Generated: {}  ", self.timestamp).unwrap();
        writeln!(s, "Rendering time is the {}.", self.aggregation()).unwrap();
        let mut variants: Vec<VariantKind> = Vec::new();
        for r in &self.rows {
            if !variants.contains(&r.variant) {
                variants.push(r.variant);
            }
        }
        for v in variants {
            writeln!(s, "\n### {v}\n").unwrap();
            writeln!(
                s,
                "| Dataset | Vertices | Rendering Time (ms) | Framerate (fps) |"
            )
            .unwrap();
            writeln!(s, "|---|---:|---:|---:|").unwrap();
            for r in self.rows.iter().filter(|r| r.variant == v) {
                let (ms, fps) = match (&r.status, r.gpu_render_ms, r.fps) {
                    (RowStatus::Ok, Some(ms), Some(fps)) => (format!("{ms:.2}"), fps_text(fps)),
                    _ => ("unsupported".into(), "-".into()),
                };
                writeln!(
                    s,
                    "| {} | {} | {ms} | {fps} |",
                    r.dataset.replace('|', "\\|"),
                    r.vertices
                )
                .unwrap();
            }
        }
        s
    }

    pub fn parse_csv(text: &str) -> Result<BenchReport> {
        let bad = |m: String| CliError::Usage(format!("malformed bench report: {m}"));
        let mut report = BenchReport {
            tool_version: String::new(),
            device: String::new(),
            timestamp: String::new(),
            frames: 0,
            resolution: (0, 0),
            rows: Vec::new(),
        };
        let mut header_seen = false;
        for (i, line) in text.lines().enumerate() {
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta
                    .split_once(": ")
                    .ok_or_else(|| bad(format!("line {}", i + 1)))?;
                match k {
                    "tool" => report.tool_version = v.into(),
                    "device" => report.device = v.into(),
                    "timestamp" => report.timestamp = v.into(),
                    "gpu_render_ms" => {
                        let w: Vec<&str> = v.split_whitespace().collect();
                        if let [_, _, n, _, _, res] = w[..] {
                            report.frames = n.parse().map_err(|_| bad(v.into()))?;
                            let (a, b) = res.split_once('x').ok_or_else(|| bad(v.into()))?;
                            report.resolution = (
                                a.parse().map_err(|_| bad(v.into()))?,
                                b.parse().map_err(|_| bad(v.into()))?,
                            );
                        }
                    }
                    _ => {}
                }
                continue;
            }
            if !header_seen {
                if line != CSV_COLUMNS {
                    return Err(bad(format!("expected header '{CSV_COLUMNS}'")));
                }
                header_seen = true;
                continue;
            }
            let f = split_row(line);
            if f.len() != 8 {
                return Err(bad(format!("line {} has {} fields", i + 1, f.len())));
            }
            let opt = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse()
                        .map(Some)
                        .map_err(|_| bad(format!("line {}: '{s}'", i + 1)))
                }
            };
            report.rows.push(BenchRow {
                dataset: f[0].clone(),
                vertices: f[1].parse().map_err(|_| bad(format!("line {}", i + 1)))?,
                variant: f[2]
                    .parse()
                    .map_err(|e| bad(format!("line {}: {e}", i + 1)))?,
                gpu_render_ms: opt(&f[3])?,
                fps: opt(&f[4])?,
                timing: match f[5].as_str() {
                    "" => None,
                    "gpu-timestamp" => Some(TimingSource::GpuTimestamp),
                    "wall-clock" => Some(TimingSource::WallClock),
                    other => return Err(bad(format!("line {}: timing '{other}'", i + 1))),
                },
                status: match f[6].as_str() {
                    "ok" => RowStatus::Ok,
                    "unsupported" => RowStatus::Unsupported(f[7].clone()),
                    other => return Err(bad(format!("line {}: status '{other}'", i + 1))),
                },
            });
        }
        if !header_seen {
            return Err(bad("no header".into()));
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BenchReport {
        BenchReport {
            tool_version: "dpbench 0.1.0".into(),
            device: "test device (cpu, none, software)".into(),
            timestamp: "2026-01-02T03:04:05+00:00".into(),
            frames: 30,
            resolution: (1024, 768),
            rows: vec![
                BenchRow {
                    dataset: "menger, small".into(),
                    vertices: 64000,
                    variant: VariantKind::Emulated64,
                    gpu_render_ms: Some(1.25),
                    fps: Some(800.0),
                    timing: Some(TimingSource::WallClock),
                    status: RowStatus::Ok,
                },
                BenchRow {
                    dataset: "menger, small".into(),
                    vertices: 64000,
                    variant: VariantKind::Native64,
                    gpu_render_ms: None,
                    fps: None,
                    timing: None,
                    status: RowStatus::Unsupported("no \"shaderFloat64\", sorry".into()),
                },
            ],
        }
    }

    #[test]
    fn csv_round_trips() {
        let r = sample();
        assert_eq!(BenchReport::parse_csv(&r.to_csv()).unwrap(), r);
    }

    #[test]
    fn markdown_has_a_table_per_variant() {
        let md = sample().to_markdown();
        assert!(md.contains("### emulated64"));
        assert!(md.contains("### native64"));
        assert!(md.contains("| menger, small | 64000 | 1.25 | 800 |"));
        assert!(md.contains("| menger, small | 64000 | unsupported | - |"));
        assert!(md.contains("median of 30 frames at 1024x768"));
    }

    #[test]
    fn check_rejects_zero_time() {
        let mut r = sample();
        r.rows[0].gpu_render_ms = Some(0.0);
        assert!(r.check().is_err());
        assert!(sample().check().is_ok());
    }
}
