//! Learning-curve charts as standalone SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::metrics::{read_metrics, MetricsRecord};
use crate::error::{Error, Result};

/// One seed-averaged curve with its min/max band.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// (steps, mean, min, max) per evaluation point.
    pub points: Vec<(f64, f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Groups records into series: one per method (per method and task when several
/// tasks are present), averaged across seeds by evaluation index.
pub fn build_chart(records: &[MetricsRecord], title: &str) -> Result<Chart> {
    if records.is_empty() {
        return Err(Error::Config("no metrics rows to plot".into()));
    }
    let survival = records.iter().all(|r| r.reward_mode == "survival");
    let multi_task = records.iter().any(|r| r.task != records[0].task);
    // label -> seed -> values in file order
    let mut groups: BTreeMap<String, BTreeMap<u64, Vec<(f64, f64)>>> = BTreeMap::new();
    for r in records {
        let label = if multi_task {
            format!("{} {}", r.method, r.task)
        } else {
            r.method.clone()
        };
        let y = if survival {
            r.mean_length
        } else {
            r.mean_return
        };
        groups
            .entry(label)
            .or_default()
            .entry(r.seed)
            .or_default()
            .push((r.steps as f64, y));
    }
    let series = groups
        .into_iter()
        .map(|(label, seeds)| {
            let n = seeds.values().map(Vec::len).min().unwrap_or(0);
            let points = (0..n)
                .map(|i| {
                    let xs: Vec<f64> = seeds.values().map(|v| v[i].0).collect();
                    let ys: Vec<f64> = seeds.values().map(|v| v[i].1).collect();
                    let k = ys.len() as f64;
                    (
                        xs.iter().sum::<f64>() / k,
                        ys.iter().sum::<f64>() / k,
                        ys.iter().copied().fold(f64::INFINITY, f64::min),
                        ys.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    )
                })
                .collect();
            Series { label, points }
        })
        .collect();
    Ok(Chart {
        title: title.to_string(),
        y_label: if survival {
            "mean episode length"
        } else {
            "mean eval return"
        }
        .into(),
        series,
    })
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-9);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * span {
        out.push(if t.abs() < 1e-12 { 0.0 } else { t });
        t += step;
    }
    out
}

pub fn render_svg(chart: &Chart) -> String {
    let (w, h) = (800.0, 500.0);
    let (l, r, t, b) = (80.0, 190.0, 50.0, 60.0);
    let pts = chart.series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, _, lo, hi) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(lo);
        y1 = y1.max(hi);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pw = w - l - r;
    let ph = h - t - b;
    let sx = |x: f64| l + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| t + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="25" text-anchor="middle" font-size="16">{}</text>"#,
        l + pw / 2.0,
        esc(&chart.title)
    );
    for tx in nice_ticks(x0, x1) {
        let x = sx(tx);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{t}" x2="{x:.1}" y2="{:.1}" stroke="#eee"/>"##,
            t + ph
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{tx}</text>"#,
            t + ph + 18.0
        );
    }
    for ty in nice_ticks(y0, y1) {
        let y = sy(ty);
        let _ = writeln!(
            s,
            r##"<line x1="{l}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#eee"/>"##,
            l + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            l - 6.0,
            y + 4.0,
            (ty * 1e6).round() / 1e6
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{l}" y="{t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">environment steps</text>"#,
        l + pw / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        t + ph / 2.0,
        esc(&chart.y_label)
    );
    for (i, series) in chart.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if series.points.len() > 1 {
            let upper = series
                .points
                .iter()
                .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.3)));
            let lower = series
                .points
                .iter()
                .rev()
                .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.2)));
            let band: Vec<String> = upper.chain(lower).collect();
            let _ = writeln!(
                s,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
                band.join(" ")
            );
            let line: Vec<String> = series
                .points
                .iter()
                .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                line.join(" ")
            );
        } else if let Some(p) = series.points.first() {
            // A single evaluation point is drawn as a flat segment across the chart.
            let y = sy(p.1);
            let _ = writeln!(
                s,
                r#"<line x1="{l}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#,
                l + pw
            );
        }
        let ly = t + 15.0 + 20.0 * i as f64;
        let lx = l + pw + 15.0;
        let _ = writeln!(
            s,
            r#"<rect x="{lx}" y="{:.1}" width="14" height="4" fill="{color}"/>"#,
            ly - 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}">{}</text>"#,
            lx + 20.0,
            esc(&series.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Reads metrics files and writes a seed-averaged chart to `output`.
pub fn emit_plots(inputs: &[PathBuf], output: &Path, title: &str) -> Result<Chart> {
    let mut records = Vec::new();
    for p in inputs {
        records.extend(read_metrics(p)?);
    }
    let chart = build_chart(&records, title)?;
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(output, render_svg(&chart)).map_err(|e| Error::io(output, e))?;
    Ok(chart)
}
