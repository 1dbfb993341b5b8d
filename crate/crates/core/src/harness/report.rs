//! CSV and SVG output for sweep results.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::experiment::{Estimate, SweepPoint};
use crate::error::{Error, Result};

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Invalid(format!("{}: {e}", path.display()))
}

pub fn csv_header(samplers: usize) -> String {
    let mut h = String::from("algorithm,sweep_var,value,ne_time,te_time");
    for s in 1..=samplers {
        write!(h, ",ne_coeff_g{s}").unwrap();
    }
    for s in 1..=samplers {
        write!(h, ",te_coeff_g{s}").unwrap();
    }
    h.push_str(",detected,miss,admissible");
    h
}

/// Rows in the given order. Floats use the shortest representation that
/// parses back to the same value.
pub fn format_csv(results: &[SweepPoint]) -> Result<String> {
    let first = results.first().ok_or_else(|| Error::Invalid("no results to write".into()))?;
    let samplers = first.ne_coeff.len();
    let mut out = csv_header(samplers);
    out.push('\n');
    for p in results {
        if p.ne_coeff.len() != samplers || p.te_coeff.len() != samplers {
            return Err(Error::Invalid("results disagree on the sampler count".into()));
        }
        write!(out, "{},{},{:?},{:?},{:?}", p.algorithm, p.var, p.value, p.ne_time, p.te_time).unwrap();
        for x in p.ne_coeff.iter().chain(&p.te_coeff) {
            write!(out, ",{x:?}").unwrap();
        }
        writeln!(out, ",{},{},{}", p.detected, p.miss, p.inadmissible.is_none()).unwrap();
    }
    Ok(out)
}

pub fn emit_csv(results: &[SweepPoint], path: &Path) -> Result<()> {
    fs::write(path, format_csv(results)?).map_err(|e| io_err(path, e))
}

/// `event_idx,t_est,sampler_id,re,im`.
pub fn format_estimates_csv(est: &[Estimate]) -> String {
    let mut out = String::from("event_idx,t_est,sampler_id,re,im\n");
    for (i, e) in est.iter().enumerate() {
        for (s, c) in e.coeffs.iter().enumerate() {
            writeln!(out, "{i},{:?},{s},{:?},{:?}", e.t_est, c.re, c.im).unwrap();
        }
    }
    out
}

/// Nodewise dump of the reconstructed shapes, `event_idx,x,re,im`.
pub fn format_shapes_csv(est: &[Estimate]) -> String {
    let mut out = String::from("event_idx,x,re,im\n");
    for (i, e) in est.iter().enumerate() {
        for (x, v) in e.shape.grid().nodes().zip(e.shape.values()) {
            writeln!(out, "{i},{x:?},{:?},{:?}", v.re, v.im).unwrap();
        }
    }
    out
}

/// One parsed CSV row: `(algorithm, sweep_var, numeric columns, detected, miss, admissible)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub algorithm: String,
    pub sweep_var: String,
    /// `value, ne_time, te_time, ne_coeff…, te_coeff…`
    pub numbers: Vec<f64>,
    pub detected: usize,
    pub miss: bool,
    pub admissible: bool,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Invalid("empty CSV".into()))?;
    let cols = header.split(',').count();
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != cols {
                return Err(Error::Invalid(format!("expected {cols} fields: {line}")));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::Invalid(format!("not a number: {s}")));
            let numbers = f[2..cols - 3].iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
            let flag = |s: &str| s.parse::<bool>().map_err(|_| Error::Invalid(format!("not a flag: {s}")));
            Ok(CsvRow {
                algorithm: f[0].to_string(),
                sweep_var: f[1].to_string(),
                numbers,
                detected: f[cols - 3].parse().map_err(|_| Error::Invalid(format!("not a count: {}", f[cols - 3])))?,
                miss: flag(f[cols - 2])?,
                admissible: flag(f[cols - 1])?,
            })
        })
        .collect()
}

/// A polyline (or marker set) of a plot.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    /// Draw markers only.
    pub scatter: bool,
    pub color: &'static str,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn fmt_tick(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.round() as i64)
    } else {
        format!("{v:.3}")
    }
}

impl Plot {
    fn map_axis(v: f64, log: bool) -> Option<f64> {
        if !v.is_finite() {
            return None;
        }
        if log {
            (v > 0.0).then(|| v.log10())
        } else {
            Some(v)
        }
    }

    /// Standalone SVG document. Non-finite points, and non-positive ones on
    /// log axes, are dropped.
    pub fn to_svg(&self) -> String {
        let mapped: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| {
                s.points
                    .iter()
                    .filter_map(|&(x, y)| Some((Self::map_axis(x, self.log_x)?, Self::map_axis(y, self.log_y)?)))
                    .collect()
            })
            .collect();
        let all: Vec<(f64, f64)> = mapped.iter().flatten().copied().collect();
        let bounds = |sel: fn(&(f64, f64)) -> f64, log: bool| {
            let lo = all.iter().map(sel).fold(f64::INFINITY, f64::min);
            let hi = all.iter().map(sel).fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                return (0.0, 1.0);
            }
            let (lo, hi) = if log { (lo.floor(), hi.ceil()) } else { (lo, hi) };
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        let (x0, x1) = bounds(|p| p.0, self.log_x);
        let (y0, y1) = bounds(|p| p.1, self.log_y);
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
        writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, escape(&self.title)).unwrap();
        writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
        let ticks = |lo: f64, hi: f64, log: bool| -> Vec<f64> {
            if log {
                (lo as i64..=hi as i64).map(|k| k as f64).collect()
            } else {
                (0..=4).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect()
            }
        };
        for t in ticks(x0, x1, self.log_x) {
            let x = px(t);
            writeln!(s, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0).unwrap();
            writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle" font-size="11">{}</text>"#, TOP + ph + 18.0, fmt_tick(t, self.log_x)).unwrap();
        }
        for t in ticks(y0, y1, self.log_y) {
            let y = py(t);
            writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0).unwrap();
            writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"#, LEFT - 8.0, y + 4.0, fmt_tick(t, self.log_y)).unwrap();
        }
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, LEFT + pw / 2.0, H - 15.0, escape(&self.x_label)).unwrap();
        writeln!(
            s,
            r#"<text x="18" y="{0}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {0})">{1}</text>"#,
            TOP + ph / 2.0,
            escape(&self.y_label)
        )
        .unwrap();

        for (k, (series, pts)) in self.series.iter().zip(&mapped).enumerate() {
            let coords: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (px(x), py(y))).collect();
            if series.scatter {
                for (x, y) in &coords {
                    writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{}"/>"#, series.color).unwrap();
                }
            } else if !coords.is_empty() {
                let path: Vec<String> = coords.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let dash = if series.dashed { r#" stroke-dasharray="6,4""# } else { "" };
                writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.8"{dash}/>"#,
                    path.join(" "),
                    series.color
                )
                .unwrap();
            }
            let ly = TOP + 14.0 + 18.0 * k as f64;
            let lx = W - RIGHT + 12.0;
            if series.scatter {
                writeln!(s, r#"<circle cx="{}" cy="{ly}" r="3.5" fill="{}"/>"#, lx + 10.0, series.color).unwrap();
            } else {
                let dash = if series.dashed { r#" stroke-dasharray="6,4""# } else { "" };
                writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="1.8"{dash}/>"#, lx + 20.0, series.color)
                    .unwrap();
            }
            writeln!(s, r#"<text x="{}" y="{}" font-size="11">{}</text>"#, lx + 26.0, ly + 4.0, escape(&series.label)).unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// What a sweep plot shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Time,
    /// Coefficient error for the sampler with this index.
    Coeff(usize),
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// NE (solid) and TE (dashed) against the swept variable, one colour per
/// algorithm.
pub fn sweep_plot(results: &[SweepPoint], quantity: Quantity, title: &str) -> Result<Plot> {
    let first = results.first().ok_or_else(|| Error::Invalid("no results to plot".into()))?;
    let mut algos: Vec<_> = results.iter().map(|p| p.algorithm).collect();
    algos.dedup();
    let mut series = Vec::new();
    for (k, a) in algos.iter().enumerate() {
        let pts: Vec<&SweepPoint> = results.iter().filter(|p| p.algorithm == *a).collect();
        let pick = |p: &SweepPoint, theory: bool| match (quantity, theory) {
            (Quantity::Time, false) => p.ne_time,
            (Quantity::Time, true) => p.te_time,
            (Quantity::Coeff(s), false) => p.ne_coeff[s],
            (Quantity::Coeff(s), true) => p.te_coeff[s],
        };
        let color = COLORS[k % COLORS.len()];
        series.push(Series {
            label: format!("NE {a}"),
            points: pts.iter().map(|p| (p.value, pick(p, false))).collect(),
            dashed: false,
            scatter: false,
            color,
        });
        series.push(Series {
            label: format!("TE {a}"),
            points: pts.iter().map(|p| (p.value, pick(p, true))).collect(),
            dashed: true,
            scatter: false,
            color,
        });
    }
    let y_label = match quantity {
        Quantity::Time => "time error".to_string(),
        Quantity::Coeff(s) => format!("coefficient error, g{}", s + 1),
    };
    Ok(Plot { title: title.to_string(), x_label: first.var.to_string(), y_label, log_x: true, log_y: true, series })
}

pub fn emit_svg_plot(plot: &Plot, path: &Path) -> Result<()> {
    fs::write(path, plot.to_svg()).map_err(|e| io_err(path, e))
}
