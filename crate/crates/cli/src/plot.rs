//! Hand-written SVG: line plots, overlays and contour grids.
//!
//! Output depends only on the input numbers, so identical tables give
//! byte-identical documents.

use std::fmt::Write as _;

use crate::error::{CliError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series<'a> {
    pub label: &'a str,
    pub values: &'a [f64],
}

fn shape(msg: String) -> CliError {
    CliError::Numerical(format!("plot: {msg}"))
}

fn tick_label(x: f64) -> String {
    let r: f64 = format!("{x:.3e}").parse().unwrap_or(x);
    r.to_string()
}

/// Linear map from `[lo, hi]` onto `[a, b]`; a flat range maps to the middle.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        (a + b) / 2.0
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axis_labels(out: &mut String, x_label: &str, y_label: &str) {
    let plot_mid = LEFT + (WIDTH - LEFT - RIGHT) / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="{plot_mid:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let y_mid = TOP + (HEIGHT - TOP - BOTTOM) / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="16" y="{y_mid:.2}" text-anchor="middle" transform="rotate(-90 16 {y_mid:.2})">{}</text>"#,
        escape(y_label)
    );
}

/// One polyline per series over the shared `x` values.
pub fn line_plot(title: &str, x: &[f64], series: &[Series<'_>], y_label: &str) -> Result<String> {
    if x.len() < 2 {
        return Err(shape(format!("a line plot needs at least 2 points, got {}", x.len())));
    }
    if series.is_empty() {
        return Err(shape("no series to draw".into()));
    }
    for s in series {
        if s.values.len() != x.len() {
            return Err(shape(format!(
                "series {} has {} values for {} x points",
                s.label,
                s.values.len(),
                x.len()
            )));
        }
    }
    if x.iter()
        .chain(series.iter().flat_map(|s| s.values.iter()))
        .any(|v| !v.is_finite())
    {
        return Err(shape("values must be finite".into()));
    }
    let (x_lo, x_hi) = range(x.iter().copied());
    let (mut y_lo, mut y_hi) = range(series.iter().flat_map(|s| s.values.iter().copied()));
    // probabilities read best on their natural scale
    if y_lo >= 0.0 && y_hi <= 1.0 {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    let (px0, px1, py0, py1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);

    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(out, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(
        out,
        r#"<line x1="{px0:.2}" y1="{py0:.2}" x2="{px1:.2}" y2="{py0:.2}"/>"#
    );
    let _ = writeln!(
        out,
        r#"<line x1="{px0:.2}" y1="{py0:.2}" x2="{px0:.2}" y2="{py1:.2}"/>"#
    );
    let _ = writeln!(out, "</g>");
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x_lo + t * (x_hi - x_lo);
        let xp = scale(xv, x_lo, x_hi, px0, px1);
        let _ = writeln!(
            out,
            r#"<line x1="{xp:.2}" y1="{py0:.2}" x2="{xp:.2}" y2="{:.2}" stroke="black"/>"#,
            py0 + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{xp:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            py0 + 18.0,
            tick_label(xv)
        );
        let yv = y_lo + t * (y_hi - y_lo);
        let yp = scale(yv, y_lo, y_hi, py0, py1);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{yp:.2}" x2="{px0:.2}" y2="{yp:.2}" stroke="black"/>"#,
            px0 - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            px0 - 8.0,
            yp + 4.0,
            tick_label(yv)
        );
    }
    axis_labels(&mut out, "n", y_label);

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = x
            .iter()
            .zip(s.values)
            .map(|(&xv, &yv)| {
                format!(
                    "{:.2},{:.2}",
                    scale(xv, x_lo, x_hi, px0, px1),
                    scale(yv, y_lo, y_hi, py0, py1)
                )
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-label="{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            escape(s.label),
            points.join(" ")
        );
        for p in &points {
            let (cx, cy) = p.split_once(',').expect("formatted pair");
            let _ = writeln!(out, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>"#);
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Interpolates from dark blue (low) to near white (high).
fn cell_color(t: f64) -> String {
    const LOW: [f64; 3] = [8.0, 48.0, 107.0];
    const HIGH: [f64; 3] = [247.0, 251.0, 255.0];
    let c: Vec<u8> = LOW
        .iter()
        .zip(HIGH)
        .map(|(l, h)| (l + t * (h - l)).round() as u8)
        .collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// `values[i][j]` is drawn at column `n1[i]`, row `n2[j]`.
pub fn contour_plot(title: &str, n1: &[usize], n2: &[usize], values: &[Vec<f64>], label: &str) -> Result<String> {
    if n1.is_empty() || n2.is_empty() {
        return Err(shape("contour grid is empty".into()));
    }
    if values.len() != n1.len() || values.iter().any(|row| row.len() != n2.len()) {
        return Err(shape(format!(
            "contour values do not form a {}x{} grid",
            n1.len(),
            n2.len()
        )));
    }
    if values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(shape("values must be finite".into()));
    }
    let (lo, hi) = range(values.iter().flatten().copied());
    let (px0, px1, py0, py1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let cw = (px1 - px0) / n1.len() as f64;
    let ch = (py0 - py1) / n2.len() as f64;

    let mut out = String::new();
    header(&mut out, title);
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let x = px0 + cw * i as f64;
            let y = py0 - ch * (j + 1) as f64;
            let _ = writeln!(
                out,
                r#"<rect class="cell" x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="{}"><title>n1={} n2={} {}</title></rect>"#,
                cell_color(scale(v, lo, hi, 0.0, 1.0)),
                n1[i],
                n2[j],
                crate::report::format_real(v)
            );
        }
    }
    for (i, n) in n1.iter().enumerate() {
        let x = px0 + cw * (i as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="10">{n}</text>"#,
            py0 + 14.0
        );
    }
    for (j, n) in n2.iter().enumerate() {
        let y = py0 - ch * (j as f64 + 0.5) + 3.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" font-size="10">{n}</text>"#,
            px0 - 6.0
        );
    }
    let plot_mid = LEFT + (WIDTH - LEFT - RIGHT) / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="{plot_mid:.2}" y="{:.2}" text-anchor="middle">n1</text>"#,
        HEIGHT - 12.0
    );
    let y_mid = TOP + (HEIGHT - TOP - BOTTOM) / 2.0;
    let _ = writeln!(
        out,
        r#"<text x="16" y="{y_mid:.2}" text-anchor="middle" transform="rotate(-90 16 {y_mid:.2})">n2</text>"#
    );

    let lx = WIDTH - RIGHT + 20.0;
    let steps = 10;
    let sh = (py0 - py1) / steps as f64;
    for k in 0..steps {
        let t = (k as f64 + 0.5) / steps as f64;
        let y = py0 - sh * (k + 1) as f64;
        let _ = writeln!(
            out,
            r#"<rect class="legend" x="{lx:.2}" y="{y:.2}" width="16" height="{sh:.2}" fill="{}"/>"#,
            cell_color(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
        lx + 22.0,
        py1 + 10.0,
        tick_label(hi)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{py0:.2}">{}</text>"#,
        lx + 22.0,
        tick_label(lo)
    );
    let _ = writeln!(
        out,
        r#"<text x="{lx:.2}" y="{:.2}">{}</text>"#,
        py1 - 8.0,
        escape(label)
    );
    out.push_str("</svg>\n");
    Ok(out)
}
