//! Deterministic SVG charts, generated directly as strings: fixed 800x600
//! viewBox, decade ticks, no timestamps, fixed-precision coordinates — the
//! same inputs always produce the same bytes.

use crate::engine::{PhaseRow, TrajectoryRecord};
use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

fn px(v: f64) -> String {
    format!("{v:.2}")
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let w = WIDTH - MARGIN_L - MARGIN_R;
        MARGIN_L + (v - self.x_min) / (self.x_max - self.x_min) * w
    }

    fn y(&self, v: f64) -> f64 {
        let h = HEIGHT - MARGIN_T - MARGIN_B;
        HEIGHT - MARGIN_B - (v - self.y_min) / (self.y_max - self.y_min) * h
    }
}

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 600" font-family="monospace">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="800" height="600" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="400" y="24" font-size="16" text-anchor="middle">{title}</text>"#
    );
    s
}

fn axes(s: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        px(MARGIN_L),
        px(MARGIN_T),
        px(WIDTH - MARGIN_L - MARGIN_R),
        px(HEIGHT - MARGIN_T - MARGIN_B)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{x_label}</text>"#,
        px((MARGIN_L + WIDTH - MARGIN_R) / 2.0),
        px(HEIGHT - 14.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{y_label}</text>"#,
        px((MARGIN_T + HEIGHT - MARGIN_B) / 2.0),
        px((MARGIN_T + HEIGHT - MARGIN_B) / 2.0)
    );
    let _ = f;
}

fn decade_ticks_x(s: &mut String, f: &Frame) {
    let lo = f.x_min.ceil() as i64;
    let hi = f.x_max.floor() as i64;
    for e in lo..=hi {
        let xp = f.x(e as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#cccccc"/>"##,
            px(MARGIN_T),
            px(HEIGHT - MARGIN_B),
            x = px(xp)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">1e{e}</text>"#,
            px(xp),
            px(HEIGHT - MARGIN_B + 16.0)
        );
    }
}

fn decade_ticks_y(s: &mut String, f: &Frame) {
    let lo = f.y_min.ceil() as i64;
    let hi = f.y_max.floor() as i64;
    for e in lo..=hi {
        let yp = f.y(e as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#cccccc"/>"##,
            px(MARGIN_L),
            px(WIDTH - MARGIN_R),
            y = px(yp)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">1e{e}</text>"#,
            px(MARGIN_L - 6.0),
            px(yp + 4.0)
        );
    }
}

fn sorted_quantile(values: &mut Vec<f64>, fraction: f64) -> Option<f64> {
    values.retain(|v| v.is_finite());
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let idx = ((fraction * n as f64).ceil() as usize).clamp(1, n) - 1;
    Some(values[idx])
}

/// Log-log chart of `u_k` versus iterate index: median line with an
/// interquartile band across trajectories. The x axis plots `k + 1` so the
/// first iterate is representable on the log scale; `u` values are floored
/// at 1e-16 for the same reason. Nonfinite values are dropped per
/// checkpoint.
pub fn u_vs_k_svg(records: &[TrajectoryRecord], title: &str) -> String {
    const U_FLOOR: f64 = 1e-16;
    // Shared checkpoint grid is guaranteed by construction; take the union
    // of indices to stay robust anyway.
    let mut grid: Vec<u64> = records
        .iter()
        .flat_map(|r| r.checkpoints.iter().map(|(k, _)| *k))
        .collect();
    grid.sort_unstable();
    grid.dedup();

    let mut stats: Vec<(f64, f64, f64, f64)> = Vec::new(); // (log k+1, q25, med, q75)
    for k in &grid {
        let mut us: Vec<f64> = records
            .iter()
            .flat_map(|r| {
                r.checkpoints
                    .iter()
                    .filter(|(kk, _)| kk == k)
                    .map(|(_, u)| u.max(U_FLOOR))
            })
            .collect();
        let med = sorted_quantile(&mut us, 0.5);
        let q25 = sorted_quantile(&mut us, 0.25);
        let q75 = sorted_quantile(&mut us, 0.75);
        if let (Some(q25), Some(med), Some(q75)) = (q25, med, q75) {
            stats.push((
                ((*k + 1) as f64).log10(),
                q25.log10(),
                med.log10(),
                q75.log10(),
            ));
        }
    }

    let mut s = svg_open(title);
    if stats.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let x_max = stats.iter().map(|t| t.0).fold(0.0, f64::max).max(1.0);
    let y_min = stats.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let y_max = stats.iter().map(|t| t.3).fold(f64::NEG_INFINITY, f64::max);
    let f = Frame {
        x_min: 0.0,
        x_max,
        y_min: (y_min - 0.2).floor(),
        y_max: (y_max + 0.2).ceil().max((y_min - 0.2).floor() + 1.0),
    };
    decade_ticks_x(&mut s, &f);
    decade_ticks_y(&mut s, &f);
    axes(&mut s, &f, "k+1", "u_k");

    // Interquartile band.
    let mut path = String::from("M");
    for (i, (x, q25, _, _)) in stats.iter().enumerate() {
        let _ = write!(path, "{}{},{}", if i == 0 { "" } else { " L" }, px(f.x(*x)), px(f.y(*q25)));
    }
    for (x, _, _, q75) in stats.iter().rev() {
        let _ = write!(path, " L{},{}", px(f.x(*x)), px(f.y(*q75)));
    }
    path.push('Z');
    let _ = writeln!(
        s,
        r##"<path d="{path}" fill="#9ecae1" fill-opacity="0.45" stroke="none"/>"##
    );

    // Median polyline.
    let pts: Vec<String> = stats
        .iter()
        .map(|(x, _, med, _)| format!("{},{}", px(f.x(*x)), px(f.y(*med))))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#08519c" stroke-width="1.6"/>"##,
        pts.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

/// Converged-fraction versus decay exponent, with the admissibility
/// threshold `1/p` drawn as a dashed line when `p` is supplied.
pub fn phase_svg(rows: &[PhaseRow], p: Option<f64>, title: &str) -> String {
    let mut s = svg_open(title);
    if rows.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let x_min = rows.iter().map(|r| r.xi).fold(f64::INFINITY, f64::min);
    let x_max = rows.iter().map(|r| r.xi).fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.05 * (x_max - x_min).max(0.1);
    let f = Frame {
        x_min: (x_min - pad).max(0.0),
        x_max: x_max + pad,
        y_min: 0.0,
        y_max: 1.0,
    };
    // Fraction gridlines at 0, 0.25, ..., 1.
    for i in 0..=4 {
        let v = f64::from(i) * 0.25;
        let yp = f.y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#cccccc"/>"##,
            px(MARGIN_L),
            px(WIDTH - MARGIN_R),
            y = px(yp)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{v:.2}</text>"#,
            px(MARGIN_L - 6.0),
            px(yp + 4.0)
        );
    }
    // Xi tick per row.
    for r in rows {
        let xp = f.x(r.xi);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            px(xp),
            px(HEIGHT - MARGIN_B + 16.0),
            r.xi
        );
    }
    axes(&mut s, &f, "xi", "converged fraction");
    if let Some(p) = p {
        let xp = f.x(1.0 / p);
        if (f.x_min..=f.x_max).contains(&(1.0 / p)) {
            let _ = writeln!(
                s,
                r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#d62728" stroke-dasharray="6 4"/>"##,
                px(MARGIN_T),
                px(HEIGHT - MARGIN_B),
                x = px(xp)
            );
            let _ = writeln!(
                s,
                r##"<text x="{}" y="{}" font-size="11" fill="#d62728" text-anchor="middle">1/p</text>"##,
                px(xp),
                px(MARGIN_T - 6.0)
            );
        }
    }
    let pts: Vec<String> = rows
        .iter()
        .map(|r| format!("{},{}", px(f.x(r.xi)), px(f.y(r.converged_fraction))))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#08519c" stroke-width="1.6"/>"##,
        pts.join(" ")
    );
    for r in rows {
        let _ = writeln!(
            s,
            r##"<circle cx="{}" cy="{}" r="3.5" fill="#08519c"/>"##,
            px(f.x(r.xi)),
            px(f.y(r.converged_fraction))
        );
    }
    s.push_str("</svg>\n");
    s
}
