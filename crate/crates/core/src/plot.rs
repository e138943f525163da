//! Static SVG plots of a trace: ground truth (red) against the derivative
//! estimate (blue), with the error in a second panel.
//!
//! Long traces are decimated by keeping the min and max of each pixel
//! column, so chattering stays visible. Output depends only on the trace.

use std::fmt::Write;

use crate::scenario::Trace;

const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const GAP: f64 = 60.0;
const COLUMNS: usize = 800;

struct Panel {
    top: f64,
    t_range: (f64, f64),
    v_range: (f64, f64),
}

impl Panel {
    fn x(&self, t: f64) -> f64 {
        let (t0, t1) = self.t_range;
        MARGIN_LEFT + (t - t0) / (t1 - t0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let (v0, v1) = self.v_range;
        self.top + PANEL_HEIGHT - (v - v0) / (v1 - v0) * PANEL_HEIGHT
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let pad = if hi > lo {
        0.05 * (hi - lo)
    } else {
        0.5 * lo.abs().max(1.0)
    };
    (lo - pad, hi + pad)
}

/// Min/max decimation of `(t, value)` pairs into at most `2 * COLUMNS` points.
fn decimate(ts: &[f64], vs: &[f64]) -> Vec<(f64, f64)> {
    if ts.len() <= 2 * COLUMNS {
        return ts.iter().copied().zip(vs.iter().copied()).collect();
    }
    let chunk = ts.len().div_ceil(COLUMNS);
    let mut out = Vec::with_capacity(2 * COLUMNS);
    for (tc, vc) in ts.chunks(chunk).zip(vs.chunks(chunk)) {
        let (mut imin, mut imax) = (0, 0);
        for (i, v) in vc.iter().enumerate() {
            if *v < vc[imin] {
                imin = i;
            }
            if *v > vc[imax] {
                imax = i;
            }
        }
        let (a, b) = if imin <= imax {
            (imin, imax)
        } else {
            (imax, imin)
        };
        out.push((tc[a], vc[a]));
        if b != a {
            out.push((tc[b], vc[b]));
        }
    }
    out
}

fn polyline(svg: &mut String, panel: &Panel, points: &[(f64, f64)], color: &str) {
    let _ = write!(
        svg,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points=""#
    );
    for (t, v) in points {
        let _ = write!(svg, "{:.2},{:.2} ", panel.x(*t), panel.y(*v));
    }
    svg.push_str("\"/>\n");
}

fn axes(svg: &mut String, panel: &Panel, label: &str) {
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (panel.top, panel.top + PANEL_HEIGHT);
    let _ = writeln!(
        svg,
        r##"<rect x="{x0}" y="{y0}" width="{}" height="{PANEL_HEIGHT}" fill="none" stroke="#444"/>"##,
        x1 - x0
    );
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let v = panel.v_range.0 + frac * (panel.v_range.1 - panel.v_range.0);
        let y = panel.y(v);
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end" font-family="sans-serif">{v:.3}</text>"##,
            x0 - 6.0,
            y + 4.0
        );
        let t = panel.t_range.0 + frac * (panel.t_range.1 - panel.t_range.0);
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle" font-family="sans-serif">{t:.1}</text>"##,
            panel.x(t),
            y1 + 15.0
        );
    }
    let _ = writeln!(
        svg,
        r##"<text x="{x0}" y="{:.1}" font-size="13" font-family="sans-serif">{label}</text>"##,
        y0 - 8.0
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders the trace as an SVG document.
pub fn render_svg(trace: &Trace, title: &str) -> String {
    let ts: Vec<f64> = trace.rows.iter().map(|r| r.t).collect();
    let truth: Vec<f64> = trace.rows.iter().map(|r| r.dchi0_true).collect();
    let estimate: Vec<f64> = trace.rows.iter().map(|r| r.estimate_dx).collect();
    let error: Vec<f64> = trace.rows.iter().map(|r| r.error).collect();

    let t_range = match (ts.first(), ts.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        _ => (0.0, 1.0),
    };
    let top = Panel {
        top: MARGIN_TOP,
        t_range,
        v_range: padded_range(truth.iter().chain(&estimate).copied()),
    };
    let bottom = Panel {
        top: MARGIN_TOP + PANEL_HEIGHT + GAP,
        t_range,
        v_range: padded_range(error.iter().copied()),
    };
    let height = bottom.top + PANEL_HEIGHT + 40.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" font-size="15" text-anchor="middle" font-family="sans-serif">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    axes(&mut svg, &top, "derivative: truth (red), estimate (blue)");
    polyline(&mut svg, &top, &decimate(&ts, &truth), "#d62728");
    polyline(&mut svg, &top, &decimate(&ts, &estimate), "#1f77b4");
    axes(&mut svg, &bottom, "error = estimate - truth");
    polyline(&mut svg, &bottom, &decimate(&ts, &error), "#1f77b4");
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{:.1}" font-size="12" text-anchor="middle" font-family="sans-serif">t [s]</text>"#,
        WIDTH / 2.0,
        height - 6.0
    );
    svg.push_str("</svg>\n");
    svg
}
