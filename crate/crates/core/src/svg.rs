// SPDX-License-Identifier: Apache-2.0

//! Minimal deterministic SVG output: line plots and heatmaps.
//!
//! Coordinates are printed with two decimals so identical data gives identical bytes.

use std::fmt::Write;

use crate::data::Map2D;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
/// Viridis control points.
const CMAP: [(u8, u8, u8); 5] = [
    (68, 1, 84),
    (59, 82, 139),
    (33, 145, 140),
    (94, 201, 98),
    (253, 231, 37),
];

pub struct Line<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

fn finite_range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(x), b.max(x))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

fn frame(
    out: &mut String,
    title: &str,
    x_label: &str,
    y_label: &str,
    xr: (f64, f64),
    yr: (f64, f64),
) {
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let _ = write!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">
<rect width="100%" height="100%" fill="white"/>
<text x="{:.2}" y="18" text-anchor="middle" font-size="13">{}</text>
<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>
"##,
        LEFT + pw / 2.0,
        escape(title)
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let x = LEFT + f * pw;
        let y = TOP + ph - f * ph;
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            tick_label(xr.0 + f * (xr.1 - xr.0))
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 7.0,
            y + 4.0,
            tick_label(yr.0 + f * (yr.1 - yr.0))
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
}

pub fn line_plot(title: &str, x_label: &str, y_label: &str, lines: &[Line<'_>]) -> String {
    let xr = finite_range(lines.iter().flat_map(|l| l.x.iter().copied()));
    let yr = finite_range(lines.iter().flat_map(|l| l.y.iter().copied()));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let mut out = String::new();
    frame(&mut out, title, x_label, y_label, xr, yr);
    for (k, line) in lines.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let mut pts = String::new();
        for (&x, &y) in line.x.iter().zip(line.y) {
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            let px = LEFT + (x - xr.0) / (xr.1 - xr.0) * pw;
            let py = TOP + ph - (y - yr.0) / (yr.1 - yr.0) * ph;
            let _ = write!(pts, "{px:.2},{py:.2} ");
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.trim_end()
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}" text-anchor="end">{}</text>"#,
            WIDTH - RIGHT - 6.0,
            TOP + 14.0 + 14.0 * k as f64,
            escape(line.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn colormap(t: f64) -> (u8, u8, u8) {
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let s = t * (CMAP.len() - 1) as f64;
    let i = (s.floor() as usize).min(CMAP.len() - 2);
    let f = s - i as f64;
    let lerp = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
    let (a, b) = (CMAP[i], CMAP[i + 1]);
    (lerp(a.0, b.0), lerp(a.1, b.1), lerp(a.2, b.2))
}

/// Heatmap with the fast axis horizontal and the slow axis vertical.
pub fn heatmap(title: &str, map: &Map2D) -> String {
    let (rows, cols) = map.shape();
    let xr = finite_range(map.fast.iter().copied());
    let yr = finite_range(map.slow.iter().copied());
    let zr = finite_range(map.values.iter().flatten().copied());
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let mut out = String::new();
    frame(&mut out, title, &map.fast_label, &map.slow_label, xr, yr);
    let cw = pw / cols.max(1) as f64;
    let rh = ph / rows.max(1) as f64;
    for (i, row) in map.values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let (r, g, b) = colormap((v - zr.0) / (zr.1 - zr.0));
            let _ = writeln!(
                out,
                r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#{r:02x}{g:02x}{b:02x}"/>"##,
                LEFT + j as f64 * cw,
                TOP + ph - (i + 1) as f64 * rh,
                cw + 0.05,
                rh + 0.05
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">color: {} .. {}</text>"#,
        WIDTH - RIGHT,
        HEIGHT - 10.0,
        tick_label(zr.0),
        tick_label(zr.1)
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_deterministic_and_closed() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, f64::NAN, 3.0];
        let lines = [Line {
            label: "a<b",
            x: &x,
            y: &y,
        }];
        let a = line_plot("t", "x", "y", &lines);
        assert_eq!(a, line_plot("t", "x", "y", &lines));
        assert!(a.ends_with("</svg>\n"));
        assert!(a.contains("a&lt;b"));
        assert!(!a.contains("NaN"));
    }

    #[test]
    fn heatmap_has_one_cell_per_value() {
        let m = Map2D::new(
            "v",
            "f",
            vec![0.0, 1.0],
            vec![0.0, 1.0, 2.0],
            vec![vec![0.0; 3], vec![1.0; 3]],
        )
        .unwrap();
        let s = heatmap("m", &m);
        assert_eq!(s.matches("<rect x=").count(), 1 + 6);
        assert!(s.contains("#440154"));
        assert!(s.contains("#fde725"));
    }
}
