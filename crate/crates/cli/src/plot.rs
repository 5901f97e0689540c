//! Static log-log plots as SVG text.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 90.0;
const COLOURS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// A polyline in `(log10 t, log10 value)` coordinates.
#[derive(Debug, Clone)]
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    pub markers: bool,
}

impl Curve {
    /// Measured samples, drawn with markers.
    pub fn measured(label: impl Into<String>, samples: impl IntoIterator<Item = (f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points: samples.into_iter().map(|(t, v)| (t.log10(), v.log10())).collect(),
            dashed: false,
            markers: true,
        }
    }

    /// Dashed guide `c t^slope (ln t)^log_pow` through the measured point at `anchor`.
    pub fn guide(label: impl Into<String>, times: &[f64], slope: f64, log_pow: u32, anchor: (f64, f64)) -> Self {
        let shape = |t: f64| t.powf(slope) * t.ln().powi(log_pow as i32);
        let c = anchor.1 / shape(anchor.0);
        Self {
            label: label.into(),
            points: times.iter().map(|&t| (t.log10(), (c * shape(t)).log10())).collect(),
            dashed: true,
            markers: false,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick step from {0.1, 0.2, 0.25, 0.5, 1, 2, ...} giving at most 8 ticks.
fn tick_step(span: f64) -> f64 {
    let mut scale = 0.1;
    loop {
        for m in [1.0, 2.0, 2.5, 5.0] {
            if span / (m * scale) <= 8.0 {
                return m * scale;
            }
        }
        scale *= 10.0;
    }
}

/// Renders the curves with axes labelled `log10 t` and `log10 norm` and a
/// legend holding each curve label.
pub fn loglog_svg(title: &str, curves: &[Curve]) -> String {
    let finite = curves
        .iter()
        .flat_map(|c| c.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        (x0, x1) = (x0 - 0.5, x0 + 0.5);
    }
    if !(y1 > y0) {
        (y0, y1) = (y0 - 0.5, y0 + 0.5);
    }
    let (px, py) = (0.05 * (x1 - x0), 0.05 * (y1 - y0));
    let (x0, x1, y0, y1) = (x0 - px, x1 + px, y0 - py, y1 + py);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="black"/>"#
    );
    for (lo, hi, vertical) in [(x0, x1, true), (y0, y1, false)] {
        let step = tick_step(hi - lo);
        let mut v = (lo / step).ceil() * step;
        while v <= hi {
            let label = format!("{:.2}", v + 0.0);
            if vertical {
                let x = sx(v);
                let _ = writeln!(
                    out,
                    r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{TOP}" stroke="#ddd"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{label}</text>"##,
                    TOP + plot_h,
                    TOP + plot_h + 16.0
                );
            } else {
                let y = sy(v);
                let _ = writeln!(
                    out,
                    r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"##,
                    LEFT + plot_w,
                    LEFT - 6.0,
                    y + 4.0
                );
            }
            v += step;
        }
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">log10 t</text>"#,
        LEFT + plot_w / 2.0,
        TOP + plot_h + 34.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">log10 norm</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (i, c) in curves.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let pts: Vec<String> = c
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if c.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}/>"#,
            pts.join(" ")
        );
        if c.markers {
            for p in &pts {
                let (x, y) = p.split_once(',').unwrap_or(("0", "0"));
                let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="2.5" fill="{colour}"/>"#);
            }
        }
        let ly = TOP + plot_h + 52.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{LEFT}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{colour}" stroke-width="1.5"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
            ly - 4.0,
            LEFT + 24.0,
            ly - 4.0,
            LEFT + 30.0,
            ly,
            escape(&c.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_has_axes_and_legend() {
        let times = [1e2f64, 1e3, 1e4];
        let measured = Curve::measured("measured", times.iter().map(|&t| (t, t.powf(-0.5))));
        let guide = Curve::guide("compact N<2beta | gamma<1", &times, -0.5, 0, (1e2, 0.1));
        let svg = loglog_svg("a & b", &[measured, guide]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("log10 t") && svg.contains("log10 norm"));
        assert!(svg.contains("gamma&lt;1") && svg.contains("a &amp; b"));
        assert_eq!(svg.matches("<circle").count(), 3);
    }

    #[test]
    fn tick_steps() {
        assert_eq!(tick_step(2.0), 0.25);
        assert_eq!(tick_step(0.5), 0.1);
        assert_eq!(tick_step(30.0), 5.0);
    }
}
