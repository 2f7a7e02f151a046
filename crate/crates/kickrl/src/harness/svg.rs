//! Static SVG learning-curve charts, written by hand so the binary carries
//! no plotting dependency.

use crate::harness::metrics::median_series;
use crate::harness::{HarnessError, RunResult};
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 64.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Round tick spacing to a 1/2/5 decade multiple.
fn nice_step(span: f64, target_ticks: usize) -> f64 {
    let raw = span / target_ticks as f64;
    let mag = 10f64.powf(raw.log10().floor());
    for m in [1.0, 2.0, 5.0, 10.0] {
        if raw <= m * mag {
            return m * mag;
        }
    }
    10.0 * mag
}

fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let step = nice_step(hi - lo, target);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t == 0.0 { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e7 {
        format!("{}", v as i64)
    } else {
        format!("{v:.2}")
    }
}

/// Renders one seed-median moving-average polyline per run, a horizontal
/// reference line at the no-contact return -4, labeled axes, and a legend.
pub fn emit_plot(results: &[RunResult], path: &Path) -> Result<(), HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::Config("plot needs at least one run".into()));
    }
    let episodes = results[0].config.episodes;
    if results.iter().any(|r| r.config.episodes != episodes) {
        return Err(HarnessError::Config(
            "plot needs runs with the same episode count".into(),
        ));
    }

    let series: Vec<(String, Vec<f64>)> = results
        .iter()
        .map(|r| {
            (
                r.config.encoding.to_string(),
                median_series(&r.moving_averages),
            )
        })
        .collect();

    let reference = -4.0f64;
    let mut y_min = reference;
    let mut y_max = reference;
    for (_, s) in &series {
        for &v in s {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    let pad = 0.08 * (y_max - y_min).max(1.0);
    let (y_min, y_max) = (y_min - pad, y_max + pad);

    let (x_min, x_max) = (1.0, episodes as f64);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_x = |ep: f64| {
        if x_max > x_min {
            MARGIN_LEFT + (ep - x_min) / (x_max - x_min) * plot_w
        } else {
            MARGIN_LEFT + plot_w / 2.0
        }
    };
    let to_y = |v: f64| MARGIN_TOP + (y_max - v) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    // Axes.
    let (x0, y0) = (MARGIN_LEFT, MARGIN_TOP + plot_h);
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{:.2}" y2="{y0}" stroke="black" stroke-width="1"/>"#,
        MARGIN_LEFT + plot_w
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{MARGIN_TOP}" x2="{x0}" y2="{y0}" stroke="black" stroke-width="1"/>"#
    );

    for t in ticks(x_min, x_max, 6) {
        let x = to_x(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
            y0 + 6.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            y0 + 20.0,
            fmt_tick(t)
        );
    }
    for t in ticks(y_min, y_max, 6) {
        let y = to_y(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black" stroke-width="1"/>"#,
            x0 - 6.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            x0 - 10.0,
            y + 4.0,
            fmt_tick(t)
        );
    }

    // Axis labels.
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle">episode</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">moving-average total reward</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    // No-contact reference line.
    let yr = to_y(reference);
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{yr:.2}" x2="{:.2}" y2="{yr:.2}" stroke="gray" stroke-width="1" stroke-dasharray="6,4"/>"#,
        MARGIN_LEFT + plot_w
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="gray">no-contact return {reference}</text>"#,
        x0 + 6.0,
        yr - 5.0
    );

    // Data polylines.
    for (i, (name, s)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (ep0, &v) in s.iter().enumerate() {
            let _ = write!(points, "{:.2},{:.2} ", to_x(ep0 as f64 + 1.0), to_y(v));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
        // Legend entry.
        let ly = MARGIN_TOP + 14.0 + i as f64 * 20.0;
        let lx = MARGIN_LEFT + plot_w + 16.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 24.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13">{}</text>"#,
            lx + 30.0,
            ly + 4.0,
            xml_escape(name)
        );
    }

    let _ = writeln!(svg, "</svg>");
    std::fs::write(path, svg).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nice_ticks_cover_range() {
        let t = ticks(1.0, 3000.0, 6);
        assert!(t.len() >= 4 && t.len() <= 8);
        assert!(t[0] >= 1.0 && *t.last().unwrap() <= 3000.0);
    }

    #[test]
    fn degenerate_tick_range_terminates() {
        assert_eq!(ticks(1.0, 1.0, 6), vec![1.0]);
        assert_eq!(ticks(-4.0, -4.0, 6), vec![-4.0]);
    }

    #[test]
    fn escape_handles_specials() {
        assert_eq!(xml_escape("a<b&c>d"), "a&lt;b&amp;c&gt;d");
    }
}
