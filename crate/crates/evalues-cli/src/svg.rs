//! Minimal SVG line charts: polylines, axes, tick labels. No dependencies,
//! deterministic output.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 20.0;
const MARGIN_BOTTOM: f64 = 45.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

fn fmt2(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Renders one polyline per named series; x is the step index.
pub fn line_chart(
    title: &str,
    y_label: &str,
    series: &[(String, Vec<f64>)],
) -> String {
    let steps = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let x_max = steps.saturating_sub(1).max(1) as f64;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for (_, values) in series {
        for &v in values {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
    }
    if !y_min.is_finite() || !y_max.is_finite() {
        y_min = 0.0;
        y_max = 1.0;
    }
    if y_min == y_max {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + x / x_max * plot_w;
    let sy = |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="14" font-family="sans-serif" font-size="13" text-anchor="middle">{title}</text>"#,
        MARGIN_LEFT + plot_w / 2.0
    );

    // Axes.
    let _ = writeln!(
        out,
        r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
        l = MARGIN_LEFT,
        r = WIDTH - MARGIN_RIGHT,
        b = HEIGHT - MARGIN_BOTTOM
    );
    let _ = writeln!(
        out,
        r#"<line x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="black"/>"#,
        l = MARGIN_LEFT,
        t = MARGIN_TOP,
        b = HEIGHT - MARGIN_BOTTOM
    );

    // Ticks: five per axis.
    for i in 0..=4 {
        let fx = i as f64 / 4.0;
        let x_value = fx * x_max;
        let px = sx(x_value);
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{b}" x2="{x}" y2="{b2}" stroke="black"/>"#,
            x = fmt2(px),
            b = HEIGHT - MARGIN_BOTTOM,
            b2 = HEIGHT - MARGIN_BOTTOM + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="middle">{label}</text>"#,
            x = fmt2(px),
            y = HEIGHT - MARGIN_BOTTOM + 18.0,
            label = fmt2(x_value)
        );
        let y_value = y_min + fx * (y_max - y_min);
        let py = sy(y_value);
        let _ = writeln!(
            out,
            r#"<line x1="{x2}" y1="{y}" x2="{l}" y2="{y}" stroke="black"/>"#,
            x2 = MARGIN_LEFT - 5.0,
            l = MARGIN_LEFT,
            y = fmt2(py)
        );
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="end">{label}</text>"#,
            x = MARGIN_LEFT - 8.0,
            y = fmt2(py + 4.0),
            label = fmt2(y_value)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="12" text-anchor="middle">step</text>"#,
        x = MARGIN_LEFT + plot_w / 2.0,
        y = HEIGHT - 8.0
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{y}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 14 {y})">{y_label}</text>"#,
        y = MARGIN_TOP + plot_h / 2.0
    );

    // Series.
    for (index, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[index % PALETTE.len()];
        let mut path = String::with_capacity(values.len() * 12);
        for (step, &v) in values.iter().enumerate() {
            if step > 0 {
                path.push(' ');
            }
            let _ = write!(path, "{},{}", fmt2(sx(step as f64)), fmt2(sy(v)));
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="11" fill="{color}">{name}</text>"#,
            x = WIDTH - MARGIN_RIGHT - 150.0,
            y = MARGIN_TOP + 16.0 * (index + 1) as f64
        );
    }
    out.push_str("</svg>\n");
    out
}
