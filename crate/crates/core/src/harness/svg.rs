//! Static SVG bar charts. Hand-written markup, no layout engine.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const LABEL_W: f64 = 170.0;
const ROW_H: f64 = 28.0;
const TOP: f64 = 44.0;
const COLORS: [&str; 4] = ["#3b6ea8", "#d9822b", "#5a9e4b", "#8c8c8c"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn header(s: &mut String, height: f64, title: &str) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15" font-weight="bold">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

/// Horizontal bars, one per `(label, value)`, annotated with `value` and `unit`.
pub fn bar_chart(title: &str, bars: &[(&str, f64)], unit: &str) -> String {
    let height = TOP + ROW_H * bars.len() as f64 + 16.0;
    let plot_w = WIDTH - LABEL_W - 90.0;
    let max = bars.iter().map(|b| b.1).fold(0.0f64, f64::max);
    let mut s = String::new();
    header(&mut s, height, title);
    for (i, (label, v)) in bars.iter().enumerate() {
        let y = TOP + ROW_H * i as f64;
        let w = if max > 0.0 { plot_w * v.max(0.0) / max } else { 0.0 };
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LABEL_W - 8.0,
            y + 17.0,
            escape(label)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LABEL_W}" y="{}" width="{w:.2}" height="{}" fill="{}"/>"#,
            y + 4.0,
            ROW_H - 8.0,
            COLORS[i % COLORS.len()]
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}">{v:.1}{}</text>"#,
            LABEL_W + w + 6.0,
            y + 17.0,
            escape(unit)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Pairs of horizontal bars per group, e.g. two strategies per metric.
pub fn grouped_bar_chart(title: &str, series: [&str; 2], groups: &[(&str, [f64; 2])], unit: &str) -> String {
    let group_h = 2.0 * ROW_H;
    let height = TOP + group_h * groups.len() as f64 + 40.0;
    let plot_w = WIDTH - LABEL_W - 110.0;
    let mut s = String::new();
    header(&mut s, height, title);
    for (g, (label, values)) in groups.iter().enumerate() {
        let y0 = TOP + group_h * g as f64;
        let max = values.iter().copied().fold(0.0f64, f64::max);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            LABEL_W - 8.0,
            y0 + ROW_H + 4.0,
            escape(label)
        );
        for (k, v) in values.iter().enumerate() {
            let y = y0 + ROW_H * k as f64;
            let w = if max > 0.0 { plot_w * v.max(0.0) / max } else { 0.0 };
            let _ = writeln!(
                s,
                r#"<rect x="{LABEL_W}" y="{}" width="{w:.2}" height="{}" fill="{}"/>"#,
                y + 4.0,
                ROW_H - 8.0,
                COLORS[k]
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{}">{v:.4}{}</text>"#,
                LABEL_W + w + 6.0,
                y + 17.0,
                escape(unit)
            );
        }
    }
    let ly = height - 18.0;
    for (k, name) in series.iter().enumerate() {
        let x = LABEL_W + 200.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="{}" width="14" height="14" fill="{}"/>"#,
            ly - 11.0,
            COLORS[k]
        );
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, x + 20.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}
