//! Minimal static ROC plot: axes, chance diagonal, curve polyline and labels.

use std::fmt::Write;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PLOT: f64 = SIZE - 2.0 * MARGIN;

fn x_px(fpr: f64) -> f64 {
    MARGIN + fpr * PLOT
}

fn y_px(tpr: f64) -> f64 {
    SIZE - MARGIN - tpr * PLOT
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// `points` are `(fpr, tpr)` pairs in threshold order.
pub fn roc_svg(points: &[(f64, f64)], auc: f64, title: &str, description: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<desc>{}</desc>", escape(description));
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);

    let (x0, x1, y0, y1) = (x_px(0.0), x_px(1.0), y_px(0.0), y_px(1.0));
    let _ = writeln!(s, r#"<path d="M{x0} {y1} V{y0} H{x1}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let v = i as f64 / 4.0;
        let (tx, ty) = (x_px(v), y_px(v));
        let _ = writeln!(s, r#"<line x1="{tx}" y1="{y0}" x2="{tx}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{tx}" y="{}" text-anchor="middle">{v:.2}</text>"#, y0 + 20.0);
        let _ = writeln!(s, r#"<line x1="{}" y1="{ty}" x2="{x0}" y2="{ty}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{v:.2}</text>"#, x0 - 8.0, ty + 4.0);
    }
    let _ = writeln!(
        s,
        r##"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y1}" stroke="#999999" stroke-dasharray="4 4"/>"##
    );

    let coords: Vec<String> = points.iter().map(|&(f, t)| format!("{:.3},{:.3}", x_px(f), y_px(t))).collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1f4e9c" stroke-width="2"/>"##,
        coords.join(" ")
    );

    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">False positive rate</text>"#, SIZE / 2.0, SIZE - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">True positive rate</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{}</text>"#, SIZE / 2.0, escape(title));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">AUC = {auc:.4}</text>"#, x1 - 10.0, y0 - 12.0);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_curve_hugs_the_corner() {
        let svg = roc_svg(&[(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)], 1.0, "ROC", "a < b");
        assert!(svg.contains("60.000,420.000 60.000,60.000 420.000,60.000"));
        assert!(svg.contains("AUC = 1.0000"));
        assert!(svg.contains("<desc>a &lt; b</desc>"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
