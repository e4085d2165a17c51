//! Minimal SVG scatterplots with one glyph per class.
//!
//! Output is plain text with fixed-precision coordinates and no timestamps,
//! so identical inputs give identical files.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const LEGEND_WIDTH: f64 = 150.0;

const COLOURS: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Glyph {
    Circle,
    Square,
    Triangle,
    Diamond,
    Cross,
}

const GLYPHS: [Glyph; 5] = [
    Glyph::Circle,
    Glyph::Square,
    Glyph::Triangle,
    Glyph::Diamond,
    Glyph::Cross,
];

fn style(class: usize) -> (Glyph, &'static str) {
    (GLYPHS[class % GLYPHS.len()], COLOURS[class % COLOURS.len()])
}

fn glyph(out: &mut String, class: usize, x: f64, y: f64, r: f64, css: &str) {
    let (g, colour) = style(class);
    let _ = match g {
        Glyph::Circle => writeln!(
            out,
            r#"<circle class="{css}" cx="{x:.2}" cy="{y:.2}" r="{r:.1}" fill="{colour}"/>"#
        ),
        Glyph::Square => writeln!(
            out,
            r#"<rect class="{css}" x="{:.2}" y="{:.2}" width="{:.1}" height="{:.1}" fill="{colour}"/>"#,
            x - r,
            y - r,
            2.0 * r,
            2.0 * r
        ),
        Glyph::Triangle => writeln!(
            out,
            r#"<polygon class="{css}" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{colour}"/>"#,
            x,
            y - r,
            x - r,
            y + r,
            x + r,
            y + r
        ),
        Glyph::Diamond => writeln!(
            out,
            r#"<polygon class="{css}" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{colour}"/>"#,
            x,
            y - r,
            x + r,
            y,
            x,
            y + r,
            x - r,
            y
        ),
        Glyph::Cross => writeln!(
            out,
            r#"<path class="{css}" d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="{colour}" stroke-width="2"/>"#,
            x - r,
            y - r,
            x + r,
            y + r,
            x - r,
            y + r,
            x + r,
            y - r
        ),
    };
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// A scatterplot: points as `(x, y, class id)`.
pub struct Scatter<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub classes: &'a [String],
    pub points: &'a [(f64, f64, usize)],
}

impl Scatter<'_> {
    pub fn to_svg(&self) -> String {
        let (mut x0, mut x1, mut y0, mut y1) = self.points.iter().fold(
            (
                f64::INFINITY,
                f64::NEG_INFINITY,
                f64::INFINITY,
                f64::NEG_INFINITY,
            ),
            |(a, b, c, d), &(x, y, _)| (a.min(x), b.max(x), c.min(y), d.max(y)),
        );
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 == 0.0 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 == 0.0 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let plot_w = WIDTH - 2.0 * MARGIN;
        let plot_h = HEIGHT - 2.0 * MARGIN;
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * plot_h;

        let total_w = WIDTH + LEGEND_WIDTH;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{HEIGHT}" viewBox="0 0 {total_w} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(
            s,
            r#"<rect width="{total_w}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
        );
        for (v, anchor_x) in [(x0, MARGIN), (x1, WIDTH - MARGIN)] {
            let _ = writeln!(
                s,
                r#"<text x="{anchor_x:.1}" y="{:.1}" text-anchor="middle">{v:.3}</text>"#,
                HEIGHT - MARGIN + 16.0
            );
        }
        for (v, anchor_y) in [(y0, HEIGHT - MARGIN), (y1, MARGIN)] {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{anchor_y:.1}" text-anchor="end">{v:.3}</text>"#,
                MARGIN - 6.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(self.y_label)
        );

        for &(x, y, class) in self.points {
            glyph(&mut s, class, sx(x), sy(y), 3.5, "marker");
        }

        for (i, name) in self.classes.iter().enumerate() {
            let y = MARGIN + 10.0 + 16.0 * i as f64;
            let _ = writeln!(s, r#"<g class="legend-entry">"#);
            glyph(&mut s, i, WIDTH + 12.0, y, 4.0, "legend-glyph");
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}">({}) {}</text>"#,
                WIDTH + 22.0,
                y + 4.0,
                i + 1,
                escape(name)
            );
            let _ = writeln!(s, "</g>");
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_marker_per_point_and_legend_per_class() {
        let classes = vec!["a".to_string(), "b<c".to_string(), "d".to_string()];
        let points: Vec<(f64, f64, usize)> =
            (0..7).map(|i| (i as f64, (i * i) as f64, i % 3)).collect();
        let svg = Scatter {
            title: "t",
            x_label: "x",
            y_label: "y",
            classes: &classes,
            points: &points,
        }
        .to_svg();
        assert_eq!(svg.matches(r#"class="marker""#).count(), 7);
        assert_eq!(svg.matches(r#"class="legend-entry""#).count(), 3);
        assert!(svg.contains("b&lt;c"));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn degenerate_ranges_do_not_produce_nan() {
        let classes = vec!["a".to_string()];
        let points = vec![(1.0, 1.0, 0), (1.0, 1.0, 0)];
        let svg = Scatter {
            title: "",
            x_label: "",
            y_label: "",
            classes: &classes,
            points: &points,
        }
        .to_svg();
        assert!(!svg.contains("NaN"));
    }
}
