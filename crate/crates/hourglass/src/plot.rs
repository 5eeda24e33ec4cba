//! Minimal SVG line plots for sweep outputs.
//!
//! The CSV files are the contract; these plots are a convenience for eyeball
//! checks, so the plotter stays deliberately small: linear axes, automatic
//! ranges, a handful of ticks, fixed colors, no dependency.

use crate::error::{Error, Result};
use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 52.0;
const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

#[derive(Debug, Clone)]
pub struct LinePlot {
    title: String,
    x_label: String,
    y_label: String,
    series: Vec<(String, Vec<(f64, f64)>)>,
}

impl LinePlot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> LinePlot {
        LinePlot { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), series: Vec::new() }
    }

    pub fn series(mut self, name: impl Into<String>, points: Vec<(f64, f64)>) -> LinePlot {
        self.series.push((name.into(), points));
        self
    }

    fn ranges(&self) -> Result<(f64, f64, f64, f64)> {
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|(_, p)| p.iter().copied())
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        if pts.len() < 2 {
            return Err(Error::invalid("plot needs at least two finite points"));
        }
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for (x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x1 == x0 {
            x1 = x0 + 1.0;
        }
        if y1 == y0 {
            y1 = y0 + 1.0;
        }
        let pad = 0.05 * (y1 - y0);
        Ok((x0, x1, y0 - pad, y1 + pad))
    }

    pub fn to_svg(&self) -> Result<String> {
        let (x0, x1, y0, y1) = self.ranges()?;
        let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * (WIDTH - MARGIN_L - MARGIN_R);
        let py = |y: f64| HEIGHT - MARGIN_B - (y - y0) / (y1 - y0) * (HEIGHT - MARGIN_T - MARGIN_B);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
        );
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
            0.5 * WIDTH,
            xml_escape(&self.title)
        );
        // axes box
        let _ = writeln!(
            s,
            "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>",
            WIDTH - MARGIN_L - MARGIN_R,
            HEIGHT - MARGIN_T - MARGIN_B
        );
        // ticks
        for i in 0..=4 {
            let fx = x0 + (x1 - x0) * i as f64 / 4.0;
            let fy = y0 + (y1 - y0) * i as f64 / 4.0;
            let _ = writeln!(
                s,
                "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{0:.1}\" y2=\"{2:.1}\" stroke=\"black\"/>\
                 <text x=\"{0:.1}\" y=\"{3:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{4}</text>",
                px(fx),
                HEIGHT - MARGIN_B,
                HEIGHT - MARGIN_B + 5.0,
                HEIGHT - MARGIN_B + 18.0,
                tick_label(fx)
            );
            let _ = writeln!(
                s,
                "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{2:.1}\" y2=\"{1:.1}\" stroke=\"black\"/>\
                 <text x=\"{3:.1}\" y=\"{4:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{5}</text>",
                MARGIN_L - 5.0,
                py(fy),
                MARGIN_L,
                MARGIN_L - 8.0,
                py(fy) + 4.0,
                tick_label(fy)
            );
        }
        // axis labels
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{}</text>",
            0.5 * WIDTH,
            HEIGHT - 12.0,
            xml_escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {:.1})\">{}</text>",
            0.5 * HEIGHT,
            0.5 * HEIGHT,
            xml_escape(&self.y_label)
        );
        // series
        for (si, (name, pts)) in self.series.iter().enumerate() {
            let color = COLORS[si % COLORS.len()];
            let path: Vec<String> = pts
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            if path.len() >= 2 {
                let _ = writeln!(
                    s,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                    path.join(" ")
                );
            }
            let ly = MARGIN_T + 16.0 + 16.0 * si as f64;
            let _ = writeln!(
                s,
                "<line x1=\"{0:.1}\" y1=\"{ly:.1}\" x2=\"{1:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>\
                 <text x=\"{2:.1}\" y=\"{3:.1}\" font-family=\"sans-serif\" font-size=\"11\">{4}</text>",
                MARGIN_L + 8.0,
                MARGIN_L + 28.0,
                MARGIN_L + 33.0,
                ly + 4.0,
                xml_escape(name)
            );
        }
        s.push_str("</svg>\n");
        Ok(s)
    }

    pub fn write_svg(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_svg()?)?;
        Ok(())
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_polyline_and_labels() {
        let svg = LinePlot::new("test", "x (nm)", "T")
            .series("a", vec![(0.0, 0.0), (1.0, 0.5), (2.0, 0.25)])
            .series("b", vec![(0.0, 1.0), (2.0, 0.0)])
            .to_svg()
            .unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.matches("<polyline").count() == 2);
        assert!(svg.contains("x (nm)"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn skips_invalid_points_and_rejects_empty() {
        assert!(LinePlot::new("t", "x", "y").to_svg().is_err());
        let svg = LinePlot::new("t", "x", "y")
            .series("a", vec![(0.0, 1.0), (1.0, f64::NAN), (2.0, 2.0)])
            .to_svg()
            .unwrap();
        assert!(svg.contains("<polyline"));
    }
}
