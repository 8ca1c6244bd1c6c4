//! Static SVG polyline plots.

use std::fmt::Write;

pub struct Series<'a> {
    pub points: &'a [(f64, f64)],
    pub stroke: &'a str,
}

/// Renders the series with a viewBox spanning the data extents plus a 5% margin.
/// The y axis is flipped so that larger values are drawn higher.
pub fn polyline_plot(title: &str, series: &[Series<'_>]) -> String {
    let finite = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let w = (x1 - x0).max(1e-12);
    let h = (y1 - y0).max(1e-12);
    let (mx, my) = (0.05 * w, 0.05 * h);
    let stroke_w = 0.002 * w.max(h);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" preserveAspectRatio="none">"#,
        x0 - mx,
        -(y1 + my),
        w + 2.0 * mx,
        h + 2.0 * my
    );
    let _ = writeln!(out, "  <title>{title}</title>");
    for s in series {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{x},{}", -y))
            .collect();
        let _ = writeln!(
            out,
            r#"  <polyline fill="none" stroke="{}" stroke-width="{stroke_w}" vector-effect="non-scaling-stroke" points="{}"/>"#,
            s.stroke,
            pts.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn view_box_has_margin() {
        let pts = [(0.0, 0.0), (10.0, 2.0)];
        let svg = polyline_plot("t", &[Series { points: &pts, stroke: "black" }]);
        assert!(svg.contains(r#"viewBox="-0.5 -2.1 11 2.2""#), "{svg}");
        assert!(svg.contains("points=\"0,-0 10,-2\""));
    }
}
