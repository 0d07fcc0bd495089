//! Deterministic SVG rendering of sampled configurations: one ellipse
//! element per grain (`rx = R`, `ry = 1`, rotation in degrees), the window
//! rectangle, elements in sampling order. Output is byte-stable for a given
//! configuration.

use std::fmt::Write as _;

use crate::geometry::GrainKind;
use crate::sampling::Configuration;

/// Render the configuration as an SVG 1.1 document.
pub fn render_svg(config: &Configuration) -> String {
    let rect = config.window.rect();
    let margin = 0.05 * rect.width().max(rect.height()).max(1.0);
    let (x0, y0) = (rect.x0 - margin, rect.y0 - margin);
    let (w, h) = (rect.width() + 2.0 * margin, rect.height() + 2.0 * margin);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         viewBox=\"{x0} {y0} {w} {h}\" width=\"800\" height=\"{:.0}\">",
        800.0 * h / w
    );
    // plane y grows upward; flip into SVG screen coordinates
    let _ = writeln!(
        out,
        "<g transform=\"translate(0 {sum}) scale(1 -1)\">",
        sum = 2.0 * y0 + h
    );
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" \
         fill=\"none\" stroke=\"black\" stroke-width=\"{}\"/>",
        rect.x0,
        rect.y0,
        rect.width(),
        rect.height(),
        0.002 * rect.width().max(rect.height())
    );
    for g in &config.grains {
        let (rx, ry) = match g.kind {
            GrainKind::Ellipse => (g.r, 1.0),
            GrainKind::Disk => (g.r, g.r),
        };
        let deg = g.v.to_degrees();
        let _ = writeln!(
            out,
            "<ellipse cx=\"{}\" cy=\"{}\" rx=\"{rx}\" ry=\"{ry}\" \
             transform=\"rotate({deg} {} {})\" \
             fill=\"#4477aa\" fill-opacity=\"0.35\" stroke=\"#223355\" stroke-width=\"{}\"/>",
            g.center.x,
            g.center.y,
            g.center.x,
            g.center.y,
            0.001 * rect.width().max(rect.height())
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}
