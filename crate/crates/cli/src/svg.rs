//! Headless SVG views: slice and projection panels, topotrace line plots.
//!
//! Data points are the only `circle` elements; each panel declares its point
//! count in a `data-points` attribute. Guides are drawn as paths and lines.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use section_pursuit::binning::PolarGrid;
use section_pursuit::geometry::ProjectionFrame;
use section_pursuit::index::IndexValue;
use section_pursuit::slicing::SliceAssignment;
use section_pursuit::topotrace::TopotraceSet;

const PANEL: f64 = 420.0;
const MARGIN: f64 = 20.0;
const HEADER: f64 = 30.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Full circle as a path of two arcs.
fn circle_path(cx: f64, cy: f64, r: f64) -> String {
    format!(
        "M {:.2} {:.2} A {r:.2} {r:.2} 0 1 0 {:.2} {:.2} A {r:.2} {r:.2} 0 1 0 {:.2} {:.2} Z",
        cx - r,
        cy,
        cx + r,
        cy,
        cx - r,
        cy
    )
}

struct Panel {
    x0: f64,
    y0: f64,
    scale: f64,
}

impl Panel {
    fn new(index: usize, radius: f64) -> Self {
        Self { x0: index as f64 * PANEL, y0: HEADER, scale: (PANEL / 2.0 - MARGIN) / radius }
    }

    fn center(&self) -> (f64, f64) {
        (self.x0 + PANEL / 2.0, self.y0 + PANEL / 2.0)
    }

    fn map(&self, y: [f64; 2]) -> (f64, f64) {
        let (cx, cy) = self.center();
        (cx + self.scale * y[0], cy - self.scale * y[1])
    }
}

fn grid_guides(out: &mut String, panel: &Panel, grid: &PolarGrid) {
    let (cx, cy) = panel.center();
    let edges = grid.radial_edges();
    let outer = panel.scale * grid.radius();
    out.push_str("<g class=\"grid\" stroke=\"#bbbbbb\" stroke-width=\"0.6\" fill=\"none\">\n");
    for r in &edges[1..edges.len() - 1] {
        writeln!(out, "<path d=\"{}\"/>", circle_path(cx, cy, panel.scale * r)).unwrap();
    }
    for j in 0..grid.k_theta() {
        let t = j as f64 * TAU / grid.k_theta() as f64;
        writeln!(
            out,
            "<path d=\"M {cx:.2} {cy:.2} L {:.2} {:.2}\"/>",
            cx + outer * t.cos(),
            cy - outer * t.sin()
        )
        .unwrap();
    }
    out.push_str("</g>\n");
    writeln!(
        out,
        "<path class=\"boundary\" d=\"{}\" stroke=\"#555555\" stroke-width=\"1\" fill=\"none\"/>",
        circle_path(cx, cy, outer)
    )
    .unwrap();
}

fn points(out: &mut String, panel: &Panel, pts: impl Iterator<Item = [f64; 2]>, color: &str) {
    writeln!(out, "<g class=\"points\" fill=\"{color}\" fill-opacity=\"0.6\">").unwrap();
    for y in pts {
        let (x, yy) = panel.map(y);
        writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{yy:.2}\" r=\"1.2\"/>").unwrap();
    }
    out.push_str("</g>\n");
}

/// Slice view (inside points) and projection view (all points) side by side,
/// with the polar grid, the `R` boundary and the frame's variable axes.
pub fn slice_view(
    assignment: &SliceAssignment,
    frame: &ProjectionFrame,
    columns: &[String],
    grid: &PolarGrid,
    index: &IndexValue,
) -> String {
    let radius = grid.radius();
    let width = 2.0 * PANEL;
    let height = PANEL + HEADER;
    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">index {:.4} (raw {:.4}), h = {:.4}, inside {}, outside {}</text>",
        index.value, index.raw, assignment.h, index.inside_count, index.outside_count
    )
    .unwrap();

    let inside_count = assignment.inside_count();
    let slice_panel = Panel::new(0, radius);
    writeln!(out, "<g class=\"panel\" data-panel=\"slice\" data-points=\"{inside_count}\">").unwrap();
    grid_guides(&mut out, &slice_panel, grid);
    let inside = assignment.projected.iter().zip(&assignment.inside).filter(|(_, &i)| i).map(|(y, _)| *y);
    points(&mut out, &slice_panel, inside, "#b2182b");
    out.push_str("</g>\n");

    let proj_panel = Panel::new(1, radius);
    writeln!(out, "<g class=\"panel\" data-panel=\"projection\" data-points=\"{}\">", assignment.len()).unwrap();
    grid_guides(&mut out, &proj_panel, grid);
    points(&mut out, &proj_panel, assignment.projected.iter().copied(), "#2166ac");
    let (cx, cy) = proj_panel.center();
    out.push_str("<g class=\"axes\" stroke=\"#222222\" stroke-width=\"1.2\" font-family=\"sans-serif\" font-size=\"11\">\n");
    let basis = frame.basis();
    for (j, name) in columns.iter().enumerate().take(frame.p()) {
        let (x, y) = proj_panel.map([radius * basis[(j, 0)], radius * basis[(j, 1)]]);
        writeln!(out, "<line x1=\"{cx:.2}\" y1=\"{cy:.2}\" x2=\"{x:.2}\" y2=\"{y:.2}\"/>").unwrap();
        writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" stroke=\"none\">{}</text>", x + 3.0, y - 3.0, escape(name)).unwrap();
    }
    out.push_str("</g>\n</g>\n</svg>\n");
    out
}

/// Index against angle, one polyline per trace plus a marker per evaluation.
pub fn topotrace_plot(set: &TopotraceSet) -> String {
    let (w, h) = (640.0, 400.0);
    let (left, right, top, bottom) = (50.0, 20.0, 30.0, 40.0);
    let amax = set.config.alpha_max;
    let vmax = set.traces.iter().flatten().map(|pt| pt.index.value).fold(0.0, f64::max).max(1e-12);
    let sx = |a: f64| left + (a + amax) / (2.0 * amax) * (w - left - right);
    let sy = |v: f64| h - bottom - v / vmax * (h - top - bottom);
    let total: usize = set.traces.iter().map(Vec::len).sum();

    let mut out = String::new();
    writeln!(out, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">").unwrap();
    writeln!(
        out,
        "<text x=\"{left}\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">topotrace: {} directions, start index {:.4}</text>",
        set.traces.len(),
        set.start_index().value
    )
    .unwrap();
    writeln!(
        out,
        "<path class=\"frame\" d=\"M {left} {top} L {left} {:.2} L {:.2} {:.2}\" stroke=\"#555555\" fill=\"none\"/>",
        h - bottom,
        w - right,
        h - bottom
    )
    .unwrap();
    writeln!(
        out,
        "<path class=\"zero\" d=\"M {:.2} {top} L {:.2} {:.2}\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>",
        sx(0.0),
        sx(0.0),
        h - bottom
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">alpha in [-{amax:.3}, {amax:.3}]</text>",
        w / 2.0 - 60.0,
        h - 12.0
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"8\" y=\"{top}\" font-family=\"sans-serif\" font-size=\"11\">{vmax:.3}</text>"
    )
    .unwrap();
    writeln!(out, "<g class=\"panel\" data-panel=\"traces\" data-points=\"{total}\">").unwrap();
    for trace in &set.traces {
        let pts: Vec<String> = trace.iter().map(|pt| format!("{:.2},{:.2}", sx(pt.alpha), sy(pt.index.value))).collect();
        writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#2166ac\" stroke-opacity=\"0.4\"/>",
            pts.join(" ")
        )
        .unwrap();
    }
    out.push_str("<g class=\"points\" fill=\"#2166ac\" fill-opacity=\"0.5\">\n");
    for pt in set.traces.iter().flatten() {
        writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"1.5\"/>", sx(pt.alpha), sy(pt.index.value)).unwrap();
    }
    out.push_str("</g>\n</g>\n</svg>\n");
    out
}
