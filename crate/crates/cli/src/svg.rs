//! Minimal SVG 1.1 writer with a y-up world frame.

use std::fmt::Write as _;

use kadets_core::extend2d::{Extension, RayStatus};
use kadets_core::noneuclid::hyperbolic::poincare_circle;
use kadets_core::noneuclid::CounterexampleReport;
use kadets_core::polygon::{polygon_from_hrep, Point2, Rect};
use kadets_core::verify::KadetsReport;
use kadets_core::PolygonV;

const PALETTE: [&str; 8] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5",
];

pub struct Svg {
    view: Rect,
    px: f64,
    out: String,
}

impl Svg {
    pub fn new(view: Rect, px: f64) -> Self {
        Self {
            view,
            px,
            out: String::new(),
        }
    }

    fn scale(&self) -> f64 {
        self.px / self.view.width().max(self.view.height())
    }

    fn map(&self, p: Point2) -> (f64, f64) {
        let s = self.scale();
        ((p[0] - self.view.min[0]) * s, (self.view.max[1] - p[1]) * s)
    }

    fn points(&self, pts: &[Point2]) -> String {
        let mut s = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.map(*p);
            let _ = write!(s, "{}{:.3},{:.3}", if i == 0 { "" } else { " " }, x, y);
        }
        s
    }

    pub fn polygon(&mut self, pts: &[Point2], style: &str) {
        let p = self.points(pts);
        let _ = writeln!(self.out, r#"  <polygon points="{p}" style="{style}"/>"#);
    }

    /// Closed path; used for shapes that must be counted separately from polygons.
    pub fn path(&mut self, pts: &[Point2], style: &str) {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = self.map(*p);
            let _ = write!(d, "{}{:.3},{:.3} ", if i == 0 { "M" } else { "L" }, x, y);
        }
        d.push('Z');
        let _ = writeln!(self.out, r#"  <path d="{d}" style="{style}"/>"#);
    }

    pub fn line(&mut self, a: Point2, b: Point2, style: &str) {
        let (x1, y1) = self.map(a);
        let (x2, y2) = self.map(b);
        let _ = writeln!(
            self.out,
            r#"  <line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" style="{style}"/>"#
        );
    }

    pub fn circle(&mut self, c: Point2, r: f64, style: &str) {
        let (x, y) = self.map(c);
        let r = r * self.scale();
        let _ = writeln!(
            self.out,
            r#"  <circle cx="{x:.3}" cy="{y:.3}" r="{r:.3}" style="{style}"/>"#
        );
    }

    pub fn finish(self) -> String {
        let w = self.view.width() * self.scale();
        let h = self.view.height() * self.scale();
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.3} {h:.3}\">\n  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.out
        )
    }
}

/// Extended cells, the body, rays with trim points, and the inscribed
/// homothets `h B + t` of each cell.
pub fn extension_svg(b: &PolygonV, ext: &Extension, report: &KadetsReport, pad: f64) -> String {
    let r = b.bounds();
    let diam = r.width().hypot(r.height());
    let view = r.inflated(pad.max(0.05) * diam);
    let mut svg = Svg::new(view, 800.0);
    let stroke = 0.002 * diam * svg.scale();
    for (i, v) in ext.cells.cells().iter().enumerate() {
        if let Ok(p) = polygon_from_hrep(v, &view) {
            svg.polygon(
                p.vertices(),
                &format!(
                    "fill:{};fill-opacity:0.6;stroke:#555;stroke-width:{stroke:.2}",
                    PALETTE[i % PALETTE.len()]
                ),
            );
        }
    }
    svg.polygon(
        b.vertices(),
        &format!("fill:none;stroke:black;stroke-width:{:.2}", 2.5 * stroke),
    );
    let far = 2.0 * view.width().hypot(view.height());
    for ray in &ext.initial.rays {
        let end = [
            ray.origin[0] + far * ray.dir[0],
            ray.origin[1] + far * ray.dir[1],
        ];
        svg.line(
            ray.origin,
            end,
            &format!("stroke:#999;stroke-width:{stroke:.2};stroke-dasharray:4,3"),
        );
    }
    for ray in &ext.rays.rays {
        let len = if ray.status() == RayStatus::Full {
            far
        } else {
            ray.length
        };
        let end = [
            ray.origin[0] + len * ray.dir[0],
            ray.origin[1] + len * ray.dir[1],
        ];
        svg.line(
            ray.origin,
            end,
            &format!("stroke:#c00;stroke-width:{:.2}", 1.5 * stroke),
        );
    }
    for t in &ext.rays.trims {
        svg.circle(t.point, 0.01 * diam, "fill:#c00;stroke:none");
    }
    for cell in &report.cells {
        if let (Some(t), true) = (&cell.witness, cell.h.is_finite() && cell.h > 0.0) {
            let pts: Vec<Point2> = b
                .vertices()
                .iter()
                .map(|v| [cell.h * v[0] + t[0], cell.h * v[1] + t[1]])
                .collect();
            svg.polygon(
                &pts,
                &format!("fill:none;stroke:#1f4e99;stroke-width:{stroke:.2};stroke-dasharray:6,3"),
            );
        }
    }
    svg.finish()
}

/// Poincaré-disk picture: the big disk, the two covering shapes (solid paths)
/// and their inscribed disks (dashed circles).
pub fn hyperbolic_svg(rep: &CounterexampleReport) -> String {
    let view = Rect::square(1.05);
    let mut svg = Svg::new(view, 800.0);
    let omega = (rep.rho / 2.0).tanh();
    svg.circle([0.0, 0.0], omega, "fill:none;stroke:black;stroke-width:2");
    let colors = ["#1b9e77", "#d95f02"];
    for (i, (shape, disk)) in rep.best.shapes.iter().zip(&rep.best.inradii).enumerate() {
        let pts = shape.boundary_polyline(&disk.center, 720);
        svg.path(
            &pts,
            &format!(
                "fill:{};fill-opacity:0.25;stroke:{};stroke-width:2",
                colors[i], colors[i]
            ),
        );
    }
    for (i, disk) in rep.best.inradii.iter().enumerate() {
        let (c, r) = poincare_circle(&disk.center, disk.r);
        svg.circle(
            c,
            r,
            &format!(
                "fill:none;stroke:{};stroke-width:2;stroke-dasharray:8,5",
                colors[i]
            ),
        );
    }
    svg.finish()
}
