//! SVG 1.1 tour plots: items as filled circles, placeholders as hollow
//! squares, the directed tour as a closed polyline with arrowheads.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use altour_core::{CycleSolution, Instance, Point};

use crate::error::{AppError, Result};

const SIZE: f64 = 1000.0;
const MARGIN: f64 = 60.0;

struct Frame {
    min_x: f64,
    min_y: f64,
    scale: f64,
    off_x: f64,
    off_y: f64,
}

impl Frame {
    fn fit(points: &[Point]) -> Self {
        let min_x = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let max_x = points.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        let min_y = points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let max_y = points.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        let span = (max_x - min_x).max(max_y - min_y);
        let inner = SIZE - 2.0 * MARGIN;
        let scale = if span > 0.0 { inner / span } else { 1.0 };
        Self {
            min_x,
            min_y,
            scale,
            off_x: MARGIN + (inner - (max_x - min_x) * scale) / 2.0,
            off_y: MARGIN + (inner - (max_y - min_y) * scale) / 2.0,
        }
    }

    /// Viewport coordinates, y pointing up.
    fn map(&self, p: Point) -> (f64, f64) {
        let x = self.off_x + (p.x - self.min_x) * self.scale;
        let y = SIZE - (self.off_y + (p.y - self.min_y) * self.scale);
        (x, y)
    }
}

pub fn svg_string(instance: &Instance, solution: &CycleSolution) -> String {
    let n = instance.n();
    let points: Vec<Point> = (0..2 * n).map(|v| instance.point(v)).collect();
    let frame = Frame::fit(&points);
    let title = format!("Experiment {} cost {:.4}", instance.experiment_id(), solution.cost);
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, "<title>{title}</title>");
    s.push_str(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"16\" refY=\"5\" markerWidth=\"7\" \
         markerHeight=\"7\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#1f4e79\"/></marker></defs>\n",
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="36" font-family="sans-serif" font-size="24" text-anchor="middle">{title}</text>"#, SIZE / 2.0);

    let mut pts = String::new();
    for &v in solution.order.iter().chain(solution.order.first()) {
        let (x, y) = frame.map(points[v]);
        let _ = write!(pts, "{x:.2},{y:.2} ");
    }
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#1f4e79" stroke-width="2" marker-mid="url(#arrow)" marker-end="url(#arrow)"/>"##,
        pts.trim_end()
    );

    if let Some(&start) = solution.order.first() {
        let (x, y) = frame.map(points[start]);
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="14" fill="none" stroke="#c0392b" stroke-width="3"/>"##);
    }
    for (i, p) in instance.items().iter().enumerate() {
        let (x, y) = frame.map(*p);
        let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="6" fill="#2e86c1"><title>item {i}</title></circle>"##);
    }
    for (k, p) in instance.placeholders().iter().enumerate() {
        let (x, y) = frame.map(*p);
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="12" height="12" fill="none" stroke="#27ae60" stroke-width="2"><title>placeholder {}</title></rect>"##,
            x - 6.0,
            y - 6.0,
            n + k
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_svg(instance: &Instance, solution: &CycleSolution, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, svg_string(instance, solution)).map_err(|e| AppError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use altour_core::Problem;

    #[test]
    fn unit_square_plot() {
        let inst = Instance::new(
            3,
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)],
            vec![Point::new(0.0, 1.0), Point::new(1.0, 1.0)],
        )
        .unwrap();
        let sol = CycleSolution::from_order(&Problem::from_instance(&inst), vec![3, 0, 2, 1], Default::default()).unwrap();
        let a = svg_string(&inst, &sol);
        assert_eq!(a, svg_string(&inst, &sol));
        assert!(a.contains("Experiment 3 cost 4.8284"));
        let line = a.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts: Vec<&str> = line.split('"').nth(1).unwrap().split(' ').collect();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0], pts[4]);
        assert_eq!(a.matches("<circle").count(), 3);
        assert_eq!(a.matches("<rect x=").count(), 2);
    }
}
