//! Minimal SVG writer for meshes, curves and xy charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

pub struct Canvas {
    body: String,
    lo: [f64; 2],
    scale: [f64; 2],
}

impl Canvas {
    /// Canvas showing `[lo, hi]`; `equal` keeps the aspect ratio of the data.
    pub fn new(lo: [f64; 2], hi: [f64; 2], equal: bool) -> Self {
        let span = [(hi[0] - lo[0]).max(1e-12), (hi[1] - lo[1]).max(1e-12)];
        let mut scale = [(WIDTH - 2.0 * MARGIN) / span[0], (HEIGHT - 2.0 * MARGIN) / span[1]];
        if equal {
            let s = scale[0].min(scale[1]);
            scale = [s, s];
        }
        Canvas {
            body: String::new(),
            lo,
            scale,
        }
    }

    /// Canvas fitted to a point cloud.
    pub fn fit<'a>(points: impl IntoIterator<Item = &'a [f64; 2]>, equal: bool) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if !lo[0].is_finite() {
            lo = [0.0, 0.0];
            hi = [1.0, 1.0];
        }
        Canvas::new(lo, hi, equal)
    }

    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        (
            MARGIN + (p[0] - self.lo[0]) * self.scale[0],
            HEIGHT - MARGIN - (p[1] - self.lo[1]) * self.scale[1],
        )
    }

    pub fn line(&mut self, a: [f64; 2], b: [f64; 2], color: &str, width: f64) {
        let (x1, y1) = self.px(a);
        let (x2, y2) = self.px(b);
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{color}" stroke-width="{width}"/>"#
        );
    }

    pub fn polyline(&mut self, pts: &[[f64; 2]], color: &str, width: f64) {
        if pts.is_empty() {
            return;
        }
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
            coords.join(" ")
        );
    }

    pub fn dot(&mut self, p: [f64; 2], color: &str, r: f64) {
        let (x, y) = self.px(p);
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{color}"/>"#);
    }

    pub fn text(&mut self, x: f64, y: f64, s: &str, anchor: &str) {
        let s = s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{s}</text>"#
        );
    }

    /// Frame with min/max labels on both axes.
    pub fn axes(&mut self, lo: [f64; 2], hi: [f64; 2], xlabel: &str, ylabel: &str) {
        let corners = [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]], [lo[0], lo[1]]];
        self.polyline(&corners, "#888", 1.0);
        let (x0, y0) = self.px(lo);
        let (x1, y1) = self.px(hi);
        self.text(x0, y0 + 16.0, &format!("{:.3}", lo[0]), "middle");
        self.text(x1, y0 + 16.0, &format!("{:.3}", hi[0]), "middle");
        self.text(x0 - 6.0, y0 + 4.0, &format!("{:.3}", lo[1]), "end");
        self.text(x0 - 6.0, y1 + 4.0, &format!("{:.3}", hi[1]), "end");
        self.text(0.5 * (x0 + x1), y0 + 34.0, xlabel, "middle");
        self.text(14.0, 0.5 * (y0 + y1), ylabel, "start");
    }

    pub fn title(&mut self, s: &str) {
        self.text(WIDTH / 2.0, 20.0, s, "middle");
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

/// Chart of several named series `(label, color, points)` sharing axes.
pub fn chart(title: &str, xlabel: &str, ylabel: &str, series: &[(&str, &str, Vec<[f64; 2]>)]) -> String {
    let all: Vec<[f64; 2]> = series.iter().flat_map(|s| s.2.iter().copied()).collect();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in &all {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    if !lo[0].is_finite() {
        lo = [0.0, 0.0];
        hi = [1.0, 1.0];
    }
    let pad = 0.05 * (hi[1] - lo[1]).max(1e-9);
    lo[1] -= pad;
    hi[1] += pad;
    let mut c = Canvas::new(lo, hi, false);
    c.title(title);
    c.axes(lo, hi, xlabel, ylabel);
    for (k, (label, color, pts)) in series.iter().enumerate() {
        c.polyline(pts, color, 1.5);
        c.text(WIDTH - MARGIN, MARGIN + 14.0 * k as f64, label, "end");
        let y = MARGIN + 14.0 * k as f64 - 4.0;
        let _ = writeln!(
            c.body,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#,
            WIDTH - MARGIN - 130.0,
            WIDTH - MARGIN - 110.0
        );
    }
    c.finish()
}
