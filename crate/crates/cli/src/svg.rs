//! Minimal hand-rolled SVG documents: polylines, stems and dots with a
//! fixed-format axis frame. Output is deterministic (fixed-precision
//! coordinates, no timestamps).

pub struct Plot {
    width: f64,
    height: f64,
    margin: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

impl Plot {
    pub fn new(width: f64, height: f64, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let mut p = Plot {
            width,
            height,
            margin: 44.0,
            x_range,
            y_range,
            body: String::new(),
        };
        p.frame();
        p
    }

    fn sx(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        self.margin + (x - lo) / (hi - lo) * (self.width - 2.0 * self.margin)
    }

    fn sy(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        self.height - self.margin - (y - lo) / (hi - lo) * (self.height - 2.0 * self.margin)
    }

    fn frame(&mut self) {
        let (x0, y0) = (self.margin, self.margin);
        let (x1, y1) = (self.width - self.margin, self.height - self.margin);
        self.body.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\" stroke-width=\"1\"/>\n",
            fmt(x0), fmt(y0), fmt(x1 - x0), fmt(y1 - y0),
        ));
        // Axis labels at the corners of the data ranges.
        self.body.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#444\">{}</text>\n",
            fmt(x0),
            fmt(y1 + 16.0),
            fmt(self.x_range.0)
        ));
        self.body.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#444\" text-anchor=\"end\">{}</text>\n",
            fmt(x1),
            fmt(y1 + 16.0),
            fmt(self.x_range.1)
        ));
        self.body.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#444\">{}</text>\n",
            fmt(4.0),
            fmt(y0 + 4.0),
            fmt(self.y_range.1)
        ));
        self.body.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#444\">{}</text>\n",
            fmt(4.0),
            fmt(y1),
            fmt(self.y_range.0)
        ));
    }

    pub fn title(&mut self, text: &str) {
        self.body.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"13\" fill=\"#000\">{}</text>\n",
            fmt(self.margin),
            fmt(self.margin - 10.0),
            text
        ));
    }

    /// Vertical stem from the x axis baseline to `(x, y)` with a marker.
    pub fn stem(&mut self, x: f64, y: f64, color: &str) {
        let sx = self.sx(x);
        let base = self.sy(self.y_range.0.max(0.0));
        let top = self.sy(y);
        self.body.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            fmt(sx), fmt(base), fmt(sx), fmt(top),
        ));
        self.body.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
            fmt(sx),
            fmt(top),
        ));
    }

    pub fn dot(&mut self, x: f64, y: f64, r: f64, color: &str) {
        self.body.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{color}\"/>\n",
            fmt(self.sx(x)),
            fmt(self.sy(y)),
            fmt(r),
        ));
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str) {
        if points.is_empty() {
            return;
        }
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{},{}", fmt(self.sx(x)), fmt(self.sy(y))))
            .collect();
        self.body.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1\"/>\n",
            coords.join(" "),
        ));
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            fmt(self.width),
            fmt(self.height),
            fmt(self.width),
            fmt(self.height),
            self.body
        )
    }
}

/// Color cycle for multi-series plots.
pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];
