//! Minimal line plots.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

pub struct Plot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub series: Vec<Series<'a>>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

impl Plot<'_> {
    pub fn render(&self) -> String {
        let tx = |x: f64| if self.log_x { x.log10() } else { x };
        let usable = |x: f64, y: f64| x.is_finite() && y.is_finite() && (!self.log_x || x > 0.0);
        let pts = || self.series.iter().flat_map(|s| s.points.iter().copied()).filter(|&(x, y)| usable(x, y));
        let (x0, x1) = bounds(pts().map(|(x, _)| tx(x)));
        let (y0, y1) = bounds(pts().map(|(_, y)| y));
        let sx = |x: f64| MARGIN + (tx(x) - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{:.1}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, self.title);
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(s, r#"<path d="M{l:.1},{t:.1} L{l:.1},{b:.1} L{r:.1},{b:.1}" fill="none" stroke="black"/>"#);
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = x0 + f * (x1 - x0);
            let label = if self.log_x { format!("1e{xv:.2}") } else { format!("{xv:.3}") };
            let px = l + f * (r - l);
            let _ = writeln!(s, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{label}</text>"#, b + 16.0);
            let yv = y0 + f * (y1 - y0);
            let py = b - f * (b - t);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{py:.1}" text-anchor="end">{yv:.3}</text>"#, l - 4.0);
        }
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 12.0, self.x_label);
        let _ = writeln!(
            s,
            r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            self.y_label
        );
        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let path: Vec<String> =
                series.points.iter().filter(|&&(x, y)| usable(x, y)).map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            if !path.is_empty() {
                let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
            }
            let ly = t + 16.0 * i as f64;
            let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">{}</text>"#, r - 150.0, series.label);
        }
        s.push_str("</svg>\n");
        s
    }
}
