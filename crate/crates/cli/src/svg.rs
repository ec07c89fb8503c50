//! Minimal SVG line charts.

use std::fmt::Write;

pub const PANEL_WIDTH: f64 = 640.0;
pub const PANEL_HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 56.0;

pub fn label_color(label: &str) -> &'static str {
    match label {
        "x_to_y" | "favors_x_to_y" => "#d55e00",
        "y_to_x" | "favors_y_to_x" => "#0072b2",
        "reject_both" => "#8e44ad",
        "fail_reject_both" => "#2e8b57",
        "mean_se_bias" | "empirical_sd" => "#d55e00",
        "mean_ci_lower_bias" | "mean_se" => "#0072b2",
        "mean_ci_upper_bias" => "#2e8b57",
        _ => "#555555",
    }
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Optional `(x, lower, upper)` band drawn under the line.
    pub band: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub y_range: (f64, f64),
    pub log_x: bool,
    /// Horizontal reference lines.
    pub rules: Vec<f64>,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    x_min: f64,
    x_max: f64,
    log_x: bool,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn fx(&self, x: f64) -> f64 {
        let (a, b, v) = if self.log_x {
            (self.x_min.ln(), self.x_max.ln(), x.ln())
        } else {
            (self.x_min, self.x_max, x)
        };
        let t = if b > a { (v - a) / (b - a) } else { 0.5 };
        self.x0 + t * self.w
    }

    fn fy(&self, y: f64) -> f64 {
        let t = (y.clamp(self.y_min, self.y_max) - self.y_min) / (self.y_max - self.y_min);
        self.y0 + self.h - t * self.h
    }
}

fn render_panel(out: &mut String, panel: &Panel, offset_x: f64) {
    let xs: Vec<f64> = panel
        .series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .collect();
    let x_min = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (x_min, x_max) = if xs.is_empty() { (1.0, 2.0) } else { (x_min, x_max) };
    let f = Frame {
        x0: offset_x + MARGIN_LEFT,
        y0: MARGIN_TOP,
        w: PANEL_WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        h: PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM,
        x_min,
        x_max,
        log_x: panel.log_x && x_min > 0.0,
        y_min: panel.y_range.0,
        y_max: panel.y_range.1,
    };
    let _ = writeln!(out, r#"<g class="panel">"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
        f.x0 + f.w / 2.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r##"<rect class="plot-area" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333333"/>"##,
        f.x0, f.y0, f.w, f.h
    );
    for i in 0..=4 {
        let v = f.y_min + (f.y_max - f.y_min) * i as f64 / 4.0;
        let y = f.fy(v);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"##,
            f.x0,
            f.x0 + f.w,
            f.x0 - 6.0,
            y + 4.0,
            trim_number(v)
        );
    }
    let mut ticks: Vec<f64> = xs.clone();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for x in ticks {
        let px = f.fx(x);
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#333333"/><text x="{px:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"##,
            f.y0 + f.h,
            f.y0 + f.h + 4.0,
            f.y0 + f.h + 16.0,
            trim_number(x)
        );
    }
    for &r in &panel.rules {
        let y = f.fy(r);
        let _ = writeln!(
            out,
            r##"<line class="rule" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#999999" stroke-dasharray="4 3"/>"##,
            f.x0,
            f.x0 + f.w
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
        f.x0 + f.w / 2.0,
        PANEL_HEIGHT - 12.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
        offset_x + 16.0,
        f.y0 + f.h / 2.0,
        offset_x + 16.0,
        f.y0 + f.h / 2.0,
        escape(&panel.y_label)
    );
    for s in &panel.series {
        if s.band.is_empty() {
            continue;
        }
        let upper = s.band.iter().map(|&(x, _, hi)| format!("{:.2},{:.2}", f.fx(x), f.fy(hi)));
        let lower = s.band.iter().rev().map(|&(x, lo, _)| format!("{:.2},{:.2}", f.fx(x), f.fy(lo)));
        let pts: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(
            out,
            r#"<polygon class="band" data-label="{}" points="{}" fill="{}" fill-opacity="0.18" stroke="none"/>"#,
            escape(&s.label),
            pts.join(" "),
            label_color(&s.label)
        );
    }
    for (i, s) in panel.series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", f.fx(x), f.fy(y)))
            .collect();
        let color = label_color(&s.label);
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-label="{}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            escape(&s.label),
            pts.join(" ")
        );
        let ly = f.y0 + 14.0 + 20.0 * i as f64;
        let lx = f.x0 + f.w + 14.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/><text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    let _ = writeln!(out, "</g>");
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Render panels side by side.
pub fn render(panels: &[Panel]) -> String {
    let width = PANEL_WIDTH * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{PANEL_HEIGHT:.0}" viewBox="0 0 {width:.0} {PANEL_HEIGHT:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, PANEL_WIDTH * i as f64);
    }
    out.push_str("</svg>\n");
    out
}

/// Vertical extent of the plot area, top and bottom, in SVG coordinates.
pub fn plot_y_bounds() -> (f64, f64) {
    (MARGIN_TOP, PANEL_HEIGHT - MARGIN_BOTTOM)
}
