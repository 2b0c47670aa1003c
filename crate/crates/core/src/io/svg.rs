//! Minimal standalone SVG charts: markers and polylines on labelled axes.

use std::fmt::Write;

use crate::error::{Error, Result};

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Markers,
    Line,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    /// Axis labels, units included.
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    /// Keep x and y on the same scale (trajectories).
    pub equal_aspect: bool,
    pub series: Vec<Series>,
}

pub fn escape(s: &str) -> String {
    let mut o = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => o.push_str("&amp;"),
            '<' => o.push_str("&lt;"),
            '>' => o.push_str("&gt;"),
            '"' => o.push_str("&quot;"),
            '\'' => o.push_str("&apos;"),
            _ => o.push(c),
        }
    }
    o
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.2e}")
    }
}

/// Two decimals of screen coordinate keeps output compact and stable.
fn c(x: f64) -> String {
    format!("{x:.2}")
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Chart {
        Chart {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            equal_aspect: false,
            series: Vec::new(),
        }
    }

    fn tx(&self, v: f64, log: bool) -> Option<f64> {
        if log {
            (v > 0.0).then(|| v.log10())
        } else {
            v.is_finite().then_some(v)
        }
    }

    pub fn render(&self) -> Result<String> {
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter_map(|&(x, y)| Some((self.tx(x, self.log_x)?, self.tx(y, self.log_y)?)))
            .collect();
        if pts.is_empty() {
            return Err(Error::EmptySample);
        }
        let span = |vals: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if hi > lo {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        let (mut x0, mut x1) = span(&mut pts.iter().map(|p| p.0));
        let (mut y0, mut y1) = span(&mut pts.iter().map(|p| p.1));
        let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
        if self.equal_aspect {
            let scale = ((x1 - x0) / pw).max((y1 - y0) / ph);
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            (x0, x1) = (cx - 0.5 * scale * pw, cx + 0.5 * scale * pw);
            (y0, y1) = (cy - 0.5 * scale * ph, cy + 0.5 * scale * ph);
        }
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text class="title" x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            c(W / 2.0),
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            c(pw),
            c(ph)
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let lab = |v: f64, log: bool| tick_label(if log { 10f64.powf(v) } else { v });
            let _ = writeln!(
                s,
                r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/><text class="tick" x="{0}" y="{3}" text-anchor="middle">{4}</text>"#,
                c(sx(xv)),
                c(TOP + ph),
                c(TOP + ph + 5.0),
                c(TOP + ph + 18.0),
                lab(xv, self.log_x)
            );
            let _ = writeln!(
                s,
                r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/><text class="tick" x="{3}" y="{4}" text-anchor="end">{5}</text>"#,
                c(LEFT - 5.0),
                c(sy(yv)),
                c(LEFT),
                c(LEFT - 8.0),
                c(sy(yv) + 4.0),
                lab(yv, self.log_y)
            );
        }
        let _ = writeln!(
            s,
            r#"<text class="xlabel" x="{}" y="{}" text-anchor="middle">{}</text>"#,
            c(LEFT + pw / 2.0),
            c(H - 15.0),
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text class="ylabel" x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            c(TOP + ph / 2.0),
            escape(&self.y_label)
        );
        for (k, ser) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let screen: Vec<(f64, f64)> = ser
                .points
                .iter()
                .filter_map(|&(x, y)| Some((sx(self.tx(x, self.log_x)?), sy(self.tx(y, self.log_y)?))))
                .collect();
            let _ = writeln!(s, r#"<g class="series" data-label="{}">"#, escape(&ser.label));
            match ser.style {
                Style::Markers => {
                    for (x, y) in &screen {
                        let _ = writeln!(
                            s,
                            r#"<circle class="marker" cx="{}" cy="{}" r="3.5" fill="{color}"/>"#,
                            c(*x),
                            c(*y)
                        );
                    }
                }
                Style::Line => {
                    let path: Vec<String> = screen.iter().map(|(x, y)| format!("{},{}", c(*x), c(*y))).collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline class="line" fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                        path.join(" ")
                    );
                }
            }
            let _ = writeln!(s, "</g>");
        }
        // legend, only when there is more than one series
        if self.series.len() > 1 {
            for (k, ser) in self.series.iter().enumerate().take(12) {
                let y = TOP + 14.0 + 14.0 * k as f64;
                let _ = writeln!(
                    s,
                    r#"<text class="legend" x="{}" y="{}" text-anchor="end" fill="{}">{}</text>"#,
                    c(W - RIGHT - 8.0),
                    c(y),
                    PALETTE[k % PALETTE.len()],
                    escape(&ser.label)
                );
            }
        }
        s.push_str("</svg>\n");
        Ok(s)
    }
}
