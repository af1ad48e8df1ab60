//! Minimal static SVG 1.1 line/CDF charts: axes, ticks, optional log-10
//! x scale, markers, and a legend. No scripting, no external resources.

/// One plotted data set.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Connect points with a polyline.
    pub line: bool,
    /// Draw a circle at each point.
    pub markers: bool,
    /// Render as a right-continuous step function (CDF style).
    pub step: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            line: true,
            markers: false,
            step: false,
        }
    }

    pub fn markers(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            line: false,
            markers: true,
            step: false,
        }
    }

    pub fn steps(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
            line: true,
            markers: false,
            step: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Log-10 x axis; every x must then be positive.
    pub log_x: bool,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 780.0;
const HEIGHT: f64 = 520.0;
const MARGIN_LEFT: f64 = 86.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 64.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Rounds a tick value to a short decimal string.
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        format!("{v:.1e}")
    } else if a >= 100.0 || (v - v.round()).abs() < 1e-9 * a.max(1.0) {
        format!("{}", (v.round() as i64))
    } else if a >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

/// "Nice" linear ticks covering [lo, hi] with steps of 1, 2 or 5 × 10^m.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    assert!(hi > lo, "tick range must be non-degenerate");
    let raw_step = (hi - lo) / target.max(2) as f64;
    let mag = 10f64.powf(raw_step.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| raw_step <= *s)
        .unwrap();
    // Steps are 1, 2 or 5 × 10^m, so ticks round-trip exactly through a
    // fixed-precision decimal string; this keeps multiples of the step
    // free of accumulated float dust (0.2 + 0.2 + 0.2 ≠ 0.6 otherwise).
    let decimals = (1.0 - step.log10().floor()).max(0.0) as usize;
    let mut out = Vec::new();
    let mut i = (lo / step - 1e-9).ceil() as i64;
    while i as f64 * step <= hi + 1e-9 * step {
        let t: f64 = format!("{:.decimals$}", i as f64 * step).parse().unwrap();
        out.push(if t == 0.0 { 0.0 } else { t });
        i += 1;
    }
    out
}

/// Decade ticks for a log axis spanning [lo, hi] in log10 units.
fn decade_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut d = lo.ceil() as i64;
    while (d as f64) <= hi + 1e-9 {
        out.push(d as f64);
        d += 1;
    }
    if out.is_empty() {
        out.push(lo);
        out.push(hi);
    }
    out
}

impl Chart {
    /// Renders a complete standalone SVG document.
    pub fn render(&self) -> String {
        assert!(!self.series.is_empty(), "chart needs at least one series");
        let tx = |x: f64| -> f64 {
            if self.log_x {
                assert!(x > 0.0, "log axis requires positive x, got {x}");
                x.log10()
            } else {
                x
            }
        };

        let mut x_lo = f64::INFINITY;
        let mut x_hi = f64::NEG_INFINITY;
        let mut y_lo = f64::INFINITY;
        let mut y_hi = f64::NEG_INFINITY;
        for s in &self.series {
            for &(x, y) in &s.points {
                let x = tx(x);
                x_lo = x_lo.min(x);
                x_hi = x_hi.max(x);
                y_lo = y_lo.min(y);
                y_hi = y_hi.max(y);
            }
        }
        assert!(x_lo.is_finite() && y_lo.is_finite(), "chart needs data");
        if x_hi - x_lo < 1e-12 {
            x_lo -= 0.5;
            x_hi += 0.5;
        }
        if y_hi - y_lo < 1e-12 {
            let pad = y_hi.abs().max(1.0) * 0.1;
            y_lo -= pad;
            y_hi += pad;
        }
        // Breathing room on the y axis.
        let y_pad = (y_hi - y_lo) * 0.06;
        y_lo -= y_pad;
        y_hi += y_pad;

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let px = |x: f64| MARGIN_LEFT + (tx(x) - x_lo) / (x_hi - x_lo) * plot_w;
        let py = |y: f64| MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

        let mut out = String::with_capacity(16 * 1024);
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        out.push_str(&format!(
            "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"26\" font-family=\"sans-serif\" font-size=\"17\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            escape(&self.title)
        ));

        // Frame.
        out.push_str(&format!(
            "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n"
        ));

        // X ticks.
        let xticks = if self.log_x {
            decade_ticks(x_lo, x_hi)
        } else {
            nice_ticks(x_lo, x_hi, 6)
        };
        for &t in &xticks {
            let x = MARGIN_LEFT + (t - x_lo) / (x_hi - x_lo) * plot_w;
            let y0 = MARGIN_TOP + plot_h;
            out.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#333\"/>\n",
                y0 + 6.0
            ));
            out.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{MARGIN_TOP}\" x2=\"{x:.2}\" y2=\"{y0}\" stroke=\"#ddd\" stroke-width=\"0.6\"/>\n"
            ));
            let label = if self.log_x {
                format!("1e{}", t as i64)
            } else {
                tick_label(t)
            };
            out.push_str(&format!(
                "<text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{label}</text>\n",
                y0 + 20.0
            ));
        }
        // Y ticks.
        for t in nice_ticks(y_lo, y_hi, 6) {
            let y = py(t);
            out.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{MARGIN_LEFT}\" y2=\"{y:.2}\" stroke=\"#333\"/>\n",
                MARGIN_LEFT - 6.0
            ));
            out.push_str(&format!(
                "<line x1=\"{MARGIN_LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#ddd\" stroke-width=\"0.6\"/>\n",
                MARGIN_LEFT + plot_w
            ));
            out.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
                MARGIN_LEFT - 10.0,
                y + 4.0,
                tick_label(t)
            ));
        }

        // Axis labels.
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"20\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        ));

        // Series.
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            if s.line && s.points.len() > 1 {
                let mut d = String::new();
                let mut prev_y: Option<f64> = None;
                for &(x, y) in &s.points {
                    if let (true, Some(py_prev)) = (s.step, prev_y) {
                        d.push_str(&format!("{:.2},{:.2} ", px(x), py_prev));
                    }
                    d.push_str(&format!("{:.2},{:.2} ", px(x), py(y)));
                    prev_y = Some(py(y));
                }
                out.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
                    d.trim_end()
                ));
            }
            if s.markers {
                for &(x, y) in &s.points {
                    out.push_str(&format!(
                        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.4\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
                        px(x),
                        py(y)
                    ));
                }
            }
            // Legend entry.
            let lx = WIDTH - MARGIN_RIGHT + 14.0;
            let ly = MARGIN_TOP + 12.0 + i as f64 * 22.0;
            if s.line {
                out.push_str(&format!(
                    "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n",
                    lx + 26.0
                ));
            }
            if s.markers {
                out.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{ly}\" r=\"3.4\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
                    lx + 13.0
                ));
            }
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
                lx + 32.0,
                ly + 4.0,
                escape(&s.label)
            ));
        }

        out.push_str("</svg>\n");
        out
    }
}
