//! Standalone SVG rendering of trend tables: CCI against ACR, one marked
//! point per epoch, joined in epoch order.
//!
//! Output is plain text with no external references and no timestamps,
//! so identical tables render byte-identical files.

use crate::metrics::TrendTable;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 40.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 70.0;
const TICKS: usize = 6;

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    /// Data range padded by 5% per side; a degenerate span widens to ±0.5
    /// so single-epoch tables still scale.
    fn from_values(values: impl Iterator<Item = f64>) -> Axis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo <= 0.0 {
            lo -= 0.5;
            hi += 0.5;
        } else {
            let pad = (hi - lo) * 0.05;
            lo -= pad;
            hi += pad;
        }
        Axis { lo, hi }
    }

    fn fraction(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }

    fn tick_values(&self) -> Vec<f64> {
        (0..TICKS)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (TICKS - 1) as f64)
            .collect()
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders the table as a self-contained SVG: x axis ACR, y axis CCI,
/// points in row order joined by a path and labeled with their epochs.
pub fn trend_svg(table: &TrendTable) -> String {
    let x_axis = Axis::from_values(table.rows().iter().map(|r| r.acr));
    let y_axis = Axis::from_values(table.rows().iter().map(|r| r.cci));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |acr: f64| MARGIN_LEFT + x_axis.fraction(acr) * plot_w;
    let y_of = |cci: f64| MARGIN_TOP + (1.0 - y_axis.fraction(cci)) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));

    let x0 = px(MARGIN_LEFT);
    let x1 = px(WIDTH - MARGIN_RIGHT);
    let y0 = px(HEIGHT - MARGIN_BOTTOM);
    let y1 = px(MARGIN_TOP);
    svg.push_str(&format!(
        "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "  <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));

    for v in x_axis.tick_values() {
        let x = px(x_of(v));
        let base = HEIGHT - MARGIN_BOTTOM;
        svg.push_str(&format!(
            "  <line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>\n",
            px(base),
            px(base + 6.0)
        ));
        svg.push_str(&format!(
            "  <text x=\"{x}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{v:.3}</text>\n",
            px(base + 20.0)
        ));
    }
    for v in y_axis.tick_values() {
        let y = px(y_of(v));
        svg.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"black\"/>\n",
            px(MARGIN_LEFT - 6.0),
            px(MARGIN_LEFT)
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{y}\" font-size=\"12\" text-anchor=\"end\" \
             dominant-baseline=\"middle\">{v:.3}</text>\n",
            px(MARGIN_LEFT - 10.0)
        ));
    }

    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">ACR</text>\n",
        px(MARGIN_LEFT + plot_w / 2.0),
        px(HEIGHT - 20.0)
    ));
    svg.push_str(&format!(
        "  <text x=\"20\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\" \
         transform=\"rotate(-90 20 {})\">CCI</text>\n",
        px(MARGIN_TOP + plot_h / 2.0),
        px(MARGIN_TOP + plot_h / 2.0)
    ));

    if table.rows().len() > 1 {
        let points: Vec<String> = table
            .rows()
            .iter()
            .map(|r| format!("{},{}", px(x_of(r.acr)), px(y_of(r.cci))))
            .collect();
        svg.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\"/>\n",
            points.join(" ")
        ));
    }
    for row in table.rows() {
        let x = x_of(row.acr);
        let y = y_of(row.cci);
        svg.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"steelblue\"/>\n",
            px(x),
            px(y)
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>\n",
            px(x + 7.0),
            px(y - 7.0),
            escape_xml(&row.epoch)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}
