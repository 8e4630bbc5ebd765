//! Static log-log convergence plot rendered directly as SVG: data points,
//! the fitted line, and a guide line at the theoretically expected slope.

use spde_core::experiments::ErrorTable;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 25.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 55.0;

struct LogMap {
    min: f64,
    max: f64,
    lo_px: f64,
    hi_px: f64,
}

impl LogMap {
    fn new(values: &[f64], lo_px: f64, hi_px: f64) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &v in values {
            if v > 0.0 && v.is_finite() {
                min = min.min(v);
                max = max.max(v);
            }
        }
        if !min.is_finite() {
            min = 1e-16;
            max = 1.0;
        }
        // A little headroom on both ends of the log range.
        let pad = 0.08 * (max.ln() - min.ln()).max(0.2);
        Self {
            min: (min.ln() - pad).exp(),
            max: (max.ln() + pad).exp(),
            lo_px,
            hi_px,
        }
    }

    fn map(&self, v: f64) -> f64 {
        let t = (v.ln() - self.min.ln()) / (self.max.ln() - self.min.ln());
        self.lo_px + t * (self.hi_px - self.lo_px)
    }

    /// Decade tick positions inside the range.
    fn decades(&self) -> Vec<f64> {
        let lo = self.min.log10().ceil() as i32;
        let hi = self.max.log10().floor() as i32;
        (lo..=hi).map(|e| 10f64.powi(e)).collect()
    }
}

/// Render the table; axis label depends on the axis kind.
pub fn render(table: &ErrorTable, expected_rate: Option<f64>) -> String {
    let xs: Vec<f64> = table.rows.iter().map(|r| r.axis_value).collect();
    let ys: Vec<f64> = table.rows.iter().map(|r| r.rms_error).collect();
    let x_map = LogMap::new(&xs, MARGIN_L, WIDTH - MARGIN_R);
    // SVG y grows downward.
    let y_map = LogMap::new(&ys, HEIGHT - MARGIN_B, MARGIN_T);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Frame.
    out.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{}\" height=\"{}\" \
         fill=\"none\" stroke=\"black\"/>\n",
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    ));

    // Decade ticks.
    for x in x_map.decades() {
        let px = x_map.map(x);
        out.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{}\" x2=\"{px:.1}\" y2=\"{}\" stroke=\"#bbbbbb\" stroke-dasharray=\"3,4\"/>\n",
            MARGIN_T,
            HEIGHT - MARGIN_B
        ));
        out.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{}\" text-anchor=\"middle\">1e{}</text>\n",
            HEIGHT - MARGIN_B + 18.0,
            x.log10().round() as i32
        ));
    }
    for y in y_map.decades() {
        let py = y_map.map(y);
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py:.1}\" x2=\"{}\" y2=\"{py:.1}\" stroke=\"#bbbbbb\" stroke-dasharray=\"3,4\"/>\n",
            MARGIN_L,
            WIDTH - MARGIN_R
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">1e{}</text>\n",
            MARGIN_L - 6.0,
            py + 4.0,
            y.log10().round() as i32
        ));
    }

    // Every axis value gets a small tick mark.
    for &x in &xs {
        let px = x_map.map(x);
        out.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{}\" x2=\"{px:.1}\" y2=\"{}\" stroke=\"black\"/>\n",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{x}</text>\n",
            HEIGHT - MARGIN_B + 32.0
        ));
    }

    // Fitted line err = exp(intercept) · axis^(−slope), drawn across the
    // data range.
    if let Some(fit) = table.fit {
        let (x0, x1) = (xs[0], xs[xs.len() - 1]);
        let y0 = (fit.intercept + (-fit.slope) * x0.ln()).exp();
        let y1 = (fit.intercept + (-fit.slope) * x1.ln()).exp();
        out.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#c03030\" stroke-width=\"1.5\"/>\n",
            x_map.map(x0),
            y_map.map(y0),
            x_map.map(x1),
            y_map.map(y1)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"#c03030\">fitted slope {:.3}</text>\n",
            MARGIN_L + 10.0,
            MARGIN_T + 18.0,
            fit.slope
        ));
    }

    // Guide line with the expected decay order, anchored above the first
    // data point.
    if let Some(rate) = expected_rate {
        let (x0, x1) = (xs[0], xs[xs.len() - 1]);
        let anchor = ys[0] * 1.8;
        let y1 = anchor * (x1 / x0).powf(-rate);
        out.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#3060c0\" stroke-dasharray=\"6,4\"/>\n",
            x_map.map(x0),
            y_map.map(anchor),
            x_map.map(x1),
            y_map.map(y1)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"#3060c0\">reference slope {rate:.3}</text>\n",
            MARGIN_L + 10.0,
            MARGIN_T + 34.0
        ));
    }

    // Data points and connecting polyline.
    let pts: Vec<String> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| format!("{:.1},{:.1}", x_map.map(x), y_map.map(y)))
        .collect();
    out.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n",
        pts.join(" ")
    ));
    for (&x, &y) in xs.iter().zip(&ys) {
        out.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3.5\" fill=\"black\"/>\n",
            x_map.map(x),
            y_map.map(y)
        ));
    }

    // Axis labels.
    let x_label = match table.axis {
        spde_core::experiments::AxisKind::SpatialN => "N (basis cutoff per direction)",
        spde_core::experiments::AxisKind::TemporalM => "M (time steps)",
    };
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{x_label}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 8.0
    ));
    out.push_str(&format!(
        "<text x=\"14\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">RMS strong error</text>\n",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0
    ));
    out.push_str("</svg>\n");
    out
}
