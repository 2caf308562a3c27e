use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HarnessError, HarnessResult, StepRow};

/// Trajectory column to plot against the step index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PlotColumn {
    #[default]
    Loss,
    GradNormSq,
    Stepsize,
    Smoothness,
    Mu,
    Gamma,
}

impl PlotColumn {
    pub fn get(self, r: &StepRow) -> Option<f64> {
        match self {
            PlotColumn::Loss => Some(r.loss),
            PlotColumn::GradNormSq => r.grad_norm_sq_true,
            PlotColumn::Stepsize => Some(r.stepsize),
            PlotColumn::Smoothness => r.smoothness,
            PlotColumn::Mu => r.mu,
            PlotColumn::Gamma => r.gamma,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PlotColumn::Loss => "loss",
            PlotColumn::GradNormSq => "grad_norm_sq_true",
            PlotColumn::Stepsize => "stepsize",
            PlotColumn::Smoothness => "smoothness",
            PlotColumn::Mu => "mu",
            PlotColumn::Gamma => "gamma",
        }
    }
}

impl std::str::FromStr for PlotColumn {
    type Err = HarnessError;

    fn from_str(s: &str) -> HarnessResult<Self> {
        Ok(match s {
            "loss" => PlotColumn::Loss,
            "grad_norm_sq" | "grad_norm_sq_true" => PlotColumn::GradNormSq,
            "stepsize" => PlotColumn::Stepsize,
            "smoothness" => PlotColumn::Smoothness,
            "mu" => PlotColumn::Mu,
            "gamma" => PlotColumn::Gamma,
            other => return Err(HarnessError::config("column", format!("unknown column `{other}`"))),
        })
    }
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Renders one polyline per named series. With `log_y`, non-positive values
/// are dropped. Non-finite values are always dropped.
pub fn render_svg(series: &[(String, Vec<StepRow>)], column: PlotColumn, log_y: bool) -> String {
    let tf = |v: f64| if log_y { v.log10() } else { v };
    let pts: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, rows)| {
            rows.iter()
                .filter_map(|r| column.get(r).map(|v| (r.step as f64, v)))
                .filter(|&(_, v)| v.is_finite() && (!log_y || v > 0.0))
                .map(|(s, v)| (s, tf(v)))
                .collect()
        })
        .collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{PAD},{PAD} V{b} H{r}" fill="none" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let ylab = if log_y { format!("log10 {}", column.label()) } else { column.label().to_string() };
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">step</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(s, r#"<text x="15" y="{}" font-size="12" transform="rotate(-90 15 {})" text-anchor="middle">{ylab}</text>"#, H / 2.0, H / 2.0);
    for (v, anchor, x, y) in [
        (x0, "start", sx(x0), H - PAD + 15.0),
        (x1, "end", sx(x1), H - PAD + 15.0),
    ] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" font-size="10" text-anchor="{anchor}">{v}</text>"#);
    }
    for v in [y0, y1] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{:.3e}</text>"#, PAD - 4.0, sy(v) + 3.0, v);
    }
    for (i, ((name, _), p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
        let ly = PAD + 14.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, W - PAD - 120.0, W - PAD - 100.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11">{}</text>"#, W - PAD - 95.0, ly + 4.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Reads each CSV, labels it by file stem and writes the SVG to `out`.
pub fn render_plot(inputs: &[&Path], column: PlotColumn, log_y: bool, out: &Path) -> HarnessResult<()> {
    let mut series = Vec::with_capacity(inputs.len());
    for p in inputs {
        let name = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
        series.push((name, super::import_csv(p)?));
    }
    std::fs::write(out, render_svg(&series, column, log_y)).map_err(|e| HarnessError::io(out, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(vals: &[f64]) -> Vec<StepRow> {
        vals.iter()
            .enumerate()
            .map(|(i, &v)| StepRow {
                step: i as u64 + 1,
                loss: v,
                grad_norm_sq_true: None,
                mu: None,
                gamma: None,
                stepsize: 0.1,
                smoothness: None,
            })
            .collect()
    }

    #[test]
    fn one_polyline_per_series() {
        let svg = render_svg(
            &[("a".into(), rows(&[3.0, 2.0, 1.0])), ("b<c".into(), rows(&[1.0, f64::NAN, 0.5]))],
            PlotColumn::Loss,
            true,
        );
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;c"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_column_still_renders() {
        let svg = render_svg(&[("a".into(), rows(&[1.0]))], PlotColumn::Mu, false);
        assert!(svg.contains("<polyline"));
    }
}
