//! Report tables: learner comparison, consumed-weight comparison by device,
//! permutation importance (CSV and SVG).

use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::consumed::{relative_error_pct, ConsumedWeight};
use super::cv::CvReport;
use super::importance::ImportanceReport;
use super::metrics::mean_sd;
use super::EvalError;
use crate::category::FoodCategory;
use crate::regression::ModelSpec;
use crate::session::Device;

fn num(x: f64, decimals: usize) -> String {
    if x.is_finite() {
        format!("{x:.decimals$}")
    } else {
        "nan".into()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn md_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = format!("| {} |\n", header.join(" | "));
    out += &format!("|{}\n", header.iter().map(|_| "---|").collect::<String>());
    for r in rows {
        out += &format!("| {} |\n", r.join(" | "));
    }
    out
}

/// One learner × feature-subset line of the cross-validation comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub features: String,
    pub n_features: usize,
    pub classifier: String,
    pub mae: f64,
    pub mae_sd: f64,
    pub rmse: f64,
    pub rmse_sd: f64,
    pub accuracy_pct: f64,
}

impl Table2Row {
    pub fn from_cv(spec: &ModelSpec, cv: &CvReport) -> Self {
        Self {
            features: spec.feature_subset.label(),
            n_features: spec.feature_subset.len(),
            classifier: spec.label().to_string(),
            mae: cv.mean_mae,
            mae_sd: cv.sd_mae,
            rmse: cv.mean_rmse,
            rmse_sd: cv.sd_rmse,
            accuracy_pct: 100.0 * cv.mean_accuracy,
        }
    }

    fn cells(&self, decimals: usize) -> Vec<String> {
        vec![
            self.features.clone(),
            self.n_features.to_string(),
            self.classifier.clone(),
            num(self.mae, decimals),
            num(self.mae_sd, decimals),
            num(self.rmse, decimals),
            num(self.rmse_sd, decimals),
            num(self.accuracy_pct, decimals),
        ]
    }
}

pub const TABLE2_HEADER: [&str; 8] = [
    "Features",
    "Number of features",
    "Classifier",
    "MAE (g)",
    "MAE SD (g)",
    "RMSE (g)",
    "RMSE SD (g)",
    "Accuracy (%)",
];

pub fn table2_csv(rows: &[Table2Row]) -> String {
    let mut out = TABLE2_HEADER.join(",") + "\n";
    for r in rows {
        out += &r.cells(4).iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
        out.push('\n');
    }
    out
}

pub fn table2_markdown(rows: &[Table2Row]) -> String {
    md_table(&TABLE2_HEADER, &rows.iter().map(|r| r.cells(2)).collect::<Vec<_>>())
}

/// A dietitian's (or other assessor's) consumed-weight estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManualEstimate {
    pub session: String,
    pub food: FoodCategory,
    pub estimated_consumed_g: f64,
    pub assessor: String,
}

/// Reads `session,food,estimated_consumed_g,assessor`.
pub fn read_manual_csv<R: Read>(input: R) -> Result<Vec<ManualEstimate>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(input);
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if header != ["session", "food", "estimated_consumed_g", "assessor"] {
        return Err(EvalError::Malformed { line: 1, message: format!("unexpected header {}", header.join(",")) });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |message: String| EvalError::Malformed { line, message };
        if rec.len() != 4 {
            return Err(bad(format!("expected 4 fields, got {}", rec.len())));
        }
        let food = FoodCategory::from_name(&rec[1]).ok_or_else(|| bad(format!("unknown food `{}`", &rec[1])))?;
        let grams: f64 = rec[2]
            .parse()
            .ok()
            .filter(|g: &f64| g.is_finite() && *g >= 0.0)
            .ok_or_else(|| bad(format!("invalid estimated_consumed_g `{}`", &rec[2])))?;
        out.push(ManualEstimate {
            session: rec[0].to_string(),
            food,
            estimated_consumed_g: grams,
            assessor: rec[3].to_string(),
        });
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> EvalError {
    let line = e.position().map_or(0, |p| p.line());
    EvalError::Malformed { line, message: e.to_string() }
}

/// Mean and SD of absolute percentage errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub mean_pct: f64,
    pub sd_pct: f64,
    pub n: usize,
}

fn summarize(errors: &[f64]) -> Option<ErrorSummary> {
    if errors.is_empty() {
        return None;
    }
    let (mean_pct, sd_pct) = mean_sd(errors);
    Some(ErrorSummary { mean_pct, sd_pct, n: errors.len() })
}

/// Consumed-weight error by device (AIM, eButton, both) for the model and
/// for manual estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table3 {
    pub ml: [Option<ErrorSummary>; 3],
    pub manual: [Option<ErrorSummary>; 3],
}

fn device_slot(d: Device) -> Option<usize> {
    match d {
        Device::Aim => Some(0),
        Device::EButton => Some(1),
        _ => None,
    }
}

/// Manual rows are matched to model results by (session, food), which
/// supplies the device and the ground truth. Unmatched rows are skipped.
pub fn table3(results: &[ConsumedWeight], manual: &[ManualEstimate]) -> Table3 {
    let mut ml: [Vec<f64>; 3] = Default::default();
    let mut man: [Vec<f64>; 3] = Default::default();
    let push = |bins: &mut [Vec<f64>; 3], device: Device, err: f64| {
        if let Some(s) = device_slot(device) {
            bins[s].push(err);
        }
        bins[2].push(err);
    };
    for r in results {
        if let Some(e) = r.relative_error_pct {
            push(&mut ml, r.device, e);
        }
    }
    for m in manual {
        let matched = results.iter().find(|r| r.session_id == m.session && r.food == m.food);
        match matched.and_then(|r| relative_error_pct(m.estimated_consumed_g, r.ground_truth_consumed_g).map(|e| (r, e))) {
            Some((r, e)) => push(&mut man, r.device, e),
            None => log::warn!("manual estimate for {} / {} has no ground truth; skipped", m.session, m.food),
        }
    }
    Table3 { ml: ml.map(|v| summarize(&v)), manual: man.map(|v| summarize(&v)) }
}

pub const TABLE3_HEADER: [&str; 7] = ["Method", "AIM", "Manual", "eButton", "Manual", "Both", "Manual"];

impl Table3 {
    fn rows(&self) -> Vec<Vec<String>> {
        let cell = |s: &Option<ErrorSummary>, f: fn(&ErrorSummary) -> f64| s.as_ref().map_or(String::new(), |s| num(f(s), 2));
        let row = |label: &str, f: fn(&ErrorSummary) -> f64| {
            let mut r = vec![label.to_string()];
            for i in 0..3 {
                r.push(cell(&self.ml[i], f));
                r.push(cell(&self.manual[i], f));
            }
            r
        };
        vec![row("Mean (%)", |s| s.mean_pct), row("S.D (%)", |s| s.sd_pct)]
    }

    pub fn to_csv(&self) -> String {
        let mut out = TABLE3_HEADER.join(",") + "\n";
        for r in self.rows() {
            out += &r.join(",");
            out.push('\n');
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        md_table(&TABLE3_HEADER, &self.rows())
    }
}

pub fn consumed_detail_csv(results: &[ConsumedWeight]) -> String {
    let mut out =
        String::from("session,device,food,initial_g,final_g,consumed_g,ground_truth_consumed_g,relative_error_pct\n");
    for r in results {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| num(x, 4));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            csv_field(&r.session_id),
            r.device,
            csv_field(r.food.name()),
            num(r.initial_estimate_g, 4),
            num(r.final_estimate_g, 4),
            num(r.consumed_g, 4),
            opt(r.ground_truth_consumed_g),
            opt(r.relative_error_pct),
        );
    }
    out
}

pub fn importance_csv(report: &ImportanceReport) -> String {
    let mut out = String::from("feature,importance_g,share_pct\n");
    for f in &report.features {
        let share = f.share_pct.map_or(String::new(), |s| num(s, 4));
        let _ = writeln!(out, "{},{},{}", csv_field(&f.name), num(f.importance, 6), share);
    }
    out
}

pub fn importance_markdown(report: &ImportanceReport) -> String {
    let rows: Vec<Vec<String>> = report
        .features
        .iter()
        .map(|f| vec![f.name.clone(), num(f.importance, 3), f.share_pct.map_or("-".into(), |s| num(s, 1))])
        .collect();
    md_table(&["Feature", "Importance (g)", "Share (%)"], &rows)
}

/// Horizontal bar chart of the positive-importance shares.
pub fn importance_svg(report: &ImportanceReport, title: &str) -> String {
    let (bar_h, gap, left, chart_w) = (22.0, 8.0, 90.0, 320.0);
    let n = report.features.len() as f64;
    let height = 40.0 + n * (bar_h + gap) + 10.0;
    let width = left + chart_w + 70.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(s, "<text x=\"{}\" y=\"20\" font-size=\"14\">{}</text>", left, xml_escape(title));
    for (i, f) in report.features.iter().enumerate() {
        let y = 36.0 + i as f64 * (bar_h + gap);
        let share = f.share_pct.unwrap_or(0.0);
        let w = chart_w * share / 100.0;
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            left - 6.0,
            y + bar_h * 0.7,
            xml_escape(&f.name)
        );
        let _ = writeln!(
            s,
            "<rect x=\"{left}\" y=\"{y}\" width=\"{}\" height=\"{bar_h}\" fill=\"#4878a8\"/>",
            num(w, 2)
        );
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">{}%</text>", num(left + w + 4.0, 2), y + bar_h * 0.7, num(share, 1));
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
