//! Scaling reports, log-log regression and the common CSV/JSON report schema.
//!
//! Every estimate-verification experiment produces `(size, norm)` samples.
//! The fitted slope is compared against a predicted exponent with a slack; a
//! report lists the samples, the fit and a pass/fail verdict. CSV files are
//! versioned with a leading `schema=1` line and carry the experiment id, the
//! equation tag it exercises, a parameter block, per-sample rows and a
//! slope/constant footer row. The JSON mirror holds the same data.

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("log-log fit needs positive samples, got ({x}, {y})")]
    NonPositiveSample { x: f64, y: f64 },
}

/// `(size parameter, measured norm)` samples with a log-log least-squares fit.
///
/// `constant` is reported at the largest size: it is the prefactor `C` such
/// that `C · x_max^slope = y_max`. `residual` is the root-mean-square
/// deviation of `ln y` from the fitted line.
#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub constant: f64,
    pub residual: f64,
}

impl ScalingReport {
    /// Ordinary least squares on `(ln x, ln y)`; needs two or more samples.
    pub fn fit(samples: Vec<(f64, f64)>) -> Result<Self, ReportError> {
        if samples.len() < 2 {
            return Err(ReportError::TooFewSamples {
                need: 2,
                got: samples.len(),
            });
        }
        for &(x, y) in &samples {
            if !(x > 0.0) || !(y > 0.0) {
                return Err(ReportError::NonPositiveSample { x, y });
            }
        }
        let n = samples.len() as f64;
        let logs: Vec<(f64, f64)> = samples.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
        let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
        let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
        let var_x = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
        let cov = logs
            .iter()
            .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
            .sum::<f64>();
        let slope = if var_x > 0.0 { cov / var_x } else { 0.0 };
        let intercept = mean_y - slope * mean_x;
        let residual = (logs
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        let &(x_last, y_last) = samples
            .iter()
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .expect("nonempty");
        let constant = y_last / x_last.powf(slope);
        Ok(Self {
            samples,
            slope,
            constant,
            residual,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "samples": self.samples.iter().map(|&(x, y)| json!([x, y])).collect::<Vec<_>>(),
            "slope": self.slope,
            "constant": self.constant,
            "residual": self.residual,
        })
    }
}

/// Outcome of comparing a fitted slope against a predicted exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub slope: f64,
    pub predicted: f64,
    pub slack: f64,
}

/// Judge a scaling report against `predicted + slack`; at least four samples
/// are required for the fit to mean anything.
pub fn fit_and_judge(
    report: &ScalingReport,
    predicted: f64,
    slack: f64,
) -> Result<Verdict, ReportError> {
    if report.samples.len() < 4 {
        return Err(ReportError::TooFewSamples {
            need: 4,
            got: report.samples.len(),
        });
    }
    Ok(Verdict {
        pass: report.slope <= predicted + slack,
        slope: report.slope,
        predicted,
        slack,
    })
}

/// One report document in the common schema.
#[derive(Clone, Debug, Default)]
pub struct ReportDoc {
    pub experiment: String,
    pub tags: Vec<String>,
    pub params: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub footer: Vec<(String, String)>,
}

impl ReportDoc {
    pub fn new(experiment: &str, tags: &[&str]) -> Self {
        Self {
            experiment: experiment.to_string(),
            tags: tags.iter().map(|t| t.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn columns(&mut self, cols: &[&str]) -> &mut Self {
        self.columns = cols.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn row(&mut self, cells: &[String]) -> &mut Self {
        self.rows.push(cells.to_vec());
        self
    }

    pub fn footer_entry(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.footer.push((key.to_string(), value.to_string()));
        self
    }

    pub fn footer_fit(&mut self, report: &ScalingReport) -> &mut Self {
        self.footer_entry("slope", fmt_f64(report.slope));
        self.footer_entry("constant", fmt_f64(report.constant));
        self.footer_entry("residual", fmt_f64(report.residual));
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("schema=1\n");
        out.push_str(&format!("experiment,{}\n", self.experiment));
        out.push_str(&format!("tags,{}\n", self.tags.join(";")));
        for (k, v) in &self.params {
            out.push_str(&format!("param,{k},{v}\n"));
        }
        out.push_str(&format!("columns,{}\n", self.columns.join(",")));
        for row in &self.rows {
            out.push_str(&format!("row,{}\n", row.join(",")));
        }
        let footer: Vec<String> = self
            .footer
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        out.push_str(&format!("footer,{}\n", footer.join(",")));
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": 1,
            "experiment": self.experiment,
            "tags": self.tags,
            "params": Value::Object(
                self.params.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()
            ),
            "columns": self.columns,
            "rows": self.rows,
            "footer": Value::Object(
                self.footer.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()
            ),
        })
    }
}

/// Shortest-roundtrip float formatting; deterministic for a given value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}
