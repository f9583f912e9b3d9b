//! Logged metrics and the `metrics.csv` format.
//!
//! Columns are `run_id, method, seed, t, samples_used, eta_t, status`
//! followed by the metric columns of the requested metrics, always in the
//! order of [`METRIC_COLUMNS`]. Reals are written with 17 significant
//! digits; a failed seed gets one marker row with status `failed` and
//! empty metric cells.

use std::path::Path;

use crate::oracle::OracleCapabilities;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    GradPhiNorm,
    ObjectiveGap,
    EstimatorErrors,
    PathLength,
    VNorm,
    WNorm,
}

/// Every metric column in output order.
pub const METRIC_COLUMNS: [&str; 11] = [
    "grad_phi_norm",
    "phi",
    "objective_gap",
    "gap_normalized",
    "err_u",
    "err_vprime",
    "err_vdprime",
    "err_w",
    "path_length",
    "v_norm",
    "w_norm",
];

pub const KEY_COLUMNS: [&str; 7] = [
    "run_id",
    "method",
    "seed",
    "t",
    "samples_used",
    "eta_t",
    "status",
];

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::GradPhiNorm,
        Metric::ObjectiveGap,
        Metric::EstimatorErrors,
        Metric::PathLength,
        Metric::VNorm,
        Metric::WNorm,
    ];

    pub const ALL_NAMES: [&'static str; 6] = [
        "grad_phi_norm",
        "objective_gap",
        "estimator_errors",
        "path_length",
        "v_norm",
        "w_norm",
    ];

    pub fn name(&self) -> &'static str {
        Self::ALL_NAMES[*self as usize]
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL_NAMES
            .iter()
            .position(|n| *n == s)
            .map(|i| Self::ALL[i])
    }

    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Metric::GradPhiNorm => &METRIC_COLUMNS[0..1],
            Metric::ObjectiveGap => &METRIC_COLUMNS[1..4],
            Metric::EstimatorErrors => &METRIC_COLUMNS[4..8],
            Metric::PathLength => &METRIC_COLUMNS[8..9],
            Metric::VNorm => &METRIC_COLUMNS[9..10],
            Metric::WNorm => &METRIC_COLUMNS[10..11],
        }
    }

    /// Capability names this metric needs, each with whether it is present.
    pub fn requirements(&self, caps: &OracleCapabilities) -> Vec<(&'static str, bool)> {
        match self {
            Metric::GradPhiNorm => vec![("grad_phi", caps.has_grad_phi)],
            Metric::ObjectiveGap => vec![(
                "phi",
                caps.has_phi || (caps.has_exact_inner && caps.has_exact_outer),
            )],
            Metric::EstimatorErrors => vec![
                ("exact_inner", caps.has_exact_inner),
                ("exact_outer", caps.has_exact_outer),
            ],
            _ => vec![],
        }
    }
}

/// Metric columns for a metric set, in canonical order.
pub fn columns_for(metrics: &[Metric]) -> Vec<&'static str> {
    let mut sorted = metrics.to_vec();
    sorted.sort();
    sorted
        .iter()
        .flat_map(|m| m.columns().iter().copied())
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub run_id: String,
    pub method: String,
    pub seed: u64,
    pub t: u64,
    pub samples_used: u64,
    pub eta_t: f64,
    pub status: RowStatus,
    /// One entry per metric column; `None` is an empty cell.
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    Failed,
}

impl RowStatus {
    fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Failed => "failed",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsTable {
    pub columns: Vec<String>,
    pub rows: Vec<MetricsRow>,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

impl MetricsTable {
    pub fn new(metrics: &[Metric]) -> Self {
        MetricsTable {
            columns: columns_for(metrics).into_iter().map(String::from).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn header(&self) -> Vec<String> {
        KEY_COLUMNS
            .iter()
            .map(|s| s.to_string())
            .chain(self.columns.iter().cloned())
            .collect()
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Config(format!("csv encoding failed: {e}"));
        w.write_record(self.header()).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![
                r.run_id.clone(),
                r.method.clone(),
                r.seed.to_string(),
                r.t.to_string(),
                r.samples_used.to_string(),
                format_real(r.eta_t),
                r.status.as_str().to_string(),
            ];
            rec.extend(
                r.values
                    .iter()
                    .map(|v| v.map(format_real).unwrap_or_default()),
            );
            w.write_record(rec).map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Config(format!("csv encoding failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()?).map_err(|e| Error::io(path, e))
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header: Vec<String> = r
            .headers()
            .map_err(|e| parse_err(1, 1, e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        if header.len() < KEY_COLUMNS.len() || header[..KEY_COLUMNS.len()] != KEY_COLUMNS {
            return Err(parse_err(
                1,
                1,
                "header does not start with the key columns",
            ));
        }
        let columns = header[KEY_COLUMNS.len()..].to_vec();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let row = i + 2;
            let rec = rec.map_err(|e| parse_err(row, 1, e.to_string()))?;
            let num = |j: usize| -> Result<f64> {
                rec[j]
                    .parse::<f64>()
                    .map_err(|_| parse_err(row, j + 1, format!("`{}` is not a number", &rec[j])))
            };
            let int = |j: usize| -> Result<u64> {
                rec[j]
                    .parse::<u64>()
                    .map_err(|_| parse_err(row, j + 1, format!("`{}` is not an integer", &rec[j])))
            };
            let status = match &rec[6] {
                "ok" => RowStatus::Ok,
                "failed" => RowStatus::Failed,
                other => return Err(parse_err(row, 7, format!("unknown status `{other}`"))),
            };
            let values = (KEY_COLUMNS.len()..rec.len())
                .map(|j| {
                    if rec[j].is_empty() {
                        Ok(None)
                    } else {
                        num(j).map(Some)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(MetricsRow {
                run_id: rec[0].to_string(),
                method: rec[1].to_string(),
                seed: int(2)?,
                t: int(3)?,
                samples_used: int(4)?,
                eta_t: num(5)?,
                status,
                values,
            });
        }
        Ok(MetricsTable { columns, rows })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text)
    }
}

fn parse_err(row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        row,
        column,
        message: message.into(),
    }
}
