//! Experiment rows and their CSV schemas.
//!
//! Every kind has a fixed header; floats are written with 17 significant
//! digits so a row round-trips to the same `f64`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Learn,
    MseSweep,
    Concentration,
    FisherAudit,
    ConcatAudit,
    Bound,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Learn,
        ExperimentKind::MseSweep,
        ExperimentKind::Concentration,
        ExperimentKind::FisherAudit,
        ExperimentKind::ConcatAudit,
        ExperimentKind::Bound,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Learn => "learn",
            ExperimentKind::MseSweep => "mse_sweep",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::FisherAudit => "fisher_audit",
            ExperimentKind::ConcatAudit => "concat_audit",
            ExperimentKind::Bound => "bound",
        }
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| format!("unknown experiment kind `{s}`"))
    }
}

/// One atomic measurement of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub d_channel: usize,
    pub r: usize,
    pub k: usize,
    pub n: u64,
    pub trial: usize,
    pub metric: String,
    pub value: f64,
    pub wall_time: f64,
}

pub const MSE_HEADER: [&str; 8] = ["kind", "seed", "d_channel", "r", "k", "N", "trial", "sq_error"];
pub const CONCENTRATION_HEADER: [&str; 8] =
    ["kind", "seed", "d_channel", "r", "trial", "min_kii", "mean_kii", "lambda_min_k"];
pub const AUDIT_HEADER: [&str; 9] =
    ["kind", "seed", "d_channel", "r", "k", "trace_fisher", "bound", "slack", "satisfied"];

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Row of a concentration run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub seed: u64,
    pub d_channel: usize,
    pub r: usize,
    pub trial: usize,
    pub min_kii: f64,
    pub mean_kii: f64,
    pub lambda_min_k: f64,
}

/// Row of a Fisher trace-bound audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub d_channel: usize,
    pub r: usize,
    pub k: usize,
    pub trace_fisher: f64,
    pub bound: f64,
    pub slack: f64,
    pub satisfied: bool,
}

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

/// `kind,seed,d_channel,r,k,N,trial,sq_error`
pub fn write_mse_csv<W: Write>(out: W, records: &[ExperimentRecord]) -> Result<()> {
    let mut w = writer(out, &MSE_HEADER)?;
    for rec in records {
        w.write_record([
            rec.kind.as_str().to_string(),
            rec.seed.to_string(),
            rec.d_channel.to_string(),
            rec.r.to_string(),
            rec.k.to_string(),
            rec.n.to_string(),
            rec.trial.to_string(),
            format_float(rec.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `kind,seed,d_channel,r,trial,min_kii,mean_kii,lambda_min_k`
pub fn write_concentration_csv<W: Write>(out: W, rows: &[ConcentrationRow]) -> Result<()> {
    let mut w = writer(out, &CONCENTRATION_HEADER)?;
    for row in rows {
        w.write_record([
            ExperimentKind::Concentration.as_str().to_string(),
            row.seed.to_string(),
            row.d_channel.to_string(),
            row.r.to_string(),
            row.trial.to_string(),
            format_float(row.min_kii),
            format_float(row.mean_kii),
            format_float(row.lambda_min_k),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `kind,seed,d_channel,r,k,trace_fisher,bound,slack,satisfied`
pub fn write_audit_csv<W: Write>(out: W, rows: &[AuditRow]) -> Result<()> {
    let mut w = writer(out, &AUDIT_HEADER)?;
    for row in rows {
        w.write_record([
            row.kind.as_str().to_string(),
            row.seed.to_string(),
            row.d_channel.to_string(),
            row.r.to_string(),
            row.k.to_string(),
            format_float(row.trace_fisher),
            format_float(row.bound),
            format_float(row.slack),
            row.satisfied.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
