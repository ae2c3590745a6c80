//! Executes validated experiment configs and persists their outputs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::audit::{audit_protocol, draw_protocol, ProtocolSpace};
use super::config::{validate, ExperimentConfig};
use crate::error::{Error, Result};
use crate::estimator::{min_diagonal_experiment, mse_curve, PgmEstimator, KII_THRESHOLD};
use crate::fisher::van_trees_lower_bound;
use crate::record::{
    write_audit_csv, write_concentration_csv, write_mse_csv, AuditRow, ConcentrationRow, ExperimentKind,
    ExperimentRecord,
};
use crate::seed::derive_seed;

/// Reference constant of the MSE scaling law, `MSE · N`.
pub const MSE_REFERENCE_CONSTANT: f64 = 6.25;

/// Where a run's outputs landed.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub csv_path: Option<PathBuf>,
    pub summary_path: PathBuf,
    pub summary: Value,
}

pub fn csv_path(config: &ExperimentConfig) -> PathBuf {
    Path::new(&config.output_path).join(format!("{}.csv", config.kind))
}

pub fn summary_path(config: &ExperimentConfig) -> PathBuf {
    Path::new(&config.output_path).join(format!("{}_summary.json", config.kind))
}

/// Writes `bytes` to a sibling temp file and renames it into place.
fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Validates and runs `config` on the current rayon pool.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    let problems = validate(config);
    if !problems.is_empty() {
        return Err(Error::InvalidConfig(problems));
    }
    let started = Instant::now();
    let (csv, mut summary) = match config.kind {
        ExperimentKind::Learn => run_learn(config)?,
        ExperimentKind::MseSweep => run_mse_sweep(config)?,
        ExperimentKind::Concentration => run_concentration(config)?,
        ExperimentKind::FisherAudit | ExperimentKind::ConcatAudit => run_audit(config)?,
        ExperimentKind::Bound => (None, run_bound(config)?),
    };
    let csv_path = match csv {
        Some(bytes) => {
            let path = csv_path(config);
            write_atomically(&path, &bytes)?;
            Some(path)
        }
        None => None,
    };
    let obj = summary.as_object_mut().expect("summaries are objects");
    obj.insert("kind".into(), json!(config.kind));
    obj.insert("root_seed".into(), json!(config.root_seed));
    obj.insert("config".into(), serde_json::to_value(config)?);
    obj.insert("wall_time".into(), json!(started.elapsed().as_secs_f64()));
    let summary_path = summary_path(config);
    write_atomically(&summary_path, &serde_json::to_vec_pretty(&summary)?)?;
    Ok(RunOutcome { csv_path, summary_path, summary })
}

/// Runs on a dedicated pool of `threads` workers (`None` = rayon default).
pub fn run_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<RunOutcome> {
    match threads {
        None => run(config),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(|| run(config)),
    }
}

type Output = (Option<Vec<u8>>, Value);

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn run_learn(config: &ExperimentConfig) -> Result<Output> {
    let channel = config.channel.as_ref().expect("validated").build(config.root_seed)?;
    let n = config.n.expect("validated");
    let estimator = PgmEstimator::new(&channel, config.estimator_options())?;
    let seed = derive_seed(config.root_seed, "learn", &[]);
    let started = Instant::now();
    let result = estimator.estimate_seeded(n, seed)?;
    let record = ExperimentRecord {
        kind: ExperimentKind::Learn,
        seed,
        d_channel: channel.d_channel(),
        r: channel.rank(),
        k: 1,
        n,
        trial: 0,
        metric: "sq_error".into(),
        value: result.squared_error.expect("true theta is known"),
        wall_time: started.elapsed().as_secs_f64(),
    };
    let mut csv = Vec::new();
    write_mse_csv(&mut csv, &[record])?;
    let summary = json!({
        "d_channel": channel.d_channel(),
        "r": channel.rank(),
        "theta_true": channel.theta().as_slice(),
        "condition_number": estimator.condition_number(),
        "result": to_value(&result)?,
    });
    Ok((Some(csv), summary))
}

fn run_mse_sweep(config: &ExperimentConfig) -> Result<Output> {
    let channel = config.channel.as_ref().expect("validated").build(config.root_seed)?;
    let n_values = config.n_values.as_ref().expect("validated");
    let trials = config.trials.expect("validated");
    let curve = mse_curve(&channel, n_values, trials, config.estimator_options(), config.root_seed)?;
    let mut csv = Vec::new();
    write_mse_csv(&mut csv, &curve.records)?;
    let points: Vec<Value> = curve
        .points
        .iter()
        .map(|p| {
            json!({
                "N": p.n,
                "trials": p.trials,
                "mean_sq_error": p.mean,
                "stderr": p.stderr,
                "mean_sq_error_times_N": p.mean * p.n as f64,
                "reference": MSE_REFERENCE_CONSTANT / p.n as f64,
            })
        })
        .collect();
    let summary = json!({
        "d_channel": channel.d_channel(),
        "r": channel.rank(),
        "condition_number": curve.condition_number,
        "points": points,
        "loglog_slope": curve.loglog_slope(),
        "reference_constant": MSE_REFERENCE_CONSTANT,
    });
    Ok((Some(csv), summary))
}

fn run_concentration(config: &ExperimentConfig) -> Result<Output> {
    let (d_channel, r) = (config.d_channel.expect("validated"), config.r.expect("validated"));
    let summary = min_diagonal_experiment(d_channel, r, config.trials.expect("validated"), config.root_seed)?;
    let rows: Vec<ConcentrationRow> = summary
        .trials
        .iter()
        .map(|t| ConcentrationRow {
            seed: t.seed,
            d_channel,
            r,
            trial: t.trial,
            min_kii: t.min_kii,
            mean_kii: t.mean_kii,
            lambda_min_k: t.lambda_min_k,
        })
        .collect();
    let mut csv = Vec::new();
    write_concentration_csv(&mut csv, &rows)?;
    let out = json!({
        "d_channel": d_channel,
        "r": r,
        "trials": rows.len(),
        "threshold": KII_THRESHOLD,
        "fraction_min_kii_above_threshold": summary.fraction_min_above_threshold,
        "mean_of_mean_kii": summary.mean_of_mean_kii,
        "stderr_of_mean_kii": summary.stderr_of_mean_kii,
        "min_lambda_min_k": rows.iter().map(|t| t.lambda_min_k).fold(f64::INFINITY, f64::min),
        "gerschgorin_exceptions": summary.gerschgorin_exceptions,
    });
    Ok((Some(csv), out))
}

fn run_audit(config: &ExperimentConfig) -> Result<Output> {
    let kind = config.kind;
    let space = ProtocolSpace {
        d_channel_values: config.d_channel_values_or_default(),
        r_values: config.r_values_or_default(),
        k_values: if kind == ExperimentKind::ConcatAudit { config.k_values_or_default() } else { vec![1] },
        ancilla_values: config.ancilla_values_or_default(),
    };
    let rank_cap = config.rank_cap();
    let audits = (0..config.protocols_or_default())
        .into_par_iter()
        .map(|i| {
            let protocol = draw_protocol(&space, kind.as_str(), config.root_seed, i)?;
            let audit = audit_protocol(&protocol, rank_cap)?;
            Ok((audit.report, audit.row_max_sum(), audit.row_max_holds(), audit.protocol))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<AuditRow> = audits
        .iter()
        .map(|(report, _, _, p)| AuditRow {
            kind,
            seed: p.seed,
            d_channel: p.d_channel,
            r: p.r,
            k: p.k,
            trace_fisher: report.trace_fisher,
            bound: report.bound,
            slack: report.slack,
            satisfied: report.satisfied,
        })
        .collect();
    let mut csv = Vec::new();
    write_audit_csv(&mut csv, &rows)?;
    let max_ratio = audits.iter().map(|(r, ..)| r.trace_fisher / r.bound).fold(0.0, f64::max);
    let summary = json!({
        "protocols": audits.len(),
        "violations": audits.iter().filter(|(r, ..)| !r.satisfied).count(),
        "max_trace_over_bound": max_ratio,
        "min_slack": audits.iter().map(|(r, ..)| r.slack).fold(f64::INFINITY, f64::min),
        "row_max_violations": audits.iter().filter(|(_, _, ok, _)| !ok).count(),
        "max_row_max_over_dim": audits
            .iter()
            .map(|(_, s, _, p)| s / p.probe_dim() as f64)
            .fold(0.0, f64::max),
        "space": to_value(&space)?,
    });
    Ok((Some(csv), summary))
}

fn run_bound(config: &ExperimentConfig) -> Result<Value> {
    let (r, d, k) = (config.r.expect("validated"), config.d.expect("validated"), config.k.unwrap_or(1));
    let epsilon = config.epsilon.expect("validated");
    let closed_form = van_trees_lower_bound(r, d, k, epsilon, None)?;
    let with_trace = config.trace_fisher.map(|t| van_trees_lower_bound(r, d, k, epsilon, Some(t))).transpose()?;
    Ok(json!({
        "r": r,
        "d": d,
        "k": k,
        "epsilon": epsilon,
        "reference_lower_bound": with_trace.unwrap_or(closed_form),
        "closed_form_lower_bound": closed_form,
        "trace_fisher": config.trace_fisher,
    }))
}
