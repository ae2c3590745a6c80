//! Command-line front end: `muclab <kind> [--config file.json] [flags]`.
//!
//! Flags mirror config fields and override values loaded with `--config`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use super::config::{ChannelSpec, ExperimentConfig, ThetaSpec, UnitariesSpec};
use super::run::run_with_threads;
use crate::error::{Error, Result};
use crate::estimator::SamplingPath;
use crate::record::ExperimentKind;

#[derive(Debug, Parser)]
#[command(name = "muclab", version, about = "Experiments on learning mixed unitary channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate θ once from N channel uses.
    Learn(Flags),
    /// Mean squared error of the estimator over a grid of N.
    #[command(name = "mse_sweep", alias = "mse-sweep")]
    MseSweep(Flags),
    /// Diagonal of the overlap matrix for Haar ensembles.
    Concentration(Flags),
    /// Fisher trace bound over random single-use protocols.
    #[command(name = "fisher_audit", alias = "fisher-audit")]
    FisherAudit(Flags),
    /// Fisher trace bound over random concatenated protocols.
    #[command(name = "concat_audit", alias = "concat-audit")]
    ConcatAudit(Flags),
    /// Reference sample count for a target error.
    Bound(Flags),
}

impl Command {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Command::Learn(_) => ExperimentKind::Learn,
            Command::MseSweep(_) => ExperimentKind::MseSweep,
            Command::Concentration(_) => ExperimentKind::Concentration,
            Command::FisherAudit(_) => ExperimentKind::FisherAudit,
            Command::ConcatAudit(_) => ExperimentKind::ConcatAudit,
            Command::Bound(_) => ExperimentKind::Bound,
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Learn(f)
            | Command::MseSweep(f)
            | Command::Concentration(f)
            | Command::FisherAudit(f)
            | Command::ConcatAudit(f)
            | Command::Bound(f) => f,
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Root seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    /// Maximum number of worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Channel uses (learn).
    #[arg(long)]
    pub n: Option<u64>,
    /// Comma-separated channel-use counts (mse_sweep).
    #[arg(long, value_delimiter = ',')]
    pub n_values: Option<Vec<u64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub k_values: Option<Vec<usize>>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub trace_fisher: Option<f64>,
    /// Channel dimension (also sets a Haar channel for learn/mse_sweep).
    #[arg(long)]
    pub d_channel: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub d_channel_values: Option<Vec<usize>>,
    /// Channel rank (also sets a Haar channel for learn/mse_sweep).
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub r_values: Option<Vec<usize>>,
    /// Probe dimension (bound).
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ancilla_values: Option<Vec<usize>>,
    #[arg(long)]
    pub protocols: Option<usize>,
    /// `uniform`, `dirichlet` or comma-separated weights.
    #[arg(long)]
    pub theta: Option<String>,
    /// Seed of the channel's random parts.
    #[arg(long)]
    pub channel_seed: Option<u64>,
    /// `categorical_from_K` or `full_born`.
    #[arg(long)]
    pub sampling_path: Option<SamplingPath>,
    /// Also report the Euclidean projection onto the simplex.
    #[arg(long)]
    pub project_to_simplex: bool,
    #[arg(long)]
    pub pseudo_inverse_cutoff: Option<f64>,
    #[arg(long)]
    pub rank_cap: Option<usize>,
}

fn parse_theta(text: &str) -> Result<ThetaSpec> {
    match text {
        "uniform" | "dirichlet" => Ok(ThetaSpec::Named(text.into())),
        _ => text
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(ThetaSpec::Values)
            .map_err(|e| Error::InvalidArgument(format!("--theta: {e}"))),
    }
}

/// Loads `--config` (if any) and applies flag overrides.
pub fn build_config(kind: ExperimentKind, flags: &Flags) -> Result<ExperimentConfig> {
    let mut c = match &flags.config {
        Some(path) => {
            let c = ExperimentConfig::load(path)?;
            if c.kind != kind {
                return Err(Error::InvalidArgument(format!(
                    "config file is for `{}` but the subcommand is `{kind}`",
                    c.kind
                )));
            }
            c
        }
        None => ExperimentConfig::new(kind),
    };
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = &flags.$field { c.$field = Some(v.clone()); } )* };
    }
    set!(
        n,
        n_values,
        trials,
        k,
        k_values,
        epsilon,
        trace_fisher,
        d_channel_values,
        r_values,
        d,
        ancilla_values,
        protocols,
        sampling_path,
        pseudo_inverse_cutoff,
        rank_cap
    );
    if let Some(seed) = flags.seed {
        c.root_seed = seed;
    }
    if let Some(out) = &flags.out {
        c.output_path = out.clone();
    }
    if flags.project_to_simplex {
        c.project_to_simplex = Some(true);
    }
    if matches!(kind, ExperimentKind::Learn | ExperimentKind::MseSweep) {
        let touches_channel =
            flags.d_channel.is_some() || flags.r.is_some() || flags.theta.is_some() || flags.channel_seed.is_some();
        if touches_channel {
            let spec = c.channel.get_or_insert_with(|| ChannelSpec {
                unitaries: Some(UnitariesSpec::Named("haar".into())),
                ..ChannelSpec::default()
            });
            if flags.d_channel.is_some() {
                spec.d_channel = flags.d_channel;
            }
            if flags.r.is_some() {
                spec.r = flags.r;
            }
            if let Some(t) = &flags.theta {
                spec.theta = Some(parse_theta(t)?);
            }
            if flags.channel_seed.is_some() {
                spec.seed = flags.channel_seed;
            }
        }
    } else {
        set!(d_channel, r);
    }
    Ok(c)
}

/// Entry point of the `muclab` binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let kind = cli.command.kind();
    let flags = cli.command.flags();
    let outcome = build_config(kind, flags).and_then(|c| run_with_threads(&c, flags.threads));
    match outcome {
        Ok(out) => {
            if let Some(csv) = &out.csv_path {
                println!("records: {}", csv.display());
            }
            println!("summary: {}", out.summary_path.display());
            ExitCode::SUCCESS
        }
        Err(Error::InvalidConfig(problems)) => {
            eprintln!("invalid config:");
            for p in problems {
                eprintln!("  {p}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
