//! Experiment configuration and its JSON schema.
//!
//! A config file is a JSON object:
//!
//! ```json
//! {
//!   "kind": "mse_sweep",
//!   "root_seed": 0,
//!   "output_path": "out",
//!   "channel": { "d_channel": 8, "r": 64, "unitaries": "haar", "theta": "uniform", "seed": 7 },
//!   "n_values": [1000, 10000, 100000],
//!   "trials": 100
//! }
//! ```
//!
//! `channel.unitaries` is either `"haar"` (then `r` is required) or an
//! explicit list of `d_channel × d_channel` matrices given as nested
//! `[re, im]` pairs. `channel.theta` is a list of weights, `"uniform"` or
//! `"dirichlet"`; it may only be omitted for Haar channels, where it
//! defaults to uniform. `channel.seed` defaults to a child of `root_seed`.
//!
//! Kind-specific fields:
//!
//! | kind            | required                           | optional (default)                                      |
//! |-----------------|------------------------------------|---------------------------------------------------------|
//! | `learn`         | `channel`, `n`                     | `sampling_path`, `project_to_simplex`, `pseudo_inverse_cutoff` |
//! | `mse_sweep`     | `channel`, `n_values`, `trials`    | same as `learn`                                         |
//! | `concentration` | `d_channel`, `r`, `trials`         |                                                         |
//! | `fisher_audit`  |                                    | `protocols` (100), `d_channel_values` ([2,4,8]), `r_values` (2..=16), `ancilla_values` ([1,2]) |
//! | `concat_audit`  |                                    | `protocols` (50), `k_values` ([2,3]), `r_values` ([2,3]), `d_channel_values` ([2,4]), `ancilla_values` ([1]) |
//! | `bound`         | `r`, `d`, `epsilon`                | `k` (1), `trace_fisher`                                 |

use serde::{Deserialize, Serialize};

use crate::channel::{effective_rank, rank_cap_from_env, MixedUnitaryChannel, ProbabilityVector};
use crate::error::{Error, Result};
use crate::estimator::{EstimatorOptions, SamplingPath};
use crate::linalg::{matrix_from_pairs, UnitaryMatrix};
use crate::record::ExperimentKind;
use crate::seed::{derive_seed, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitariesSpec {
    Named(String),
    Explicit(Vec<Vec<Vec<[f64; 2]>>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Named(String),
    Values(Vec<f64>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub d_channel: Option<usize>,
    pub r: Option<usize>,
    pub unitaries: Option<UnitariesSpec>,
    pub theta: Option<ThetaSpec>,
    pub seed: Option<u64>,
}

impl ChannelSpec {
    pub fn haar(d_channel: usize, r: usize) -> Self {
        Self {
            d_channel: Some(d_channel),
            r: Some(r),
            unitaries: Some(UnitariesSpec::Named("haar".into())),
            theta: None,
            seed: None,
        }
    }

    fn is_haar(&self) -> bool {
        matches!(&self.unitaries, None | Some(UnitariesSpec::Named(_)))
    }

    fn rank(&self) -> Option<usize> {
        match &self.unitaries {
            Some(UnitariesSpec::Explicit(list)) => Some(list.len()),
            _ => self.r,
        }
    }

    pub fn problems(&self, out: &mut Vec<Problem>) {
        let d = match self.d_channel {
            Some(0) => {
                out.push(Problem::new("channel.d_channel", "must be at least 1"));
                None
            }
            None => {
                out.push(Problem::new("channel.d_channel", "missing"));
                None
            }
            d => d,
        };
        match &self.unitaries {
            None => out.push(Problem::new("channel.unitaries", "missing (\"haar\" or explicit matrices)")),
            Some(UnitariesSpec::Named(name)) if name != "haar" => {
                out.push(Problem::new("channel.unitaries", format!("unknown generator `{name}`; expected \"haar\"")))
            }
            Some(UnitariesSpec::Named(_)) => match self.r {
                None => out.push(Problem::new("channel.r", "required for Haar channels")),
                Some(0) => out.push(Problem::new("channel.r", "must be at least 1")),
                Some(_) => {}
            },
            Some(UnitariesSpec::Explicit(list)) => {
                if list.is_empty() {
                    out.push(Problem::new("channel.unitaries", "empty list"));
                }
                for (i, m) in list.iter().enumerate() {
                    let field = format!("channel.unitaries[{i}]");
                    match matrix_from_pairs(m) {
                        Err(e) => out.push(Problem::new(field, e.to_string())),
                        Ok(m) if Some(m.nrows()) != d || Some(m.ncols()) != d => out.push(Problem::new(
                            field,
                            format!("shape {}x{} does not match d_channel", m.nrows(), m.ncols()),
                        )),
                        Ok(m) => {
                            if let Err(e) = UnitaryMatrix::new(m) {
                                out.push(Problem::new(field, e.to_string()));
                            }
                        }
                    }
                }
                if let Some(r) = self.r {
                    if r != list.len() {
                        out.push(Problem::new(
                            "channel.r",
                            format!("{r} disagrees with {} explicit unitaries", list.len()),
                        ));
                    }
                }
            }
        }
        match &self.theta {
            None if !self.is_haar() => {
                out.push(Problem::new("theta", "missing; required unless unitaries are \"haar\""))
            }
            None => {}
            Some(ThetaSpec::Named(name)) if name != "uniform" && name != "dirichlet" => out.push(Problem::new(
                "theta",
                format!("unknown generator `{name}`; expected \"uniform\", \"dirichlet\" or a list"),
            )),
            Some(ThetaSpec::Named(_)) => {}
            Some(ThetaSpec::Values(values)) => {
                if let Some(r) = self.rank() {
                    if values.len() != r {
                        out.push(Problem::new("theta", format!("has {} entries, channel rank is {r}", values.len())));
                    }
                }
                if let Err(e) = ProbabilityVector::new(values.clone()) {
                    out.push(Problem::new("theta", e.to_string()));
                }
            }
        }
    }

    /// Builds the channel; random parts draw from `seed` or a child of `root_seed`.
    pub fn build(&self, root_seed: u64) -> Result<MixedUnitaryChannel> {
        let mut problems = Vec::new();
        self.problems(&mut problems);
        if !problems.is_empty() {
            return Err(Error::InvalidConfig(problems));
        }
        let seed = self.seed.unwrap_or_else(|| derive_seed(root_seed, "channel", &[]));
        let mut rng = stream(seed);
        let d = self.d_channel.expect("validated");
        let unitaries = match &self.unitaries {
            Some(UnitariesSpec::Explicit(list)) => {
                list.iter().map(|m| UnitaryMatrix::new(matrix_from_pairs(m)?)).collect::<Result<Vec<_>>>()?
            }
            _ => (0..self.r.expect("validated"))
                .map(|_| crate::linalg::haar_unitary(d, &mut rng))
                .collect::<Result<Vec<_>>>()?,
        };
        let r = unitaries.len();
        let theta = match &self.theta {
            None => ProbabilityVector::uniform(r)?,
            Some(ThetaSpec::Named(n)) if n == "uniform" => ProbabilityVector::uniform(r)?,
            Some(ThetaSpec::Named(_)) => ProbabilityVector::dirichlet(r, &mut rng)?,
            Some(ThetaSpec::Values(v)) => ProbabilityVector::new(v.clone())?,
        };
        MixedUnitaryChannel::new(unitaries, theta)
    }
}

/// A single validation finding, naming the offending field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub field: String,
    pub message: String,
}

impl Problem {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub root_seed: u64,
    #[serde(default = "default_output_path")]
    pub output_path: String,
    #[serde(default)]
    pub channel: Option<ChannelSpec>,
    #[serde(default)]
    pub n: Option<u64>,
    #[serde(default)]
    pub n_values: Option<Vec<u64>>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub k_values: Option<Vec<usize>>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub trace_fisher: Option<f64>,
    #[serde(default)]
    pub d_channel: Option<usize>,
    #[serde(default)]
    pub d_channel_values: Option<Vec<usize>>,
    #[serde(default)]
    pub r: Option<usize>,
    #[serde(default)]
    pub r_values: Option<Vec<usize>>,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub ancilla_values: Option<Vec<usize>>,
    #[serde(default)]
    pub protocols: Option<usize>,
    #[serde(default)]
    pub sampling_path: Option<SamplingPath>,
    #[serde(default)]
    pub project_to_simplex: Option<bool>,
    #[serde(default)]
    pub pseudo_inverse_cutoff: Option<f64>,
    /// Overrides `MUCLAB_RANK_CAP` and the built-in default.
    #[serde(default)]
    pub rank_cap: Option<usize>,
}

fn default_output_path() -> String {
    "out".into()
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            root_seed: 0,
            output_path: default_output_path(),
            channel: None,
            n: None,
            n_values: None,
            trials: None,
            k: None,
            k_values: None,
            epsilon: None,
            trace_fisher: None,
            d_channel: None,
            d_channel_values: None,
            r: None,
            r_values: None,
            d: None,
            ancilla_values: None,
            protocols: None,
            sampling_path: None,
            project_to_simplex: None,
            pseudo_inverse_cutoff: None,
            rank_cap: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn rank_cap(&self) -> usize {
        self.rank_cap.unwrap_or_else(rank_cap_from_env)
    }

    pub fn estimator_options(&self) -> EstimatorOptions {
        let defaults = EstimatorOptions::default();
        EstimatorOptions {
            pseudo_inverse_cutoff: self.pseudo_inverse_cutoff.unwrap_or(defaults.pseudo_inverse_cutoff),
            project_to_simplex: self.project_to_simplex.unwrap_or(defaults.project_to_simplex),
            sampling_path: self.sampling_path.unwrap_or(defaults.sampling_path),
        }
    }

    pub fn protocols_or_default(&self) -> usize {
        self.protocols.unwrap_or(match self.kind {
            ExperimentKind::ConcatAudit => 50,
            _ => 100,
        })
    }

    pub fn d_channel_values_or_default(&self) -> Vec<usize> {
        self.d_channel_values.clone().unwrap_or_else(|| match self.kind {
            ExperimentKind::ConcatAudit => vec![2, 4],
            _ => vec![2, 4, 8],
        })
    }

    pub fn r_values_or_default(&self) -> Vec<usize> {
        self.r_values.clone().unwrap_or_else(|| match self.kind {
            ExperimentKind::ConcatAudit => vec![2, 3],
            _ => (2..=16).collect(),
        })
    }

    pub fn k_values_or_default(&self) -> Vec<usize> {
        self.k_values.clone().unwrap_or_else(|| vec![2, 3])
    }

    pub fn ancilla_values_or_default(&self) -> Vec<usize> {
        self.ancilla_values.clone().unwrap_or_else(|| match self.kind {
            ExperimentKind::ConcatAudit => vec![1],
            _ => vec![1, 2],
        })
    }
}

fn require_positive_list(out: &mut Vec<Problem>, field: &str, values: &[usize]) {
    if values.is_empty() {
        out.push(Problem::new(field, "must not be empty"));
    } else if values.contains(&0) {
        out.push(Problem::new(field, "entries must be at least 1"));
    }
}

/// Empty iff the config is runnable. Never panics.
pub fn validate(config: &ExperimentConfig) -> Vec<Problem> {
    let mut out = Vec::new();
    let positive_trials = |out: &mut Vec<Problem>| match config.trials {
        None => out.push(Problem::new("trials", "missing")),
        Some(0) => out.push(Problem::new("trials", "must be at least 1")),
        Some(_) => {}
    };
    let channel = |out: &mut Vec<Problem>| match &config.channel {
        None => out.push(Problem::new("channel", "missing")),
        Some(spec) => spec.problems(out),
    };
    if let Some(c) = config.pseudo_inverse_cutoff {
        if c.is_nan() || c <= 0.0 {
            out.push(Problem::new("pseudo_inverse_cutoff", "must be positive"));
        }
    }
    if config.output_path.is_empty() {
        out.push(Problem::new("output_path", "must not be empty"));
    }

    match config.kind {
        ExperimentKind::Learn => {
            channel(&mut out);
            match config.n {
                None => out.push(Problem::new("n", "missing")),
                Some(0) => out.push(Problem::new("n", "must be at least 1")),
                Some(_) => {}
            }
        }
        ExperimentKind::MseSweep => {
            channel(&mut out);
            positive_trials(&mut out);
            match &config.n_values {
                None => out.push(Problem::new("n_values", "missing")),
                Some(v) if v.is_empty() => out.push(Problem::new("n_values", "must not be empty")),
                Some(v) if v.contains(&0) => out.push(Problem::new("n_values", "entries must be at least 1")),
                Some(_) => {}
            }
        }
        ExperimentKind::Concentration => {
            positive_trials(&mut out);
            match (config.d_channel, config.r) {
                (None, _) => out.push(Problem::new("d_channel", "missing")),
                (Some(0), _) => out.push(Problem::new("d_channel", "must be at least 1")),
                (_, None) => out.push(Problem::new("r", "missing")),
                (_, Some(0)) => out.push(Problem::new("r", "must be at least 1")),
                (Some(d), Some(r)) if r > d * d => out.push(Problem::new(
                    "r",
                    format!(
                        "r = {r} exceeds d_channel² = {}; the PGM concentration regime requires r ≤ d_channel²",
                        d * d
                    ),
                )),
                _ => {}
            }
        }
        ExperimentKind::FisherAudit | ExperimentKind::ConcatAudit => {
            if config.protocols == Some(0) {
                out.push(Problem::new("protocols", "must be at least 1"));
            }
            require_positive_list(&mut out, "d_channel_values", &config.d_channel_values_or_default());
            require_positive_list(&mut out, "r_values", &config.r_values_or_default());
            require_positive_list(&mut out, "ancilla_values", &config.ancilla_values_or_default());
            if config.kind == ExperimentKind::ConcatAudit {
                let ks = config.k_values_or_default();
                require_positive_list(&mut out, "k_values", &ks);
                let r_max = config.r_values_or_default().into_iter().max().unwrap_or(0);
                let k_max = ks.into_iter().max().unwrap_or(0);
                let cap = config.rank_cap();
                match effective_rank(r_max, k_max) {
                    Some(rank) if rank <= cap as u128 => {}
                    rank => out.push(Problem::new(
                        "k_values",
                        format!(
                            "effective rank r^k = {} exceeds the rank cap {cap} (set rank_cap or MUCLAB_RANK_CAP)",
                            rank.map_or("overflow".to_string(), |x| x.to_string())
                        ),
                    )),
                }
            }
        }
        ExperimentKind::Bound => {
            for (field, value) in [("r", config.r), ("d", config.d)] {
                match value {
                    None => out.push(Problem::new(field, "missing")),
                    Some(0) => out.push(Problem::new(field, "must be at least 1")),
                    Some(_) => {}
                }
            }
            if config.k == Some(0) {
                out.push(Problem::new("k", "must be at least 1"));
            }
            match config.epsilon {
                None => out.push(Problem::new("epsilon", "missing")),
                Some(e) if !e.is_finite() || e <= 0.0 => out.push(Problem::new("epsilon", "must be positive")),
                Some(_) => {}
            }
            if let Some(t) = config.trace_fisher {
                if !t.is_finite() || t < 0.0 {
                    out.push(Problem::new("trace_fisher", "must be finite and non-negative"));
                }
            }
        }
    }
    out
}
