//! PGM-based linear estimator for the weights of a mixed unitary channel,
//! and the Monte Carlo loops around it.
//!
//! The probe is the maximally entangled state, the measurement is the PGM of
//! the unitary orbit, and the estimate is `θ̃ = K⁺ p̂`. Since every shot is
//! an i.i.d. draw from `p = Kθ`, the default sampling path computes `K` once
//! and draws categorically; the full Born path instead evolves the probe
//! through `Λ ⊗ id` and measures the resulting density operator.

use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{MixedUnitaryChannel, ProbabilityVector};
use crate::error::{Error, Result};
use crate::linalg::{max_entangled_state, RealMatrix};
use crate::povm::{overlap_matrix, pgm, unitary_orbit_ensemble, CategoricalSampler, OverlapMatrix, Povm};
use crate::record::{ExperimentKind, ExperimentRecord};
use crate::seed::{derive_seed, stream};

/// Condition number of `K` above which a warning is attached.
pub const ILL_CONDITIONED: f64 = 1e8;
/// K-rows with norm at or below this are dropped before inversion.
pub const ZERO_ROW_TOL: f64 = 1e-12;
/// Diagonal threshold for the concentration experiment.
pub const KII_THRESHOLD: f64 = 0.7;
/// `0.7 − (1 − 0.7)`: the eigenvalue floor implied by diagonal dominance.
pub const GERSCHGORIN_FLOOR: f64 = 0.4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingPath {
    #[default]
    #[serde(rename = "categorical_from_K", alias = "categorical_from_k", alias = "categorical")]
    CategoricalFromK,
    #[serde(rename = "full_born", alias = "born")]
    FullBorn,
}

impl std::str::FromStr for SamplingPath {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "categorical_from_K" | "categorical_from_k" | "categorical" => Ok(Self::CategoricalFromK),
            "full_born" | "born" => Ok(Self::FullBorn),
            other => Err(format!("unknown sampling path `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorOptions {
    /// Singular values at or below `cutoff · σ_max` are discarded by `K⁺`.
    pub pseudo_inverse_cutoff: f64,
    pub project_to_simplex: bool,
    pub sampling_path: SamplingPath,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self { pseudo_inverse_cutoff: 1e-10, project_to_simplex: false, sampling_path: SamplingPath::CategoricalFromK }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EstimatorWarning {
    IllConditioned { condition_number: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub theta_hat: Vec<f64>,
    /// Euclidean projection of `theta_hat` onto the simplex, when requested.
    pub theta_projected: Option<Vec<f64>>,
    /// Counts over every POVM outcome, completion last; sums to `n`.
    pub counts: Vec<u64>,
    pub n: u64,
    pub seed: Option<u64>,
    pub squared_error: Option<f64>,
    pub warnings: Vec<EstimatorWarning>,
}

/// Moore–Penrose pseudo-inverse with a relative singular-value cutoff.
/// Also returns `σ_max / σ_min` over all singular values.
pub fn pseudo_inverse(m: &RealMatrix, cutoff: f64) -> (RealMatrix, f64) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    let mut pinv = RealMatrix::zeros(m.ncols(), m.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff * sigma_max && s > 0.0 {
            pinv += (v_t.row(i).transpose() * u.column(i).transpose()).unscale(s);
        }
    }
    let cond = if sigma_min > 0.0 { sigma_max / sigma_min } else { f64::INFINITY };
    (pinv, cond)
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        cumulative += x;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if x - candidate > 0.0 {
            tau = candidate;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Precomputed PGM protocol for one channel; estimates are cheap to repeat.
#[derive(Clone, Debug)]
pub struct PgmEstimator {
    channel: MixedUnitaryChannel,
    options: EstimatorOptions,
    povm: Povm,
    overlap: OverlapMatrix,
    kept_rows: Vec<usize>,
    pinv: RealMatrix,
    condition_number: f64,
    sampler: CategoricalSampler,
}

impl PgmEstimator {
    pub fn new(channel: &MixedUnitaryChannel, options: EstimatorOptions) -> Result<Self> {
        if options.pseudo_inverse_cutoff.is_nan() || options.pseudo_inverse_cutoff <= 0.0 {
            return Err(Error::InvalidArgument("pseudo_inverse_cutoff must be positive".into()));
        }
        let ensemble = unitary_orbit_ensemble(channel)?;
        let povm = pgm(&ensemble)?;
        let overlap = overlap_matrix(&povm, &ensemble)?;
        let (kept, kept_rows) = overlap.drop_zero_rows(ZERO_ROW_TOL);
        let (pinv, condition_number) = pseudo_inverse(kept.matrix(), options.pseudo_inverse_cutoff);

        let sampler = match options.sampling_path {
            SamplingPath::CategoricalFromK => {
                CategoricalSampler::new(crate::fisher::outcome_distribution(&overlap, channel.theta())?)?
            }
            SamplingPath::FullBorn => {
                let probe = max_entangled_state(channel.d_channel())?.density();
                let output = channel.apply_with_ancilla(&probe)?;
                CategoricalSampler::born(&output, &povm)?
            }
        };
        Ok(Self { channel: channel.clone(), options, povm, overlap, kept_rows, pinv, condition_number, sampler })
    }

    pub fn channel(&self) -> &MixedUnitaryChannel {
        &self.channel
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    /// Full overlap matrix including the completion row.
    pub fn overlap(&self) -> &OverlapMatrix {
        &self.overlap
    }

    pub fn kept_rows(&self) -> &[usize] {
        &self.kept_rows
    }

    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    /// Outcome distribution shots are drawn from (all outcomes).
    pub fn shot_distribution(&self) -> &[f64] {
        self.sampler.probabilities()
    }

    /// `θ̃ = K⁺ p̂` from outcome counts over all POVM outcomes.
    pub fn estimate_from_counts(&self, counts: &[u64]) -> Vec<f64> {
        let n: u64 = counts.iter().sum();
        if self.channel.rank() == 1 {
            // The simplex of a rank-one channel is a single point.
            return vec![1.0];
        }
        let p_hat =
            DVector::from_iterator(self.kept_rows.len(), self.kept_rows.iter().map(|&i| counts[i] as f64 / n as f64));
        (&self.pinv * p_hat).iter().cloned().collect()
    }

    pub fn estimate<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> Result<EstimateResult> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        let counts = self.sampler.counts(n, rng);
        let theta_hat = self.estimate_from_counts(&counts);
        let truth = self.channel.theta().as_slice();
        let squared_error = theta_hat.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
        let theta_projected = self.options.project_to_simplex.then(|| project_to_simplex(&theta_hat));
        let mut warnings = Vec::new();
        if self.condition_number > ILL_CONDITIONED {
            warnings.push(EstimatorWarning::IllConditioned { condition_number: self.condition_number });
        }
        Ok(EstimateResult {
            theta_hat,
            theta_projected,
            counts,
            n,
            seed: None,
            squared_error: Some(squared_error),
            warnings,
        })
    }

    pub fn estimate_seeded(&self, n: u64, seed: u64) -> Result<EstimateResult> {
        let mut rng = stream(seed);
        let mut result = self.estimate(n, &mut rng)?;
        result.seed = Some(seed);
        Ok(result)
    }
}

/// One full run of the PGM estimator with `n` channel uses.
pub fn run_pgm_estimator<R: Rng + ?Sized>(
    channel: &MixedUnitaryChannel,
    n: u64,
    options: EstimatorOptions,
    rng: &mut R,
) -> Result<EstimateResult> {
    PgmEstimator::new(channel, options)?.estimate(n, rng)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MsePoint {
    pub n: u64,
    pub trials: usize,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseCurve {
    pub records: Vec<ExperimentRecord>,
    pub points: Vec<MsePoint>,
    pub condition_number: f64,
}

impl MseCurve {
    /// Least-squares slope of `ln(mean MSE)` against `ln N`.
    pub fn loglog_slope(&self) -> Option<f64> {
        fit_loglog_slope(&self.points.iter().map(|p| (p.n as f64, p.mean)).collect::<Vec<_>>())
    }
}

pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Seed of trial `trial` at sweep point `n_index`.
pub fn mse_trial_seed(root_seed: u64, n_index: usize, trial: usize) -> u64 {
    derive_seed(root_seed, "mse_sweep", &[trial as u64, n_index as u64])
}

/// Squared error of `trials` independent estimates at each `N`.
pub fn mse_curve(
    channel: &MixedUnitaryChannel,
    n_values: &[u64],
    trials: usize,
    options: EstimatorOptions,
    root_seed: u64,
) -> Result<MseCurve> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let estimator = PgmEstimator::new(channel, options)?;
    let jobs: Vec<(usize, u64, usize)> =
        n_values.iter().enumerate().flat_map(|(ni, &n)| (0..trials).map(move |t| (ni, n, t))).collect();
    let records = jobs
        .par_iter()
        .map(|&(ni, n, trial)| {
            let started = Instant::now();
            let seed = mse_trial_seed(root_seed, ni, trial);
            let result = estimator.estimate_seeded(n, seed)?;
            Ok(ExperimentRecord {
                kind: ExperimentKind::MseSweep,
                seed,
                d_channel: channel.d_channel(),
                r: channel.rank(),
                k: 1,
                n,
                trial,
                metric: "sq_error".into(),
                value: result.squared_error.expect("true theta is known"),
                wall_time: started.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let points = n_values
        .iter()
        .map(|&n| {
            let errors: Vec<f64> = records.iter().filter(|r| r.n == n).map(|r| r.value).collect();
            let (mean, stderr) = mean_stderr(&errors);
            MsePoint { n, trials: errors.len(), mean, stderr }
        })
        .collect();
    Ok(MseCurve { records, points, condition_number: estimator.condition_number() })
}

/// `min_i (K_ii − Σ_{j≠i} |K_ij|)`, a lower bound on every eigenvalue of a
/// symmetric `K`.
pub fn gerschgorin_min(k: &RealMatrix) -> f64 {
    (0..k.nrows())
        .map(|i| {
            let off: f64 = (0..k.ncols()).filter(|&j| j != i).map(|j| k[(i, j)].abs()).sum();
            k[(i, i)] - off
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationTrial {
    pub trial: usize,
    pub seed: u64,
    pub min_kii: f64,
    pub mean_kii: f64,
    pub lambda_min_k: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSummary {
    pub d_channel: usize,
    pub r: usize,
    pub trials: Vec<ConcentrationTrial>,
    /// Fraction of trials with `min_i K_ii ≥ 0.7`.
    pub fraction_min_above_threshold: f64,
    pub mean_of_mean_kii: f64,
    pub stderr_of_mean_kii: f64,
    /// Trials with `min_i K_ii ≥ 0.7` but `λ_min(K) < 0.4 − 1e-8`.
    pub gerschgorin_exceptions: usize,
}

pub fn concentration_trial_seed(root_seed: u64, trial: usize) -> u64 {
    derive_seed(root_seed, "concentration", &[trial as u64])
}

/// Haar ensembles of `r` unitaries on `C^{d_channel}`: diagonal of the PGM
/// overlap matrix and its smallest eigenvalue, per trial.
pub fn min_diagonal_experiment(
    d_channel: usize,
    r: usize,
    trials: usize,
    root_seed: u64,
) -> Result<ConcentrationSummary> {
    if r == 0 || d_channel == 0 || trials == 0 {
        return Err(Error::InvalidArgument("d_channel, r and trials must be positive".into()));
    }
    if r > d_channel * d_channel {
        return Err(Error::InvalidArgument(format!(
            "r = {r} exceeds d_channel² = {}; the PGM concentration regime needs r ≤ d_channel²",
            d_channel * d_channel
        )));
    }
    let rows = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = concentration_trial_seed(root_seed, trial);
            let mut rng = stream(seed);
            let channel = MixedUnitaryChannel::haar(d_channel, ProbabilityVector::uniform(r)?, &mut rng)?;
            let ensemble = unitary_orbit_ensemble(&channel)?;
            let k = overlap_matrix(&pgm(&ensemble)?, &ensemble)?;
            let (block, _) = k.drop_zero_rows(ZERO_ROW_TOL);
            let diag = block.diagonal();
            Ok(ConcentrationTrial {
                trial,
                seed,
                min_kii: diag.iter().cloned().fold(f64::INFINITY, f64::min),
                mean_kii: diag.iter().sum::<f64>() / diag.len() as f64,
                lambda_min_k: block.lambda_min(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let above = rows.iter().filter(|t| t.min_kii >= KII_THRESHOLD).count();
    let exceptions =
        rows.iter().filter(|t| t.min_kii >= KII_THRESHOLD && t.lambda_min_k < GERSCHGORIN_FLOOR - 1e-8).count();
    let means: Vec<f64> = rows.iter().map(|t| t.mean_kii).collect();
    let (mean_of_mean_kii, stderr_of_mean_kii) = mean_stderr(&means);
    Ok(ConcentrationSummary {
        d_channel,
        r,
        fraction_min_above_threshold: above as f64 / rows.len() as f64,
        mean_of_mean_kii,
        stderr_of_mean_kii,
        gerschgorin_exceptions: exceptions,
        trials: rows,
    })
}
