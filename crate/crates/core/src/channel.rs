//! Mixed unitary channels `Λ(ρ) = Σ_a θ_a U_a ρ U_a†`.
//!
//! Multi-indices `(a_1, …, a_k)` of the k-fold concatenated channel are
//! flattened as `Σ_i a_i · r^{k−i}`, i.e. `a_1` is the most significant digit.
//! The same order is used by [`ProbabilityVector::tensor_power`] and by the
//! Jacobian in [`crate::fisher`].

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::linalg::{extend_with_identity, DensityOperator, UnitaryMatrix};

pub const DEFAULT_RANK_CAP: usize = 4096;
pub const RANK_CAP_ENV: &str = "MUCLAB_RANK_CAP";

/// Sum-to-one tolerance for probability vectors.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Rank cap from `MUCLAB_RANK_CAP`, falling back to [`DEFAULT_RANK_CAP`].
pub fn rank_cap_from_env() -> usize {
    std::env::var(RANK_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_RANK_CAP)
}

/// `r^k`, or `None` on overflow.
pub fn effective_rank(r: usize, k: usize) -> Option<u128> {
    (r as u128).checked_pow(u32::try_from(k).ok()?)
}

pub fn check_rank_cap(r: usize, k: usize, cap: usize) -> Result<usize> {
    match effective_rank(r, k) {
        Some(rank) if rank <= cap as u128 => Ok(rank as usize),
        Some(rank) => Err(Error::RankCapExceeded { rank, cap }),
        None => Err(Error::RankCapExceeded { rank: u128::MAX, cap }),
    }
}

/// Decodes a flat index into its `k` digits, most significant first.
pub fn flat_to_tuple(mut index: usize, r: usize, k: usize) -> Vec<usize> {
    let mut digits = vec![0; k];
    for slot in digits.iter_mut().rev() {
        *slot = index % r;
        index /= r;
    }
    digits
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidProbability { reason: "empty".into() });
        }
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidProbability { reason: format!("entry {i} is {w}") });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidProbability { reason: format!("entries sum to {total}") });
        }
        Ok(Self(weights))
    }

    pub fn uniform(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidDimension { what: "probability vector", value: 0 });
        }
        Ok(Self(vec![1.0 / r as f64; r]))
    }

    /// Draw from Dirichlet(1, …, 1), i.e. uniformly on the simplex.
    pub fn dirichlet<R: Rng + ?Sized>(r: usize, rng: &mut R) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidDimension { what: "probability vector", value: 0 });
        }
        let draws: Vec<f64> = (0..r).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = draws.iter().sum();
        Ok(Self(draws.into_iter().map(|x| x / total).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&w| w > 0.0)
    }

    /// `θ^{⊗k}` in flat-index order.
    pub fn tensor_power(&self, k: usize) -> Vec<f64> {
        let mut out = vec![1.0];
        for _ in 0..k {
            out = out.iter().flat_map(|&head| self.0.iter().map(move |&w| head * w)).collect();
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct MixedUnitaryChannel {
    d_channel: usize,
    unitaries: Vec<UnitaryMatrix>,
    theta: ProbabilityVector,
}

impl MixedUnitaryChannel {
    pub fn new(unitaries: Vec<UnitaryMatrix>, theta: ProbabilityVector) -> Result<Self> {
        let first = unitaries.first().ok_or(Error::InvalidDimension { what: "channel rank", value: 0 })?;
        let d_channel = first.dim();
        if let Some(u) = unitaries.iter().find(|u| u.dim() != d_channel) {
            return Err(Error::DimensionMismatch { context: "channel unitaries", expected: d_channel, found: u.dim() });
        }
        if theta.len() != unitaries.len() {
            return Err(Error::DimensionMismatch {
                context: "channel theta",
                expected: unitaries.len(),
                found: theta.len(),
            });
        }
        Ok(Self { d_channel, unitaries, theta })
    }

    /// `r` i.i.d. Haar unitaries of size `d_channel`.
    pub fn haar<R: Rng + ?Sized>(d_channel: usize, theta: ProbabilityVector, rng: &mut R) -> Result<Self> {
        let unitaries =
            (0..theta.len()).map(|_| crate::linalg::haar_unitary(d_channel, rng)).collect::<Result<Vec<_>>>()?;
        Self::new(unitaries, theta)
    }

    pub fn d_channel(&self) -> usize {
        self.d_channel
    }

    pub fn rank(&self) -> usize {
        self.unitaries.len()
    }

    pub fn unitaries(&self) -> &[UnitaryMatrix] {
        &self.unitaries
    }

    pub fn theta(&self) -> &ProbabilityVector {
        &self.theta
    }

    /// Same unitaries, different weights.
    pub fn with_theta(&self, theta: ProbabilityVector) -> Result<Self> {
        Self::new(self.unitaries.clone(), theta)
    }

    /// `Σ_a θ_a U_a ρ U_a†`.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.d_channel {
            return Err(Error::DimensionMismatch {
                context: "channel apply",
                expected: self.d_channel,
                found: rho.dim(),
            });
        }
        self.apply_extended(rho, 1)
    }

    /// `Σ_a θ_a (U_a ⊗ I) ρ (U_a ⊗ I)†` with the channel on the first factor.
    pub fn apply_with_ancilla(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if !rho.dim().is_multiple_of(self.d_channel) {
            return Err(Error::DimensionMismatch {
                context: "channel apply_with_ancilla (total dim not divisible by d_channel)",
                expected: self.d_channel,
                found: rho.dim(),
            });
        }
        self.apply_extended(rho, rho.dim() / self.d_channel)
    }

    fn apply_extended(&self, rho: &DensityOperator, ancilla_dim: usize) -> Result<DensityOperator> {
        let dim = rho.dim();
        let mut out = crate::linalg::ComplexMatrix::zeros(dim, dim);
        for (u, &w) in self.unitaries.iter().zip(self.theta.as_slice()) {
            if w == 0.0 {
                continue;
            }
            let full = extend_with_identity(u.matrix(), ancilla_dim);
            out += (&full * rho.matrix() * full.adjoint()).scale(w);
        }
        Ok(DensityOperator::from_valid(out))
    }

    /// The effective rank-`r^k` channel of `k = intermediates.len()`
    /// concatenated uses, with `Ũ_{a_1…a_k} = V_k U_{a_k} ⋯ V_1 U_{a_1}` and
    /// weights `θ^{⊗k}`.
    pub fn concat_effective(&self, intermediates: &[UnitaryMatrix], rank_cap: usize) -> Result<Self> {
        let k = intermediates.len();
        if k == 0 {
            return Err(Error::InvalidArgument("concatenation depth k must be at least 1".into()));
        }
        if let Some(v) = intermediates.iter().find(|v| v.dim() != self.d_channel) {
            return Err(Error::DimensionMismatch {
                context: "intermediate unitaries",
                expected: self.d_channel,
                found: v.dim(),
            });
        }
        let rank = check_rank_cap(self.rank(), k, rank_cap)?;

        let mut composed = vec![UnitaryMatrix::identity(self.d_channel)];
        for v in intermediates {
            let applied: Vec<UnitaryMatrix> = self.unitaries.iter().map(|u| v.compose(u)).collect();
            composed = composed.iter().flat_map(|prefix| applied.iter().map(move |vu| vu.compose(prefix))).collect();
        }
        debug_assert_eq!(composed.len(), rank);

        let theta = ProbabilityVector(self.theta.tensor_power(k));
        Ok(Self { d_channel: self.d_channel, unitaries: composed, theta })
    }
}

/// `k` identity intermediates, the canonical baseline.
pub fn identity_intermediates(d_channel: usize, k: usize) -> Vec<UnitaryMatrix> {
    vec![UnitaryMatrix::identity(d_channel); k]
}
