//! Fisher information of IOMS protocols.
//!
//! A single round measures a fixed probe with a fixed POVM, so the outcome
//! law is `p = Kθ` and the full Fisher matrix is `K⊤ D(p)^{-1} K`. Because `θ`
//! lives on the simplex, the reported matrix is its compression to the
//! tangent space `{v : 1⊤v = 0}` by the orthogonal projector `I − 11⊤/r`.
//!
//! For a `k`-fold concatenated protocol the outcome law is `K̃ θ^{⊗k}` and the
//! chain rule gives `J⊤ Ĩ J`, with `J` the Jacobian of `θ ↦ θ^{⊗k}`.

use serde::{Deserialize, Serialize};

use crate::channel::{check_rank_cap, flat_to_tuple, MixedUnitaryChannel, ProbabilityVector};
use crate::error::{Error, Result};
use crate::linalg::{max_entangled_state, symmetric_eigenvalues, DensityOperator, RealMatrix, UnitaryMatrix};
use crate::povm::{orbit_ensemble, overlap_matrix, OverlapMatrix, Povm};

/// Outcomes with `p_i` below this are treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-14;
/// A zero-probability outcome is inert only if its K-row norm is below this.
pub const ZERO_ROW: f64 = 1e-12;
/// Symmetry tolerance for [`FisherMatrix`].
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Eigenvalue floor for [`FisherMatrix`].
pub const PSD_TOL: f64 = 1e-8;
/// `‖F·1‖` tolerance for [`FisherMatrix`].
pub const KERNEL_TOL: f64 = 1e-8;
/// Relative slack accepted by [`audit_trace_bound`].
pub const BOUND_RELATIVE_SLACK: f64 = 1e-6;

/// Symmetric PSD `r × r` matrix that annihilates the all-ones direction.
///
/// Tolerances scale with `max(1, ‖F‖_F)` so large-information matrices are
/// not rejected for rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct FisherMatrix(RealMatrix);

impl FisherMatrix {
    pub fn new(matrix: RealMatrix) -> Result<Self> {
        let r = matrix.nrows();
        if r == 0 || matrix.ncols() != r {
            return Err(Error::NotSquare { what: "Fisher matrix", rows: r, cols: matrix.ncols() });
        }
        let scale = matrix.norm().max(1.0);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidArgument(format!("Fisher matrix asymmetric by {asym:e}")));
        }
        let min_eigenvalue = symmetric_eigenvalues(&matrix)[0];
        if min_eigenvalue < -PSD_TOL * scale {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        let leak = (&matrix * RealMatrix::from_element(r, 1, 1.0)).norm();
        if leak > KERNEL_TOL * scale {
            return Err(Error::InvalidArgument(format!("Fisher matrix does not annihilate 1: ‖F·1‖ = {leak:e}")));
        }
        Ok(Self(matrix))
    }

    pub fn r(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn zeros(r: usize) -> Self {
        Self(RealMatrix::zeros(r, r))
    }
}

/// `p = Kθ`.
pub fn outcome_distribution(k: &OverlapMatrix, theta: &ProbabilityVector) -> Result<Vec<f64>> {
    if k.ncols() != theta.len() {
        return Err(Error::DimensionMismatch {
            context: "outcome distribution",
            expected: k.ncols(),
            found: theta.len(),
        });
    }
    let t = nalgebra::DVector::from_column_slice(theta.as_slice());
    Ok((k.matrix() * t).iter().cloned().collect())
}

/// Orthogonal projector onto `{v : 1⊤v = 0}`: `I − 11⊤/r`.
pub fn simplex_projector(r: usize) -> RealMatrix {
    let inv = 1.0 / r as f64;
    RealMatrix::from_fn(r, r, |i, j| if i == j { 1.0 - inv } else { -inv })
}

/// Projected single-shot Fisher matrix `P_s K⊤ D(p)^{-1} K P_s` at `θ`.
///
/// Outcomes with `p_i < 1e-14` are dropped when their K-row is numerically
/// zero; otherwise the information diverges and [`Error::SingularOutcome`]
/// is returned.
pub fn fisher_matrix(k: &OverlapMatrix, theta: &ProbabilityVector) -> Result<FisherMatrix> {
    let p = outcome_distribution(k, theta)?;
    let r = k.ncols();
    let mut full = RealMatrix::zeros(r, r);
    for (i, &pi) in p.iter().enumerate() {
        if pi < ZERO_PROBABILITY {
            let row_norm = k.row_norm(i);
            if row_norm < ZERO_ROW {
                continue;
            }
            return Err(Error::SingularOutcome { outcome: i, row_norm });
        }
        let row = k.matrix().row(i);
        full += (row.transpose() * row).unscale(pi);
    }
    let proj = simplex_projector(r);
    let projected = &proj * full * &proj;
    let symmetric = (&projected + projected.transpose()).scale(0.5);
    FisherMatrix::new(symmetric)
}

/// Jacobian of `θ ↦ θ^{⊗k}` in flat-index order (`r^k × r`).
#[derive(Clone, Debug, PartialEq)]
pub struct TensorJacobian {
    r: usize,
    k: usize,
    matrix: RealMatrix,
}

impl TensorJacobian {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    /// `‖J‖₂²`, the largest eigenvalue of `J⊤J`.
    pub fn spectral_norm_squared(&self) -> f64 {
        let gram = self.matrix.transpose() * &self.matrix;
        *symmetric_eigenvalues(&gram).last().expect("r >= 1")
    }
}

/// Closed form of `J⊤J` at the uniform point: `k r^{-k} (r I + (k−1) 11⊤)`.
///
/// At `θ = 1/r` the entry `J_ab` is `r^{1−k}` times the multiplicity of `b`
/// in the tuple `a`; summing products of multiplicities over all `r^k`
/// tuples gives the diagonal `k r^{1−k} + k(k−1) r^{−k}` and off-diagonal
/// `k(k−1) r^{−k}`.
pub fn uniform_jacobian_gram(r: usize, k: usize) -> RealMatrix {
    let (rf, kf) = (r as f64, k as f64);
    let scale = kf * rf.powi(-(k as i32));
    RealMatrix::from_fn(r, r, |i, j| scale * ((kf - 1.0) + if i == j { rf } else { 0.0 }))
}

/// `‖J‖₂²` at the uniform point: the all-ones eigenvalue of
/// [`uniform_jacobian_gram`], `k² r^{1−k}`.
pub fn uniform_jacobian_norm_squared(r: usize, k: usize) -> f64 {
    (k * k) as f64 * (r as f64).powi(1 - k as i32)
}

/// Entry `(a, b) = Σ_{i : a_i = b} Π_{j ≠ i} θ_{a_j}`.
pub fn tensor_jacobian(theta: &ProbabilityVector, k: usize, rank_cap: usize) -> Result<TensorJacobian> {
    if k == 0 {
        return Err(Error::InvalidArgument("concatenation depth k must be at least 1".into()));
    }
    let r = theta.len();
    let rows = check_rank_cap(r, k, rank_cap)?;
    let w = theta.as_slice();
    let mut matrix = RealMatrix::zeros(rows, r);
    for a in 0..rows {
        let tuple = flat_to_tuple(a, r, k);
        for (i, &b) in tuple.iter().enumerate() {
            let others: f64 = tuple.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &aj)| w[aj]).product();
            matrix[(a, b)] += others;
        }
    }
    Ok(TensorJacobian { r, k, matrix })
}

/// Fisher matrix of the `k`-fold concatenated protocol probed with the
/// maximally entangled state (`k = intermediates.len()`).
pub fn fisher_concat(
    channel: &MixedUnitaryChannel,
    intermediates: &[UnitaryMatrix],
    povm: &Povm,
    theta: &ProbabilityVector,
    rank_cap: usize,
) -> Result<FisherMatrix> {
    let probe = max_entangled_state(channel.d_channel())?.density();
    fisher_concat_with_probe(channel, intermediates, &probe, povm, theta, rank_cap)
}

/// As [`fisher_concat`] with an arbitrary probe on `C^{d_channel} ⊗ C^{m}`.
///
/// Returns `P_s J⊤ Ĩ(θ^{⊗k}) J P_s`. At the uniform point the outer projection
/// is exact (it changes nothing); elsewhere it restricts the chain-rule
/// product to the simplex tangent space.
pub fn fisher_concat_with_probe(
    channel: &MixedUnitaryChannel,
    intermediates: &[UnitaryMatrix],
    probe: &DensityOperator,
    povm: &Povm,
    theta: &ProbabilityVector,
    rank_cap: usize,
) -> Result<FisherMatrix> {
    concat_parts(channel, intermediates, probe, povm, theta, rank_cap)?.fisher()
}

/// The pieces of a concatenated Fisher computation.
#[derive(Clone, Debug)]
pub struct ConcatParts {
    pub effective: MixedUnitaryChannel,
    pub effective_overlap: OverlapMatrix,
    pub effective_fisher: FisherMatrix,
    pub jacobian: TensorJacobian,
}

impl ConcatParts {
    /// `P_s J⊤ Ĩ J P_s`, symmetrized.
    pub fn fisher(&self) -> Result<FisherMatrix> {
        let j = self.jacobian.matrix();
        let chained = j.transpose() * self.effective_fisher.matrix() * j;
        let proj = simplex_projector(self.jacobian.r());
        let projected = &proj * chained * &proj;
        FisherMatrix::new((&projected + projected.transpose()).scale(0.5))
    }
}

pub fn concat_parts(
    channel: &MixedUnitaryChannel,
    intermediates: &[UnitaryMatrix],
    probe: &DensityOperator,
    povm: &Povm,
    theta: &ProbabilityVector,
    rank_cap: usize,
) -> Result<ConcatParts> {
    let effective = channel.with_theta(theta.clone())?.concat_effective(intermediates, rank_cap)?;
    let ensemble = orbit_ensemble(&effective, probe)?;
    let effective_overlap = overlap_matrix(povm, &ensemble)?;
    let effective_fisher = fisher_matrix(&effective_overlap, effective.theta())?;
    let jacobian = tensor_jacobian(theta, intermediates.len(), rank_cap)?;
    Ok(ConcatParts { effective, effective_overlap, effective_fisher, jacobian })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub trace_fisher: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub slack: f64,
}

/// Checks `Tr F ≤ k² r d` (which is `r d` for `k = 1`).
pub fn audit_trace_bound(fisher: &FisherMatrix, r: usize, d: usize, k: usize) -> BoundReport {
    let bound = (k * k * r * d) as f64;
    let trace_fisher = fisher.trace();
    let slack = bound - trace_fisher;
    BoundReport { trace_fisher, bound, satisfied: slack >= -BOUND_RELATIVE_SLACK * bound, slack }
}

/// Reference-scale sample count for mean-squared error `ε²`.
///
/// With a Fisher trace this is `r² / (Tr I · ε²)`; otherwise the closed form
/// `r / (k d ε²)`. Both carry constant 1 and are scales, not certified
/// bounds.
pub fn van_trees_lower_bound(r: usize, d: usize, k: usize, epsilon: f64, trace_fisher: Option<f64>) -> Result<f64> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    let eps2 = epsilon * epsilon;
    match trace_fisher {
        Some(t) if t < 0.0 || !t.is_finite() => {
            Err(Error::InvalidArgument(format!("Fisher trace must be finite and non-negative, got {t}")))
        }
        Some(t) => Ok((r * r) as f64 / (t * eps2)),
        None => {
            if k == 0 || d == 0 {
                return Err(Error::InvalidArgument("k and d must be positive".into()));
            }
            Ok(r as f64 / ((k * d) as f64 * eps2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{identity_intermediates, DEFAULT_RANK_CAP};
    use crate::linalg::{pauli_x, UnitaryMatrix};
    use crate::povm::{pgm, unitary_orbit_ensemble};
    use approx::assert_abs_diff_eq;

    fn k_identity(r: usize) -> OverlapMatrix {
        OverlapMatrix::new(RealMatrix::identity(r, r)).unwrap()
    }

    #[test]
    fn outcome_distribution_examples() {
        let theta = ProbabilityVector::new(vec![0.2, 0.8]).unwrap();
        assert_eq!(outcome_distribution(&k_identity(2), &theta).unwrap(), vec![0.2, 0.8]);
        let ones = OverlapMatrix::from_rows(&[vec![1.0, 1.0, 1.0]]).unwrap();
        let p = outcome_distribution(&ones, &ProbabilityVector::new(vec![0.1, 0.2, 0.7]).unwrap()).unwrap();
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-15);
        assert!(outcome_distribution(&k_identity(3), &theta).is_err());
    }

    #[test]
    fn projector_examples() {
        let p2 = simplex_projector(2);
        assert_eq!(p2, RealMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]));
        for r in 1..=7 {
            let p = simplex_projector(r);
            assert!((&p * RealMatrix::from_element(r, 1, 1.0)).amax() < 1e-15);
            assert!((&p * &p - &p).amax() < 1e-12);
        }
    }

    #[test]
    fn fisher_identity_overlap_uniform() {
        let f = fisher_matrix(&k_identity(2), &ProbabilityVector::uniform(2).unwrap()).unwrap();
        assert!((f.matrix() - simplex_projector(2).scale(2.0)).amax() < 1e-14);
        assert_abs_diff_eq!(f.trace(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn single_outcome_carries_no_information() {
        let ones = OverlapMatrix::from_rows(&[vec![1.0; 4]]).unwrap();
        let f = fisher_matrix(&ones, &ProbabilityVector::uniform(4).unwrap()).unwrap();
        assert!(f.matrix().amax() < 1e-15);
    }

    #[test]
    fn zero_probability_outcomes() {
        // The zero row is dropped.
        let k = OverlapMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let f = fisher_matrix(&k, &ProbabilityVector::uniform(2).unwrap()).unwrap();
        assert_abs_diff_eq!(f.trace(), 2.0, epsilon = 1e-14);
        // A boundary point with a live outcome diverges.
        let boundary = ProbabilityVector::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(fisher_matrix(&k_identity(2), &boundary), Err(Error::SingularOutcome { outcome: 1, .. })));
    }

    #[test]
    fn pgm_fisher_respects_trace_bound() {
        let ch = MixedUnitaryChannel::new(
            vec![UnitaryMatrix::identity(2), UnitaryMatrix::new(pauli_x()).unwrap()],
            ProbabilityVector::uniform(2).unwrap(),
        )
        .unwrap();
        let ens = unitary_orbit_ensemble(&ch).unwrap();
        let k = overlap_matrix(&pgm(&ens).unwrap(), &ens).unwrap();
        let f = fisher_matrix(&k, ch.theta()).unwrap();
        let report = audit_trace_bound(&f, 2, 4, 1);
        assert!(report.satisfied);
    }

    #[test]
    fn jacobian_k1_is_identity() {
        let theta = ProbabilityVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        let j = tensor_jacobian(&theta, 1, DEFAULT_RANK_CAP).unwrap();
        assert_eq!(j.matrix(), &RealMatrix::identity(3, 3));
    }

    #[test]
    fn jacobian_gram_at_uniform_r2_k2() {
        let j = tensor_jacobian(&ProbabilityVector::uniform(2).unwrap(), 2, DEFAULT_RANK_CAP).unwrap();
        let gram = j.matrix().transpose() * j.matrix();
        // Columns are (1, ½, ½, 0) and (0, ½, ½, 1).
        let expected = RealMatrix::from_row_slice(2, 2, &[1.5, 0.5, 0.5, 1.5]);
        assert!((&gram - &expected).amax() < 1e-15);
        assert!((uniform_jacobian_gram(2, 2) - expected).amax() < 1e-15);
        assert!((j.spectral_norm_squared() - uniform_jacobian_norm_squared(2, 2)).abs() < 1e-12);
    }

    #[test]
    fn jacobian_rank_cap() {
        let theta = ProbabilityVector::uniform(4).unwrap();
        assert!(matches!(tensor_jacobian(&theta, 3, 63), Err(Error::RankCapExceeded { rank: 64, .. })));
    }

    #[test]
    fn concat_k1_equals_plain_fisher() {
        let ch = MixedUnitaryChannel::new(
            vec![UnitaryMatrix::identity(2), UnitaryMatrix::new(pauli_x()).unwrap()],
            ProbabilityVector::new(vec![0.4, 0.6]).unwrap(),
        )
        .unwrap();
        let ens = unitary_orbit_ensemble(&ch).unwrap();
        let m = pgm(&ens).unwrap();
        let plain = fisher_matrix(&overlap_matrix(&m, &ens).unwrap(), ch.theta()).unwrap();
        let concat = fisher_concat(&ch, &identity_intermediates(2, 1), &m, ch.theta(), DEFAULT_RANK_CAP).unwrap();
        assert!((plain.matrix() - concat.matrix()).amax() < 1e-12);
    }

    #[test]
    fn audit_examples() {
        let f = fisher_matrix(&k_identity(2), &ProbabilityVector::uniform(2).unwrap()).unwrap();
        let report = audit_trace_bound(&f, 2, 2, 1);
        assert_abs_diff_eq!(report.bound, 4.0);
        assert_abs_diff_eq!(report.slack, 2.0, epsilon = 1e-14);
        assert!(report.satisfied);

        let zero = audit_trace_bound(&FisherMatrix::zeros(3), 3, 2, 2);
        assert!(zero.satisfied);
        assert_eq!(zero.slack, zero.bound);
        assert_eq!(zero.bound, 24.0);
    }

    #[test]
    fn van_trees_examples() {
        assert_abs_diff_eq!(van_trees_lower_bound(4, 2, 1, 0.1, None).unwrap(), 200.0, epsilon = 1e-9);
        let saturated = van_trees_lower_bound(4, 2, 1, 0.1, Some(8.0)).unwrap();
        assert_abs_diff_eq!(saturated, 4.0 / (2.0 * 0.01), epsilon = 1e-9);
        let k1 = van_trees_lower_bound(6, 4, 1, 0.05, None).unwrap();
        let k2 = van_trees_lower_bound(6, 4, 2, 0.05, None).unwrap();
        assert_abs_diff_eq!(k2, k1 / 2.0, epsilon = 1e-9);
        assert!(matches!(van_trees_lower_bound(4, 2, 1, 0.0, None), Err(Error::NonPositiveEpsilon(_))));
        assert!(van_trees_lower_bound(4, 2, 1, -1.0, None).is_err());
    }
}
