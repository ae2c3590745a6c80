//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the Fisher, Jacobian or concatenation code under test:
//! Fisher matrices come from finite differences of black-box outcome
//! distributions, and concatenated channels are applied step by step.

#![allow(dead_code)]

use muclab::linalg::{extend_with_identity, ComplexMatrix, DensityOperator, RealMatrix, UnitaryMatrix};
use muclab::povm::{born_probabilities, OverlapMatrix, Povm};
use muclab::{MixedUnitaryChannel, ProbabilityVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Probabilities below this are treated as impossible outcomes.
pub const ZERO_P: f64 = 1e-14;

/// Fisher matrix in the simplex tangent space from central differences of
/// `p(θ)` along `v_b = e_b − 1/r`.
///
/// `G_bc = Σ_i ∂_b p_i ∂_c p_i / p_i`. Because each `v_b` is the projection of
/// `e_b`, `G` equals the projected Fisher matrix `P_s I P_s`.
pub fn fd_fisher<F>(theta: &[f64], h: f64, mut p: F) -> RealMatrix
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let r = theta.len();
    let p0 = p(theta);
    let grads: Vec<Vec<f64>> = (0..r)
        .map(|b| {
            let shift = |sign: f64| -> Vec<f64> {
                (0..r).map(|a| theta[a] + sign * h * ((a == b) as u8 as f64 - 1.0 / r as f64)).collect()
            };
            let plus = p(&shift(1.0));
            let minus = p(&shift(-1.0));
            plus.iter().zip(&minus).map(|(x, y)| (x - y) / (2.0 * h)).collect()
        })
        .collect();
    RealMatrix::from_fn(r, r, |b, c| {
        p0.iter().enumerate().filter(|(_, &pi)| pi > ZERO_P).map(|(i, &pi)| grads[b][i] * grads[c][i] / pi).sum()
    })
}

/// `p = K θ` computed entry by entry.
pub fn linear_model(k: &RealMatrix, theta: &[f64]) -> Vec<f64> {
    (0..k.nrows()).map(|i| (0..k.ncols()).map(|j| k[(i, j)] * theta[j]).sum()).collect()
}

/// Random column-stochastic `s × r` matrix; occasionally with an all-zero row.
pub fn random_overlap<R: Rng>(s: usize, r: usize, rng: &mut R) -> OverlapMatrix {
    let zero_row = s > 2 && rng.random_bool(0.25);
    let mut m = RealMatrix::from_fn(s, r, |i, _| if zero_row && i == s - 1 { 0.0 } else { Exp1.sample(rng) });
    for mut col in m.column_iter_mut() {
        let total: f64 = col.sum();
        col /= total;
    }
    OverlapMatrix::new(m).expect("column stochastic")
}

/// Dirichlet(1,…,1) point bounded away from the simplex boundary.
pub fn interior_theta<R: Rng>(r: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..r)
        .map(|_| {
            let x: f64 = Exp1.sample(rng);
            0.05 + x
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// `(Λ ⊗ id)` written out as a sum, without the library's `apply`.
pub fn apply_channel(channel: &MixedUnitaryChannel, theta: &[f64], rho: &ComplexMatrix) -> ComplexMatrix {
    let ancilla = rho.nrows() / channel.d_channel();
    let mut out = ComplexMatrix::zeros(rho.nrows(), rho.ncols());
    for (u, &w) in channel.unitaries().iter().zip(theta) {
        let big = extend_with_identity(u.matrix(), ancilla);
        out += (&big * rho * big.adjoint()).scale(w);
    }
    out
}

/// `V_k Λ ⋯ V_1 Λ (ρ)` applied one step at a time.
pub fn apply_sequentially(
    channel: &MixedUnitaryChannel,
    theta: &[f64],
    intermediates: &[UnitaryMatrix],
    rho: &ComplexMatrix,
) -> ComplexMatrix {
    let ancilla = rho.nrows() / channel.d_channel();
    let mut state = rho.clone();
    for v in intermediates {
        state = apply_channel(channel, theta, &state);
        let big = extend_with_identity(v.matrix(), ancilla);
        state = &big * state * big.adjoint();
    }
    state
}

/// Outcome distribution of the concatenated protocol at an arbitrary
/// (possibly non-normalized) weight vector, via `Tr(E_i ρ)`.
pub fn concat_distribution(
    channel: &MixedUnitaryChannel,
    theta: &[f64],
    intermediates: &[UnitaryMatrix],
    probe: &DensityOperator,
    povm: &Povm,
) -> Vec<f64> {
    let out = apply_sequentially(channel, theta, intermediates, probe.matrix());
    povm.all_effects().map(|e| (e * &out).trace().re).collect()
}

/// Born probabilities of the single-use protocol, through the library's
/// state validation.
pub fn born(channel: &MixedUnitaryChannel, probe: &DensityOperator, povm: &Povm) -> Vec<f64> {
    let out = apply_channel(channel, channel.theta().as_slice(), probe.matrix());
    born_probabilities(&DensityOperator::new(out).expect("valid output state"), povm).expect("probabilities")
}

/// Pearson chi-square p-value of `counts` against `probs`, pooling outcomes
/// with expected count below 5 into one cell.
pub fn chi_square_p_value(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        let expected = p * n as f64;
        if expected < 5.0 {
            pooled.0 += c as f64;
            pooled.1 += expected;
        } else {
            cells.push((c as f64, expected));
        }
    }
    if pooled.1 > 0.0 {
        cells.push(pooled);
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = (cells.len() - 1).max(1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

pub fn max_abs_diff(a: &RealMatrix, b: &RealMatrix) -> f64 {
    (a - b).amax()
}

pub fn probability(theta: &[f64]) -> ProbabilityVector {
    ProbabilityVector::new(theta.to_vec()).unwrap()
}
