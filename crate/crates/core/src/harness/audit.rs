//! Randomly drawn measurement protocols for the Fisher trace-bound audits.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{identity_intermediates, MixedUnitaryChannel, ProbabilityVector};
use crate::error::{Error, Result};
use crate::fisher::{audit_trace_bound, concat_parts, fisher_matrix, BoundReport, FisherMatrix};
use crate::linalg::{
    haar_unitary, max_entangled_state, random_density, random_pure_state, DensityOperator, UnitaryMatrix,
};
use crate::povm::{orbit_ensemble, overlap_matrix, pgm, random_povm, OverlapMatrix, Povm};
use crate::seed::{derive_seed, stream, Stream};

/// Tolerance of the row-maximum bound `Σ_i max_a K_ia ≤ d`.
pub const ROW_MAX_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    /// Maximally entangled with an ancilla of dimension `d_channel`.
    MaxEntangled,
    RandomPure,
    RandomMixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementKind {
    /// Pretty good measurement of the (effective) orbit.
    Pgm,
    /// Random POVM with the given number of outcomes.
    Random { outcomes: usize },
}

/// A fully specified audit protocol; everything random derives from `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub seed: u64,
    pub d_channel: usize,
    pub r: usize,
    pub k: usize,
    pub ancilla: usize,
    pub probe: ProbeKind,
    pub measurement: MeasurementKind,
    /// Haar intermediate unitaries between uses (identity otherwise).
    pub haar_intermediates: bool,
}

impl Protocol {
    /// Dimension of the probe, `d_channel · ancilla`.
    pub fn probe_dim(&self) -> usize {
        self.d_channel * self.ancilla
    }
}

/// The value sets a protocol is drawn from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpace {
    pub d_channel_values: Vec<usize>,
    pub r_values: Vec<usize>,
    pub k_values: Vec<usize>,
    pub ancilla_values: Vec<usize>,
}

fn pick<T: Copy>(values: &[T], rng: &mut Stream, what: &str) -> Result<T> {
    values.choose(rng).copied().ok_or_else(|| Error::InvalidArgument(format!("no {what} values to draw from")))
}

/// Draws protocol number `index` of a run rooted at `root_seed`.
pub fn draw_protocol(space: &ProtocolSpace, domain: &str, root_seed: u64, index: usize) -> Result<Protocol> {
    let seed = derive_seed(root_seed, domain, &[index as u64]);
    let mut rng = stream(derive_seed(seed, "protocol_shape", &[]));
    let d_channel = pick(&space.d_channel_values, &mut rng, "d_channel")?;
    let r = pick(&space.r_values, &mut rng, "r")?;
    let k = pick(&space.k_values, &mut rng, "k")?;
    let probe = [ProbeKind::MaxEntangled, ProbeKind::RandomPure, ProbeKind::RandomMixed][rng.random_range(0..3)];
    let ancilla = match probe {
        ProbeKind::MaxEntangled => d_channel,
        _ => pick(&space.ancilla_values, &mut rng, "ancilla")?,
    };
    let dim = d_channel * ancilla;
    let measurement = if rng.random_bool(0.5) {
        MeasurementKind::Pgm
    } else {
        MeasurementKind::Random { outcomes: rng.random_range(2..=(2 * dim).max(2)) }
    };
    let haar_intermediates = k > 1 && rng.random_bool(0.5);
    Ok(Protocol { seed, d_channel, r, k, ancilla, probe, measurement, haar_intermediates })
}

/// Everything an audit computes for one protocol.
#[derive(Clone, Debug)]
pub struct ProtocolAudit {
    pub protocol: Protocol,
    pub channel: MixedUnitaryChannel,
    pub probe_state: DensityOperator,
    pub povm: Povm,
    /// Overlap matrix of the (effective) orbit.
    pub overlap: OverlapMatrix,
    pub fisher: FisherMatrix,
    pub report: BoundReport,
}

impl ProtocolAudit {
    /// `Σ_i max_a K_ia`, which never exceeds the probe dimension.
    pub fn row_max_sum(&self) -> f64 {
        self.overlap.row_max_sum()
    }

    pub fn row_max_holds(&self) -> bool {
        self.row_max_sum() <= self.protocol.probe_dim() as f64 + ROW_MAX_TOL
    }
}

/// Builds the protocol's channel, probe and measurement and evaluates the
/// Fisher matrix at the uniform point.
pub fn audit_protocol(protocol: &Protocol, rank_cap: usize) -> Result<ProtocolAudit> {
    let mut rng = stream(derive_seed(protocol.seed, "protocol_body", &[]));
    let p = protocol;
    let theta = ProbabilityVector::uniform(p.r)?;
    let channel = MixedUnitaryChannel::haar(p.d_channel, theta.clone(), &mut rng)?;
    let dim = p.probe_dim();
    let probe_state = match p.probe {
        ProbeKind::MaxEntangled => max_entangled_state(p.d_channel)?.density(),
        ProbeKind::RandomPure => random_pure_state(dim, &mut rng)?.density(),
        ProbeKind::RandomMixed => {
            let rank = rng.random_range(1..=dim);
            random_density(dim, rank, &mut rng)?
        }
    };
    let intermediates: Vec<UnitaryMatrix> = if p.haar_intermediates {
        (0..p.k).map(|_| haar_unitary(p.d_channel, &mut rng)).collect::<Result<_>>()?
    } else {
        identity_intermediates(p.d_channel, p.k)
    };
    let effective = channel.concat_effective(&intermediates, rank_cap)?;
    let ensemble = orbit_ensemble(&effective, &probe_state)?;
    let povm = match p.measurement {
        MeasurementKind::Pgm => pgm(&ensemble)?,
        MeasurementKind::Random { outcomes } => random_povm(dim, outcomes, &mut rng)?,
    };
    let (overlap, fisher) = if p.k == 1 {
        let overlap = overlap_matrix(&povm, &ensemble)?;
        let fisher = fisher_matrix(&overlap, &theta)?;
        (overlap, fisher)
    } else {
        let parts = concat_parts(&channel, &intermediates, &probe_state, &povm, &theta, rank_cap)?;
        let fisher = parts.fisher()?;
        (parts.effective_overlap, fisher)
    };
    let report = audit_trace_bound(&fisher, p.r, dim, p.k);
    Ok(ProtocolAudit { protocol: p.clone(), channel, probe_state, povm, overlap, fisher, report })
}
