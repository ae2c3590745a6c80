//! Concatenate a channel with itself and compare the chain-rule Fisher
//! matrix with the `k² r d` bound.

use muclab::channel::DEFAULT_RANK_CAP;
use muclab::fisher::{audit_trace_bound, fisher_concat, tensor_jacobian, uniform_jacobian_norm_squared};
use muclab::linalg::haar_unitary;
use muclab::povm::{pgm, unitary_orbit_ensemble};
use muclab::seed::stream;
use muclab::{MixedUnitaryChannel, ProbabilityVector};

fn main() -> muclab::Result<()> {
    let (d_channel, r, k) = (2, 3, 2);
    let mut rng = stream(4);
    let theta = ProbabilityVector::uniform(r)?;
    let channel = MixedUnitaryChannel::haar(d_channel, theta.clone(), &mut rng)?;
    let intermediates = (0..k).map(|_| haar_unitary(d_channel, &mut rng)).collect::<muclab::Result<Vec<_>>>()?;

    let effective = channel.concat_effective(&intermediates, DEFAULT_RANK_CAP)?;
    println!(
        "effective channel: rank {}, weights sum {:.12}",
        effective.rank(),
        effective.theta().as_slice().iter().sum::<f64>()
    );

    let povm = pgm(&unitary_orbit_ensemble(&effective)?)?;
    let fisher = fisher_concat(&channel, &intermediates, &povm, &theta, DEFAULT_RANK_CAP)?;
    let report = audit_trace_bound(&fisher, r, d_channel * d_channel, k);
    println!("Tr I^(k) = {:.4} ≤ {} : {}", report.trace_fisher, report.bound, report.satisfied);

    let j = tensor_jacobian(&theta, k, DEFAULT_RANK_CAP)?;
    println!("‖J‖₂² = {:.6} (closed form {:.6})", j.spectral_norm_squared(), uniform_jacobian_norm_squared(r, k));
    Ok(())
}
