//! Sample a Haar-random mixed unitary channel and apply it with and without
//! an ancilla.

use muclab::linalg::{hermitian_eigenvalues, max_entangled_state, random_pure_state};
use muclab::seed::stream;
use muclab::{MixedUnitaryChannel, ProbabilityVector};

fn main() -> muclab::Result<()> {
    let mut rng = stream(1);
    let theta = ProbabilityVector::dirichlet(4, &mut rng)?;
    let channel = MixedUnitaryChannel::haar(2, theta, &mut rng)?;
    println!(
        "rank {} channel on C^{} with θ = {:.4?}",
        channel.rank(),
        channel.d_channel(),
        channel.theta().as_slice()
    );

    let rho = random_pure_state(2, &mut rng)?.density();
    let out = channel.apply(&rho)?;
    println!("purity {:.4} -> {:.4}", rho.purity(), out.purity());

    let bell = max_entangled_state(2)?.density();
    let choi = channel.apply_with_ancilla(&bell)?;
    println!("spectrum of (Λ ⊗ id)(Φ): {:.4?}", hermitian_eigenvalues(choi.matrix()));
    Ok(())
}
