//! Build the pretty good measurement of a unitary orbit and inspect its
//! overlap matrix `K_ij = Tr(E_i ρ_j)`.

use muclab::povm::{overlap_matrix, pgm, unitary_orbit_ensemble};
use muclab::seed::stream;
use muclab::{MixedUnitaryChannel, ProbabilityVector};

fn main() -> muclab::Result<()> {
    let (d_channel, r) = (4, 16);
    let mut rng = stream(2);
    let channel = MixedUnitaryChannel::haar(d_channel, ProbabilityVector::uniform(r)?, &mut rng)?;
    let ensemble = unitary_orbit_ensemble(&channel)?;
    let povm = pgm(&ensemble)?;
    println!(
        "{} outcomes (last one completes the POVM), completeness residual {:.1e}",
        povm.num_outcomes(),
        povm.completeness_residual()
    );

    let k = overlap_matrix(&povm, &ensemble)?;
    let (block, kept) = k.drop_zero_rows(1e-12);
    let diag = block.diagonal();
    println!("kept {} of {} rows", kept.len(), k.nrows());
    println!(
        "K_ii: min {:.4}, mean {:.4}",
        diag.iter().cloned().fold(f64::INFINITY, f64::min),
        diag.iter().sum::<f64>() / diag.len() as f64
    );
    println!("λ_min(K) = {:.4}, asymmetry {:.1e}", block.lambda_min(), block.asymmetry());
    println!("Σ_i max_j K_ij = {:.4} (probe dimension {})", k.row_max_sum(), d_channel * d_channel);
    Ok(())
}
