//! Estimate the weights of a Haar channel from N channel uses.

use muclab::seed::stream;
use muclab::{EstimatorOptions, MixedUnitaryChannel, PgmEstimator, ProbabilityVector};

fn main() -> muclab::Result<()> {
    let mut rng = stream(5);
    let theta = ProbabilityVector::dirichlet(6, &mut rng)?;
    let channel = MixedUnitaryChannel::haar(3, theta, &mut rng)?;
    let options = EstimatorOptions { project_to_simplex: true, ..EstimatorOptions::default() };
    let estimator = PgmEstimator::new(&channel, options)?;
    println!("cond(K) = {:.3}", estimator.condition_number());
    for n in [100, 10_000, 1_000_000] {
        let result = estimator.estimate_seeded(n, 42)?;
        println!("N = {n:>7}: squared error {:.3e}", result.squared_error.unwrap_or(f64::NAN));
        if n == 1_000_000 {
            println!("  true θ      {:.4?}", channel.theta().as_slice());
            println!("  estimate    {:.4?}", result.theta_hat);
            println!("  projected   {:.4?}", result.theta_projected.unwrap_or_default());
        }
    }
    Ok(())
}
