//! Mean squared error of the estimator across N, against the `6.25 / N`
//! reference.

use muclab::estimator::mse_curve;
use muclab::seed::stream;
use muclab::{EstimatorOptions, MixedUnitaryChannel, ProbabilityVector};

fn main() -> muclab::Result<()> {
    let mut rng = stream(6);
    let channel = MixedUnitaryChannel::haar(8, ProbabilityVector::uniform(64)?, &mut rng)?;
    let curve = mse_curve(&channel, &[1_000, 10_000, 100_000], 50, EstimatorOptions::default(), 6)?;
    for p in &curve.points {
        println!(
            "N = {:>6}: MSE = {:.3e} ± {:.1e}, MSE·N = {:.3} (reference 6.25)",
            p.n,
            p.mean,
            p.stderr,
            p.mean * p.n as f64
        );
    }
    println!("log-log slope {:.4}", curve.loglog_slope().unwrap_or(f64::NAN));
    Ok(())
}
