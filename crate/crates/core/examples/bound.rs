//! Reference sample counts for a target error from the Fisher trace.

use muclab::fisher::van_trees_lower_bound;

fn main() -> muclab::Result<()> {
    for (r, d, k) in [(4, 2, 1), (16, 4, 1), (16, 4, 2), (64, 64, 1)] {
        let n = van_trees_lower_bound(r, d, k, 0.1, None)?;
        println!("r = {r:>2}, d = {d:>2}, k = {k}: N ≳ {n:.1} for ε = 0.1");
    }
    Ok(())
}
