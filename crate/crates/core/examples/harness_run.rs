//! Drive the experiment harness from code: validate a config, run it, and
//! read back the summary.

use muclab::harness::{run, validate, ChannelSpec, ExperimentConfig};
use muclab::record::ExperimentKind;

fn main() -> muclab::Result<()> {
    let out = std::env::temp_dir().join("muclab-example");
    let mut config = ExperimentConfig::new(ExperimentKind::MseSweep);
    config.output_path = out.to_string_lossy().into_owned();
    config.channel = Some(ChannelSpec::haar(4, 16));
    config.n_values = Some(vec![1_000, 10_000]);
    config.trials = Some(20);
    for problem in validate(&config) {
        println!("problem: {problem}");
    }
    let outcome = run(&config)?;
    println!("records in {}", outcome.csv_path.unwrap().display());
    println!("{}", serde_json::to_string_pretty(&outcome.summary["points"])?);
    Ok(())
}
