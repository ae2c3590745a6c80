//! Fisher information of random single-use protocols against the trace
//! bound `Tr I ≤ r d`.

use muclab::harness::{audit_protocol, draw_protocol, ProtocolSpace};

fn main() -> muclab::Result<()> {
    let space = ProtocolSpace {
        d_channel_values: vec![2, 4],
        r_values: (2..=8).collect(),
        k_values: vec![1],
        ancilla_values: vec![1, 2],
    };
    println!("{:>3} {:>3} {:>4} {:>14} {:>12} {:>9} {:>8}", "d", "r", "anc", "probe", "measurement", "Tr I", "r·d");
    for i in 0..10 {
        let protocol = draw_protocol(&space, "example", 3, i)?;
        let audit = audit_protocol(&protocol, 4096)?;
        let measurement = match protocol.measurement {
            muclab::harness::audit::MeasurementKind::Pgm => "pgm".to_string(),
            muclab::harness::audit::MeasurementKind::Random { outcomes } => format!("random({outcomes})"),
        };
        println!(
            "{:>3} {:>3} {:>4} {:>14} {:>12} {:>9.4} {:>8}",
            protocol.d_channel,
            protocol.r,
            protocol.ancilla,
            format!("{:?}", protocol.probe),
            measurement,
            audit.report.trace_fisher,
            audit.report.bound
        );
    }
    Ok(())
}
