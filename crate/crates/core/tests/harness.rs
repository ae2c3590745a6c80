use std::fs;
use std::path::Path;
use std::process::Command;

use muclab::harness::{run, run_with_threads, validate, ChannelSpec, ExperimentConfig};
use muclab::record::{ExperimentKind, AUDIT_HEADER, CONCENTRATION_HEADER, MSE_HEADER};
use muclab::Error;

fn config(kind: ExperimentKind, out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind);
    c.output_path = out.to_string_lossy().into_owned();
    c.root_seed = 17;
    match kind {
        ExperimentKind::Learn => {
            c.channel = Some(ChannelSpec::haar(2, 3));
            c.n = Some(1000);
        }
        ExperimentKind::MseSweep => {
            c.channel = Some(ChannelSpec::haar(2, 3));
            c.n_values = Some(vec![100, 1000]);
            c.trials = Some(5);
        }
        ExperimentKind::Concentration => {
            c.d_channel = Some(2);
            c.r = Some(3);
            c.trials = Some(4);
        }
        ExperimentKind::FisherAudit => {
            c.protocols = Some(6);
            c.d_channel_values = Some(vec![2]);
            c.r_values = Some(vec![2, 3]);
        }
        ExperimentKind::ConcatAudit => {
            c.protocols = Some(4);
        }
        ExperimentKind::Bound => {
            c.r = Some(4);
            c.d = Some(2);
            c.epsilon = Some(0.1);
        }
    }
    c
}

fn header_of(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn every_kind_runs_and_writes_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ExperimentKind::ALL {
        let c = config(kind, dir.path());
        assert!(validate(&c).is_empty(), "{kind}: {:?}", validate(&c));
        let out = run(&c).unwrap();
        assert!(out.summary_path.exists());
        let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out.summary_path).unwrap()).unwrap();
        assert_eq!(summary["kind"], kind.as_str());
        let expected = match kind {
            ExperimentKind::Learn | ExperimentKind::MseSweep => Some(MSE_HEADER.join(",")),
            ExperimentKind::Concentration => Some(CONCENTRATION_HEADER.join(",")),
            ExperimentKind::FisherAudit | ExperimentKind::ConcatAudit => Some(AUDIT_HEADER.join(",")),
            ExperimentKind::Bound => None,
        };
        assert_eq!(out.csv_path.as_deref().map(header_of), expected, "{kind}");
    }
}

#[test]
fn bound_summary_reports_reference_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config(ExperimentKind::Bound, dir.path())).unwrap();
    let value = out.summary["reference_lower_bound"].as_f64().unwrap();
    assert!((value - 200.0).abs() < 1e-9);
}

#[test]
fn reruns_are_byte_identical_regardless_of_threads() {
    for kind in ExperimentKind::ALL.into_iter().filter(|k| *k != ExperimentKind::Bound) {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let first = run_with_threads(&config(kind, a.path()), Some(1)).unwrap();
        let second = run_with_threads(&config(kind, b.path()), Some(4)).unwrap();
        let bytes = |o: &muclab::harness::RunOutcome| fs::read(o.csv_path.as_ref().unwrap()).unwrap();
        assert_eq!(bytes(&first), bytes(&second), "{kind}");
    }
}

#[test]
fn invalid_configs_are_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(ExperimentKind::Concentration, dir.path());
    c.r = Some(5);
    match run(&c) {
        Err(Error::InvalidConfig(problems)) => assert_eq!(problems[0].field, "r"),
        other => panic!("expected InvalidConfig, got {other:?}"),
    }
    assert!(!dir.path().join("concentration.csv").exists());
}

fn muclab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_muclab"))
}

#[test]
fn cli_bound_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let status = muclab()
        .args(["bound", "--r", "4", "--d", "2", "--k", "1", "--epsilon", "0.1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("bound_summary.json")).unwrap()).unwrap();
    let value = summary["reference_lower_bound"].as_f64().unwrap();
    assert!((value - 200.0).abs() < 1e-9, "{value}");
}

#[test]
fn cli_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("learn.json");
    fs::write(
        &cfg,
        r#"{"kind": "learn", "root_seed": 1, "n": 50,
            "channel": {"d_channel": 2, "unitaries": [[[[1,0],[0,0]],[[0,0],[1,0]]], [[[0,0],[1,0]],[[1,0],[0,0]]]],
                        "theta": [0.3, 0.7]}}"#,
    )
    .unwrap();
    let status = muclab()
        .arg("learn")
        .arg("--config")
        .arg(&cfg)
        .args(["--n", "5000", "--out"])
        .arg(dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let csv = fs::read_to_string(dir.path().join("learn.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "learn");
    assert_eq!(row[5], "5000");
}

#[test]
fn cli_rejects_invalid_config_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let output = muclab()
        .args(["concentration", "--d-channel", "2", "--r", "9", "--trials", "3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("r:"));
}

#[test]
fn cli_rejects_explicit_channel_without_theta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"kind": "learn", "n": 10, "channel": {"d_channel": 1, "unitaries": [[[[1,0]]]]}}"#).unwrap();
    let output = muclab().arg("learn").arg("--config").arg(&cfg).output().unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("theta"));
}

#[test]
fn rank_cap_can_be_set_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let output = muclab()
        .env("MUCLAB_RANK_CAP", "8")
        .args(["concat_audit", "--protocols", "1", "--r-values", "3", "--k-values", "2", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!output.status.success());
    assert!(String::from_utf8_lossy(&output.stderr).contains("rank cap 8"));
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let config = ExperimentConfig::load(&path).unwrap();
        assert!(validate(&config).is_empty(), "{}: {:?}", path.display(), validate(&config));
        seen += 1;
    }
    assert!(seen >= 6);
}
