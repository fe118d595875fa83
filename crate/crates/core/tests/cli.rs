use std::path::Path;
use std::process::{Command, Output};

fn gridedge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridedge")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const SMALL: &str = r#"
format = "gridedge-experiment/1"

[feeder]
kind = "four-bus"

[scenario]
houses = 4
minutes = 120
start_minute = 1140
kappa = 2

[scenario.ev]
sessions = 1
start_window = [20, 40]
duration = [60, 80]

[scenario.pv]
fraction = 0.5

[sweep]
parameter = "kappa"
kappas = [1, 2]
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("exp.toml");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn full_pipeline_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let out_s = out.to_string_lossy().into_owned();

    for cmd in ["synth", "recover", "evaluate", "sweep"] {
        let o = gridedge(&[cmd, "--config", &cfg, "--out", &out_s, "--seed", "5"]);
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
    for f in [
        "manifest.json",
        "timing/manifest.json",
        "truth/loads.csv",
        "measurements/z.csv",
        "measurements/meters.json",
        "solution/dp.csv",
        "solution/diagnostics.json",
        "evaluation/evaluation.json",
        "evaluation/roc.csv",
        "sweep.csv",
        "timing/recover.json",
        "timing/sweep_runtime.csv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["runs"]["synth"]["seed"], 5);
    assert!(manifest["files"].get("timing/recover.json").is_none());

    // rank-one mode, overriding the config
    let o = gridedge(&["recover", "--config", &cfg, "--out", &out_s, "--mode", "rank1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("solution/factors.json").is_file());

    // evaluation without ground truth skips detection with a notice
    let bare = dir.path().join("bare");
    std::fs::create_dir_all(&bare).unwrap();
    let o = gridedge(&[
        "evaluate",
        "--config",
        &cfg,
        "--out",
        &bare.to_string_lossy(),
        "--solution",
        &out.join("solution").to_string_lossy(),
        "--measurements",
        &out.join("measurements").to_string_lossy(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("detection skipped"));
    assert!(!bare.join("evaluation/roc.csv").exists());

    // a missing measurement file is a configuration error
    std::fs::remove_file(out.join("measurements/z.csv")).unwrap();
    let o = gridedge(&["recover", "--config", &cfg, "--out", &out_s]);
    assert_eq!(code(&o), 2);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o").to_string_lossy().into_owned();
    let missing = dir.path().join("nope.toml").to_string_lossy().into_owned();
    assert_eq!(code(&gridedge(&["synth", "--config", &missing, "--out", &out])), 2);

    let cfg = write_config(dir.path(), "[scenario]\nhouses = 4\nbogus = 1\n");
    let o = gridedge(&["synth", "--config", &cfg, "--out", &out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));

    let cfg = write_config(dir.path(), "[scenario.pv]\nfraction = 2.0\n");
    let o = gridedge(&["synth", "--config", &cfg, "--out", &out]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("pv.fraction"));

    let cfg = write_config(dir.path(), SMALL);
    assert_eq!(code(&gridedge(&["synth", "--config", &cfg, "--out", &out, "--kappa", "9"])), 2);
    assert_eq!(code(&gridedge(&["synth", "--config", &cfg, "--mode", "bogus"])), 2);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub").to_string_lossy().into_owned();
    assert_eq!(code(&gridedge(&["synth", "--config", &cfg, "--out", &out])), 3);
}
