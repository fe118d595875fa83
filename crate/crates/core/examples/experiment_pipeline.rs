//! The synth → recover → evaluate pipeline behind the binary, run twice to
//! show that every non-timing output is reproducible.
//!
//! cargo run --release --example experiment_pipeline -- [config.toml]

use std::path::{Path, PathBuf};

use gridedge::experiment::files::deterministic_hashes;
use gridedge::experiment::{cmd_evaluate, cmd_recover, cmd_synth, ExperimentConfig};

fn run(cfg: &ExperimentConfig, base: &Path, out: &Path) -> gridedge::Result<()> {
    cmd_synth(cfg, base, out)?;
    let sol = cmd_recover(cfg, base, None, out)?;
    let ev = cmd_evaluate(cfg, None, None, None, out)?;
    println!(
        "{}: {} iterations, max TPR {:?}",
        out.display(),
        sol.diagnostics.iterations,
        ev.detection.map(|d| d.max_tpr)
    );
    Ok(())
}

fn main() -> gridedge::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs/four_bus.toml")
    });
    let cfg = ExperimentConfig::load(&path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let root = std::env::temp_dir().join(format!("gridedge-pipeline-{}", std::process::id()));
    let (a, b) = (root.join("a"), root.join("b"));
    run(&cfg, base, &a)?;
    run(&cfg, base, &b)?;
    let (ha, hb) = (deterministic_hashes(&a)?, deterministic_hashes(&b)?);
    println!("{} deterministic files, identical: {}", ha.len(), ha == hb);
    std::fs::remove_dir_all(&root)?;
    Ok(())
}
