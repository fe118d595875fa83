use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gridedge::experiment::{cmd_evaluate, cmd_recover, cmd_sweep, cmd_synth, ExperimentConfig};
use gridedge::recover::SolverMode;
use gridedge::Result;

#[derive(Parser)]
#[command(name = "gridedge", version, about = "Behind-the-meter load recovery from feeder and smart-meter data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate ground truth and measurements.
    Synth(Common),
    /// Recover loads from stored measurements.
    Recover {
        #[command(flatten)]
        common: Common,
        /// Measurement directory [default: <out>/measurements].
        #[arg(long)]
        measurements: Option<PathBuf>,
    },
    /// Score a stored solution: EV detection and solar analysis.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        solution: Option<PathBuf>,
        #[arg(long)]
        measurements: Option<PathBuf>,
        /// Ground-truth directory [default: <out>/truth when present].
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Repeat synth and recover over a sensor-count or λ grid.
    Sweep(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Rank1,
}

#[derive(Args)]
struct Common {
    /// Experiment TOML; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: the config's `output`, else ./gridedge-out].
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Number of feeder sensors.
    #[arg(long)]
    kappa: Option<usize>,
}

struct Setup {
    cfg: ExperimentConfig,
    base_dir: PathBuf,
    out: PathBuf,
}

impl Common {
    fn setup(&self) -> Result<Setup> {
        let (mut cfg, base_dir) = match &self.config {
            Some(p) => (
                ExperimentConfig::load(p)?,
                p.parent().map(Path::to_path_buf).unwrap_or_default(),
            ),
            None => (ExperimentConfig::default(), PathBuf::from(".")),
        };
        if let Some(s) = self.seed {
            cfg.scenario.seed = s;
        }
        if let Some(k) = self.kappa {
            cfg.scenario.kappa = k;
        }
        if let Some(m) = self.mode {
            cfg.recovery.mode = match m {
                Mode::Full => SolverMode::Full,
                Mode::Rank1 => SolverMode::Rank1,
            };
        }
        cfg.validate()?;
        let out = match (&self.out, &cfg.output) {
            (Some(o), _) => o.clone(),
            (None, Some(o)) => base_dir.join(o),
            (None, None) => PathBuf::from("gridedge-out"),
        };
        Ok(Setup { cfg, base_dir, out })
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(c) => {
            let s = c.setup()?;
            let sc = cmd_synth(&s.cfg, &s.base_dir, &s.out)?;
            println!(
                "synth: {} houses, {} minutes, {} sensors, {} events -> {}",
                sc.truth.loads.houses(),
                sc.truth.loads.minutes(),
                sc.measurements.sensors.len(),
                sc.truth.events.len(),
                s.out.display()
            );
        }
        Command::Recover { common, measurements } => {
            let s = common.setup()?;
            let sol = cmd_recover(&s.cfg, &s.base_dir, measurements.as_deref(), &s.out)?;
            let d = &sol.diagnostics;
            println!(
                "recover: {} iterations, residual {:.2e}, support {}{} -> {}",
                d.iterations,
                d.final_residual(),
                d.support,
                if d.not_converged { " (not converged)" } else { "" },
                s.out.display()
            );
        }
        Command::Evaluate {
            common,
            solution,
            measurements,
            truth,
        } => {
            let s = common.setup()?;
            let ev = cmd_evaluate(
                &s.cfg,
                solution.as_deref(),
                measurements.as_deref(),
                truth.as_deref(),
                &s.out,
            )?;
            if let Some(d) = &ev.detection {
                println!(
                    "detection: max TPR {:.3}; at {:.2}·rating TPR {:.3} FPR {:.2e}",
                    d.max_tpr, d.operating.fraction, d.operating.tpr, d.operating.fpr
                );
            }
            if let Some(sol) = &ev.solar {
                if let (Some(a), Some(b)) = (sol.corr, sol.corr_filtered) {
                    println!("pattern: correlation {a:.3} raw, {b:.3} filtered");
                }
                if let Some(e) = sol.btm.as_ref().and_then(|b| b.rms_error) {
                    println!("solar: RMS error {:.2}% of peak", 100.0 * e);
                }
            }
        }
        Command::Sweep(c) => {
            let s = c.setup()?;
            let rows = cmd_sweep(&s.cfg, &s.base_dir, &s.out)?;
            for r in &rows {
                println!(
                    "{:?}={} seed {}: {} iterations, {:.3}s, error {:.4}",
                    r.parameter, r.value, r.seed, r.iterations, r.wall_time_s, r.rel_error
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
