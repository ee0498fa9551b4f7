use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use fhsim::simulator::{
    run_scenario, run_sweep, write_manifest, write_report, RunReport, ScenarioConfig, SweepConfig,
};

/// Cell-free mmWave downlink simulator with a capacity-limited fronthaul mesh.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        /// Scenario TOML. Defaults apply to any missing field.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the UE-count × segment-capacity sweep.
    Sweep {
        /// Sweep TOML with a `[base]` table plus `ues` and `capacities` lists.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the default scenario config as TOML.
    DefaultConfig,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the realization count.
    #[arg(long)]
    realizations: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

impl Common {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.realizations {
            cfg.realizations = r;
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn finish(reports: &[RunReport], common: &Common, command: &str) -> Result<()> {
    for r in reports {
        write_report(r, &common.out).with_context(|| format!("writing {}", r.scenario_id))?;
        let s = r.batch.summary();
        eprintln!(
            "{}: {} realizations, drop rate {:.4}, median SINR {} dB, {:.2?}",
            r.scenario_id,
            s.realizations,
            s.drop_rate,
            s.median_sinr_db.map_or("n/a".into(), |v| format!("{v:.2}")),
            r.duration,
        );
    }
    write_manifest(&common.out, command, reports)?;
    eprintln!("results in {}", common.out.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let jobs = match &cli.command {
        Command::Run { common, .. } | Command::Sweep { common, .. } => common.jobs,
        Command::DefaultConfig => 1,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .context("starting worker pool")?;

    match cli.command {
        Command::Run { config, common } => {
            let mut cfg = match &config {
                Some(p) => {
                    toml::from_str(&read(p)?).with_context(|| format!("parsing {}", p.display()))?
                }
                None => ScenarioConfig::default(),
            };
            common.apply(&mut cfg);
            cfg.validate()?;
            let report = run_scenario(&cfg)?;
            finish(std::slice::from_ref(&report), &common, "run")
        }
        Command::Sweep { config, common } => {
            let sweep = match &config {
                Some(p) => SweepConfig::from_toml(&read(p)?)
                    .with_context(|| format!("parsing {}", p.display()))?,
                None => SweepConfig::default(),
            };
            let mut cfgs = sweep.expand()?;
            for c in &mut cfgs {
                common.apply(c);
                c.validate()?;
            }
            let reports = run_sweep(&cfgs)?;
            finish(&reports, &common, "sweep")
        }
        Command::DefaultConfig => {
            print!("{}", ScenarioConfig::default().to_toml());
            Ok(())
        }
    }
}
