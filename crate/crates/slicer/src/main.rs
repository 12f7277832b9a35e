use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use slicer::artifacts::config_hash;
use slicer::config::{load_config, parse_config, Profile, ScenarioConfig};
use slicer::runs::{
    run_comparison, run_gen_suite, run_personalization, run_reward_sweep, run_training,
};
use slicer::Rayon;
use slicer_core::personalization::summarize;

/// Delay-aware RAN slice controller experiments.
#[derive(Parser)]
#[command(name = "slicer", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON). Missing keys take the profile's defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory. Defaults to `<run.out_dir>/<command>-<profile>-seed<N>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Default scale: desk or paper.
    #[arg(long, default_value = "desk")]
    profile: Profile,
}

#[derive(Subcommand)]
enum Command {
    /// Train one controller and log every slot.
    Train(Common),
    /// Sweep constant grants and check the reward shape.
    Sweep(Common),
    /// Compare PDA, MD, heuristic and fixed-grant controllers.
    Compare(Common),
    /// Run the cross-environment personalization study.
    Personalize(Common),
    /// Write an environment suite.
    GenSuite {
        #[command(flatten)]
        common: Common,
        /// Number of members; defaults to `study.suite_size`.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Load, validate and print the resolved config.
    ValidateConfig(Common),
}

fn resolve(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(p) => load_config(p, common.profile)?,
        None => parse_config("{}", common.profile)?,
    };
    if let Some(s) = common.seed {
        cfg.run.seed = s;
    }
    Ok(cfg)
}

fn run_dir(common: &Common, cfg: &ScenarioConfig, command: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| {
        PathBuf::from(&cfg.run.out_dir)
            .join(format!("{command}-{}-seed{}", common.profile, cfg.run.seed))
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Returns false when a run finished but its check failed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Train(c) => {
            let cfg = resolve(&c)?;
            let dir = run_dir(&c, &cfg, "train");
            let out = run_training(&cfg, c.profile, &dir).context("train")?;
            let s = &out.summary;
            println!(
                "trained {} for {} slots; last {}: p_sat {:.4} (target {:.2}), delay {:.3} ms, {:.1} PRBs",
                s.algorithm, s.steps, s.trailing_slots, s.p_sat, s.target_p_sat, s.mean_delay_ms, s.mean_prbs
            );
            println!("run directory: {}", dir.display());
            Ok(true)
        }
        Command::Sweep(c) => {
            let cfg = resolve(&c)?;
            let dir = run_dir(&c, &cfg, "sweep");
            let out = run_reward_sweep(&cfg, c.profile, &dir, &Rayon).context("sweep")?;
            let r = &out.report;
            println!(
                "argmax {:?}, minimal satisfying {:?}, lln argmax {:?}, lambda {:.4}{}, spearman {:.4}",
                r.argmax_n,
                r.min_satisfying_n,
                r.lln_argmax_n,
                out.lambda,
                if out.lambda_calibrated { " (calibrated)" } else { "" },
                out.spearman
            );
            match &r.failure {
                None => println!("reward shape: pass"),
                Some(f) => println!("reward shape: FAIL ({f})"),
            }
            println!("run directory: {}", dir.display());
            Ok(r.pass)
        }
        Command::Compare(c) => {
            let cfg = resolve(&c)?;
            let dir = run_dir(&c, &cfg, "compare");
            let report = run_comparison(&cfg, c.profile, &dir, &Rayon).context("compare")?;
            println!(
                "fixed_av {} PRBs, fixed_max {} PRBs",
                report.calibration.fixed_av, report.calibration.fixed_max
            );
            println!(
                "{:<10} {:>9} {:>7} {:>13} {:>12}",
                "policy", "mean_prbs", "p_sat", "delay_ms", "reward"
            );
            for row in &report.rows {
                let r = &row.report;
                println!(
                    "{:<10} {:>9.2} {:>7.4} {:>13.3} {:>12.3}",
                    row.policy.name(),
                    r.mean_prbs,
                    r.p_sat,
                    r.mean_delay * cfg.env.tti_ms,
                    r.mean_reward
                );
            }
            println!("run directory: {}", dir.display());
            Ok(true)
        }
        Command::Personalize(c) => {
            let cfg = resolve(&c)?;
            let dir = run_dir(&c, &cfg, "personalize");
            let out = run_personalization(&cfg, c.profile, &dir, &Rayon).context("personalize")?;
            for line in summarize(&out.report, cfg.study.shift) {
                println!("{line}");
            }
            println!("run directory: {}", dir.display());
            Ok(true)
        }
        Command::GenSuite { common, n } => {
            let cfg = resolve(&common)?;
            let dir = run_dir(&common, &cfg, "gen-suite");
            let suite = run_gen_suite(
                &cfg,
                common.profile,
                &dir,
                n.unwrap_or(cfg.study.suite_size),
            )
            .context("gen-suite")?;
            println!(
                "{} environments written to {}",
                suite.members.len(),
                dir.display()
            );
            Ok(true)
        }
        Command::ValidateConfig(c) => {
            let cfg = resolve(&c)?;
            println!("{}", cfg.to_canonical_json());
            eprintln!("config ok, sha256 {}", config_hash(&cfg));
            Ok(true)
        }
    }
}
