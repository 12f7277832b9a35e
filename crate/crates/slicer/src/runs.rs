//! Experiment runners. Each writes its artifacts into one run directory:
//! the resolved `config.json` first, the outputs, and `manifest.json` last.
//! A failing run still gets a manifest, marked partial.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use slicer_core::agents::{dqn_train, pg_train, SliceTask, SlotRecord};
use slicer_core::compare::{run_comparison as core_comparison, ComparisonReport, PolicyKind};
use slicer_core::env::SliceEnv;
use slicer_core::exec::Executor;
use slicer_core::nn::{MlpArchitecture, PolicyModel};
use slicer_core::personalization::{personalization_study, StudyEnv, StudyReport};
use slicer_core::rng::{substream, substream_seed};
use slicer_core::stats::spearman;
use slicer_core::sweep::{dual_lambda, prb_sweep, validate_reward_shape, ShapeReport, SweepPoint};

use crate::artifacts::{
    config_hash, csv_bytes, ensure_dir, matrix_csv_bytes, sha256_hex, to_json_bytes, write_atomic,
    ComparisonRow, RunManifest, RunStatus, SweepRow, TrainingRow, COMPARISON_REPORT_SCHEMA,
    COMPARISON_SCHEMA, CONFIG_FILE, MANIFEST_FILE, MANIFEST_SCHEMA, PERSONALIZATION_SCHEMA,
    SHAPE_REPORT_SCHEMA, SWEEP_SCHEMA, TRAINING_SCHEMA, TRAINING_SUMMARY_SCHEMA,
};
use crate::checkpoint::{save_checkpoint, Checkpoint, CheckpointMeta};
use crate::config::{Algorithm, Profile, ScenarioConfig};
use crate::suite::{generate_env_suite, EnvSuite};
use crate::Result;

pub const TRAINING_CSV: &str = "training.csv";
pub const TRAINING_SUMMARY: &str = "training_summary.json";
pub const MODEL_FILE: &str = "model.json";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SHAPE_REPORT: &str = "reward_shape_report.json";
pub const COMPARISON_CSV: &str = "comparison.csv";
pub const COMPARISON_REPORT: &str = "comparison_report.json";
pub const SUITE_FILE: &str = "suite.json";
pub const PERSONALIZATION_REPORT: &str = "personalization_report.json";
pub const R_HAT_CSV: &str = "r_hat.csv";

/// Slots at the end of a training log that the summary averages over.
pub const TRAILING_SLOTS: usize = 500;

/// An open run directory that records what gets written into it.
pub struct RunDir {
    dir: PathBuf,
    command: String,
    profile: Profile,
    seed: u64,
    config_hash: String,
    files: Vec<String>,
    metrics: Vec<String>,
    started: Instant,
    started_unix_s: u64,
}

impl RunDir {
    /// Create `dir` and store the resolved config in it.
    pub fn create(
        dir: &Path,
        command: &str,
        cfg: &ScenarioConfig,
        profile: Profile,
    ) -> Result<Self> {
        ensure_dir(dir)?;
        let text = cfg.to_canonical_json();
        write_atomic(&dir.join(CONFIG_FILE), text.as_bytes())?;
        Ok(RunDir {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            profile,
            seed: cfg.run.seed,
            config_hash: config_hash(cfg),
            files: vec![CONFIG_FILE.to_string()],
            metrics: Vec::new(),
            started: Instant::now(),
            started_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let p = self.dir.join(name);
        write_atomic(&p, bytes)?;
        self.files.push(name.to_string());
        Ok(p)
    }

    /// Like [`RunDir::write`] for a per-slot metrics table.
    pub fn write_metrics(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        self.metrics.push(name.to_string());
        self.write(name, bytes)
    }

    /// Write the manifest, complete unless `error` is set.
    pub fn finish(self, error: Option<String>) -> Result<RunManifest> {
        let manifest = RunManifest {
            schema_version: MANIFEST_SCHEMA.to_string(),
            command: self.command,
            profile: self.profile,
            config_hash: self.config_hash,
            seed: self.seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            files: self.files,
            metrics_start: self.metrics.first().cloned(),
            metrics_end: self.metrics.last().cloned(),
            started_unix_s: self.started_unix_s,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            status: if error.is_some() {
                RunStatus::Partial
            } else {
                RunStatus::Complete
            },
            error,
        };
        write_atomic(&self.dir.join(MANIFEST_FILE), &to_json_bytes(&manifest)?)?;
        Ok(manifest)
    }
}

fn in_run_dir<T>(
    dir: &Path,
    command: &str,
    cfg: &ScenarioConfig,
    profile: Profile,
    body: impl FnOnce(&mut RunDir) -> Result<T>,
) -> Result<T> {
    let mut rd = RunDir::create(dir, command, cfg, profile)?;
    let out = body(&mut rd);
    rd.finish(out.as_ref().err().map(ToString::to_string))?;
    out
}

/// Tail statistics of a training run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingSummary {
    pub schema_version: String,
    pub algorithm: String,
    pub seed: u64,
    pub steps: u64,
    pub trailing_slots: usize,
    /// Pooled satisfied / completed over the trailing slots.
    pub p_sat: f64,
    /// Completion-weighted, in milliseconds.
    pub mean_delay_ms: f64,
    pub mean_prbs: f64,
    pub mean_reward: f64,
    pub target_p_sat: f64,
    pub training_csv_sha256: String,
}

pub struct TrainingOutcome {
    pub model: PolicyModel,
    pub records: Vec<SlotRecord>,
    pub summary: TrainingSummary,
}

fn summarize_tail(records: &[SlotRecord], tti_ms: f64) -> (usize, f64, f64, f64, f64) {
    let tail = &records[records.len().saturating_sub(TRAILING_SLOTS)..];
    let completed: u64 = tail.iter().map(|r| u64::from(r.metrics.completed)).sum();
    let satisfied: u64 = tail.iter().map(|r| u64::from(r.metrics.satisfied)).sum();
    let p_sat = if completed == 0 {
        1.0
    } else {
        satisfied as f64 / completed as f64
    };
    let delay_sum: f64 = tail
        .iter()
        .map(|r| r.metrics.mean_delay_ttis * f64::from(r.metrics.completed))
        .sum();
    let delay = if completed == 0 {
        0.0
    } else {
        delay_sum / completed as f64 * tti_ms
    };
    let n = tail.len().max(1) as f64;
    let prbs = tail
        .iter()
        .map(|r| f64::from(r.metrics.n_prbs))
        .sum::<f64>()
        / n;
    let reward = tail.iter().map(|r| r.reward).sum::<f64>() / n;
    (tail.len(), p_sat, delay, prbs, reward)
}

/// Train a slice controller with the configured algorithm.
///
/// The environment, the initial weights and the trainer's own sampling use
/// the `env`, `init` and `policy` substreams of `run.seed`.
pub fn run_training(cfg: &ScenarioConfig, profile: Profile, dir: &Path) -> Result<TrainingOutcome> {
    in_run_dir(dir, "train", cfg, profile, |rd| {
        let env_cfg = cfg.env_config()?;
        let seed = cfg.run.seed;
        let codec = cfg.codec()?;
        let arch = MlpArchitecture::new(
            env_cfg.observation_dim(),
            cfg.agent.hidden.clone(),
            codec.len(),
        )?;
        let init = PolicyModel::init(arch, &mut substream(seed, "init"));
        let env = SliceEnv::new(env_cfg, substream_seed(seed, "env"))?;
        let mut task = SliceTask::new(env, codec.clone(), cfg.reward_fn()?);
        let mut rng = substream(seed, "policy");
        let steps = cfg.run.steps;
        let (model, records, algorithm) = match cfg.agent.algorithm {
            Algorithm::Pg => {
                let (m, log) = pg_train(&mut task, init, &cfg.pg_trainer(), steps, &mut rng)?;
                (m, log, "pg")
            }
            Algorithm::Dqn => {
                let (m, log, _) = dqn_train(&mut task, init, &cfg.dqn_trainer(), steps, &mut rng)?;
                (m, log, "dqn")
            }
        };

        let tti = cfg.env.tti_ms;
        let rows: Vec<TrainingRow> = records
            .iter()
            .map(|r| {
                let m = &r.metrics;
                TrainingRow {
                    schema_version: TRAINING_SCHEMA.to_string(),
                    slot: m.slot,
                    n_prbs: m.n_prbs,
                    arrivals: m.arrivals,
                    completed: m.completed,
                    satisfied: m.satisfied,
                    p_sat: m.p_sat,
                    mean_delay_ms: m.mean_delay_ttis * tti,
                    std_delay_ms: m.std_delay_ttis * tti,
                    mean_snr_db: m.mean_snr_db,
                    reward: r.reward,
                    epsilon: cfg.qos.epsilon,
                    d_max_ms: cfg.qos.d_max_ms,
                    seed,
                }
            })
            .collect();
        let csv = csv_bytes(&rows)?;
        rd.write_metrics(TRAINING_CSV, &csv)?;

        let meta = CheckpointMeta {
            seed,
            algorithm: algorithm.to_string(),
            steps,
            config_hash: config_hash(cfg),
            reward_hash: sha256_hex(&serde_json::to_vec(&cfg.reward)?),
            actions: codec.deltas().to_vec(),
        };
        let model_path = rd.path().join(MODEL_FILE);
        save_checkpoint(&model_path, &Checkpoint::new(&model, meta))?;
        rd.files.push(MODEL_FILE.to_string());

        let (trailing_slots, p_sat, mean_delay_ms, mean_prbs, mean_reward) =
            summarize_tail(&records, tti);
        let summary = TrainingSummary {
            schema_version: TRAINING_SUMMARY_SCHEMA.to_string(),
            algorithm: algorithm.to_string(),
            seed,
            steps,
            trailing_slots,
            p_sat,
            mean_delay_ms,
            mean_prbs,
            mean_reward,
            target_p_sat: 1.0 - cfg.qos.epsilon,
            training_csv_sha256: sha256_hex(&csv),
        };
        rd.write(TRAINING_SUMMARY, &to_json_bytes(&summary)?)?;
        Ok(TrainingOutcome {
            model,
            records,
            summary,
        })
    })
}

/// Stored verdict of a reward-shape sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeReportRecord {
    pub schema_version: String,
    pub d_max_ms: f64,
    pub epsilon: f64,
    pub slots_per_point: u32,
    pub lambda: f64,
    /// Whether `lambda` came from the sweep's dual interval.
    pub lambda_calibrated: bool,
    pub spearman_p_sat: f64,
    pub argmax_n: Option<u32>,
    pub argmax_unique: bool,
    pub lln_argmax_n: Option<u32>,
    pub min_satisfying_n: Option<u32>,
    pub slope_below: f64,
    pub slope_above: f64,
    pub monotone_below: bool,
    pub monotone_above: bool,
    pub argmax_is_min_satisfying: bool,
    pub argmax_matches_lln: bool,
    pub pass: bool,
    pub failure: Option<String>,
}

pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    pub lambda: f64,
    pub lambda_calibrated: bool,
    /// Rank correlation of grant and satisfaction over all points.
    pub spearman: f64,
    pub report: ShapeReport,
}

/// Sweep constant grants over `[prb_min, prb_max]` and check the shape of
/// the stationary reward curve.
pub fn run_reward_sweep<E: Executor>(
    cfg: &ScenarioConfig,
    profile: Profile,
    dir: &Path,
    exec: &E,
) -> Result<SweepOutcome> {
    in_run_dir(dir, "sweep", cfg, profile, |rd| {
        let env_cfg = cfg.env_config()?;
        let coeffs = cfg.shaped_coeffs();
        let eps = cfg.qos.epsilon;
        let points = prb_sweep(&env_cfg, &cfg.sweep_config(), &coeffs, exec)?;
        let calibrated = if cfg.sweep.calibrate_lambda {
            dual_lambda(&points, eps, cfg.reward.prb_norm)
        } else {
            None
        };
        let lambda = calibrated.unwrap_or(cfg.reward.lambda);
        let params = cfg.lln_params(lambda)?;
        let report = validate_reward_shape(&points, eps, &coeffs, &params);
        let ns: Vec<f64> = points.iter().map(|p| f64::from(p.n_prbs)).collect();
        let ps: Vec<f64> = points.iter().map(|p| p.p_sat).collect();
        let rho = spearman(&ns, &ps);

        let rows: Vec<SweepRow> = points
            .iter()
            .map(|p| SweepRow {
                schema_version: SWEEP_SCHEMA.to_string(),
                n_prbs: p.n_prbs,
                p_sat: p.p_sat,
                mean_delay: p.mean_delay_ttis * cfg.env.tti_ms,
                lln_reward: p.lln(&params),
                shaped_reward: p.shaped,
            })
            .collect();
        rd.write(SWEEP_CSV, &csv_bytes(&rows)?)?;
        let record = ShapeReportRecord {
            schema_version: SHAPE_REPORT_SCHEMA.to_string(),
            d_max_ms: cfg.qos.d_max_ms,
            epsilon: eps,
            slots_per_point: cfg.sweep.slots,
            lambda,
            lambda_calibrated: calibrated.is_some(),
            spearman_p_sat: rho,
            argmax_n: report.argmax_n,
            argmax_unique: report.argmax_unique,
            lln_argmax_n: report.lln_argmax_n,
            min_satisfying_n: report.min_satisfying_n,
            slope_below: report.slope_below,
            slope_above: report.slope_above,
            monotone_below: report.monotone_below,
            monotone_above: report.monotone_above,
            argmax_is_min_satisfying: report.argmax_is_min_satisfying,
            argmax_matches_lln: report.argmax_matches_lln,
            pass: report.pass,
            failure: report.failure.clone(),
        };
        rd.write(SHAPE_REPORT, &to_json_bytes(&record)?)?;
        Ok(SweepOutcome {
            points,
            lambda,
            lambda_calibrated: calibrated.is_some(),
            spearman: rho,
            report,
        })
    })
}

#[derive(Serialize)]
struct ComparisonReportRecord {
    schema_version: String,
    eval_seed: u64,
    fixed_av: u32,
    fixed_max: u32,
    train_slots: u64,
    eval_slots: u32,
    rows: Vec<ComparisonRow>,
}

/// Train PDA and MD controllers and evaluate them next to the heuristic
/// and the two fixed grants, under `compare.load_pattern`.
pub fn run_comparison<E: Executor>(
    cfg: &ScenarioConfig,
    profile: Profile,
    dir: &Path,
    exec: &E,
) -> Result<ComparisonReport> {
    in_run_dir(dir, "compare", cfg, profile, |rd| {
        let mut env_cfg = cfg.env_config()?;
        env_cfg.load_pattern = cfg.compare.load_pattern.pattern();
        let report = core_comparison(
            &env_cfg,
            &cfg.shaped_coeffs(),
            &cfg.comparison_config(),
            exec,
        )?;
        let tti = cfg.env.tti_ms;
        let rows: Vec<ComparisonRow> = PolicyKind::ALL
            .iter()
            .filter_map(|&p| report.row(p).map(|r| (p, r)))
            .map(|(p, r)| ComparisonRow {
                schema_version: COMPARISON_SCHEMA.to_string(),
                policy: p.name().to_string(),
                mean_prbs: r.mean_prbs,
                p_sat: r.p_sat,
                mean_delay_ms: r.mean_delay * tti,
                std_delay_ms: r.std_delay * tti,
                mean_reward: r.mean_reward,
            })
            .collect();
        rd.write(COMPARISON_CSV, &csv_bytes(&rows)?)?;
        let record = ComparisonReportRecord {
            schema_version: COMPARISON_REPORT_SCHEMA.to_string(),
            eval_seed: report.eval_seed,
            fixed_av: report.calibration.fixed_av,
            fixed_max: report.calibration.fixed_max,
            train_slots: cfg.compare.train_slots,
            eval_slots: cfg.compare.eval_slots,
            rows,
        };
        rd.write(COMPARISON_REPORT, &to_json_bytes(&record)?)?;
        Ok(report)
    })
}

/// Generate and store an environment suite from `run.seed`.
pub fn run_gen_suite(
    cfg: &ScenarioConfig,
    profile: Profile,
    dir: &Path,
    n: usize,
) -> Result<EnvSuite> {
    in_run_dir(dir, "gen-suite", cfg, profile, |rd| {
        let suite = generate_env_suite(cfg.run.seed, n, cfg)?;
        rd.write(SUITE_FILE, &to_json_bytes(&suite)?)?;
        Ok(suite)
    })
}

#[derive(Serialize)]
struct FeatureRecord {
    d_max_ms: f64,
    epsilon: f64,
    k_tilde: f64,
    c_tilde: f64,
    t_tilde: f64,
}

#[derive(Serialize)]
struct MethodRecord {
    method: String,
    per_env: Vec<f64>,
    mean: f64,
}

/// Raw rewards only; `shift` is what the printed summary adds.
#[derive(Serialize)]
struct PersonalizationRecord {
    schema_version: String,
    master_seed: u64,
    shift: f64,
    beta: f64,
    t_episodes: u32,
    episode_slots: u32,
    features: Vec<FeatureRecord>,
    local_train_p_sat: Vec<f64>,
    local: MethodRecord,
    methods: Vec<MethodRecord>,
}

pub struct PersonalizationOutcome {
    pub suite: EnvSuite,
    pub report: StudyReport,
}

/// Draw a suite of `study.suite_size` environments, train one local model
/// per member and compare the configured personalization methods.
pub fn run_personalization<E: Executor>(
    cfg: &ScenarioConfig,
    profile: Profile,
    dir: &Path,
    exec: &E,
) -> Result<PersonalizationOutcome> {
    in_run_dir(dir, "personalize", cfg, profile, |rd| {
        let study = cfg.study_config()?;
        let suite = generate_env_suite(cfg.run.seed, cfg.study.suite_size, cfg)?;
        rd.write(SUITE_FILE, &to_json_bytes(&suite)?)?;
        let envs = suite
            .members
            .iter()
            .map(|m| {
                Ok(StudyEnv {
                    cfg: m.env_config()?,
                    reward: m.reward_fn()?,
                    codec: m.codec()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let report = personalization_study(&envs, &study, exec)?;

        rd.write(
            R_HAT_CSV,
            &matrix_csv_bytes(report.table.r_hat.iter().map(Vec::as_slice))?,
        )?;
        for m in &report.methods {
            let name = format!("alpha_{}.csv", m.method.name());
            rd.write(&name, &matrix_csv_bytes(m.alpha.rows())?)?;
        }
        let record = PersonalizationRecord {
            schema_version: PERSONALIZATION_SCHEMA.to_string(),
            master_seed: cfg.run.seed,
            shift: cfg.study.shift,
            beta: study.beta,
            t_episodes: study.t_episodes,
            episode_slots: study.episode_slots,
            features: report
                .features
                .iter()
                .map(|f| FeatureRecord {
                    d_max_ms: f.d_max_ms,
                    epsilon: f.epsilon,
                    k_tilde: f.k_tilde,
                    c_tilde: f.c_tilde,
                    t_tilde: f.t_tilde,
                })
                .collect(),
            local_train_p_sat: report.local_train_p_sat.clone(),
            local: MethodRecord {
                method: "local".to_string(),
                per_env: report.local.clone(),
                mean: report.local_mean,
            },
            methods: report
                .methods
                .iter()
                .map(|m| MethodRecord {
                    method: m.method.name().to_string(),
                    per_env: m.per_env.clone(),
                    mean: m.mean,
                })
                .collect(),
        };
        rd.write(PERSONALIZATION_REPORT, &to_json_bytes(&record)?)?;
        Ok(PersonalizationOutcome { suite, report })
    })
}
