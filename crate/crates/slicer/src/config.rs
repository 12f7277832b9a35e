//! Scenario configuration files.
//!
//! A scenario file is a JSON object laid over the defaults of a [`Profile`]:
//! keys it omits keep the profile's values, keys the schema does not know are
//! rejected, and every error names the offending key path (`qos.epsilon`,
//! `users[2].doppler_hz`). Arrays such as `users` replace the default array
//! as a whole.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use slicer_core::agents::{ActionCodec, DqnTrainerConfig, PgTrainerConfig};
use slicer_core::channel::{CqiTable, RadioConfig};
use slicer_core::compare::ComparisonConfig;
use slicer_core::env::{EnvConfig, QosSpec, UserConfig};
use slicer_core::personalization::{KernelSign, Method, StudyConfig};
use slicer_core::reward::{RewardFn, RewardParams, ShapedRewardCoeffs};
use slicer_core::sweep::SweepConfig;
use slicer_core::traffic::{LoadKind, LoadPattern, LogNormalParams, SizeClass, UserTrafficProfile};

use crate::{HarnessError, Result};

pub const CONFIG_SCHEMA: &str = "slicer-config-v1";

/// Default scale of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// 200-TTI slots and 3000-slot training runs.
    #[default]
    Desk,
    /// 1000-TTI slots (1 s at 1 ms TTIs) and 20000-slot training runs.
    Paper,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Desk => "desk",
            Profile::Paper => "paper",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            other => Err(format!(
                "unknown profile `{other}` (expected desk or paper)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosBlock {
    /// Delay bound; must be a whole number of TTIs.
    pub d_max_ms: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadKindName {
    Constant,
    Ramp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadBlock {
    pub kind: LoadKindName,
    pub peak_multiplier: f64,
    pub period_slots: u64,
}

impl LoadBlock {
    pub fn pattern(&self) -> LoadPattern {
        match self.kind {
            LoadKindName::Constant => LoadPattern {
                kind: LoadKind::Constant,
                peak_multiplier: self.peak_multiplier,
                period_slots: self.period_slots,
            },
            LoadKindName::Ramp => LoadPattern::ramp(self.peak_multiplier, self.period_slots),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvBlock {
    pub tti_ms: f64,
    /// TTIs per slicing slot (`H`).
    pub slot_ttis: u32,
    pub h_history: usize,
    pub prb_min: u32,
    pub prb_max: u32,
    pub initial_prbs: u32,
    pub drop_factor: u32,
    pub overload_limit: usize,
    pub ewma_decay: f64,
    pub load_pattern: LoadBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioBlock {
    pub tx_power_watts: f64,
    pub noise_watts: f64,
    pub prb_bandwidth_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CqiBlock {
    pub thresholds_db: Vec<f64>,
    pub efficiencies: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserBlock {
    pub doppler_hz: f64,
    /// Mean SNR in dB (the large-scale offset over unit-power fading).
    pub snr_db: f64,
    /// Mean packet arrivals per slicing slot.
    pub rate: f64,
    /// `small`, `medium` or `large`.
    pub size_class: String,
    /// Log-normal size parameters; the class defaults when absent.
    #[serde(default)]
    pub size_mu_ln: Option<f64>,
    #[serde(default)]
    pub size_sigma_ln: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    Shaped,
    Lln,
    MeanDelay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardBlock {
    pub kind: RewardKind,
    pub gamma_p: f64,
    /// `null` scales the default with epsilon (`zeta_p * eps = 6`).
    #[serde(default)]
    pub zeta_p: Option<f64>,
    pub nu_p: f64,
    pub gamma_n: f64,
    pub zeta_n: f64,
    pub nu_n: f64,
    pub r_max: f64,
    pub prb_norm: f64,
    /// Lagrange weight of the LLN reward.
    pub lambda: f64,
    /// Mean-delay reward weights.
    pub c_d: f64,
    pub c_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Pg,
    Dqn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgBlock {
    pub episode_len_slots: u32,
    pub discount: f64,
    pub baseline_decay: f64,
    pub use_baseline: bool,
    pub entropy_coeff: f64,
    pub lr: f64,
    pub epochs: u32,
    pub normalize_advantages: bool,
}

impl From<PgTrainerConfig> for PgBlock {
    fn from(c: PgTrainerConfig) -> Self {
        PgBlock {
            episode_len_slots: c.episode_len_slots,
            discount: c.discount,
            baseline_decay: c.baseline_decay,
            use_baseline: c.use_baseline,
            entropy_coeff: c.entropy_coeff,
            lr: c.lr,
            epochs: c.epochs,
            normalize_advantages: c.normalize_advantages,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DqnBlock {
    pub lr: f64,
    pub discount: f64,
    pub batch: usize,
    pub replay_capacity: usize,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_steps: u64,
    pub target_sync_interval: u64,
}

impl From<DqnTrainerConfig> for DqnBlock {
    fn from(c: DqnTrainerConfig) -> Self {
        DqnBlock {
            lr: c.lr,
            discount: c.discount,
            batch: c.batch,
            replay_capacity: c.replay_capacity,
            eps_start: c.eps_start,
            eps_end: c.eps_end,
            eps_decay_steps: c.eps_decay_steps,
            target_sync_interval: c.target_sync_interval,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentBlock {
    pub algorithm: Algorithm,
    pub hidden: Vec<usize>,
    /// Signed PRB increments; symmetric around and including 0.
    pub actions: Vec<i32>,
    pub pg: PgBlock,
    pub dqn: DqnBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    /// Training slots.
    pub steps: u64,
    pub seed: u64,
    pub out_dir: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// Measured slots per grant.
    pub slots: u32,
    pub warmup_slots: u32,
    /// Certify with the Lagrange weight that centres the minimal satisfying
    /// grant's dual interval instead of `reward.lambda`.
    pub calibrate_lambda: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareBlock {
    pub train_slots: u64,
    pub eval_slots: u32,
    pub calibration_slots: u32,
    pub heuristic_step_up: u32,
    pub heuristic_step_down: u32,
    /// Sample the learned policies' actions instead of taking the mode.
    pub sampled_eval: bool,
    /// Load pattern of the comparison, replacing `env.load_pattern`.
    pub load_pattern: LoadBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSignName {
    Similarity,
    Printed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyBlock {
    pub suite_size: usize,
    pub train_slots: u64,
    pub t_episodes: u32,
    pub episode_slots: u32,
    pub beta: f64,
    pub sigma_scale: f64,
    pub kernel_sign: KernelSignName,
    /// Any of `fedavg`, `feature`, `model_weight`, `reward`.
    pub methods: Vec<String>,
    /// Positive offset added to rewards in presentation output.
    pub shift: f64,
}

/// A complete, validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: String,
    pub qos: QosBlock,
    pub env: EnvBlock,
    pub radio: RadioBlock,
    pub cqi: CqiBlock,
    pub users: Vec<UserBlock>,
    pub reward: RewardBlock,
    pub agent: AgentBlock,
    pub run: RunBlock,
    pub sweep: SweepBlock,
    pub compare: CompareBlock,
    pub study: StudyBlock,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::for_profile(Profile::Desk)
    }
}

fn core_err(e: slicer_core::Error) -> HarnessError {
    match e {
        slicer_core::Error::InvalidParameter { name, reason } => HarnessError::config(name, reason),
        other => HarnessError::Core(other),
    }
}

fn check(ok: bool, key: &str, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(HarnessError::config(key, message))
    }
}

impl ScenarioConfig {
    /// The documented defaults of a profile: the ENV1 service (`D_max = 5`
    /// ms, `eps = 0.1`) over four users.
    pub fn for_profile(profile: Profile) -> Self {
        let env = EnvConfig::desk_env1();
        let (slot_ttis, steps, pg, sweep_slots) = match profile {
            Profile::Desk => (200, 3000, PgTrainerConfig::desk(), 500),
            Profile::Paper => (1000, 20_000, PgTrainerConfig::default(), 100),
        };
        // Rates are per slot; keep the per-TTI load of the desk profile.
        let rate_scale = f64::from(slot_ttis) / f64::from(env.slot_ttis);
        let shaped = ShapedRewardCoeffs::default();
        let md = RewardFn::mean_delay_default(&env.qos);
        let (c_d, c_n) = match md {
            RewardFn::MeanDelay { c_d, c_n, .. } => (c_d, c_n),
            _ => unreachable!("mean_delay_default builds a mean-delay reward"),
        };
        let compare = ComparisonConfig::default();
        let study = StudyConfig::default();
        ScenarioConfig {
            schema_version: CONFIG_SCHEMA.to_string(),
            qos: QosBlock {
                d_max_ms: f64::from(env.qos.d_max_ttis) * env.radio.tti_seconds * 1000.0,
                epsilon: env.qos.epsilon,
            },
            env: EnvBlock {
                tti_ms: env.radio.tti_seconds * 1000.0,
                slot_ttis,
                h_history: env.history,
                prb_min: env.prb_min,
                prb_max: env.prb_max,
                initial_prbs: env.initial_prbs,
                drop_factor: env.drop_factor,
                overload_limit: env.overload_limit,
                ewma_decay: env.ewma_decay,
                load_pattern: LoadBlock {
                    kind: LoadKindName::Constant,
                    peak_multiplier: 1.0,
                    period_slots: 2,
                },
            },
            radio: RadioBlock {
                tx_power_watts: env.radio.tx_power_watts,
                noise_watts: env.radio.noise_watts,
                prb_bandwidth_hz: env.radio.prb_bandwidth_hz,
            },
            cqi: CqiBlock {
                thresholds_db: env.cqi.thresholds_db().to_vec(),
                efficiencies: env.cqi.efficiencies().to_vec(),
            },
            users: env
                .users
                .iter()
                .map(|u| UserBlock {
                    doppler_hz: u.doppler_hz,
                    snr_db: u.large_scale_db,
                    rate: u.traffic.arrival_rate_per_slot * rate_scale,
                    size_class: u.traffic.size_class.name().to_string(),
                    size_mu_ln: None,
                    size_sigma_ln: None,
                })
                .collect(),
            reward: RewardBlock {
                kind: RewardKind::Shaped,
                gamma_p: shaped.gamma_p,
                zeta_p: None,
                nu_p: shaped.nu_p,
                gamma_n: shaped.gamma_n,
                zeta_n: shaped.zeta_n,
                nu_n: shaped.nu_n,
                r_max: shaped.r_max,
                prb_norm: shaped.prb_norm,
                lambda: 10.0,
                c_d,
                c_n,
            },
            agent: AgentBlock {
                algorithm: Algorithm::Pg,
                hidden: vec![128, 64],
                actions: ActionCodec::standard(0, 0).deltas().to_vec(),
                pg: pg.into(),
                dqn: DqnTrainerConfig::default().into(),
            },
            run: RunBlock {
                steps,
                seed: 0,
                out_dir: "runs".to_string(),
            },
            sweep: SweepBlock {
                slots: sweep_slots,
                warmup_slots: 2,
                calibrate_lambda: true,
            },
            compare: CompareBlock {
                train_slots: compare.train_slots,
                eval_slots: compare.eval_slots,
                calibration_slots: compare.calibration_slots,
                heuristic_step_up: compare.heuristic_step_up,
                heuristic_step_down: compare.heuristic_step_down,
                sampled_eval: compare.sampled_eval,
                load_pattern: LoadBlock {
                    kind: LoadKindName::Ramp,
                    peak_multiplier: 1.5,
                    period_slots: 200,
                },
            },
            study: StudyBlock {
                suite_size: 10,
                train_slots: study.train_slots,
                t_episodes: study.t_episodes,
                episode_slots: study.episode_slots,
                beta: study.beta,
                sigma_scale: study.sigma_scale,
                kernel_sign: KernelSignName::Similarity,
                methods: study.methods.iter().map(|m| m.name().to_string()).collect(),
                shift: 100.0,
            },
        }
    }

    /// Check every key; the first violation is reported with its path.
    pub fn validate(&self) -> Result<()> {
        check(
            self.schema_version == CONFIG_SCHEMA,
            "schema_version",
            "unsupported schema version",
        )?;
        check(
            self.qos.epsilon > 0.0 && self.qos.epsilon < 1.0,
            "qos.epsilon",
            "must lie in (0, 1)",
        )?;
        check(
            self.env.tti_ms > 0.0 && self.env.tti_ms.is_finite(),
            "env.tti_ms",
            "must be positive",
        )?;
        self.d_max_ttis()?;
        check(!self.users.is_empty(), "users", "need at least one user")?;
        for (i, u) in self.users.iter().enumerate() {
            let key = |f: &str| format!("users[{i}].{f}");
            check(
                u.doppler_hz >= 0.0 && u.doppler_hz.is_finite(),
                &key("doppler_hz"),
                "must be finite and >= 0",
            )?;
            check(u.snr_db.is_finite(), &key("snr_db"), "must be finite")?;
            check(
                u.rate >= 0.0 && u.rate.is_finite(),
                &key("rate"),
                "must be finite and >= 0",
            )?;
            check(
                SizeClass::from_name(&u.size_class).is_some(),
                &key("size_class"),
                "must be small, medium or large",
            )?;
            if let Some(mu) = u.size_mu_ln {
                check(mu.is_finite(), &key("size_mu_ln"), "must be finite")?;
            }
            if let Some(s) = u.size_sigma_ln {
                check(
                    s >= 0.0 && s.is_finite(),
                    &key("size_sigma_ln"),
                    "must be finite and >= 0",
                )?;
            }
        }
        let r = &self.reward;
        for (name, v) in [
            ("reward.gamma_p", r.gamma_p),
            ("reward.nu_p", r.nu_p),
            ("reward.gamma_n", r.gamma_n),
            ("reward.zeta_n", r.zeta_n),
            ("reward.nu_n", r.nu_n),
            ("reward.c_d", r.c_d),
            ("reward.c_n", r.c_n),
        ] {
            check(v.is_finite(), name, "must be finite")?;
        }
        if let Some(z) = r.zeta_p {
            check(z.is_finite(), "reward.zeta_p", "must be finite")?;
        }
        check(
            r.lambda > 0.0 && r.lambda.is_finite(),
            "reward.lambda",
            "must be positive",
        )?;
        check(
            self.agent.hidden.iter().all(|&w| w >= 1),
            "agent.hidden",
            "widths must be >= 1",
        )?;
        check(self.run.steps >= 1, "run.steps", "must be >= 1")?;
        check(self.sweep.slots >= 1, "sweep.slots", "must be >= 1")?;
        check(
            self.compare.eval_slots >= 1,
            "compare.eval_slots",
            "must be >= 1",
        )?;
        check(
            self.compare.calibration_slots >= 1000,
            "compare.calibration_slots",
            "calibration needs at least 1000 slots",
        )?;
        check(
            self.compare.heuristic_step_up >= 1 && self.compare.heuristic_step_down >= 1,
            "compare.heuristic_step_up",
            "heuristic steps must be >= 1",
        )?;
        self.compare
            .load_pattern
            .pattern()
            .validate()
            .map_err(|_| {
                HarnessError::config(
                    "compare.load_pattern",
                    "peak_multiplier must be >= 1 and period_slots >= 2",
                )
            })?;
        let s = &self.study;
        check(s.suite_size >= 1, "study.suite_size", "must be >= 1")?;
        check(s.t_episodes >= 1, "study.t_episodes", "must be >= 1")?;
        check(s.episode_slots >= 1, "study.episode_slots", "must be >= 1")?;
        check(
            s.beta >= 0.0 && s.beta.is_finite(),
            "study.beta",
            "must be finite and >= 0",
        )?;
        check(
            s.sigma_scale > 0.0 && s.sigma_scale.is_finite(),
            "study.sigma_scale",
            "must be positive",
        )?;
        check(s.shift.is_finite(), "study.shift", "must be finite")?;
        self.methods()?;

        // Everything the core checks on construction.
        self.env_config()?;
        self.shaped_coeffs().validate().map_err(core_err)?;
        self.codec()?;
        self.pg_trainer().validate().map_err(core_err)?;
        self.dqn_trainer().validate().map_err(core_err)?;
        Ok(())
    }

    pub fn d_max_ttis(&self) -> Result<u32> {
        let d = self.qos.d_max_ms / self.env.tti_ms;
        let r = d.round();
        check(
            d.is_finite() && r >= 1.0 && (d - r).abs() < 1e-9 && r <= f64::from(u32::MAX),
            "qos.d_max_ms",
            "must be a positive whole number of TTIs",
        )?;
        Ok(r as u32)
    }

    pub fn env_config(&self) -> Result<EnvConfig> {
        let radio = RadioConfig {
            tx_power_watts: self.radio.tx_power_watts,
            noise_watts: self.radio.noise_watts,
            prb_bandwidth_hz: self.radio.prb_bandwidth_hz,
            tti_seconds: self.env.tti_ms / 1000.0,
        };
        let cqi = CqiTable::new(
            self.cqi.thresholds_db.clone(),
            self.cqi.efficiencies.clone(),
        )
        .map_err(core_err)?;
        let users = self
            .users
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let class = SizeClass::from_name(&u.size_class).ok_or_else(|| {
                    HarnessError::config(
                        format!("users[{i}].size_class"),
                        "must be small, medium or large",
                    )
                })?;
                let mut traffic = UserTrafficProfile::new(u.rate, class);
                let d = class.default_params();
                traffic.size_params = LogNormalParams {
                    mu_ln: u.size_mu_ln.unwrap_or(d.mu_ln),
                    sigma_ln: u.size_sigma_ln.unwrap_or(d.sigma_ln),
                };
                Ok(UserConfig {
                    doppler_hz: u.doppler_hz,
                    large_scale_db: u.snr_db,
                    traffic,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let cfg = EnvConfig {
            qos: QosSpec {
                d_max_ttis: self.d_max_ttis()?,
                epsilon: self.qos.epsilon,
            },
            radio,
            cqi,
            users,
            load_pattern: self.env.load_pattern.pattern(),
            slot_ttis: self.env.slot_ttis,
            prb_min: self.env.prb_min,
            prb_max: self.env.prb_max,
            initial_prbs: self.env.initial_prbs,
            history: self.env.h_history,
            drop_factor: self.env.drop_factor,
            overload_limit: self.env.overload_limit,
            ewma_decay: self.env.ewma_decay,
        };
        cfg.validate().map_err(core_err)?;
        Ok(cfg)
    }

    /// Shaped-reward coefficients; an unset `zeta_p` scales with epsilon.
    pub fn shaped_coeffs(&self) -> ShapedRewardCoeffs {
        let r = &self.reward;
        ShapedRewardCoeffs {
            gamma_p: r.gamma_p,
            zeta_p: r
                .zeta_p
                .unwrap_or_else(|| ShapedRewardCoeffs::for_epsilon(self.qos.epsilon).zeta_p),
            nu_p: r.nu_p,
            gamma_n: r.gamma_n,
            zeta_n: r.zeta_n,
            nu_n: r.nu_n,
            r_max: r.r_max,
            prb_norm: r.prb_norm,
        }
    }

    pub fn lln_params(&self, lambda: f64) -> Result<RewardParams> {
        RewardParams::new(lambda, self.qos.epsilon, self.reward.prb_norm).map_err(core_err)
    }

    /// The reward selected by `reward.kind`.
    pub fn reward_fn(&self) -> Result<RewardFn> {
        Ok(match self.reward.kind {
            RewardKind::Shaped => RewardFn::Shaped(self.shaped_coeffs()),
            RewardKind::Lln => RewardFn::Lln(self.lln_params(self.reward.lambda)?),
            RewardKind::MeanDelay => RewardFn::MeanDelay {
                d_target_ttis: self.d_max_ttis()?,
                c_d: self.reward.c_d,
                c_n: self.reward.c_n,
                prb_norm: self.reward.prb_norm,
            },
        })
    }

    pub fn codec(&self) -> Result<ActionCodec> {
        ActionCodec::new(
            self.agent.actions.clone(),
            self.env.prb_min,
            self.env.prb_max,
        )
        .map_err(core_err)
    }

    pub fn pg_trainer(&self) -> PgTrainerConfig {
        let p = &self.agent.pg;
        PgTrainerConfig {
            episode_len_slots: p.episode_len_slots,
            discount: p.discount,
            baseline_decay: p.baseline_decay,
            use_baseline: p.use_baseline,
            entropy_coeff: p.entropy_coeff,
            lr: p.lr,
            epochs: p.epochs,
            normalize_advantages: p.normalize_advantages,
        }
    }

    pub fn dqn_trainer(&self) -> DqnTrainerConfig {
        let d = &self.agent.dqn;
        DqnTrainerConfig {
            lr: d.lr,
            discount: d.discount,
            batch: d.batch,
            replay_capacity: d.replay_capacity,
            eps_start: d.eps_start,
            eps_end: d.eps_end,
            eps_decay_steps: d.eps_decay_steps,
            target_sync_interval: d.target_sync_interval,
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            seed: self.run.seed,
            slots: self.sweep.slots,
            warmup_slots: self.sweep.warmup_slots,
        }
    }

    pub fn comparison_config(&self) -> ComparisonConfig {
        ComparisonConfig {
            seed: self.run.seed,
            trainer: self.pg_trainer(),
            train_slots: self.compare.train_slots,
            hidden: self.agent.hidden.clone(),
            deltas: self.agent.actions.clone(),
            eval_slots: self.compare.eval_slots,
            calibration_slots: self.compare.calibration_slots,
            heuristic_step_up: self.compare.heuristic_step_up,
            heuristic_step_down: self.compare.heuristic_step_down,
            sampled_eval: self.compare.sampled_eval,
        }
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        check(
            !self.study.methods.is_empty(),
            "study.methods",
            "must not be empty",
        )?;
        self.study
            .methods
            .iter()
            .enumerate()
            .map(|(i, m)| {
                Method::from_name(m).ok_or_else(|| {
                    HarnessError::config(
                        format!("study.methods[{i}]"),
                        "must be one of fedavg, feature, model_weight, reward",
                    )
                })
            })
            .collect()
    }

    pub fn study_config(&self) -> Result<StudyConfig> {
        Ok(StudyConfig {
            seed: self.run.seed,
            trainer: self.pg_trainer(),
            train_slots: self.study.train_slots,
            hidden: self.agent.hidden.clone(),
            t_episodes: self.study.t_episodes,
            episode_slots: self.study.episode_slots,
            beta: self.study.beta,
            sigma_scale: self.study.sigma_scale,
            kernel_sign: match self.study.kernel_sign {
                KernelSignName::Similarity => KernelSign::Similarity,
                KernelSignName::Printed => KernelSign::Printed,
            },
            methods: self.methods()?,
        })
    }

    /// Canonical serialized form; its hash identifies the scenario.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Lay `top` over `base`: objects merge key by key, anything else replaces.
fn overlay(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => overlay(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parse a scenario from JSON text over the defaults of `profile`.
pub fn parse_config(text: &str, profile: Profile) -> Result<ScenarioConfig> {
    let top: Value = serde_json::from_str(text)?;
    if !top.is_object() {
        return Err(HarnessError::config(
            ".",
            "the scenario must be a JSON object",
        ));
    }
    let mut merged = serde_json::to_value(ScenarioConfig::for_profile(profile))?;
    overlay(&mut merged, top);
    let cfg: ScenarioConfig = serde_path_to_error::deserialize(merged).map_err(|e| {
        let message = e.inner().to_string();
        HarnessError::config(e.path().to_string(), message)
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Read and validate a scenario file.
pub fn load_config(path: &Path, profile: Profile) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_config(&text, profile)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_profile_default() {
        assert_eq!(
            parse_config("{}", Profile::Desk).unwrap(),
            ScenarioConfig::default()
        );
        let paper = parse_config("{}", Profile::Paper).unwrap();
        assert_eq!(paper.env.slot_ttis, 1000);
        assert_eq!(paper.run.steps, 20_000);
    }

    #[test]
    fn defaults_match_the_desk_environment() {
        let cfg = ScenarioConfig::default();
        assert_eq!(cfg.env_config().unwrap(), EnvConfig::desk_env1());
        assert_eq!(cfg.shaped_coeffs(), ShapedRewardCoeffs::for_epsilon(0.1));
        assert_eq!(cfg.pg_trainer(), PgTrainerConfig::desk());
    }

    #[test]
    fn paper_profile_keeps_the_per_tti_load() {
        let desk = ScenarioConfig::for_profile(Profile::Desk)
            .env_config()
            .unwrap();
        let paper = ScenarioConfig::for_profile(Profile::Paper)
            .env_config()
            .unwrap();
        let per_tti = |c: &EnvConfig| c.mean_arrivals_per_slot() / f64::from(c.slot_ttis);
        assert!((per_tti(&desk) - per_tti(&paper)).abs() < 1e-12);
    }

    #[test]
    fn errors_name_the_key() {
        let key = |text: &str| {
            parse_config(text, Profile::Desk)
                .unwrap_err()
                .config_key()
                .map(str::to_string)
        };
        assert_eq!(
            key(r#"{"qos": {"epsilon": 1.5}}"#).as_deref(),
            Some("qos.epsilon")
        );
        assert_eq!(
            key(r#"{"qos": {"epsilonn": 0.1}}"#).as_deref(),
            Some("qos.epsilonn")
        );
        assert_eq!(key(r#"{"bogus": 1}"#).as_deref(), Some("bogus"));
        assert_eq!(
            key(r#"{"qos": {"d_max_ms": 2.5}}"#).as_deref(),
            Some("qos.d_max_ms")
        );
        assert_eq!(
            key(
                r#"{"users": [{"doppler_hz": -1, "snr_db": 30, "rate": 1, "size_class": "small"}]}"#
            )
            .as_deref(),
            Some("users[0].doppler_hz")
        );
        assert_eq!(
            key(r#"{"users": [{"doppler_hz": 5, "snr_db": 30, "rate": 1, "size_class": "huge"}]}"#)
                .as_deref(),
            Some("users[0].size_class")
        );
        assert_eq!(
            key(r#"{"env": {"prb_max": "many"}}"#).as_deref(),
            Some("env.prb_max")
        );
        assert_eq!(
            key(r#"{"agent": {"actions": [1, 2]}}"#).as_deref(),
            Some("agent.actions")
        );
        assert_eq!(
            key(r#"{"study": {"methods": ["x"]}}"#).as_deref(),
            Some("study.methods[0]")
        );
        assert!(matches!(
            parse_config("{", Profile::Desk),
            Err(HarnessError::Json(_))
        ));
    }

    #[test]
    fn serialized_config_reloads_equal() {
        let text = r#"{"qos": {"d_max_ms": 10, "epsilon": 0.3}, "reward": {"zeta_p": 12.5}, "run": {"seed": 7}}"#;
        let cfg = parse_config(text, Profile::Desk).unwrap();
        assert_eq!(cfg.qos.epsilon, 0.3);
        assert_eq!(cfg.shaped_coeffs().zeta_p, 12.5);
        let again = parse_config(&cfg.to_canonical_json(), Profile::Paper).unwrap();
        assert_eq!(again, cfg);
    }
}
