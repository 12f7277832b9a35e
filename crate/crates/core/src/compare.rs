//! Closed-loop comparison of the learned and rule-based slice controllers.
//!
//! PDA (shaped reward) and MD (mean-delay reward) share the trainer, the
//! initial weights and the training traffic; all five policies are then
//! scored on one evaluation environment with the shaped reward.

use alloc::vec;
use alloc::vec::Vec;

use crate::agents::{
    calibrate_fixed_policies, evaluate_policy, pg_train, ActionCodec, EvalReport, FixedCalibration,
    FixedController, GreedyController, HeuristicController, PgTrainerConfig, SampledController,
    SliceTask,
};
use crate::env::{EnvConfig, SliceEnv};
use crate::exec::Executor;
use crate::nn::{MlpArchitecture, PolicyModel};
use crate::reward::{RewardFn, ShapedRewardCoeffs};
use crate::rng::{substream, substream_seed};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Pda,
    Md,
    Heuristic,
    FixedAv,
    FixedMax,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Pda,
        PolicyKind::Md,
        PolicyKind::Heuristic,
        PolicyKind::FixedAv,
        PolicyKind::FixedMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Pda => "pda_drl",
            PolicyKind::Md => "md_drl",
            PolicyKind::Heuristic => "heuristic",
            PolicyKind::FixedAv => "fixed_av",
            PolicyKind::FixedMax => "fixed_max",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonConfig {
    pub seed: u64,
    pub trainer: PgTrainerConfig,
    pub train_slots: u64,
    pub hidden: Vec<usize>,
    /// PRB increments of the learned policies' action set.
    pub deltas: Vec<i32>,
    pub eval_slots: u32,
    pub calibration_slots: u32,
    pub heuristic_step_up: u32,
    pub heuristic_step_down: u32,
    /// Sample actions from the learned policies instead of taking the mode.
    pub sampled_eval: bool,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig {
            seed: 0,
            trainer: PgTrainerConfig::desk(),
            train_slots: 20_000,
            hidden: vec![128, 64],
            deltas: ActionCodec::standard(0, 0).deltas().to_vec(),
            eval_slots: 1000,
            calibration_slots: 1000,
            heuristic_step_up: 3,
            heuristic_step_down: 3,
            sampled_eval: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub policy: PolicyKind,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub calibration: FixedCalibration,
    /// One row per policy in [`PolicyKind::ALL`] order.
    pub rows: Vec<ComparisonRow>,
    pub eval_seed: u64,
}

impl ComparisonReport {
    pub fn row(&self, p: PolicyKind) -> Option<&EvalReport> {
        self.rows.iter().find(|r| r.policy == p).map(|r| &r.report)
    }
}

/// Train PDA and MD on `env`, calibrate the fixed grants on the evaluation
/// traffic, and evaluate all five policies on the same seeded environment.
///
/// Fixed-Max is calibrated at the pattern's peak load with the evaluation
/// seed, so its zero-miss guarantee refers to the evaluated channel.
pub fn run_comparison<E: Executor>(
    env: &EnvConfig,
    shaped: &ShapedRewardCoeffs,
    cc: &ComparisonConfig,
    exec: &E,
) -> Result<ComparisonReport> {
    let codec = ActionCodec::new(cc.deltas.clone(), env.prb_min, env.prb_max)?;
    let arch = MlpArchitecture::new(env.observation_dim(), cc.hidden.clone(), codec.len())?;
    let init = PolicyModel::init(arch, &mut substream(cc.seed, "init"));
    let shaped_fn = RewardFn::Shaped(*shaped);
    let md_fn = RewardFn::mean_delay_default(&env.qos);

    let jobs = vec![("pda", shaped_fn), ("md", md_fn)];
    let trained: Vec<Result<PolicyModel>> = exec.map(jobs, |(label, reward)| {
        let sim = SliceEnv::new(env.clone(), substream_seed(cc.seed, "train-env"))?;
        let mut task = SliceTask::new(sim, codec.clone(), reward);
        let mut rng = substream(cc.seed, label);
        pg_train(
            &mut task,
            init.clone(),
            &cc.trainer,
            cc.train_slots,
            &mut rng,
        )
        .map(|(m, _)| m)
    });
    let mut trained = trained.into_iter();
    let pda = trained.next().expect("two jobs")?;
    let md = trained.next().expect("two jobs")?;

    let eval_seed = substream_seed(cc.seed, "eval");
    let calibration = calibrate_fixed_policies(env, cc.calibration_slots, eval_seed)?;

    let learned = |model: &PolicyModel| -> Result<EvalReport> {
        if cc.sampled_eval {
            let mut c = SampledController {
                model,
                codec: &codec,
                rng: substream(cc.seed, "eval-policy"),
            };
            evaluate_policy(&mut c, env, eval_seed, cc.eval_slots, &shaped_fn)
        } else {
            let mut c = GreedyController {
                model,
                codec: &codec,
            };
            evaluate_policy(&mut c, env, eval_seed, cc.eval_slots, &shaped_fn)
        }
    };
    let mut rows = Vec::with_capacity(PolicyKind::ALL.len());
    for policy in PolicyKind::ALL {
        let report = match policy {
            PolicyKind::Pda => learned(&pda)?,
            PolicyKind::Md => learned(&md)?,
            PolicyKind::Heuristic => {
                let mut c = HeuristicController {
                    qos: env.qos,
                    step_up: cc.heuristic_step_up,
                    step_down: cc.heuristic_step_down,
                    prb_min: env.prb_min,
                    prb_max: env.prb_max,
                };
                evaluate_policy(&mut c, env, eval_seed, cc.eval_slots, &shaped_fn)?
            }
            PolicyKind::FixedAv => evaluate_policy(
                &mut FixedController(calibration.fixed_av),
                env,
                eval_seed,
                cc.eval_slots,
                &shaped_fn,
            )?,
            PolicyKind::FixedMax => evaluate_policy(
                &mut FixedController(calibration.fixed_max),
                env,
                eval_seed,
                cc.eval_slots,
                &shaped_fn,
            )?,
        };
        rows.push(ComparisonRow { policy, report });
    }
    Ok(ComparisonReport {
        calibration,
        rows,
        eval_seed,
    })
}
