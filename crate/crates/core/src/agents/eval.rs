use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::baselines::heuristic_policy;
use super::codec::ActionCodec;
use crate::env::{EnvConfig, QosSpec, SliceEnv, SlotMetrics};
use crate::nn::{softmax_sample, PolicyModel};
use crate::reward::RewardFn;
use crate::rng::Stream;
use crate::stats::Running;
use crate::{Error, Result};

/// Chooses the grant for the next slot.
pub trait Controller {
    fn decide(&mut self, obs: &[f64], last: Option<&SlotMetrics>, current_prbs: u32)
        -> Result<u32>;
}

/// Takes the network's highest-scoring action.
pub struct GreedyController<'a> {
    pub model: &'a PolicyModel,
    pub codec: &'a ActionCodec,
}

impl Controller for GreedyController<'_> {
    fn decide(&mut self, obs: &[f64], _: Option<&SlotMetrics>, current: u32) -> Result<u32> {
        self.codec.apply(current, self.model.greedy(obs)?)
    }
}

/// Samples from the network's softmax policy.
pub struct SampledController<'a> {
    pub model: &'a PolicyModel,
    pub codec: &'a ActionCodec,
    pub rng: Stream,
}

impl Controller for SampledController<'_> {
    fn decide(&mut self, obs: &[f64], _: Option<&SlotMetrics>, current: u32) -> Result<u32> {
        let (a, _) = softmax_sample(&self.model.forward(obs)?, &mut self.rng);
        self.codec.apply(current, a)
    }
}

pub struct FixedController(pub u32);

impl Controller for FixedController {
    fn decide(&mut self, _: &[f64], _: Option<&SlotMetrics>, _: u32) -> Result<u32> {
        Ok(self.0)
    }
}

pub struct HeuristicController {
    pub qos: QosSpec,
    pub step_up: u32,
    pub step_down: u32,
    pub prb_min: u32,
    pub prb_max: u32,
}

impl Controller for HeuristicController {
    fn decide(&mut self, _: &[f64], last: Option<&SlotMetrics>, current: u32) -> Result<u32> {
        Ok(match last {
            Some(m) => heuristic_policy(
                m,
                &self.qos,
                current,
                self.step_up,
                self.step_down,
                self.prb_min,
                self.prb_max,
            ),
            None => current,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalReport {
    pub slots: u32,
    pub mean_prbs: f64,
    /// Pooled satisfied / completed.
    pub p_sat: f64,
    /// Completion-weighted, in TTIs.
    pub mean_delay: f64,
    pub std_delay: f64,
    pub mean_reward: f64,
    pub completed: u64,
    pub satisfied: u64,
}

/// Run a controller closed-loop on a fresh environment.
pub fn evaluate_policy<C: Controller + ?Sized>(
    ctrl: &mut C,
    cfg: &EnvConfig,
    seed: u64,
    slots: u32,
    reward: &RewardFn,
) -> Result<EvalReport> {
    let (report, _) = evaluate_with_trace(ctrl, cfg, seed, slots, reward)?;
    Ok(report)
}

/// [`evaluate_policy`] that also returns every slot's metrics.
pub fn evaluate_with_trace<C: Controller + ?Sized>(
    ctrl: &mut C,
    cfg: &EnvConfig,
    seed: u64,
    slots: u32,
    reward: &RewardFn,
) -> Result<(EvalReport, Vec<SlotMetrics>)> {
    let mut env = SliceEnv::new(cfg.clone(), seed)?;
    let mut last: Option<SlotMetrics> = None;
    let mut trace = Vec::with_capacity(slots as usize);
    let mut prbs = Running::default();
    let mut rewards = Running::default();
    let (mut completed, mut satisfied) = (0u64, 0u64);
    let (mut s1, mut s2) = (0.0, 0.0);
    for i in 0..slots {
        let obs = env.observation();
        let n = ctrl
            .decide(&obs.features, last.as_ref(), env.current_prbs())?
            .clamp(cfg.prb_min, cfg.prb_max);
        let (_, m) = env.step(n)?;
        let r = reward.evaluate(&m, &cfg.qos)?;
        if !r.is_finite() {
            return Err(Error::NonFiniteReward { slot: u64::from(i) });
        }
        rewards.push(r);
        prbs.push(f64::from(n));
        completed += u64::from(m.completed);
        satisfied += u64::from(m.satisfied);
        let c = f64::from(m.completed);
        s1 += c * m.mean_delay_ttis;
        s2 += c * (m.std_delay_ttis * m.std_delay_ttis + m.mean_delay_ttis * m.mean_delay_ttis);
        trace.push(m);
        last = Some(m);
    }
    let (mean_delay, std_delay) = if completed > 0 {
        let c = completed as f64;
        let mu = s1 / c;
        (mu, (s2 / c - mu * mu).max(0.0).sqrt())
    } else {
        (0.0, 0.0)
    };
    let p_sat = if completed > 0 {
        satisfied as f64 / completed as f64
    } else {
        1.0
    };
    Ok((
        EvalReport {
            slots,
            mean_prbs: prbs.mean(),
            p_sat,
            mean_delay,
            std_delay,
            mean_reward: rewards.mean(),
            completed,
            satisfied,
        },
        trace,
    ))
}
