use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::task::Task;
use crate::nn::{log_softmax, softmax, softmax_sample, AdamState, PolicyModel};
use crate::rng::Stream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgTrainerConfig {
    /// Slots per update segment.
    pub episode_len_slots: u32,
    pub discount: f64,
    /// Weight of the old value in the moving-average return baseline.
    pub baseline_decay: f64,
    pub use_baseline: bool,
    pub entropy_coeff: f64,
    pub lr: f64,
    /// Gradient passes over each collected segment.
    pub epochs: u32,
    /// Rescale each segment's advantages to unit standard deviation.
    pub normalize_advantages: bool,
}

impl Default for PgTrainerConfig {
    fn default() -> Self {
        PgTrainerConfig {
            episode_len_slots: 200,
            discount: 0.99,
            baseline_decay: 0.95,
            use_baseline: true,
            entropy_coeff: 0.01,
            lr: 3e-4,
            epochs: 1,
            normalize_advantages: false,
        }
    }
}

impl PgTrainerConfig {
    /// Settings that converge within a 3000-slot desk-scale run: short
    /// segments, a short credit horizon, several normalized passes per segment
    /// and enough entropy to keep the policy off the clamp bounds.
    pub fn desk() -> Self {
        PgTrainerConfig {
            episode_len_slots: 50,
            discount: 0.5,
            entropy_coeff: 0.05,
            lr: 5e-4,
            epochs: 4,
            normalize_advantages: true,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.episode_len_slots < 1 {
            return Err(Error::invalid("agent.episode_len_slots", "must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::invalid("agent.discount", "must lie in [0, 1)"));
        }
        if !(0.0..=1.0).contains(&self.baseline_decay) {
            return Err(Error::invalid("agent.baseline_decay", "must lie in [0, 1]"));
        }
        if !(self.entropy_coeff >= 0.0 && self.entropy_coeff.is_finite()) {
            return Err(Error::invalid(
                "agent.entropy_coeff",
                "must be finite and >= 0",
            ));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid("agent.lr", "must be positive"));
        }
        if self.epochs < 1 {
            return Err(Error::invalid("agent.epochs", "must be >= 1"));
        }
        Ok(())
    }
}

/// REINFORCE with a moving-average baseline and an entropy bonus.
///
/// The task is cut into segments of `episode_len_slots` steps. Each segment's
/// discounted returns are truncated at its end; the policy is updated by Adam
/// once the segment (or the step budget) is exhausted.
pub fn pg_train<T: Task>(
    task: &mut T,
    mut model: PolicyModel,
    cfg: &PgTrainerConfig,
    steps: u64,
    rng: &mut Stream,
) -> Result<(PolicyModel, Vec<T::Record>)> {
    cfg.validate()?;
    let n_out = model.arch().output_dim;
    let mut adam = AdamState::new(model.params().len(), cfg.lr);
    let mut log = Vec::with_capacity(steps as usize);
    let mut baseline: Option<f64> = None;
    let seg = u64::from(cfg.episode_len_slots);

    let mut obs_buf: Vec<Vec<f64>> = Vec::with_capacity(seg as usize);
    let mut act_buf: Vec<usize> = Vec::with_capacity(seg as usize);
    let mut rew_buf: Vec<f64> = Vec::with_capacity(seg as usize);
    let mut grad = vec![0.0; model.params().len()];

    for step in 0..steps {
        let obs = task.observe();
        let logits = model.forward(&obs)?;
        let (a, _) = softmax_sample(&logits, rng);
        if a >= n_out {
            return Err(Error::InvalidAction {
                index: a,
                len: n_out,
            });
        }
        let (r, rec) = task.act(a)?;
        if !r.is_finite() {
            return Err(Error::NonFiniteReward { slot: step });
        }
        log.push(rec);
        obs_buf.push(obs);
        act_buf.push(a);
        rew_buf.push(r);

        if rew_buf.len() as u64 == seg || step + 1 == steps {
            let mut returns = vec![0.0; rew_buf.len()];
            let mut g = 0.0;
            for t in (0..rew_buf.len()).rev() {
                g = rew_buf[t] + cfg.discount * g;
                returns[t] = g;
            }
            let mean_ret = returns.iter().sum::<f64>() / returns.len() as f64;
            let b = if cfg.use_baseline {
                *baseline.get_or_insert(mean_ret)
            } else {
                0.0
            };
            let mut adv: Vec<f64> = returns.iter().map(|g| g - b).collect();
            if cfg.normalize_advantages && adv.len() > 1 {
                let m = adv.iter().sum::<f64>() / adv.len() as f64;
                let sd =
                    (adv.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / adv.len() as f64).sqrt();
                if sd > 1e-12 {
                    adv.iter_mut().for_each(|x| *x /= sd);
                }
            }
            if cfg.use_baseline {
                baseline = Some(cfg.baseline_decay * b + (1.0 - cfg.baseline_decay) * mean_ret);
            }

            let inv_t = 1.0 / rew_buf.len() as f64;
            for _ in 0..cfg.epochs {
                grad.iter_mut().for_each(|x| *x = 0.0);
                for t in 0..obs_buf.len() {
                    let trace = model.trace(&obs_buf[t])?;
                    let p = softmax(trace.output());
                    let lp = log_softmax(trace.output());
                    let ent: f64 = -p.iter().zip(&lp).map(|(p, l)| p * l).sum::<f64>();
                    // Ascent direction on the logits, negated for Adam's descent.
                    let up: Vec<f64> = (0..n_out)
                        .map(|k| {
                            let onehot = if k == act_buf[t] { 1.0 } else { 0.0 };
                            let pg = adv[t] * (onehot - p[k]);
                            let eg = -p[k] * (lp[k] + ent);
                            -(pg + cfg.entropy_coeff * eg)
                        })
                        .collect();
                    model.accumulate_gradient(&trace, &up, inv_t, &mut grad)?;
                }
                adam.step(model.params_mut(), &grad)?;
            }
            obs_buf.clear();
            act_buf.clear();
            rew_buf.clear();
        }
    }
    Ok((model, log))
}
