use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::task::Task;
use crate::nn::{argmax, AdamState, PolicyModel};
use crate::rng::Stream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqnTrainerConfig {
    pub lr: f64,
    pub discount: f64,
    pub batch: usize,
    pub replay_capacity: usize,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_steps: u64,
    /// Steps between copies of the online network into the target network.
    pub target_sync_interval: u64,
}

impl Default for DqnTrainerConfig {
    fn default() -> Self {
        DqnTrainerConfig {
            lr: 1e-4,
            discount: 0.9,
            batch: 64,
            replay_capacity: 10_000,
            eps_start: 0.5,
            eps_end: 0.05,
            eps_decay_steps: 2000,
            target_sync_interval: 100,
        }
    }
}

impl DqnTrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid("agent.lr", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.discount) {
            return Err(Error::invalid("agent.discount", "must lie in [0, 1)"));
        }
        if self.batch < 1 || self.replay_capacity < self.batch {
            return Err(Error::invalid(
                "agent.batch",
                "need 1 <= batch <= replay_capacity",
            ));
        }
        if !(0.0 <= self.eps_end && self.eps_end <= self.eps_start && self.eps_start <= 1.0) {
            return Err(Error::invalid(
                "agent.eps_start",
                "need 0 <= eps_end <= eps_start <= 1",
            ));
        }
        if self.target_sync_interval < 1 {
            return Err(Error::invalid("agent.target_sync_interval", "must be >= 1"));
        }
        Ok(())
    }
}

/// Linear exploration schedule from `eps_start` to `eps_end`.
pub fn epsilon_at(cfg: &DqnTrainerConfig, step: u64) -> f64 {
    if cfg.eps_decay_steps == 0 || step >= cfg.eps_decay_steps {
        return cfg.eps_end;
    }
    let f = step as f64 / cfg.eps_decay_steps as f64;
    cfg.eps_start + (cfg.eps_end - cfg.eps_start) * f
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_obs: Vec<f64>,
}

/// Fixed-capacity ring of transitions with uniform sampling.
#[derive(Debug, Clone, Default)]
pub struct ReplayBuffer {
    items: Vec<Transition>,
    capacity: usize,
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer {
            items: Vec::with_capacity(capacity.min(1 << 16)),
            capacity: capacity.max(1),
            head: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    /// `n` indices drawn uniformly with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<&Transition> {
        (0..n)
            .map(|_| &self.items[rng.random_range(0..self.items.len())])
            .collect()
    }
}

/// Deep Q-learning with uniform replay, an epsilon-greedy schedule and a
/// periodically synchronized target network. The task is treated as
/// continuing (no terminal states). Updates start once the replay holds a
/// full batch.
pub fn dqn_train<T: Task>(
    task: &mut T,
    mut model: PolicyModel,
    cfg: &DqnTrainerConfig,
    steps: u64,
    rng: &mut Stream,
) -> Result<(PolicyModel, Vec<T::Record>, u64)> {
    cfg.validate()?;
    let n_out = model.arch().output_dim;
    let mut target = model.clone();
    let mut adam = AdamState::new(model.params().len(), cfg.lr);
    let mut replay = ReplayBuffer::new(cfg.replay_capacity);
    let mut log = Vec::with_capacity(steps as usize);
    let mut grad = vec![0.0; model.params().len()];
    let mut updates = 0u64;

    let mut obs = task.observe();
    for step in 0..steps {
        let a = if rng.random::<f64>() < epsilon_at(cfg, step) {
            rng.random_range(0..n_out)
        } else {
            model.greedy(&obs)?
        };
        let (r, rec) = task.act(a)?;
        if !r.is_finite() {
            return Err(Error::NonFiniteReward { slot: step });
        }
        log.push(rec);
        let next = task.observe();
        replay.push(Transition {
            obs: core::mem::replace(&mut obs, next.clone()),
            action: a,
            reward: r,
            next_obs: next,
        });

        if replay.len() >= cfg.batch {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / cfg.batch as f64;
            for t in replay.sample(cfg.batch, rng) {
                let q_next = target.forward(&t.next_obs)?;
                let y = t.reward + cfg.discount * q_next[argmax(&q_next)];
                let trace = model.trace(&t.obs)?;
                let err = trace.output()[t.action] - y;
                let mut up = vec![0.0; n_out];
                up[t.action] = 2.0 * err;
                model.accumulate_gradient(&trace, &up, scale, &mut grad)?;
            }
            adam.step(model.params_mut(), &grad)?;
            updates += 1;
        }
        if (step + 1) % cfg.target_sync_interval == 0 {
            target = model.clone();
        }
    }
    Ok((model, log, updates))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::MlpArchitecture;
    use crate::rng::substream;

    #[test]
    fn epsilon_schedule() {
        let c = DqnTrainerConfig {
            eps_decay_steps: 100,
            ..Default::default()
        };
        assert_eq!(epsilon_at(&c, 0), 0.5);
        assert!((epsilon_at(&c, 50) - 0.275).abs() < 1e-12);
        assert_eq!(epsilon_at(&c, 100), 0.05);
        assert_eq!(epsilon_at(&c, 10_000), 0.05);
    }

    struct Const;
    impl Task for Const {
        type Record = ();
        fn observe(&self) -> Vec<f64> {
            vec![1.0, 0.5]
        }
        fn act(&mut self, a: usize) -> Result<(f64, ())> {
            Ok((if a == 1 { 1.0 } else { 0.0 }, ()))
        }
    }

    #[test]
    fn warm_up_skips_updates() {
        let arch = MlpArchitecture::new(2, vec![4], 3).unwrap();
        let m0 = PolicyModel::init(arch, &mut substream(1, "i"));
        let (m, log, updates) = dqn_train(
            &mut Const,
            m0.clone(),
            &DqnTrainerConfig::default(),
            63,
            &mut substream(1, "a"),
        )
        .unwrap();
        assert_eq!(log.len(), 63);
        assert_eq!(updates, 0);
        assert_eq!(m, m0);
    }

    #[test]
    fn learns_constant_bandit() {
        let arch = MlpArchitecture::new(2, vec![16], 3).unwrap();
        let m0 = PolicyModel::init(arch, &mut substream(2, "i"));
        let cfg = DqnTrainerConfig {
            lr: 1e-3,
            eps_decay_steps: 500,
            ..Default::default()
        };
        let (m, _, updates) =
            dqn_train(&mut Const, m0, &cfg, 1500, &mut substream(2, "a")).unwrap();
        assert!(updates > 0);
        assert_eq!(m.greedy(&[1.0, 0.5]).unwrap(), 1);
    }

    #[test]
    fn replay_ring_overwrites_oldest() {
        let mut b = ReplayBuffer::new(2);
        for i in 0..3 {
            b.push(Transition {
                obs: vec![],
                action: i,
                reward: 0.0,
                next_obs: vec![],
            });
        }
        assert_eq!(b.len(), 2);
        let acts: Vec<usize> = b.items.iter().map(|t| t.action).collect();
        assert_eq!(acts, vec![2, 1]);
    }
}
