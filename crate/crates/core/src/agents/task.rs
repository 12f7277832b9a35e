use alloc::vec::Vec;

use super::codec::ActionCodec;
use crate::env::{SliceEnv, SlotMetrics};
use crate::reward::RewardFn;
use crate::Result;

/// A sequential decision problem driven by a discrete-action policy.
pub trait Task {
    /// What the trainer logs for each step.
    type Record;

    fn observe(&self) -> Vec<f64>;

    /// Take `action`, returning the reward and a log record.
    fn act(&mut self, action: usize) -> Result<(f64, Self::Record)>;
}

/// One logged slicing slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotRecord {
    pub action: usize,
    pub reward: f64,
    pub metrics: SlotMetrics,
}

/// A slice environment controlled through differential actions.
pub struct SliceTask {
    pub env: SliceEnv,
    pub codec: ActionCodec,
    pub reward: RewardFn,
}

impl SliceTask {
    pub fn new(env: SliceEnv, codec: ActionCodec, reward: RewardFn) -> Self {
        SliceTask { env, codec, reward }
    }
}

impl Task for SliceTask {
    type Record = SlotRecord;

    fn observe(&self) -> Vec<f64> {
        self.env.observation().features
    }

    fn act(&mut self, action: usize) -> Result<(f64, SlotRecord)> {
        let n = self.codec.apply(self.env.current_prbs(), action)?;
        let (_, metrics) = self.env.step(n)?;
        let reward = self.reward.evaluate(&metrics, &self.env.config().qos)?;
        Ok((
            reward,
            SlotRecord {
                action,
                reward,
                metrics,
            },
        ))
    }
}
