//! Slice controllers: the differential action codec, policy-gradient and DQN
//! trainers, rule-based baselines and closed-loop evaluation.

mod baselines;
mod codec;
mod dqn;
mod eval;
mod pg;
mod task;

pub use baselines::{calibrate_fixed_policies, heuristic_policy, FixedCalibration};
pub use codec::{apply_action, ActionCodec};
pub use dqn::{dqn_train, epsilon_at, DqnTrainerConfig, ReplayBuffer, Transition};
pub use eval::{
    evaluate_policy, evaluate_with_trace, Controller, EvalReport, FixedController,
    GreedyController, HeuristicController, SampledController,
};
pub use pg::{pg_train, PgTrainerConfig};
pub use task::{SliceTask, SlotRecord, Task};
