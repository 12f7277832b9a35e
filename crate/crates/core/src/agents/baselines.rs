#[allow(unused_imports)]
use num_traits::Float;

use crate::env::{EnvConfig, QosSpec, SliceEnv, SlotMetrics};
use crate::stats::Running;
use crate::traffic::LoadPattern;
use crate::{Error, Result};

/// Raise the grant by `step_up` while the slot missed the satisfaction
/// target, otherwise lower it by `step_down`; clamped to `[prb_min, prb_max]`.
pub fn heuristic_policy(
    slot: &SlotMetrics,
    qos: &QosSpec,
    current_prbs: u32,
    step_up: u32,
    step_down: u32,
    prb_min: u32,
    prb_max: u32,
) -> u32 {
    let next = if slot.p_sat < qos.target() {
        current_prbs.saturating_add(step_up)
    } else {
        current_prbs.saturating_sub(step_down)
    };
    next.clamp(prb_min, prb_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedCalibration {
    pub fixed_av: u32,
    pub fixed_max: u32,
}

fn satisfies_all(cfg: &EnvConfig, n: u32, horizon: u32, seed: u64) -> Result<bool> {
    let mut env = SliceEnv::new(cfg.clone(), seed)?;
    for _ in 0..horizon {
        let (_, m) = env.step(n)?;
        if m.satisfied != m.completed {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Calibrate the two fixed-grant baselines.
///
/// `fixed_av` is the rounded-up mean number of PRBs the scheduler spends when
/// granted `prb_max` under the configured load. `fixed_max` is the smallest
/// grant (binary search) under which every packet meets its deadline over the
/// horizon with all rates held at the load pattern's peak.
pub fn calibrate_fixed_policies(
    cfg: &EnvConfig,
    horizon_slots: u32,
    seed: u64,
) -> Result<FixedCalibration> {
    if horizon_slots < 1000 {
        return Err(Error::invalid(
            "horizon_slots",
            "calibration needs at least 1000 slots",
        ));
    }
    let mut env = SliceEnv::new(cfg.clone(), seed)?;
    let mut used = Running::default();
    for _ in 0..horizon_slots {
        let (_, m) = env.step(cfg.prb_max)?;
        used.push(m.mean_prbs_used);
    }
    let fixed_av = (used.mean() - 1e-9).ceil().max(0.0) as u32;
    let fixed_av = fixed_av.clamp(cfg.prb_min, cfg.prb_max);

    let mut peak = cfg.with_load_scale(cfg.load_pattern.peak());
    peak.load_pattern = LoadPattern::CONSTANT;
    if !satisfies_all(&peak, cfg.prb_max, horizon_slots, seed)? {
        return Err(Error::Infeasible {
            prb_max: cfg.prb_max,
        });
    }
    let (mut lo, mut hi) = (cfg.prb_min, cfg.prb_max);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if satisfies_all(&peak, mid, horizon_slots, seed)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(FixedCalibration {
        fixed_av,
        fixed_max: lo,
    })
}
