//! Exhaustive PRB sweeps and the reward-shape certificate built on them.
//!
//! Every sweep point runs a fresh environment with the same seed and a
//! constant grant, so points differ only in the grant (common random numbers).

use alloc::string::String;
use alloc::vec::Vec;

use crate::env::{EnvConfig, SliceEnv};
use crate::exec::Executor;
#[allow(unused_imports)]
use num_traits::Float;

use crate::reward::{delta, shaped_reward, RewardParams, ShapedRewardCoeffs};
use crate::stats::{ls_slope, Running};
use crate::{Error, Result};

/// Stationary statistics of one constant-grant run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepPoint {
    pub n_prbs: u32,
    pub slots: u32,
    pub arrivals: u64,
    pub completed: u64,
    pub satisfied: u64,
    /// Pooled satisfied / completed over the run.
    pub p_sat: f64,
    pub mean_delay_ttis: f64,
    /// Slot-averaged PRBs the scheduler spent per TTI.
    pub mean_prbs_used: f64,
    /// Slot-averaged arrival count normalizer.
    pub mean_ewma_arrivals: f64,
    /// Shaped reward at the pooled satisfaction margin.
    pub shaped: f64,
    /// Slot-averaged shaped reward.
    pub shaped_slot_mean: f64,
}

impl SweepPoint {
    /// Slot-averaged LLN constraint term per unit of Lagrange weight, i.e.
    /// `(eps * sat - (1 - eps) * unsat) / ewma` averaged over the run.
    pub fn lln_constraint(&self, epsilon: f64) -> f64 {
        if self.mean_ewma_arrivals <= 0.0 || self.slots == 0 {
            return delta(self.p_sat, epsilon);
        }
        let per_slot = |x: u64| x as f64 / f64::from(self.slots);
        let sat = per_slot(self.satisfied);
        let unsat = per_slot(self.completed - self.satisfied);
        (epsilon * sat - (1.0 - epsilon) * unsat) / self.mean_ewma_arrivals
    }

    /// Slot-averaged LLN reward, recovered from the pooled counts.
    pub fn lln(&self, params: &RewardParams) -> f64 {
        params.lambda * self.lln_constraint(params.epsilon)
            - f64::from(self.n_prbs) / params.prb_norm
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub seed: u64,
    /// Slots measured per point.
    pub slots: u32,
    /// Slots run before measuring.
    pub warmup_slots: u32,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seed: 0x5eed,
            slots: 500,
            warmup_slots: 2,
        }
    }
}

/// Run the environment at a constant grant and collect pooled statistics.
pub fn run_constant(
    cfg: &EnvConfig,
    n_prbs: u32,
    sweep: &SweepConfig,
    coeffs: &ShapedRewardCoeffs,
) -> Result<SweepPoint> {
    let mut env = SliceEnv::new(cfg.clone(), sweep.seed)?;
    for _ in 0..sweep.warmup_slots {
        env.step(n_prbs)?;
    }
    let mut pt = SweepPoint {
        n_prbs,
        slots: sweep.slots,
        ..Default::default()
    };
    let mut delay_sum = 0.0;
    let mut used = Running::default();
    let mut ewma = Running::default();
    let mut shaped = Running::default();
    for _ in 0..sweep.slots {
        let (_, m) = env.step(n_prbs)?;
        pt.arrivals += u64::from(m.arrivals);
        pt.completed += u64::from(m.completed);
        pt.satisfied += u64::from(m.satisfied);
        delay_sum += m.mean_delay_ttis * f64::from(m.completed);
        used.push(m.mean_prbs_used);
        ewma.push(m.ewma_arrivals);
        shaped.push(shaped_reward(
            delta(m.p_sat, cfg.qos.epsilon),
            n_prbs,
            coeffs,
        ));
    }
    pt.p_sat = if pt.completed > 0 {
        pt.satisfied as f64 / pt.completed as f64
    } else if pt.arrivals == 0 {
        1.0
    } else {
        0.0
    };
    pt.mean_delay_ttis = if pt.completed > 0 {
        delay_sum / pt.completed as f64
    } else {
        0.0
    };
    pt.mean_prbs_used = used.mean();
    pt.mean_ewma_arrivals = ewma.mean();
    pt.shaped = shaped_reward(delta(pt.p_sat, cfg.qos.epsilon), n_prbs, coeffs);
    pt.shaped_slot_mean = shaped.mean();
    Ok(pt)
}

/// Sweep every grant in `[prb_min, prb_max]`.
pub fn prb_sweep<E: Executor>(
    cfg: &EnvConfig,
    sweep: &SweepConfig,
    coeffs: &ShapedRewardCoeffs,
    exec: &E,
) -> Result<Vec<SweepPoint>> {
    let grants: Vec<u32> = (cfg.prb_min..=cfg.prb_max).collect();
    exec.map(grants, |n| run_constant(cfg, n, sweep, coeffs))
        .into_iter()
        .collect()
}

/// Smallest swept grant whose pooled satisfaction meets `1 - eps`.
pub fn minimal_satisfying(points: &[SweepPoint], epsilon: f64) -> Option<u32> {
    points
        .iter()
        .find(|p| p.p_sat >= 1.0 - epsilon)
        .map(|p| p.n_prbs)
}

/// Index of the first maximum.
fn argmax_by(points: &[SweepPoint], f: impl Fn(&SweepPoint) -> f64) -> Option<(u32, bool)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        let v = f(p);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, b)| {
        let unique = points.iter().enumerate().all(|(j, p)| j == i || f(p) < b);
        (points[i].n_prbs, unique)
    })
}

/// Open range of Lagrange weights for which the stationary LLN reward has
/// its unique maximum at the grant `n_star`.
///
/// Returns `None` when `n_star` is not on the upper concave hull of the LLN
/// constraint curve, i.e. no weight makes it the unconstrained optimum.
pub fn lagrange_interval(
    points: &[SweepPoint],
    n_star: u32,
    epsilon: f64,
    prb_norm: f64,
) -> Option<(f64, f64)> {
    let star = points.iter().find(|p| p.n_prbs == n_star)?;
    let a_star = star.lln_constraint(epsilon);
    let mut lo: f64 = 0.0;
    let mut hi = f64::INFINITY;
    for p in points {
        // Need lambda * (a_star - a) > (n_star - n) / prb_norm.
        let dn = (f64::from(star.n_prbs) - f64::from(p.n_prbs)) / prb_norm;
        let da = a_star - p.lln_constraint(epsilon);
        if p.n_prbs < star.n_prbs {
            if da <= 0.0 {
                return None;
            }
            lo = lo.max(dn / da);
        } else if p.n_prbs > star.n_prbs && da < 0.0 {
            hi = hi.min(dn / da);
        }
    }
    (lo < hi).then_some((lo, hi))
}

/// The grants the certificate ranges over. A zero grant serves nothing and
/// costs nothing, so it is left out as a degenerate arm.
fn served(points: &[SweepPoint]) -> &[SweepPoint] {
    let k = points.iter().take_while(|p| p.n_prbs == 0).count();
    &points[k..]
}

/// Lagrange weight at the geometric centre of [`lagrange_interval`] for the
/// minimal satisfying nonzero grant (twice the lower bound when unbounded
/// above).
pub fn dual_lambda(points: &[SweepPoint], epsilon: f64, prb_norm: f64) -> Option<f64> {
    let points = served(points);
    let n_star = minimal_satisfying(points, epsilon)?;
    let (lo, hi) = lagrange_interval(points, n_star, epsilon, prb_norm)?;
    Some(if !hi.is_finite() {
        (2.0 * lo).max(1.0)
    } else if lo > 0.0 {
        (lo * hi).sqrt()
    } else {
        hi / 2.0
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    pub argmax_n: Option<u32>,
    pub argmax_unique: bool,
    pub lln_argmax_n: Option<u32>,
    pub min_satisfying_n: Option<u32>,
    pub lambda: f64,
    pub slope_below: f64,
    pub slope_above: f64,
    pub monotone_below: bool,
    pub monotone_above: bool,
    pub argmax_is_min_satisfying: bool,
    pub argmax_matches_lln: bool,
    pub pass: bool,
    /// First violated condition, if any.
    pub failure: Option<String>,
}

/// Certify that the shaped reward keeps the constrained optimum and escapes
/// the region where the satisfaction term is flat.
///
/// Only nonzero grants are considered. Passes iff (a) the stationary shaped
/// reward has a positive least-squares slope over grants below the knee,
/// (b) a negative slope above it, (c) its unique argmax is the minimal
/// satisfying grant, and (d) that argmax agrees with the LLN reward's.
pub fn validate_reward_shape(
    points: &[SweepPoint],
    epsilon: f64,
    coeffs: &ShapedRewardCoeffs,
    params: &RewardParams,
) -> ShapeReport {
    let points = served(points);
    let min_sat = minimal_satisfying(points, epsilon);
    let shaped_at = |p: &SweepPoint| shaped_reward(delta(p.p_sat, epsilon), p.n_prbs, coeffs);
    let (argmax_n, argmax_unique) = match argmax_by(points, shaped_at) {
        Some((n, u)) => (Some(n), u),
        None => (None, false),
    };
    let lln_argmax_n = argmax_by(points, |p| p.lln(params)).map(|(n, _)| n);

    let split = |below: bool| -> (Vec<f64>, Vec<f64>) {
        points
            .iter()
            .filter(|p| match min_sat {
                Some(k) if below => p.n_prbs < k,
                Some(k) => p.n_prbs >= k,
                None => below,
            })
            .map(|p| (f64::from(p.n_prbs), shaped_at(p)))
            .unzip()
    };
    let (xb, yb) = split(true);
    let (xa, ya) = split(false);
    let slope_below = ls_slope(&xb, &yb);
    let slope_above = ls_slope(&xa, &ya);
    let monotone_below = xb.len() < 2 || slope_below > 0.0;
    let monotone_above = xa.len() < 2 || slope_above < 0.0;
    let argmax_is_min_satisfying = argmax_unique && min_sat.is_some() && argmax_n == min_sat;
    let argmax_matches_lln = argmax_n.is_some() && argmax_n == lln_argmax_n;

    let failure = if !monotone_below {
        Some(alloc::format!(
            "monotone_below: slope {slope_below:.4} is not positive"
        ))
    } else if !monotone_above {
        Some(alloc::format!(
            "monotone_above: slope {slope_above:.4} is not negative"
        ))
    } else if !argmax_is_min_satisfying {
        Some(alloc::format!(
            "argmax: shaped argmax {argmax_n:?} (unique: {argmax_unique}) != minimal satisfying {min_sat:?}"
        ))
    } else if !argmax_matches_lln {
        Some(alloc::format!(
            "lln: shaped argmax {argmax_n:?} != lln argmax {lln_argmax_n:?}"
        ))
    } else {
        None
    };
    ShapeReport {
        argmax_n,
        argmax_unique,
        lln_argmax_n,
        min_satisfying_n: min_sat,
        lambda: params.lambda,
        slope_below,
        slope_above,
        monotone_below,
        monotone_above,
        argmax_is_min_satisfying,
        argmax_matches_lln,
        pass: failure.is_none(),
        failure,
    }
}

impl ShapeReport {
    pub fn into_result(self) -> Result<ShapeReport> {
        match &self.failure {
            Some(f) => Err(Error::RewardShape(f.clone())),
            None => Ok(self),
        }
    }
}
