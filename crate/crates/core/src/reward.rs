//! Reward functions for the slice controller.
//!
//! * [`lln_reward`]: per-packet `u1`/`u0` rewards normalized by the expected
//!   arrival count, minus the PRB cost. Its long-run mean is the Lagrangian
//!   `lambda (Pr(d <= D_max) - (1 - eps)) - E[N] / prb_norm`.
//! * [`shaped_reward`]: the two-branch shaped reward on the satisfaction
//!   margin `delta`, clipped to `[-r_max, 0]`.
//! * [`mean_delay_reward`]: a mean-delay tracking baseline.

#[allow(unused_imports)]
use num_traits::Float;

use crate::env::{QosSpec, SlotMetrics};
use crate::{Error, Result};

/// Satisfaction margin: measured satisfaction minus the `1 - eps` target.
pub fn delta(p_sat: f64, epsilon: f64) -> f64 {
    p_sat - (1.0 - epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardParams {
    /// Lagrange weight on the satisfaction constraint.
    pub lambda: f64,
    pub epsilon: f64,
    pub prb_norm: f64,
}

impl RewardParams {
    pub fn new(lambda: f64, epsilon: f64, prb_norm: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("reward.lambda", "must be positive"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::invalid("qos.epsilon", "must lie in (0, 1)"));
        }
        if !(prb_norm > 0.0) {
            return Err(Error::invalid("reward.prb_norm", "must be positive"));
        }
        Ok(RewardParams {
            lambda,
            epsilon,
            prb_norm,
        })
    }

    /// Reward of a packet that met its deadline.
    pub fn u1(&self) -> f64 {
        self.lambda * self.epsilon
    }

    /// Reward of a packet that missed its deadline.
    pub fn u0(&self) -> f64 {
        -self.lambda * (1.0 - self.epsilon)
    }
}

/// Per-slot reward whose stationary mean is the constrained problem's
/// Lagrangian. Packets are counted when they complete.
pub fn lln_reward(slot: &SlotMetrics, params: &RewardParams) -> Result<f64> {
    if !(slot.ewma_arrivals > 0.0) {
        return Err(Error::NoArrivals(slot.ewma_arrivals));
    }
    let sat = f64::from(slot.satisfied);
    let unsat = f64::from(slot.completed - slot.satisfied);
    Ok(
        (params.u1() * sat + params.u0() * unsat) / slot.ewma_arrivals
            - f64::from(slot.n_prbs) / params.prb_norm,
    )
}

/// Closed-form stationary value of [`lln_reward`].
pub fn lagrangian(p_sat: f64, mean_prbs: f64, params: &RewardParams) -> f64 {
    params.lambda * delta(p_sat, params.epsilon) - mean_prbs / params.prb_norm
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapedRewardCoeffs {
    pub gamma_p: f64,
    pub zeta_p: f64,
    pub nu_p: f64,
    pub gamma_n: f64,
    pub zeta_n: f64,
    pub nu_n: f64,
    pub r_max: f64,
    pub prb_norm: f64,
}

impl Default for ShapedRewardCoeffs {
    fn default() -> Self {
        ShapedRewardCoeffs {
            gamma_p: 2.0,
            zeta_p: 60.0,
            nu_p: -6.0,
            gamma_n: 100.0,
            zeta_n: -10.0,
            nu_n: -10.0,
            r_max: 100.0,
            prb_norm: 10.0,
        }
    }
}

impl ShapedRewardCoeffs {
    /// Defaults with `zeta_p` scaled so that `zeta_p * eps` stays at its
    /// `eps = 0.1` value: the over-satisfaction penalty then depends on the
    /// margin relative to the allowed violation rate.
    pub fn for_epsilon(epsilon: f64) -> Self {
        let d = Self::default();
        ShapedRewardCoeffs {
            zeta_p: d.zeta_p * 0.1 / epsilon,
            ..d
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.gamma_p,
            self.zeta_p,
            self.nu_p,
            self.gamma_n,
            self.zeta_n,
            self.nu_n,
        ];
        if all.iter().any(|x| x.is_nan()) {
            return Err(Error::invalid("reward", "coefficients must not be NaN"));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::invalid("reward.r_max", "must be positive"));
        }
        if !(self.prb_norm > 0.0 && self.prb_norm.is_finite()) {
            return Err(Error::invalid("reward.prb_norm", "must be positive"));
        }
        Ok(())
    }
}

/// Two-branch shaped reward, clipped to `[-r_max, 0]`.
///
/// With `n = n_prbs / prb_norm`: when the target is met (`delta >= 0`) the
/// reward is `-gamma_p delta - exp(zeta_p delta + nu_p) n^2`, penalizing both
/// over-satisfaction and PRB use. Otherwise it is
/// `gamma_n delta + exp(zeta_n delta + nu_n) n`, which grows with the grant
/// while the target is missed.
pub fn shaped_reward(d: f64, n_prbs: u32, c: &ShapedRewardCoeffs) -> f64 {
    let n = f64::from(n_prbs) / c.prb_norm;
    let r = if d >= 0.0 {
        -d * c.gamma_p - (c.zeta_p * d + c.nu_p).exp() * n * n
    } else {
        d * c.gamma_n + (c.zeta_n * d + c.nu_n).exp() * n
    };
    if r.is_nan() {
        return -c.r_max;
    }
    r.clamp(-c.r_max, 0.0)
}

/// Quadratic mean-delay tracking penalty plus a linear PRB cost.
pub fn mean_delay_reward(
    slot: &SlotMetrics,
    d_target_ttis: u32,
    c_d: f64,
    c_n: f64,
    prb_norm: f64,
) -> f64 {
    let cost = c_n * f64::from(slot.n_prbs) / prb_norm;
    if slot.completed == 0 {
        return -c_d - cost;
    }
    let target = f64::from(d_target_ttis.max(1));
    let e = (slot.mean_delay_ttis - target) / target;
    -c_d * e * e - cost
}

/// A reward function selected by configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardFn {
    Shaped(ShapedRewardCoeffs),
    Lln(RewardParams),
    MeanDelay {
        d_target_ttis: u32,
        c_d: f64,
        c_n: f64,
        prb_norm: f64,
    },
}

impl RewardFn {
    pub fn mean_delay_default(qos: &QosSpec) -> Self {
        RewardFn::MeanDelay {
            d_target_ttis: qos.d_max_ttis,
            c_d: 10.0,
            c_n: 1.0,
            prb_norm: 10.0,
        }
    }

    pub fn evaluate(&self, slot: &SlotMetrics, qos: &QosSpec) -> Result<f64> {
        match self {
            RewardFn::Shaped(c) => Ok(shaped_reward(
                delta(slot.p_sat, qos.epsilon),
                slot.n_prbs,
                c,
            )),
            // Before any arrival only the PRB cost is defined.
            RewardFn::Lln(p) if slot.ewma_arrivals <= 0.0 => {
                Ok(-f64::from(slot.n_prbs) / p.prb_norm)
            }
            RewardFn::Lln(p) => lln_reward(slot, p),
            RewardFn::MeanDelay {
                d_target_ttis,
                c_d,
                c_n,
                prb_norm,
            } => Ok(mean_delay_reward(
                slot,
                *d_target_ttis,
                *c_d,
                *c_n,
                *prb_norm,
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn delta_examples() {
        assert!(delta(0.9, 0.1).abs() < 1e-12);
        assert!((delta(1.0, 0.1) - 0.1).abs() < 1e-12);
        assert!((delta(0.72, 0.1) + 0.18).abs() < 1e-12);
    }

    fn slot(completed: u32, satisfied: u32, n: u32, ewma: f64) -> SlotMetrics {
        SlotMetrics {
            completed,
            satisfied,
            n_prbs: n,
            ewma_arrivals: ewma,
            ..Default::default()
        }
    }

    #[test]
    fn lln_examples() {
        let p = RewardParams::new(10.0, 0.1, 10.0).unwrap();
        assert!((p.u1() - 1.0).abs() < 1e-12);
        assert!((p.u0() + 9.0).abs() < 1e-12);
        assert!((p.u1() - p.u0() - p.lambda).abs() < 1e-12);
        assert!((lln_reward(&slot(40, 40, 0, 40.0), &p).unwrap() - 1.0).abs() < 1e-12);
        assert!((lln_reward(&slot(40, 0, 0, 40.0), &p).unwrap() + 9.0).abs() < 1e-12);
        assert_eq!(
            lln_reward(&slot(1, 1, 0, 0.0), &p),
            Err(Error::NoArrivals(0.0))
        );
    }

    #[test]
    fn lagrangian_vanishes_at_target() {
        let p = RewardParams::new(7.0, 0.3, 10.0).unwrap();
        assert!((lagrangian(0.7, 40.0, &p) + 4.0).abs() < 1e-12);
    }

    #[test]
    fn shaped_examples() {
        let c = ShapedRewardCoeffs::default();
        assert_eq!(shaped_reward(0.0, 0, &c), 0.0);
        let harsh = ShapedRewardCoeffs { r_max: 25.0, ..c };
        assert_eq!(shaped_reward(-0.9, 0, &harsh), -25.0);
    }

    #[test]
    fn mean_delay_examples() {
        let m = SlotMetrics {
            completed: 10,
            mean_delay_ttis: 5.0,
            n_prbs: 0,
            ..Default::default()
        };
        assert_eq!(mean_delay_reward(&m, 5, 10.0, 1.0, 10.0), 0.0);
        let m2 = SlotMetrics {
            mean_delay_ttis: 10.0,
            n_prbs: 30,
            ..m
        };
        assert!((mean_delay_reward(&m2, 5, 10.0, 1.0, 10.0) + 10.0 + 3.0).abs() < 1e-12);
        let none = SlotMetrics {
            completed: 0,
            n_prbs: 20,
            ..m
        };
        assert!((mean_delay_reward(&none, 5, 10.0, 1.0, 10.0) + 12.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn shaped_is_bounded(d in -1.0f64..1.0, n in 0u32..200) {
            let c = ShapedRewardCoeffs::default();
            let r = shaped_reward(d, n, &c);
            prop_assert!((-c.r_max..=0.0).contains(&r));
        }

        #[test]
        fn shaped_nondecreasing_toward_target(a in -0.9f64..0.0, b in -0.9f64..0.0, n in 0u32..=150) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let c = ShapedRewardCoeffs::default();
            prop_assert!(shaped_reward(lo, n, &c) <= shaped_reward(hi, n, &c) + 1e-12);
        }
    }
}
