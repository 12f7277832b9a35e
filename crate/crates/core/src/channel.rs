//! Per-user channel gains, SNR and the SNR to per-PRB capacity mapping.
//!
//! Small-scale fading is a first-order Gauss-Markov (AR(1)) complex Gaussian
//! process. Over one step `dt` the complex coefficient is correlated by
//! `exp(-(pi f_d dt)^2)`, so the power `|h|^2` has lag-one autocorrelation
//! `exp(-2 (pi f_d dt)^2)`, a Gaussian approximation of `J0(2 pi f_d dt)^2`.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    /// Circularly-symmetric complex Gaussian with unit mean power.
    pub fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex {
            re: re * s,
            im: im * s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    /// Linear gain `g`, held for one TTI.
    pub gain_linear: f64,
    pub doppler_hz: f64,
    /// Fixed path-loss and shadowing offset.
    pub large_scale_db: f64,
    pub small_scale: Complex,
}

pub fn db_to_linear(db: f64) -> f64 {
    10.0.powf(db / 10.0)
}

/// dB value of a linear ratio, floored at -100 dB.
pub fn linear_to_db(x: f64) -> f64 {
    if x <= 1e-10 {
        -100.0
    } else {
        10.0 * x.log10()
    }
}

impl ChannelState {
    pub fn new<R: Rng + ?Sized>(doppler_hz: f64, large_scale_db: f64, rng: &mut R) -> Self {
        let h = Complex::sample_unit(rng);
        Self::with_small_scale(doppler_hz, large_scale_db, h)
    }

    pub fn with_small_scale(doppler_hz: f64, large_scale_db: f64, small_scale: Complex) -> Self {
        ChannelState {
            gain_linear: db_to_linear(large_scale_db) * small_scale.norm_sqr(),
            doppler_hz,
            large_scale_db,
            small_scale,
        }
    }

    /// Correlation of the complex coefficient across a step of `dt` seconds.
    pub fn step_correlation(doppler_hz: f64, dt: f64) -> f64 {
        let x = PI * doppler_hz * dt;
        (-(x * x)).exp()
    }
}

/// Advance the fading process by `dt` seconds.
pub fn advance_channel<R: Rng + ?Sized>(
    state: &ChannelState,
    dt: f64,
    rng: &mut R,
) -> ChannelState {
    debug_assert!(dt > 0.0);
    let rho = ChannelState::step_correlation(state.doppler_hz, dt);
    if rho >= 1.0 {
        return *state;
    }
    let w = Complex::sample_unit(rng);
    let innov = (1.0 - rho * rho).sqrt();
    let h = Complex {
        re: rho * state.small_scale.re + innov * w.re,
        im: rho * state.small_scale.im + innov * w.im,
    };
    ChannelState::with_small_scale(state.doppler_hz, state.large_scale_db, h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConfig {
    /// Per-PRB transmit power `P`. Power is split uniformly over PRBs.
    pub tx_power_watts: f64,
    pub noise_watts: f64,
    pub prb_bandwidth_hz: f64,
    /// Inner timescale `T_b`.
    pub tti_seconds: f64,
}

impl Default for RadioConfig {
    /// Unit transmit power over unit noise: the large-scale gain alone sets
    /// each user's mean SNR.
    fn default() -> Self {
        RadioConfig {
            tx_power_watts: 1.0,
            noise_watts: 1.0,
            prb_bandwidth_hz: 180_000.0,
            tti_seconds: 0.001,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("radio.tx_power_watts", self.tx_power_watts),
            ("radio.noise_watts", self.noise_watts),
            ("radio.prb_bandwidth_hz", self.prb_bandwidth_hz),
            ("env.tti_ms", self.tti_seconds),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, "must be strictly positive"));
            }
        }
        Ok(())
    }
}

/// Linear downlink SNR `P g / N`.
pub fn snr(cfg: &RadioConfig, state: &ChannelState) -> f64 {
    cfg.tx_power_watts * state.gain_linear / cfg.noise_watts
}

#[derive(Debug, Clone, PartialEq)]
pub struct CqiTable {
    thresholds_db: Vec<f64>,
    efficiencies: Vec<f64>,
}

/// 4-bit CQI spectral efficiencies (bits/s/Hz).
pub const CQI_EFFICIENCIES: [f64; 15] = [
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141, 2.4063, 2.7305, 3.3223, 3.9023,
    4.5234, 5.1152, 5.5547,
];

impl Default for CqiTable {
    /// The 15-level ladder with thresholds evenly spaced over [-6.7, 22.7] dB.
    fn default() -> Self {
        let lo = -6.7;
        let hi = 22.7;
        let step = (hi - lo) / 14.0;
        let thresholds_db = (0..15).map(|i| lo + step * i as f64).collect();
        CqiTable {
            thresholds_db,
            efficiencies: CQI_EFFICIENCIES.to_vec(),
        }
    }
}

impl CqiTable {
    pub fn new(thresholds_db: Vec<f64>, efficiencies: Vec<f64>) -> Result<Self> {
        if thresholds_db.is_empty() || thresholds_db.len() != efficiencies.len() {
            return Err(Error::invalid(
                "cqi",
                "thresholds and efficiencies must be non-empty and of equal length",
            ));
        }
        if thresholds_db.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid(
                "cqi.thresholds_db",
                "must be strictly ascending",
            ));
        }
        if efficiencies.windows(2).any(|w| w[0] > w[1]) || efficiencies[0] < 0.0 {
            return Err(Error::invalid(
                "cqi.efficiencies",
                "must be non-negative and non-decreasing",
            ));
        }
        Ok(CqiTable {
            thresholds_db,
            efficiencies,
        })
    }

    pub fn thresholds_db(&self) -> &[f64] {
        &self.thresholds_db
    }

    pub fn efficiencies(&self) -> &[f64] {
        &self.efficiencies
    }

    /// Index of the highest level whose threshold is at or below `snr`.
    pub fn level(&self, snr: f64) -> Option<usize> {
        if !(snr > 0.0) {
            return None;
        }
        // Thresholds are compared in dB with a small slack so that a linear
        // SNR converted from a threshold maps back onto that threshold.
        let snr_db = 10.0 * snr.log10() + 1e-9;
        let count = self.thresholds_db.partition_point(|&t| t <= snr_db);
        count.checked_sub(1)
    }
}

/// Spectral efficiency for a linear SNR (step function, left-closed).
pub fn map_snr_to_efficiency(table: &CqiTable, snr: f64) -> f64 {
    table.level(snr).map_or(0.0, |i| table.efficiencies[i])
}

/// Bits one PRB delivers in one TTI: `floor(W T_b efficiency)`.
pub fn prb_capacity(cfg: &RadioConfig, efficiency: f64) -> u32 {
    let bits = cfg.prb_bandwidth_hz * cfg.tti_seconds * efficiency;
    (bits + 1e-9).floor().max(0.0) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::stats;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn zero_doppler_freezes_channel() {
        let mut rng = substream(1, "ch");
        let s = ChannelState::new(0.0, 10.0, &mut rng);
        let t = advance_channel(&s, 0.001, &mut rng);
        assert_eq!(s, t);
    }

    #[test]
    fn gain_is_large_scale_times_power() {
        let mut rng = substream(2, "ch");
        let mut s = ChannelState::new(30.0, 7.0, &mut rng);
        for _ in 0..10 {
            s = advance_channel(&s, 0.001, &mut rng);
            let expect = db_to_linear(7.0) * s.small_scale.norm_sqr();
            assert!((s.gain_linear - expect).abs() <= 1e-12 * expect.max(1.0));
            assert!(s.gain_linear > 0.0);
        }
    }

    fn power_series(doppler: f64, steps: usize, seed: u64) -> Vec<f64> {
        let mut rng = substream(seed, "power");
        let mut s = ChannelState::new(doppler, 0.0, &mut rng);
        (0..steps)
            .map(|_| {
                s = advance_channel(&s, 0.001, &mut rng);
                s.small_scale.norm_sqr()
            })
            .collect()
    }

    #[test]
    fn lag_one_power_autocorrelation_at_50hz() {
        let xs = power_series(50.0, 1_000_000, 3);
        let expected = (-2.0 * (PI * 0.05).powi(2)).exp();
        assert!((expected - 0.952).abs() < 1e-3);
        let ac = stats::autocorrelation(&xs, 1);
        assert!((ac - expected).abs() < 0.01, "autocorr {ac} vs {expected}");
    }

    fn coherence_lag(xs: &[f64]) -> usize {
        (1..20_000)
            .find(|&k| stats::autocorrelation(xs, k) < 0.5)
            .unwrap()
    }

    #[test]
    fn coherence_scales_with_doppler() {
        let slow = power_series(5.0, 400_000, 4);
        let fast = power_series(50.0, 400_000, 5);
        let (ls, lf) = (coherence_lag(&slow), coherence_lag(&fast));
        assert!(ls >= 9 * lf, "lag at 5 Hz {ls}, at 50 Hz {lf}");
    }

    #[test]
    fn unit_mean_power() {
        // One sample per 200-TTI slicing slot over 10^5 slots.
        for (i, fd) in [5.0, 50.0].into_iter().enumerate() {
            let mut rng = substream(10 + i as u64, "power");
            let mut s = ChannelState::new(fd, 0.0, &mut rng);
            let mut acc = stats::Running::default();
            for _ in 0..100_000 {
                for _ in 0..200 {
                    s = advance_channel(&s, 0.001, &mut rng);
                }
                acc.push(s.small_scale.norm_sqr());
            }
            let m = acc.mean();
            assert!((0.95..=1.05).contains(&m), "f_d {fd}: mean power {m}");
        }
    }

    #[test]
    fn snr_arithmetic() {
        let st = |g: f64| ChannelState {
            gain_linear: g,
            doppler_hz: 0.0,
            large_scale_db: 0.0,
            small_scale: Complex::default(),
        };
        let unit = RadioConfig::default();
        assert_eq!(snr(&unit, &st(1.0)), 1.0);
        assert_eq!(snr(&unit, &st(0.0)), 0.0);
        let cfg = RadioConfig {
            tx_power_watts: 2.0,
            noise_watts: 0.1,
            ..unit
        };
        assert!((snr(&cfg, &st(0.5)) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn cqi_lookup_boundaries() {
        let t = CqiTable::default();
        assert_eq!(map_snr_to_efficiency(&t, db_to_linear(-20.0)), 0.0);
        assert_eq!(map_snr_to_efficiency(&t, 0.0), 0.0);
        for (i, &th) in t.thresholds_db().iter().enumerate() {
            assert_eq!(
                map_snr_to_efficiency(&t, db_to_linear(th)),
                t.efficiencies()[i]
            );
        }
        assert_eq!(map_snr_to_efficiency(&t, 1e12), 5.5547);
    }

    #[test]
    fn capacity_examples() {
        let cfg = RadioConfig::default();
        assert_eq!(prb_capacity(&cfg, 2.0), 360);
        assert_eq!(prb_capacity(&cfg, 0.0), 0);
        assert_eq!(prb_capacity(&cfg, 5.5547), 999);
    }

    #[test]
    fn table_validation() {
        assert!(CqiTable::new(vec![1.0, 1.0], vec![0.1, 0.2]).is_err());
        assert!(CqiTable::new(vec![1.0, 2.0], vec![0.3, 0.2]).is_err());
        assert!(CqiTable::new(vec![1.0], vec![0.3, 0.2]).is_err());
        assert!(CqiTable::new(vec![1.0, 2.0], vec![0.2, 0.2]).is_ok());
    }

    proptest! {
        #[test]
        fn capacity_monotone_in_snr(a in 0.0f64..1e4, b in 0.0f64..1e4) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let t = CqiTable::default();
            let cfg = RadioConfig::default();
            prop_assert!(prb_capacity(&cfg, map_snr_to_efficiency(&t, lo))
                <= prb_capacity(&cfg, map_snr_to_efficiency(&t, hi)));
        }

        #[test]
        fn requantization_is_idempotent(db in -10.0f64..30.0) {
            let t = CqiTable::default();
            if let Some(level) = t.level(db_to_linear(db)) {
                let back = db_to_linear(t.thresholds_db()[level]);
                prop_assert_eq!(t.level(back), Some(level));
            }
        }
    }
}
