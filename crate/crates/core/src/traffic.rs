//! Packet arrival and size generation.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Poisson};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SizeClass {
    Small,
    Medium,
    Large,
}

impl SizeClass {
    /// Default log-normal parameters (natural log of bits).
    pub fn default_params(self) -> LogNormalParams {
        let median_bits: f64 = match self {
            SizeClass::Small => 2_000.0,
            SizeClass::Medium => 12_000.0,
            SizeClass::Large => 60_000.0,
        };
        LogNormalParams {
            mu_ln: median_bits.ln(),
            sigma_ln: 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SizeClass::Small => "small",
            SizeClass::Medium => "medium",
            SizeClass::Large => "large",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "small" => Some(SizeClass::Small),
            "medium" => Some(SizeClass::Medium),
            "large" => Some(SizeClass::Large),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalParams {
    pub mu_ln: f64,
    pub sigma_ln: f64,
}

impl LogNormalParams {
    pub fn mean(&self) -> f64 {
        (self.mu_ln + 0.5 * self.sigma_ln * self.sigma_ln).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserTrafficProfile {
    /// Mean packets per slicing slot (Poisson).
    pub arrival_rate_per_slot: f64,
    pub size_class: SizeClass,
    pub size_params: LogNormalParams,
}

impl UserTrafficProfile {
    pub fn new(arrival_rate_per_slot: f64, size_class: SizeClass) -> Self {
        UserTrafficProfile {
            arrival_rate_per_slot,
            size_class,
            size_params: size_class.default_params(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.arrival_rate_per_slot >= 0.0 && self.arrival_rate_per_slot.is_finite()) {
            return Err(Error::invalid("rate", "must be finite and non-negative"));
        }
        if !(self.size_params.sigma_ln >= 0.0 && self.size_params.mu_ln.is_finite()) {
            return Err(Error::invalid(
                "size_params",
                "invalid log-normal parameters",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadKind {
    Constant,
    RampUpDown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadPattern {
    pub kind: LoadKind,
    pub peak_multiplier: f64,
    pub period_slots: u64,
}

impl LoadPattern {
    pub const CONSTANT: LoadPattern = LoadPattern {
        kind: LoadKind::Constant,
        peak_multiplier: 1.0,
        period_slots: 2,
    };

    pub fn ramp(peak_multiplier: f64, period_slots: u64) -> Self {
        LoadPattern {
            kind: LoadKind::RampUpDown,
            peak_multiplier,
            period_slots,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak_multiplier >= 1.0 && self.peak_multiplier.is_finite()) {
            return Err(Error::invalid(
                "env.load_pattern.peak_multiplier",
                "must be >= 1",
            ));
        }
        if self.period_slots < 2 {
            return Err(Error::invalid(
                "env.load_pattern.period_slots",
                "must be >= 2",
            ));
        }
        Ok(())
    }

    /// Largest multiplier the pattern ever produces.
    pub fn peak(&self) -> f64 {
        match self.kind {
            LoadKind::Constant => 1.0,
            LoadKind::RampUpDown => self.peak_multiplier,
        }
    }
}

/// Load multiplier for a slicing slot: 1 for a constant pattern, otherwise a
/// triangular wave from 1 up to the peak at half period and back.
pub fn pattern_multiplier(pattern: &LoadPattern, slot_index: u64) -> f64 {
    match pattern.kind {
        LoadKind::Constant => 1.0,
        LoadKind::RampUpDown => {
            let period = pattern.period_slots.max(2) as f64;
            let phase = (slot_index % pattern.period_slots.max(2)) as f64 / period;
            let tri = 1.0 - (2.0 * phase - 1.0).abs();
            1.0 + (pattern.peak_multiplier - 1.0) * tri
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub id: u64,
    pub arrival_tti: u64,
    pub size_bits: u64,
    pub remaining_bits: u64,
    pub user_id: usize,
    pub delivered_tti: Option<u64>,
}

impl Packet {
    pub fn new(id: u64, user_id: usize, arrival_tti: u64, size_bits: u64) -> Self {
        Packet {
            id,
            arrival_tti,
            size_bits,
            remaining_bits: size_bits,
            user_id,
            delivered_tti: None,
        }
    }

    /// Delay in TTIs counting both the arrival and the completion TTI.
    pub fn delay_ttis(&self) -> Option<u64> {
        self.delivered_tti.map(|t| t - self.arrival_tti + 1)
    }
}

/// Draw the packets one user generates in a slicing slot.
///
/// `next_id` is advanced for every packet produced. The returned packets are
/// sorted by arrival TTI, then id.
pub fn sample_arrivals<R: Rng + ?Sized>(
    profile: &UserTrafficProfile,
    pattern: &LoadPattern,
    slot_index: u64,
    tti_range: (u64, u64),
    user_id: usize,
    next_id: &mut u64,
    rng: &mut R,
) -> Vec<Packet> {
    let (start, end) = tti_range;
    debug_assert!(start < end);
    let mean = profile.arrival_rate_per_slot * pattern_multiplier(pattern, slot_index);
    if mean <= 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(mean).map(|p| p.sample(rng)).unwrap_or(0.0) as usize;
    let sizes = LogNormal::new(profile.size_params.mu_ln, profile.size_params.sigma_ln)
        .expect("validated log-normal parameters");
    let mut out: Vec<Packet> = (0..count)
        .map(|_| {
            let t = rng.random_range(start..end);
            let size = sizes.sample(rng).round().max(1.0) as u64;
            let p = Packet::new(*next_id, user_id, t, size);
            *next_id += 1;
            p
        })
        .collect();
    out.sort_by_key(|p| (p.arrival_tti, p.id));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::stats;

    #[test]
    fn zero_rate_gives_nothing() {
        let mut rng = substream(1, "t");
        let mut id = 0;
        let p = UserTrafficProfile::new(0.0, SizeClass::Small);
        assert!(sample_arrivals(
            &p,
            &LoadPattern::CONSTANT,
            0,
            (0, 200),
            0,
            &mut id,
            &mut rng
        )
        .is_empty());
        assert_eq!(id, 0);
    }

    #[test]
    fn multiplier_examples() {
        assert_eq!(pattern_multiplier(&LoadPattern::CONSTANT, 17), 1.0);
        let ramp = LoadPattern::ramp(2.0, 100);
        assert_eq!(pattern_multiplier(&ramp, 0), 1.0);
        assert!((pattern_multiplier(&ramp, 25) - 1.5).abs() < 1e-12);
        assert_eq!(pattern_multiplier(&ramp, 50), 2.0);
        assert_eq!(pattern_multiplier(&LoadPattern::ramp(3.5, 10), 5), 3.5);
    }

    #[test]
    fn poisson_mean_and_independence() {
        let mut rng = substream(2, "t");
        let p = UserTrafficProfile::new(20.0, SizeClass::Small);
        let mut id = 0;
        let counts: alloc::vec::Vec<f64> = (0..10_000)
            .map(|s| {
                sample_arrivals(
                    &p,
                    &LoadPattern::CONSTANT,
                    s,
                    (s * 200, s * 200 + 200),
                    0,
                    &mut id,
                    &mut rng,
                )
                .len() as f64
            })
            .collect();
        let m = stats::mean(&counts);
        let bound = 3.0 * (20.0f64).sqrt() / (10_000f64).sqrt();
        assert!((m - 20.0).abs() < bound, "mean {m}");
        assert!(stats::autocorrelation(&counts, 1).abs() < 0.05);
    }

    #[test]
    fn packets_are_well_formed() {
        let mut rng = substream(3, "t");
        let p = UserTrafficProfile::new(50.0, SizeClass::Medium);
        let mut id = 10;
        let pk = sample_arrivals(
            &p,
            &LoadPattern::CONSTANT,
            3,
            (600, 800),
            4,
            &mut id,
            &mut rng,
        );
        assert_eq!(id, 10 + pk.len() as u64);
        for w in pk.windows(2) {
            assert!(w[0].arrival_tti <= w[1].arrival_tti);
        }
        for x in &pk {
            assert!((600..800).contains(&x.arrival_tti));
            assert!(x.size_bits >= 1);
            assert_eq!(x.remaining_bits, x.size_bits);
            assert_eq!(x.user_id, 4);
        }
    }

    #[test]
    fn mean_packet_size_per_class() {
        let mut rng = substream(4, "sizes");
        for class in [SizeClass::Small, SizeClass::Medium, SizeClass::Large] {
            let params = class.default_params();
            let d = LogNormal::new(params.mu_ln, params.sigma_ln).unwrap();
            let m = (0..100_000)
                .map(|_| d.sample(&mut rng).round().max(1.0))
                .sum::<f64>()
                / 1e5;
            let expect = params.mean();
            assert!(
                (m / expect - 1.0).abs() < 0.05,
                "{}: {m} vs {expect}",
                class.name()
            );
        }
    }
}
