//! Heterogeneous environment suites for personalization studies.

use rand::Rng;
use serde::{Deserialize, Serialize};
use slicer_core::rng::substream;
use slicer_core::traffic::SizeClass;

use crate::config::{ScenarioConfig, UserBlock};
use crate::{HarnessError, Result};

pub const SUITE_SCHEMA: &str = "slicer-suite-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvSuite {
    pub schema_version: String,
    pub master_seed: u64,
    pub members: Vec<ScenarioConfig>,
}

/// Mean packets per slot of one user at unit rate factor: many small
/// packets, few large ones.
fn base_rate(class: SizeClass) -> f64 {
    match class {
        SizeClass::Small => 40.0,
        SizeClass::Medium => 10.0,
        SizeClass::Large => 4.0,
    }
}

/// Draw `n` scenarios from `base` by varying service and users.
///
/// Member `i` gets `D_max = 5` ms for even `i` and 10 ms for odd `i`, and
/// `eps = 0.1` or `0.3` alternating in pairs, so any four consecutive members
/// cover all four services. Each member has 2 to 6 users with Doppler in
/// [5, 50] Hz, a uniformly drawn size class, mean SNR in [25, 35] dB and a
/// class-dependent rate scaled by a factor in [0.5, 1.5]. Rates are given at
/// 200-TTI slots and scaled to `base.env.slot_ttis`.
pub fn generate_env_suite(master_seed: u64, n: usize, base: &ScenarioConfig) -> Result<EnvSuite> {
    if n < 1 {
        return Err(HarnessError::config("study.suite_size", "must be >= 1"));
    }
    let mut rng = substream(master_seed, "suite");
    let rate_scale = f64::from(base.env.slot_ttis) / 200.0;
    let classes = [SizeClass::Small, SizeClass::Medium, SizeClass::Large];
    let members = (0..n)
        .map(|i| {
            let mut c = base.clone();
            c.qos.d_max_ms = [5.0, 10.0][i % 2] * base.env.tti_ms;
            c.qos.epsilon = [0.1, 0.3][(i / 2) % 2];
            let k = rng.random_range(2..=6);
            c.users = (0..k)
                .map(|_| {
                    let class = classes[rng.random_range(0..3)];
                    let doppler_hz = rng.random_range(5.0..=50.0);
                    let snr_db = rng.random_range(25.0..=35.0);
                    let rate = base_rate(class) * rng.random_range(0.5..=1.5) * rate_scale;
                    UserBlock {
                        doppler_hz,
                        snr_db,
                        rate,
                        size_class: class.name().to_string(),
                        size_mu_ln: None,
                        size_sigma_ln: None,
                    }
                })
                .collect();
            c.validate()?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnvSuite {
        schema_version: SUITE_SCHEMA.to_string(),
        master_seed,
        members,
    })
}
