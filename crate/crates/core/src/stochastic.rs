//! Variability and retention.
//!
//! Randomness is reproducible from a single 64-bit seed. Independent
//! consumers get their own seed through [`split_seed`]; per-device streams
//! inside a consumer are ChaCha8 streams selected by the device index, so a
//! population is identical however it is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::device::{DeviceParams, DeviceState, StepNoise};
use crate::error::{ensure_finite, Error, Result};

/// Truncation of the cycle-to-cycle step noise, in standard deviations.
pub const STEP_TRUNCATION: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariabilityParams {
    /// Relative standard deviation of each state increment.
    pub sigma_c2c: f64,
    /// Standard deviation of ln(g_hrs) across devices.
    pub sigma_d2d_hrs: f64,
    /// Standard deviation of ln(g_lrs) across devices.
    pub sigma_d2d_lrs: f64,
    /// Relative conductance loss per decade of elapsed seconds.
    pub drift_per_decade: f64,
    /// Not read from configuration files; derived from the run's master seed.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for VariabilityParams {
    fn default() -> Self {
        Self {
            sigma_c2c: 0.10,
            sigma_d2d_hrs: 0.10,
            sigma_d2d_lrs: 0.10,
            drift_per_decade: 0.0,
            seed: 0x5EED,
        }
    }
}

impl VariabilityParams {
    /// No variability at all.
    pub fn ideal() -> Self {
        Self {
            sigma_c2c: 0.0,
            sigma_d2d_hrs: 0.0,
            sigma_d2d_lrs: 0.0,
            drift_per_decade: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("sigma_c2c", self.sigma_c2c),
            ("sigma_d2d_hrs", self.sigma_d2d_hrs),
            ("sigma_d2d_lrs", self.sigma_d2d_lrs),
            ("drift_per_decade", self.drift_per_decade),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::config(
                    format!("variability.{name}"),
                    format!("must be finite and >= 0, got {value}"),
                ));
            }
        }
        if self.sigma_c2c * STEP_TRUNCATION >= 1.0 {
            return Err(Error::config(
                "variability.sigma_c2c",
                "must be < 1/3 so perturbed steps keep their sign",
            ));
        }
        Ok(())
    }
}

/// SplitMix64 finaliser.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sub-stream `stream` of `master`: `splitmix64(master ^ splitmix64(stream))`.
pub fn split_seed(master: u64, stream: u64) -> u64 {
    splitmix64(master ^ splitmix64(stream))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for item `index` of the family seeded by `seed`.
pub fn indexed_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draw from Normal(0, sigma) truncated to `±STEP_TRUNCATION * sigma` by
/// rejection.
pub fn truncated_normal<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if z.abs() <= STEP_TRUNCATION {
            return sigma * z;
        }
    }
}

/// `delta_w * (1 + eps)` with truncated Gaussian `eps`.
pub fn perturb_step<R: Rng + ?Sized>(delta_w: f64, vp: &VariabilityParams, rng: &mut R) -> f64 {
    if vp.sigma_c2c == 0.0 {
        return delta_w;
    }
    delta_w * (1.0 + truncated_normal(rng, vp.sigma_c2c))
}

/// Cycle-to-cycle noise source owning its generator.
#[derive(Debug, Clone)]
pub struct C2cNoise<R = ChaCha8Rng> {
    pub sigma: f64,
    pub rng: R,
}

impl C2cNoise<ChaCha8Rng> {
    pub fn from_seed(sigma: f64, seed: u64) -> Self {
        Self {
            sigma,
            rng: rng_from_seed(seed),
        }
    }
}

impl<R: Rng> StepNoise for C2cNoise<R> {
    fn perturb(&mut self, delta_w: f64) -> f64 {
        if self.sigma == 0.0 || delta_w == 0.0 {
            return delta_w;
        }
        delta_w * (1.0 + truncated_normal(&mut self.rng, self.sigma))
    }
}

/// One device with log-normally dispersed endpoints, in the HRS.
pub fn sample_device<R: Rng + ?Sized>(
    params: &DeviceParams,
    vp: &VariabilityParams,
    rng: &mut R,
) -> DeviceState {
    let eta_hrs: f64 = StandardNormal.sample(rng);
    let eta_lrs: f64 = StandardNormal.sample(rng);
    let mut g_hrs = params.g_hrs() * (vp.sigma_d2d_hrs * eta_hrs).exp();
    let mut g_lrs = params.g_lrs() * (vp.sigma_d2d_lrs * eta_lrs).exp();
    if g_hrs >= g_lrs {
        std::mem::swap(&mut g_hrs, &mut g_lrs);
    }
    if g_hrs == g_lrs {
        // both draws landed on the same value; only possible with huge sigma
        g_lrs = g_hrs * (1.0 + f64::EPSILON);
    }
    DeviceState {
        w: 0.0,
        g_hrs_dev: g_hrs,
        g_lrs_dev: g_lrs,
    }
}

/// `n` devices, device `i` drawn from stream `i` of `seed`.
pub fn sample_population(
    n: usize,
    params: &DeviceParams,
    vp: &VariabilityParams,
    seed: u64,
) -> Vec<DeviceState> {
    (0..n)
        .map(|i| sample_device(params, vp, &mut indexed_rng(seed, i as u64)))
        .collect()
}

/// Conductance drift after `elapsed_s` seconds, clamped to the device's
/// endpoints. Identity for zero drift and for `elapsed_s <= 1`.
pub fn apply_retention(
    state: &DeviceState,
    elapsed_s: f64,
    vp: &VariabilityParams,
) -> Result<DeviceState> {
    ensure_finite("elapsed time", elapsed_s)?;
    if elapsed_s < 0.0 {
        return Err(Error::invalid("elapsed time", "must be >= 0"));
    }
    if vp.drift_per_decade == 0.0 || elapsed_s <= 1.0 {
        return Ok(*state);
    }
    let factor = 1.0 - vp.drift_per_decade * elapsed_s.log10();
    let g = (state.conductance() * factor).clamp(state.g_hrs_dev, state.g_lrs_dev);
    Ok(state.with_conductance(g))
}
