//! The analog memory cell.
//!
//! A device is described by a normalised state `w` in `[0, 1]` (0 = HRS,
//! 1 = LRS) and its own endpoint conductances. Its small-signal conductance is
//! `g_hrs + w (g_lrs - g_hrs)`; the conduction model turns that into a current
//! at any bias and temperature.
//!
//! Pulse programming moves the cell one level along a saturating exponential
//! staircase per super-threshold pulse. Negative pulses potentiate and
//! positive pulses depress (bottom electrode grounded).

mod dc;
mod params;
mod pulse;
mod update;

pub use dc::{dc_write, hysteresis_loop, Branch, HysteresisLoop, HysteresisPoint};
pub use params::{DeviceParams, UpdateShape, MEMORY_WINDOW, V_C_RESET, V_C_SET};
pub use pulse::{
    pulse_train, run_sequence, NoNoise, PulseSpec, StepNoise, Trace, TracePoint, UpdateScheme,
    SEQUENCE_READ_VOLTAGE,
};
pub use update::{
    fit_update_curve, inverse_update_progress, update_curve, update_progress, UpdateFit,
};

use serde::{Deserialize, Serialize};

use crate::conduction::{activation_factor, current};
use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Potentiate,
    Depress,
}

impl Direction {
    /// Direction a pulse of the given signed amplitude drives the device.
    pub fn of_amplitude(amplitude: f64) -> Self {
        if amplitude < 0.0 {
            Direction::Potentiate
        } else {
            Direction::Depress
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Potentiate => "potentiate",
            Direction::Depress => "depress",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "potentiate" | "pot" | "p" => Ok(Direction::Potentiate),
            "depress" | "dep" | "d" => Ok(Direction::Depress),
            other => Err(Error::invalid(
                "direction",
                format!("unknown direction `{other}`"),
            )),
        }
    }
}

/// Analog state of one junction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceState {
    /// Normalised state, 0 = HRS, 1 = LRS.
    pub w: f64,
    /// This device's HRS conductance (S).
    pub g_hrs_dev: f64,
    /// This device's LRS conductance (S).
    pub g_lrs_dev: f64,
}

impl DeviceState {
    pub fn new(w: f64, g_hrs_dev: f64, g_lrs_dev: f64) -> Result<Self> {
        ensure_finite("w", w)?;
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::invalid("w", format!("must lie in [0, 1], got {w}")));
        }
        if !(g_hrs_dev > 0.0 && g_hrs_dev < g_lrs_dev && g_lrs_dev.is_finite()) {
            return Err(Error::invalid(
                "endpoint conductances",
                format!("need 0 < g_hrs < g_lrs, got {g_hrs_dev} / {g_lrs_dev}"),
            ));
        }
        Ok(Self {
            w,
            g_hrs_dev,
            g_lrs_dev,
        })
    }

    /// Nominal device in the HRS.
    pub fn hrs(params: &DeviceParams) -> Self {
        Self {
            w: 0.0,
            g_hrs_dev: params.g_hrs(),
            g_lrs_dev: params.g_lrs(),
        }
    }

    /// Nominal device in the LRS.
    pub fn lrs(params: &DeviceParams) -> Self {
        Self {
            w: 1.0,
            ..Self::hrs(params)
        }
    }

    pub fn with_w(self, w: f64) -> Self {
        Self {
            w: w.clamp(0.0, 1.0),
            ..self
        }
    }

    /// Small-signal conductance at the reference temperature (S).
    pub fn conductance(&self) -> f64 {
        self.g_hrs_dev + self.w * (self.g_lrs_dev - self.g_hrs_dev)
    }

    /// State whose conductance is `g`, clamped to this device's endpoints.
    pub fn with_conductance(self, g: f64) -> Self {
        self.with_w((g - self.g_hrs_dev) / (self.g_lrs_dev - self.g_hrs_dev))
    }

    /// Apply a single write pulse without cycle-to-cycle noise.
    pub fn apply_pulse(&self, pulse: &PulseSpec, params: &DeviceParams) -> Result<Self> {
        self.apply_pulse_with(pulse, params, &mut NoNoise)
    }

    /// Apply a write pulse, passing the noiseless state increment through
    /// `noise`. Pulses below `v_pulse_threshold` return the state unchanged.
    pub fn apply_pulse_with(
        &self,
        pulse: &PulseSpec,
        params: &DeviceParams,
        noise: &mut dyn StepNoise,
    ) -> Result<Self> {
        pulse.validate()?;
        if pulse.amplitude.abs() < params.v_pulse_threshold {
            return Ok(*self);
        }
        let direction = Direction::of_amplitude(pulse.amplitude);
        let nu = params.shape(pulse.scheme).nu(direction);
        let target = next_level(self.w, nu, params.n_levels, direction);
        let delta = noise.perturb(target - self.w);
        let mut w = (self.w + delta).clamp(0.0, 1.0);
        match direction {
            Direction::Potentiate => w = w.max(self.w),
            Direction::Depress => w = w.min(self.w),
        }
        Ok(Self { w, ..*self })
    }

    /// Resistance `v_read / I(v_read)` seen by a DC read (Ω). At zero bias the
    /// small-signal limit is returned.
    pub fn read_resistance(&self, v_read: f64, t: f64, params: &DeviceParams) -> Result<f64> {
        ensure_finite("read voltage", v_read)?;
        let g = self.conductance();
        if v_read == 0.0 {
            ensure_finite("temperature", t)?;
            if t <= 0.0 {
                return Err(Error::invalid(
                    "temperature",
                    format!("must be > 0, got {t}"),
                ));
            }
            return Ok(1.0 / (g * activation_factor(t, &params.conduction)));
        }
        Ok(v_read / current(v_read, g, t, &params.conduction)?)
    }

    /// Read current at `v_read` (A).
    pub fn read_current(&self, v_read: f64, t: f64, params: &DeviceParams) -> Result<f64> {
        current(v_read, self.conductance(), t, &params.conduction)
    }

    /// Energy dissipated by a write pulse (J), `g(w) V^2 t_width` with the
    /// small-signal conductance.
    pub fn write_energy(&self, pulse: &PulseSpec) -> Result<f64> {
        ensure_finite("pulse amplitude", pulse.amplitude)?;
        ensure_finite("pulse width", pulse.width)?;
        if pulse.width < 0.0 {
            return Err(Error::invalid("pulse width", "must be >= 0"));
        }
        Ok(self.conductance() * pulse.amplitude * pulse.amplitude * pulse.width)
    }
}

/// Position one level further along the staircase of `direction`.
///
/// The level index is recovered from `w` by inverting the update curve, so
/// the cell carries no hidden counter. Indices within 1e-9 of an integer are
/// snapped to it so long noiseless sequences land exactly on the endpoints.
fn next_level(w: f64, nu: f64, n_levels: u32, direction: Direction) -> f64 {
    let n = f64::from(n_levels);
    let progress = match direction {
        Direction::Potentiate => w,
        Direction::Depress => 1.0 - w,
    };
    let mut k = inverse_update_progress(progress.clamp(0.0, 1.0), nu) * n;
    let nearest = k.round();
    if (k - nearest).abs() < 1e-9 {
        k = nearest;
    }
    let k_next = (k + 1.0).min(n);
    let p_next = update_progress(k_next / n, nu);
    match direction {
        Direction::Potentiate => p_next,
        Direction::Depress => 1.0 - p_next,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> DeviceParams {
        DeviceParams::default()
    }

    fn pot() -> PulseSpec {
        PulseSpec::new(-1.6, 50e-6, UpdateScheme::AmplitudeRamp)
    }

    fn dep() -> PulseSpec {
        PulseSpec::new(2.4, 50e-6, UpdateScheme::AmplitudeRamp)
    }

    #[test]
    fn full_potentiation_reaches_lrs() {
        let p = params();
        let mut s = DeviceState::hrs(&p);
        for _ in 0..p.n_levels {
            s = s.apply_pulse(&pot(), &p).unwrap();
        }
        assert_eq!(s.w, 1.0);
        assert_eq!(s.conductance(), s.g_lrs_dev);
    }

    #[test]
    fn half_select_pulse_is_noop() {
        let p = params();
        let s = DeviceState::hrs(&p).with_w(0.37);
        for a in [-0.8, 1.2, 1.299_999] {
            let after = s
                .apply_pulse(&PulseSpec::new(a, 50e-6, UpdateScheme::Single), &p)
                .unwrap();
            assert_eq!(after, s);
        }
    }

    #[test]
    fn depression_midpoint() {
        let p = params();
        let mut s = DeviceState::lrs(&p);
        for _ in 0..25 {
            s = s.apply_pulse(&dep(), &p).unwrap();
        }
        // 1 - (1 - e^-2.15) / (1 - e^-4.3)
        assert!((s.w - 0.1043).abs() < 5e-5, "w = {}", s.w);
    }

    #[test]
    fn non_finite_pulse_rejected() {
        let p = params();
        let s = DeviceState::hrs(&p);
        let bad = PulseSpec::new(f64::NAN, 50e-6, UpdateScheme::Single);
        assert!(s.apply_pulse(&bad, &p).is_err());
        let bad = PulseSpec::new(-1.6, 0.0, UpdateScheme::Single);
        assert!(s.apply_pulse(&bad, &p).is_err());
    }

    #[test]
    fn read_resistance_examples() {
        let p = params();
        let lrs = DeviceState::lrs(&p);
        let hrs = DeviceState::hrs(&p);
        let r_lrs = lrs.read_resistance(0.1, 300.0, &p).unwrap();
        assert!((r_lrs - 1e8).abs() < 1e-6 * 1e8);
        let r_hrs = hrs.read_resistance(0.1, 300.0, &p).unwrap();
        assert!((r_hrs - 7e8).abs() < 1e-6 * 7e8);
        let r_pf = lrs.read_resistance(0.3, 300.0, &p).unwrap();
        assert!((1e8 / r_pf - 4.74).abs() < 0.01);
        let r0 = lrs.read_resistance(0.0, 300.0, &p).unwrap();
        assert!((r0 - 1e8).abs() < 1e-6 * 1e8);
    }

    #[test]
    fn write_energy_examples() {
        let p = params();
        let e_dep = DeviceState::hrs(&p).write_energy(&dep()).unwrap();
        assert!((e_dep - 1e-8 / 7.0 * 5.76 * 5e-5).abs() < 1e-25);
        assert!(e_dep < 1e-12);
        let e_pot = DeviceState::lrs(&p).write_energy(&pot()).unwrap();
        assert!((e_pot - 1.28e-12).abs() < 1e-24);
        let zero = PulseSpec::new(2.4, 0.0, UpdateScheme::Single);
        assert_eq!(DeviceState::hrs(&p).write_energy(&zero).unwrap(), 0.0);
    }

    #[test]
    fn with_conductance_clamps() {
        let p = params();
        let s = DeviceState::hrs(&p);
        assert_eq!(s.with_conductance(1.0).w, 1.0);
        assert_eq!(s.with_conductance(0.0).w, 0.0);
    }

    #[test]
    fn state_constructor_checks() {
        assert!(DeviceState::new(1.1, 1.0, 2.0).is_err());
        assert!(DeviceState::new(0.5, 2.0, 1.0).is_err());
        assert!(DeviceState::new(0.5, 1.0, 2.0).is_ok());
    }

    proptest! {
        #[test]
        fn pulses_are_directional(w in 0.0f64..=1.0, amp in 1.3f64..3.0, scheme_idx in 0usize..3) {
            let p = params();
            let scheme = [UpdateScheme::AmplitudeRamp, UpdateScheme::WidthRamp, UpdateScheme::Single][scheme_idx];
            let s = DeviceState::hrs(&p).with_w(w);
            let up = s.apply_pulse(&PulseSpec::new(-amp, 50e-6, scheme), &p).unwrap();
            let down = s.apply_pulse(&PulseSpec::new(amp, 50e-6, scheme), &p).unwrap();
            prop_assert!(up.conductance() >= s.conductance());
            prop_assert!(down.conductance() <= s.conductance());
            prop_assert!((0.0..=1.0).contains(&up.w));
            prop_assert!((0.0..=1.0).contains(&down.w));
        }

        #[test]
        fn sub_threshold_is_bit_identical(w in 0.0f64..=1.0, amp in -1.2999f64..1.2999) {
            let p = params();
            let s = DeviceState::hrs(&p).with_w(w);
            let after = s.apply_pulse(&PulseSpec::new(amp, 50e-6, UpdateScheme::Single), &p).unwrap();
            prop_assert_eq!(after.w.to_bits(), s.w.to_bits());
            prop_assert_eq!(after, s);
        }

        #[test]
        fn random_sequences_stay_in_range(ops in proptest::collection::vec(-3.0f64..3.0, 1..200)) {
            let p = params();
            let mut s = DeviceState::hrs(&p).with_w(0.5);
            for a in ops {
                s = s.apply_pulse(&PulseSpec::new(a, 50e-6, UpdateScheme::WidthRamp), &p).unwrap();
                prop_assert!((0.0..=1.0).contains(&s.w));
            }
        }
    }
}
