use serde::{Deserialize, Serialize};

use super::{Direction, UpdateScheme};
use crate::conduction::ConductionParams;
use crate::error::{Error, Result};

/// DC SET coercive voltage (V).
pub const V_C_SET: f64 = -0.6;
/// DC RESET coercive voltage (V).
pub const V_C_RESET: f64 = 0.8;
/// Separation of the RESET and SET coercive voltages (V).
pub const MEMORY_WINDOW: f64 = 1.4;

/// Shape parameters of the potentiation and depression staircases for one
/// programming scheme. Larger values give a sharper initial update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpdateShape {
    pub nu_p: f64,
    pub nu_d: f64,
}

impl UpdateShape {
    pub fn nu(&self, direction: Direction) -> f64 {
        match direction {
            Direction::Potentiate => self.nu_p,
            Direction::Depress => self.nu_d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    pub conduction: ConductionParams,
    /// Device area (µm²).
    pub area: f64,
    /// Number of pulses taking the device from one endpoint to the other.
    pub n_levels: u32,
    /// Staircase shape under the constant-width, increasing-amplitude scheme.
    pub amplitude_ramp: UpdateShape,
    /// Staircase shape under the constant-amplitude, increasing-width scheme.
    pub width_ramp: UpdateShape,
    /// DC write voltage giving full LRS (V, negative).
    pub v_set_full: f64,
    /// DC write voltage giving full HRS (V, positive).
    pub v_reset_full: f64,
    /// DC SET coercive voltage (V, negative).
    pub v_c_set: f64,
    /// DC RESET coercive voltage (V, positive).
    pub v_c_reset: f64,
    /// Smallest |amplitude| of a write pulse that changes the state (V).
    pub v_pulse_threshold: f64,
    /// Reference pulse width (s).
    pub t_width_ref: f64,
    /// Full potentiation pulse amplitude (V, negative).
    pub v_pot: f64,
    /// Full depression pulse amplitude (V, positive).
    pub v_dep: f64,
    /// Ferroelectric layer thickness (m). Only used to report fields.
    pub hzo_thickness: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        let conduction = ConductionParams::default();
        Self {
            conduction,
            area: conduction.area_ref,
            n_levels: 50,
            amplitude_ramp: UpdateShape {
                nu_p: 1.9,
                nu_d: 4.3,
            },
            width_ramp: UpdateShape {
                nu_p: 4.3,
                nu_d: 1.9,
            },
            v_set_full: -1.6,
            v_reset_full: 2.4,
            v_c_set: V_C_SET,
            v_c_reset: V_C_RESET,
            v_pulse_threshold: 1.3,
            t_width_ref: 50e-6,
            v_pot: -1.6,
            v_dep: 2.4,
            hzo_thickness: 10e-9,
        }
    }
}

impl DeviceParams {
    /// LRS conductance at this area (S).
    pub fn g_lrs(&self) -> f64 {
        self.conduction.g_lrs_ref * self.area / self.conduction.area_ref
    }

    /// HRS conductance at this area (S).
    pub fn g_hrs(&self) -> f64 {
        self.g_lrs() / self.conduction.on_off
    }

    pub fn memory_window(&self) -> f64 {
        self.v_c_reset - self.v_c_set
    }

    /// Coercive field implied by the full SET voltage (MV/cm).
    pub fn coercive_field_mv_per_cm(&self) -> f64 {
        self.v_set_full.abs() / (self.hzo_thickness * 100.0) / 1e6
    }

    pub fn shape(&self, scheme: UpdateScheme) -> UpdateShape {
        match scheme {
            UpdateScheme::AmplitudeRamp | UpdateScheme::Single => self.amplitude_ramp,
            UpdateScheme::WidthRamp => self.width_ramp,
        }
    }

    /// Full write amplitude for `direction` (V).
    pub fn write_amplitude(&self, direction: Direction) -> f64 {
        match direction {
            Direction::Potentiate => self.v_pot,
            Direction::Depress => self.v_dep,
        }
    }

    /// Copy with the device area changed; endpoint conductances follow the
    /// area linearly and every voltage is unchanged.
    pub fn scale_area(&self, new_area: f64) -> Result<Self> {
        if !(new_area.is_finite() && new_area > 0.0) {
            return Err(Error::invalid(
                "area",
                format!("must be > 0, got {new_area}"),
            ));
        }
        Ok(Self {
            area: new_area,
            ..*self
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.conduction.validate()?;
        let fields = [
            ("area", self.area),
            ("v_set_full", self.v_set_full),
            ("v_reset_full", self.v_reset_full),
            ("v_c_set", self.v_c_set),
            ("v_c_reset", self.v_c_reset),
            ("v_pulse_threshold", self.v_pulse_threshold),
            ("t_width_ref", self.t_width_ref),
            ("v_pot", self.v_pot),
            ("v_dep", self.v_dep),
            ("hzo_thickness", self.hzo_thickness),
            ("amplitude_ramp.nu_p", self.amplitude_ramp.nu_p),
            ("amplitude_ramp.nu_d", self.amplitude_ramp.nu_d),
            ("width_ramp.nu_p", self.width_ramp.nu_p),
            ("width_ramp.nu_d", self.width_ramp.nu_d),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::config(
                    format!("device.{name}"),
                    format!("must be finite, got {value}"),
                ));
            }
        }
        let check = |ok: bool, field: &str, reason: String| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(format!("device.{field}"), reason))
            }
        };
        check(self.area > 0.0, "area", "must be > 0".into())?;
        check(self.n_levels >= 2, "n_levels", "must be >= 2".into())?;
        for (name, nu) in [
            ("amplitude_ramp.nu_p", self.amplitude_ramp.nu_p),
            ("amplitude_ramp.nu_d", self.amplitude_ramp.nu_d),
            ("width_ramp.nu_p", self.width_ramp.nu_p),
            ("width_ramp.nu_d", self.width_ramp.nu_d),
        ] {
            check(nu > 0.0, name, "must be > 0".into())?;
        }
        check(
            self.v_set_full <= self.v_c_set,
            "v_set_full",
            "must be <= v_c_set".into(),
        )?;
        check(self.v_c_set < 0.0, "v_c_set", "must be < 0".into())?;
        check(self.v_c_reset > 0.0, "v_c_reset", "must be > 0".into())?;
        check(
            self.v_c_reset <= self.v_reset_full,
            "v_reset_full",
            "must be >= v_c_reset".into(),
        )?;
        check(self.t_width_ref > 0.0, "t_width_ref", "must be > 0".into())?;
        check(
            self.hzo_thickness > 0.0,
            "hzo_thickness",
            "must be > 0".into(),
        )?;
        check(self.v_pot < 0.0, "v_pot", "must be negative".into())?;
        check(self.v_dep > 0.0, "v_dep", "must be positive".into())?;
        let coercive = self.v_c_set.abs().max(self.v_c_reset);
        check(
            self.v_pulse_threshold > coercive,
            "v_pulse_threshold",
            format!("must exceed the coercive voltages ({coercive} V)"),
        )?;
        let half = self.v_pot.abs().max(self.v_dep) / 2.0;
        check(
            self.v_pulse_threshold > half,
            "v_pulse_threshold",
            format!("must exceed half of every write amplitude ({half} V)"),
        )?;
        let smallest = self.v_pot.abs().min(self.v_dep);
        check(
            self.v_pulse_threshold <= smallest,
            "v_pulse_threshold",
            format!("write amplitudes ({smallest} V) must reach the threshold"),
        )?;
        Ok(())
    }
}
