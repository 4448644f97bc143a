//! Conduction through one junction.
//!
//! Two regimes are modelled. At low field the junction is Ohmic with a
//! thermally activated conductance. Above `v_pf_min` the Poole-Frenkel field
//! lowering of the trap barrier multiplies the Ohmic current by
//!
//! ```text
//! h(v, T) = exp(beta * (sqrt(v) - sqrt(v_pf_min)) / kT)
//! ```
//!
//! anchored so that `h(v_pf_min) = 1` and frozen above `v_clamp`. The state of
//! the junction only enters through the small-signal conductance, so the
//! ratio of any two states is independent of voltage and temperature.

mod fit;
mod sweep;

pub use fit::{
    fit_ohmic, fit_poole_frenkel, OhmicFit, OhmicFitOptions, OhmicTemperatureFit, PfFit,
    PfFitOptions, PfTemperatureFit,
};
pub use sweep::{SweepRecord, SweepSample};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Boltzmann constant in eV/K.
pub const BOLTZMANN_EV: f64 = 8.617_333_262e-5;

/// Thermal energy kT in eV.
pub fn thermal_energy(t: f64) -> f64 {
    BOLTZMANN_EV * t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConductionParams {
    /// Small-signal LRS conductance at `area_ref` and `t_ref` (S).
    pub g_lrs_ref: f64,
    /// LRS/HRS conductance ratio.
    pub on_off: f64,
    /// Reference device area (µm²).
    pub area_ref: f64,
    /// Activation energy of the Ohmic conductance (eV).
    pub e_a: f64,
    /// Poole-Frenkel field lowering coefficient (eV·V^-1/2).
    pub beta: f64,
    /// Upper edge of the Ohmic regime (V).
    pub v_ohmic_max: f64,
    /// Onset of the Poole-Frenkel regime (V).
    pub v_pf_min: f64,
    /// Voltage above which the Poole-Frenkel exponent stops growing (V).
    pub v_clamp: f64,
    /// Reference temperature (K).
    pub t_ref: f64,
}

impl Default for ConductionParams {
    fn default() -> Self {
        Self {
            g_lrs_ref: 1e-8,
            on_off: 7.0,
            area_ref: 14_400.0,
            e_a: 0.15,
            beta: 0.4,
            v_ohmic_max: 0.1,
            v_pf_min: 0.2,
            v_clamp: 1.0,
            t_ref: 300.0,
        }
    }
}

impl ConductionParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g_lrs_ref", self.g_lrs_ref),
            ("on_off", self.on_off),
            ("area_ref", self.area_ref),
            ("e_a", self.e_a),
            ("beta", self.beta),
            ("v_ohmic_max", self.v_ohmic_max),
            ("v_pf_min", self.v_pf_min),
            ("v_clamp", self.v_clamp),
            ("t_ref", self.t_ref),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(Error::config(
                    format!("conduction.{name}"),
                    format!("must be finite, got {value}"),
                ));
            }
        }
        let check = |ok: bool, field: &str, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(format!("conduction.{field}"), reason))
            }
        };
        check(self.g_lrs_ref > 0.0, "g_lrs_ref", "must be > 0")?;
        check(self.on_off > 1.0, "on_off", "must be > 1")?;
        check(self.area_ref > 0.0, "area_ref", "must be > 0")?;
        check(self.e_a >= 0.0, "e_a", "must be >= 0")?;
        check(self.beta >= 0.0, "beta", "must be >= 0")?;
        check(self.t_ref > 0.0, "t_ref", "must be > 0")?;
        check(self.v_ohmic_max > 0.0, "v_ohmic_max", "must be > 0")?;
        check(
            self.v_ohmic_max <= self.v_pf_min,
            "v_pf_min",
            "must be >= v_ohmic_max",
        )?;
        check(
            self.v_pf_min < self.v_clamp,
            "v_clamp",
            "must be > v_pf_min",
        )?;
        Ok(())
    }

    /// Small-signal HRS conductance at reference area and temperature (S).
    pub fn g_hrs_ref(&self) -> f64 {
        self.g_lrs_ref / self.on_off
    }

    /// Barrier height a textbook Poole-Frenkel fit reports for this model.
    ///
    /// Writing the anchored PF branch as `ln(J/V) = c + beta*sqrt(V)/kT - phi/kT`
    /// gives `phi = e_a + beta*sqrt(v_pf_min)`.
    pub fn apparent_pf_barrier(&self) -> f64 {
        self.e_a + self.beta * self.v_pf_min.sqrt()
    }
}

/// Poole-Frenkel enhancement over the Ohmic current at `v >= 0`.
pub fn shape_factor(v: f64, t: f64, p: &ConductionParams) -> Result<f64> {
    ensure_finite("voltage", v)?;
    ensure_finite("temperature", t)?;
    if v < 0.0 {
        return Err(Error::invalid("voltage", format!("must be >= 0, got {v}")));
    }
    if t <= 0.0 {
        return Err(Error::invalid(
            "temperature",
            format!("must be > 0, got {t}"),
        ));
    }
    Ok(shape_factor_unchecked(v, t, p))
}

fn shape_factor_unchecked(v: f64, t: f64, p: &ConductionParams) -> f64 {
    if v <= p.v_pf_min || p.beta == 0.0 {
        return 1.0;
    }
    let v_eff = v.min(p.v_clamp);
    (p.beta * (v_eff.sqrt() - p.v_pf_min.sqrt()) / thermal_energy(t)).exp()
}

/// Thermal activation of the conductance relative to `t_ref`.
pub fn activation_factor(t: f64, p: &ConductionParams) -> f64 {
    if t == p.t_ref || p.e_a == 0.0 {
        return 1.0;
    }
    (-p.e_a * (1.0 / thermal_energy(t) - 1.0 / thermal_energy(p.t_ref))).exp()
}

/// Current (A) through a junction of small-signal conductance `g_state` (S).
pub fn current(v: f64, g_state: f64, t: f64, p: &ConductionParams) -> Result<f64> {
    ensure_finite("voltage", v)?;
    ensure_finite("temperature", t)?;
    ensure_finite("conductance", g_state)?;
    if g_state <= 0.0 {
        return Err(Error::invalid(
            "conductance",
            format!("must be > 0, got {g_state}"),
        ));
    }
    if t <= 0.0 {
        return Err(Error::invalid(
            "temperature",
            format!("must be > 0, got {t}"),
        ));
    }
    Ok(current_unchecked(v, g_state, t, p))
}

pub(crate) fn current_unchecked(v: f64, g_state: f64, t: f64, p: &ConductionParams) -> f64 {
    let magnitude =
        g_state * activation_factor(t, p) * v.abs() * shape_factor_unchecked(v.abs(), t, p);
    if v < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

/// Positive voltage at which a junction of conductance `g_state` carries
/// current `i >= 0`; inverse of [`current`] on the positive branch.
pub fn voltage_for_current(i: f64, g_state: f64, t: f64, p: &ConductionParams) -> Result<f64> {
    ensure_finite("current", i)?;
    if i < 0.0 {
        return Err(Error::invalid("current", format!("must be >= 0, got {i}")));
    }
    // validates g_state and t
    current(p.v_pf_min, g_state, t, p)?;
    Ok(voltage_for_current_unchecked(i, g_state, t, p))
}

pub(crate) fn voltage_for_current_unchecked(
    i: f64,
    g_state: f64,
    t: f64,
    p: &ConductionParams,
) -> f64 {
    let g_eff = g_state * activation_factor(t, p);
    let ohmic = i / g_eff;
    if ohmic <= p.v_pf_min || p.beta == 0.0 {
        return ohmic;
    }
    let h_clamp = shape_factor_unchecked(p.v_clamp, t, p);
    if ohmic >= p.v_clamp * h_clamp {
        return ohmic / h_clamp;
    }
    // Solve 2 ln u + b u - b sqrt(v_pf_min) = ln(i / g_eff) for u = sqrt(v).
    // The left side is increasing and concave in u, so Newton iterates
    // started below the root increase monotonically towards it.
    let b = p.beta / thermal_energy(t);
    let u0 = p.v_pf_min.sqrt();
    let target = ohmic.ln();
    let mut u = u0;
    for _ in 0..100 {
        let f = 2.0 * u.ln() + b * (u - u0) - target;
        let step = f / (2.0 / u + b);
        let next = u - step;
        if next <= u {
            break;
        }
        u = next;
    }
    (u * u).min(p.v_clamp)
}

/// `I(v) / I(v/2)` at fixed state.
pub fn nonlinearity_ratio(v: f64, t: f64, p: &ConductionParams) -> Result<f64> {
    ensure_finite("voltage", v)?;
    if v <= 0.0 {
        return Err(Error::invalid("voltage", format!("must be > 0, got {v}")));
    }
    let full = current(v, 1.0, t, p)?;
    let half = current(v / 2.0, 1.0, t, p)?;
    Ok(full / half)
}
