use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{DeviceParams, DeviceState, Direction};
use crate::error::{ensure_finite, Error, Result};
use crate::io::fmt_f64;

/// Programming scheme a pulse belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateScheme {
    /// Constant width, increasing amplitude.
    AmplitudeRamp,
    /// Constant amplitude, increasing width.
    WidthRamp,
    /// Isolated pulse; uses the amplitude-ramp staircase.
    Single,
}

impl std::str::FromStr for UpdateScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amplitude" | "amplitude_ramp" => Ok(UpdateScheme::AmplitudeRamp),
            "width" | "width_ramp" => Ok(UpdateScheme::WidthRamp),
            "single" => Ok(UpdateScheme::Single),
            other => Err(Error::invalid(
                "scheme",
                format!("unknown scheme `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    /// Signed amplitude across the junction (V).
    pub amplitude: f64,
    /// Width (s).
    pub width: f64,
    pub scheme: UpdateScheme,
}

impl PulseSpec {
    pub fn new(amplitude: f64, width: f64, scheme: UpdateScheme) -> Self {
        Self {
            amplitude,
            width,
            scheme,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("pulse amplitude", self.amplitude)?;
        ensure_finite("pulse width", self.width)?;
        if self.width <= 0.0 {
            return Err(Error::invalid(
                "pulse width",
                format!("must be > 0, got {}", self.width),
            ));
        }
        Ok(())
    }
}

/// Perturbation of a state increment, e.g. cycle-to-cycle noise.
pub trait StepNoise {
    fn perturb(&mut self, delta_w: f64) -> f64;
}

/// Identity perturbation.
pub struct NoNoise;

impl StepNoise for NoNoise {
    fn perturb(&mut self, delta_w: f64) -> f64 {
        delta_w
    }
}

/// The `n` pulses of one programming ramp.
///
/// Amplitude ramps step linearly from the pulse threshold to the full write
/// amplitude at the reference width. Width ramps hold the full amplitude and
/// grow the width linearly up to the reference width.
pub fn pulse_train(
    scheme: UpdateScheme,
    direction: Direction,
    n: usize,
    params: &DeviceParams,
) -> Vec<PulseSpec> {
    let full = params.write_amplitude(direction);
    let sign = full.signum();
    let nf = n.max(1) as f64;
    (1..=n)
        .map(|k| {
            let frac = k as f64 / nf;
            match scheme {
                UpdateScheme::AmplitudeRamp => {
                    let thr = params.v_pulse_threshold;
                    PulseSpec::new(
                        sign * (thr + (full.abs() - thr) * frac),
                        params.t_width_ref,
                        scheme,
                    )
                }
                UpdateScheme::WidthRamp => PulseSpec::new(full, params.t_width_ref * frac, scheme),
                UpdateScheme::Single => PulseSpec::new(full, params.t_width_ref, scheme),
            }
        })
        .collect()
}

/// One read of a pulse sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Pulses applied so far within this direction's ramp.
    pub count: usize,
    pub direction: Direction,
    #[serde(rename = "conductance_S")]
    pub conductance: f64,
    #[serde(rename = "resistance_ohm")]
    pub resistance: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub points: Vec<TracePoint>,
}

impl Trace {
    /// `(count, conductance)` pairs of one direction.
    pub fn branch(&self, direction: Direction) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.direction == direction)
            .map(|p| (p.count as f64, p.conductance))
            .collect()
    }

    /// Ratio of the largest to the smallest conductance read.
    pub fn on_off(&self) -> f64 {
        let max = self
            .points
            .iter()
            .map(|p| p.conductance)
            .fold(f64::MIN, f64::max);
        let min = self
            .points
            .iter()
            .map(|p| p.conductance)
            .fold(f64::MAX, f64::min);
        max / min
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["count", "direction", "conductance_S", "resistance_ohm"])?;
        for p in &self.points {
            wtr.write_record([
                p.count.to_string(),
                p.direction.as_str().to_string(),
                fmt_f64(p.conductance),
                fmt_f64(p.resistance),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut points = Vec::new();
        for row in rdr.records() {
            let row = row?;
            if row.len() != 4 {
                return Err(Error::invalid(
                    "trace row",
                    format!("expected 4 fields, got {}", row.len()),
                ));
            }
            let parse = |i: usize, name: &'static str| -> Result<f64> {
                row[i]
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(name, format!("`{}`: {e}", &row[i])))
            };
            points.push(TracePoint {
                count: row[0]
                    .parse()
                    .map_err(|e| Error::invalid("count", format!("`{}`: {e}", &row[0])))?,
                direction: row[1].parse()?,
                conductance: parse(2, "conductance")?,
                resistance: parse(3, "resistance")?,
            });
        }
        Ok(Self { points })
    }
}

/// Read voltage of the pulse-sequence protocol (V).
pub const SEQUENCE_READ_VOLTAGE: f64 = 0.2;

/// Potentiation ramp of `n_pot` pulses followed by a depression ramp of
/// `n_dep` pulses, reading the device at +0.2 V before the first pulse of
/// each ramp and after every pulse.
pub fn run_sequence(
    state: &DeviceState,
    scheme: UpdateScheme,
    n_pot: usize,
    n_dep: usize,
    params: &DeviceParams,
    noise: Option<&mut dyn StepNoise>,
) -> Result<(DeviceState, Trace)> {
    let n_levels = params.n_levels as usize;
    if n_pot > n_levels || n_dep > n_levels {
        return Err(Error::invalid(
            "pulse count",
            format!("counts ({n_pot}, {n_dep}) exceed n_levels = {n_levels}"),
        ));
    }
    let mut silent = NoNoise;
    let noise: &mut dyn StepNoise = match noise {
        Some(n) => n,
        None => &mut silent,
    };
    let t = params.conduction.t_ref;
    let mut s = *state;
    let mut points = Vec::with_capacity(n_pot + n_dep + 2);
    let read = |s: &DeviceState, count: usize, direction: Direction| -> Result<TracePoint> {
        let resistance = s.read_resistance(SEQUENCE_READ_VOLTAGE, t, params)?;
        Ok(TracePoint {
            count,
            direction,
            conductance: 1.0 / resistance,
            resistance,
        })
    };
    for (direction, n) in [(Direction::Potentiate, n_pot), (Direction::Depress, n_dep)] {
        points.push(read(&s, 0, direction)?);
        for (k, pulse) in pulse_train(scheme, direction, n, params).iter().enumerate() {
            s = s.apply_pulse_with(pulse, params, noise)?;
            points.push(read(&s, k + 1, direction)?);
        }
    }
    Ok((s, Trace { points }))
}
