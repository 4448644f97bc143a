use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{current, ConductionParams};
use crate::error::Result;

/// One point of an I(V, T) sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    #[serde(rename = "voltage_V")]
    pub voltage: f64,
    /// Current density (A/µm²).
    #[serde(rename = "current_density_A_per_um2")]
    pub current_density: f64,
    #[serde(rename = "temperature_K")]
    pub temperature: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepRecord {
    pub samples: Vec<SweepSample>,
}

impl SweepRecord {
    pub fn new(samples: Vec<SweepSample>) -> Self {
        Self { samples }
    }

    /// Sweep produced by the forward model for a junction of small-signal
    /// conductance `g_state` and area `area` (µm²).
    pub fn from_model(
        p: &ConductionParams,
        g_state: f64,
        area: f64,
        voltages: &[f64],
        temperatures: &[f64],
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(voltages.len() * temperatures.len());
        for &t in temperatures {
            for &v in voltages {
                samples.push(SweepSample {
                    voltage: v,
                    current_density: current(v, g_state, t, p)? / area,
                    temperature: t,
                });
            }
        }
        Ok(Self { samples })
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let samples = rdr.deserialize().collect::<Result<Vec<SweepSample>, _>>()?;
        Ok(Self { samples })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for s in &self.samples {
            wtr.serialize(s)?;
        }
        if self.samples.is_empty() {
            wtr.write_record(["voltage_V", "current_density_A_per_um2", "temperature_K"])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Samples with `lo <= |V| <= hi` and non-zero voltage. Bounds are
    /// widened by 1 nV so grid points computed in floating point stay in.
    pub fn window(&self, lo: f64, hi: f64) -> SweepRecord {
        const EDGE: f64 = 1e-9;
        let samples = self
            .samples
            .iter()
            .filter(|s| {
                let v = s.voltage.abs();
                s.voltage != 0.0 && v >= lo - EDGE && v <= hi + EDGE
            })
            .copied()
            .collect();
        SweepRecord { samples }
    }
}
