//! Neural-network inference on programmed crossbars.
//!
//! Each weight is a differential pair of cells. With `s` siemens per unit
//! weight, a positive weight `w` puts `G+ = g_hrs + w s` and `G- = g_hrs`;
//! negative weights mirror that. A layer with `n_in` inputs and `n_out`
//! outputs uses two `n_in x n_out` arrays whose rows are driven with the
//! input voltages. Inputs are amplitude encoded: the largest |input| of the
//! vector maps to `v_read`, and the digital scale is restored after the
//! column currents are subtracted.

mod dataset;
mod mlp;

pub use dataset::{Dataset, TOY_SEED};
pub use mlp::{accuracy, argmax, train, Mlp, MlpSpec, TrainOptions};

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossbar::{Crossbar, Matrix};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::stochastic::{split_seed, VariabilityParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightMapping {
    /// Conductance per unit weight (S).
    pub siemens_per_weight: f64,
    pub g_hrs: f64,
    pub g_lrs: f64,
    /// Read voltage standing for the largest input magnitude (V).
    pub v_read: f64,
}

/// Target conductances of one layer, both `n_in x n_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedWeights {
    pub g_pos: Matrix,
    pub g_neg: Matrix,
    pub mapping: WeightMapping,
}

/// Map an `out x in` weight matrix onto differential conductance pairs.
pub fn map_weights(w: &Matrix, params: &DeviceParams, v_read: f64) -> Result<MappedWeights> {
    if !(v_read.is_finite() && v_read > 0.0 && v_read <= params.conduction.v_ohmic_max) {
        return Err(Error::invalid(
            "v_read",
            format!(
                "must lie in (0, {}] to keep reads linear, got {v_read}",
                params.conduction.v_ohmic_max
            ),
        ));
    }
    if w.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("weights", "must be finite"));
    }
    let (g_hrs, g_lrs) = (params.g_hrs(), params.g_lrs());
    let span = g_lrs - g_hrs;
    let max = w.max_abs();
    let siemens_per_weight = if max > 0.0 { span / max } else { span };
    let wt = w.transpose();
    let pair = |sign: f64| {
        Matrix::from_fn(wt.rows, wt.cols, |r, c| {
            let v = sign * wt.get(r, c);
            if v > 0.0 {
                // the largest weight lands on g_lrs exactly
                if v == max {
                    g_lrs
                } else {
                    g_hrs + v * siemens_per_weight
                }
            } else {
                g_hrs
            }
        })
    };
    Ok(MappedWeights {
        g_pos: pair(1.0),
        g_neg: pair(-1.0),
        mapping: WeightMapping {
            siemens_per_weight,
            g_hrs,
            g_lrs,
            v_read,
        },
    })
}

/// Inverse of [`map_weights`] on ideal conductances: the `out x in` weights.
pub fn unmap_weights(g_pos: &Matrix, g_neg: &Matrix, mapping: &WeightMapping) -> Matrix {
    Matrix::from_fn(g_pos.cols, g_pos.rows, |r, c| {
        (g_pos.get(c, r) - g_neg.get(c, r)) / mapping.siemens_per_weight
    })
}

/// How target conductances are written into the arrays.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Programming {
    /// Cells set directly to their targets, no quantisation or noise.
    Exact,
    /// Nearest staircase level from an erased array.
    #[default]
    OpenLoop,
    WriteVerify {
        tol: f64,
        max_iters: usize,
    },
}

#[derive(Debug, Clone)]
pub struct AnalogLayer {
    pub pos: Crossbar,
    pub neg: Crossbar,
    pub mapping: WeightMapping,
}

#[derive(Debug, Clone)]
pub struct AnalogNetwork {
    pub layers: Vec<AnalogLayer>,
    /// Read temperature (K).
    pub temperature: f64,
}

impl AnalogNetwork {
    /// Map and program every layer of `mlp`. Array `k` of the network
    /// (positive and negative arrays of each layer in order) draws its
    /// variability from `split_seed(vp.seed, k)`.
    pub fn program(
        mlp: &Mlp,
        params: &DeviceParams,
        vp: &VariabilityParams,
        programming: Programming,
        v_read: f64,
    ) -> Result<Self> {
        let mut layers = Vec::with_capacity(mlp.weights.len());
        for (k, w) in mlp.weights.iter().enumerate() {
            let mapped = map_weights(w, params, v_read)?;
            let mut arrays = [
                (&mapped.g_pos, 2 * k as u64),
                (&mapped.g_neg, 2 * k as u64 + 1),
            ]
            .into_iter()
            .map(|(target, stream)| {
                let array_vp = VariabilityParams {
                    seed: split_seed(vp.seed, stream),
                    ..*vp
                };
                let mut xbar = Crossbar::sampled(target.rows, target.cols, *params, array_vp)?;
                match programming {
                    Programming::Exact => xbar.program_exact(target)?,
                    Programming::OpenLoop => {
                        xbar.program_open_loop(target)?;
                    }
                    Programming::WriteVerify { tol, max_iters } => {
                        xbar.program_write_verify(target, tol, max_iters)?;
                    }
                }
                Ok(xbar)
            })
            .collect::<Result<Vec<_>>>()?;
            let neg = arrays.pop().expect("two arrays");
            let pos = arrays.pop().expect("two arrays");
            layers.push(AnalogLayer {
                pos,
                neg,
                mapping: mapped.mapping,
            });
        }
        Ok(Self {
            layers,
            temperature: params.conduction.t_ref,
        })
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut h = x.to_vec();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let m = &layer.mapping;
            let scale = h.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if scale == 0.0 {
                h = vec![0.0; layer.pos.cols()];
                continue;
            }
            let volts: Vec<f64> = h.iter().map(|v| v / scale * m.v_read).collect();
            let i_pos = layer.pos.read_vmm(&volts, self.temperature)?;
            let i_neg = layer.neg.read_vmm(&volts, self.temperature)?;
            h = i_pos
                .iter()
                .zip(&i_neg)
                .map(|(p, n)| (p - n) * scale / (m.siemens_per_weight * m.v_read))
                .collect();
            if k < last {
                mlp::relu(&mut h);
            }
        }
        Ok(h)
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.forward(x)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassAccuracy {
    pub class: usize,
    pub samples: usize,
    pub baseline: f64,
    pub analog: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    pub baseline_accuracy: f64,
    pub analog_accuracy: f64,
    pub per_class: Vec<ClassAccuracy>,
}

impl AccuracyReport {
    /// Accuracy lost by the analog network, in percentage points.
    pub fn degradation_points(&self) -> f64 {
        100.0 * (self.baseline_accuracy - self.analog_accuracy)
    }
}

/// Classification accuracy of `analog` against the float `baseline` on
/// the same samples.
pub fn evaluate<F>(analog: F, baseline: &Mlp, data: &Dataset) -> Result<AccuracyReport>
where
    F: Fn(&[f64]) -> Result<usize> + Sync,
{
    let outcomes = data
        .features
        .par_iter()
        .zip(&data.labels)
        .map(|(x, &y)| Ok((y, baseline.predict(x)? == y, analog(x)? == y)))
        .collect::<Result<Vec<_>>>()?;
    let n = outcomes.len() as f64;
    let mut per_class: Vec<ClassAccuracy> = (0..data.n_classes)
        .map(|class| ClassAccuracy {
            class,
            samples: 0,
            baseline: 0.0,
            analog: 0.0,
        })
        .collect();
    let (mut base_ok, mut analog_ok) = (0usize, 0usize);
    for &(y, b, a) in &outcomes {
        base_ok += usize::from(b);
        analog_ok += usize::from(a);
        let c = &mut per_class[y];
        c.samples += 1;
        c.baseline += f64::from(u8::from(b));
        c.analog += f64::from(u8::from(a));
    }
    for c in &mut per_class {
        if c.samples > 0 {
            c.baseline /= c.samples as f64;
            c.analog /= c.samples as f64;
        }
    }
    Ok(AccuracyReport {
        baseline_accuracy: base_ok as f64 / n,
        analog_accuracy: analog_ok as f64 / n,
        per_class,
    })
}

/// One report per seed; each seed programs a fresh analog copy of `mlp`.
pub fn evaluate_seeds(
    mlp: &Mlp,
    data: &Dataset,
    params: &DeviceParams,
    vp: &VariabilityParams,
    programming: Programming,
    v_read: f64,
    seeds: &[u64],
) -> Result<Vec<AccuracyReport>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let vp = VariabilityParams { seed, ..*vp };
            let net = AnalogNetwork::program(mlp, params, &vp, programming, v_read)?;
            evaluate(|x| net.predict(x), mlp, data)
        })
        .collect()
}

/// CSV with one row per seed: `seed,baseline_accuracy,analog_accuracy,degradation_points`.
pub fn write_seed_report<W: Write>(
    writer: W,
    seeds: &[u64],
    reports: &[AccuracyReport],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record([
        "seed",
        "baseline_accuracy",
        "analog_accuracy",
        "degradation_points",
    ])?;
    for (seed, r) in seeds.iter().zip(reports) {
        wtr.write_record([
            seed.to_string(),
            fmt_f64(r.baseline_accuracy),
            fmt_f64(r.analog_accuracy),
            fmt_f64(r.degradation_points()),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_map_to_hrs() {
        let p = DeviceParams::default();
        let m = map_weights(&Matrix::zeros(3, 5), &p, 0.1).unwrap();
        assert!(m
            .g_pos
            .data
            .iter()
            .chain(&m.g_neg.data)
            .all(|&g| g == p.g_hrs()));
        assert_eq!((m.g_pos.rows, m.g_pos.cols), (5, 3));
    }

    #[test]
    fn max_weight_hits_lrs() {
        let p = DeviceParams::default();
        let w = Matrix::from_rows(&[vec![0.3, -1.7], vec![1.2, 0.0]]).unwrap();
        let m = map_weights(&w, &p, 0.1).unwrap();
        assert_eq!(m.g_neg.get(1, 0), p.g_lrs());
        assert_eq!(m.g_pos.get(1, 0), p.g_hrs());
        let back = unmap_weights(&m.g_pos, &m.g_neg, &m.mapping);
        for (a, b) in back.data.iter().zip(&w.data) {
            assert!((a - b).abs() <= 1e-12 * 1.7, "{a} vs {b}");
        }
    }

    #[test]
    fn read_voltage_must_be_ohmic() {
        let p = DeviceParams::default();
        assert!(map_weights(&Matrix::zeros(1, 1), &p, 0.15).is_err());
        assert!(map_weights(&Matrix::zeros(1, 1), &p, 0.0).is_err());
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let p = DeviceParams::default();
        let w = Matrix::from_rows(&[vec![1.0, -2.0], vec![0.5, 0.25]]).unwrap();
        let mlp = Mlp::new(vec![w]).unwrap();
        let net = AnalogNetwork::program(
            &mlp,
            &p,
            &VariabilityParams::ideal(),
            Programming::Exact,
            0.1,
        )
        .unwrap();
        assert_eq!(net.forward(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn signed_unit_weights_count_exactly() {
        let p = DeviceParams::default();
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|r| {
                (0..4)
                    .map(|c| if (r + c) % 3 == 0 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect();
        let w = Matrix::from_rows(&rows).unwrap();
        let mlp = Mlp::new(vec![w.clone()]).unwrap();
        let net = AnalogNetwork::program(
            &mlp,
            &p,
            &VariabilityParams::ideal(),
            Programming::OpenLoop,
            0.1,
        )
        .unwrap();
        for pattern in 0..16u32 {
            let x: Vec<f64> = (0..4).map(|i| f64::from((pattern >> i) & 1)).collect();
            let y = net.forward(&x).unwrap();
            let expected = w.mul_vec(&x).unwrap();
            for (a, b) in y.iter().zip(&expected) {
                assert!(
                    (a - b).abs() < 1e-9,
                    "pattern {pattern}: {y:?} vs {expected:?}"
                );
            }
        }
    }
}
