//! Open-loop and write-verify programming of conductance targets.

use super::{Crossbar, Matrix};
use crate::device::{
    dc_write, inverse_update_progress, pulse_train, update_progress, Direction, PulseSpec,
    UpdateScheme, SEQUENCE_READ_VOLTAGE,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OpenLoopReport {
    /// Targets outside `[g_hrs, g_lrs]` that were clipped.
    pub clipped: usize,
    pub pulses: usize,
    /// Mean |G_level - G_target| of the chosen noiseless levels (S).
    pub mean_quantization_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WriteVerifyReport {
    pub cells: usize,
    pub converged: usize,
    pub clipped: usize,
    pub total_pulses: usize,
    pub max_iterations: usize,
}

impl WriteVerifyReport {
    pub fn convergence_fraction(&self) -> f64 {
        self.converged as f64 / self.cells as f64
    }

    pub fn mean_iterations(&self) -> f64 {
        self.total_pulses as f64 / self.cells as f64
    }
}

impl Crossbar {
    fn check_shape(&self, target: &Matrix) -> Result<()> {
        if target.rows != self.rows || target.cols != self.cols {
            return Err(Error::Dimension {
                expected: self.rows * self.cols,
                actual: target.rows * target.cols,
            });
        }
        if let Some(bad) = target.data.iter().find(|g| !g.is_finite()) {
            return Err(Error::invalid(
                "target conductance",
                format!("must be finite, got {bad}"),
            ));
        }
        Ok(())
    }

    /// Nominal endpoints; targets are clipped into this range.
    fn clip(&self, g: f64) -> (f64, bool) {
        let lo = self.params.g_hrs();
        let hi = self.params.g_lrs();
        let clipped = g.clamp(lo, hi);
        (clipped, clipped != g)
    }

    /// Erase every cell to the HRS at once. All cells are selected, so no
    /// half-select condition arises.
    pub fn block_erase(&mut self) -> Result<()> {
        let v = self.params.v_reset_full;
        for cell in &mut self.cells {
            *cell = dc_write(cell, v, &self.params)?;
        }
        Ok(())
    }

    /// Pulse count whose noiseless potentiation level is nearest `w_target`.
    pub fn nearest_level(&self, w_target: f64) -> usize {
        let n = self.params.n_levels as usize;
        let nu = self.params.amplitude_ramp.nu_p;
        let k0 = ((inverse_update_progress(w_target.clamp(0.0, 1.0), nu) * n as f64).floor()
            as usize)
            .min(n);
        let err = |k: usize| (update_progress(k as f64 / n as f64, nu) - w_target).abs();
        (k0.saturating_sub(1)..=(k0 + 1).min(n))
            .min_by(|&a, &b| err(a).total_cmp(&err(b)).then(a.cmp(&b)))
            .unwrap_or(k0)
    }

    /// Erase the array and give each cell the number of amplitude-ramp
    /// potentiation pulses whose noiseless level is closest to its target.
    /// Levels are computed from the nominal endpoints; the programmer does not
    /// know individual devices.
    pub fn program_open_loop(&mut self, target: &Matrix) -> Result<OpenLoopReport> {
        self.check_shape(target)?;
        self.block_erase()?;
        let n = self.params.n_levels as usize;
        let train = pulse_train(
            UpdateScheme::AmplitudeRamp,
            Direction::Potentiate,
            n,
            &self.params,
        );
        let (g_lo, g_hi) = (self.params.g_hrs(), self.params.g_lrs());
        let nu = self.params.amplitude_ramp.nu_p;
        let mut clipped = 0;
        let mut pulses = 0;
        let mut q_err = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let (g_t, was_clipped) = self.clip(target.get(r, c));
                clipped += usize::from(was_clipped);
                let w_t = (g_t - g_lo) / (g_hi - g_lo);
                let k = self.nearest_level(w_t);
                q_err +=
                    (g_lo + update_progress(k as f64 / n as f64, nu) * (g_hi - g_lo) - g_t).abs();
                for pulse in &train[..k] {
                    self.pulse_cell(r, c, pulse)?;
                }
                pulses += k;
            }
        }
        Ok(OpenLoopReport {
            clipped,
            pulses,
            mean_quantization_error: q_err / (self.rows * self.cols) as f64,
        })
    }

    /// Closed-loop programming. Each cell is read at +0.2 V; while the
    /// relative error exceeds `tol` a full potentiation or depression pulse is
    /// applied and the cell re-read, for at most `max_iters` pulses.
    pub fn program_write_verify(
        &mut self,
        target: &Matrix,
        tol: f64,
        max_iters: usize,
    ) -> Result<WriteVerifyReport> {
        self.check_shape(target)?;
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::invalid(
                "tolerance",
                format!("must be > 0, got {tol}"),
            ));
        }
        let width = self.params.t_width_ref;
        let pot = PulseSpec::new(self.params.v_pot, width, UpdateScheme::AmplitudeRamp);
        let dep = PulseSpec::new(self.params.v_dep, width, UpdateScheme::AmplitudeRamp);
        let t = self.params.conduction.t_ref;
        let mut report = WriteVerifyReport {
            cells: self.rows * self.cols,
            converged: 0,
            clipped: 0,
            total_pulses: 0,
            max_iterations: 0,
        };
        for r in 0..self.rows {
            for c in 0..self.cols {
                let (g_t, was_clipped) = self.clip(target.get(r, c));
                report.clipped += usize::from(was_clipped);
                let mut iters = 0;
                loop {
                    let g =
                        self.cell(r, c)?
                            .read_current(SEQUENCE_READ_VOLTAGE, t, &self.params)?
                            / SEQUENCE_READ_VOLTAGE;
                    if (g - g_t).abs() <= tol * g_t {
                        report.converged += 1;
                        break;
                    }
                    if iters == max_iters {
                        break;
                    }
                    let pulse = if g < g_t { &pot } else { &dep };
                    self.pulse_cell(r, c, pulse)?;
                    iters += 1;
                }
                report.total_pulses += iters;
                report.max_iterations = report.max_iterations.max(iters);
            }
        }
        Ok(report)
    }

    /// Set every cell directly to its target conductance (clipped to the
    /// device's own endpoints). Idealised, quantisation-free programming.
    pub fn program_exact(&mut self, target: &Matrix) -> Result<()> {
        self.check_shape(target)?;
        for (cell, &g) in self.cells.iter_mut().zip(&target.data) {
            *cell = cell.with_conductance(g);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{update_curve, DeviceParams};
    use crate::stochastic::VariabilityParams;

    fn xbar(rows: usize, cols: usize) -> Crossbar {
        Crossbar::new(
            rows,
            cols,
            DeviceParams::default(),
            VariabilityParams::ideal(),
        )
        .unwrap()
    }

    #[test]
    fn open_loop_endpoints_exact() {
        let p = DeviceParams::default();
        let mut x = xbar(2, 2);
        let target =
            Matrix::from_rows(&[vec![p.g_hrs(), p.g_lrs()], vec![p.g_lrs(), p.g_hrs()]]).unwrap();
        let rep = x.program_open_loop(&target).unwrap();
        assert_eq!(rep.clipped, 0);
        assert_eq!(x.conductance_matrix(), target);
    }

    #[test]
    fn open_loop_quantization_bound() {
        let p = DeviceParams::default();
        let n = p.n_levels as usize;
        let nu = p.amplitude_ramp.nu_p;
        let span = p.g_lrs() - p.g_hrs();
        let targets: Vec<f64> = (0..=40)
            .map(|i| p.g_hrs() + span * i as f64 / 40.0)
            .collect();
        let mut x = xbar(1, targets.len());
        let target = Matrix {
            rows: 1,
            cols: targets.len(),
            data: targets.clone(),
        };
        x.program_open_loop(&target).unwrap();
        let levels: Vec<f64> = (0..=n)
            .map(|k| {
                p.g_hrs() + span * update_curve(k as f64 / n as f64, nu, Direction::Potentiate)
            })
            .collect();
        for (cell, &g_t) in x.cells().iter().zip(&targets) {
            let g = cell.conductance();
            // local step around the target
            let upper = levels.iter().position(|&l| l >= g_t - 1e-24).unwrap();
            let step = if upper == 0 {
                0.0
            } else {
                levels[upper] - levels[upper - 1]
            };
            assert!(
                (g - g_t).abs() <= step / 2.0 + 1e-22,
                "target {g_t}: got {g}, step {step}"
            );
        }
    }

    #[test]
    fn write_verify_clips() {
        let p = DeviceParams::default();
        let mut x = xbar(1, 2);
        let target = Matrix::from_rows(&[vec![p.g_lrs() * 2.0, p.g_hrs() / 3.0]]).unwrap();
        let rep = x.program_write_verify(&target, 0.05, 60).unwrap();
        assert_eq!(rep.clipped, 2);
        assert_eq!(rep.converged, 2);
        let g = x.cell(0, 0).unwrap().conductance();
        assert!((g - p.g_lrs()).abs() <= 0.05 * p.g_lrs());
    }

    #[test]
    fn shape_mismatch() {
        let mut x = xbar(2, 2);
        assert!(x.program_open_loop(&Matrix::zeros(2, 3)).is_err());
        assert!(x
            .program_write_verify(&Matrix::zeros(2, 2), 0.0, 10)
            .is_err());
    }
}
