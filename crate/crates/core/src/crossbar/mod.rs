//! Selector-free crossbar arrays.
//!
//! Cells sit at row/column crossings with ideal (zero resistance) wires.
//! Writes use the V/2 scheme: the selected row is driven to `+V/2`, the
//! selected column to `-V/2` and every other line is grounded, so the
//! selected cell sees `V`, its row and column neighbours see `V/2` and the
//! rest see nothing. Reads drive rows with voltages and sum column currents
//! into grounded columns.

mod program;
mod sneak;

pub use program::{OpenLoopReport, WriteVerifyReport};
pub use sneak::series_current;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::conduction::current_unchecked;
use crate::device::{DeviceParams, DeviceState, PulseSpec};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::stochastic::{sample_population, split_seed, C2cNoise, VariabilityParams};

/// Largest read voltage accepted by array reads (V).
pub const MAX_READ_VOLTAGE: f64 = 0.3;

const STREAM_D2D: u64 = 1;
const STREAM_C2C: u64 = 2;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            if r.len() != n_cols {
                return Err(Error::Dimension {
                    expected: n_cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self { rows, cols, data }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// `self * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                actual: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * x[c]).sum())
            .collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasKind {
    /// Unselected lines grounded, selected row/column at `±V/2`.
    VHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BiasScheme {
    pub scheme: BiasKind,
    /// Potentiation write amplitude across the selected cell (V).
    pub v_write_pot: f64,
    /// Depression write amplitude across the selected cell (V).
    pub v_write_dep: f64,
    /// Read voltage (V).
    pub v_read: f64,
}

impl Default for BiasScheme {
    fn default() -> Self {
        let p = DeviceParams::default();
        Self {
            scheme: BiasKind::VHalf,
            v_write_pot: p.v_pot,
            v_write_dep: p.v_dep,
            v_read: 0.1,
        }
    }
}

impl BiasScheme {
    pub fn validate(&self, params: &DeviceParams) -> Result<()> {
        for (name, v) in [
            ("v_write_pot", self.v_write_pot),
            ("v_write_dep", self.v_write_dep),
        ] {
            if !v.is_finite() {
                return Err(Error::config(format!("bias.{name}"), "must be finite"));
            }
            if v.abs() / 2.0 >= params.v_pulse_threshold {
                return Err(Error::config(
                    format!("bias.{name}"),
                    format!(
                        "half-select level {} V reaches the pulse threshold {} V",
                        v.abs() / 2.0,
                        params.v_pulse_threshold
                    ),
                ));
            }
        }
        if !(self.v_read.is_finite() && self.v_read.abs() <= MAX_READ_VOLTAGE) {
            return Err(Error::config(
                "bias.v_read",
                format!("must satisfy |v_read| <= {MAX_READ_VOLTAGE} V"),
            ));
        }
        Ok(())
    }
}

/// Outcome of one V/2 write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DisturbReport {
    pub selected_changed: bool,
    /// Unselected cells whose state changed.
    pub disturbed: usize,
}

#[derive(Debug, Clone)]
pub struct Crossbar {
    rows: usize,
    cols: usize,
    cells: Vec<DeviceState>,
    pub params: DeviceParams,
    pub vp: VariabilityParams,
    noise: C2cNoise,
}

impl Crossbar {
    /// Array of nominal devices in the HRS.
    pub fn new(
        rows: usize,
        cols: usize,
        params: DeviceParams,
        vp: VariabilityParams,
    ) -> Result<Self> {
        let cells = vec![DeviceState::hrs(&params); rows * cols];
        Self::from_cells(rows, cols, cells, params, vp)
    }

    /// Array with device-to-device dispersion drawn from `vp.seed`.
    pub fn sampled(
        rows: usize,
        cols: usize,
        params: DeviceParams,
        vp: VariabilityParams,
    ) -> Result<Self> {
        let cells = sample_population(rows * cols, &params, &vp, split_seed(vp.seed, STREAM_D2D));
        Self::from_cells(rows, cols, cells, params, vp)
    }

    pub fn from_cells(
        rows: usize,
        cols: usize,
        cells: Vec<DeviceState>,
        params: DeviceParams,
        vp: VariabilityParams,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("array size", "rows and cols must be >= 1"));
        }
        if cells.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                actual: cells.len(),
            });
        }
        params.validate()?;
        vp.validate()?;
        let noise = C2cNoise::from_seed(vp.sigma_c2c, split_seed(vp.seed, STREAM_C2C));
        Ok(Self {
            rows,
            cols,
            cells,
            params,
            vp,
            noise,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[DeviceState] {
        &self.cells
    }

    fn index(&self, r: usize, c: usize) -> Result<usize> {
        if r >= self.rows || c >= self.cols {
            return Err(Error::OutOfBounds {
                row: r,
                col: c,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(r * self.cols + c)
    }

    pub fn cell(&self, r: usize, c: usize) -> Result<&DeviceState> {
        Ok(&self.cells[self.index(r, c)?])
    }

    pub fn set_cell(&mut self, r: usize, c: usize, state: DeviceState) -> Result<()> {
        let i = self.index(r, c)?;
        self.cells[i] = state;
        Ok(())
    }

    /// Small-signal conductances at the reference temperature (S).
    pub fn conductance_matrix(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |r, c| {
            self.cells[r * self.cols + c].conductance()
        })
    }

    /// V/2 write of `pulse` to cell `(r, c)`.
    pub fn write_cell(&mut self, r: usize, c: usize, pulse: &PulseSpec) -> Result<DisturbReport> {
        let sel = self.index(r, c)?;
        pulse.validate()?;
        let half = PulseSpec {
            amplitude: pulse.amplitude / 2.0,
            ..*pulse
        };
        let mut disturbed = 0;
        let half_selected = (0..self.cols)
            .filter(|&j| j != c)
            .map(|j| r * self.cols + j)
            .chain(
                (0..self.rows)
                    .filter(|&i| i != r)
                    .map(|i| i * self.cols + c),
            );
        for k in half_selected.collect::<Vec<_>>() {
            let before = self.cells[k];
            let after = before.apply_pulse_with(&half, &self.params, &mut self.noise)?;
            if after != before {
                disturbed += 1;
            }
            self.cells[k] = after;
        }
        let before = self.cells[sel];
        let after = before.apply_pulse_with(pulse, &self.params, &mut self.noise)?;
        self.cells[sel] = after;
        Ok(DisturbReport {
            selected_changed: after != before,
            disturbed,
        })
    }

    /// Program one cell with `pulse`. Takes the full V/2 path only when the
    /// half-select level could disturb neighbours; otherwise the result is
    /// identical to [`Crossbar::write_cell`] without touching them.
    fn pulse_cell(&mut self, r: usize, c: usize, pulse: &PulseSpec) -> Result<()> {
        if pulse.amplitude.abs() / 2.0 >= self.params.v_pulse_threshold {
            self.write_cell(r, c, pulse)?;
        } else {
            let k = self.index(r, c)?;
            self.cells[k] = self.cells[k].apply_pulse_with(pulse, &self.params, &mut self.noise)?;
        }
        Ok(())
    }

    /// Column currents for row voltages `x` at temperature `t` (A).
    pub fn read_vmm(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(Error::Dimension {
                expected: self.rows,
                actual: x.len(),
            });
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::invalid(
                "temperature",
                format!("must be > 0, got {t}"),
            ));
        }
        for &v in x {
            if !(v.is_finite() && v.abs() <= MAX_READ_VOLTAGE) {
                return Err(Error::invalid(
                    "row voltage",
                    format!("must satisfy |v| <= {MAX_READ_VOLTAGE} V, got {v}"),
                ));
            }
        }
        let p = &self.params.conduction;
        let mut out = vec![0.0; self.cols];
        for (i, &v) in x.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let row = &self.cells[i * self.cols..(i + 1) * self.cols];
            for (acc, cell) in out.iter_mut().zip(row) {
                *acc += current_unchecked(v, cell.conductance(), t, p);
            }
        }
        Ok(out)
    }

    /// CSV snapshot with columns `row,col,w,g_S`.
    pub fn write_snapshot_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["row", "col", "w", "g_S"])?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let cell = &self.cells[r * self.cols + c];
                wtr.write_record([
                    r.to_string(),
                    c.to_string(),
                    fmt_f64(cell.w),
                    fmt_f64(cell.conductance()),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::UpdateScheme;

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
    fn default_writes_do_not_disturb() {
        let mut x = xbar(5, 7);
        for r in 0..5 {
            for c in 0..7 {
                x.set_cell(r, c, x.cell(r, c).unwrap().with_w(0.5)).unwrap();
            }
        }
        let before = x.cells().to_vec();
        let rep = x
            .write_cell(2, 3, &PulseSpec::new(2.4, 50e-6, UpdateScheme::Single))
            .unwrap();
        assert_eq!(rep.disturbed, 0);
        assert!(rep.selected_changed);
        for (k, (a, b)) in before.iter().zip(x.cells()).enumerate() {
            if k != 2 * 7 + 3 {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn single_cell_array() {
        let mut x = xbar(1, 1);
        let rep = x
            .write_cell(0, 0, &PulseSpec::new(-1.6, 50e-6, UpdateScheme::Single))
            .unwrap();
        assert_eq!(
            rep,
            DisturbReport {
                selected_changed: true,
                disturbed: 0
            }
        );
    }

    #[test]
    fn overdriven_half_select_disturbs() {
        let p = DeviceParams::default();
        let (rows, cols) = (4, 6);
        let cells = vec![DeviceState::lrs(&p); rows * cols];
        let mut x = Crossbar::from_cells(rows, cols, cells, p, VariabilityParams::ideal()).unwrap();
        let rep = x
            .write_cell(1, 2, &PulseSpec::new(3.0, 50e-6, UpdateScheme::Single))
            .unwrap();
        assert_eq!(rep.disturbed, rows + cols - 2);
    }

    #[test]
    fn out_of_bounds() {
        let mut x = xbar(2, 2);
        let pulse = PulseSpec::new(-1.6, 50e-6, UpdateScheme::Single);
        assert!(matches!(
            x.write_cell(2, 0, &pulse),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(x.read_vmm(&[0.1], 300.0).is_err());
        assert!(x.read_vmm(&[0.1, 0.31], 300.0).is_err());
    }

    #[test]
    fn one_hot_read() {
        let p = DeviceParams::default();
        let mut x = xbar(3, 3);
        x.set_cell(1, 2, DeviceState::lrs(&p)).unwrap();
        let i = x.read_vmm(&[0.0, 0.1, 0.0], 300.0).unwrap();
        assert_eq!(i[2], 1e-9);
        assert_eq!(i[0], p.g_hrs() * 0.1);
    }

    #[test]
    fn bias_scheme_validation() {
        let p = DeviceParams::default();
        assert!(BiasScheme::default().validate(&p).is_ok());
        let bad = BiasScheme {
            v_write_dep: 3.0,
            ..Default::default()
        };
        assert!(bad.validate(&p).is_err());
        let bad = BiasScheme {
            v_read: 0.5,
            ..Default::default()
        };
        assert!(bad.validate(&p).is_err());
    }

    #[test]
    fn snapshot_header() {
        let x = xbar(2, 2);
        let mut buf = Vec::new();
        x.write_snapshot_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("row,col,w,g_S\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
