//! Quasi-static writes and the R(V_write) hysteresis loop.

use serde::Serialize;

use super::{DeviceParams, DeviceState};
use crate::error::{ensure_finite, Error, Result};

/// Read voltage of the hysteresis protocol (V).
pub const HYSTERESIS_READ_VOLTAGE: f64 = 0.3;

/// DC write of amplitude `v_write`.
///
/// Between the coercive voltages nothing happens. Beyond `v_c_set` the state
/// is raised to at least the fraction of the way from `v_c_set` to
/// `v_set_full`; beyond `v_c_reset` it is lowered symmetrically towards HRS.
pub fn dc_write(state: &DeviceState, v_write: f64, params: &DeviceParams) -> Result<DeviceState> {
    ensure_finite("write voltage", v_write)?;
    let w = if v_write <= params.v_c_set {
        let target = ((params.v_c_set - v_write) / (params.v_c_set - params.v_set_full)).min(1.0);
        state.w.max(target)
    } else if v_write >= params.v_c_reset {
        let drop =
            ((v_write - params.v_c_reset) / (params.v_reset_full - params.v_c_reset)).min(1.0);
        state.w.min(1.0 - drop)
    } else {
        state.w
    };
    Ok(DeviceState { w, ..*state })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HysteresisPoint {
    pub branch: Branch,
    pub v_write: f64,
    /// Resistance read at +0.3 V after the write (Ω).
    pub resistance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisLoop {
    pub points: Vec<HysteresisPoint>,
}

impl HysteresisLoop {
    fn branch(&self, branch: Branch) -> impl Iterator<Item = &HysteresisPoint> {
        self.points.iter().filter(move |p| p.branch == branch)
    }

    /// Last write voltage of `branch` at which the resistance is still on the
    /// plateau the branch started from.
    fn plateau_edge(&self, branch: Branch) -> Option<f64> {
        let mut pts = self.branch(branch);
        let first = pts.next()?;
        let mut edge = first.v_write;
        for p in pts {
            if (p.resistance - first.resistance).abs() > 1e-9 * first.resistance {
                return Some(edge);
            }
            edge = p.v_write;
        }
        None
    }

    /// RESET coercive voltage extracted from the up branch.
    pub fn v_c_reset(&self) -> Option<f64> {
        self.plateau_edge(Branch::Up)
    }

    /// SET coercive voltage extracted from the down branch.
    pub fn v_c_set(&self) -> Option<f64> {
        self.plateau_edge(Branch::Down)
    }

    /// Extracted memory window (V); `None` if either branch never switches.
    pub fn window(&self) -> Option<f64> {
        Some(self.v_c_reset()? - self.v_c_set()?)
    }

    /// Resistances of the up and down branches at the grid point closest to
    /// `v_write`.
    pub fn branch_resistances_at(&self, v_write: f64) -> Option<(f64, f64)> {
        let nearest = |b: Branch| {
            self.branch(b)
                .min_by(|p, q| {
                    (p.v_write - v_write)
                        .abs()
                        .total_cmp(&(q.v_write - v_write).abs())
                })
                .map(|p| p.resistance)
        };
        Some((nearest(Branch::Up)?, nearest(Branch::Down)?))
    }
}

/// Sweep `v_write` from `v_min` to `v_max` and back in `n_steps` points per
/// branch, starting from the HRS, reading at +0.3 V after every write.
pub fn hysteresis_loop(
    params: &DeviceParams,
    v_min: f64,
    v_max: f64,
    n_steps: usize,
) -> Result<HysteresisLoop> {
    ensure_finite("v_min", v_min)?;
    ensure_finite("v_max", v_max)?;
    if v_min >= v_max {
        return Err(Error::invalid(
            "sweep range",
            format!("need v_min < v_max, got {v_min} / {v_max}"),
        ));
    }
    if n_steps < 2 {
        return Err(Error::invalid("n_steps", "must be >= 2"));
    }
    let t = params.conduction.t_ref;
    let grid: Vec<f64> = (0..n_steps)
        .map(|i| v_min + (v_max - v_min) * i as f64 / (n_steps - 1) as f64)
        .collect();
    let mut state = DeviceState::hrs(params);
    let mut points = Vec::with_capacity(2 * n_steps);
    let up = grid.iter().map(|&v| (Branch::Up, v));
    let down = grid.iter().rev().map(|&v| (Branch::Down, v));
    for (branch, v) in up.chain(down) {
        state = dc_write(&state, v, params)?;
        points.push(HysteresisPoint {
            branch,
            v_write: v,
            resistance: state.read_resistance(HYSTERESIS_READ_VOLTAGE, t, params)?,
        });
    }
    Ok(HysteresisLoop { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dc_write_examples() {
        let p = DeviceParams::default();
        let hrs = DeviceState::hrs(&p);
        assert_eq!(dc_write(&hrs, -1.6, &p).unwrap().w, 1.0);
        let lrs = DeviceState::lrs(&p);
        assert_eq!(dc_write(&lrs, 0.5, &p).unwrap().w, 1.0);
        assert_eq!(dc_write(&lrs, 2.4, &p).unwrap().w, 0.0);
        assert_eq!(dc_write(&hrs, -0.6, &p).unwrap().w, 0.0);
        let half = dc_write(&hrs, -1.1, &p).unwrap().w;
        assert!((half - 0.5).abs() < 1e-12);
        // one-sided: a weaker SET never lowers the state
        assert_eq!(dc_write(&lrs, -1.1, &p).unwrap().w, 1.0);
    }

    #[test]
    fn default_loop_window() {
        let p = DeviceParams::default();
        let lp = hysteresis_loop(&p, p.v_set_full, p.v_reset_full, 81).unwrap();
        let step = (p.v_reset_full - p.v_set_full) / 80.0;
        let w = lp.window().unwrap();
        assert!((w - 1.4).abs() <= step + 1e-12, "window {w}");
        assert!((lp.v_c_set().unwrap() + 0.6).abs() <= step + 1e-12);
        let (up, down) = lp.branch_resistances_at(0.0).unwrap();
        assert!((down / up - p.conduction.on_off).abs() < 1e-9);
    }

    #[test]
    fn loop_below_reset_is_flat_lrs() {
        let p = DeviceParams::default();
        let lp = hysteresis_loop(&p, -1.6, 0.7, 47).unwrap();
        let r_lrs = DeviceState::lrs(&p)
            .read_resistance(0.3, 300.0, &p)
            .unwrap();
        assert!(lp.points.iter().all(|q| q.resistance == r_lrs));
        assert_eq!(lp.window(), None);
    }

    #[test]
    fn bad_ranges() {
        let p = DeviceParams::default();
        assert!(hysteresis_loop(&p, 1.0, -1.0, 10).is_err());
        assert!(hysteresis_loop(&p, -1.0, 1.0, 1).is_err());
    }
}
