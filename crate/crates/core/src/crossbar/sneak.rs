//! Sneak-path current in a selector-free array.
//!
//! The dominant parasitic path from the selected row `r` to the selected
//! column `c` crosses three cells: `(r, c')`, `(r', c')` and `(r', c)`. The
//! read voltage divides over them so that all three carry the same current.

use super::Crossbar;
use crate::conduction::{current_unchecked, voltage_for_current_unchecked, ConductionParams};
use crate::error::{ensure_finite, Error, Result};

/// Current through junctions of conductances `gs` in series under total bias
/// `v >= 0`.
pub fn series_current(v: f64, gs: &[f64], t: f64, p: &ConductionParams) -> f64 {
    if v == 0.0 || gs.is_empty() {
        return 0.0;
    }
    // Each junction drops less than v, which bounds the current from above.
    let mut hi = gs
        .iter()
        .map(|&g| current_unchecked(v, g, t, p))
        .fold(f64::INFINITY, f64::min);
    let mut lo = 0.0;
    let excess = |i: f64| {
        gs.iter()
            .map(|&g| voltage_for_current_unchecked(i, g, t, p))
            .sum::<f64>()
            - v
    };
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

impl Crossbar {
    /// Largest three-cell sneak current between row `r` and column `c` at
    /// read bias `v_read` and the reference temperature (A).
    pub fn worst_sneak_current(&self, r: usize, c: usize, v_read: f64) -> Result<f64> {
        self.index(r, c)?;
        ensure_finite("read voltage", v_read)?;
        let p = &self.params.conduction;
        let t = p.t_ref;
        let g = |i: usize, j: usize| self.cells[i * self.cols + j].conductance();
        let mut worst = 0.0f64;
        for rr in (0..self.rows).filter(|&i| i != r) {
            for cc in (0..self.cols).filter(|&j| j != c) {
                let i = series_current(v_read.abs(), &[g(r, cc), g(rr, cc), g(rr, c)], t, p);
                worst = worst.max(i);
            }
        }
        Ok(worst)
    }

    /// Selected-cell read current over the worst three-cell sneak current.
    /// `+inf` when the array has no sneak path (a single row or column).
    pub fn sneak_ratio(&self, r: usize, c: usize, v_read: f64) -> Result<f64> {
        let k = self.index(r, c)?;
        ensure_finite("read voltage", v_read)?;
        if v_read == 0.0 {
            return Err(Error::invalid("read voltage", "must be non-zero"));
        }
        if self.rows < 2 || self.cols < 2 {
            return Ok(f64::INFINITY);
        }
        let p = &self.params.conduction;
        let selected = current_unchecked(v_read.abs(), self.cells[k].conductance(), p.t_ref, p);
        Ok(selected / self.worst_sneak_current(r, c, v_read)?)
    }
}
