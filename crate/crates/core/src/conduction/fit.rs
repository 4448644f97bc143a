//! Regression fitters for the Ohmic and Poole-Frenkel regimes.
//!
//! Both work on `ln(J/V)`. In the Ohmic regime it is flat in V and its
//! temperature dependence gives the activation energy. In the Poole-Frenkel
//! regime it is linear in `sqrt(V)` with slope `beta/kT`; the intercepts
//! follow `ln C - phi_B/kT`.

use super::{thermal_energy, SweepRecord};
use crate::error::{FitError, Result};
use crate::regression::{fit_line, LineFit};

const TEMPERATURE_TOL: f64 = 1e-9;
const VOLTAGE_TOL: f64 = 1e-12;

/// Points at one temperature as `(|V|, |J|/|V|)`, duplicates averaged.
#[derive(Debug)]
struct Isotherm {
    temperature: f64,
    points: Vec<(f64, f64)>,
}

fn isotherms(data: &SweepRecord) -> Result<Vec<Isotherm>, FitError> {
    let mut samples: Vec<(f64, f64, f64)> = Vec::with_capacity(data.samples.len());
    for s in &data.samples {
        let v = s.voltage.abs();
        if v == 0.0 {
            continue;
        }
        let j = s.current_density.abs();
        if j <= 0.0 || !j.is_finite() {
            return Err(FitError::NonPositive {
                value: s.current_density,
            });
        }
        samples.push((s.temperature, v, j));
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut out: Vec<Isotherm> = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        let t0 = samples[i].0;
        let mut group = Vec::new();
        while i < samples.len() && (samples[i].0 - t0).abs() <= TEMPERATURE_TOL * t0.abs() {
            group.push((samples[i].1, samples[i].2));
            i += 1;
        }
        let t_mean = t0;
        // average current densities at repeated voltages
        let mut points: Vec<(f64, f64)> = Vec::new();
        let mut k = 0;
        while k < group.len() {
            let v0 = group[k].0;
            let mut sum = 0.0;
            let mut n = 0usize;
            while k < group.len() && (group[k].0 - v0).abs() <= VOLTAGE_TOL {
                sum += group[k].1;
                n += 1;
                k += 1;
            }
            let j = sum / n as f64;
            points.push((v0, j / v0));
        }
        out.push(Isotherm {
            temperature: t_mean,
            points,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OhmicFitOptions {
    /// Only samples with `|V| <= v_ohmic_max` are used (V).
    pub v_ohmic_max: f64,
    /// Largest tolerated spread of `ln(J/V)` within one isotherm before the
    /// result carries a regime warning.
    pub residual_threshold: f64,
}

impl Default for OhmicFitOptions {
    fn default() -> Self {
        Self {
            v_ohmic_max: 0.1,
            residual_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OhmicTemperatureFit {
    pub temperature: f64,
    pub ln_j_over_v: f64,
    pub max_residual: f64,
    pub n_voltages: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OhmicFit {
    /// eV.
    pub activation_energy: f64,
    /// `J/V` extrapolated to infinite temperature (S/µm²).
    pub prefactor: f64,
    pub arrhenius_r_squared: f64,
    pub per_temperature: Vec<OhmicTemperatureFit>,
    /// Largest within-isotherm residual of `ln(J/V)`.
    pub max_residual: f64,
    pub regime_warning: Option<String>,
}

pub fn fit_ohmic(data: &SweepRecord, opts: &OhmicFitOptions) -> Result<OhmicFit> {
    let windowed = data.window(0.0, opts.v_ohmic_max);
    let isos = isotherms(&windowed)?;
    if isos.len() < 2 {
        return Err(FitError::TooFewTemperatures {
            needed: 2,
            found: isos.len(),
        }
        .into());
    }
    let mut per_temperature = Vec::with_capacity(isos.len());
    for iso in &isos {
        let logs: Vec<f64> = iso.points.iter().map(|&(_, g)| g.ln()).collect();
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        let max_residual = logs.iter().fold(0.0f64, |m, l| m.max((l - mean).abs()));
        per_temperature.push(OhmicTemperatureFit {
            temperature: iso.temperature,
            ln_j_over_v: mean,
            max_residual,
            n_voltages: iso.points.len(),
        });
    }
    let xs: Vec<f64> = per_temperature
        .iter()
        .map(|f| 1.0 / thermal_energy(f.temperature))
        .collect();
    let ys: Vec<f64> = per_temperature.iter().map(|f| f.ln_j_over_v).collect();
    let line = fit_line(&xs, &ys)?;
    let max_residual = per_temperature
        .iter()
        .fold(0.0f64, |m, f| m.max(f.max_residual));
    let regime_warning = (max_residual > opts.residual_threshold).then(|| {
        format!(
            "ln(J/V) varies by up to {max_residual:.4} within an isotherm (threshold {}); data may not be Ohmic",
            opts.residual_threshold
        )
    });
    Ok(OhmicFit {
        activation_energy: -line.slope,
        prefactor: line.intercept.exp(),
        arrhenius_r_squared: line.r_squared,
        per_temperature,
        max_residual,
        regime_warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfFitOptions {
    /// Lower edge of the fitted window (V).
    pub v_min: f64,
    /// Upper edge of the fitted window (V).
    pub v_max: f64,
}

impl Default for PfFitOptions {
    fn default() -> Self {
        Self {
            v_min: 0.2,
            v_max: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PfTemperatureFit {
    pub temperature: f64,
    /// Slope of `ln(J/V)` against `sqrt(V)`, equal to `beta/kT`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `slope * kT` (eV·V^-1/2).
    pub beta: f64,
    pub n_voltages: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PfFit {
    /// Barrier height phi_B (eV).
    pub barrier: f64,
    /// Field lowering coefficient averaged over isotherms (eV·V^-1/2).
    pub beta: f64,
    /// Intercept of the Arrhenius line, `ln C` with `C` in S/µm².
    pub ln_prefactor: f64,
    pub arrhenius_r_squared: f64,
    /// Barrier from the unconstrained per-isotherm intercepts. Agrees with
    /// `barrier` on clean data; much noisier on measured data because each
    /// intercept is a long extrapolation to `sqrt(V) = 0`.
    pub barrier_free_intercepts: f64,
    pub per_temperature: Vec<PfTemperatureFit>,
}

/// Poole-Frenkel regression.
///
/// Each isotherm is regressed as `ln(J/V) = s_T sqrt(V) + b_T`, giving
/// `beta = <s_T kT>`. The intercepts are then re-estimated with the common
/// `beta` held fixed and regressed against `1/kT`; the negated slope is the
/// barrier.
pub fn fit_poole_frenkel(data: &SweepRecord, opts: &PfFitOptions) -> Result<PfFit> {
    let windowed = data.window(opts.v_min, opts.v_max);
    let isos = isotherms(&windowed)?;
    if isos.len() < 2 {
        return Err(FitError::TooFewTemperatures {
            needed: 2,
            found: isos.len(),
        }
        .into());
    }
    let mut per_temperature = Vec::with_capacity(isos.len());
    for iso in &isos {
        if iso.points.len() < 3 {
            return Err(FitError::TooFewPoints {
                needed: 3,
                found: iso.points.len(),
            }
            .into());
        }
        let xs: Vec<f64> = iso.points.iter().map(|&(v, _)| v.sqrt()).collect();
        let ys: Vec<f64> = iso.points.iter().map(|&(_, g)| g.ln()).collect();
        let LineFit {
            slope,
            intercept,
            r_squared,
            ..
        } = fit_line(&xs, &ys)?;
        per_temperature.push(PfTemperatureFit {
            temperature: iso.temperature,
            slope,
            intercept,
            r_squared,
            beta: slope * thermal_energy(iso.temperature),
            n_voltages: iso.points.len(),
        });
    }
    let beta = per_temperature.iter().map(|f| f.beta).sum::<f64>() / per_temperature.len() as f64;

    let inv_kt: Vec<f64> = isos
        .iter()
        .map(|iso| 1.0 / thermal_energy(iso.temperature))
        .collect();
    let constrained: Vec<f64> = isos
        .iter()
        .zip(&inv_kt)
        .map(|(iso, &ikt)| {
            let n = iso.points.len() as f64;
            iso.points
                .iter()
                .map(|&(v, g)| g.ln() - beta * v.sqrt() * ikt)
                .sum::<f64>()
                / n
        })
        .collect();
    let arrhenius = fit_line(&inv_kt, &constrained)?;
    let free: Vec<f64> = per_temperature.iter().map(|f| f.intercept).collect();
    let free_line = fit_line(&inv_kt, &free)?;

    Ok(PfFit {
        barrier: -arrhenius.slope,
        beta,
        ln_prefactor: arrhenius.intercept,
        arrhenius_r_squared: arrhenius.r_squared,
        barrier_free_intercepts: -free_line.slope,
        per_temperature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conduction::{ConductionParams, SweepSample};
    use crate::error::Error;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn ohmic_single_temperature_is_rejected() {
        let p = ConductionParams::default();
        let rec = SweepRecord::from_model(&p, 1e-8, 1.0, &grid(0.01, 0.1, 5), &[300.0]).unwrap();
        let err = fit_ohmic(&rec, &OhmicFitOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::Fit(FitError::TooFewTemperatures { found: 1, .. })
        ));
    }

    #[test]
    fn ohmic_zero_activation_gives_zero_slope() {
        let p = ConductionParams {
            e_a: 0.0,
            ..Default::default()
        };
        let rec =
            SweepRecord::from_model(&p, 1e-8, 1.0, &grid(0.01, 0.1, 5), &[300.0, 330.0, 360.0])
                .unwrap();
        let fit = fit_ohmic(&rec, &OhmicFitOptions::default()).unwrap();
        assert!(fit.activation_energy.abs() < 1e-12);
        assert!(fit.regime_warning.is_none());
    }

    #[test]
    fn ohmic_flags_non_ohmic_window() {
        let p = ConductionParams::default();
        let rec =
            SweepRecord::from_model(&p, 1e-8, 1.0, &grid(0.05, 0.3, 11), &[300.0, 330.0]).unwrap();
        let opts = OhmicFitOptions {
            v_ohmic_max: 0.3,
            ..Default::default()
        };
        let fit = fit_ohmic(&rec, &opts).unwrap();
        assert!(fit.regime_warning.is_some());
    }

    #[test]
    fn pf_degenerate_grid() {
        let samples = [300.0, 330.0]
            .iter()
            .flat_map(|&t| {
                (0..3).map(move |_| SweepSample {
                    voltage: 0.25,
                    current_density: 1e-12,
                    temperature: t,
                })
            })
            .collect();
        let err =
            fit_poole_frenkel(&SweepRecord::new(samples), &PfFitOptions::default()).unwrap_err();
        // repeated voltages collapse to one point, which is too few for a line
        assert!(matches!(err, Error::Fit(FitError::TooFewPoints { .. })));
    }

    #[test]
    fn pf_on_forward_model_reports_anchored_barrier() {
        let p = ConductionParams::default();
        let rec = SweepRecord::from_model(
            &p,
            1e-8,
            14_400.0,
            &grid(0.2, 0.3, 11),
            &[300.0, 320.0, 340.0, 360.0],
        )
        .unwrap();
        let fit = fit_poole_frenkel(&rec, &PfFitOptions::default()).unwrap();
        let expected = p.apparent_pf_barrier();
        assert!(
            ((fit.barrier - expected) / expected).abs() < 1e-9,
            "{fit:?}"
        );
        assert!(((fit.beta - p.beta) / p.beta).abs() < 1e-9);
        assert!(((fit.barrier_free_intercepts - expected) / expected).abs() < 1e-9);
    }

    #[test]
    fn negative_sweep_folds_onto_positive() {
        let p = ConductionParams::default();
        let v = grid(0.2, 0.3, 6);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let temps = [300.0, 340.0];
        let pos_fit = fit_poole_frenkel(
            &SweepRecord::from_model(&p, 1e-8, 1.0, &v, &temps).unwrap(),
            &PfFitOptions::default(),
        )
        .unwrap();
        let neg_fit = fit_poole_frenkel(
            &SweepRecord::from_model(&p, 1e-8, 1.0, &neg, &temps).unwrap(),
            &PfFitOptions::default(),
        )
        .unwrap();
        assert!((pos_fit.barrier - neg_fit.barrier).abs() < 1e-12);
    }
}
