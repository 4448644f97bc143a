//! Saturating exponential weight-update law.
//!
//! After a fraction `x` of the full pulse count, the fraction of the
//! conductance range covered is `(1 - e^(-nu x)) / (1 - e^(-nu))`. Potentiation
//! follows it upwards from HRS, depression downwards from LRS.

use super::Direction;
use crate::error::{FitError, Result};

/// Fraction of the range covered after normalised count `x`.
pub fn update_progress(x: f64, nu: f64) -> f64 {
    if nu.abs() < 1e-12 {
        return x;
    }
    (-nu * x).exp_m1() / (-nu).exp_m1()
}

/// Inverse of [`update_progress`] in `x`.
pub fn inverse_update_progress(y: f64, nu: f64) -> f64 {
    if nu.abs() < 1e-12 {
        return y;
    }
    let em = (-nu).exp_m1();
    if y > 0.5 {
        // 1 - y is exact here, so the argument avoids cancellation near y = 1
        -((-nu).exp() - (1.0 - y) * em).ln() / nu
    } else {
        -(y * em).ln_1p() / nu
    }
}

/// Normalised conductance after normalised count `x` in `[0, 1]`.
pub fn update_curve(x: f64, nu: f64, direction: Direction) -> f64 {
    let p = update_progress(x, nu);
    match direction {
        Direction::Potentiate => p,
        Direction::Depress => 1.0 - p,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateFit {
    /// Amplitude of the fitted curve on the normalised scale.
    pub sigma0: f64,
    /// Shape parameter, always positive.
    pub nu: f64,
    pub direction: Direction,
    /// Root-mean-square residual on the normalised scale.
    pub rmse: f64,
    pub warning: Option<String>,
}

impl UpdateFit {
    /// Shape with the sign convention of benchmark tables: negative for
    /// depression.
    pub fn signed_nu(&self) -> f64 {
        match self.direction {
            Direction::Potentiate => self.nu,
            Direction::Depress => -self.nu,
        }
    }
}

const NU_MIN: f64 = 1e-4;
const NU_MAX: f64 = 60.0;

/// Least-squares fit of a `(count, conductance)` ramp to
/// `sigma0 * (1 - e^(-nu x)) / (1 - e^(-nu))`.
///
/// Counts are normalised to `[0, 1]` over the ramp; conductances are turned
/// into covered fraction of the ramp's swing, so depression ramps are fitted
/// on the same family. The direction is taken from the sign of the swing.
pub fn fit_update_curve(points: &[(f64, f64)]) -> Result<UpdateFit> {
    if points.len() < 5 {
        return Err(FitError::TooFewPoints {
            needed: 5,
            found: points.len(),
        }
        .into());
    }
    let (c0, g0) = points[0];
    let (c1, g1) = points[points.len() - 1];
    if c1 == c0 {
        return Err(FitError::Singular.into());
    }
    let swing = g1 - g0;
    if swing == 0.0 || !swing.is_finite() {
        return Err(FitError::Singular.into());
    }
    let direction = if swing > 0.0 {
        Direction::Potentiate
    } else {
        Direction::Depress
    };
    let xs: Vec<f64> = points.iter().map(|&(c, _)| (c - c0) / (c1 - c0)).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, g)| (g - g0) / swing).collect();

    let monotone = ys.windows(2).all(|w| w[1] >= w[0]);

    let sse = |nu: f64| -> (f64, f64) {
        let mut sff = 0.0;
        let mut sfy = 0.0;
        for (&x, &y) in xs.iter().zip(&ys) {
            let f = update_progress(x, nu);
            sff += f * f;
            sfy += f * y;
        }
        let sigma0 = sfy / sff;
        let err = xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let r = y - sigma0 * update_progress(x, nu);
                r * r
            })
            .sum::<f64>();
        (err, sigma0)
    };

    // coarse scan in ln(nu), then golden section around the best node
    const NODES: usize = 600;
    let (lo, hi) = (NU_MIN.ln(), NU_MAX.ln());
    let node = |i: usize| lo + (hi - lo) * i as f64 / (NODES - 1) as f64;
    let best = (0..NODES)
        .map(|i| (i, sse(node(i).exp()).0))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut a = node(best.saturating_sub(1));
    let mut b = node((best + 1).min(NODES - 1));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = sse(c.exp()).0;
    let mut fd = sse(d.exp()).0;
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = sse(c.exp()).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = sse(d.exp()).0;
        }
    }
    let nu = (0.5 * (a + b)).exp();
    let (err, sigma0) = sse(nu);
    let rmse = (err / xs.len() as f64).sqrt();

    let mut warnings = Vec::new();
    if !monotone {
        warnings.push("trace is not monotone".to_string());
    }
    if best == 0 || best == NODES - 1 {
        warnings.push(format!(
            "shape parameter at search bound [{NU_MIN}, {NU_MAX}]"
        ));
    }
    Ok(UpdateFit {
        sigma0,
        nu,
        direction,
        rmse,
        warning: (!warnings.is_empty()).then(|| warnings.join("; ")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_examples() {
        let p = update_curve(0.5, 1.9, Direction::Potentiate);
        assert!((p - 0.7212).abs() < 1e-4, "{p}");
        let d = update_curve(0.5, 4.3, Direction::Depress);
        assert!((d - 0.1043).abs() < 5e-5, "{d}");
        for nu in [0.01, 1.9, 4.3, 30.0] {
            assert_eq!(update_curve(0.0, nu, Direction::Potentiate), 0.0);
            assert_eq!(update_curve(1.0, nu, Direction::Potentiate), 1.0);
            assert_eq!(update_curve(0.0, nu, Direction::Depress), 1.0);
            assert_eq!(update_curve(1.0, nu, Direction::Depress), 0.0);
        }
    }

    #[test]
    fn small_nu_is_nearly_linear() {
        for nu in [1e-3, 0.01, 0.1, 0.5] {
            let dev = (0..=1000)
                .map(|i| i as f64 / 1000.0)
                .map(|x| (update_progress(x, nu) - x).abs())
                .fold(0.0f64, f64::max);
            assert!(dev < nu / 8.0, "nu = {nu}: deviation {dev}");
        }
        let dev = (0..=100)
            .map(|i| i as f64 / 100.0)
            .map(|x| (update_progress(x, 0.01) - x).abs())
            .fold(0.0f64, f64::max);
        assert!(dev < 0.01);
    }

    #[test]
    fn inverse_roundtrip() {
        for nu in [1e-6, 0.5, 1.9, 4.3, 20.0] {
            for i in 0..=20 {
                let x = i as f64 / 20.0;
                let back = inverse_update_progress(update_progress(x, nu), nu);
                assert!((back - x).abs() < 1e-9, "nu {nu}, x {x}, back {back}");
            }
        }
    }

    #[test]
    fn fit_recovers_shape() {
        for nu in [0.5, 1.9, 4.3] {
            for dir in [Direction::Potentiate, Direction::Depress] {
                let pts: Vec<(f64, f64)> = (0..=50)
                    .map(|k| {
                        (
                            k as f64,
                            1e-9 + 6e-9 * update_curve(k as f64 / 50.0, nu, dir),
                        )
                    })
                    .collect();
                let fit = fit_update_curve(&pts).unwrap();
                assert_eq!(fit.direction, dir);
                assert!(((fit.nu - nu) / nu).abs() < 1e-6, "{fit:?}");
                assert!((fit.sigma0 - 1.0).abs() < 1e-9);
                assert!(fit.warning.is_none());
            }
        }
    }

    #[test]
    fn fit_errors_and_warnings() {
        assert!(fit_update_curve(&[(0.0, 1.0), (1.0, 2.0)]).is_err());
        let flat: Vec<(f64, f64)> = (0..6).map(|k| (k as f64, 1.0)).collect();
        assert!(fit_update_curve(&flat).is_err());
        let wobbly = [
            (0.0, 0.0),
            (1.0, 0.5),
            (2.0, 0.4),
            (3.0, 0.8),
            (4.0, 0.9),
            (5.0, 1.0),
        ];
        let fit = fit_update_curve(&wobbly).unwrap();
        assert!(fit.warning.unwrap().contains("monotone"));
    }
}
