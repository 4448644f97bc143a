//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use fanvm::conduction::{current, ConductionParams, SweepRecord, SweepSample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const K_B: f64 = 8.617_333_262e-5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

/// Closed-form junction current written out term by term.
pub fn oracle_current(v: f64, g: f64, t: f64, p: &ConductionParams) -> f64 {
    let kt = K_B * t;
    let activation = (-p.e_a * (1.0 / kt - 1.0 / (K_B * p.t_ref))).exp();
    let a = v.abs();
    let eff = a.min(p.v_clamp);
    let exponent = if eff <= p.v_pf_min {
        0.0
    } else {
        p.beta * (eff.sqrt() - p.v_pf_min.sqrt()) / kt
    };
    v.signum() * g * activation * a * exponent.exp()
}

/// `J = c V exp((beta sqrt(V) - phi) / kT)` on every (T, V) pair, with
/// optional multiplicative Gaussian noise of relative size `noise`.
pub fn textbook_pf_sweep(
    phi: f64,
    beta: f64,
    c: f64,
    temps: &[f64],
    volts: &[f64],
    noise: f64,
    seed: u64,
) -> SweepRecord {
    let mut r = rng(seed);
    let n = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).unwrap();
    let mut samples = Vec::new();
    for &t in temps {
        for &v in volts {
            let kt = K_B * t;
            let mut j = c * v * ((beta * v.sqrt() - phi) / kt).exp();
            if noise > 0.0 {
                j *= 1.0 + n.sample(&mut r);
            }
            samples.push(SweepSample {
                voltage: v,
                current_density: j,
                temperature: t,
            });
        }
    }
    SweepRecord::new(samples)
}

/// `J = c V exp(-e_a / kT)` with optional multiplicative noise.
pub fn ohmic_sweep(
    e_a: f64,
    c: f64,
    temps: &[f64],
    volts: &[f64],
    noise: f64,
    seed: u64,
) -> SweepRecord {
    textbook_pf_sweep(e_a, 0.0, c, temps, volts, noise, seed)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Voltage across a junction carrying current `i`, by bisection on the
/// public forward model.
fn voltage_at(i: f64, g: f64, t: f64, p: &ConductionParams, v_hi: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, v_hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if current(mid, g, t, p).unwrap() < i {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Current through junctions `gs` in series under total bias `v`, found by
/// bisecting the voltage `v1` across the first junction.
pub fn oracle_series_current(v: f64, gs: &[f64], t: f64, p: &ConductionParams) -> f64 {
    let total = |v1: f64| {
        let i = current(v1, gs[0], t, p).unwrap();
        v1 + gs[1..]
            .iter()
            .map(|&g| voltage_at(i, g, t, p, v))
            .sum::<f64>()
    };
    let (mut lo, mut hi) = (0.0f64, v);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    current(0.5 * (lo + hi), gs[0], t, p).unwrap()
}

/// Exhaustive worst three-cell sneak current between row `r` and column `c`
/// of a conductance grid `g[row][col]`.
pub fn oracle_worst_sneak(g: &[Vec<f64>], r: usize, c: usize, v: f64, p: &ConductionParams) -> f64 {
    let mut worst = 0.0f64;
    for (rr, row) in g.iter().enumerate() {
        for cc in 0..row.len() {
            if rr == r || cc == c {
                continue;
            }
            let path = [g[r][cc], g[rr][cc], g[rr][c]];
            worst = worst.max(oracle_series_current(v, &path, p.t_ref, p));
        }
    }
    worst
}

/// Column currents summed cell by cell with the closed-form oracle.
pub fn oracle_vmm(g: &[Vec<f64>], x: &[f64], t: f64, p: &ConductionParams) -> Vec<f64> {
    let cols = g[0].len();
    (0..cols)
        .map(|j| {
            (0..g.len())
                .map(|i| oracle_current(x[i], g[i][j], t, p))
                .sum()
        })
        .collect()
}

/// Sample standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Kolmogorov-Smirnov statistic of `xs` against `cdf`.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance 0.01.
pub fn ks_critical_01(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}
