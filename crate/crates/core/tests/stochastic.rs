mod common;

use common::*;
use fanvm::device::{DeviceParams, DeviceState};
use fanvm::stochastic::{
    apply_retention, perturb_step, rng_from_seed, sample_population, VariabilityParams,
};
use statrs::distribution::{ContinuousCDF, Normal};

const N: usize = 10_000;

fn c2c_draws(sigma: f64, seed: u64) -> Vec<f64> {
    let vp = VariabilityParams {
        sigma_c2c: sigma,
        ..VariabilityParams::default()
    };
    let mut rng = rng_from_seed(seed);
    (0..N)
        .map(|_| perturb_step(1.0, &vp, &mut rng) - 1.0)
        .collect()
}

#[test]
fn c2c_std_in_band() {
    for seed in [1, 2, 3, 4, 5] {
        let s = std_dev(&c2c_draws(0.1, seed));
        assert!((0.095..=0.105).contains(&s), "seed {seed}: {s}");
    }
}

#[test]
fn c2c_scales_with_increment() {
    let vp = VariabilityParams::default();
    let (mut a, mut b) = (rng_from_seed(9), rng_from_seed(9));
    for _ in 0..1000 {
        let x = perturb_step(1.0, &vp, &mut a);
        let y = perturb_step(-0.02, &vp, &mut b);
        assert!((y + 0.02 * x).abs() < 1e-15);
    }
}

#[test]
fn c2c_follows_truncated_normal() {
    for sigma in [0.05, 0.1, 0.2] {
        let draws = c2c_draws(sigma, 77);
        assert!(draws.iter().all(|e| e.abs() <= 3.0 * sigma + 1e-15));
        let n = Normal::new(0.0, sigma).unwrap();
        let (lo, hi) = (n.cdf(-3.0 * sigma), n.cdf(3.0 * sigma));
        let d = ks_statistic(&draws, |x| (n.cdf(x) - lo) / (hi - lo));
        assert!(d < ks_critical_01(N), "sigma {sigma}: D = {d}");
    }
}

#[test]
fn d2d_std_in_band() {
    let p = DeviceParams::default();
    let vp = VariabilityParams::default();
    for seed in [11, 12, 13] {
        let pop = sample_population(N, &p, &vp, seed);
        let hrs: Vec<f64> = pop.iter().map(|d| d.g_hrs_dev.ln()).collect();
        let lrs: Vec<f64> = pop.iter().map(|d| d.g_lrs_dev.ln()).collect();
        for s in [std_dev(&hrs), std_dev(&lrs)] {
            assert!((0.097..=0.103).contains(&s), "seed {seed}: {s}");
        }
    }
}

#[test]
fn d2d_follows_lognormal() {
    let p = DeviceParams::default();
    let vp = VariabilityParams {
        sigma_d2d_hrs: 0.1,
        sigma_d2d_lrs: 0.2,
        ..VariabilityParams::default()
    };
    let pop = sample_population(N, &p, &vp, 5);
    let hrs: Vec<f64> = pop.iter().map(|d| d.g_hrs_dev.ln()).collect();
    let lrs: Vec<f64> = pop.iter().map(|d| d.g_lrs_dev.ln()).collect();
    let nh = Normal::new(p.g_hrs().ln(), 0.1).unwrap();
    let nl = Normal::new(p.g_lrs().ln(), 0.2).unwrap();
    let crit = ks_critical_01(N);
    let dh = ks_statistic(&hrs, |x| nh.cdf(x));
    let dl = ks_statistic(&lrs, |x| nl.cdf(x));
    assert!(dh < crit, "hrs D = {dh}");
    assert!(dl < crit, "lrs D = {dl}");
}

#[test]
fn reordering_is_rare_at_defaults() {
    let p = DeviceParams::default();
    let vp = VariabilityParams::default();
    let pop = sample_population(100_000, &p, &vp, 3);
    // an inverted pair would have its HRS above the nominal LRS/HRS midpoint
    let mid = (p.g_hrs() * p.g_lrs()).sqrt();
    assert!(pop.iter().all(|d| d.g_hrs_dev < mid && d.g_lrs_dev > mid));
    assert!(pop.iter().all(|d| d.w == 0.0 && d.g_hrs_dev < d.g_lrs_dev));
}

#[test]
fn populations_are_schedule_independent() {
    let p = DeviceParams::default();
    let vp = VariabilityParams::default();
    let small = sample_population(100, &p, &vp, 42);
    let large = sample_population(1000, &p, &vp, 42);
    assert_eq!(&large[..100], &small[..]);
    assert_ne!(sample_population(100, &p, &vp, 43), small);
}

#[test]
fn zero_sigma_population_is_nominal() {
    let p = DeviceParams::default();
    let pop = sample_population(50, &p, &VariabilityParams::ideal(), 1);
    assert!(pop.iter().all(|d| *d == DeviceState::hrs(&p)));
}

#[test]
fn retention_drift_formula() {
    let p = DeviceParams::default();
    let s = DeviceState::lrs(&p);
    let vp = VariabilityParams {
        drift_per_decade: 0.01,
        ..VariabilityParams::default()
    };
    let after = apply_retention(&s, 1e5, &vp).unwrap();
    assert!(rel(after.conductance(), 0.95 * s.conductance()) < 1e-12);
    let ten_days = apply_retention(&s, 10.0 * 86_400.0, &VariabilityParams::default()).unwrap();
    assert_eq!(ten_days, s);
    assert_eq!(apply_retention(&s, 1.0, &vp).unwrap(), s);
}
