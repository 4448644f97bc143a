//! Command-line front end.
//!
//! Every random stream of a run is derived from the master seed with
//! [`split_seed`]; the stream numbers are the `STREAM_*` constants below.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use crate::conduction::{
    current, fit_ohmic, fit_poole_frenkel, nonlinearity_ratio, OhmicFitOptions, PfFitOptions,
    SweepRecord,
};
use crate::config::SimConfig;
use crate::crossbar::{Crossbar, Matrix};
use crate::device::{
    fit_update_curve, hysteresis_loop, run_sequence, DeviceState, Direction, PulseSpec, StepNoise,
    Trace, UpdateScheme,
};
use crate::error::{Error, Result};
use crate::inference::{evaluate_seeds, train, Dataset, MlpSpec};
use crate::io::fmt_f64;
use crate::io::{parse_temperatures, sniff_csv, write_output, CsvKind, Report};
use crate::stochastic::{
    indexed_rng, rng_from_seed, sample_device, sample_population, split_seed, truncated_normal,
    C2cNoise, VariabilityParams,
};

pub const STREAM_PULSE_DEVICE: u64 = 1;
pub const STREAM_PULSE_C2C: u64 = 2;
pub const STREAM_XBAR_ARRAY: u64 = 3;
pub const STREAM_XBAR_WORKLOAD: u64 = 4;
pub const STREAM_INFER: u64 = 5;
pub const STREAM_BENCH: u64 = 6;

/// Read voltage of the benchmark rows (V).
pub const BENCH_READ_VOLTAGE: f64 = 0.1;
const BENCH_SAMPLES: usize = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "fanvm",
    version,
    about = "Ferroelectric analog memory and crossbar simulator"
)]
pub struct Cli {
    /// JSON configuration; defaults are used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated temperatures (K).
    #[arg(long, global = true, default_value = "300,330,360")]
    pub temps: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// I-V sweeps of the LRS and HRS across temperatures.
    Iv(IvArgs),
    /// Potentiation/depression staircase read at +0.2 V.
    Pulse(PulseArgs),
    /// Extract conduction and update-curve parameters from CSV files.
    Fit(FitArgs),
    /// Program, read and disturb a crossbar.
    Xbar(XbarArgs),
    /// Accuracy of a crossbar-mapped network over programming seeds.
    Infer(InferArgs),
    /// Benchmark summary of the simulated device.
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateChoice {
    Lrs,
    Hrs,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct IvArgs {
    #[arg(long, value_enum, default_value = "both")]
    pub state: StateChoice,
    /// Sweep limit; the grid spans `[-v_max, v_max]` (V).
    #[arg(long, default_value_t = 0.3)]
    pub v_max: f64,
    /// Grid step (V).
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
}

impl Default for IvArgs {
    fn default() -> Self {
        Self {
            state: StateChoice::Both,
            v_max: 0.3,
            step: 0.01,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct PulseArgs {
    /// `amplitude`, `width` or `single`; defaults to the configured scheme.
    #[arg(long)]
    pub scheme: Option<UpdateScheme>,
    /// Potentiation pulses (default `n_levels`).
    #[arg(long)]
    pub pot: Option<usize>,
    /// Depression pulses (default `n_levels`).
    #[arg(long)]
    pub dep: Option<usize>,
    /// Nominal device without cycle-to-cycle noise.
    #[arg(long)]
    pub ideal: bool,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Sweep CSVs (from `iv`) or pulse traces (from `pulse`).
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct XbarArgs {
    /// Random V/2 writes of the disturb test.
    #[arg(long, default_value_t = 10_000)]
    pub writes: usize,
    /// Relative tolerance of write-verify.
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    /// Pulse budget per cell of write-verify.
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
}

impl Default for XbarArgs {
    fn default() -> Self {
        Self {
            writes: 10_000,
            tol: 0.05,
            max_iters: 100,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct InferArgs {
    /// Dataset CSV (`label,x0,x1,...`); the bundled toy set when omitted.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Number of programming seeds, overriding the configuration.
    #[arg(long)]
    pub seeds: Option<usize>,
}

/// Files written by a command and an optional text summary for stdout.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: Option<String>,
}

/// Exit status for an error: 2 for configuration errors, 3 for fit failures,
/// 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => 2,
        Error::Fit(_) => 3,
        _ => 1,
    }
}

/// Single-line `key=value` rendering of an error for stderr.
pub fn error_line(err: &Error) -> String {
    let kind = match err {
        Error::Config { .. } => "config",
        Error::Fit(_) => "fit",
        Error::Io(_) => "io",
        Error::Csv(_) => "csv",
        Error::Json(_) => "json",
        _ => "input",
    };
    let field = match err {
        Error::Config { field, .. } => field.clone(),
        Error::InvalidInput { name, .. } => name.to_string(),
        _ => String::new(),
    };
    let message = match err {
        Error::Config { reason, .. } => reason.clone(),
        e => e.to_string(),
    };
    let quote = |s: &str| serde_json::to_string(s).unwrap_or_default();
    format!(
        "error kind={kind} field={} message={} exit={}",
        quote(&field),
        quote(&message),
        exit_code(err)
    )
}

/// Load the configuration and apply command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<SimConfig> {
    let mut cfg = match &cli.config {
        Some(path) => SimConfig::load(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = resolve_config(cli)?;
    let temps = parse_temperatures(&cli.temps)?;
    match &cli.command {
        Command::Iv(args) => cmd_iv(&cfg, args, &temps),
        Command::Pulse(args) => cmd_pulse(&cfg, args),
        Command::Fit(args) => cmd_fit(&cfg, &args.files),
        Command::Xbar(args) => cmd_xbar(&cfg, args),
        Command::Infer(args) => cmd_infer(&cfg, args),
        Command::Bench => cmd_bench(&cfg),
    }
}

/// Symmetric voltage grid `i * step` for `|i * step| <= v_max`, rounded to
/// the nanovolt.
pub fn voltage_grid(v_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::config("--step", "must be > 0"));
    }
    if !(v_max.is_finite() && v_max >= step) {
        return Err(Error::config("--v-max", "must be >= step"));
    }
    let n = (v_max / step + 1e-9).floor() as i64;
    Ok((-n..=n)
        .map(|i| (i as f64 * step * 1e9).round() / 1e9)
        .collect())
}

/// Writes `iv.csv` (`state,temperature_K,voltage_V,current_A,resistance_ohm`)
/// and one sweep file per state for `fit`.
pub fn cmd_iv(cfg: &SimConfig, args: &IvArgs, temps: &[f64]) -> Result<Outcome> {
    let p = &cfg.device;
    let voltages = voltage_grid(args.v_max, args.step)?;
    let mut states = Vec::new();
    if args.state != StateChoice::Hrs {
        states.push(("lrs", DeviceState::lrs(p)));
    }
    if args.state != StateChoice::Lrs {
        states.push(("hrs", DeviceState::hrs(p)));
    }
    let out = &cfg.output_dir;
    let mut files = vec![write_output(out, "iv.csv", |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "state",
            "temperature_K",
            "voltage_V",
            "current_A",
            "resistance_ohm",
        ])?;
        for (name, s) in &states {
            for &t in temps {
                for &v in &voltages {
                    let i = current(v, s.conductance(), t, &p.conduction)?;
                    let r = s.read_resistance(v, t, p)?;
                    wtr.write_record([
                        name.to_string(),
                        fmt_f64(t),
                        fmt_f64(v),
                        fmt_f64(i),
                        fmt_f64(r),
                    ])?;
                }
            }
        }
        wtr.flush()?;
        Ok(())
    })?];
    for (name, s) in &states {
        let sweep =
            SweepRecord::from_model(&p.conduction, s.conductance(), p.area, &voltages, temps)?;
        files.push(write_output(out, &format!("sweep_{name}.csv"), |w| {
            sweep.write_csv(w)
        })?);
    }
    Ok(Outcome {
        files,
        summary: None,
    })
}

/// Simulated staircase: potentiation from the HRS followed by depression.
/// Unless `ideal`, the device carries device-to-device dispersion and
/// cycle-to-cycle noise drawn from the configured variability.
pub fn pulse_trace(cfg: &SimConfig, args: &PulseArgs) -> Result<Trace> {
    let p = &cfg.device;
    let scheme = args.scheme.unwrap_or(cfg.scheme);
    let n = p.n_levels as usize;
    let (n_pot, n_dep) = (args.pot.unwrap_or(n), args.dep.unwrap_or(n));
    if args.ideal {
        return Ok(run_sequence(&DeviceState::hrs(p), scheme, n_pot, n_dep, p, None)?.1);
    }
    let vp = &cfg.variability;
    let mut rng = indexed_rng(split_seed(cfg.seed, STREAM_PULSE_DEVICE), 0);
    let device = sample_device(p, vp, &mut rng);
    let mut noise = C2cNoise::from_seed(vp.sigma_c2c, split_seed(cfg.seed, STREAM_PULSE_C2C));
    let noise: &mut dyn StepNoise = &mut noise;
    Ok(run_sequence(&device, scheme, n_pot, n_dep, p, Some(noise))?.1)
}

/// Writes `trace.csv`.
pub fn cmd_pulse(cfg: &SimConfig, args: &PulseArgs) -> Result<Outcome> {
    let trace = pulse_trace(cfg, args)?;
    let path = write_output(&cfg.output_dir, "trace.csv", |w| trace.write_csv(w))?;
    let summary = format!("on/off of the trace: {}\n", trace.on_off());
    Ok(Outcome {
        files: vec![path],
        summary: Some(summary),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub file: String,
    pub model: &'static str,
    pub parameter: &'static str,
    pub temperature: Option<f64>,
    pub value: f64,
    pub unit: &'static str,
    pub note: String,
}

/// Fit every file: sweeps get the Ohmic and Poole-Frenkel fits inside the
/// configured regime bounds, traces get one update-curve fit per direction.
pub fn fit_files(cfg: &SimConfig, files: &[PathBuf]) -> Result<Vec<FitRow>> {
    let c = &cfg.device.conduction;
    let mut rows = Vec::new();
    for path in files {
        let file = path.display().to_string();
        let mut row = |model, parameter, temperature, value, unit, note: String| {
            rows.push(FitRow {
                file: file.clone(),
                model,
                parameter,
                temperature,
                value,
                unit,
                note,
            })
        };
        match sniff_csv(path)? {
            CsvKind::Sweep => {
                let data = SweepRecord::read_csv(std::fs::File::open(path)?)?;
                let ohm = fit_ohmic(
                    &data,
                    &OhmicFitOptions {
                        v_ohmic_max: c.v_ohmic_max,
                        ..OhmicFitOptions::default()
                    },
                )?;
                let pf = fit_poole_frenkel(
                    &data,
                    &PfFitOptions {
                        v_min: c.v_pf_min,
                        ..PfFitOptions::default()
                    },
                )?;
                let warn = ohm.regime_warning.clone().unwrap_or_default();
                row(
                    "ohmic",
                    "activation_energy",
                    None,
                    ohm.activation_energy,
                    "eV",
                    warn,
                );
                row(
                    "ohmic",
                    "prefactor",
                    None,
                    ohm.prefactor,
                    "S/um^2",
                    String::new(),
                );
                row(
                    "ohmic",
                    "arrhenius_r_squared",
                    None,
                    ohm.arrhenius_r_squared,
                    "",
                    String::new(),
                );
                row(
                    "ohmic",
                    "max_residual",
                    None,
                    ohm.max_residual,
                    "",
                    String::new(),
                );
                for iso in &ohm.per_temperature {
                    row(
                        "ohmic",
                        "ln_j_over_v",
                        Some(iso.temperature),
                        iso.ln_j_over_v,
                        "ln(S/um^2)",
                        String::new(),
                    );
                }
                row(
                    "poole_frenkel",
                    "barrier",
                    None,
                    pf.barrier,
                    "eV",
                    String::new(),
                );
                row(
                    "poole_frenkel",
                    "barrier_free_intercepts",
                    None,
                    pf.barrier_free_intercepts,
                    "eV",
                    "isotherm intercepts fitted with their own slopes".into(),
                );
                row(
                    "poole_frenkel",
                    "model_apparent_barrier",
                    None,
                    c.apparent_pf_barrier(),
                    "eV",
                    "configured e_a + beta * sqrt(v_pf_min)".into(),
                );
                row(
                    "poole_frenkel",
                    "beta",
                    None,
                    pf.beta,
                    "eV/V^0.5",
                    String::new(),
                );
                row(
                    "poole_frenkel",
                    "ln_prefactor",
                    None,
                    pf.ln_prefactor,
                    "",
                    String::new(),
                );
                row(
                    "poole_frenkel",
                    "arrhenius_r_squared",
                    None,
                    pf.arrhenius_r_squared,
                    "",
                    String::new(),
                );
                for iso in &pf.per_temperature {
                    row(
                        "poole_frenkel",
                        "beta",
                        Some(iso.temperature),
                        iso.beta,
                        "eV/V^0.5",
                        String::new(),
                    );
                    row(
                        "poole_frenkel",
                        "r_squared",
                        Some(iso.temperature),
                        iso.r_squared,
                        "",
                        String::new(),
                    );
                }
            }
            CsvKind::Trace => {
                let trace = Trace::read_csv(std::fs::File::open(path)?)?;
                for direction in [Direction::Potentiate, Direction::Depress] {
                    let branch = trace.branch(direction);
                    if branch.is_empty() {
                        continue;
                    }
                    let fit = fit_update_curve(&branch)?;
                    let model = match direction {
                        Direction::Potentiate => "update_potentiation",
                        Direction::Depress => "update_depression",
                    };
                    let warn = fit.warning.clone().unwrap_or_default();
                    row(model, "nu", None, fit.signed_nu(), "", warn);
                    row(model, "sigma0", None, fit.sigma0, "", String::new());
                    row(model, "rmse", None, fit.rmse, "", String::new());
                }
            }
        }
    }
    Ok(rows)
}

/// Writes `fit_report.csv`
/// (`file,model,parameter,temperature_K,value,unit,note`).
pub fn cmd_fit(cfg: &SimConfig, files: &[PathBuf]) -> Result<Outcome> {
    let rows = fit_files(cfg, files)?;
    let path = write_output(&cfg.output_dir, "fit_report.csv", |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "file",
            "model",
            "parameter",
            "temperature_K",
            "value",
            "unit",
            "note",
        ])?;
        for r in &rows {
            wtr.write_record([
                r.file.clone(),
                r.model.to_string(),
                r.parameter.to_string(),
                r.temperature.map(fmt_f64).unwrap_or_default(),
                fmt_f64(r.value),
                r.unit.to_string(),
                r.note.clone(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    })?;
    let mut summary = String::new();
    for r in rows.iter().filter(|r| r.temperature.is_none()) {
        summary.push_str(&format!(
            "{} {} {} = {} {}\n",
            r.file, r.model, r.parameter, r.value, r.unit
        ));
    }
    Ok(Outcome {
        files: vec![path],
        summary: Some(summary),
    })
}

/// Crossbar workload: open-loop and write-verify programming of uniform
/// random targets, one random read, the sneak ratio of cell (0, 0) and a
/// random V/2 write disturb test.
///
/// Writes `xbar_report.csv`, `xbar_read.csv` (`col,current_A,target_current_A`)
/// and `xbar_state.csv`, the write-verified array before the disturb test.
pub fn cmd_xbar(cfg: &SimConfig, args: &XbarArgs) -> Result<Outcome> {
    let p = cfg.device;
    let xb = &cfg.crossbar;
    let (rows, cols) = (xb.rows, xb.cols);
    let t = p.conduction.t_ref;
    let vp = VariabilityParams {
        seed: split_seed(cfg.seed, STREAM_XBAR_ARRAY),
        ..cfg.variability
    };
    let mut rng = rng_from_seed(split_seed(cfg.seed, STREAM_XBAR_WORKLOAD));
    let (g_hrs, g_lrs) = (p.g_hrs(), p.g_lrs());
    let target = Matrix {
        rows,
        cols,
        data: (0..rows * cols)
            .map(|_| rng.random_range(g_hrs..=g_lrs))
            .collect(),
    };
    let mut report = Report::new();
    report.push("rows", rows, "");
    report.push("cols", cols, "");

    let mut open = Crossbar::sampled(rows, cols, p, vp)?;
    let ol = open.program_open_loop(&target)?;
    let ol_err = mean_abs_diff(&open.conductance_matrix(), &target);
    report.push("open_loop_pulses", ol.pulses, "");
    report.push(
        "open_loop_quantization_error",
        ol.mean_quantization_error,
        "S",
    );
    report.push("open_loop_mean_abs_error", ol_err, "S");
    report.push("open_loop_mean_abs_error_rel", ol_err / (g_lrs - g_hrs), "");

    let mut xbar = Crossbar::sampled(rows, cols, p, vp)?;
    let wv = xbar.program_write_verify(&target, args.tol, args.max_iters)?;
    let wv_err = mean_abs_diff(&xbar.conductance_matrix(), &target);
    report.push("write_verify_tolerance", args.tol, "");
    report.push("write_verify_convergence", wv.convergence_fraction(), "");
    report.push("write_verify_mean_pulses", wv.mean_iterations(), "");
    report.push("write_verify_max_pulses", wv.max_iterations, "");
    report.push(
        "write_verify_mean_abs_error_rel",
        wv_err / (g_lrs - g_hrs),
        "",
    );

    let v_read = xb.bias.v_read;
    let x: Vec<f64> = (0..rows)
        .map(|_| rng.random_range(-v_read..=v_read))
        .collect();
    let currents = xbar.read_vmm(&x, t)?;
    let ideal = target.transpose().mul_vec(&x)?;
    let read_err = currents
        .iter()
        .zip(&ideal)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    report.push("read_max_abs_error", read_err, "A");
    report.push("sneak_ratio", xbar.sneak_ratio(0, 0, v_read)?, "");

    let mut files = Vec::new();
    let out = &cfg.output_dir;
    files.push(write_output(out, "xbar_read.csv", |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["col", "current_A", "target_current_A"])?;
        for (c, (i, ti)) in currents.iter().zip(&ideal).enumerate() {
            wtr.write_record([c.to_string(), fmt_f64(*i), fmt_f64(*ti)])?;
        }
        wtr.flush()?;
        Ok(())
    })?);
    files.push(write_output(out, "xbar_state.csv", |w| {
        xbar.write_snapshot_csv(w)
    })?);

    let (mut disturbed, mut selected) = (0usize, 0usize);
    for _ in 0..args.writes {
        let r = rng.random_range(0..rows);
        let c = rng.random_range(0..cols);
        let amplitude = if rng.random_bool(0.5) {
            xb.bias.v_write_pot
        } else {
            xb.bias.v_write_dep
        };
        let pulse = PulseSpec::new(amplitude, p.t_width_ref, UpdateScheme::Single);
        let rep = xbar.write_cell(r, c, &pulse)?;
        disturbed += rep.disturbed;
        selected += usize::from(rep.selected_changed);
    }
    report.push("disturb_writes", args.writes, "");
    report.push("disturb_selected_changed", selected, "");
    report.push("disturb_unselected_changed", disturbed, "");

    files.insert(
        0,
        write_output(out, "xbar_report.csv", |w| report.write_csv(w))?,
    );
    Ok(Outcome {
        files,
        summary: Some(report.to_text()),
    })
}

fn mean_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    let sum: f64 = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).abs()).sum();
    sum / a.data.len() as f64
}

/// Seeds of the inference Monte-Carlo runs.
pub fn inference_seeds(master: u64, n: usize) -> Vec<u64> {
    let base = split_seed(master, STREAM_INFER);
    (0..n as u64).map(|k| split_seed(base, k)).collect()
}

/// Writes `infer_report.csv` (one row per seed), `infer_classes.csv`
/// (`seed,class,samples,baseline_accuracy,analog_accuracy`) and
/// `infer_summary.csv`.
pub fn cmd_infer(cfg: &SimConfig, args: &InferArgs) -> Result<Outcome> {
    let data = match &args.dataset {
        Some(path) => Dataset::read_csv(std::fs::File::open(path)?)?,
        None => Dataset::toy(),
    };
    let inf = &cfg.inference;
    let layers = &inf.layers;
    if layers[0] != data.n_features() || layers[layers.len() - 1] != data.n_classes {
        return Err(Error::config(
            "inference.layers",
            format!(
                "network {:?} does not fit a dataset with {} features and {} classes",
                layers,
                data.n_features(),
                data.n_classes
            ),
        ));
    }
    let n_seeds = args.seeds.unwrap_or(inf.seeds);
    if n_seeds == 0 {
        return Err(Error::config("--seeds", "must be >= 1"));
    }
    let mlp = train(&MlpSpec::new(layers.clone())?, &data, &inf.train)?;
    let seeds = inference_seeds(cfg.seed, n_seeds);
    let reports = evaluate_seeds(
        &mlp,
        &data,
        &cfg.device,
        &cfg.variability,
        inf.programming,
        inf.v_read,
        &seeds,
    )?;
    let out = &cfg.output_dir;
    let mut files = vec![write_output(out, "infer_report.csv", |w| {
        crate::inference::write_seed_report(w, &seeds, &reports)
    })?];
    files.push(write_output(out, "infer_classes.csv", |w| {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "seed",
            "class",
            "samples",
            "baseline_accuracy",
            "analog_accuracy",
        ])?;
        for (seed, r) in seeds.iter().zip(&reports) {
            for c in &r.per_class {
                wtr.write_record([
                    seed.to_string(),
                    c.class.to_string(),
                    c.samples.to_string(),
                    fmt_f64(c.baseline),
                    fmt_f64(c.analog),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    })?);
    let n = reports.len() as f64;
    let mean = |f: &dyn Fn(&crate::inference::AccuracyReport) -> f64| {
        reports.iter().map(f).sum::<f64>() / n
    };
    let mut summary = Report::new();
    summary.push("samples", data.len(), "");
    summary.push("seeds", reports.len(), "");
    summary.push("baseline_accuracy", reports[0].baseline_accuracy, "");
    summary.push("mean_analog_accuracy", mean(&|r| r.analog_accuracy), "");
    summary.push(
        "mean_degradation",
        mean(&|r| r.degradation_points()),
        "points",
    );
    summary.push(
        "max_degradation",
        reports
            .iter()
            .map(|r| r.degradation_points())
            .fold(f64::NEG_INFINITY, f64::max),
        "points",
    );
    files.push(write_output(out, "infer_summary.csv", |w| {
        summary.write_csv(w)
    })?);
    Ok(Outcome {
        files,
        summary: Some(summary.to_text()),
    })
}

/// Benchmark figures of the device, all measured on the simulator.
pub fn bench_report(cfg: &SimConfig) -> Result<Report> {
    let p = &cfg.device;
    let t = p.conduction.t_ref;
    let v = BENCH_READ_VOLTAGE;
    let (lrs, hrs) = (DeviceState::lrs(p), DeviceState::hrs(p));
    let mut r = Report::new();

    let i_lrs = lrs.read_current(v, t, p)?;
    let i_hrs = hrs.read_current(v, t, p)?;
    r.push("on_off", i_lrs / i_hrs, "");
    r.push("r_on", v / i_lrs, "ohm");
    r.push("r_off", v / i_hrs, "ohm");
    r.push("read_voltage", v, "V");

    for (label, scheme) in [
        ("amplitude_ramp", UpdateScheme::AmplitudeRamp),
        ("width_ramp", UpdateScheme::WidthRamp),
    ] {
        let n = p.n_levels as usize;
        let (_, trace) = run_sequence(&hrs, scheme, n, n, p, None)?;
        let pot = fit_update_curve(&trace.branch(Direction::Potentiate))?;
        let dep = fit_update_curve(&trace.branch(Direction::Depress))?;
        r.push(
            format!("nonlinearity_potentiation_{label}"),
            pot.signed_nu(),
            "",
        );
        r.push(
            format!("nonlinearity_depression_{label}"),
            dep.signed_nu(),
            "",
        );
    }
    r.push("levels", p.n_levels, "");

    r.push("potentiation_amplitude", p.v_pot, "V");
    r.push("depression_amplitude", p.v_dep, "V");
    r.push("pulse_width", p.t_width_ref, "s");
    let dep_pulse = PulseSpec::new(p.v_dep, p.t_width_ref, UpdateScheme::Single);
    let pot_pulse = PulseSpec::new(p.v_pot, p.t_width_ref, UpdateScheme::Single);
    r.push(
        "write_energy_depression_from_hrs",
        hrs.write_energy(&dep_pulse)?,
        "J",
    );
    r.push(
        "write_energy_potentiation_from_hrs",
        hrs.write_energy(&pot_pulse)?,
        "J",
    );

    let looped = hysteresis_loop(p, p.v_set_full, p.v_reset_full, 81)?;
    if let Some(w) = looped.window() {
        r.push("memory_window", w, "V");
    }
    if let (Some(set), Some(reset)) = (looped.v_c_set(), looped.v_c_reset()) {
        r.push("coercive_voltage_set", set, "V");
        r.push("coercive_voltage_reset", reset, "V");
    }
    r.push("coercive_field", p.coercive_field_mv_per_cm(), "MV/cm");

    let vp = &cfg.variability;
    let mut rng = rng_from_seed(split_seed(cfg.seed, STREAM_BENCH));
    let eps: Vec<f64> = (0..BENCH_SAMPLES)
        .map(|_| truncated_normal(&mut rng, vp.sigma_c2c))
        .collect();
    r.push("c2c_sigma", std_dev(&eps), "");
    let pop = sample_population(BENCH_SAMPLES, p, vp, split_seed(cfg.seed, STREAM_BENCH + 1));
    let ln_hrs: Vec<f64> = pop.iter().map(|d| d.g_hrs_dev.ln()).collect();
    let ln_lrs: Vec<f64> = pop.iter().map(|d| d.g_lrs_dev.ln()).collect();
    r.push("d2d_sigma_ln_g_hrs", std_dev(&ln_hrs), "");
    r.push("d2d_sigma_ln_g_lrs", std_dev(&ln_lrs), "");

    r.push(
        "nonlinearity_ratio_0.5V",
        nonlinearity_ratio(0.5, t, &p.conduction)?,
        "",
    );
    r.push("area", p.area, "um^2");
    let small = p.scale_area(1.0)?;
    r.push(
        "read_current_lrs_1um2",
        DeviceState::lrs(&small).read_current(v, t, &small)?,
        "A",
    );
    Ok(r)
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Writes `bench.csv` and returns the report as text.
pub fn cmd_bench(cfg: &SimConfig) -> Result<Outcome> {
    let report = bench_report(cfg)?;
    let path = write_output(&cfg.output_dir, "bench.csv", |w| report.write_csv(w))?;
    Ok(Outcome {
        files: vec![path],
        summary: Some(report.to_text()),
    })
}

/// Parse arguments, run, print and return the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            if let Some(s) = &outcome.summary {
                let _ = write!(stdout, "{s}");
            }
            for f in &outcome.files {
                let _ = writeln!(stdout, "wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", error_line(&e));
            exit_code(&e)
        }
    }
}
