use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, FillingChoice, Mode};
use crate::error::Error;
use crate::filling::{FillingKind, FillingMap};
use crate::process::{sample_path, ProcessSpec};
use crate::seed::seed_for_trial;
use crate::spectra::{
    build_matrix, eigenvalues, ks_distance, semicircle_density, semicircle_moment,
    semicircle_quantile, Histogram, HistogramSpec, SpectralSummary,
};
use crate::verify::{
    check_filling_assumption, check_fourth_moment_conditions, check_process_assumption,
    fourth_moment_margin, margin_seed, MarginRow, Subject, VerificationReport,
};

/// Environment variable capping the worker count.
pub const WORKERS_ENV: &str = "SPECFILL_WORKERS";

/// Confidence a margin row must reach in fourth-moment mode.
pub const MARGIN_Z: f64 = 5.0;

const QUANTILES: [f64; 7] = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];
const CURVE_POINTS: usize = 501;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECKS_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Clone, Debug)]
pub struct Outcome {
    /// False when a verification check failed.
    pub passed: bool,
    pub files: Vec<PathBuf>,
    /// Human-readable summary for standard output.
    pub text: String,
}

/// `SPECFILL_WORKERS` if set and positive, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn exit_code(result: &Result<Outcome, Error>) -> i32 {
    match result {
        Ok(o) if o.passed => EXIT_OK,
        Ok(_) => EXIT_CHECKS_FAILED,
        Err(Error::Config(_) | Error::Process(_) | Error::Filling(_)) => EXIT_CONFIG,
        Err(_) => EXIT_RUNTIME,
    }
}

/// Runs the experiment on a pool of `workers` threads. Outputs depend only on
/// the config, never on `workers`.
pub fn run(config: &ExperimentConfig, workers: usize) -> Result<Outcome, Error> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    std::fs::create_dir_all(&config.output).map_err(|e| io_err(&config.output, e))?;
    pool.install(|| match config.mode {
        Mode::Spectrum => run_spectrum(config),
        Mode::Verify => run_verify(config),
        Mode::FourthMoment => run_fourth_moment(config),
        Mode::ReproduceFig1 => run_fig1(config),
    })
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_histogram(path: &Path, hist: &Histogram) -> Result<(), Error> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    hist.write_csv(BufWriter::new(file))?;
    Ok(())
}

fn trial_seeds(config: &ExperimentConfig) -> Vec<u64> {
    (0..config.trials as u64)
        .map(|t| seed_for_trial(config.seed, t))
        .collect()
}

fn trial_eigenvalues(spec: &ProcessSpec, map: &FillingMap, seed: u64) -> Result<Vec<f64>, Error> {
    let path = sample_path(spec, map.len(), seed)?;
    let sample = build_matrix(&path, map)?;
    Ok(eigenvalues(&sample)?)
}

/// Eigenvalues of every trial, computed in parallel and returned in trial
/// order.
fn run_trials(
    spec: &ProcessSpec,
    map: &FillingMap,
    seeds: &[u64],
) -> Vec<Result<Vec<f64>, Error>> {
    seeds
        .par_iter()
        .map(|&s| trial_eigenvalues(spec, map, s))
        .collect()
}

#[derive(Serialize)]
struct QuantileRow {
    p: f64,
    empirical: f64,
    semicircle: f64,
}

fn quantile_rows(summary: &SpectralSummary) -> Vec<QuantileRow> {
    QUANTILES
        .iter()
        .map(|&p| QuantileRow {
            p,
            empirical: summary.quantile(p),
            semicircle: semicircle_quantile(p),
        })
        .collect()
}

#[derive(Serialize)]
struct TrialRecord {
    trial: usize,
    seed: u64,
    min: f64,
    max: f64,
    moments: Vec<f64>,
    ks_distance: f64,
    quantiles: Vec<QuantileRow>,
}

/// Trial-averaged statistics plus the pooled empirical law.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub trials: usize,
    /// Mean over trials of `m_k`, `k = 0..=k_max`.
    pub moments: Vec<f64>,
    pub semicircle_moments: Vec<f64>,
    /// Mean over trials of the per-trial KS distance.
    pub ks_mean: f64,
    /// KS distance of the pooled eigenvalues.
    pub ks_pooled: f64,
    /// L1 gap between the pooled histogram and the semicircle.
    pub l1_gap: f64,
}

fn aggregate(
    summaries: &[SpectralSummary],
    k_max: u32,
) -> Result<(Aggregate, SpectralSummary), Error> {
    let t = summaries.len() as f64;
    let mut moments = vec![0.0; k_max as usize + 1];
    let mut ks_sum = 0.0;
    for s in summaries {
        for (acc, m) in moments.iter_mut().zip(&s.moments) {
            *acc += m;
        }
        ks_sum += s.ks_distance;
    }
    moments.iter_mut().for_each(|m| *m /= t);
    let pooled_values: Vec<f64> = summaries.iter().flat_map(|s| s.eigenvalues.iter().copied()).collect();
    let pooled = SpectralSummary::new(pooled_values, k_max, HistogramSpec::default());
    let agg = Aggregate {
        trials: summaries.len(),
        moments,
        semicircle_moments: (0..=k_max)
            .map(semicircle_moment)
            .collect::<Result<_, _>>()?,
        ks_mean: ks_sum / t,
        ks_pooled: ks_distance(&pooled.eigenvalues),
        l1_gap: pooled.histogram.l1_gap(),
    };
    Ok((agg, pooled))
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    process: String,
    filling: String,
    n: usize,
    base_seed: u64,
    trial_seeds: &'a [u64],
}

fn provenance<'a>(config: &ExperimentConfig, filling: String, seeds: &'a [u64]) -> Provenance<'a> {
    Provenance {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        process: config.process.label(),
        filling,
        n: config.n,
        base_seed: config.seed,
        trial_seeds: seeds,
    }
}

#[derive(Serialize)]
struct Manifest<'a, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    mode: &'static str,
    config: &'a ExperimentConfig,
    seeds: &'a [u64],
    files: Vec<String>,
    results: R,
}

fn write_manifest<R: Serialize>(
    config: &ExperimentConfig,
    seeds: &[u64],
    files: &mut Vec<PathBuf>,
    results: R,
) -> Result<(), Error> {
    let path = config.output.join("manifest.json");
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        mode: config.mode.name(),
        config,
        seeds,
        files: files
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
        results,
    };
    write_json(&path, &manifest)?;
    files.push(path);
    Ok(())
}

fn flip_warning(spec: &ProcessSpec) -> Option<String> {
    (!spec.is_flip_symmetric()).then(|| {
        format!(
            "{} is not spin-flip symmetric: odd moments need not vanish and the semicircle limit is not guaranteed",
            spec.label()
        )
    })
}

fn run_spectrum(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let map = config.filling.build(config.n)?;
    let name = map.kind().name();
    let seeds = trial_seeds(config);
    let warning = flip_warning(&config.process);
    if let Some(w) = &warning {
        eprintln!("warning: {w}");
    }
    let results = run_trials(&config.process, &map, &seeds);

    let mut files = Vec::new();
    let mut summaries = Vec::new();
    let mut records = Vec::new();
    let mut first_error = None;
    for (t, result) in results.into_iter().enumerate() {
        match result {
            Ok(eig) => {
                let summary = SpectralSummary::new(eig, config.k_max, HistogramSpec::default());
                let path = config.output.join(format!("histogram_{name}_trial{t}.csv"));
                write_histogram(&path, &summary.histogram)?;
                files.push(path);
                records.push(TrialRecord {
                    trial: t,
                    seed: seeds[t],
                    min: summary.eigenvalues[0],
                    max: summary.eigenvalues[summary.n() - 1],
                    moments: summary.moments.clone(),
                    ks_distance: summary.ks_distance,
                    quantiles: quantile_rows(&summary),
                });
                summaries.push(summary);
            }
            Err(e) => {
                eprintln!("trial {t} failed: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    // partial per-trial results stay on disk
    if let Some(e) = first_error {
        return Err(e);
    }

    let (agg, pooled) = aggregate(&summaries, config.k_max)?;
    let hist_path = config.output.join(format!("histogram_{name}.csv"));
    write_histogram(&hist_path, &pooled.histogram)?;
    files.push(hist_path);

    #[derive(Serialize)]
    struct SummaryJson<'a> {
        provenance: Provenance<'a>,
        warnings: Vec<String>,
        averaged: &'a Aggregate,
        pooled_quantiles: Vec<QuantileRow>,
        trials: Vec<TrialRecord>,
    }
    let summary_path = config.output.join("summary.json");
    write_json(
        &summary_path,
        &SummaryJson {
            provenance: provenance(config, name.to_string(), &seeds),
            warnings: warning.into_iter().collect(),
            averaged: &agg,
            pooled_quantiles: quantile_rows(&pooled),
            trials: records,
        },
    )?;
    files.push(summary_path);
    write_manifest(config, &seeds, &mut files, &agg)?;

    let mut text = format!(
        "{} + {name}, n = {}, {} trials\n",
        config.process.label(),
        config.n,
        config.trials
    );
    for (k, (m, s)) in agg.moments.iter().zip(&agg.semicircle_moments).enumerate() {
        text.push_str(&format!("m{k} = {m:.6} (semicircle {s})\n"));
    }
    text.push_str(&format!(
        "KS mean = {:.6}, KS pooled = {:.6}, L1 gap = {:.6}\n",
        agg.ks_mean, agg.ks_pooled, agg.l1_gap
    ));
    Ok(Outcome {
        passed: true,
        files,
        text,
    })
}

fn run_verify(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let chain = config.process.chain()?;
    let map = config.filling.build(config.n)?;
    let mut report = check_process_assumption(&chain, config.k_max as usize, config.index_budget);
    let filling_report = check_filling_assumption(&map)?;
    report.subject = Subject {
        process: Some(config.process.label()),
        filling: Some(map.kind().name().to_string()),
        n: Some(map.n()),
    };
    report.checks.extend(filling_report.checks);

    let mut files = Vec::new();
    let path = config.output.join("report.json");
    write_json(&path, &report)?;
    files.push(path);
    write_manifest(config, &[], &mut files, serde_json::json!({ "all_passed": report.all_passed() }))?;
    Ok(Outcome {
        passed: report.all_passed(),
        files,
        text: report.to_table(),
    })
}

/// Margin rows turned into pass/fail checks: each `z` above [`MARGIN_Z`] and
/// `z` non-decreasing in `N`.
pub fn margin_checks(rows: &[MarginRow], report: &mut VerificationReport) {
    for r in rows {
        report.push(
            &format!("margin_n{}", r.n),
            "E[m_4] - 2 > 0 by more than 5 standard errors",
            r.z > MARGIN_Z,
            r.z - MARGIN_Z,
            format!("mean m4 = {:.6} +- {:.6}, z = {:.2}", r.mean_m4, r.std_error, r.z),
        );
    }
    let worst_drop = rows
        .windows(2)
        .map(|w| w[0].z - w[1].z)
        .fold(0.0f64, f64::max);
    report.push(
        "confidence_non_decreasing",
        "z grows with N",
        worst_drop <= 0.0,
        -worst_drop,
        format!(
            "z by N: {}",
            rows.iter().map(|r| format!("{}:{:.2}", r.n, r.z)).collect::<Vec<_>>().join(" ")
        ),
    );
}

fn run_fourth_moment(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let kind = config.filling.kind();
    let oracle = config.process.oracle()?;
    let mut report = check_fourth_moment_conditions(&*oracle, config.index_budget)?;
    report.subject = Subject {
        process: Some(config.process.label()),
        filling: Some(kind.name().to_string()),
        n: None,
    };
    let rows = fourth_moment_margin(&config.process, kind, &config.n_list, config.trials, config.seed)?;
    margin_checks(&rows, &mut report);

    let seeds: Vec<u64> = config
        .n_list
        .iter()
        .flat_map(|&n| (0..config.trials).map(move |t| (n, t)))
        .map(|(n, t)| margin_seed(config.seed, n, t))
        .collect();

    #[derive(Serialize)]
    struct MarginJson<'a> {
        report: &'a VerificationReport,
        rows: &'a [MarginRow],
    }
    let mut files = Vec::new();
    let path = config.output.join("report.json");
    write_json(
        &path,
        &MarginJson {
            report: &report,
            rows: &rows,
        },
    )?;
    files.push(path);
    write_manifest(config, &seeds, &mut files, &rows)?;

    let mut text = report.to_table();
    text.push_str(&format!(
        "{:>6}  {:>7}  {:>10}  {:>10}  {:>10}  {:>8}\n",
        "N", "trials", "mean_m4", "std_err", "margin", "z"
    ));
    for r in &rows {
        text.push_str(&format!(
            "{:>6}  {:>7}  {:>10.6}  {:>10.6}  {:>10.6}  {:>8.2}\n",
            r.n, r.trials, r.mean_m4, r.std_error, r.margin, r.z
        ));
    }
    Ok(Outcome {
        passed: report.all_passed(),
        files,
        text,
    })
}

/// Writes `x,density` samples of the semicircle on `[-2.5, 2.5]`.
pub fn write_semicircle_curve(path: &Path) -> Result<(), Error> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["x", "density"])?;
    let step = 5.0 / (CURVE_POINTS - 1) as f64;
    for i in 0..CURVE_POINTS {
        let x = -2.5 + i as f64 * step;
        w.write_record([x.to_string(), semicircle_density(x).to_string()])?;
    }
    w.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

fn run_fig1(config: &ExperimentConfig) -> Result<Outcome, Error> {
    let seeds = trial_seeds(config);
    if let Some(w) = flip_warning(&config.process) {
        eprintln!("warning: {w}");
    }
    let mut files = Vec::new();
    let mut results = Vec::new();
    // both panels share the trial seeds, so they differ only by the filling
    for choice in [FillingChoice::Diagonal, FillingChoice::RowWise] {
        let map = choice.build(config.n)?;
        let summaries = run_trials(&config.process, &map, &seeds)
            .into_iter()
            .map(|r| r.map(|eig| SpectralSummary::new(eig, config.k_max, HistogramSpec::default())))
            .collect::<Result<Vec<_>, _>>()?;
        let (agg, pooled) = aggregate(&summaries, config.k_max)?;
        let path = config.output.join(format!("histogram_{}.csv", map.kind().name()));
        write_histogram(&path, &pooled.histogram)?;
        files.push(path);
        results.push((map.kind(), agg));
    }
    let curve = config.output.join("semicircle.csv");
    write_semicircle_curve(&curve)?;
    files.push(curve);

    #[derive(Serialize)]
    struct Panel<'a> {
        filling: FillingKind,
        #[serde(flatten)]
        stats: &'a Aggregate,
    }
    let panels: Vec<Panel> = results
        .iter()
        .map(|(kind, agg)| Panel {
            filling: *kind,
            stats: agg,
        })
        .collect();
    write_manifest(config, &seeds, &mut files, &panels)?;

    let mut text = format!(
        "{}, n = {}, {} trials\n{:>9}  {:>9}  {:>9}  {:>9}  {:>9}  {:>9}\n",
        config.process.label(),
        config.n,
        config.trials,
        "filling",
        "m2",
        "m4",
        "KS mean",
        "KS pooled",
        "L1 gap"
    );
    for (kind, agg) in &results {
        text.push_str(&format!(
            "{:>9}  {:>9.5}  {:>9.5}  {:>9.5}  {:>9.5}  {:>9.5}\n",
            kind.name(),
            agg.moments.get(2).copied().unwrap_or(f64::NAN),
            agg.moments.get(4).copied().unwrap_or(f64::NAN),
            agg.ks_mean,
            agg.ks_pooled,
            agg.l1_gap
        ));
    }
    Ok(Outcome {
        passed: true,
        files,
        text,
    })
}
