//! Figure and table reproduction at desk scale: rebuilds each published
//! chart from the analytic formulas plus fresh simulations, writes
//! CSV/SVG artifacts, and emits a machine-checkable JSON verdict where
//! every compared quantity carries (expected, got, tolerance, pass).
//!
//! Within a figure, all connectivity degrees k share one seed per grid
//! point (common random numbers), so capacity *ratios* between k values
//! are far more stable than the individual means; the stored loss-table
//! cells are checked against those ratios. Check tolerances are
//! calibrated from repeated desk-scale runs and are widest where either
//! the 500 m window carries only tens of (surviving) stations or the
//! closed forms' independence assumptions visibly bend.

use crate::config::{desk_region, ExperimentSpec, Mode, OutputKind};
use crate::runner::{CliError, SCHEMA_VERSION};
use crate::svg::{Chart, Series};
use mcnet_core::analytic::{expected_sum_capacity, CapacityMethod};
use mcnet_core::degree::DegreeModel;
use mcnet_core::failures::analyze;
use mcnet_core::metrics::{loss_row, LossCell, LossTable};
use mcnet_core::pointprocess::Region;
use mcnet_core::simulator::{run, CapacityReport, SimConfig};
use mcnet_core::specialfn::SeriesOptions;
use mcnet_core::{Failure, Params};
use rayon::prelude::*;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// The published figures and tables this harness can rebuild.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FigureId {
    /// Capacity vs station density without failures, k = 1..5.
    NoFailureCapacity,
    /// Capacity vs random link-failure probability.
    RandomFailure,
    /// Capacity vs overload exponent.
    OverloadFailure,
    /// Capacity vs maximum link length.
    DistanceFailure,
    /// Capacity vs guaranteed line-of-sight radius.
    LosFailure,
    /// Per-user capacity CDF and Jain fairness per k.
    FairnessCdf,
    /// Min/max capacity loss vs single connectivity per failure model.
    LossTable,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::NoFailureCapacity => "no_failure_capacity",
            FigureId::RandomFailure => "random_failure",
            FigureId::OverloadFailure => "overload_failure",
            FigureId::DistanceFailure => "distance_failure",
            FigureId::LosFailure => "los_failure",
            FigureId::FairnessCdf => "fairness_cdf",
            FigureId::LossTable => "loss_table",
        }
    }
}

/// Knobs shared by all reproductions.
#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Overrides the per-figure default replication counts.
    pub replications: Option<u32>,
    pub region: Region,
}

impl ReproduceOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        ReproduceOptions {
            out_dir: out_dir.into(),
            seed: 0,
            replications: None,
            region: desk_region(),
        }
    }
}

/// One compared quantity of a verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub got: f64,
    /// Absolute tolerance on |got − expected|.
    pub tolerance: f64,
    pub pass: bool,
}

fn check(name: impl Into<String>, expected: f64, got: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        expected,
        got,
        tolerance,
        pass: (got - expected).abs() <= tolerance,
    }
}

fn check_rel(name: impl Into<String>, expected: f64, got: f64, rel: f64) -> Check {
    check(name, expected, got, rel * expected.abs())
}

/// Machine-checkable outcome of one reproduction.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub schema_version: u32,
    pub figure: String,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl Verdict {
    fn new(figure: FigureId, checks: Vec<Check>) -> Self {
        Verdict {
            schema_version: SCHEMA_VERSION,
            figure: figure.name().to_string(),
            pass: checks.iter().all(|c| c.pass),
            checks,
        }
    }
}

// ---- shared plumbing -----------------------------------------------------

fn defaults_with_k(k: u32) -> Result<Params, CliError> {
    crate::config::default_params()
        .with_k(k)
        .map_err(|e| CliError::Numeric(e.to_string()))
}

fn analytic_sum(params: &Params) -> Result<f64, CliError> {
    Ok(
        expected_sum_capacity(params, CapacityMethod::Exact, &SeriesOptions::default())
            .map_err(|e| CliError::Numeric(e.to_string()))?
            .sum,
    )
}

fn analytic_with_failure(params: &Params, failure: Option<&Failure>) -> Result<f64, CliError> {
    match failure {
        None => analytic_sum(params),
        Some(f) => Ok(analyze(params, f)
            .map_err(|e| CliError::Numeric(e.to_string()))?
            .expected_sum_capacity),
    }
}

/// Distinct deterministic master seed per run within a figure.
fn run_seed(base: u64, salt: u64) -> u64 {
    base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct Harness<'a> {
    opts: &'a ReproduceOptions,
    salt: u64,
}

impl<'a> Harness<'a> {
    fn new(opts: &'a ReproduceOptions) -> Self {
        Harness { opts, salt: 0 }
    }

    fn simulate(
        &mut self,
        params: Params,
        failure: Option<Failure>,
        reallocation: bool,
        replications: u32,
    ) -> Result<CapacityReport, CliError> {
        self.salt += 1;
        let cfg = SimConfig {
            params,
            region: self.opts.region,
            failure,
            reallocation,
            replications: self.opts.replications.unwrap_or(replications),
            seed: run_seed(self.opts.seed, self.salt),
        };
        Ok(run(&cfg)?)
    }
}

/// One Monte-Carlo run inside a figure grid. Jobs sharing a salt share
/// their random draws (same stations, users, and failure stream seeds).
struct SimJob {
    params: Params,
    failure: Option<Failure>,
    reallocation: bool,
    replications: u32,
    salt: u64,
}

/// Runs the jobs in parallel; seeds derive from each job's salt, so the
/// result is independent of scheduling and thread count.
fn mean_capacities(opts: &ReproduceOptions, jobs: &[SimJob]) -> Result<Vec<f64>, CliError> {
    jobs.par_iter()
        .map(|job| {
            let cfg = SimConfig {
                params: job.params,
                region: opts.region,
                failure: job.failure.clone(),
                reallocation: job.reallocation,
                replications: opts.replications.unwrap_or(job.replications),
                seed: run_seed(opts.seed, job.salt),
            };
            Ok(run(&cfg)?.mean_capacity)
        })
        .collect()
}

/// The resolved configuration embedded in reproduction sidecars:
/// together with the figure name it is enough to re-run the
/// reproduction bit-identically (`mcnet reproduce <figure> --seed <seed>`).
fn figure_spec(figure: FigureId, opts: &ReproduceOptions, replications: u32) -> ExperimentSpec {
    ExperimentSpec {
        name: format!("reproduce_{}", figure.name()),
        mode: Mode::Both,
        sim: SimConfig {
            params: crate::config::default_params(),
            region: opts.region,
            failure: None,
            reallocation: false,
            replications: opts.replications.unwrap_or(replications),
            seed: opts.seed,
        },
        sweep: None,
        outputs: vec![OutputKind::Csv, OutputKind::Json, OutputKind::Svg],
    }
}

fn write_text(path: &Path, text: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    fs::write(path, text)?;
    written.push(path.to_path_buf());
    Ok(())
}

#[derive(Serialize)]
struct FigureSidecar<'a> {
    schema_version: u32,
    spec: &'a ExperimentSpec,
}

fn write_sidecars(
    artifacts: &[PathBuf],
    spec: &ExperimentSpec,
    written: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let body = serde_json::to_string_pretty(&FigureSidecar {
        schema_version: SCHEMA_VERSION,
        spec,
    })
    .map_err(|e| CliError::Numeric(e.to_string()))?;
    for artifact in artifacts {
        let path = PathBuf::from(format!("{}.spec.json", artifact.display()));
        fs::write(&path, &body)?;
        written.push(path);
    }
    Ok(())
}

fn write_verdict(
    figure: FigureId,
    verdict: &Verdict,
    out_dir: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let path = out_dir.join(format!("{}_verdict.json", figure.name()));
    write_text(
        &path,
        &serde_json::to_string_pretty(verdict).map_err(|e| CliError::Numeric(e.to_string()))?,
        written,
    )
}

// ---- capacity-vs-parameter figures ----------------------------------------

struct CapacityFigureRow {
    k: u32,
    x: f64,
    analytic: f64,
    simulated: f64,
}

/// Runs the k = 1..5 × grid simulation matrix without reallocation and
/// pairs each mean with its closed-form counterpart. One seed per grid
/// point, shared across k.
fn capacity_rows(
    opts: &ReproduceOptions,
    grid: &[f64],
    make_params: impl Fn(u32, f64) -> Result<Params, CliError>,
    make_failure: impl Fn(f64) -> Option<Failure>,
    reps_for: impl Fn(f64) -> u32,
) -> Result<Vec<CapacityFigureRow>, CliError> {
    let mut points = Vec::new();
    let mut jobs = Vec::new();
    for k in 1..=5u32 {
        for (i, &x) in grid.iter().enumerate() {
            let params = make_params(k, x)?;
            let failure = make_failure(x);
            points.push((k, x, params, failure.clone()));
            jobs.push(SimJob {
                params,
                failure,
                reallocation: false,
                replications: reps_for(x),
                salt: i as u64 + 1,
            });
        }
    }
    let means = mean_capacities(opts, &jobs)?;
    points
        .iter()
        .zip(&means)
        .map(|((k, x, params, failure), &simulated)| {
            Ok(CapacityFigureRow {
                k: *k,
                x: *x,
                analytic: analytic_with_failure(params, failure.as_ref())?,
                simulated,
            })
        })
        .collect()
}

/// Relative analytic-vs-simulated check per grid point; `rel_tol`
/// returning `None` plots the point without gating it.
fn per_point_checks(
    rows: &[CapacityFigureRow],
    x_label: &str,
    rel_tol: impl Fn(u32, f64) -> Option<f64>,
) -> Vec<Check> {
    rows.iter()
        .filter_map(|r| {
            rel_tol(r.k, r.x).map(|tol| {
                check_rel(
                    format!("k={} {}={} capacity", r.k, x_label, r.x),
                    r.analytic,
                    r.simulated,
                    tol,
                )
            })
        })
        .collect()
}

/// CSV + SVG + verdict + sidecars for one capacity figure.
fn write_capacity_figure(
    figure: FigureId,
    opts: &ReproduceOptions,
    x_label: &str,
    rows: &[CapacityFigureRow],
    checks: Vec<Check>,
    log_x: bool,
    default_reps: u32,
) -> Result<(Verdict, Vec<PathBuf>), CliError> {
    let mut written = Vec::new();
    fs::create_dir_all(&opts.out_dir)?;
    let csv_path = opts.out_dir.join(format!("{}.csv", figure.name()));
    {
        let mut w = csv::Writer::from_path(&csv_path).map_err(|e| CliError::Io(e.to_string()))?;
        w.write_record(["k", x_label, "analytic_bps", "simulated_bps", "rel_gap"])
            .map_err(|e| CliError::Io(e.to_string()))?;
        for r in rows {
            w.write_record(&[
                r.k.to_string(),
                r.x.to_string(),
                format!("{:.6}", r.analytic),
                format!("{:.6}", r.simulated),
                format!("{:.6}", (r.simulated - r.analytic) / r.analytic),
            ])
            .map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush()?;
    }
    written.push(csv_path.clone());

    let mut series = Vec::new();
    for k in 1..=5u32 {
        let line: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.k == k)
            .map(|r| (r.x, r.analytic))
            .collect();
        let marks: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.k == k)
            .map(|r| (r.x, r.simulated))
            .collect();
        series.push(Series::line(format!("k={k} analytic"), line));
        series.push(Series::markers(format!("k={k} simulated"), marks));
    }
    let svg_path = opts.out_dir.join(format!("{}.svg", figure.name()));
    write_text(
        &svg_path,
        &Chart {
            title: format!("{} (analytic lines, simulated markers)", figure.name()),
            x_label: x_label.to_string(),
            y_label: "expected sum capacity (bit/s)".to_string(),
            log_x,
            series,
        }
        .render(),
        &mut written,
    )?;

    let verdict = Verdict::new(figure, checks);
    write_verdict(figure, &verdict, &opts.out_dir, &mut written)?;
    let spec = figure_spec(figure, opts, default_reps);
    let artifacts = written.clone();
    write_sidecars(&artifacts, &spec, &mut written)?;
    Ok((verdict, written))
}

/// Agreement bands calibrated from repeated desk-scale runs. Sparse
/// windows hold only tens of stations (large realization scatter plus
/// the degree–distance coupling the closed form ignores); towards
/// λ_BS = λ_U the equal-split bandwidth model stops describing the many
/// idle stations, worst for k = 1.
fn no_failure_tol(k: u32, lambda_bs: f64) -> f64 {
    if lambda_bs < 5e-4 {
        match k {
            1 => 0.35,
            2 => 0.28,
            _ => 0.25,
        }
    } else if lambda_bs < 2e-2 {
        if k == 1 {
            0.15
        } else {
            0.12
        }
    } else if lambda_bs < 5e-2 {
        if k == 1 {
            0.18
        } else {
            0.10
        }
    } else {
        match k {
            1 => 0.50,
            2 => 0.25,
            _ => 0.12,
        }
    }
}

fn no_failure_capacity(opts: &ReproduceOptions) -> Result<(Verdict, Vec<PathBuf>), CliError> {
    let lambdas: Vec<f64> = (-8..=-2).map(|e| 10f64.powf(e as f64 / 2.0)).collect();
    let rows = capacity_rows(
        opts,
        &lambdas,
        |k, lambda| {
            let d = crate::config::default_params();
            Params::new(lambda, d.lambda_u, d.alpha, d.c, d.w_tot_density, k)
                .map_err(|e| CliError::Numeric(e.to_string()))
        },
        |_| None,
        |lambda| if lambda < 1e-3 { 12 } else { 4 },
    )?;
    let mut checks = per_point_checks(&rows, "lambda_bs", |k, lambda| {
        Some(no_failure_tol(k, lambda))
    });

    let cap = |k: u32, x: f64| {
        let r = rows
            .iter()
            .find(|r| r.k == k && r.x == x)
            .expect("grid point");
        (r.analytic, r.simulated)
    };
    // Single connectivity stays the best choice, and by how much: the
    // relative penalty 1 − C5/C1 is a ratio of means sharing one seed,
    // so it is tight even where the means themselves wander. Beyond
    // λ_BS ≈ λ_U/3 the simulated ordering genuinely degenerates (idle
    // stations), so those points are plotted but not gated.
    for &lambda in &lambdas {
        if lambda > 0.04 {
            continue;
        }
        let (a1, s1) = cap(1, lambda);
        let (a5, s5) = cap(5, lambda);
        let tol = if lambda > 0.02 { 0.12 } else { 0.06 };
        checks.push(check(
            format!("MC penalty 1-C5/C1 at lambda_bs={lambda}"),
            1.0 - a5 / a1,
            1.0 - s5 / s1,
            tol,
        ));
    }
    // The penalty shrinks with densification.
    let sparse = lambdas[0];
    let dense = lambdas[4];
    let (a1s, s1s) = cap(1, sparse);
    let (a5s, s5s) = cap(5, sparse);
    let (a1d, s1d) = cap(1, dense);
    let (a5d, s5d) = cap(5, dense);
    checks.push(check(
        "sparse minus dense MC penalty",
        (1.0 - a5s / a1s) - (1.0 - a5d / a1d),
        (1.0 - s5s / s1s) - (1.0 - s5d / s1d),
        0.08,
    ));
    // And every curve rises with density.
    for k in 1..=5u32 {
        let (ak_s, sk_s) = cap(k, sparse);
        let (ak_d, sk_d) = cap(k, dense);
        checks.push(check_rel(
            format!("densification gain k={k}"),
            ak_d / ak_s,
            sk_d / sk_s,
            0.25,
        ));
    }
    write_capacity_figure(
        FigureId::NoFailureCapacity,
        opts,
        "lambda_bs",
        &rows,
        checks,
        true,
        12,
    )
}

fn random_failure(opts: &ReproduceOptions) -> Result<(Verdict, Vec<PathBuf>), CliError> {
    let mut grid: Vec<f64> = (0..=9).map(|i| i as f64 / 10.0).collect();
    grid.push(0.96);
    let rows = capacity_rows(
        opts,
        &grid,
        |k, _| defaults_with_k(k),
        |p| Some(Failure::Random { p }),
        |p| if p > 0.9 { 6 } else { 3 },
    )?;
    let checks = per_point_checks(&rows, "p", |_, _| Some(0.10));
    write_capacity_figure(FigureId::RandomFailure, opts, "p", &rows, checks, false, 6)
}

/// Expected number of stations in the window that survive an overload
/// failure and still carry at least one link. Below about a dozen the
/// window mean is dominated by a few extreme cells, so such grid points
/// are plotted without being gated.
fn overload_active_survivors(region: &Region, k: u32, beta: f64) -> Option<f64> {
    let p = defaults_with_k(k).ok()?;
    let model = DegreeModel::new(k, p.lambda_u / p.lambda_bs).ok()?;
    let stations = p.lambda_bs * region.width * region.height;
    Some(stations * model.mean() * model.size_biased_inverse_moment(beta))
}

fn overload_reps(beta: f64) -> u32 {
    if beta < 1.0 {
        4
    } else if beta < 1.5 {
        8
    } else {
        16
    }
}

fn overload_failure(opts: &ReproduceOptions) -> Result<(Verdict, Vec<PathBuf>), CliError> {
    let grid: Vec<f64> = (0..=8).map(|i| i as f64 * 0.25).collect();
    let rows = capacity_rows(
        opts,
        &grid,
        |k, _| defaults_with_k(k),
        |beta| Some(Failure::Overload { beta }),
        overload_reps,
    )?;
    // The analytic side rests on the fitted negative-binomial degree law
    // and a degree–rate independence assumption, both of which strain as
    // β grows; the band widths follow measured repeated-run gaps.
    let mut checks = per_point_checks(&rows, "beta", |k, beta| {
        if overload_active_survivors(&opts.region, k, beta)? < 12.0 {
            None
        } else {
            Some(0.12 + 0.08 * beta)
        }
    });

    // A station failure kills all of its links, so redistributing the
    // bandwidth of failed links changes nothing: with shared seeds the
    // reallocation run must reproduce the plain run exactly.
    let pairs = [(2usize, 2u32), (2, 5), (6, 2), (6, 5)];
    let mut jobs = Vec::new();
    for &(gi, k) in &pairs {
        let beta = grid[gi];
        jobs.push(SimJob {
            params: defaults_with_k(k)?,
            failure: Some(Failure::Overload { beta }),
            reallocation: true,
            replications: overload_reps(beta),
            salt: gi as u64 + 1,
        });
    }
    let realloc_means = mean_capacities(opts, &jobs)?;
    for (&(gi, k), &realloc) in pairs.iter().zip(&realloc_means) {
        let beta = grid[gi];
        let plain = rows
            .iter()
            .find(|r| r.k == k && r.x == beta)
            .expect("grid point")
            .simulated;
        checks.push(check(
            format!("reallocation invariance k={k} beta={beta}"),
            0.0,
            (realloc - plain) / plain,
            1e-9,
        ));
    }
    write_capacity_figure(
        FigureId::OverloadFailure,
        opts,
        "beta",
        &rows,
        checks,
        false,
        16,
    )
}

/// Survivor-conditioning band: when only nearby links survive, the
/// realized per-link bandwidth of those survivors sits above the
/// mean-field split (their cells are not average cells), inflating the
/// simulated mean over the closed form as the cutoff tightens.
fn cutoff_tol(r: f64) -> f64 {
    0.08 + 0.6 / r
}

fn distance_failure(opts: &ReproduceOptions) -> Result<(Verdict, Vec<PathBuf>), CliError> {
    let grid = [5.0, 7.5, 10.0, 20.0, 30.0, 50.0, 100.0, 150.0, 200.0];
    let rows = capacity_rows(
        opts,
        &grid,
        |k, _| defaults_with_k(k),
        |r_max| Some(Failure::Distance { r_max }),
        |_| 4,
    )?;
    let checks = per_point_checks(&rows, "r_max", |_, r| Some(cutoff_tol(r)));
    write_capacity_figure(
        FigureId::DistanceFailure,
        opts,
        "r_max",
        &rows,
        checks,
        false,
        4,
    )
}

fn los_failure(opts: &ReproduceOptions) -> Result<(Verdict, Vec<PathBuf>), CliError> {
    let grid = [5.0, 7.5, 10.0, 15.0, 20.0, 35.0, 50.0];
    let rows = capacity_rows(
        opts,
        &grid,
        |k, _| defaults_with_k(k),
        |r_los| Some(Failure::los(r_los)),
        |_| 4,
    )?;
    let checks = per_point_checks(&rows, "r_los", |_, r| Some(cutoff_tol(r)));
    write_capacity_figure(
        FigureId::LosFailure,
        opts,
        "r_los",
        &rows,
        checks,
        false,
        4,
    )
}

// ---- fairness CDF ----------------------------------------------------------

fn fairness_cdf(opts: &ReproduceOptions) -> Result<(Verdict, Vec<PathBuf>), CliError> {
    let figure = FigureId::FairnessCdf;
    let replications = 4;
    let mut harness = Harness::new(opts);
    let mut series = Vec::new();
    let mut jain = Vec::new();
    let mut summary = Vec::new();
    for k in 1..=5u32 {
        let report = harness.simulate(defaults_with_k(k)?, None, false, replications)?;
        series.push(Series::steps(
            format!("k={k} (Jain {:.3})", report.jain_index),
            report.cdf_samples.clone(),
        ));
        jain.push(report.jain_index);
        summary.push((
            k,
            report.mean_capacity,
            report.jain_index,
            report.per_user_capacity.len(),
        ));
    }
    let checks = vec![
        check("jain k=1", 0.52, jain[0], 0.05),
        check("jain k=5", 0.89, jain[4], 0.05),
    ];

    let mut written = Vec::new();
    fs::create_dir_all(&opts.out_dir)?;
    let csv_path = opts.out_dir.join(format!("{}.csv", figure.name()));
    {
        let mut w = csv::Writer::from_path(&csv_path).map_err(|e| CliError::Io(e.to_string()))?;
        w.write_record(["k", "mean_capacity_bps", "jain_index", "n_users"])
            .map_err(|e| CliError::Io(e.to_string()))?;
        for (k, mean, jain, n) in &summary {
            w.write_record(&[
                k.to_string(),
                format!("{mean:.6}"),
                format!("{jain:.6}"),
                n.to_string(),
            ])
            .map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush()?;
    }
    written.push(csv_path);

    let svg_path = opts.out_dir.join(format!("{}.svg", figure.name()));
    write_text(
        &svg_path,
        &Chart {
            title: "per-user sum-capacity CDF".to_string(),
            x_label: "capacity (bit/s)".to_string(),
            y_label: "fraction of users".to_string(),
            log_x: false,
            series,
        }
        .render(),
        &mut written,
    )?;

    let verdict = Verdict::new(figure, checks);
    write_verdict(figure, &verdict, &opts.out_dir, &mut written)?;
    let spec = figure_spec(figure, opts, replications);
    let artifacts = written.clone();
    write_sidecars(&artifacts, &spec, &mut written)?;
    Ok((verdict, written))
}

// ---- loss table -------------------------------------------------------------

/// Published cells, as (min, max) loss fractions for k = 2..5, taken
/// over each row's parameter grid. Grid endpoints were recovered by
/// matching the published extremes: the distance and line-of-sight
/// ranges start at 5 m, and random failures extend to p = 0.96, where
/// the stored cells are hit simultaneously for every k.
struct ExpectedRow {
    label: &'static str,
    reallocation: bool,
    make_failure: Option<fn(f64) -> Failure>,
    grid: Vec<f64>,
    reps: fn(f64) -> u32,
    cells: [(f64, f64); 4],
    tolerance: f64,
}

fn random_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=9).map(|i| i as f64 / 10.0).collect();
    g.push(0.96);
    g
}

fn random_reps(p: f64) -> u32 {
    if p > 0.9 {
        10
    } else {
        4
    }
}

fn expected_rows() -> Vec<ExpectedRow> {
    let overload_grid: Vec<f64> = (0..=8).map(|i| i as f64 * 0.25).collect();
    let distance_grid = vec![5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 50.0, 100.0, 200.0];
    let los_grid = vec![5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0];
    vec![
        ExpectedRow {
            label: "no_failure",
            reallocation: false,
            make_failure: None,
            grid: vec![0.0],
            reps: |_| 10,
            cells: [(0.100, 0.100), (0.168, 0.168), (0.217, 0.217), (0.256, 0.256)],
            tolerance: 0.02,
        },
        ExpectedRow {
            label: "random",
            reallocation: false,
            make_failure: Some(|p| Failure::Random { p }),
            grid: random_grid(),
            reps: random_reps,
            cells: [(0.087, 0.108), (0.155, 0.174), (0.207, 0.222), (0.241, 0.261)],
            tolerance: 0.03,
        },
        ExpectedRow {
            label: "overload",
            reallocation: false,
            make_failure: Some(|beta| Failure::Overload { beta }),
            grid: overload_grid.clone(),
            reps: overload_reps,
            cells: [(0.100, 0.890), (0.168, 0.963), (0.217, 0.987), (0.256, 0.992)],
            tolerance: 0.03,
        },
        ExpectedRow {
            label: "distance",
            reallocation: false,
            make_failure: Some(|r_max| Failure::Distance { r_max }),
            grid: distance_grid.clone(),
            reps: |_| 6,
            cells: [(0.100, 0.360), (0.168, 0.562), (0.217, 0.675), (0.256, 0.743)],
            tolerance: 0.03,
        },
        ExpectedRow {
            label: "los",
            reallocation: false,
            make_failure: Some(|r_los| Failure::los(r_los)),
            grid: los_grid.clone(),
            reps: |_| 8,
            cells: [(0.100, 0.326), (0.168, 0.484), (0.217, 0.579), (0.256, 0.639)],
            tolerance: 0.03,
        },
        ExpectedRow {
            label: "random_realloc",
            reallocation: true,
            make_failure: Some(|p| Failure::Random { p }),
            grid: random_grid(),
            reps: random_reps,
            cells: [
                (-0.525, 0.100),
                (-0.828, 0.168),
                (-0.960, 0.217),
                (-1.059, 0.256),
            ],
            tolerance: 0.03,
        },
        ExpectedRow {
            label: "overload_realloc",
            reallocation: true,
            make_failure: Some(|beta| Failure::Overload { beta }),
            grid: overload_grid,
            reps: overload_reps,
            cells: [(0.100, 0.890), (0.168, 0.963), (0.217, 0.987), (0.256, 0.992)],
            tolerance: 0.03,
        },
        ExpectedRow {
            label: "distance_realloc",
            reallocation: true,
            make_failure: Some(|r_max| Failure::Distance { r_max }),
            grid: distance_grid,
            reps: |_| 6,
            cells: [(0.015, 0.100), (0.021, 0.168), (0.023, 0.217), (0.023, 0.256)],
            tolerance: 0.03,
        },
        ExpectedRow {
            label: "los_realloc",
            reallocation: true,
            make_failure: Some(|r_los| Failure::los(r_los)),
            grid: los_grid,
            reps: |_| 8,
            cells: [(0.039, 0.100), (0.088, 0.168), (0.126, 0.217), (0.155, 0.256)],
            tolerance: 0.03,
        },
    ]
}

fn loss_table_figure(opts: &ReproduceOptions) -> Result<(Verdict, Vec<PathBuf>), CliError> {
    let figure = FigureId::LossTable;
    let k_values = [2u32, 3, 4, 5];
    let mut table = LossTable::new(k_values.to_vec());
    let mut checks = Vec::new();

    let rows_spec = expected_rows();
    let mut jobs = Vec::new();
    for (row_idx, row) in rows_spec.iter().enumerate() {
        for k in 1..=5u32 {
            for (i, &x) in row.grid.iter().enumerate() {
                jobs.push(SimJob {
                    params: defaults_with_k(k)?,
                    failure: row.make_failure.map(|f| f(x)),
                    reallocation: row.reallocation,
                    replications: (row.reps)(x),
                    salt: row_idx as u64 * 1000 + i as u64 + 1,
                });
            }
        }
    }
    let means = mean_capacities(opts, &jobs)?;

    let mut cursor = 0;
    for row in &rows_spec {
        // Simulated capacity per (k, grid index).
        let mut capacity = vec![vec![0.0f64; row.grid.len()]; 6];
        for k in 1..=5u32 {
            for i in 0..row.grid.len() {
                capacity[k as usize][i] = means[cursor];
                cursor += 1;
            }
        }
        let indices: Vec<f64> = (0..row.grid.len()).map(|i| i as f64).collect();
        let cells: Vec<LossCell> = loss_row(
            |k, idx| capacity[k as usize][idx as usize],
            &k_values,
            &indices,
        );
        for (cell, (&k, &(exp_min, exp_max))) in
            cells.iter().zip(k_values.iter().zip(row.cells.iter()))
        {
            checks.push(check(
                format!("{} k={k} min_loss", row.label),
                exp_min,
                cell.min_loss,
                row.tolerance,
            ));
            checks.push(check(
                format!("{} k={k} max_loss", row.label),
                exp_max,
                cell.max_loss,
                row.tolerance,
            ));
        }
        table.rows.push((row.label.to_string(), cells));
    }
    debug_assert_eq!(cursor, means.len());

    let mut written = Vec::new();
    fs::create_dir_all(&opts.out_dir)?;
    let csv_path = opts.out_dir.join(format!("{}.csv", figure.name()));
    {
        let file = fs::File::create(&csv_path)?;
        table
            .write_csv(file)
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    written.push(csv_path);
    let txt_path = opts.out_dir.join(format!("{}.txt", figure.name()));
    write_text(&txt_path, &table.to_text(), &mut written)?;

    // Chart: max loss per k, one line per model row.
    let series: Vec<Series> = table
        .rows
        .iter()
        .map(|(label, cells)| {
            Series::line(
                label.clone(),
                k_values
                    .iter()
                    .zip(cells)
                    .map(|(&k, c)| (k as f64, 100.0 * c.max_loss))
                    .collect(),
            )
        })
        .collect();
    let svg_path = opts.out_dir.join(format!("{}.svg", figure.name()));
    write_text(
        &svg_path,
        &Chart {
            title: "maximum capacity loss vs single connectivity".to_string(),
            x_label: "connectivity degree k".to_string(),
            y_label: "max loss (%)".to_string(),
            log_x: false,
            series,
        }
        .render(),
        &mut written,
    )?;

    let verdict = Verdict::new(figure, checks);
    write_verdict(figure, &verdict, &opts.out_dir, &mut written)?;
    let spec = figure_spec(figure, opts, 4);
    let artifacts = written.clone();
    write_sidecars(&artifacts, &spec, &mut written)?;
    Ok((verdict, written))
}

/// Rebuilds one figure, writing artifacts and the verdict; the caller
/// maps a failed verdict to exit code 3.
pub fn reproduce(
    figure: FigureId,
    opts: &ReproduceOptions,
) -> Result<(Verdict, Vec<PathBuf>), CliError> {
    match figure {
        FigureId::NoFailureCapacity => no_failure_capacity(opts),
        FigureId::RandomFailure => random_failure(opts),
        FigureId::OverloadFailure => overload_failure(opts),
        FigureId::DistanceFailure => distance_failure(opts),
        FigureId::LosFailure => los_failure(opts),
        FigureId::FairnessCdf => fairness_cdf(opts),
        FigureId::LossTable => loss_table_figure(opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_carries_expected_got_tolerance_pass() {
        let c = check("x", 1.0, 1.05, 0.1);
        assert!(c.pass);
        let c = check("x", 1.0, 1.2, 0.1);
        assert!(!c.pass);
        let c = check_rel("x", 10.0, 10.5, 0.04);
        assert!((c.tolerance - 0.4).abs() < 1e-12);
        assert!(!c.pass);
    }

    #[test]
    fn verdict_aggregates_checks() {
        let v = Verdict::new(
            FigureId::FairnessCdf,
            vec![check("a", 1.0, 1.0, 0.1), check("b", 1.0, 0.95, 0.1)],
        );
        assert!(v.pass);
        assert_eq!(v.figure, "fairness_cdf");
        let v = Verdict::new(FigureId::FairnessCdf, vec![check("a", 1.0, 2.0, 0.1)]);
        assert!(!v.pass);
    }

    #[test]
    fn expected_table_rows_are_internally_consistent() {
        for row in expected_rows() {
            assert!(!row.grid.is_empty());
            for (lo, hi) in row.cells {
                assert!(lo <= hi, "{}: {lo} > {hi}", row.label);
            }
            for &x in &row.grid {
                assert!((row.reps)(x) >= 1);
            }
        }
    }

    #[test]
    fn run_seeds_are_distinct() {
        let a = run_seed(0, 1);
        let b = run_seed(0, 2);
        let c = run_seed(1, 1);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn overload_noise_floor_gates_only_starved_points() {
        let region = desk_region();
        // No failure at β = 0: essentially every station stays active.
        let full = overload_active_survivors(&region, 1, 0.0).unwrap();
        assert!(full > 2000.0, "{full}");
        // Harsh exponent and high k: a handful of survivors at most.
        let starved = overload_active_survivors(&region, 5, 2.0).unwrap();
        assert!(starved < 12.0, "{starved}");
        // Monotone in β.
        let mid = overload_active_survivors(&region, 5, 1.0).unwrap();
        assert!(full > mid && mid > starved, "{full} {mid} {starved}");
    }

    #[test]
    fn per_point_checks_can_skip_points() {
        let rows = vec![
            CapacityFigureRow {
                k: 1,
                x: 0.5,
                analytic: 1.0,
                simulated: 1.05,
            },
            CapacityFigureRow {
                k: 2,
                x: 0.5,
                analytic: 1.0,
                simulated: 3.0,
            },
        ];
        let checks = per_point_checks(&rows, "p", |k, _| if k == 2 { None } else { Some(0.1) });
        assert_eq!(checks.len(), 1);
        assert!(checks[0].name.contains("k=1"));
        assert!(checks[0].pass);
    }
}
