//! Executes experiments: analytic evaluation and/or simulation per sweep
//! point, writing CSV/JSON/SVG artifacts plus a JSON sidecar per artifact
//! that embeds the resolved spec and seed for bit-identical re-runs.

use crate::config::{expand_sweep, ConfigError, ExperimentSpec, Mode, OutputKind};
use crate::svg::{Chart, Series};
use mcnet_core::analytic::{expected_sum_capacity, CapacityMethod, CapacityMoments};
use mcnet_core::failures::{analyze, FailureAnalysis};
use mcnet_core::simulator::{run, CapacityReport, SimError};
use mcnet_core::specialfn::SeriesOptions;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Version stamp carried by every JSON document this crate writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io error: {0}")]
    Io(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("reproduction outside tolerance: {0}")]
    Tolerance(String),
}

impl CliError {
    /// Process exit code: 1 usage/config, 2 numeric, 3 tolerance.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Tolerance(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(p) => CliError::Config(ConfigError {
                message: p.to_string(),
                line: None,
                column: None,
            }),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

fn numeric<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numeric(e.to_string())
}

/// Filesystem-safe version of an experiment name.
fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | '=') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// The sweep value a point was created with, if any (recovered from the
/// per-point spec for labelling).
fn point_label(point: &ExperimentSpec) -> String {
    point
        .name
        .rsplit_once('_')
        .map_or_else(|| point.name.clone(), |(_, tail)| tail.to_string())
}

#[derive(Serialize)]
struct Sidecar<'a> {
    schema_version: u32,
    spec: &'a ExperimentSpec,
    resolved_points: &'a [ExperimentSpec],
}

/// Writes `<artifact>.spec.json` next to an artifact.
fn write_sidecar(
    artifact: &Path,
    spec: &ExperimentSpec,
    points: &[ExperimentSpec],
) -> Result<PathBuf, CliError> {
    let path = PathBuf::from(format!("{}.spec.json", artifact.display()));
    let doc = Sidecar {
        schema_version: SCHEMA_VERSION,
        spec,
        resolved_points: points,
    };
    fs::write(&path, serde_json::to_string_pretty(&doc).map_err(numeric)?)?;
    Ok(path)
}

#[derive(Serialize)]
pub struct AnalyticPoint {
    pub name: String,
    pub sweep_value: Option<f64>,
    pub moments: CapacityMoments<f64>,
    pub failure_analysis: Option<FailureAnalysis<f64>>,
}

/// Evaluates the closed forms for one resolved point.
pub fn analytic_point(
    point: &ExperimentSpec,
    sweep_value: Option<f64>,
) -> Result<AnalyticPoint, CliError> {
    let opts = SeriesOptions::default();
    let moments = expected_sum_capacity(&point.sim.params, CapacityMethod::Exact, &opts)
        .map_err(numeric)?;
    let failure_analysis = point
        .sim
        .failure
        .as_ref()
        .map(|f| analyze(&point.sim.params, f))
        .transpose()
        .map_err(numeric)?;
    Ok(AnalyticPoint {
        name: point.name.clone(),
        sweep_value,
        moments,
        failure_analysis,
    })
}

fn sweep_values(spec: &ExperimentSpec) -> Vec<Option<f64>> {
    match &spec.sweep {
        Some(s) => s.values.iter().copied().map(Some).collect(),
        None => vec![None],
    }
}

fn write_analytic_artifacts(
    spec: &ExperimentSpec,
    points: &[ExperimentSpec],
    results: &[AnalyticPoint],
    out_dir: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let base = slug(&spec.name);
    if spec.outputs.contains(&OutputKind::Csv) {
        let path = out_dir.join(format!("{base}_analytic.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(e.to_string()))?;
        w.write_record([
            "name",
            "sweep_value",
            "k",
            "j",
            "per_link_capacity_bps",
            "sum_capacity_bps",
            "effective_sum_capacity_bps",
            "outage_probability",
        ])
        .map_err(|e| CliError::Io(e.to_string()))?;
        for r in results {
            let k = r.moments.per_link.len();
            for (j, c) in r.moments.per_link.iter().enumerate() {
                w.write_record(&[
                    r.name.clone(),
                    r.sweep_value.map_or_else(String::new, |v| v.to_string()),
                    k.to_string(),
                    (j + 1).to_string(),
                    format!("{c:.6}"),
                    format!("{:.6}", r.moments.sum),
                    format!("{:.6}", effective_capacity(r)),
                    r.failure_analysis
                        .as_ref()
                        .map_or_else(String::new, |a| format!("{:.9e}", a.outage_probability)),
                ])
                .map_err(|e| CliError::Io(e.to_string()))?;
            }
        }
        w.flush()?;
        written.push(write_sidecar(&path, spec, points)?);
        written.push(path);
    }
    if spec.outputs.contains(&OutputKind::Json) {
        #[derive(Serialize)]
        struct Doc<'a> {
            schema_version: u32,
            results: &'a [AnalyticPoint],
        }
        let path = out_dir.join(format!("{base}_analytic.json"));
        fs::write(
            &path,
            serde_json::to_string_pretty(&Doc {
                schema_version: SCHEMA_VERSION,
                results,
            })
            .map_err(numeric)?,
        )?;
        written.push(write_sidecar(&path, spec, points)?);
        written.push(path);
    }
    if spec.outputs.contains(&OutputKind::Svg) {
        let chart = if results.len() > 1 {
            // Capacity against the sweep variable.
            let pts: Vec<(f64, f64)> = results
                .iter()
                .filter_map(|r| r.sweep_value.map(|v| (v, effective_capacity(r))))
                .collect();
            Chart {
                title: format!("{}: analytic capacity", spec.name),
                x_label: spec
                    .sweep
                    .as_ref()
                    .map_or_else(|| "sweep".into(), |s| s.path.clone()),
                y_label: "expected sum capacity (bit/s)".into(),
                log_x: log_axis_appropriate(&pts),
                series: vec![Series::line("analytic", pts)],
            }
        } else {
            let per_link: Vec<(f64, f64)> = results[0]
                .moments
                .per_link
                .iter()
                .enumerate()
                .map(|(j, c)| ((j + 1) as f64, *c))
                .collect();
            Chart {
                title: format!("{}: per-link capacity", spec.name),
                x_label: "link rank j".into(),
                y_label: "expected capacity (bit/s)".into(),
                log_x: false,
                series: vec![Series {
                    markers: true,
                    ..Series::line("analytic", per_link)
                }],
            }
        };
        let path = out_dir.join(format!("{base}_analytic.svg"));
        fs::write(&path, chart.render())?;
        written.push(write_sidecar(&path, spec, points)?);
        written.push(path);
    }
    Ok(())
}

/// Analytic capacity after failures when a model is present, otherwise
/// the failure-free sum.
fn effective_capacity(r: &AnalyticPoint) -> f64 {
    r.failure_analysis
        .as_ref()
        .map_or(r.moments.sum, |a| a.expected_sum_capacity)
}

/// A log x axis is used when all x are positive and span ≥ 2 decades.
fn log_axis_appropriate(points: &[(f64, f64)]) -> bool {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &(x, _) in points {
        if x <= 0.0 {
            return false;
        }
        lo = lo.min(x);
        hi = hi.max(x);
    }
    points.len() > 1 && hi / lo >= 100.0
}

fn write_simulate_artifacts(
    spec: &ExperimentSpec,
    points: &[ExperimentSpec],
    reports: &[(Option<f64>, CapacityReport)],
    out_dir: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let base = slug(&spec.name);
    if spec.outputs.contains(&OutputKind::Csv) {
        for (point, (_, report)) in points.iter().zip(reports) {
            let path = out_dir.join(format!("{}_users.csv", slug(&point.name)));
            let file = fs::File::create(&path)?;
            report
                .write_csv(file)
                .map_err(|e| CliError::Io(e.to_string()))?;
            written.push(write_sidecar(&path, spec, points)?);
            written.push(path);
        }
        let path = out_dir.join(format!("{base}_summary.csv"));
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(e.to_string()))?;
        w.write_record([
            "name",
            "sweep_value",
            "n_users",
            "mean_capacity_bps",
            "outage_fraction",
            "jain_index",
        ])
        .map_err(|e| CliError::Io(e.to_string()))?;
        for (point, (v, report)) in points.iter().zip(reports) {
            w.write_record(&[
                point.name.clone(),
                v.map_or_else(String::new, |v| v.to_string()),
                report.per_user_capacity.len().to_string(),
                format!("{:.6}", report.mean_capacity),
                format!("{:.6}", report.outage_fraction),
                format!("{:.6}", report.jain_index),
            ])
            .map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush()?;
        written.push(write_sidecar(&path, spec, points)?);
        written.push(path);
    }
    if spec.outputs.contains(&OutputKind::Json) {
        #[derive(Serialize)]
        struct Entry<'a> {
            name: &'a str,
            sweep_value: Option<f64>,
            report: &'a CapacityReport,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            schema_version: u32,
            results: Vec<Entry<'a>>,
        }
        let doc = Doc {
            schema_version: SCHEMA_VERSION,
            results: points
                .iter()
                .zip(reports)
                .map(|(p, (v, r))| Entry {
                    name: &p.name,
                    sweep_value: *v,
                    report: r,
                })
                .collect(),
        };
        let path = out_dir.join(format!("{base}_simulate.json"));
        fs::write(&path, serde_json::to_string_pretty(&doc).map_err(numeric)?)?;
        written.push(write_sidecar(&path, spec, points)?);
        written.push(path);
    }
    if spec.outputs.contains(&OutputKind::Svg) {
        let series: Vec<Series> = points
            .iter()
            .zip(reports)
            .map(|(p, (_, r))| Series::steps(point_label(p), r.cdf_samples.clone()))
            .collect();
        let chart = Chart {
            title: format!("{}: per-user capacity CDF", spec.name),
            x_label: "capacity (bit/s)".into(),
            y_label: "fraction of users".into(),
            log_x: false,
            series,
        };
        let path = out_dir.join(format!("{base}_simulate.svg"));
        fs::write(&path, chart.render())?;
        written.push(write_sidecar(&path, spec, points)?);
        written.push(path);
    }
    Ok(())
}

/// Runs an experiment end to end and returns every file written.
pub fn execute(spec: &ExperimentSpec, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out_dir)?;
    let points = expand_sweep(spec)?;
    let values = sweep_values(spec);
    let mut written = Vec::new();

    if matches!(spec.mode, Mode::Analytic | Mode::Both) {
        let results: Vec<AnalyticPoint> = points
            .iter()
            .zip(values.iter())
            .map(|(p, v)| analytic_point(p, *v))
            .collect::<Result<_, _>>()?;
        write_analytic_artifacts(spec, &points, &results, out_dir, &mut written)?;
    }
    if matches!(spec.mode, Mode::Simulate | Mode::Both) {
        let reports: Vec<(Option<f64>, CapacityReport)> = points
            .iter()
            .zip(values.iter())
            .map(|(p, v)| Ok((*v, run(&p.sim)?)))
            .collect::<Result<_, CliError>>()?;
        write_simulate_artifacts(spec, &points, &reports, out_dir, &mut written)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    /// A fast scenario: 50 m window ⇒ ≈25 stations, ≈250 users. `top`
    /// holds extra top-level keys, `sections` extra [table] sections.
    fn small(top: &str, sections: &str) -> String {
        format!(
            "name = \"small\"\nseed = 3\n{top}[region]\nwidth = 50.0\nheight = 50.0\n[params]\nk = 2\n{sections}"
        )
    }

    #[test]
    fn execute_writes_all_requested_artifacts_with_sidecars() {
        let dir = tempfile::tempdir().unwrap();
        let spec = parse_config(&small("outputs = [\"csv\", \"json\", \"svg\"]\n", "")).unwrap();
        let files = execute(&spec, dir.path()).unwrap();
        let names: Vec<String> = files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        for expected in [
            "small_analytic.csv",
            "small_analytic.json",
            "small_analytic.svg",
            "small_users.csv",
            "small_summary.csv",
            "small_simulate.json",
            "small_simulate.svg",
        ] {
            assert!(names.contains(&expected.to_string()), "missing {expected} in {names:?}");
            assert!(
                names.contains(&format!("{expected}.spec.json")),
                "missing sidecar for {expected}"
            );
        }
        // Sidecars re-parse to the same resolved spec (seed included).
        let sidecar = files
            .iter()
            .find(|p| p.to_string_lossy().ends_with("small_simulate.json.spec.json"))
            .unwrap();
        let doc: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(sidecar).unwrap()).unwrap();
        assert_eq!(doc["schema_version"], 1);
        let back: ExperimentSpec = serde_json::from_value(doc["spec"].clone()).unwrap();
        assert_eq!(back, spec);
        assert_eq!(back.sim.seed, 3);
    }

    #[test]
    fn sweep_emits_one_run_per_value() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(
            "mode = \"simulate\"\n",
            "[sweep]\npath = \"params.k\"\nvalues = [1, 2, 3]\n",
        );
        let spec = parse_config(&cfg).unwrap();
        let files = execute(&spec, dir.path()).unwrap();
        let user_files: Vec<_> = files
            .iter()
            .filter(|p| p.to_string_lossy().ends_with("_users.csv"))
            .collect();
        assert_eq!(user_files.len(), 3, "{files:?}");
        let summary = files
            .iter()
            .find(|p| p.to_string_lossy().ends_with("small_summary.csv"))
            .unwrap();
        let text = fs::read_to_string(summary).unwrap();
        assert_eq!(text.lines().count(), 4, "{text}");
        for v in ["1", "2", "3"] {
            assert!(text.contains(&format!(",{v},")), "sweep value {v} missing:\n{text}");
        }
    }

    #[test]
    fn analytic_json_carries_schema_version_and_moments() {
        let dir = tempfile::tempdir().unwrap();
        let spec =
            parse_config(&small("mode = \"analytic\"\noutputs = [\"json\"]\n", "")).unwrap();
        let files = execute(&spec, dir.path()).unwrap();
        let json_path = files
            .iter()
            .find(|p| p.to_string_lossy().ends_with("small_analytic.json"))
            .unwrap();
        let doc: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(json_path).unwrap()).unwrap();
        assert_eq!(doc["schema_version"], 1);
        let per_link = doc["results"][0]["moments"]["per_link"].as_array().unwrap();
        assert_eq!(per_link.len(), 2);
        assert!(per_link[0].as_f64().unwrap() > per_link[1].as_f64().unwrap());
    }

    #[test]
    fn failure_sweep_reports_outage_in_csv() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(
            "mode = \"analytic\"\noutputs = [\"csv\"]\n",
            "[failure]\nmodel = \"random\"\np = 0.5\n[sweep]\npath = \"failure.p\"\nvalues = [0.2, 0.5]\n",
        );
        let spec = parse_config(&cfg).unwrap();
        let files = execute(&spec, dir.path()).unwrap();
        let csv_path = files
            .iter()
            .find(|p| p.to_string_lossy().ends_with("small_analytic.csv"))
            .unwrap();
        let text = fs::read_to_string(csv_path).unwrap();
        // 2 sweep points × k=2 ranks + header.
        assert_eq!(text.lines().count(), 5, "{text}");
        assert!(text.contains("outage_probability"));
        // p = 0.2, k = 2 ⇒ outage 0.04; p = 0.5 ⇒ 0.25.
        assert!(text.contains("4.000000000e-2"), "{text}");
        assert!(text.contains("2.500000000e-1"), "{text}");
    }

    #[test]
    fn error_mapping_matches_exit_codes() {
        assert_eq!(
            CliError::Config(ConfigError {
                message: "x".into(),
                line: None,
                column: None
            })
            .exit_code(),
            1
        );
        assert_eq!(CliError::Io("x".into()).exit_code(), 1);
        assert_eq!(CliError::Numeric("x".into()).exit_code(), 2);
        assert_eq!(CliError::Tolerance("x".into()).exit_code(), 3);
    }
}
