//! Experiment configuration: TOML grammar, defaults, validation, and
//! sweep expansion.
//!
//! Grammar (all keys optional; an empty file is a valid experiment):
//!
//! ```toml
//! name = "experiment"
//! mode = "both"                 # "analytic" | "simulate" | "both"
//! outputs = ["csv", "json"]     # any of "csv", "json", "svg"
//! seed = 0
//! replications = 1
//! reallocation = false
//!
//! [params]
//! lambda_bs = 1e-2              # stations per m²
//! lambda_u = 0.1                # users per m²
//! alpha = 2.0                   # path-loss exponent
//! c = 3162.2776601683795        # SNR scale, 10^3.5
//! w_tot_density = 0.1           # Hz per m²
//! k = 1                         # links per user
//!
//! [region]
//! width = 500.0
//! height = 500.0
//! boundary = "torus"            # "torus" | "plain"
//!
//! [failure]                     # absent = failure-free network
//! model = "random"              # "random" | "overload" | "distance" | "los"
//! p = 0.3                       # random: failure probability
//! # beta = 0.5                  # overload: failure exponent
//! # r_max = 30.0                # distance: maximum link length, m
//! # r_los = 10.0                # los: guaranteed line-of-sight radius, m
//! # blockage_constant = 18.0    # los only, optional
//!
//! [sweep]                       # optional: repeat the run over one field
//! path = "failure.p"            # dotted path to a numeric field
//! values = [0.0, 0.1, 0.2]
//! ```

use mcnet_core::failures::FailureModel;
use mcnet_core::pointprocess::{Boundary, Region};
use mcnet_core::simulator::SimConfig;
use mcnet_core::Params;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Scenario defaults: station density 10⁻² per m², user density 0.1 per
/// m², path-loss exponent 2, SNR scale 10^3.5, bandwidth density
/// 0.1 Hz/m², single connectivity.
pub fn default_params() -> Params {
    Params::new(1e-2, 0.1, 2.0, 10f64.powf(3.5), 0.1, 1).expect("defaults are valid")
}

/// Desk-scale sampling window: 500 m × 500 m torus (≈2 500 stations,
/// ≈25 000 users at the default densities).
pub fn desk_region() -> Region {
    Region::square(500.0, Boundary::Torus).expect("desk region is valid")
}

/// Full-scale window matching the published experiments: 1500 m × 1500 m.
pub fn full_region() -> Region {
    Region::square(1500.0, Boundary::Torus).expect("full region is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Analytic,
    Simulate,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Csv,
    Json,
    Svg,
}

/// One-dimensional parameter sweep: the dotted path of a numeric field
/// and the values it takes, one run per value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub path: String,
    pub values: Vec<f64>,
}

/// A fully resolved experiment: what to compute, on which scenario, and
/// which artifacts to write.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub mode: Mode,
    pub sim: SimConfig,
    pub sweep: Option<Sweep>,
    pub outputs: Vec<OutputKind>,
}

/// A configuration problem, with the source location when known.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "config error at line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "config error at line {l}: {}", self.message),
            _ => write!(f, "config error: {}", self.message),
        }
    }
}

impl ConfigError {
    fn bare(message: impl Into<String>) -> Self {
        ConfigError {
            message: message.into(),
            line: None,
            column: None,
        }
    }

    /// Attaches the location of `key` in `source` (best effort: the first
    /// line where the bare key is assigned or opened as a section).
    fn at_key(source: &str, key: &str, message: impl Into<String>) -> Self {
        let leaf = key.rsplit('.').next().unwrap_or(key);
        for (i, line) in source.lines().enumerate() {
            let t = line.trim_start();
            let assigned = t.starts_with(leaf)
                && t[leaf.len()..].trim_start().starts_with('=');
            let sectioned = t.starts_with('[') && t.contains(leaf);
            if assigned || sectioned {
                return ConfigError {
                    message: message.into(),
                    line: Some(i + 1),
                    column: Some(line.len() - t.len() + 1),
                };
            }
        }
        Self::bare(message)
    }
}

fn offset_to_line_col(source: &str, offset: usize) -> (usize, usize) {
    let clipped = offset.min(source.len());
    let prefix = &source[..clipped];
    let line = prefix.matches('\n').count() + 1;
    let column = clipped - prefix.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

// ---- raw (pre-validation) TOML shape ------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    mode: Option<Mode>,
    outputs: Option<Vec<OutputKind>>,
    seed: Option<u64>,
    replications: Option<u32>,
    reallocation: Option<bool>,
    params: Option<RawParams>,
    region: Option<RawRegion>,
    failure: Option<RawFailure>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    lambda_bs: Option<f64>,
    lambda_u: Option<f64>,
    alpha: Option<f64>,
    c: Option<f64>,
    w_tot_density: Option<f64>,
    k: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    width: Option<f64>,
    height: Option<f64>,
    boundary: Option<RawBoundary>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawBoundary {
    Torus,
    Plain,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFailure {
    model: String,
    p: Option<f64>,
    beta: Option<f64>,
    r_max: Option<f64>,
    r_los: Option<f64>,
    blockage_constant: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    path: String,
    values: Vec<f64>,
}

/// The sweepable numeric fields, as dotted paths.
pub const SWEEP_PATHS: [&str; 12] = [
    "params.lambda_bs",
    "params.lambda_u",
    "params.alpha",
    "params.c",
    "params.w_tot_density",
    "params.k",
    "failure.p",
    "failure.beta",
    "failure.r_max",
    "failure.r_los",
    "failure.blockage_constant",
    "replications",
];

fn build_failure(source: &str, raw: &RawFailure) -> Result<FailureModel<f64>, ConfigError> {
    let require = |field: &'static str, v: Option<f64>| {
        v.ok_or_else(|| {
            ConfigError::at_key(
                source,
                "model",
                format!("failure model `{}` requires `{field}`", raw.model),
            )
        })
    };
    let forbid = |field: &'static str, v: Option<f64>| {
        if v.is_some() {
            Err(ConfigError::at_key(
                source,
                field,
                format!("`{field}` does not apply to failure model `{}`", raw.model),
            ))
        } else {
            Ok(())
        }
    };
    let model = match raw.model.as_str() {
        "random" => {
            forbid("beta", raw.beta)?;
            forbid("r_max", raw.r_max)?;
            forbid("r_los", raw.r_los)?;
            forbid("blockage_constant", raw.blockage_constant)?;
            FailureModel::Random {
                p: require("p", raw.p)?,
            }
        }
        "overload" => {
            forbid("p", raw.p)?;
            forbid("r_max", raw.r_max)?;
            forbid("r_los", raw.r_los)?;
            forbid("blockage_constant", raw.blockage_constant)?;
            FailureModel::Overload {
                beta: require("beta", raw.beta)?,
            }
        }
        "distance" => {
            forbid("p", raw.p)?;
            forbid("beta", raw.beta)?;
            forbid("r_los", raw.r_los)?;
            forbid("blockage_constant", raw.blockage_constant)?;
            FailureModel::Distance {
                r_max: require("r_max", raw.r_max)?,
            }
        }
        "los" => {
            forbid("p", raw.p)?;
            forbid("beta", raw.beta)?;
            forbid("r_max", raw.r_max)?;
            let r_los = require("r_los", raw.r_los)?;
            match raw.blockage_constant {
                Some(b) => FailureModel::Los {
                    r_los,
                    blockage_constant: b,
                },
                None => FailureModel::los(r_los),
            }
        }
        other => {
            return Err(ConfigError::at_key(
                source,
                "model",
                format!("unknown failure model `{other}` (expected random, overload, distance or los)"),
            ))
        }
    };
    model
        .validate()
        .map_err(|e| ConfigError::at_key(source, e.name, e.to_string()))?;
    Ok(model)
}

/// Parses a TOML experiment description, filling defaults for anything
/// absent. An empty string yields the default experiment (mode `both`,
/// k = 1, desk-scale torus, no failure).
pub fn parse_config(source: &str) -> Result<ExperimentSpec, ConfigError> {
    let raw: RawConfig = toml::from_str(source).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| offset_to_line_col(source, s.start))
            .map_or((None, None), |(l, c)| (Some(l), Some(c)));
        ConfigError {
            message: e.message().to_string(),
            line,
            column,
        }
    })?;

    let d = default_params();
    let rp = raw.params.unwrap_or_default();
    let params = Params::new(
        rp.lambda_bs.unwrap_or(d.lambda_bs),
        rp.lambda_u.unwrap_or(d.lambda_u),
        rp.alpha.unwrap_or(d.alpha),
        rp.c.unwrap_or(d.c),
        rp.w_tot_density.unwrap_or(d.w_tot_density),
        rp.k.unwrap_or(d.k),
    )
    .map_err(|e| ConfigError::at_key(source, e.name, e.to_string()))?;

    let region = match raw.region {
        None => desk_region(),
        Some(r) => {
            let dr = desk_region();
            Region::new(
                r.width.unwrap_or(dr.width),
                r.height.unwrap_or(dr.height),
                match r.boundary {
                    Some(RawBoundary::Plain) => Boundary::Plain,
                    Some(RawBoundary::Torus) | None => Boundary::Torus,
                },
            )
            .map_err(|e| ConfigError::at_key(source, e.name, e.to_string()))?
        }
    };

    let failure = raw
        .failure
        .as_ref()
        .map(|f| build_failure(source, f))
        .transpose()?;

    let replications = raw.replications.unwrap_or(1);
    if replications == 0 {
        return Err(ConfigError::at_key(
            source,
            "replications",
            "replications must be at least 1",
        ));
    }

    let sweep = match raw.sweep {
        None => None,
        Some(s) => {
            if !SWEEP_PATHS.contains(&s.path.as_str()) {
                return Err(ConfigError::at_key(
                    source,
                    "path",
                    format!(
                        "unknown sweep path `{}` (expected one of: {})",
                        s.path,
                        SWEEP_PATHS.join(", ")
                    ),
                ));
            }
            if s.path.starts_with("failure.") && failure.is_none() {
                return Err(ConfigError::at_key(
                    source,
                    "path",
                    format!("sweep path `{}` needs a [failure] section", s.path),
                ));
            }
            if s.values.is_empty() {
                return Err(ConfigError::at_key(
                    source,
                    "values",
                    "sweep needs at least one value",
                ));
            }
            Some(Sweep {
                path: s.path,
                values: s.values,
            })
        }
    };

    let spec = ExperimentSpec {
        name: raw.name.unwrap_or_else(|| "experiment".to_string()),
        mode: raw.mode.unwrap_or(Mode::Both),
        sim: SimConfig {
            params,
            region,
            failure,
            reallocation: raw.reallocation.unwrap_or(false),
            replications,
            seed: raw.seed.unwrap_or(0),
        },
        sweep,
        outputs: raw
            .outputs
            .unwrap_or_else(|| vec![OutputKind::Csv, OutputKind::Json]),
    };

    // Cross-field checks the sweep will re-run per point.
    for point in expand_sweep(&spec)? {
        point
            .sim
            .validate()
            .map_err(|e| ConfigError::at_key(source, e.name, e.to_string()))?;
    }
    Ok(spec)
}

/// Sets the field addressed by a sweep path. Integer-valued fields
/// (`params.k`, `replications`) reject non-integral values.
pub fn apply_sweep_value(sim: &mut SimConfig, path: &str, value: f64) -> Result<(), ConfigError> {
    let as_u32 = |value: f64, what: &str| -> Result<u32, ConfigError> {
        if value.fract() != 0.0 || value < 1.0 || value > u32::MAX as f64 {
            return Err(ConfigError::bare(format!(
                "sweep value {value} is not a positive integer for `{what}`"
            )));
        }
        Ok(value as u32)
    };
    match path {
        "params.lambda_bs" => sim.params.lambda_bs = value,
        "params.lambda_u" => sim.params.lambda_u = value,
        "params.alpha" => sim.params.alpha = value,
        "params.c" => sim.params.c = value,
        "params.w_tot_density" => sim.params.w_tot_density = value,
        "params.k" => sim.params.k = as_u32(value, path)?,
        "replications" => sim.replications = as_u32(value, path)?,
        _ => {
            let failure = sim.failure.as_mut().ok_or_else(|| {
                ConfigError::bare(format!("sweep path `{path}` needs a failure model"))
            })?;
            match (path, failure) {
                ("failure.p", FailureModel::Random { p }) => *p = value,
                ("failure.beta", FailureModel::Overload { beta }) => *beta = value,
                ("failure.r_max", FailureModel::Distance { r_max }) => *r_max = value,
                ("failure.r_los", FailureModel::Los { r_los, .. }) => *r_los = value,
                (
                    "failure.blockage_constant",
                    FailureModel::Los {
                        blockage_constant, ..
                    },
                ) => *blockage_constant = value,
                (path, failure) => {
                    return Err(ConfigError::bare(format!(
                        "sweep path `{path}` does not match failure model {failure:?}"
                    )))
                }
            }
        }
    }
    Ok(())
}

/// Expands a spec into its sweep points: one spec per value, with the
/// value baked in and recorded in the name. A sweep-less spec expands to
/// itself.
pub fn expand_sweep(spec: &ExperimentSpec) -> Result<Vec<ExperimentSpec>, ConfigError> {
    let Some(sweep) = &spec.sweep else {
        return Ok(vec![spec.clone()]);
    };
    let mut points = Vec::with_capacity(sweep.values.len());
    for &v in &sweep.values {
        let mut point = spec.clone();
        point.sweep = None;
        apply_sweep_value(&mut point.sim, &sweep.path, v)?;
        point.name = format!("{}_{}={v}", spec.name, sweep.path);
        points.push(point);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default_experiment() {
        let spec = parse_config("").unwrap();
        assert_eq!(spec.mode, Mode::Both);
        assert_eq!(spec.name, "experiment");
        let d = default_params();
        assert_eq!(spec.sim.params, d);
        assert_eq!(spec.sim.params.k, 1);
        assert_eq!(spec.sim.region, desk_region());
        assert_eq!(spec.sim.failure, None);
        assert!(!spec.sim.reallocation);
        assert_eq!(spec.sim.replications, 1);
        assert_eq!(spec.sim.seed, 0);
        assert_eq!(spec.outputs, vec![OutputKind::Csv, OutputKind::Json]);
        assert!(spec.sweep.is_none());
    }

    #[test]
    fn partial_sections_keep_unmentioned_defaults() {
        let spec = parse_config("[params]\nk = 3\nalpha = 4.0\n").unwrap();
        assert_eq!(spec.sim.params.k, 3);
        assert_eq!(spec.sim.params.alpha, 4.0);
        assert_eq!(spec.sim.params.lambda_bs, 1e-2);
        assert_eq!(spec.sim.params.c, 10f64.powf(3.5));
    }

    #[test]
    fn unknown_key_is_located() {
        let err = parse_config("seed = 1\nbogus_key = 2\n").unwrap_err();
        assert!(err.message.contains("bogus_key"), "{err}");
        assert_eq!(err.line, Some(2), "{err:?}");
    }

    #[test]
    fn malformed_numeric_names_position() {
        let err = parse_config("[params]\nlambda_bs = \"dense\"\n").unwrap_err();
        assert_eq!(err.line, Some(2), "{err:?}");
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn constraint_violation_names_key_and_line() {
        let err = parse_config("[params]\nalpha = 2.0\nlambda_bs = -3.0\n").unwrap_err();
        assert!(err.message.contains("lambda_bs"), "{err}");
        assert_eq!(err.line, Some(3), "{err:?}");
    }

    #[test]
    fn failure_models_parse_and_check_their_fields() {
        let spec = parse_config("[failure]\nmodel = \"random\"\np = 0.3\n").unwrap();
        assert_eq!(spec.sim.failure, Some(FailureModel::Random { p: 0.3 }));

        let spec = parse_config("[failure]\nmodel = \"los\"\nr_los = 9.0\n").unwrap();
        assert_eq!(spec.sim.failure, Some(FailureModel::los(9.0)));

        let err = parse_config("[failure]\nmodel = \"random\"\n").unwrap_err();
        assert!(err.message.contains("requires `p`"), "{err}");

        let err = parse_config("[failure]\nmodel = \"random\"\np = 0.1\nbeta = 1.0\n").unwrap_err();
        assert!(err.message.contains("does not apply"), "{err}");
        assert_eq!(err.line, Some(4));

        let err = parse_config("[failure]\nmodel = \"sunspots\"\n").unwrap_err();
        assert!(err.message.contains("sunspots"), "{err}");

        let err = parse_config("[failure]\nmodel = \"random\"\np = 1.5\n").unwrap_err();
        assert!(err.message.contains('p'), "{err}");
    }

    #[test]
    fn sweep_over_k_yields_five_runs() {
        let spec = parse_config(
            "[sweep]\npath = \"params.k\"\nvalues = [1, 2, 3, 4, 5]\n",
        )
        .unwrap();
        let points = expand_sweep(&spec).unwrap();
        assert_eq!(points.len(), 5);
        for (i, p) in points.iter().enumerate() {
            assert_eq!(p.sim.params.k, i as u32 + 1);
            assert!(p.sweep.is_none());
            assert!(p.name.contains("params.k"), "{}", p.name);
        }
    }

    #[test]
    fn sweep_path_must_exist_and_match_the_failure_model() {
        let err = parse_config("[sweep]\npath = \"params.power\"\nvalues = [1]\n").unwrap_err();
        assert!(err.message.contains("unknown sweep path"), "{err}");

        let err = parse_config("[sweep]\npath = \"failure.p\"\nvalues = [0.1]\n").unwrap_err();
        assert!(err.message.contains("[failure]"), "{err}");

        let err = parse_config(
            "[failure]\nmodel = \"overload\"\nbeta = 1.0\n[sweep]\npath = \"failure.p\"\nvalues = [0.1]\n",
        )
        .unwrap_err();
        assert!(err.message.contains("does not match"), "{err}");

        let err = parse_config("[sweep]\npath = \"params.k\"\nvalues = [1.5]\n").unwrap_err();
        assert!(err.message.contains("not a positive integer"), "{err}");
    }

    #[test]
    fn sweep_values_reach_the_simulator_config() {
        let spec = parse_config(
            "[failure]\nmodel = \"distance\"\nr_max = 30.0\n[sweep]\npath = \"failure.r_max\"\nvalues = [10.0, 20.0]\n",
        )
        .unwrap();
        let points = expand_sweep(&spec).unwrap();
        assert_eq!(
            points[0].sim.failure,
            Some(FailureModel::Distance { r_max: 10.0 })
        );
        assert_eq!(
            points[1].sim.failure,
            Some(FailureModel::Distance { r_max: 20.0 })
        );
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = parse_config(
            "name = \"rt\"\nmode = \"simulate\"\nseed = 7\n[failure]\nmodel = \"overload\"\nbeta = 0.5\n",
        )
        .unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: ExperimentSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn scale_helpers_have_the_documented_sizes() {
        assert_eq!(desk_region().width, 500.0);
        assert_eq!(full_region().width, 1500.0);
        assert_eq!(desk_region().boundary, Boundary::Torus);
    }
}
