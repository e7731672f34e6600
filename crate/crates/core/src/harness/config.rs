use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use serde::Deserialize;

use crate::algorithms::{AlgoConfig, Algorithm};
use crate::indicators::IndicatorConfig;
use crate::problem::{Oracle, SearchDomain, SearchProblem, Sense, Threshold};
use crate::rng::RngSeed;
use crate::suts::{avp_surrogate_with, by_name, AvpGeometry, ExternalSut, ExternalSutConfig, SyntheticSut, MAX_GROUND_TRUTH_CELLS, SUT_NAMES};

/// Problems found while validating an experiment file, one per line.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ConfigDiagnostics(pub Vec<String>);

impl fmt::Display for ConfigDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            f.write_str(d)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalProblemConfig {
    pub command: Vec<String>,
    pub bounds: Vec<(f64, f64)>,
    pub senses: Vec<Sense>,
    pub oracle: Vec<Threshold>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default = "default_pool")]
    pub pool_size: usize,
}

fn default_timeout() -> f64 {
    30.0
}

fn default_pool() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SutConfig {
    #[serde(default = "default_sut")]
    pub name: String,
    /// Geometry overrides for the `avp` surrogate.
    pub avp: Option<AvpGeometry>,
    /// Required when `name = "external"`.
    pub external: Option<ExternalProblemConfig>,
    /// Simulated per-evaluation latency of synthetic SUTs.
    #[serde(default)]
    pub latency_ms: u64,
}

fn default_sut() -> String {
    "avp".into()
}

impl Default for SutConfig {
    fn default() -> Self {
        Self {
            name: default_sut(),
            avp: None,
            external: None,
            latency_ms: 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndicatorOverrides {
    pub hv_reference_point: Option<Vec<f64>>,
    pub grid_bounds: Option<Vec<(f64, f64)>>,
    pub grid_cells_per_dimension: Option<usize>,
    pub checkpoint_interval: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    output_dir: Option<PathBuf>,
    seeds: Option<Vec<u64>>,
    algorithms: Option<Vec<String>>,
    parallelism: Option<usize>,
    ground_truth_resolution: Option<Vec<usize>>,
    #[serde(default)]
    sut: SutConfig,
    #[serde(default)]
    search: toml::Table,
    #[serde(default)]
    overrides: BTreeMap<String, toml::Table>,
    #[serde(default)]
    indicators: IndicatorOverrides,
}

/// The system under test of an experiment, ready to be searched.
#[derive(Clone, Debug)]
pub enum ResolvedSut {
    Synthetic(SyntheticSut),
    External(Arc<ExternalSut>, ExternalProblemConfig),
}

impl ResolvedSut {
    pub fn problem(&self) -> SearchProblem {
        match self {
            ResolvedSut::Synthetic(s) => s.problem(),
            ResolvedSut::External(sut, cfg) => SearchProblem::new(
                "external",
                SearchDomain::new(cfg.bounds.clone()).expect("validated"),
                cfg.senses.clone(),
                Oracle::new(cfg.oracle.clone()),
                sut.clone(),
            )
            .expect("validated"),
        }
    }

    pub fn synthetic(&self) -> Option<&SyntheticSut> {
        match self {
            ResolvedSut::Synthetic(s) => Some(s),
            ResolvedSut::External(..) => None,
        }
    }
}

/// A validated experiment: every (algorithm, seed) cell of the matrix.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub output_dir: PathBuf,
    pub seeds: Vec<RngSeed>,
    /// Algorithms in report order, each with its resolved configuration.
    pub algorithms: Vec<(Algorithm, AlgoConfig)>,
    /// `None` means one worker per available core.
    pub parallelism: Option<usize>,
    pub sut: ResolvedSut,
    pub indicators: IndicatorConfig,
    /// Grid resolution for synthetic ground truth.
    pub ground_truth_resolution: Vec<usize>,
}

impl ExperimentConfig {
    pub fn budget(&self) -> usize {
        self.algorithms[0].1.evaluation_budget
    }

    /// Configuration of one matrix cell.
    pub fn cell_config(&self, algorithm: Algorithm, seed: RngSeed) -> AlgoConfig {
        let base = &self
            .algorithms
            .iter()
            .find(|(a, _)| *a == algorithm)
            .expect("algorithm is part of the experiment")
            .1;
        AlgoConfig { seed, ..base.clone() }
    }
}

fn merge(base: &mut toml::Table, over: &toml::Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

/// Grid resolution giving at most about 8 million cells.
pub fn default_resolution(dimension: usize) -> Vec<usize> {
    let per_dim = (8.0e6f64).powf(1.0 / dimension as f64).floor().max(2.0) as usize;
    vec![per_dim; dimension]
}

/// Parses and fully validates an experiment file. Every problem found is
/// reported, prefixed with the offending field.
pub fn validate_config(text: &str) -> Result<ExperimentConfig, ConfigDiagnostics> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigDiagnostics(vec![e.to_string().trim_end().to_string()]))?;
    let mut diags = Vec::new();

    let seeds = raw.seeds.unwrap_or_else(|| (1..=10).collect());
    if seeds.is_empty() {
        diags.push("seeds: must not be empty".to_string());
    }
    if seeds.iter().collect::<HashSet<_>>().len() != seeds.len() {
        diags.push("seeds: duplicate seed".to_string());
    }

    let names = raw
        .algorithms
        .unwrap_or_else(|| Algorithm::ALL.iter().map(|a| a.name().to_string()).collect());
    if names.is_empty() {
        diags.push("algorithms: must not be empty".to_string());
    }
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for name in &names {
        match name.parse::<Algorithm>() {
            Ok(a) if algorithms.contains(&a) => diags.push(format!("algorithms: {name} listed twice")),
            Ok(a) => algorithms.push(a),
            Err(e) => diags.push(format!("algorithms: {e}")),
        }
    }
    for key in raw.overrides.keys() {
        if !names.contains(key) {
            diags.push(format!("overrides.{key}: not one of the configured algorithms"));
        }
    }

    let mut resolved = Vec::new();
    for &a in &algorithms {
        let mut table = raw.search.clone();
        let prefix = match raw.overrides.get(a.name()) {
            Some(o) => {
                merge(&mut table, o);
                format!("overrides.{a}")
            }
            None => "search".to_string(),
        };
        match toml::Value::Table(table).try_into::<AlgoConfig>() {
            Ok(cfg) => {
                diags.extend(cfg.problems().into_iter().map(|p| format!("{prefix}.{p}")));
                resolved.push((a, cfg));
            }
            Err(e) => diags.push(format!("{prefix}: {}", e.to_string().trim_end())),
        }
    }
    if let Some((_, first)) = resolved.first() {
        if resolved.iter().any(|(_, c)| c.evaluation_budget != first.evaluation_budget) {
            diags.push("overrides: all algorithms must share the same evaluation_budget".to_string());
        }
    }

    if raw.parallelism == Some(0) {
        diags.push("parallelism: must be at least 1".to_string());
    }

    let sut = resolve_sut(&raw.sut, &mut diags);

    let (indicators, resolution) = match &sut {
        Some(sut) => {
            let problem = sut.problem();
            let (hv_default, bounds_default) = match sut.synthetic() {
                Some(s) => (Some(s.hv_reference.clone()), Some(s.objective_bounds.clone())),
                None => (None, None),
            };
            let hv = raw.indicators.hv_reference_point.clone().or(hv_default);
            let bounds = raw.indicators.grid_bounds.clone().or(bounds_default);
            if hv.is_none() {
                diags.push("indicators.hv_reference_point: required for external SUTs".to_string());
            }
            if bounds.is_none() {
                diags.push("indicators.grid_bounds: required for external SUTs".to_string());
            }
            let complete = hv.is_some() && bounds.is_some();
            let ic = IndicatorConfig {
                hv_reference_point: hv.unwrap_or_default(),
                grid_bounds: bounds.unwrap_or_default(),
                grid_cells_per_dimension: raw.indicators.grid_cells_per_dimension.unwrap_or(50),
                checkpoint_interval: raw.indicators.checkpoint_interval.unwrap_or(100),
            };
            if let (true, Err(e)) = (complete, ic.validate(problem.objective_count())) {
                diags.push(format!("indicators: {e}"));
            }
            let dim = problem.domain().dimension();
            let resolution = raw.ground_truth_resolution.clone().unwrap_or_else(|| default_resolution(dim));
            if resolution.len() != dim {
                diags.push(format!("ground_truth_resolution: expected {dim} values, got {}", resolution.len()));
            } else if resolution.contains(&0) {
                diags.push("ground_truth_resolution: values must be positive".to_string());
            } else {
                let cells: u128 = resolution.iter().map(|&r| r as u128).product();
                if cells > MAX_GROUND_TRUTH_CELLS {
                    diags.push(format!(
                        "ground_truth_resolution: {cells} cells exceeds the cap of {MAX_GROUND_TRUTH_CELLS}"
                    ));
                }
            }
            (Some(ic), resolution)
        }
        None => (None, Vec::new()),
    };

    if !diags.is_empty() {
        return Err(ConfigDiagnostics(diags));
    }
    Ok(ExperimentConfig {
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("results")),
        seeds: seeds.into_iter().map(RngSeed).collect(),
        algorithms: resolved,
        parallelism: raw.parallelism,
        sut: sut.expect("no diagnostics"),
        indicators: indicators.expect("no diagnostics"),
        ground_truth_resolution: resolution,
    })
}

fn resolve_sut(cfg: &SutConfig, diags: &mut Vec<String>) -> Option<ResolvedSut> {
    if cfg.avp.is_some() && cfg.name != "avp" {
        diags.push(format!("sut.avp: geometry overrides only apply to the avp SUT, not {:?}", cfg.name));
    }
    if cfg.external.is_some() && cfg.name != "external" {
        diags.push(format!("sut.external: only valid with name = \"external\", not {:?}", cfg.name));
    }
    if cfg.name == "external" {
        let Some(ext) = &cfg.external else {
            diags.push("sut.external: required when name = \"external\"".to_string());
            return None;
        };
        let before = diags.len();
        if ext.command.is_empty() {
            diags.push("sut.external.command: must not be empty".to_string());
        }
        if let Err(e) = SearchDomain::new(ext.bounds.clone()) {
            diags.push(format!("sut.external.bounds: {e}"));
        }
        if !(ext.timeout_secs > 0.0 && ext.timeout_secs.is_finite()) {
            diags.push("sut.external.timeout_secs: must be positive".to_string());
        }
        if ext.pool_size == 0 {
            diags.push("sut.external.pool_size: must be at least 1".to_string());
        }
        if ext.senses.is_empty() {
            diags.push("sut.external.senses: must not be empty".to_string());
        }
        if ext.oracle.is_empty() {
            diags.push("sut.external.oracle: needs at least one clause".to_string());
        }
        if let Some(t) = ext.oracle.iter().find(|t| t.objective >= ext.senses.len()) {
            diags.push(format!("sut.external.oracle: objective index {} out of range", t.objective));
        }
        if diags.len() > before {
            return None;
        }
        let sut = ExternalSut::new(ExternalSutConfig {
            command: ext.command.clone(),
            objective_count: ext.senses.len(),
            timeout_secs: ext.timeout_secs,
            pool_size: ext.pool_size,
        });
        return Some(ResolvedSut::External(Arc::new(sut), ext.clone()));
    }
    let sut = match (cfg.name.as_str(), cfg.avp) {
        ("avp", Some(geometry)) => Some(avp_surrogate_with(geometry)),
        (name, _) => by_name(name),
    };
    match sut {
        Some(s) => Some(ResolvedSut::Synthetic(s.with_latency(Duration::from_millis(cfg.latency_ms)))),
        None => {
            diags.push(format!(
                "sut.name: unknown SUT {:?} (expected one of {}, external)",
                cfg.name,
                SUT_NAMES.join(", ")
            ));
            None
        }
    }
}
