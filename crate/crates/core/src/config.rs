//! Problem files: JSON describing the system, regions, labels, property and
//! solver settings. Every string is parsed on load; errors carry a JSON
//! pointer to the offending value.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    parse_inequality, parse_poly, BasicSet, LabeledRegion, Labeling, NoiseDist, NoiseModel, Region, StochasticSystem,
};
use crate::automaton::{Dfa, DfaJson};
use crate::certificate::SynthesisOptions;
use crate::engine::{EngineOptions, Problem, Specification};
use crate::formula::{parse_formula, Props};
use crate::montecarlo::{InitialSampler, SimConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("at {pointer}: {message}")]
    Invalid { pointer: String, message: String },
}

impl ConfigError {
    pub fn pointer(&self) -> Option<&str> {
        match self {
            ConfigError::Io { .. } => None,
            ConfigError::Schema { pointer, .. } | ConfigError::Invalid { pointer, .. } => Some(pointer),
        }
    }
}

fn invalid(pointer: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Invalid { pointer: pointer.into(), message: message.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub name: String,
    #[serde(flatten)]
    pub dist: NoiseDist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    /// Each disjunct is a list of `"lhs >= rhs"` / `"lhs <= rhs"` strings.
    pub disjuncts: Vec<Vec<String>>,
    #[serde(default = "yes")]
    pub bounded: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloSpec {
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub seed: u64,
    /// Regions to sample initial states from, uniformly over their union.
    #[serde(default)]
    pub initial_regions: Vec<String>,
    /// Fixed initial state; takes precedence over `initial_regions`.
    #[serde(default)]
    pub initial_state: Option<Vec<f64>>,
}

impl Default for MonteCarloSpec {
    fn default() -> Self {
        MonteCarloSpec {
            realizations: default_realizations(),
            confidence: default_confidence(),
            seed: 0,
            initial_regions: Vec::new(),
            initial_state: None,
        }
    }
}

fn default_realizations() -> usize {
    10_000
}

fn default_confidence() -> f64 {
    0.9999
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    #[serde(default)]
    pub lower_bound: Option<f64>,
    #[serde(default)]
    pub monte_carlo_interval: Option<(f64, f64)>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub variables: Vec<String>,
    #[serde(default)]
    pub noise: Vec<NoiseSpec>,
    pub dynamics: Vec<String>,
    /// Inequalities describing `X`; empty for `R^n`.
    #[serde(default)]
    pub state_space: Vec<String>,
    pub regions: BTreeMap<String, RegionSpec>,
    #[serde(default)]
    pub propositions: Option<Vec<String>>,
    /// Region name -> proposition.
    pub labels: BTreeMap<String, String>,
    #[serde(default)]
    pub default_label: Option<String>,
    #[serde(default)]
    pub formula: Option<String>,
    /// Path to a DFA for the negated property, relative to the config file.
    #[serde(default)]
    pub dfa: Option<String>,
    pub horizon: usize,
    #[serde(default)]
    pub synthesis: SynthesisOptions,
    #[serde(default)]
    pub monte_carlo: MonteCarloSpec,
    #[serde(default)]
    pub reference: ReferenceSpec,
}

/// Validated configuration with everything parsed.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub raw: ProblemConfig,
    pub problem: Problem,
    pub regions: BTreeMap<String, Region>,
    pub engine: EngineOptions,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    /// Monte Carlo settings; the horizon is the problem's `N`.
    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        let mc = &self.raw.monte_carlo;
        let initial = if let Some(x) = &mc.initial_state {
            InitialSampler::Point { state: x.clone() }
        } else {
            let names: Vec<String> = if mc.initial_regions.is_empty() {
                self.regions.iter().filter(|(_, r)| r.bounded).map(|(k, _)| k.clone()).collect()
            } else {
                mc.initial_regions.clone()
            };
            let mut parts = Vec::new();
            for (i, n) in names.iter().enumerate() {
                let r = self
                    .regions
                    .get(n)
                    .ok_or_else(|| invalid(format!("/monte_carlo/initial_regions/{i}"), format!("unknown region '{n}'")))?;
                parts.push(r.clone());
            }
            InitialSampler::Uniform { region: Region::union(parts) }
        };
        Ok(SimConfig {
            horizon: self.problem.horizon,
            realizations: mc.realizations,
            seed: mc.seed,
            initial,
            confidence: mc.confidence,
        })
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<LoadedConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    load_config_str(&text, &base)
}

fn pointer_of(path: &serde_path_to_error::Path, message: &str) -> String {
    let mut p = String::new();
    for seg in path.iter() {
        use serde_path_to_error::Segment::*;
        match seg {
            Seq { index } => p.push_str(&format!("/{index}")),
            Map { key } => p.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Enum { variant } => p.push_str(&format!("/{variant}")),
            Unknown => {}
        }
    }
    // serde reports a missing field at its parent
    if let Some(rest) = message.strip_prefix("missing field `") {
        if let Some(field) = rest.split('`').next() {
            p.push('/');
            p.push_str(field);
        }
    }
    if p.is_empty() {
        p.push('/');
    }
    p
}

pub fn parse_config(text: &str) -> Result<ProblemConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let message = e.inner().to_string();
        ConfigError::Schema { pointer: pointer_of(e.path(), &message), message }
    })
}

pub fn load_config_str(text: &str, base_dir: &Path) -> Result<LoadedConfig, ConfigError> {
    let raw = parse_config(text)?;
    build(raw, base_dir)
}

fn parse_set(ineqs: &[String], vars: &[String], pointer: &str) -> Result<BasicSet, ConfigError> {
    let mut out = Vec::with_capacity(ineqs.len());
    for (i, s) in ineqs.iter().enumerate() {
        let g = parse_inequality(s, vars).map_err(|e| invalid(format!("{pointer}/{i}"), e))?;
        out.push(g);
    }
    Ok(BasicSet::new(out))
}

pub fn build(raw: ProblemConfig, base_dir: &Path) -> Result<LoadedConfig, ConfigError> {
    let vars = &raw.variables;
    if vars.is_empty() {
        return Err(invalid("/variables", "at least one state variable is required"));
    }
    let noise_names: Vec<String> = raw.noise.iter().map(|n| n.name.clone()).collect();
    let mut all = vars.clone();
    all.extend(noise_names.iter().cloned());
    for (i, n) in all.iter().enumerate() {
        if all[..i].contains(n) {
            return Err(invalid("/variables", format!("name '{n}' declared twice")));
        }
    }
    if raw.dynamics.len() != vars.len() {
        return Err(invalid(
            "/dynamics",
            format!("{} update maps for {} state variables", raw.dynamics.len(), vars.len()),
        ));
    }
    let mut dynamics = Vec::with_capacity(vars.len());
    for (i, s) in raw.dynamics.iter().enumerate() {
        dynamics.push(parse_poly(s, &all).map_err(|e| invalid(format!("/dynamics/{i}"), e))?);
    }
    let noise = NoiseModel::new(raw.noise.iter().map(|n| n.dist.clone()).collect()).map_err(|e| invalid("/noise", e))?;
    let system =
        StochasticSystem::new(vars.clone(), noise_names, dynamics, noise).map_err(|e| invalid("/dynamics", e))?;
    let domain = parse_set(&raw.state_space, vars, "/state_space")?;

    let mut regions = BTreeMap::new();
    for (name, spec) in &raw.regions {
        if spec.disjuncts.is_empty() {
            return Err(invalid(format!("/regions/{name}/disjuncts"), "a region needs at least one disjunct"));
        }
        let mut ds = Vec::new();
        for (k, d) in spec.disjuncts.iter().enumerate() {
            ds.push(parse_set(d, vars, &format!("/regions/{name}/disjuncts/{k}"))?);
        }
        regions.insert(name.clone(), Region::new(ds, spec.bounded));
    }

    let props = match &raw.propositions {
        Some(p) => {
            if p.is_empty() {
                return Err(invalid("/propositions", "at least one proposition is required"));
            }
            Props::new(p.clone())
        }
        None => {
            let mut names: Vec<String> = raw.labels.values().cloned().collect();
            names.extend(raw.default_label.iter().cloned());
            names.sort();
            names.dedup();
            if names.is_empty() {
                return Err(invalid("/labels", "no propositions are labeled"));
            }
            Props::new(names)
        }
    };
    let mut entries = Vec::new();
    let mut seen: BTreeMap<usize, String> = BTreeMap::new();
    for (region, prop) in &raw.labels {
        let pointer = format!("/labels/{region}");
        let r = regions.get(region).ok_or_else(|| invalid(&pointer, format!("unknown region '{region}'")))?;
        let p = props.index(prop).ok_or_else(|| invalid(&pointer, format!("unknown proposition '{prop}'")))?;
        if let Some(other) = seen.insert(p, region.clone()) {
            return Err(invalid(&pointer, format!("proposition '{prop}' already labels region '{other}'")));
        }
        entries.push(LabeledRegion { name: region.clone(), region: r.clone(), prop: p });
    }
    let default = match &raw.default_label {
        Some(d) => {
            let p = props.index(d).ok_or_else(|| invalid("/default_label", format!("unknown proposition '{d}'")))?;
            if seen.contains_key(&p) {
                return Err(invalid("/default_label", format!("proposition '{d}' also labels a region")));
            }
            Some(p)
        }
        None => None,
    };
    for (i, name) in props.names().iter().enumerate() {
        if !seen.contains_key(&i) && default != Some(i) {
            return Err(invalid("/labels", format!("proposition '{name}' labels no region")));
        }
    }
    let labeling = Labeling { entries, default };

    let spec = match (&raw.formula, &raw.dfa) {
        (Some(_), Some(_)) => return Err(invalid("/dfa", "formula and dfa are mutually exclusive")),
        (None, None) => return Err(invalid("/formula", "one of formula or dfa is required")),
        (Some(f), None) => {
            let f = parse_formula(f, &props).map_err(|e| invalid("/formula", e))?;
            if !f.is_safe() {
                return Err(invalid("/formula", "formula is not in the safe fragment"));
            }
            Specification::Formula(f)
        }
        (None, Some(file)) => {
            let p = base_dir.join(file);
            let text = std::fs::read_to_string(&p).map_err(|e| invalid("/dfa", format!("{}: {e}", p.display())))?;
            let json: DfaJson = serde_json::from_str(&text).map_err(|e| invalid("/dfa", format!("{}: {e}", p.display())))?;
            Specification::NegatedDfa(Dfa::from_json(&json, Some(&props)).map_err(|e| invalid("/dfa", e))?)
        }
    };
    if raw.horizon == 0 {
        return Err(invalid("/horizon", "horizon must be at least 1"));
    }
    if raw.synthesis.max_degree < 2 {
        return Err(invalid("/synthesis/max_degree", "degree must be at least 2"));
    }
    let mc = &raw.monte_carlo;
    if !(mc.confidence > 0.0 && mc.confidence < 1.0) {
        return Err(invalid("/monte_carlo/confidence", "must lie in (0, 1)"));
    }
    if mc.realizations == 0 {
        return Err(invalid("/monte_carlo/realizations", "must be at least 1"));
    }
    if let Some(x) = &mc.initial_state {
        if x.len() != vars.len() {
            return Err(invalid("/monte_carlo/initial_state", format!("expected {} entries", vars.len())));
        }
    }
    for (i, n) in mc.initial_regions.iter().enumerate() {
        if !regions.contains_key(n) {
            return Err(invalid(format!("/monte_carlo/initial_regions/{i}"), format!("unknown region '{n}'")));
        }
    }

    let engine = EngineOptions { synthesis: raw.synthesis.clone(), ..Default::default() };
    let problem = Problem { system, props, labeling, domain, spec, horizon: raw.horizon };
    Ok(LoadedConfig { raw, problem, regions, engine, base_dir: base_dir.to_path_buf() })
}
