//! End-to-end verification: automaton, decomposition into reachability
//! tasks, certificate synthesis per task, and the combined bound.

mod cache;
mod report;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{BasicSet, Labeling, StochasticSystem};
use crate::automaton::{translate, AutomatonError, Dfa, DEFAULT_STATE_CAP};
use crate::certificate::{synthesize, CertStatus, Certificate, CertificateError, SynthesisOptions, TaskRegions};
use crate::decomposition::{decompose, DecompositionError, DEFAULT_RUN_CAP};
use crate::formula::{Formula, Props};

pub use cache::{task_fingerprint, CertificateCache};
pub use report::{RunReport, TaskReport, VerificationReport};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
    #[error("cache: {0}")]
    Cache(String),
    #[error("invalid problem: {0}")]
    Invalid(String),
}

/// Property to check: either a formula `phi`, or a DFA accepting the
/// traces that violate it.
#[derive(Debug, Clone)]
pub enum Specification {
    Formula(Formula),
    NegatedDfa(Dfa),
}

impl Specification {
    pub fn satisfied_by(&self, trace: &[usize]) -> bool {
        match self {
            Specification::Formula(f) => f.evaluate(trace),
            Specification::NegatedDfa(d) => !d.accepts(trace),
        }
    }

    /// Minimal DFA for `!phi`. Translated automata get states `q0, q1, ..`
    /// in breadth-first order; supplied automata keep their names.
    pub fn negated_dfa(&self, props: &Props, cap: usize) -> Result<Dfa, AutomatonError> {
        match self {
            Specification::Formula(f) => Ok(translate(&Formula::not(f.clone()), props, cap)?.minimize().renamed()),
            Specification::NegatedDfa(d) => Ok(d.minimize()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub system: StochasticSystem,
    pub props: Props,
    pub labeling: Labeling,
    /// State space `X`; empty means all of `R^n`.
    pub domain: BasicSet,
    pub spec: Specification,
    pub horizon: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineOptions {
    pub synthesis: SynthesisOptions,
    /// Worker threads for task synthesis; 0 uses rayon's default.
    pub jobs: usize,
    pub state_cap: usize,
    pub run_cap: usize,
    /// Task labels such as `(q0,q4,q3,4)` whose synthesis is treated as failed.
    pub force_fail: Vec<String>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            synthesis: SynthesisOptions::default(),
            jobs: 0,
            state_cap: DEFAULT_STATE_CAP,
            run_cap: DEFAULT_RUN_CAP,
            force_fail: Vec::new(),
        }
    }
}

/// `min(1, sum over runs of the product of its task bounds)`. Runs with no
/// tasks are excluded from the sum.
pub fn combine(run_bounds: &[Vec<f64>]) -> f64 {
    run_bounds
        .iter()
        .filter(|r| !r.is_empty())
        .map(|r| r.iter().product::<f64>())
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

pub fn verify(problem: &Problem, opts: &EngineOptions, cache: &CertificateCache) -> Result<VerificationReport, EngineError> {
    let start = Instant::now();
    if problem.horizon == 0 {
        return Err(EngineError::Invalid("horizon must be at least 1".into()));
    }
    let dfa = problem.spec.negated_dfa(&problem.props, opts.state_cap)?;
    let dec = decompose(&dfa, problem.horizon, opts.run_cap)?;
    let n = problem.system.state_dim();

    let work = |i: usize| -> Result<(Certificate, bool, bool), EngineError> {
        let task = &dec.tasks[i];
        let label = task.label(&dfa);
        if opts.force_fail.contains(&label) {
            return Ok((Certificate::trivial(&label, task.horizon, n, "synthesis disabled for this task"), false, false));
        }
        let x0 = problem.labeling.preimage(&task.source_letters);
        let x1 = problem.labeling.preimage(&task.target_letters);
        let (x0, x1) = match (x0, x1) {
            (Some(a), Some(b)) if a.bounded && b.bounded => (a, b),
            _ => {
                let note = "source or target region is unbounded; pessimistic bound 1";
                return Ok((Certificate::trivial(&label, task.horizon, n, note), false, false));
            }
        };
        let regions = TaskRegions { x0, x1, domain: problem.domain.clone() };
        let key = task_fingerprint(&problem.system, &regions, task.horizon, &opts.synthesis);
        if let Some(mut c) = cache.get(&key) {
            c.task = label;
            return Ok((c, true, true));
        }
        let cert = synthesize(&problem.system, &regions, task.horizon, &label, &opts.synthesis)?;
        cache.insert(&key, &cert).map_err(EngineError::Cache)?;
        Ok((cert, true, false))
    };

    let results: Result<Vec<_>, EngineError> = if opts.jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| EngineError::Invalid(e.to_string()))?;
        pool.install(|| (0..dec.tasks.len()).into_par_iter().map(work).collect())
    } else {
        (0..dec.tasks.len()).into_par_iter().map(work).collect()
    };
    let results = results?;

    let tasks: Vec<TaskReport> = dec
        .tasks
        .iter()
        .zip(results)
        .map(|(t, (cert, synthesized, cached))| TaskReport {
            label: t.label(&dfa),
            from: dfa.states[t.from].clone(),
            mid: dfa.states[t.mid].clone(),
            to: dfa.states[t.to].clone(),
            horizon: t.horizon,
            source_letters: t.source_letters.iter().map(|&p| problem.props.name(p).to_string()).collect(),
            target_letters: t.target_letters.iter().map(|&p| problem.props.name(p).to_string()).collect(),
            bound: cert.effective_bound(),
            status: cert.status,
            synthesized,
            cached,
            certificate: cert,
        })
        .collect();

    let mut runs = Vec::new();
    let mut run_bounds = Vec::new();
    let mut excluded: Vec<usize> = Vec::new();
    let mut trivially_violated = false;
    for r in &dec.runs {
        let states = r.states.iter().map(|&q| dfa.states[q].clone()).collect();
        let (product, note) = match r.states.len() {
            1 => {
                trivially_violated = true;
                (None, Some("initial state accepts: every trace violates the property".to_string()))
            }
            2 => {
                excluded.extend(&r.first_letters);
                let note = "one-step run: its initial letters are excluded from the claim".to_string();
                if r.tasks.is_empty() {
                    (None, Some(note))
                } else {
                    let p = r.tasks.iter().map(|&i| tasks[i].bound).product::<f64>();
                    (Some(p), Some(format!("{note}; later exits from the initial state are bounded by its task")))
                }
            }
            _ => (Some(r.tasks.iter().map(|&i| tasks[i].bound).product::<f64>()), None),
        };
        run_bounds.push(r.tasks.iter().map(|&i| tasks[i].bound).collect::<Vec<_>>());
        runs.push(RunReport { states, tasks: r.tasks.clone(), product, note });
    }
    excluded.sort_unstable();
    excluded.dedup();

    let mut upper = combine(&run_bounds);
    let mut caveats = vec![
        "labeled regions are assumed pairwise disjoint".to_string(),
        "task events are combined as a sum over runs of products over tasks".to_string(),
    ];
    if trivially_violated {
        upper = 1.0;
        caveats.push("the initial automaton state is accepting, so the lower bound is 0".to_string());
    }
    if tasks.iter().any(|t| t.status == CertStatus::Failed) {
        caveats.push("some tasks use the pessimistic bound 1".to_string());
    }
    let lower = (1.0 - upper).max(0.0);
    let claimed = (0..problem.props.len())
        .filter(|p| !excluded.contains(p))
        .map(|p| problem.props.name(p).to_string())
        .collect();
    Ok(VerificationReport {
        horizon: problem.horizon,
        dfa_states: dfa.states.clone(),
        self_loop_states: dec.self_loops.iter().map(|&q| dfa.states[q].clone()).collect(),
        runs,
        num_synthesized: tasks.iter().filter(|t| t.synthesized).count(),
        tasks,
        upper_bound: upper,
        lower_bound: lower,
        claimed_initial_letters: claimed,
        excluded_initial_letters: excluded.iter().map(|&p| problem.props.name(p).to_string()).collect(),
        caveats,
        reference_lower_bound: None,
        monte_carlo: None,
        seconds: start.elapsed().as_secs_f64(),
    })
}
