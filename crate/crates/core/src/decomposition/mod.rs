//! Accepting runs without consecutive repeats and the reachability tasks
//! they induce.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::Dfa;

pub const DEFAULT_RUN_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("more than {cap} accepting runs; lower the horizon or simplify the automaton")]
    RunCap { cap: usize },
}

/// State sequence `q0 .. qn` with `q0` initial, `qn` accepting and
/// `q_i != q_{i+1}`.
pub type AcceptingRun = Vec<usize>;

/// `(q, q', q'', T)`: starting in the letters of `q -> q'`, reach the
/// letters of `q' -> q''` within `T` steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReachTask {
    pub from: usize,
    pub mid: usize,
    pub to: usize,
    pub horizon: usize,
    pub source_letters: Vec<usize>,
    pub target_letters: Vec<usize>,
}

impl ReachTask {
    pub fn key(&self) -> (usize, usize, usize, usize) {
        (self.from, self.mid, self.to, self.horizon)
    }

    pub fn label(&self, dfa: &Dfa) -> String {
        format!("({},{},{},{})", dfa.states[self.from], dfa.states[self.mid], dfa.states[self.to], self.horizon)
    }
}

/// States with at least one self-loop letter, restricted to states from
/// which acceptance is still possible (a rejecting sink is left out).
pub fn self_loop_states(dfa: &Dfa) -> Vec<usize> {
    let live = dfa.coreachable();
    (0..dfa.num_states())
        .filter(|&q| live[q] && dfa.delta[q].contains(&q))
        .collect()
}

/// All accepting runs with at most `n + 1` states, found by depth-first
/// search over edges `q -> q'` with `q' != q`. States may repeat
/// non-consecutively. A run consisting of an accepting initial state alone
/// is kept only if that state has a self-loop: otherwise it stands for the
/// empty word, which is not a trace.
pub fn accepting_runs(dfa: &Dfa, n: usize, cap: usize) -> Result<Vec<AcceptingRun>, DecompositionError> {
    if n == 0 {
        return Err(DecompositionError::ZeroHorizon);
    }
    let live = dfa.coreachable();
    let succ: Vec<Vec<usize>> = (0..dfa.num_states())
        .map(|q| dfa.out_edges(q).into_keys().filter(|&t| t != q && live[t]).collect())
        .collect();
    let mut runs = Vec::new();
    let mut path = Vec::with_capacity(n + 1);
    for &q0 in &dfa.initial {
        if live[q0] {
            path.push(q0);
            dfs(dfa, &succ, n + 1, &mut path, &mut runs, cap)?;
            path.pop();
        }
    }
    Ok(runs)
}

fn dfs(
    dfa: &Dfa,
    succ: &[Vec<usize>],
    max_len: usize,
    path: &mut Vec<usize>,
    runs: &mut Vec<AcceptingRun>,
    cap: usize,
) -> Result<(), DecompositionError> {
    let q = *path.last().expect("path is non-empty");
    if dfa.accepting[q] && (path.len() > 1 || dfa.delta[q].contains(&q)) {
        if runs.len() >= cap {
            return Err(DecompositionError::RunCap { cap });
        }
        runs.push(path.clone());
    }
    if path.len() == max_len {
        return Ok(());
    }
    for &t in &succ[q] {
        path.push(t);
        dfs(dfa, succ, max_len, path, runs, cap)?;
        path.pop();
    }
    Ok(())
}

/// Consecutive triples of `run` with horizon `N + 2 - |run|` when the
/// middle state has a self-loop and 1 otherwise.
///
/// A two-state run `(q0, q1)` whose initial state loops can leave `q0`
/// at any later step, so it gets the task `(q0, q0, q1, N - 1)`: start in
/// the self-loop letters and reach the letters of `q0 -> q1`. Without a
/// self-loop it is decided by the first letter and has no task.
pub fn reach_tasks(run: &[usize], dfa: &Dfa, n: usize, self_loops: &[usize]) -> Vec<ReachTask> {
    if run.len() == 2 && n >= 2 && self_loops.contains(&run[0]) {
        return vec![ReachTask {
            from: run[0],
            mid: run[0],
            to: run[1],
            horizon: n - 1,
            source_letters: dfa.letters(run[0], run[0]),
            target_letters: dfa.letters(run[0], run[1]),
        }];
    }
    if run.len() < 3 {
        return Vec::new();
    }
    let long = (n + 2).saturating_sub(run.len()).max(1);
    run.windows(3)
        .map(|w| ReachTask {
            from: w[0],
            mid: w[1],
            to: w[2],
            horizon: if self_loops.contains(&w[1]) { long } else { 1 },
            source_letters: dfa.letters(w[0], w[1]),
            target_letters: dfa.letters(w[1], w[2]),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub states: AcceptingRun,
    /// Indices into [`Decomposition::tasks`].
    pub tasks: Vec<usize>,
    /// Letters of the first edge (the initial letters this run covers).
    pub first_letters: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub horizon: usize,
    pub self_loops: Vec<usize>,
    pub runs: Vec<RunEntry>,
    /// Distinct tasks in order of first appearance.
    pub tasks: Vec<ReachTask>,
}

pub fn decompose(dfa: &Dfa, n: usize, cap: usize) -> Result<Decomposition, DecompositionError> {
    let self_loops = self_loop_states(dfa);
    let runs = accepting_runs(dfa, n, cap)?;
    let mut tasks: Vec<ReachTask> = Vec::new();
    let mut entries = Vec::with_capacity(runs.len());
    for run in runs {
        let mut ids = Vec::new();
        for t in reach_tasks(&run, dfa, n, &self_loops) {
            let id = match tasks.iter().position(|x| x.key() == t.key()) {
                Some(i) => i,
                None => {
                    tasks.push(t);
                    tasks.len() - 1
                }
            };
            ids.push(id);
        }
        let first_letters = if run.len() >= 2 { dfa.letters(run[0], run[1]) } else { Vec::new() };
        entries.push(RunEntry { states: run, tasks: ids, first_letters });
    }
    Ok(Decomposition { horizon: n, self_loops, runs: entries, tasks })
}

/// Name-based view for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub horizon: usize,
    pub self_loop_states: Vec<String>,
    pub runs: Vec<RunJson>,
    pub tasks: Vec<TaskJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunJson {
    pub states: Vec<String>,
    pub tasks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskJson {
    pub from: String,
    pub mid: String,
    pub to: String,
    pub horizon: usize,
    pub source_letters: Vec<String>,
    pub target_letters: Vec<String>,
}

impl Decomposition {
    pub fn to_json(&self, dfa: &Dfa) -> DecompositionJson {
        let name = |q: usize| dfa.states[q].clone();
        let letters = |ls: &[usize]| ls.iter().map(|&p| dfa.props.name(p).to_string()).collect();
        DecompositionJson {
            horizon: self.horizon,
            self_loop_states: self.self_loops.iter().map(|&q| name(q)).collect(),
            runs: self
                .runs
                .iter()
                .map(|r| RunJson { states: r.states.iter().map(|&q| name(q)).collect(), tasks: r.tasks.clone() })
                .collect(),
            tasks: self
                .tasks
                .iter()
                .map(|t| TaskJson {
                    from: name(t.from),
                    mid: name(t.mid),
                    to: name(t.to),
                    horizon: t.horizon,
                    source_letters: letters(&t.source_letters),
                    target_letters: letters(&t.target_letters),
                })
                .collect(),
        }
    }
}
