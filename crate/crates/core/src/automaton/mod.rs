//! Deterministic finite automata over the proposition alphabet.

mod progress;

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, Props};

pub use progress::{empty_accepts, end_of_word, progress, simplify, translate};

pub const DEFAULT_STATE_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("automaton exceeds the state cap of {cap}")]
    StateCap { cap: usize },
    #[error("invalid automaton: {0}")]
    Invalid(String),
}

/// Complete DFA with a set of initial states. `delta[q][p]` is the
/// successor of state `q` on letter `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dfa {
    pub states: Vec<String>,
    pub initial: Vec<usize>,
    pub accepting: Vec<bool>,
    pub delta: Vec<Vec<usize>>,
    pub props: Props,
    /// Residual formula per state, when built by translation.
    pub annotations: Option<Vec<Formula>>,
}

/// Serialized form: `{states, initial, accepting, edges, alphabet?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfaJson {
    pub states: Vec<String>,
    pub initial: Vec<String>,
    pub accepting: Vec<String>,
    pub edges: Vec<EdgeJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub from: String,
    pub to: String,
    pub letters: Vec<String>,
}

impl Dfa {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    /// Whether some initial state reaches an accepting state on `word`.
    pub fn accepts(&self, word: &[usize]) -> bool {
        self.initial.iter().any(|&q0| {
            let q = word.iter().fold(q0, |q, &p| self.delta[q][p]);
            self.accepting[q]
        })
    }

    /// Letters `p` with `q -p-> target`.
    pub fn letters(&self, q: usize, target: usize) -> Vec<usize> {
        (0..self.props.len()).filter(|&p| self.delta[q][p] == target).collect()
    }

    /// Grouped outgoing edges `target -> letters` of `q`, ordered by target.
    pub fn out_edges(&self, q: usize) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (p, &t) in self.delta[q].iter().enumerate() {
            out.entry(t).or_default().push(p);
        }
        out
    }

    /// States from which some accepting state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for q in 0..n {
            for &t in &self.delta[q] {
                preds[t].push(q);
            }
        }
        let mut seen = self.accepting.clone();
        let mut queue: VecDeque<usize> = (0..n).filter(|&q| seen[q]).collect();
        while let Some(q) = queue.pop_front() {
            for &s in &preds[q] {
                if !seen[s] {
                    seen[s] = true;
                    queue.push_back(s);
                }
            }
        }
        seen
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &q in &self.initial {
            if !seen[q] {
                seen[q] = true;
                queue.push_back(q);
            }
        }
        while let Some(q) = queue.pop_front() {
            for &t in &self.delta[q] {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Restricts the automaton to states reachable from the initial set.
    pub fn prune_unreachable(&self) -> Dfa {
        let keep = self.reachable();
        let map: Vec<Option<usize>> = keep
            .iter()
            .scan(0usize, |next, &k| {
                Some(if k {
                    *next += 1;
                    Some(*next - 1)
                } else {
                    None
                })
            })
            .collect();
        let idx = |q: usize| map[q].expect("successor of a reachable state is reachable");
        let kept: Vec<usize> = (0..self.num_states()).filter(|&q| keep[q]).collect();
        Dfa {
            states: kept.iter().map(|&q| self.states[q].clone()).collect(),
            initial: self.initial.iter().map(|&q| idx(q)).collect(),
            accepting: kept.iter().map(|&q| self.accepting[q]).collect(),
            delta: kept.iter().map(|&q| self.delta[q].iter().map(|&t| idx(t)).collect()).collect(),
            props: self.props.clone(),
            annotations: self.annotations.as_ref().map(|a| kept.iter().map(|&q| a[q].clone()).collect()),
        }
    }

    /// Moore partition refinement on the reachable part. Each class keeps
    /// the name of its first member; annotations are dropped.
    pub fn minimize(&self) -> Dfa {
        let d = self.prune_unreachable();
        let n = d.num_states();
        let mut class: Vec<usize> = d.accepting.iter().map(|&a| usize::from(a)).collect();
        let mut count = renumber(&mut class);
        loop {
            let mut sigs: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let mut next = vec![0; n];
            for q in 0..n {
                let sig = (class[q], d.delta[q].iter().map(|&t| class[t]).collect::<Vec<_>>());
                let fresh = sigs.len();
                next[q] = *sigs.entry(sig).or_insert(fresh);
            }
            let new_count = renumber(&mut next);
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        let mut rep = vec![usize::MAX; count];
        for q in 0..n {
            if rep[class[q]] == usize::MAX {
                rep[class[q]] = q;
            }
        }
        let mut initial: Vec<usize> = d.initial.iter().map(|&q| class[q]).collect();
        initial.sort_unstable();
        initial.dedup();
        Dfa {
            states: rep.iter().map(|&q| d.states[q].clone()).collect(),
            initial,
            accepting: rep.iter().map(|&q| d.accepting[q]).collect(),
            delta: rep.iter().map(|&q| d.delta[q].iter().map(|&t| class[t]).collect()).collect(),
            props: d.props.clone(),
            annotations: None,
        }
    }

    /// Reorders states breadth-first from the initial states (letters in
    /// alphabet order) and renames them `q0, q1, ...`.
    pub fn renamed(&self) -> Dfa {
        let n = self.num_states();
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut pos = vec![usize::MAX; n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &q in &self.initial {
            if pos[q] == usize::MAX {
                pos[q] = order.len();
                order.push(q);
                queue.push_back(q);
            }
        }
        while let Some(q) = queue.pop_front() {
            for &t in &self.delta[q] {
                if pos[t] == usize::MAX {
                    pos[t] = order.len();
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        for q in 0..n {
            if pos[q] == usize::MAX {
                pos[q] = order.len();
                order.push(q);
            }
        }
        Dfa {
            states: (0..n).map(|i| format!("q{i}")).collect(),
            initial: self.initial.iter().map(|&q| pos[q]).collect(),
            accepting: order.iter().map(|&q| self.accepting[q]).collect(),
            delta: order.iter().map(|&q| self.delta[q].iter().map(|&t| pos[t]).collect()).collect(),
            props: self.props.clone(),
            annotations: self.annotations.as_ref().map(|a| order.iter().map(|&q| a[q].clone()).collect()),
        }
    }

    pub fn to_json(&self) -> DfaJson {
        let mut edges = Vec::new();
        for q in 0..self.num_states() {
            for (t, ls) in self.out_edges(q) {
                edges.push(EdgeJson {
                    from: self.states[q].clone(),
                    to: self.states[t].clone(),
                    letters: ls.iter().map(|&p| self.props.name(p).to_string()).collect(),
                });
            }
        }
        DfaJson {
            states: self.states.clone(),
            initial: self.initial.iter().map(|&q| self.states[q].clone()).collect(),
            accepting: (0..self.num_states())
                .filter(|&q| self.accepting[q])
                .map(|q| self.states[q].clone())
                .collect(),
            edges,
            alphabet: Some(self.props.names().to_vec()),
        }
    }

    /// Builds a DFA from its serialized form. The alphabet is taken from
    /// the file if present, else from `props`. Missing transitions go to a
    /// fresh rejecting sink.
    pub fn from_json(json: &DfaJson, props: Option<&Props>) -> Result<Dfa, AutomatonError> {
        let props = match (&json.alphabet, props) {
            (Some(a), Some(p)) if a.as_slice() != p.names() => {
                return Err(AutomatonError::Invalid(format!(
                    "alphabet {a:?} differs from declared propositions {:?}",
                    p.names()
                )))
            }
            (Some(a), _) => Props::new(a.clone()),
            (None, Some(p)) => p.clone(),
            (None, None) => return Err(AutomatonError::Invalid("no alphabet given".into())),
        };
        if props.is_empty() {
            return Err(AutomatonError::Invalid("empty alphabet".into()));
        }
        if json.states.is_empty() {
            return Err(AutomatonError::Invalid("no states".into()));
        }
        let mut states = json.states.clone();
        let mut sorted = states.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(AutomatonError::Invalid("duplicate state names".into()));
        }
        let lookup = |name: &str, what: &str| {
            json.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| AutomatonError::Invalid(format!("unknown {what} state '{name}'")))
        };
        let initial = json
            .initial
            .iter()
            .map(|s| lookup(s, "initial"))
            .collect::<Result<Vec<_>, _>>()?;
        if initial.is_empty() {
            return Err(AutomatonError::Invalid("no initial state".into()));
        }
        let mut accepting = vec![false; states.len()];
        for s in &json.accepting {
            accepting[lookup(s, "accepting")?] = true;
        }
        let k = props.len();
        let mut delta: Vec<Vec<Option<usize>>> = vec![vec![None; k]; states.len()];
        for e in &json.edges {
            let from = lookup(&e.from, "edge source")?;
            let to = lookup(&e.to, "edge target")?;
            for l in &e.letters {
                let p = props
                    .index(l)
                    .ok_or_else(|| AutomatonError::Invalid(format!("unknown letter '{l}'")))?;
                match delta[from][p] {
                    Some(t) if t != to => {
                        return Err(AutomatonError::Invalid(format!(
                            "non-deterministic transition from '{}' on '{l}'",
                            e.from
                        )))
                    }
                    _ => delta[from][p] = Some(to),
                }
            }
        }
        let needs_sink = delta.iter().flatten().any(Option::is_none);
        let sink = states.len();
        if needs_sink {
            let mut name = "sink".to_string();
            while states.contains(&name) {
                name.push('_');
            }
            states.push(name);
            accepting.push(false);
            delta.push(vec![Some(sink); k]);
        }
        let delta = delta
            .into_iter()
            .map(|row| row.into_iter().map(|t| t.unwrap_or(sink)).collect())
            .collect();
        Ok(Dfa { states, initial, accepting, delta, props, annotations: None })
    }

    /// Graphviz rendering; accepting states are double circles and initial
    /// states are drawn bold.
    pub fn export_dot(&self) -> String {
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n");
        for q in 0..self.num_states() {
            let shape = if self.accepting[q] { "doublecircle" } else { "circle" };
            let style = if self.initial.contains(&q) { ", style=bold" } else { "" };
            let _ = writeln!(out, "  {} [shape={shape}{style}];", quote(&self.states[q]));
        }
        for q in 0..self.num_states() {
            for (t, ls) in self.out_edges(q) {
                let label: Vec<&str> = ls.iter().map(|&p| self.props.name(p)).collect();
                let _ = writeln!(
                    out,
                    "  {} -> {} [label={}];",
                    quote(&self.states[q]),
                    quote(&self.states[t]),
                    quote(&label.join(","))
                );
            }
        }
        out.push_str("}\n");
        out
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Relabels classes as 0.. in order of first occurrence; returns the count.
fn renumber(class: &mut [usize]) -> usize {
    let mut map: HashMap<usize, usize> = HashMap::new();
    for c in class.iter_mut() {
        let fresh = map.len();
        *c = *map.entry(*c).or_insert(fresh);
    }
    map.len()
}
