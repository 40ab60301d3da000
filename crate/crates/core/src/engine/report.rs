use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::certificate::{CertStatus, Certificate};
use crate::montecarlo::Estimate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub label: String,
    pub from: String,
    pub mid: String,
    pub to: String,
    pub horizon: usize,
    pub source_letters: Vec<String>,
    pub target_letters: Vec<String>,
    /// Bound used in the combination (1 for failed tasks).
    pub bound: f64,
    pub status: CertStatus,
    /// False when the task was skipped (unbounded region or forced failure).
    pub synthesized: bool,
    pub cached: bool,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub states: Vec<String>,
    pub tasks: Vec<usize>,
    /// Product of task bounds; absent for runs without tasks.
    pub product: Option<f64>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub horizon: usize,
    pub dfa_states: Vec<String>,
    pub self_loop_states: Vec<String>,
    pub runs: Vec<RunReport>,
    pub tasks: Vec<TaskReport>,
    pub num_synthesized: usize,
    /// Upper bound on the probability that a trace violates the property.
    pub upper_bound: f64,
    /// `max(0, 1 - upper_bound)`.
    pub lower_bound: f64,
    pub claimed_initial_letters: Vec<String>,
    pub excluded_initial_letters: Vec<String>,
    pub caveats: Vec<String>,
    pub reference_lower_bound: Option<f64>,
    pub monte_carlo: Option<Estimate>,
    pub seconds: f64,
}

impl VerificationReport {
    pub fn is_vacuous(&self) -> bool {
        self.lower_bound <= 0.0
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "horizon N = {}", self.horizon);
        let _ = writeln!(s, "automaton states: {}", self.dfa_states.join(", "));
        let _ = writeln!(s, "states with self-loops: {}", self.self_loop_states.join(", "));
        let _ = writeln!(s, "\ntasks:");
        for (i, t) in self.tasks.iter().enumerate() {
            let _ = writeln!(
                s,
                "  [{i}] {}  {} -> {}  bound {:.6}  {:?}{}",
                t.label,
                t.source_letters.join("|"),
                t.target_letters.join("|"),
                t.bound,
                t.status,
                if t.cached { " (cached)" } else { "" }
            );
        }
        let _ = writeln!(s, "\nruns:");
        for r in &self.runs {
            let _ = write!(s, "  ({})", r.states.join(","));
            match (r.product, &r.note) {
                (Some(p), _) => {
                    let _ = writeln!(s, "  product {p:.6}");
                }
                (None, Some(n)) => {
                    let _ = writeln!(s, "  {n}");
                }
                (None, None) => {
                    let _ = writeln!(s);
                }
            }
        }
        let _ = writeln!(s, "\nP(violation) <= {:.6}", self.upper_bound);
        let _ = writeln!(s, "P(satisfaction) >= {:.6}", self.lower_bound);
        let _ = writeln!(s, "claimed for initial labels: {}", self.claimed_initial_letters.join(", "));
        if !self.excluded_initial_letters.is_empty() {
            let _ = writeln!(s, "excluded initial labels: {}", self.excluded_initial_letters.join(", "));
        }
        if let Some(r) = self.reference_lower_bound {
            let _ = writeln!(s, "reference lower bound: {r}");
        }
        if let Some(mc) = &self.monte_carlo {
            let _ = writeln!(
                s,
                "Monte Carlo: {}/{} satisfied, {:.4}% interval [{:.5}, {:.5}]",
                mc.successes,
                mc.trials,
                100.0 * mc.confidence,
                mc.lower,
                mc.upper
            );
        }
        for c in &self.caveats {
            let _ = writeln!(s, "note: {c}");
        }
        let _ = writeln!(s, "time: {:.2} s", self.seconds);
        s
    }
}
