//! Barrier certificates for single reachability tasks: SOS synthesis through
//! the embedded SDP solver, followed by sampled post-verification.

pub mod sos;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    box_is_finite, intersect_boxes, rejection_sample, AlgebraError, BasicSet, Interval, Polynomial, Region,
    StochasticSystem,
};
use crate::sdp::{solve_sdp, SdpSolution, SolveStatus, SolverOptions};

pub use sos::{
    assemble_sos, compile_sdp, gram_polynomial, sos_feasibility, AffineMap, CompiledSdp, LinPoly, SosExpr, SosProgram,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertificateError {
    #[error("invalid degree: {0}")]
    Degree(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertStatus {
    Verified,
    Numerical,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// One SDP minimizing `gamma + c T`.
    #[default]
    Direct,
    /// Feasibility SDPs with `gamma + c T <= beta`, bisecting on `beta`.
    Bisection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisOptions {
    /// Largest barrier degree tried; the schedule is 2, 4, then this.
    pub max_degree: u32,
    pub strategy: Strategy,
    pub bisection_steps: usize,
    pub solver: SolverOptions,
    pub verify_samples: usize,
    pub verify_tol: f64,
    pub seed: u64,
    /// Centre and scale state coordinates on the task regions before solving.
    pub auto_scale: bool,
    /// Include pairwise products of region inequalities as multiplier generators.
    pub products: bool,
    /// Stop escalating once a verified bound is at most this.
    pub good_enough: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            max_degree: 4,
            strategy: Strategy::Direct,
            bisection_steps: 14,
            solver: SolverOptions::default(),
            verify_samples: 10_000,
            verify_tol: 1e-6,
            seed: 0,
            auto_scale: true,
            products: true,
            good_enough: 1e-6,
        }
    }
}

impl SynthesisOptions {
    pub fn schedule(&self) -> Vec<(u32, u32)> {
        let top = self.max_degree.max(2).div_ceil(2) * 2;
        let mut out = vec![(2, 2)];
        if top >= 4 {
            out.push((4, 4));
        }
        if top > 4 {
            out.push((top, top));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub degrees: (u32, u32),
    pub solver_status: Option<SolveStatus>,
    pub status: CertStatus,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub solver_status: Option<SolveStatus>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub relative_gap: f64,
    pub min_gram_eigenvalue: f64,
    /// Worst relative violation of each condition found by post-verification.
    #[serde(with = "extended_floats")]
    pub violations: [f64; 4],
    pub num_coefficients: usize,
    pub expression_degrees: Vec<u32>,
    pub multiplier_degrees: Vec<u32>,
    pub attempts: Vec<Attempt>,
    pub hint: Option<String>,
    pub note: Option<String>,
}

/// JSON has no infinities; they are written as the strings "inf", "-inf"
/// and "nan".
mod extended_floats {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum F {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64; 4], s: S) -> Result<S::Ok, S::Error> {
        let out: Vec<F> = v
            .iter()
            .map(|&x| match x {
                x if x.is_finite() => F::Num(x),
                x if x.is_nan() => F::Text("nan".into()),
                x if x > 0.0 => F::Text("inf".into()),
                _ => F::Text("-inf".into()),
            })
            .collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 4], D::Error> {
        let raw: Vec<F> = Vec::deserialize(d)?;
        let vals: Result<Vec<f64>, D::Error> = raw
            .into_iter()
            .map(|f| match f {
                F::Num(x) => Ok(x),
                F::Text(t) => match t.as_str() {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    "nan" => Ok(f64::NAN),
                    other => Err(serde::de::Error::custom(format!("bad number '{other}'"))),
                },
            })
            .collect();
        vals?.try_into().map_err(|_| serde::de::Error::custom("expected four values"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub task: String,
    pub horizon: usize,
    pub degrees: (u32, u32),
    pub barrier: Polynomial,
    pub gamma: f64,
    pub c: f64,
    pub bound: f64,
    pub status: CertStatus,
    pub diagnostics: Diagnostics,
}

impl Certificate {
    /// Certificate carrying the pessimistic bound 1.
    pub fn trivial(task: &str, horizon: usize, nvars: usize, note: impl Into<String>) -> Self {
        Certificate {
            task: task.to_string(),
            horizon,
            degrees: (0, 0),
            barrier: Polynomial::constant(nvars, 1.0),
            gamma: 1.0,
            c: 0.0,
            bound: 1.0,
            status: CertStatus::Failed,
            diagnostics: Diagnostics { note: Some(note.into()), ..Default::default() },
        }
    }

    /// Bound usable by the engine: the certified value when the certificate
    /// passed post-verification (possibly within the numerical band), else 1.
    pub fn effective_bound(&self) -> f64 {
        match self.status {
            CertStatus::Verified | CertStatus::Numerical => self.bound,
            CertStatus::Failed => 1.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Reachability task in state space: start in `x0`, reach `x1` while in `domain`.
#[derive(Debug, Clone)]
pub struct TaskRegions {
    pub x0: Region,
    pub x1: Region,
    pub domain: BasicSet,
}

/// Tries the degree schedule and returns the best verified certificate, or
/// the last attempt when none verifies.
pub fn synthesize(
    sys: &StochasticSystem,
    regions: &TaskRegions,
    horizon: usize,
    task: &str,
    opts: &SynthesisOptions,
) -> Result<Certificate, CertificateError> {
    let mut best: Option<Certificate> = None;
    let mut attempts = Vec::new();
    for degrees in opts.schedule() {
        let cert = synthesize_at(sys, regions, horizon, task, degrees, opts)?;
        attempts.push(Attempt {
            degrees,
            solver_status: cert.diagnostics.solver_status,
            status: cert.status,
            bound: cert.bound,
        });
        let better = match &best {
            None => true,
            Some(b) => rank(&cert) < rank(b),
        };
        if better {
            best = Some(cert);
        }
        let b = best.as_ref().expect("set above");
        if b.status != CertStatus::Failed && b.bound <= opts.good_enough {
            break;
        }
    }
    let mut cert = best.expect("schedule is non-empty");
    if cert.status == CertStatus::Failed {
        let top = attempts.last().map(|a| a.degrees.0).unwrap_or(2);
        cert.diagnostics.hint = Some(format!(
            "no certificate passed at degrees up to {top}; try a larger --max-degree (next even degree {})",
            top + 2
        ));
    }
    cert.diagnostics.attempts = attempts;
    Ok(cert)
}

fn rank(c: &Certificate) -> (u8, f64) {
    let s = match c.status {
        CertStatus::Verified => 0,
        CertStatus::Numerical => 1,
        CertStatus::Failed => 2,
    };
    (s, c.bound)
}

/// One synthesis at fixed `(d_B, d_lambda)`.
pub fn synthesize_at(
    sys: &StochasticSystem,
    regions: &TaskRegions,
    horizon: usize,
    task: &str,
    degrees: (u32, u32),
    opts: &SynthesisOptions,
) -> Result<Certificate, CertificateError> {
    let n = sys.state_dim();
    let transform = if opts.auto_scale {
        AffineMap::fit(&regions.x0, &regions.x1, n)
    } else {
        AffineMap::identity(n)
    };
    let prog = assemble_sos(
        sys,
        &regions.x0,
        &regions.x1,
        &regions.domain,
        horizon,
        degrees.0,
        degrees.1,
        &transform,
        opts.products,
    )?;
    let (compiled, sol) = match opts.strategy {
        Strategy::Direct => {
            let compiled = compile_sdp(&prog, None);
            let sol = solve_sdp(&compiled.instance, &opts.solver);
            (compiled, sol)
        }
        Strategy::Bisection => bisect(&prog, opts),
    };
    let mut diag = Diagnostics {
        solver_status: Some(sol.status),
        iterations: sol.iterations,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        relative_gap: sol.relative_gap(),
        num_coefficients: prog.num_coefficients(),
        expression_degrees: compiled.expression_degrees.clone(),
        multiplier_degrees: prog.expressions.iter().map(|e| e.multiplier_degree).collect(),
        ..Default::default()
    };
    let usable = matches!(sol.status, SolveStatus::Optimal | SolveStatus::MaxIterations | SolveStatus::NumericalFailure)
        && !sol.x.is_empty();
    if !usable {
        let mut cert = Certificate::trivial(task, horizon, n, format!("SDP reported {:?}", sol.status));
        cert.degrees = degrees;
        diag.note = cert.diagnostics.note.take();
        cert.diagnostics = diag;
        return Ok(cert);
    }

    let (barrier, gamma, c) = extract(&prog, &sol);
    diag.min_gram_eigenvalue = min_gram_eigenvalue(&sol);
    let mut cert = Certificate {
        task: task.to_string(),
        horizon,
        degrees,
        barrier,
        gamma,
        c,
        bound: (gamma + c * horizon as f64).clamp(0.0, 1.0),
        status: CertStatus::Failed,
        diagnostics: diag,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (status, violations) = post_verify(&cert, sys, regions, opts.verify_samples, opts.verify_tol, &mut rng);
    cert.status = status;
    cert.diagnostics.violations = violations;
    if sol.status != SolveStatus::Optimal && status == CertStatus::Verified {
        cert.status = CertStatus::Numerical;
    }
    if !cert.bound.is_finite() {
        cert.bound = 1.0;
        cert.status = CertStatus::Failed;
    }
    Ok(cert)
}

fn bisect(prog: &SosProgram, opts: &SynthesisOptions) -> (CompiledSdp, SdpSolution) {
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut best: Option<(CompiledSdp, SdpSolution)> = None;
    for _ in 0..opts.bisection_steps.max(1) {
        let beta = if best.is_none() { hi } else { 0.5 * (lo + hi) };
        let compiled = compile_sdp(prog, Some(beta));
        let sol = solve_sdp(&compiled.instance, &opts.solver);
        if sol.status == SolveStatus::Optimal {
            hi = beta;
            best = Some((compiled, sol));
        } else if best.is_none() {
            // not even beta = 1 is feasible
            return (compiled, sol);
        } else {
            lo = beta;
        }
    }
    best.expect("at least one feasible solve")
}

fn extract(prog: &SosProgram, sol: &SdpSolution) -> (Polynomial, f64, f64) {
    let g = &sol.x[prog.barrier_block];
    let b_scaled = gram_polynomial(&prog.barrier_basis, g, prog.nvars);
    let barrier = prog.transform.to_original(&b_scaled).prune(1e-14);
    let lp = &sol.x[prog.lp_block];
    let gamma = lp[(sos::GAMMA, sos::GAMMA)].max(0.0);
    let c = lp[(sos::RATE, sos::RATE)].max(0.0);
    (barrier, gamma, c)
}

fn min_gram_eigenvalue(sol: &SdpSolution) -> f64 {
    sol.x
        .iter()
        .filter(|m| m.nrows() > 0)
        .map(|m| {
            if m.nrows() == 1 {
                m[(0, 0)]
            } else {
                m.clone().symmetric_eigenvalues().min()
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Box used to sample the domain: its own bounding box if finite, else the
/// hull of the task regions widened threefold.
pub fn domain_sample_box(regions: &TaskRegions, n: usize) -> Vec<Interval> {
    if let Some(bx) = regions.domain.bounding_box(n) {
        if box_is_finite(&bx) {
            return bx;
        }
    }
    let hull = Region::union([regions.x0.clone(), regions.x1.clone()]).bounding_box(n);
    let dom = regions.domain.bounding_box(n).unwrap_or_else(|| vec![(f64::NEG_INFINITY, f64::INFINITY); n]);
    (0..n)
        .map(|i| {
            let (lo, hi) = hull.as_ref().map(|h| h[i]).unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
            let (lo, hi) = if lo.is_finite() && hi.is_finite() {
                let mid = 0.5 * (lo + hi);
                let half = (1.5 * (hi - lo)).max(1.0);
                (mid - half, mid + half)
            } else {
                (-10.0, 10.0)
            };
            (lo.max(dom[i].0), hi.min(dom[i].1))
        })
        .collect()
}

fn region_samples<R: rand::Rng>(
    region: &Region,
    domain: &BasicSet,
    fallback: &[Interval],
    n: usize,
    count: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let k = region.disjuncts.len().max(1);
    let mut out = Vec::new();
    for d in &region.disjuncts {
        let Some(bx) = d.bounding_box(n) else { continue };
        let bx = if box_is_finite(&bx) { bx } else { intersect_boxes(&bx, fallback) };
        if bx.iter().any(|(lo, hi)| lo > hi) {
            continue;
        }
        out.extend(rejection_sample(d, Some(domain), &bx, count.div_ceil(k), rng));
    }
    out
}

/// Checks the barrier conditions on uniform samples. Violations are
/// measured relative to `1 + |B|` (and `1 + |E[B]| + |B|` for the drift),
/// and the worst one per condition is returned alongside the status.
pub fn post_verify<R: rand::Rng>(
    cert: &Certificate,
    sys: &StochasticSystem,
    regions: &TaskRegions,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> (CertStatus, [f64; 4]) {
    let n = sys.state_dim();
    let b = &cert.barrier;
    let Ok(eb) = sys.expected_next(b) else {
        return (CertStatus::Failed, [f64::INFINITY; 4]);
    };
    let bx = domain_sample_box(regions, n);
    let mut worst = [f64::NEG_INFINITY; 4];
    let dom_pts = rejection_sample(&regions.domain, None, &bx, samples, rng);
    for x in &dom_pts {
        let bv = b.eval_unchecked(x);
        let ev = eb.eval_unchecked(x);
        worst[0] = worst[0].max(-bv / (1.0 + bv.abs()));
        worst[3] = worst[3].max((ev - bv - cert.c) / (1.0 + ev.abs() + bv.abs()));
    }
    for x in region_samples(&regions.x0, &regions.domain, &bx, n, samples, rng) {
        let bv = b.eval_unchecked(&x);
        worst[0] = worst[0].max(-bv / (1.0 + bv.abs()));
        worst[1] = worst[1].max((bv - cert.gamma) / (1.0 + bv.abs()));
    }
    for x in region_samples(&regions.x1, &regions.domain, &bx, n, samples, rng) {
        let bv = b.eval_unchecked(&x);
        worst[0] = worst[0].max(-bv / (1.0 + bv.abs()));
        worst[2] = worst[2].max((1.0 - bv) / (1.0 + bv.abs()));
    }
    let worst = worst.map(|v| if v.is_nan() { f64::INFINITY } else { v });
    let max = worst.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let status = if max <= tol {
        CertStatus::Verified
    } else if max <= 10.0 * tol {
        CertStatus::Numerical
    } else {
        CertStatus::Failed
    };
    (status, worst)
}
