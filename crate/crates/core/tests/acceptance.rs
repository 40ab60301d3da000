//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p stochbarrier --test acceptance -- --nocapture`.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stochbarrier::algebra::{parse_inequality, BasicSet, NoiseModel, Polynomial, Region, StochasticSystem};
use stochbarrier::automaton::{translate, Dfa, DfaJson};
use stochbarrier::certificate::{
    post_verify, synthesize, CertStatus, Certificate, Diagnostics, SynthesisOptions, TaskRegions,
};
use stochbarrier::config::load_config;
use stochbarrier::decomposition::decompose;
use stochbarrier::engine::{combine, verify, CertificateCache, EngineOptions, Problem, Specification};
use stochbarrier::formula::Props;
use stochbarrier::montecarlo::{estimate, InitialSampler, SimConfig};

use common::{all_words, box_set, configs_dir, names, random_formula, random_labeling, random_linear_system, random_safe_formula};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cfg = load_config(configs_dir().join("running_example.json")).unwrap();
    let p = cfg.problem;
    let text = std::fs::read_to_string(configs_dir().join("running_example.dfa.json")).unwrap();
    let json: DfaJson = serde_json::from_str(&text).unwrap();
    let dfa = Dfa::from_json(&json, Some(&p.props)).unwrap().minimize();
    let dec = decompose(&dfa, 5, 1000).unwrap();
    let got: BTreeSet<(Vec<String>, BTreeSet<String>)> = dec
        .runs
        .iter()
        .map(|r| {
            (
                r.states.iter().map(|&q| dfa.states[q].clone()).collect(),
                r.tasks.iter().map(|&i| dec.tasks[i].label(&dfa)).collect(),
            )
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let run = |s: &[&str], t: &[&str]| {
        (s.iter().map(|x| x.to_string()).collect::<Vec<_>>(), t.iter().map(|x| x.to_string()).collect::<BTreeSet<_>>())
    };
    let expected: BTreeSet<_> = [
        run(&["q0", "q4", "q3"], &["(q0,q4,q3,4)"]),
        run(&["q0", "q1", "q2", "q3"], &["(q0,q1,q2,3)", "(q1,q2,q3,3)"]),
        run(&["q0", "q1", "q4", "q3"], &["(q0,q1,q4,3)", "(q1,q4,q3,3)"]),
        run(&["q0", "q3"], &[]),
    ]
    .into_iter()
    .collect();
    outcome(got == expected && secs < 1.0, format!("{} runs, {} tasks, {secs:.3}s", dec.runs.len(), dec.tasks.len()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let u = combine(&[vec![0.00586], vec![0.00232, 0.00449], vec![0.00391, 0.00488]]);
    let secs = start.elapsed().as_secs_f64();
    outcome((u - 0.00589).abs() <= 1e-4 && secs < 1e-3, format!("combined bound {u:.6}"))
}

/// Runs a bundled configuration end to end with its Monte Carlo settings.
fn case_study(file: &str) -> (stochbarrier::engine::VerificationReport, stochbarrier::montecarlo::Estimate, f64) {
    let start = Instant::now();
    let cfg = load_config(configs_dir().join(file)).unwrap();
    let report = verify(&cfg.problem, &cfg.engine, &CertificateCache::in_memory()).unwrap();
    let sim = cfg.sim_config().unwrap();
    let mc = estimate(&cfg.problem.system, &cfg.problem.labeling, &cfg.problem.spec, &sim).unwrap();
    (report, mc, start.elapsed().as_secs_f64())
}

fn describe(r: &stochbarrier::engine::VerificationReport, mc: &stochbarrier::montecarlo::Estimate, secs: f64) -> String {
    let tasks: Vec<String> =
        r.tasks.iter().map(|t| format!("{}={:.4}/{:?}", t.label, t.bound, t.status).to_lowercase()).collect();
    format!(
        "lower bound {:.5}; tasks [{}]; MC {}/{} CP [{:.5}, {:.5}]; {secs:.1}s",
        r.lower_bound,
        tasks.join(", "),
        mc.successes,
        mc.trials,
        mc.lower,
        mc.upper
    )
}

fn criterion_3() -> Outcome {
    let (r, mc, secs) = case_study("running_example.json");
    let statuses_ok = r.tasks.iter().all(|t| matches!(t.status, CertStatus::Verified | CertStatus::Numerical));
    let pass = r.lower_bound >= 0.95
        && statuses_ok
        && r.lower_bound <= mc.upper
        && mc.trials == 50_000
        && (mc.confidence - 0.9999).abs() < 1e-12
        && secs < 1800.0;
    outcome(pass, describe(&r, &mc, secs))
}

fn criterion_4() -> Outcome {
    let (r, mc, secs) = case_study("ten_room.json");
    let quadratic = r.tasks.iter().all(|t| t.certificate.degrees.0 <= 2);
    let pass = r.lower_bound >= 0.90 && quadratic && r.lower_bound <= mc.upper && secs < 1800.0;
    outcome(pass, describe(&r, &mc, secs))
}

fn criterion_5() -> Outcome {
    let (r, mc, secs) = case_study("lorenz.json");
    let degree_four = r.tasks.iter().all(|t| t.certificate.degrees.0 <= 4);
    let pass =
        r.lower_bound >= 0.90 && r.num_synthesized == 1 && degree_four && r.lower_bound <= mc.upper && secs < 600.0;
    outcome(pass, format!("{} synthesized; {}", r.num_synthesized, describe(&r, &mc, secs)))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let words = all_words(3, 1..=6);
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for _ in 0..200 {
        let nprops = rng.random_range(1..=3);
        let f = random_formula(&mut rng, nprops, 3);
        let props = Props::numbered(nprops);
        let dfa = translate(&f, &props, 100_000).unwrap().minimize();
        for w in words.iter().filter(|w| w.iter().all(|&l| l < nprops)) {
            checked += 1;
            if dfa.accepts(w) != f.evaluate(w) {
                mismatches += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(mismatches == 0 && secs < 60.0, format!("{mismatches} mismatches in {checked} checks, {secs:.1}s"))
}

fn set(ineqs: &[&str]) -> BasicSet {
    let v = vec!["x".to_string()];
    BasicSet::new(ineqs.iter().map(|s| parse_inequality(s, &v).unwrap()).collect())
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut verified = 0usize;
    let mut violated = 0usize;
    for k in 0..30 {
        let n = rng.random_range(1..=2);
        let sys = random_linear_system(&mut rng, n);
        let (_, regions) = random_labeling(&mut rng, n);
        let vars = names("x", n);
        let task = TaskRegions {
            x0: regions[0].clone(),
            x1: regions[1].clone(),
            domain: box_set(&vars, &vec![-3.0; n], &vec![3.0; n]),
        };
        let horizon = rng.random_range(1..=10);
        let opts = SynthesisOptions { seed: k, ..Default::default() };
        let cert = synthesize(&sys, &task, horizon, "t", &opts).unwrap();
        if cert.status == CertStatus::Verified {
            verified += 1;
            let mut fresh = ChaCha8Rng::seed_from_u64(10_000 + k);
            if post_verify(&cert, &sys, &task, 10_000, 1e-6, &mut fresh).0 != CertStatus::Verified {
                violated += 1;
            }
        }
    }

    // x+ = 0.9 x with B = x^2, gamma = 0.01, c = 0
    let sys = StochasticSystem::new(
        vec!["x".into()],
        vec![],
        vec![Polynomial::var(1, 0).scale(0.9)],
        NoiseModel::new(vec![]).unwrap(),
    )
    .unwrap();
    let task = TaskRegions {
        x0: Region::new(vec![set(&["0.01 - x^2 >= 0"])], true),
        x1: Region::new(vec![set(&["x^2 - 1 >= 0", "4 - x^2 >= 0"])], true),
        domain: set(&["x + 2 >= 0", "2 - x >= 0"]),
    };
    let hand = Certificate {
        task: "hand".into(),
        horizon: 10,
        degrees: (2, 2),
        barrier: Polynomial::var(1, 0).pow(2),
        gamma: 0.01,
        c: 0.0,
        bound: 0.01,
        status: CertStatus::Failed,
        diagnostics: Diagnostics::default(),
    };
    let hand_ok = post_verify(&hand, &sys, &task, 10_000, 1e-6, &mut rng).0 == CertStatus::Verified;

    let degenerate = TaskRegions { x0: task.x1.clone(), ..task.clone() };
    let clamp = synthesize(&sys, &degenerate, 3, "same", &SynthesisOptions::default()).unwrap();
    let clamp_ok = (clamp.effective_bound() - 1.0).abs() < 1e-6;

    let secs = start.elapsed().as_secs_f64();
    outcome(
        violated == 0 && hand_ok && clamp_ok && secs < 60.0,
        format!(
            "{verified} verified certificates re-checked, {violated} violations; hand certificate {}; \
             X0 = X1 bound {:.6}; {secs:.1}s",
            if hand_ok { "passes" } else { "rejected" },
            clamp.effective_bound()
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut violations = 0usize;
    let mut informative = 0usize;
    let mut worst_margin = f64::INFINITY;
    for k in 0..100u64 {
        let n = rng.random_range(1..=2);
        let system = random_linear_system(&mut rng, n);
        let (labeling, regions) = random_labeling(&mut rng, n);
        let props = Props::numbered(3);
        let formula = random_safe_formula(&mut rng, 3, 2);
        let horizon = rng.random_range(2..=6);
        let problem = Problem {
            system,
            props,
            labeling,
            domain: BasicSet::whole_space(),
            spec: Specification::Formula(formula),
            horizon,
        };
        let opts = EngineOptions {
            synthesis: SynthesisOptions { max_degree: 2, seed: k, ..Default::default() },
            ..Default::default()
        };
        let report = verify(&problem, &opts, &CertificateCache::in_memory()).unwrap();
        if report.lower_bound <= 0.0 {
            continue;
        }
        let claimed: Vec<Region> = report
            .claimed_initial_letters
            .iter()
            .filter_map(|l| l.strip_prefix('p').and_then(|d| d.parse::<usize>().ok()))
            .filter(|&p| p < 2)
            .map(|p| regions[p].clone())
            .collect();
        if claimed.is_empty() {
            continue;
        }
        informative += 1;
        let sim = SimConfig {
            horizon,
            realizations: 10_000,
            seed: k,
            initial: InitialSampler::Uniform { region: Region::union(claimed) },
            confidence: 0.999,
        };
        let mc = estimate(&problem.system, &problem.labeling, &problem.spec, &sim).unwrap();
        worst_margin = worst_margin.min(mc.upper - report.lower_bound);
        if report.lower_bound > mc.upper {
            violations += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        violations == 0 && secs < 1200.0,
        format!(
            "{violations} violations over {informative} systems with a non-zero bound (100 drawn); \
             smallest margin {worst_margin:.4}; {secs:.1}s"
        ),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("decomposition exactness", criterion_1),
        ("combination arithmetic", criterion_2),
        ("running example end to end", criterion_3),
        ("ten-room building", criterion_4),
        ("Lorenz model", criterion_5),
        ("translation correctness", criterion_6),
        ("certificate soundness", criterion_7),
        ("statistical soundness sweep", criterion_8),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
