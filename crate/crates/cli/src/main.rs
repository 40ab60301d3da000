//! Command-line front end.
//!
//! Exit statuses: 0 success, 1 verification finished but the lower bound is
//! vacuous (zero) or a checked certificate did not pass, 2 input error,
//! 3 internal numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stochbarrier::automaton::{translate, DEFAULT_STATE_CAP};
use stochbarrier::certificate::{assemble_sos, compile_sdp, post_verify, AffineMap, CertStatus, Certificate, TaskRegions};
use stochbarrier::config::{load_config, LoadedConfig};
use stochbarrier::decomposition::decompose;
use stochbarrier::engine::{verify, CertificateCache, EngineError, Specification};
use stochbarrier::formula::{parse_formula, Formula, Props};
use stochbarrier::montecarlo::{estimate, simulate_trace, InitialSampler, SimConfig};
use stochbarrier::sdp::{write_sdpa, SolveStatus};

#[derive(Parser)]
#[command(name = "stochbarrier", version, about = "Lower bounds on satisfying safe LTLf properties for stochastic polynomial systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a certified lower bound on the satisfaction probability.
    Verify(VerifyArgs),
    /// Build the automaton for the negated property.
    Translate(TranslateArgs),
    /// List accepting runs and reachability tasks.
    Decompose(CommonArgs),
    /// Estimate the satisfaction probability by simulation.
    Simulate(SimulateArgs),
    /// Post-verify a certificate file against its task.
    CheckCertificate(CheckArgs),
    /// Write the SDP of every task in SDPA sparse format.
    ExportSdp(CommonArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Dot,
    Sdpa,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Problem configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Automaton for the negated property (JSON), replacing the configured formula.
    #[arg(long)]
    dfa: Option<PathBuf>,
    /// Trace length N, overriding the configuration.
    #[arg(long)]
    horizon: Option<usize>,
    /// Largest barrier degree to try.
    #[arg(long)]
    max_degree: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default from STOCHBARRIER_JOBS, else all cores).
    #[arg(long, env = "STOCHBARRIER_JOBS")]
    jobs: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also run the Monte Carlo cross-check.
    #[arg(long)]
    monte_carlo: bool,
    /// Directory for cached certificates.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args)]
struct TranslateArgs {
    #[arg(long, conflicts_with = "formula")]
    config: Option<PathBuf>,
    /// Formula to translate instead of the configured one.
    #[arg(long, requires = "props")]
    formula: Option<String>,
    /// Comma-separated proposition names for --formula.
    #[arg(long)]
    props: Option<String>,
    /// Translate the formula itself rather than its negation.
    #[arg(long)]
    no_negate: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    realizations: Option<usize>,
    /// Write the first trace's states and labels to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Certificate JSON as written by `verify`.
    #[arg(long)]
    certificate: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

struct Failure {
    code: u8,
    message: String,
}

fn input(message: impl ToString) -> Failure {
    Failure { code: 2, message: message.to_string() }
}

fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::Certificate(_) => Failure { code: 3, message: e.to_string() },
        _ => input(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Translate(a) => cmd_translate(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::CheckCertificate(a) => cmd_check(a),
        Command::ExportSdp(a) => cmd_export(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(a: &CommonArgs) -> Result<LoadedConfig, Failure> {
    let mut cfg = load_config(&a.config).map_err(input)?;
    if let Some(path) = &a.dfa {
        let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
        let json = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
        let dfa = stochbarrier::automaton::Dfa::from_json(&json, Some(&cfg.problem.props)).map_err(input)?;
        cfg.problem.spec = Specification::NegatedDfa(dfa);
    }
    if let Some(n) = a.horizon {
        if n == 0 {
            return Err(input("--horizon must be at least 1"));
        }
        cfg.problem.horizon = n;
    }
    if let Some(d) = a.max_degree {
        if d < 2 {
            return Err(input("--max-degree must be at least 2"));
        }
        cfg.engine.synthesis.max_degree = d;
    }
    if let Some(s) = a.seed {
        cfg.engine.synthesis.seed = s;
        cfg.raw.monte_carlo.seed = s;
    }
    if let Some(j) = a.jobs {
        cfg.engine.jobs = j;
    }
    Ok(cfg)
}

fn emit(out_dir: Option<&Path>, file: &str, content: &str) -> Result<(), Failure> {
    match out_dir {
        Some(d) => {
            fs::create_dir_all(d).map_err(|e| input(format!("{}: {e}", d.display())))?;
            let p = d.join(file);
            fs::write(&p, content).map_err(|e| input(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{content}");
            if !content.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("artifact serializes")
}

fn cmd_verify(a: VerifyArgs) -> Result<u8, Failure> {
    let cfg = load(&a.common)?;
    let cache = match &a.cache_dir {
        Some(d) => CertificateCache::with_dir(d).map_err(input)?,
        None => CertificateCache::in_memory(),
    };
    let mut report = verify(&cfg.problem, &cfg.engine, &cache).map_err(engine_failure)?;
    report.reference_lower_bound = cfg.raw.reference.lower_bound;
    if a.monte_carlo {
        let sim = cfg.sim_config().map_err(input)?;
        let est = estimate(&cfg.problem.system, &cfg.problem.labeling, &cfg.problem.spec, &sim).map_err(input)?;
        report.monte_carlo = Some(est);
    }
    let format = a.common.format.unwrap_or(Format::Text);
    let out = a.common.out_dir.as_deref();
    if let Some(d) = out {
        emit(Some(d), "report.json", &json(&report))?;
        emit(Some(d), "report.txt", &report.to_text())?;
        for (i, t) in report.tasks.iter().enumerate() {
            emit(Some(d), &format!("certificate_{i}.json"), &t.certificate.to_json())?;
        }
    } else {
        match format {
            Format::Json => emit(None, "", &json(&report))?,
            _ => emit(None, "", &report.to_text())?,
        }
    }
    let numerical = report.tasks.iter().any(|t| {
        t.synthesized
            && t.status == CertStatus::Failed
            && !t.certificate.diagnostics.attempts.is_empty()
            && t.certificate
                .diagnostics
                .attempts
                .iter()
                .all(|x| x.solver_status == Some(SolveStatus::NumericalFailure))
    });
    Ok(if numerical {
        3
    } else if report.is_vacuous() {
        1
    } else {
        0
    })
}

fn cmd_translate(a: TranslateArgs) -> Result<u8, Failure> {
    let (formula, props): (Formula, Props) = match (&a.config, &a.formula) {
        (Some(c), None) => {
            let cfg = load_config(c).map_err(input)?;
            match cfg.problem.spec {
                Specification::Formula(f) => (f, cfg.problem.props),
                Specification::NegatedDfa(_) => return Err(input("configuration specifies a DFA, not a formula")),
            }
        }
        (None, Some(f)) => {
            let names: Vec<String> = a.props.as_deref().unwrap_or("").split(',').map(|s| s.trim().to_string()).collect();
            if names.iter().any(String::is_empty) {
                return Err(input("--props needs a comma-separated list of names"));
            }
            let props = Props::new(names);
            (parse_formula(f, &props).map_err(input)?, props)
        }
        _ => return Err(input("give either --config or --formula with --props")),
    };
    let target = if a.no_negate { formula } else { Formula::not(formula) };
    let dfa = translate(&target, &props, DEFAULT_STATE_CAP).map_err(input)?.minimize().renamed();
    let out = a.out_dir.as_deref();
    match (out, a.format.unwrap_or(Format::Dot)) {
        (Some(d), _) => {
            emit(Some(d), "dfa.dot", &dfa.export_dot())?;
            emit(Some(d), "dfa.json", &json(&dfa.to_json()))?;
        }
        (None, Format::Json) => emit(None, "", &json(&dfa.to_json()))?,
        (None, _) => emit(None, "", &dfa.export_dot())?,
    }
    Ok(0)
}

fn cmd_decompose(a: CommonArgs) -> Result<u8, Failure> {
    let cfg = load(&a)?;
    let dfa = cfg.problem.spec.negated_dfa(&cfg.problem.props, cfg.engine.state_cap).map_err(input)?;
    let dec = decompose(&dfa, cfg.problem.horizon, cfg.engine.run_cap).map_err(input)?;
    let view = dec.to_json(&dfa);
    match a.format.unwrap_or(Format::Json) {
        Format::Text => {
            let mut s = String::new();
            for r in &view.runs {
                s.push_str(&format!("({})\n", r.states.join(",")));
                for &t in &r.tasks {
                    let t = &view.tasks[t];
                    s.push_str(&format!("  ({},{},{},{})\n", t.from, t.mid, t.to, t.horizon));
                }
            }
            emit(a.out_dir.as_deref(), "decomposition.txt", &s)?;
        }
        _ => emit(a.out_dir.as_deref(), "decomposition.json", &json(&view))?,
    }
    Ok(0)
}

fn cmd_simulate(a: SimulateArgs) -> Result<u8, Failure> {
    let cfg = load(&a.common)?;
    let mut sim: SimConfig = cfg.sim_config().map_err(input)?;
    if let Some(r) = a.realizations {
        sim.realizations = r;
    }
    let p = &cfg.problem;
    let est = estimate(&p.system, &p.labeling, &p.spec, &sim).map_err(input)?;
    if let Some(path) = &a.csv {
        let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
        let x0 = match &sim.initial {
            InitialSampler::Point { state } => state.clone(),
            InitialSampler::Uniform { region } => {
                let bx = region.bounding_box(p.system.state_dim()).ok_or_else(|| input("empty initial region"))?;
                let pts = stochbarrier::algebra::rejection_sample(
                    &stochbarrier::algebra::BasicSet::whole_space(),
                    None,
                    &bx,
                    1,
                    &mut rng,
                );
                pts.into_iter().find(|x| region.contains(x)).unwrap_or_else(|| bx.iter().map(|b| 0.5 * (b.0 + b.1)).collect())
            }
        };
        let trace = simulate_trace(&p.system, &p.labeling, &x0, sim.horizon, &mut rng).map_err(input)?;
        let mut w = csv::Writer::from_path(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
        let mut header = vec!["k".to_string()];
        header.extend(p.system.state_names.iter().cloned());
        header.push("label".into());
        w.write_record(&header).map_err(input)?;
        for (k, (x, &l)) in trace.states.iter().zip(&trace.letters).enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(x.iter().map(|v| v.to_string()));
            row.push(p.props.name(l).to_string());
            w.write_record(&row).map_err(input)?;
        }
        w.flush().map_err(input)?;
    }
    match a.common.format.unwrap_or(Format::Json) {
        Format::Text => emit(
            a.common.out_dir.as_deref(),
            "estimate.txt",
            &format!(
                "{}/{} traces satisfy the property; {:.4}% interval [{:.6}, {:.6}]\n",
                est.successes,
                est.trials,
                100.0 * est.confidence,
                est.lower,
                est.upper
            ),
        )?,
        _ => emit(a.common.out_dir.as_deref(), "estimate.json", &json(&est))?,
    }
    Ok(0)
}

/// Task regions for every decomposition task, keyed by label.
fn task_regions(cfg: &LoadedConfig) -> Result<Vec<(String, usize, Option<TaskRegions>)>, Failure> {
    let p = &cfg.problem;
    let dfa = p.spec.negated_dfa(&p.props, cfg.engine.state_cap).map_err(input)?;
    let dec = decompose(&dfa, p.horizon, cfg.engine.run_cap).map_err(input)?;
    Ok(dec
        .tasks
        .iter()
        .map(|t| {
            let regions = match (p.labeling.preimage(&t.source_letters), p.labeling.preimage(&t.target_letters)) {
                (Some(x0), Some(x1)) if x0.bounded && x1.bounded => {
                    Some(TaskRegions { x0, x1, domain: p.domain.clone() })
                }
                _ => None,
            };
            (t.label(&dfa), t.horizon, regions)
        })
        .collect())
}

fn cmd_check(a: CheckArgs) -> Result<u8, Failure> {
    let cfg = load(&a.common)?;
    let text = fs::read_to_string(&a.certificate).map_err(|e| input(format!("{}: {e}", a.certificate.display())))?;
    let cert: Certificate = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", a.certificate.display())))?;
    if cert.barrier.nvars() != cfg.problem.system.state_dim() {
        return Err(input("certificate barrier has the wrong number of variables"));
    }
    let tasks = task_regions(&cfg)?;
    let (_, _, regions) = tasks
        .iter()
        .find(|(l, _, _)| *l == cert.task)
        .ok_or_else(|| input(format!("task {} is not part of this problem", cert.task)))?;
    let regions = regions.as_ref().ok_or_else(|| input("task has an unbounded region; nothing to check"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed.unwrap_or(0));
    let (status, violations) = post_verify(&cert, &cfg.problem.system, regions, a.samples, a.tol, &mut rng);
    let out = serde_json::json!({
        "task": cert.task,
        "status": status,
        "violations": violations,
        "bound": cert.bound,
    });
    match a.common.format.unwrap_or(Format::Json) {
        Format::Text => emit(None, "", &format!("{}: {:?} (bound {})\n", cert.task, status, cert.bound))?,
        _ => emit(a.common.out_dir.as_deref(), "check.json", &json(&out))?,
    }
    Ok(if status == CertStatus::Failed { 1 } else { 0 })
}

fn cmd_export(a: CommonArgs) -> Result<u8, Failure> {
    let cfg = load(&a)?;
    let d = cfg.engine.synthesis.max_degree.max(2).div_ceil(2) * 2;
    let n = cfg.problem.system.state_dim();
    let out = a.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let mut written = 0;
    for (i, (label, horizon, regions)) in task_regions(&cfg)?.into_iter().enumerate() {
        let Some(r) = regions else {
            eprintln!("skipping {label}: unbounded region");
            continue;
        };
        let map = if cfg.engine.synthesis.auto_scale { AffineMap::fit(&r.x0, &r.x1, n) } else { AffineMap::identity(n) };
        let prog = assemble_sos(&cfg.problem.system, &r.x0, &r.x1, &r.domain, horizon, d, d, &map, cfg.engine.synthesis.products)
            .map_err(|e| Failure { code: 3, message: e.to_string() })?;
        let sdp = compile_sdp(&prog, None);
        emit(Some(&out), &format!("task_{i}.dat-s"), &write_sdpa(&sdp.instance))?;
        eprintln!("{label} -> {}", out.join(format!("task_{i}.dat-s")).display());
        written += 1;
    }
    if written == 0 {
        eprintln!("no tasks to export");
    }
    Ok(0)
}
