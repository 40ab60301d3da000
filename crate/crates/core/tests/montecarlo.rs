mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use stochbarrier::algebra::{parse_poly, Labeling, NoiseDist, NoiseModel, Region, StochasticSystem};
use stochbarrier::engine::Specification;
use stochbarrier::formula::Formula;
use stochbarrier::montecarlo::{clopper_pearson, estimate, simulate_trace, InitialSampler, SimConfig};

use common::{box_set, scalar_problem};

fn scalar(a: f64, s: f64) -> StochasticSystem {
    let names = vec!["x".to_string(), "w".to_string()];
    StochasticSystem::new(
        vec!["x".into()],
        vec!["w".into()],
        vec![parse_poly(&format!("{a}*x + {s}*w"), &names).unwrap()],
        NoiseModel::new(vec![NoiseDist::standard_normal()]).unwrap(),
    )
    .unwrap()
}

fn everything_p0() -> Labeling {
    Labeling { entries: vec![], default: Some(0) }
}

fn cfg(horizon: usize, realizations: usize, seed: u64, initial: InitialSampler) -> SimConfig {
    SimConfig { horizon, realizations, seed, initial, confidence: 0.999 }
}

#[test]
fn estimates_are_reproducible() {
    let p = scalar_problem(0.9, 0.4, 6);
    let init = InitialSampler::Point { state: vec![0.0] };
    let a = estimate(&p.system, &p.labeling, &p.spec, &cfg(6, 5000, 42, init.clone())).unwrap();
    let b = estimate(&p.system, &p.labeling, &p.spec, &cfg(6, 5000, 42, init.clone())).unwrap();
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c = pool.install(|| estimate(&p.system, &p.labeling, &p.spec, &cfg(6, 5000, 42, init.clone())).unwrap());
    assert_eq!(a, c);
    let d = estimate(&p.system, &p.labeling, &p.spec, &cfg(6, 5000, 43, init)).unwrap();
    assert_ne!(a.successes, d.successes);
}

#[test]
fn noiseless_trace_is_exact() {
    let sys = scalar(0.5, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let t = simulate_trace(&sys, &everything_p0(), &[1.0], 3, &mut rng).unwrap();
    assert_eq!(t.states, vec![vec![1.0], vec![0.5], vec![0.25]]);
    assert_eq!(t.letters, vec![0, 0, 0]);
}

#[test]
fn one_step_mean_is_zero() {
    let sys = scalar(0.5, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 100_000;
    let mean: f64 = (0..n).map(|_| sys.step(&[0.0], &mut rng).unwrap()[0]).sum::<f64>() / n as f64;
    assert!(mean.abs() < 0.02, "{mean}");
}

#[test]
fn interval_covers_true_probability() {
    // x+ = w and p0 = {x <= t}: X !p1 over two steps holds with probability Phi(t)
    let vars = vec!["x".to_string()];
    let sys = scalar(0.0, 1.0);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let spec = Specification::Formula(Formula::next(Formula::not(Formula::atom(1))));
    for (k, &target) in [0.1f64, 0.5, 0.9].iter().enumerate() {
        let mut misses = 0;
        let trials = 40;
        let t = normal.inverse_cdf(target);
        let labeling = Labeling {
            entries: vec![stochbarrier::algebra::LabeledRegion {
                name: "hi".into(),
                region: Region::new(vec![box_set(&vars, &[-1e6], &[t])], true),
                prop: 0,
            }],
            default: Some(1),
        };
        for rep in 0..trials {
            let c = SimConfig {
                horizon: 2,
                realizations: 400,
                seed: 1000 * k as u64 + rep,
                initial: InitialSampler::Point { state: vec![0.0] },
                confidence: 0.95,
            };
            let e = estimate(&sys, &labeling, &spec, &c).unwrap();
            if !(e.lower <= target && target <= e.upper) {
                misses += 1;
            }
        }
        // 95% intervals: expect about 2 misses in 40; 8 or more is very unlikely
        assert!(misses < 8, "p={target}: {misses} misses");
    }
}

#[test]
fn trivially_true_property_has_upper_limit_one() {
    let sys = scalar(0.5, 1.0);
    let spec = Specification::Formula(Formula::True);
    let e = estimate(&sys, &everything_p0(), &spec, &cfg(5, 1000, 1, InitialSampler::Point { state: vec![0.0] })).unwrap();
    assert_eq!(e.successes, 1000);
    assert_eq!(e.upper, 1.0);
    assert!((e.lower - 0.001f64.powf(1.0 / 1000.0)).abs() < 1e-12);
}

#[test]
fn uniform_initial_states_cover_the_region() {
    let vars = vec!["x".to_string()];
    let sys = scalar(1.0, 0.0);
    // union of [0, 1] and [3, 5]: twice as many draws should land in the second piece
    let region = Region::new(vec![box_set(&vars, &[0.0], &[1.0]), box_set(&vars, &[3.0], &[5.0])], true);
    let labeling = Labeling {
        entries: vec![stochbarrier::algebra::LabeledRegion {
            name: "far".into(),
            region: Region::new(vec![box_set(&vars, &[2.0], &[6.0])], true),
            prop: 1,
        }],
        default: Some(0),
    };
    let spec = Specification::Formula(Formula::atom(1));
    let e = estimate(&sys, &labeling, &spec, &cfg(1, 30_000, 5, InitialSampler::Uniform { region })).unwrap();
    assert!((e.rate() - 2.0 / 3.0).abs() < 0.015, "{}", e.rate());
}

#[test]
fn interval_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let n = rng.random_range(1..500);
        let k = rng.random_range(0..=n);
        let (lo, hi) = clopper_pearson(k, n, 0.99);
        let r = k as f64 / n as f64;
        assert!(0.0 <= lo && lo <= r + 1e-12 && r - 1e-12 <= hi && hi <= 1.0, "{k}/{n}: [{lo}, {hi}]");
    }
}

#[test]
fn invalid_settings_are_rejected() {
    let sys = scalar(0.5, 1.0);
    let spec = Specification::Formula(Formula::True);
    let bad = SimConfig { confidence: 1.0, ..cfg(3, 10, 0, InitialSampler::Point { state: vec![0.0] }) };
    assert!(estimate(&sys, &everything_p0(), &spec, &bad).is_err());
    let wrong_dim = cfg(3, 10, 0, InitialSampler::Point { state: vec![0.0, 1.0] });
    assert!(estimate(&sys, &everything_p0(), &spec, &wrong_dim).is_err());
    let unlabeled = Labeling { entries: vec![], default: None };
    assert!(estimate(&sys, &unlabeled, &spec, &cfg(3, 10, 0, InitialSampler::Point { state: vec![0.0] })).is_err());
}
