#![allow(dead_code)]

use proptest::prelude::*;
use rand::Rng;

use stochbarrier::algebra::{
    parse_inequality, BasicSet, LabeledRegion, Labeling, NoiseDist, NoiseModel, Polynomial, Region, StochasticSystem,
};
use stochbarrier::formula::Formula;

pub fn formula_strategy(nprops: usize, depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        (0..nprops).prop_map(Formula::atom),
    ];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            inner.clone().prop_map(Formula::next),
            inner.clone().prop_map(Formula::weak_next),
            inner.clone().prop_map(Formula::eventually),
            inner.clone().prop_map(Formula::always),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::until(a, b)),
        ]
    })
}

/// Random formula of depth at most `depth` over all operators.
pub fn random_formula<R: Rng>(rng: &mut R, nprops: usize, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.25) {
        return match rng.random_range(0..6) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(rng.random_range(0..nprops)),
        };
    }
    let sub = |rng: &mut R| random_formula(rng, nprops, depth - 1);
    match rng.random_range(0..8) {
        0 => Formula::not(sub(rng)),
        1 => Formula::next(sub(rng)),
        2 => Formula::eventually(sub(rng)),
        3 => Formula::always(sub(rng)),
        4 => Formula::and(sub(rng), sub(rng)),
        5 => Formula::or(sub(rng), sub(rng)),
        6 => Formula::until(sub(rng), sub(rng)),
        _ => Formula::weak_next(sub(rng)),
    }
}

/// Random safe formula (positive normal form over X, G, and, or).
pub fn random_safe_formula<R: Rng>(rng: &mut R, nprops: usize, depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.3) {
        let a = Formula::atom(rng.random_range(0..nprops));
        return if rng.random_bool(0.5) { Formula::not(a) } else { a };
    }
    let sub = |rng: &mut R| random_safe_formula(rng, nprops, depth - 1);
    match rng.random_range(0..4) {
        0 => Formula::next(sub(rng)),
        1 => Formula::always(sub(rng)),
        2 => Formula::and(sub(rng), sub(rng)),
        _ => Formula::or(sub(rng), sub(rng)),
    }
}

/// Every word over `k` letters with length in `lens`.
pub fn all_words(k: usize, lens: std::ops::RangeInclusive<usize>) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for len in lens {
        let total = k.pow(len as u32);
        for mut code in 0..total {
            let mut w = Vec::with_capacity(len);
            for _ in 0..len {
                w.push(code % k);
                code /= k;
            }
            out.push(w);
        }
    }
    out
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

pub fn box_set(vars: &[String], lo: &[f64], hi: &[f64]) -> BasicSet {
    let mut ineqs = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        ineqs.push(parse_inequality(&format!("{v} >= {}", lo[i]), vars).unwrap());
        ineqs.push(parse_inequality(&format!("{v} <= {}", hi[i]), vars).unwrap());
    }
    BasicSet::new(ineqs)
}

/// `x+ = a x + b + s w` per coordinate, with a small coupling term.
pub fn random_linear_system<R: Rng>(rng: &mut R, n: usize) -> StochasticSystem {
    let total = 2 * n;
    let mut dynamics = Vec::new();
    for i in 0..n {
        let a = rng.random_range(0.5..1.05);
        let b = rng.random_range(-0.3..0.3);
        let s = rng.random_range(0.05..0.4);
        let mut f = &Polynomial::var(total, i).scale(a) + &Polynomial::constant(total, b);
        f = &f + &Polynomial::var(total, n + i).scale(s);
        if n > 1 {
            let j = (i + 1) % n;
            f = &f + &Polynomial::var(total, j).scale(rng.random_range(-0.1..0.1));
        }
        dynamics.push(f);
    }
    StochasticSystem::new(
        names("x", n),
        names("w", n),
        dynamics,
        NoiseModel::new(vec![NoiseDist::standard_normal(); n]).unwrap(),
    )
    .unwrap()
}

/// Two disjoint boxes labeled p0 and p1 inside [-3, 3]^n; the rest is p2.
pub fn random_labeling<R: Rng>(rng: &mut R, n: usize) -> (Labeling, Vec<Region>) {
    let vars = names("x", n);
    let split = rng.random_range(-0.5..0.5);
    let gap = rng.random_range(0.1..1.0);
    let mut lo0 = vec![-2.0; n];
    let mut hi0 = vec![2.0; n];
    let mut lo1 = vec![-2.0; n];
    let mut hi1 = vec![2.0; n];
    hi0[0] = split - gap / 2.0;
    lo0[0] = hi0[0] - rng.random_range(0.5..2.0);
    lo1[0] = split + gap / 2.0;
    hi1[0] = lo1[0] + rng.random_range(0.5..2.0);
    let r0 = Region::new(vec![box_set(&vars, &lo0, &hi0)], true);
    let r1 = Region::new(vec![box_set(&vars, &lo1, &hi1)], true);
    let labeling = Labeling {
        entries: vec![
            LabeledRegion { name: "A".into(), region: r0.clone(), prop: 0 },
            LabeledRegion { name: "B".into(), region: r1.clone(), prop: 1 },
        ],
        default: Some(2),
    };
    (labeling, vec![r0, r1])
}

pub fn configs_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// `x+ = a x + s w` on the line with `p0` near the origin, `p1` on
/// `[1, 3]` and `p2` elsewhere, checked against `p0 & G !p1`.
pub fn scalar_problem(a: f64, s: f64, horizon: usize) -> stochbarrier::engine::Problem {
    use stochbarrier::algebra::parse_poly;
    use stochbarrier::engine::{Problem, Specification};
    use stochbarrier::formula::{parse_formula, Props};
    let all = vec!["x".to_string(), "w".to_string()];
    let vars = vec!["x".to_string()];
    let sys = StochasticSystem::new(
        vars.clone(),
        vec!["w".into()],
        vec![parse_poly(&format!("{a}*x + {s}*w"), &all).unwrap()],
        NoiseModel::new(vec![NoiseDist::standard_normal()]).unwrap(),
    )
    .unwrap();
    let props = Props::new(vec!["p0".into(), "p1".into(), "p2".into()]);
    let labeling = Labeling {
        entries: vec![
            LabeledRegion {
                name: "X0".into(),
                region: Region::new(vec![box_set(&vars, &[-0.1], &[0.1])], true),
                prop: 0,
            },
            LabeledRegion {
                name: "X1".into(),
                region: Region::new(vec![box_set(&vars, &[1.0], &[3.0])], true),
                prop: 1,
            },
        ],
        default: Some(2),
    };
    let spec = Specification::Formula(parse_formula("p0 & G !p1", &props).unwrap());
    Problem { system: sys, props, labeling, domain: BasicSet::whole_space(), spec, horizon }
}
