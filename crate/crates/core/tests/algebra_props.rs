use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stochbarrier::algebra::{parse_poly, Monomial, NoiseDist, NoiseModel, Polynomial, StochasticSystem};

const NV: usize = 2;

fn poly_strategy(max_deg: u32) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(((0..=max_deg), (0..=max_deg), -4i32..=4), 0..6).prop_map(move |terms| {
        Polynomial::from_terms(
            NV,
            terms
                .into_iter()
                .filter(|(a, b, _)| a + b <= max_deg)
                .map(|(a, b, c)| (Monomial::from_exponents(vec![a, b]), f64::from(c))),
        )
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, NV)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #[test]
    fn ring_laws(p in poly_strategy(3), q in poly_strategy(3), r in poly_strategy(2)) {
        prop_assert_eq!(&p + &q, &q + &p);
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
        prop_assert_eq!(&p * &Polynomial::constant(NV, 1.0), p.clone());
    }

    #[test]
    fn evaluation_is_a_homomorphism(p in poly_strategy(3), q in poly_strategy(3), x in point()) {
        let (pv, qv) = (p.eval(&x).unwrap(), q.eval(&x).unwrap());
        prop_assert!(close((&p + &q).eval(&x).unwrap(), pv + qv));
        prop_assert!(close((&p * &q).eval(&x).unwrap(), pv * qv));
        prop_assert!(close(p.pow(2).eval(&x).unwrap(), pv * pv));
        prop_assert!((&p * &q).degree() <= p.degree() + q.degree());
    }

    #[test]
    fn composition_matches_evaluation(p in poly_strategy(3), f in poly_strategy(2), g in poly_strategy(2), x in point()) {
        let composed = p.compose(&[f.clone(), g.clone()]).unwrap();
        let inner = [f.eval(&x).unwrap(), g.eval(&x).unwrap()];
        prop_assert!(close(composed.eval(&x).unwrap(), p.eval(&inner).unwrap()));
    }

    #[test]
    fn serde_and_display_round_trip(p in poly_strategy(4)) {
        let json = serde_json::to_string(&p).unwrap();
        let back: Polynomial = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &p);
        let names = vec!["x1".to_string(), "x2".to_string()];
        let text = p.display(&names).to_string();
        prop_assert_eq!(parse_poly(&text, &names).unwrap(), p);
    }
}

fn gaussian_system(a: f64, s: f64) -> StochasticSystem {
    let names = vec!["x".to_string(), "w".to_string()];
    let f = parse_poly(&format!("{a}*x + {s}*w"), &names).unwrap();
    StochasticSystem::new(
        vec!["x".into()],
        vec!["w".into()],
        vec![f],
        NoiseModel::new(vec![NoiseDist::standard_normal()]).unwrap(),
    )
    .unwrap()
}

#[test]
fn expected_next_closed_form() {
    // E[(a x + s w)^2] = a^2 x^2 + s^2, E[(a x + s w)^4] = a^4 x^4 + 6 a^2 s^2 x^2 + 3 s^4
    let sys = gaussian_system(0.5, 0.2);
    let v = vec!["x".to_string()];
    let e2 = sys.expected_next(&parse_poly("x^2", &v).unwrap()).unwrap();
    let expect2 = parse_poly("0.25*x^2 + 0.04", &v).unwrap();
    assert!((&e2 - &expect2).max_abs_coeff() < 1e-15);
    let e4 = sys.expected_next(&parse_poly("x^4", &v).unwrap()).unwrap();
    let expect = parse_poly("0.0625*x^4 + 0.06*x^2 + 0.0048", &v).unwrap();
    assert!((&e4 - &expect).max_abs_coeff() < 1e-14);
}

#[test]
fn expected_next_matches_sampling() {
    let sys = gaussian_system(0.8, 0.5);
    let v = vec!["x".to_string()];
    let b = parse_poly("x^3 - 2*x + 1", &v).unwrap();
    let e = sys.expected_next(&b).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 200_000;
    let x0 = [0.7];
    let mut acc = 0.0;
    for _ in 0..n {
        let x1 = sys.step(&x0, &mut rng).unwrap();
        acc += b.eval(&x1).unwrap();
    }
    let mc = acc / n as f64;
    assert!((mc - e.eval(&x0).unwrap()).abs() < 0.02, "{mc} vs {}", e.eval(&x0).unwrap());
}

#[test]
fn uniform_and_point_moments() {
    let u = NoiseDist::Uniform { low: -1.0, high: 1.0 };
    assert_eq!(u.moment(1), Some(0.0));
    assert!(close(u.moment(2).unwrap(), 1.0 / 3.0));
    assert!(close(u.moment(4).unwrap(), 0.2));
    assert_eq!(NoiseDist::Point { value: 2.0 }.moment(3), Some(8.0));
    assert_eq!(NoiseDist::standard_normal().moment(4), Some(3.0));
    assert_eq!(NoiseDist::Moments { moments: vec![1.0, 0.0] }.moment(2), None);
}
