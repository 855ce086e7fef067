//! Refutation, SAT encodings, LP feasibility and extracted inequalities
//! checked against each other.

use std::sync::OnceLock;

use netposs::certificates::{
    extract_certificate, to_inequality, PolynomialInequality, PossibilisticCertificate,
};
use netposs::examples::triangle_fixture;
use netposs::inflation::{AiStructure, Inflation, InflationValuation};
use netposs::lp::{build_ns_lp, farkas_to_inequality, solve_feasibility, Feasibility};
use netposs::possibility::{Refutation, Refuter};
use netposs::sat::{solve, Budget, EncodingOptions, InflationEncoder};
use netposs::scenario::{realizations_random, Distribution, Pattern, Scenario};
use netposs::symmetry::{Orbit, RelabelingGroup};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sat_refutes(inf: &Inflation, pattern: &Pattern) -> bool {
    let enc =
        InflationEncoder::family(std::slice::from_ref(inf), EncodingOptions::marginals_only());
    solve(&enc.encode(pattern), Budget::unlimited()).is_unsat()
}

#[test]
fn refuter_agrees_with_sat_on_every_triangle_orbit() {
    let tri = Scenario::triangle();
    let orbits = RelabelingGroup::new(&tri)
        .partition_into_orbits(24, false)
        .unwrap();
    for name in ["cut", "ring:6", "ring:9", "spiral"] {
        let inf = Inflation::named(&tri, name).unwrap();
        let refuter = Refuter::new(&inf);
        for o in &orbits {
            let p = &o.representative;
            assert_eq!(
                refuter.refute(p).is_contradiction(),
                sat_refutes(&inf, p),
                "{name} {}",
                p.to_literal()
            );
        }
    }
}

fn square_orbits() -> &'static [Orbit] {
    static O: OnceLock<Vec<Orbit>> = OnceLock::new();
    O.get_or_init(|| {
        RelabelingGroup::new(&Scenario::square())
            .partition_into_orbits(24, false)
            .unwrap()
    })
}

fn square_ring() -> &'static (Inflation, Refuter) {
    static R: OnceLock<(Inflation, Refuter)> = OnceLock::new();
    R.get_or_init(|| {
        let inf = Inflation::named(&Scenario::square(), "ring:8").unwrap();
        let refuter = Refuter::new(&inf);
        (inf, refuter)
    })
}

/// A distribution produced by the triangle network itself: independent
/// sources with random weights and deterministic responses.
fn network_local(rng: &mut ChaCha8Rng) -> Distribution {
    let s = Scenario::triangle();
    let card: Vec<usize> = (0..s.source_count())
        .map(|_| rng.gen_range(2..=3))
        .collect();
    let weights: Vec<Vec<u32>> = card
        .iter()
        .map(|&c| loop {
            let w: Vec<u32> = (0..c).map(|_| rng.gen_range(0..=5)).collect();
            if w.iter().any(|&x| x > 0) {
                break w;
            }
        })
        .collect();
    let responses: Vec<Vec<usize>> = (0..s.observer_count())
        .map(|o| {
            let inputs: usize = s.sources_of(o).iter().map(|&k| card[k]).product();
            (0..inputs)
                .map(|_| rng.gen_range(0..s.outcomes()[o]))
                .collect()
        })
        .collect();
    let mut joint = vec![BigRational::zero(); s.joint_len()];
    let total: usize = card.iter().product();
    for mut code in 0..total {
        let mut lambda = vec![0; card.len()];
        for (k, &c) in card.iter().enumerate() {
            lambda[k] = code % c;
            code /= c;
        }
        let w: u32 = lambda
            .iter()
            .enumerate()
            .map(|(k, &l)| weights[k][l])
            .product();
        if w == 0 {
            continue;
        }
        let index = (0..s.observer_count()).fold(0, |acc, o| {
            let input = s
                .sources_of(o)
                .iter()
                .fold(0, |a, &k| a * card[k] + lambda[k]);
            acc * s.outcomes()[o] + responses[o][input]
        });
        joint[index] += BigRational::from_integer(w.into());
    }
    Distribution::from_weights(s.shape().clone(), joint).unwrap()
}

fn extracted(fixture: &str, inflation: &str) -> PolynomialInequality {
    let tri = Scenario::triangle();
    let inf = Inflation::named(&tri, inflation).unwrap();
    let p = triangle_fixture(fixture).unwrap();
    let Refutation::Contradiction(c) = Refuter::new(&inf).refute(&p) else {
        panic!("{fixture} not refuted by {inflation}");
    };
    to_inequality(&extract_certificate(&c, &inf, &p).unwrap(), &tri)
}

fn three_event_p3() -> PolynomialInequality {
    let tri = Scenario::triangle();
    let inf = Inflation::named(&tri, "ring:6").unwrap();
    let ai = AiStructure::new(&inf);
    let o = |name: &str| inf.observer_index(name).unwrap();
    let v = |pairs: &[(&str, usize)]| {
        InflationValuation::new(pairs.iter().map(|&(n, x)| (o(n), x)).collect())
    };
    let t = v(&[("A1", 0), ("B1", 1), ("A2", 1), ("B2", 0)]);
    let es = vec![
        v(&[("A1", 0), ("A2", 1), ("C1", 1), ("C2", 0)]),
        v(&[("B1", 1), ("B2", 0), ("C2", 1)]),
        v(&[("B1", 1), ("B2", 0), ("C1", 0), ("C2", 0)]),
    ];
    to_inequality(
        &PossibilisticCertificate::new(&inf, &ai, t, es).unwrap(),
        &tri,
    )
}

fn inequalities() -> &'static [(&'static str, PolynomialInequality)] {
    static I: OnceLock<Vec<(&'static str, PolynomialInequality)>> = OnceLock::new();
    I.get_or_init(|| {
        let tri = Scenario::triangle();
        let cut = Inflation::named(&tri, "cut").unwrap();
        let ghz = Pattern::parse(tri.shape(), "[000]+[111]").unwrap();
        let Refutation::Contradiction(c) = Refuter::new(&cut).refute(&ghz) else {
            panic!("GHZ not refuted by the cut");
        };
        vec![
            (
                "cut",
                to_inequality(&extract_certificate(&c, &cut, &ghz).unwrap(), &tri),
            ),
            ("I2", extracted("P2", "ring:6")),
            ("I3", three_event_p3()),
            ("I4", extracted("P4", "ring:6")),
            ("I5", extracted("P5", "spiral")),
        ]
    })
}

fn triangle_lp_inflations() -> &'static [(Inflation, Refuter)] {
    static L: OnceLock<Vec<(Inflation, Refuter)>> = OnceLock::new();
    L.get_or_init(|| {
        ["cut", "ring:6"]
            .iter()
            .map(|n| {
                let inf = Inflation::named(&Scenario::triangle(), n).unwrap();
                let r = Refuter::new(&inf);
                (inf, r)
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn refuter_agrees_with_sat_on_square_ring(i in 0usize..804) {
        let orbits = square_orbits();
        prop_assert_eq!(orbits.len(), 804);
        let (inf, refuter) = square_ring();
        let p = &orbits[i].representative;
        prop_assert_eq!(refuter.refute(p).is_contradiction(), sat_refutes(inf, p), "{}", p.to_literal());
    }

    #[test]
    fn lp_certificates_are_consistent(code in 1u64..256, seed in any::<u64>()) {
        let tri = Scenario::triangle();
        let pattern = Pattern::from_code(tri.shape().clone(), code);
        let dist = realizations_random(&pattern, &mut ChaCha8Rng::seed_from_u64(seed), 7).unwrap();
        for (inf, refuter) in triangle_lp_inflations() {
            let lp = build_ns_lp(inf, &dist).unwrap();
            match solve_feasibility(&lp) {
                Feasibility::Feasible(x) => {
                    prop_assert!(lp.is_feasible_point(&x));
                    // a probabilistic solution collapses to a possibilistic one
                    prop_assert!(!refuter.refute(&pattern).is_contradiction());
                }
                Feasibility::Infeasible(cert) => {
                    prop_assert!(cert.verify(&lp));
                    let ineq = farkas_to_inequality(&cert, &lp).unwrap();
                    prop_assert!(ineq.evaluate(&dist).unwrap() < BigRational::zero());
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn inequalities_hold_on_network_distributions(seed in any::<u64>()) {
        let p = network_local(&mut ChaCha8Rng::seed_from_u64(seed));
        for (name, ineq) in inequalities() {
            let value = ineq.evaluate(&p).unwrap();
            prop_assert!(value >= BigRational::zero(), "{} = {} at seed {}", name, value, seed);
        }
    }
}

#[allow(dead_code)]
pub fn suite() -> Vec<(&'static str, fn())> {
    vec![
        (
            "refuter vs SAT, all triangle orbits",
            refuter_agrees_with_sat_on_every_triangle_orbit,
        ),
        (
            "refuter vs SAT, 50 square orbits",
            refuter_agrees_with_sat_on_square_ring,
        ),
        (
            "Farkas certificates re-verified",
            lp_certificates_are_consistent,
        ),
        (
            "inequalities on 1000 network distributions",
            inequalities_hold_on_network_distributions,
        ),
    ]
}
