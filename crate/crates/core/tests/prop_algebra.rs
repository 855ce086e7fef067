//! Semiring, marginalization and relabeling laws.

use std::sync::OnceLock;

use netposs::scenario::{
    collapse_scalar, evaluate_monomial, evaluate_monomial_possibility, marginalize,
    realizations_random, Monomial, Pattern, Possibility, Scenario, Semiring, Shape, Valuation,
};
use netposs::symmetry::RelabelingGroup;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn possibility() -> impl Strategy<Value = Possibility> {
    any::<bool>().prop_map(Possibility::from_bool)
}

fn nonneg() -> impl Strategy<Value = BigRational> {
    (0i64..20, 1i64..7).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

fn groups() -> &'static [(Scenario, RelabelingGroup)] {
    static G: OnceLock<Vec<(Scenario, RelabelingGroup)>> = OnceLock::new();
    G.get_or_init(|| {
        [Scenario::triangle(), Scenario::square()]
            .into_iter()
            .map(|s| {
                let g = RelabelingGroup::new(&s);
                (s, g)
            })
            .collect()
    })
}

/// A scenario index, two group elements and a pattern code.
fn group_case() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (0usize..2).prop_flat_map(|i| {
        let (s, g) = &groups()[i];
        let n = g.order();
        (Just(i), 0..n, 0..n, 1u64..(1u64 << s.joint_len()))
    })
}

proptest! {
    #[test]
    fn possibility_semiring_laws(a in possibility(), b in possibility(), c in possibility()) {
        prop_assert_eq!(a.plus(&b), b.plus(&a));
        prop_assert_eq!(a.times(&b), b.times(&a));
        prop_assert_eq!(a.plus(&b).plus(&c), a.plus(&b.plus(&c)));
        prop_assert_eq!(a.times(&b).times(&c), a.times(&b.times(&c)));
        prop_assert_eq!(a.times(&b.plus(&c)), a.times(&b).plus(&a.times(&c)));
        prop_assert_eq!(a.plus(&Possibility::nil()), a);
        prop_assert_eq!(a.times(&Possibility::unit()), a);
        prop_assert_eq!(a.times(&Possibility::nil()), Possibility::nil());
    }

    #[test]
    fn collapse_is_a_semiring_morphism(a in nonneg(), b in nonneg()) {
        prop_assert_eq!(collapse_scalar(&(&a + &b)), collapse_scalar(&a).plus(&collapse_scalar(&b)));
        prop_assert_eq!(collapse_scalar(&(&a * &b)), collapse_scalar(&a).times(&collapse_scalar(&b)));
        prop_assert_eq!(collapse_scalar(&BigRational::nil()), Possibility::nil());
        prop_assert_eq!(collapse_scalar(&BigRational::unit()), Possibility::unit());
    }

    #[test]
    fn marginalize_commutes_with_collapse(
        radices in prop::collection::vec(1usize..4, 1..4),
        subset_bits in 1u32..8,
        seed in any::<u64>(),
    ) {
        let shape = Shape::new(radices.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = rng.gen_range(1..(1u64 << shape.len().min(63)));
        let pattern = Pattern::from_code(shape.clone(), code);
        let p = realizations_random(&pattern, &mut rng, 9).unwrap();
        let positions: Vec<usize> = (0..radices.len()).filter(|i| subset_bits >> i & 1 == 1).collect();
        prop_assume!(!positions.is_empty());
        prop_assert_eq!(p.collapse(), pattern.clone());
        let lhs = p.marginalize(&positions).unwrap().collapse();
        let rhs = pattern.marginalize(&positions).unwrap();
        prop_assert_eq!(&lhs, &rhs);
        // the generic routine agrees with both
        let generic = marginalize(&shape, &pattern.possibilities(), &positions).unwrap();
        prop_assert_eq!(generic, rhs.possibilities());
    }

    #[test]
    fn monomials_commute_with_collapse(code in 1u64..256, seed in any::<u64>(), picks in prop::collection::vec((0usize..7, 0usize..8), 1..4),) {
        let tri = Scenario::triangle();
        let pattern = Pattern::from_code(tri.shape().clone(), code);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = realizations_random(&pattern, &mut rng, 9).unwrap();
        let subsets: [&[usize]; 7] = [&[0], &[1], &[2], &[0, 1], &[0, 2], &[1, 2], &[0, 1, 2]];
        let factors: Vec<Valuation> = picks
            .iter()
            .map(|&(s, o)| {
                let obs = subsets[s];
                Valuation::new(obs.iter().enumerate().map(|(k, &j)| (j, o >> k & 1))).unwrap()
            })
            .collect();
        let m = Monomial::new(factors).unwrap();
        prop_assert_eq!(
            collapse_scalar(&evaluate_monomial(&p, &m).unwrap()),
            evaluate_monomial_possibility(&pattern, &m).unwrap()
        );
    }

    #[test]
    fn relabeling_is_a_group_action((i, g, h, code) in group_case()) {
        let (s, group) = &groups()[i];
        let p = Pattern::from_code(s.shape().clone(), code);
        let (eg, eh) = (&group.elements()[g], &group.elements()[h]);
        let gh = eg.compose(eh);
        prop_assert!(group.position(&gh).is_some(), "closed under composition");
        prop_assert_eq!(gh.act_pattern(&p), eg.act_pattern(&eh.act_pattern(&p)));
        prop_assert_eq!(eg.inverse().act_pattern(&eg.act_pattern(&p)), p.clone());
        let id = netposs::symmetry::Relabeling::identity(s.outcomes());
        prop_assert_eq!(id.act_pattern(&p), p.clone());
        let q = eg.act_pattern(&p);
        prop_assert_eq!(q.count_ok(), p.count_ok());
        prop_assert_eq!(group.canonical(&q).unwrap(), group.canonical(&p).unwrap());
    }
}

#[test]
fn orbit_sizes_divide_group_order() {
    for (s, g) in groups() {
        let orbits = g.partition_into_orbits(24, false).unwrap();
        let total: usize = orbits.iter().map(|o| o.size).sum();
        assert_eq!(total, (1 << s.joint_len()) - 1);
        for o in &orbits {
            assert_eq!(g.order() % o.size, 0, "{}", o.representative.to_literal());
            assert_eq!(
                g.stabilizer(&o.representative).unwrap().len() * o.size,
                g.order()
            );
        }
    }
}

/// Every property above, callable from the acceptance run.
#[allow(dead_code)]
pub fn suite() -> Vec<(&'static str, fn())> {
    vec![
        ("semiring laws", possibility_semiring_laws),
        (
            "collapse is a semiring morphism",
            collapse_is_a_semiring_morphism,
        ),
        (
            "marginalize commutes with collapse",
            marginalize_commutes_with_collapse,
        ),
        (
            "monomials commute with collapse",
            monomials_commute_with_collapse,
        ),
        ("group action laws", relabeling_is_a_group_action),
        ("orbit sizes divide |G|", orbit_sizes_divide_group_order),
    ]
}
