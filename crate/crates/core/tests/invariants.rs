use proptest::prelude::*;

use nangle_core::angulation::{decide_contractible_homotopy, is_n_angle, strip_units};
use nangle_core::goodness::{search_middling_extension, verify_middling, MiddlingDiagram};
use nangle_core::random::{self, seeded};
use nangle_core::smith::{is_invertible, smith_normal_form};
use nangle_core::solve::solve;
use nangle_core::{Matrix, NSigmaSequence, RingSpec, SequenceMorphism};

fn ring() -> impl Strategy<Value = RingSpec> {
    prop_oneof![
        (prop_oneof![Just(2u32), Just(3), Just(5), Just(7)]).prop_map(|p| RingSpec::z_mod_p2(p).unwrap()),
        (prop_oneof![Just(2u32), Just(3), Just(5), Just(7)]).prop_map(|p| RingSpec::dual_numbers(p).unwrap()),
    ]
}

/// A matrix over some ring, with entries given as raw integers.
fn matrix() -> impl Strategy<Value = Matrix> {
    (ring(), 0usize..5, 0usize..5).prop_flat_map(|(r, rows, cols)| {
        proptest::collection::vec(0i64..49, rows * cols).prop_map(move |ints| Matrix::from_ints(r, rows, cols, &ints).unwrap())
    })
}

/// An angulation frame: n = 4 or 6 always, odd n only where 2p = 0.
fn frame() -> impl Strategy<Value = (RingSpec, usize)> {
    (ring(), 4usize..8).prop_filter("parity", |(r, n)| n % 2 == 0 || r.two_p_vanishes())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smith_form_diagonalizes(m in matrix()) {
        let s = smith_normal_form(&m);
        prop_assert!(is_invertible(&s.left) && is_invertible(&s.right));
        prop_assert_eq!(&(&s.left * &m) * &s.right, s.diagonal_matrix());
        prop_assert_eq!(s.units + s.p_pivots + s.zeros, m.rows().min(m.cols()));
    }

    #[test]
    fn solutions_solve(m in matrix(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let ring = m.ring();
        let x0 = random::matrix(ring, m.cols(), 1, &mut rng);
        let b = &m * &x0;
        let b_vec: Vec<_> = (0..b.rows()).map(|i| b.get(i, 0)).collect();
        let space = solve(&m, &b_vec).unwrap();
        prop_assert!(space.count() > 0);
        let x = random::solution(ring, &space, &mut rng).unwrap();
        let xm = Matrix::from_entries(ring, x.len(), 1, x).unwrap();
        prop_assert_eq!(&m * &xm, b);
    }

    #[test]
    fn membership_is_conjugation_invariant((r, n) in frame(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = random::candidate(r, n, 2, &mut rng);
        let b = random::conjugate_randomly(&a, &mut rng);
        prop_assert_eq!(is_n_angle(&a), is_n_angle(&b));
    }

    #[test]
    fn rotation_round_trips((r, n) in frame(), seed in any::<u64>()) {
        let a = random::candidate(r, n, 2, &mut seeded(seed));
        prop_assert_eq!(a.rotate_left().rotate_right(), a.clone());
        prop_assert_eq!(is_n_angle(&a.rotate_left()), is_n_angle(&a));
    }

    #[test]
    fn members_strip_to_a_certificate((r, n) in frame(), seed in any::<u64>()) {
        let a = random::member(r, n, 3, &mut seeded(seed));
        let d = strip_units(&a).unwrap();
        prop_assert!(d.is_member());
        prop_assert!(a.is_exact().unwrap());
    }

    #[test]
    fn identity_cones_are_contractible((r, n) in frame(), seed in any::<u64>()) {
        let a = random::member(r, n, 2, &mut seeded(seed));
        let cone = SequenceMorphism::identity(&a).mapping_cone().unwrap();
        let h = decide_contractible_homotopy(&cone);
        prop_assert!(h.is_some_and(|h| h.verify(&cone)));
    }

    #[test]
    fn sequences_round_trip_through_json((r, n) in frame(), seed in any::<u64>()) {
        let a = random::candidate(r, n, 2, &mut seeded(seed));
        prop_assert_eq!(NSigmaSequence::from_json(&a.to_json()).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Found diagrams verify, repeat exactly and, for even n, verify transposed.
    #[test]
    fn middling_witnesses_verify(seed in any::<u64>()) {
        let r = RingSpec::z_mod_p2(2).unwrap();
        let phi = random::morphism(r, 4, 1, &mut seeded(seed));
        let (first, stats) = search_middling_extension(&phi, 1, 200_000).unwrap();
        let (again, stats_again) = search_middling_extension(&phi, 1, 200_000).unwrap();
        prop_assert_eq!(stats, stats_again);
        prop_assert_eq!(first.diagram(), again.diagram());
        if let Some(d) = first.diagram() {
            prop_assert!(verify_middling(d));
            prop_assert_eq!(&d.morphism(), &phi);
            prop_assert!(verify_middling(&d.transpose()));
            prop_assert_eq!(&MiddlingDiagram::from_json(&d.to_json()).unwrap(), d);
        }
    }
}
