use proptest::prelude::*;
use qfa_core::arith::{
    decompose_elementary, verify_commutator_identity, verify_stubbornness, ElementaryWord, IntMatrix,
};
use qfa_core::corpus::{random_elementary_word, rng, translation_action, two_star_action, two_stars};
use qfa_core::group::Word;
use qfa_core::qfa::{qfa_certificate, validate_certificate};
use qfa_core::Error;

fn triple(n: usize, a: usize, b: usize, c: usize) -> Option<(usize, usize, usize)> {
    let (i, j, k) = (a % n + 1, b % n + 1, c % n + 1);
    (i != j && j != k && i != k).then_some((i, j, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn decomposition_round_trips(seed in any::<u64>(), n in 3usize..5, len in 0usize..24) {
        let m = random_elementary_word(&mut rng(seed), n, len).eval().unwrap();
        prop_assert!(m.is_unimodular());
        let w = decompose_elementary(&m).unwrap();
        prop_assert_eq!(w.eval().unwrap(), m);
        prop_assert!(w.partial_products_unimodular().unwrap());
        prop_assert!(w.factors.iter().all(|(i, j, _)| i != j && *i <= n && *j <= n));
    }

    #[test]
    fn word_text_round_trips(seed in any::<u64>(), n in 3usize..6, len in 0usize..16) {
        let w = random_elementary_word(&mut rng(seed), n, len);
        prop_assert_eq!(ElementaryWord::parse(&w.to_text()).unwrap(), w);
    }

    #[test]
    fn commutator_and_stubbornness_identities(n in 3usize..6, a in 0usize..6, b in 0usize..6, c in 0usize..6, lambda in -50i64..50) {
        if let Some((i, j, k)) = triple(n, a, b, c) {
            prop_assert!(verify_commutator_identity(n, i, j, k, lambda).unwrap().equal);
            prop_assert!(verify_stubbornness(n, i, j, k, lambda).unwrap().equal);
        }
    }

    #[test]
    fn inverse_undoes_product(seed in any::<u64>(), n in 3usize..5) {
        let m = random_elementary_word(&mut rng(seed), n, 12).eval().unwrap();
        prop_assert!(m.mul(&m.inverse().unwrap()).is_identity());
    }

    #[test]
    fn certificates_validate_on_two_stars(a0 in 1usize..4, a1 in 1usize..4, h in 1usize..3, pick in any::<usize>()) {
        let stars = two_stars((a0, a1), h);
        let base = pick % stars.graph.vertex_count();
        let t = two_star_action(&stars);
        let tuple = [Word::generator(0), Word::generator(1)];
        let cert = qfa_certificate(&t, &base, &tuple, 16, 2, 64).unwrap();
        let check = validate_certificate(&cert, &t, &base).unwrap();
        prop_assert!(check.matches);
        prop_assert!(check.r_dominates);
        prop_assert!(check.s_moves_within_r);
        prop_assert!(cert.measured_orbit_diameter <= cert.orbit_diameter_bound);
    }

    #[test]
    fn translations_are_refused(step in 1i64..6) {
        let t = translation_action(step);
        let tuple = [Word::generator(0), Word::generator(1)];
        match qfa_certificate(&t, &qfa_core::rational::q(0), &tuple, 16, 2, 64) {
            Err(Error::Contract(msg)) => prop_assert!(msg.contains("generator b"), "{}", msg),
            other => prop_assert!(false, "{:?}", other.map(|c| c.r)),
        }
    }
}

#[test]
fn two_by_two_is_unsupported() {
    let m = IntMatrix::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
    assert!(matches!(decompose_elementary(&m), Err(Error::Unsupported(_))));
}

#[test]
fn wrong_determinant_is_rejected() {
    let m = IntMatrix::from_rows(&[vec![2, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
    assert!(decompose_elementary(&m).is_err());
}
