use std::collections::BTreeMap;

use num_traits::Signed;
use proptest::prelude::*;
use qfa_core::arith::IntMatrix;
use qfa_core::coarse::verify_quasi_action;
use qfa_core::corpus::{lattice_noise, line_maps, noisy_lattice_action, translation_action};
use qfa_core::group::{enumerate_ball, FreeAbelian, Group, MatrixGroup, Word};
use qfa_core::pseudochar::{
    extend_index2, extract_end_fixing, homogenize, reflection_action, straighten_to_line, ExtractionConfig,
    Index2Extension,
};
use qfa_core::rational::{q, qr};
use qfa_core::Q;

fn noisy(seed: u64, slope: i64) -> impl Fn(i64) -> Q {
    move |x| q(slope * x + lattice_noise(seed, x, 0))
}

fn words(group: &impl Group, list: &[&str]) -> Vec<Word> {
    list.iter().map(|s| Word::parse(s, group.names()).unwrap()).collect()
}

fn affine(eps: i64, k: i64) -> IntMatrix {
    IntMatrix::from_rows(&[vec![eps, k], vec![0, 1]]).unwrap()
}

fn dihedral() -> MatrixGroup {
    MatrixGroup::new(vec!["r".into(), "t".into()], vec![affine(1, 1), affine(-1, 0)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn homogenizing_homomorphisms_is_exact(num in -9i64..9, den in 1i64..5, n in 1u64..64) {
        let c = qr(num, den);
        let h = homogenize(|k| Some(c * Q::from_integer(k as i64)), n, q(0)).unwrap();
        prop_assert_eq!(h.value, c);
        prop_assert_eq!(h.deviation, q(0));
    }

    #[test]
    fn homogenizing_twice_stays_within_the_error_bar(seed in any::<u64>(), g in 1i64..4, n in 4u64..24) {
        let f = noisy(seed, 3);
        let defect = q(6);
        let nn = n as i64;
        let once = |m: i64| homogenize(|k| Some(f(m * k as i64)), n, defect).unwrap();
        let h1 = once(g);
        let h2 = homogenize(|k| Some(once(g * k as i64).value), n, defect).unwrap();
        prop_assert!((h2.value - h1.value).abs() <= h1.error_bar);
        prop_assert!(h1.within_defect);
        prop_assert_eq!(h2.value, f(g * nn * nn) / q(nn * nn));
    }

    #[test]
    fn straightening_meets_the_sandwich(seed in any::<u64>()) {
        for m in line_maps(seed, 4) {
            let s = straighten_to_line(&m.graph, &m.rho, m.r, m.epsilon).unwrap();
            // Points with equal image are only R eps apart, so the bounds hold
            // at R eps (eps taken over the affine extension) and literally
            // when R = 1.
            let scaled = s.verify_scaled(&m.graph);
            prop_assert!(scaled.ok, "{:?}", scaled);
            if m.r == q(1) {
                let literal = s.verify(&m.graph);
                prop_assert!(literal.ok, "{:?}", literal);
            }
        }
    }

    #[test]
    fn extraction_sign_is_window_stable(seed in any::<u64>()) {
        let t = noisy_lattice_action(seed);
        let sample = words(&t.group, &["a", "b", "a b", "a^-1 b", "a^2"]);
        let config = ExtractionConfig { n: 32, ..ExtractionConfig::default() };
        let ex = extract_end_fixing(&t, &q(0), &sample[0], &sample, &config).unwrap();
        for v in &ex.values {
            prop_assert_eq!(v.chi.signum(), v.chi_shifted.signum(), "{}", v.element);
        }
        prop_assert!(ex.elliptic_zero_check);
    }

    #[test]
    fn extracted_values_are_homogeneous_on_translations(step in 1i64..5, k in 2i64..5) {
        let t = translation_action(step);
        let sample = vec![Word::generator(1), Word::power(1, k), Word::generator(0)];
        let config = ExtractionConfig { n: 16, ..ExtractionConfig::default() };
        let ex = extract_end_fixing(&t, &q(0), &sample[0], &sample, &config).unwrap();
        prop_assert_eq!(ex.values[1].chi_bar, q(k) * ex.values[0].chi_bar);
        prop_assert_eq!(ex.values[2].chi_bar, q(0));
    }

    #[test]
    fn index_two_extension_respects_its_bound(seed in any::<u64>(), c in -3i64..4) {
        let z = FreeAbelian::new(1);
        let noise = noisy(seed, c);
        let f: BTreeMap<Vec<i64>, Q> = (-30..=30).map(|n| (vec![2 * n], noise(n))).collect();
        let sample: Vec<Vec<i64>> = (-10..=10).map(|n| vec![2 * n]).collect();
        let ext = extend_index2(&z, |x: &Vec<i64>| x[0] % 2 == 0, &f, &vec![1], &sample).unwrap();
        match ext {
            Index2Extension::Extended { fbar, bound, bound_holds, .. } => {
                prop_assert!(bound_holds);
                prop_assert!(fbar.measured_defect <= bound);
            }
            Index2Extension::Twisted { .. } => prop_assert!(false, "Z is abelian"),
        }
    }

    #[test]
    fn reflection_actions_pass_at_their_constants(seed in any::<u64>(), c in -3i64..4) {
        let g = dihedral();
        let odd = |k: i64| c * k + lattice_noise(seed, k, 1) - lattice_noise(seed, -k, 1);
        let f_t: BTreeMap<IntMatrix, Q> = (-40..=40).map(|k| (affine(1, k), q(odd(k)))).collect();
        let rotation = |m: &IntMatrix| m.to_i64_rows().unwrap()[0][0] == 1;
        let refl = reflection_action(g.clone(), rotation, f_t, affine(-1, 0)).unwrap();
        let sample = enumerate_ball(&g, 3).into_iter().map(|(_, w)| w).collect();
        let table = refl.table.with_sample(sample, (-3..=3).map(q).collect());
        let r = verify_quasi_action(&table).unwrap();
        prop_assert!(r.ok, "{:?}", r);
        prop_assert!(r.defect <= table.claimed_c);
    }
}
