use std::collections::BTreeSet;

use num_bigint::BigUint;
use pancake_core::classifier::{
    applicable_rules, build_generates_witness, classify, orbit_residues, prop1_certificate,
    prop2_certificate, verify_witness, Triple, Verdict,
};
use pancake_core::grouptest::{
    classify_order, factorial_big, find_nontrivial_block_system, generates_sym,
    generates_sym_screened, group_order, is_transitive, orbit_of, GeneratorSet, ThreeCycleOutcome,
};
use pancake_core::perm::Permutation;

fn oracle(t: Triple) -> bool {
    generates_sym(&t.generators()).unwrap()
}

#[test]
fn classifier_matches_oracle_up_to_12() {
    for n in 4..=12 {
        for t in Triple::all_of_degree(n) {
            if let Some(d) = classify(t).decision() {
                assert_eq!(d, oracle(t), "{t}");
            }
        }
    }
}

#[test]
fn screened_oracle_matches_plain_oracle() {
    for n in 4..=14 {
        for t in Triple::all_of_degree(n) {
            assert_eq!(
                generates_sym_screened(&t.generators()).unwrap(),
                oracle(t),
                "{t}"
            );
        }
    }
}

#[test]
fn exact_rules_agree_with_each_other_and_the_oracle() {
    for n in 4..=30 {
        for t in Triple::all_of_degree(n) {
            let rules = applicable_rules(t);
            let answers: BTreeSet<bool> = rules.iter().map(|r| r.1).collect();
            assert!(answers.len() <= 1, "{t}: {rules:?}");
            if let Some(&a) = answers.iter().next() {
                assert_eq!(a, generates_sym_screened(&t.generators()).unwrap(), "{t}");
            }
        }
    }
}

#[test]
fn negative_certificates_verify_up_to_30() {
    for n in 4..=30 {
        for t in Triple::all_of_degree(n) {
            if let Verdict::NotGenerates { certificate, .. } = classify(t) {
                let c = certificate.expect("certificate present");
                assert!(c.is_certified() && c.verify(&t.generators()), "{t}: {c:?}");
            }
        }
    }
}

#[test]
fn invariant_set_propositions_never_fire_on_generating_triples() {
    for n in 4..=24 {
        for t in Triple::all_of_degree(n) {
            if prop1_certificate(t).is_some() || prop2_certificate(t).is_some() {
                assert!(!generates_sym_screened(&t.generators()).unwrap(), "{t}");
            }
        }
    }
}

#[test]
fn witnesses_check_out_up_to_30() {
    let mut built = 0;
    for n in 4..=30 {
        for t in Triple::all_of_degree(n) {
            if classify(t).decision() != Some(true) {
                continue;
            }
            if let Some(w) = build_generates_witness(t).unwrap() {
                assert!(verify_witness(t, &w), "{t}");
                for e in &w.elements {
                    if let Some(word) = &e.word {
                        let letters: Vec<usize> =
                            word.split('.').map(|x| x.parse().unwrap()).collect();
                        let direct = letters.iter().fold(Permutation::identity(n), |acc, &i| {
                            acc.compose(&Permutation::reversal(n, i).unwrap()).unwrap()
                        });
                        assert_eq!(direct, e.element, "{t} {}", e.name);
                    }
                }
                built += 1;
            }
        }
    }
    assert!(built > 100);
}

#[test]
fn witness_refused_for_non_generating_triple() {
    let t = Triple::new(8, 6, 4).unwrap();
    assert!(build_generates_witness(t).is_err());
}

#[test]
fn orbit_of_one_stays_in_closed_form_residues() {
    for n in 5..=40 {
        for t in Triple::all_of_degree(n).filter(|t| t.k <= 3) {
            let residues = orbit_residues(t).unwrap();
            let orbit = orbit_of(&t.generators(), 1).unwrap();
            for x in orbit {
                assert!(residues.contains(&(x % t.gap())), "{t}: {x}");
            }
        }
    }
}

#[test]
fn primitive_groups_with_small_reversal_are_symmetric() {
    // r_2 is a transposition and r_3 = (1 3), so primitivity forces Sym_n.
    for n in 4..=10 {
        for t in Triple::all_of_degree(n).filter(|t| t.k <= 3) {
            let gens = t.generators();
            let primitive =
                is_transitive(&gens) && find_nontrivial_block_system(&gens).unwrap().is_none();
            if primitive {
                assert!(oracle(t), "{t}");
            }
        }
    }
}

#[test]
fn no_generating_triple_with_small_middle_index() {
    for n in 4..=12 {
        for t in Triple::all_of_degree(n).filter(|t| t.m <= n / 2) {
            assert!(!oracle(t), "{t}");
        }
    }
}

#[test]
fn known_group_orders() {
    let order =
        |n: usize, idx: &[usize]| group_order(&GeneratorSet::reversals(n, idx).unwrap()).unwrap();
    assert_eq!(order(7, &[7, 4, 2]), factorial_big(7));
    assert_eq!(order(4, &[4]), BigUint::from(2u32));
    // Every generator is even, so the group lies in the alternating group.
    let even = order(8, &[8, 5, 4]);
    assert_ne!(classify_order(8, &even), ThreeCycleOutcome::FullSym);
    assert_eq!((factorial_big(8) / 2u32) % &even, BigUint::from(0u32));
}

#[test]
fn alternating_group_is_recognised() {
    let n = 5;
    let gens = GeneratorSet::new(
        n,
        vec![
            Permutation::from_cycles(n, &[vec![1, 2, 3, 4, 5]]).unwrap(),
            Permutation::from_cycles(n, &[vec![1, 2, 3]]).unwrap(),
        ],
    )
    .unwrap();
    let order = group_order(&gens).unwrap();
    assert_eq!(order, BigUint::from(60u32));
    assert_eq!(classify_order(n, &order), ThreeCycleOutcome::Alternating);
}
