use std::sync::Arc;

use splitorder_core::expectation::{
    check_hypothesis, exact_expectation, expected_i, expected_j, expected_scheme_series, factorized_expectation,
    generator, moment,
};
use splitorder_core::poly::HPoly;
use splitorder_core::ring::{factorial, pow_q, q, qi, Coeff, Q};
use splitorder_core::scheme::{builtin, Interpretation, CATALOG};
use splitorder_core::series::{check_shuffle_relations, exp_concat};
use splitorder_core::words::{Alphabet, LetterKind, Weight, Word};

fn hp(c: Q, k: u32) -> HPoly {
    HPoly::monomial(c, k)
}

/// E J_w over [0, λh] from the pairing rule: count ways of cutting w into
/// deterministic letters and AA pairs (at most one), each pair carrying 1/2.
fn expected_j_oracle(al: &Alphabet, w: &[u8], lambda: &Q) -> HPoly {
    fn walk(al: &Alphabet, w: &[u8]) -> Option<(u32, u32)> {
        match w {
            [] => Some((0, 0)),
            [x, rest @ ..] if al.kind(*x) != LetterKind::Stochastic => walk(al, rest).map(|(n, p)| (n + 1, p)),
            [x, y, rest @ ..] if x == y => walk(al, rest).map(|(n, p)| (n + 1, p + 1)),
            _ => None,
        }
    }
    match walk(al, w) {
        None => HPoly::default(),
        Some((n, p)) => hp(pow_q(lambda, n) / factorial(n) / pow_q(&qi(2), p), n),
    }
}

#[test]
fn expected_j_values() {
    let al = Alphabet::new(&["a"], &["A"]).unwrap();
    let w = |s: &str| al.parse_word(s).unwrap();
    assert_eq!(expected_j(&al, &w("AA"), &qi(1)), hp(q(1, 2), 1));
    assert_eq!(expected_j(&al, &w("AAAA"), &qi(1)), hp(q(1, 8), 2));
    assert!(expected_j(&al, &w("AAA"), &qi(1)).is_zero_elem());
}

#[test]
fn expected_i_values() {
    let al = Alphabet::new(&["a"], &["A"]).unwrap();
    let w = |s: &str| al.parse_word(s).unwrap();
    assert_eq!(expected_i(&al, &w("A^"), &qi(1)), hp(qi(1), 1));
    assert_eq!(expected_i(&al, &w("aA^"), &qi(1)), hp(q(1, 2), 2));
    assert!(expected_i(&al, &w("A"), &qi(1)).is_zero_elem());
    assert_eq!(moment(&al, &[w("A"), w("A")], Interpretation::Ito, &qi(1)), hp(qi(1), 1));
    assert_eq!(moment(&al, &[w("A"), w("A")], Interpretation::Stratonovich, &qi(1)), hp(qi(1), 1));
    assert_eq!(moment(&al, &[w("aa")], Interpretation::Stratonovich, &qi(1)), hp(q(1, 2), 2));
}

#[test]
fn two_expectation_routes_agree() {
    let al = Arc::new(Alphabet::new(&["a"], &["A", "B"]).unwrap());
    let t = Weight::from_int(3);
    let lam = q(2, 3);
    for interp in [Interpretation::Stratonovich, Interpretation::Ito] {
        let g = generator(&al, al.strat_set(), interp);
        let e = exp_concat(al.clone(), &g, &lam, t).unwrap();
        let letters = match interp {
            Interpretation::Stratonovich => al.strat_set(),
            Interpretation::Ito => al.extended_set(),
        };
        for w in al.enumerate_words(letters, t).unwrap() {
            let direct = match interp {
                Interpretation::Stratonovich => expected_j(&al, &w, &lam),
                Interpretation::Ito => expected_i(&al, &w, &lam),
            };
            assert_eq!(e.get(&w), direct, "{}", al.render(&w));
            if interp == Interpretation::Stratonovich {
                assert_eq!(direct, expected_j_oracle(&al, w.ids(), &lam));
            }
        }
    }
}

#[test]
fn ito_expectations_are_shuffle_characters_strat_are_not() {
    let al = Arc::new(Alphabet::new(&["a"], &["A"]).unwrap());
    let t = Weight::from_int(3);
    let ito = exact_expectation(al.clone(), Interpretation::Ito, t).unwrap();
    assert!(check_shuffle_relations(&ito, al.extended_set()).unwrap().is_empty());
    let strat = exact_expectation(al.clone(), Interpretation::Stratonovich, Weight::from_int(2)).unwrap();
    let v = check_shuffle_relations(&strat, al.strat_set()).unwrap();
    let a = al.parse_word("A").unwrap();
    let at_aa = v.iter().find(|x| x.u == a && x.v == a).expect("violation at (A,A)");
    assert_eq!(at_aa.lhs, hp(qi(1), 1));
    assert!(at_aa.rhs.is_zero_elem());
}

#[test]
fn factorized_route_matches_general_moments() {
    let t = Weight::from_int(3);
    for name in CATALOG {
        for i in [Interpretation::Stratonovich, Interpretation::Ito] {
            let s = builtin(name).unwrap().with_interpretation(i).validate().unwrap();
            if !check_hypothesis(&s).holds {
                continue;
            }
            let general = expected_scheme_series(&s, t).unwrap();
            let fact = factorized_expectation(&s, t).unwrap();
            assert!(general.equals_up_to_truncation(&fact), "{name} {i}");
        }
    }
}

#[test]
fn exact_scheme_expectation_is_the_exponential() {
    let t = Weight::from_int(3);
    for i in [Interpretation::Stratonovich, Interpretation::Ito] {
        let s = builtin("exact").unwrap().with_interpretation(i).validate().unwrap();
        let e = expected_scheme_series(&s, t).unwrap();
        assert!(e.equals_up_to_truncation(&exact_expectation(s.alphabet.clone(), i, t).unwrap()));
    }
}

#[test]
fn counterexample_expectations() {
    let s = builtin("counterexample").unwrap().validate().unwrap();
    assert_eq!(s.interpretation, Interpretation::Ito);
    let e = expected_scheme_series(&s, Weight::ONE).unwrap();
    let al = &s.alphabet;
    let w = |x: &str| al.parse_word(x).unwrap();
    assert_eq!(e.get(&Word::empty()), HPoly::one_elem());
    assert!(e.get(&w("A")).is_zero_elem());
    assert_eq!(e.get(&w("a")), hp(qi(1), 1));
    assert_eq!(e.get(&w("AA")), hp(q(1, 2), 1));
    assert_eq!(e.get(&w("A^")), hp(qi(1), 1));
    assert_eq!(e.support().count(), 4);
    let hyp = check_hypothesis(&s);
    assert!(!hyp.holds);
    assert_eq!(hyp.overlaps.len(), 1);
}

#[test]
fn hypothesis_examples() {
    assert!(check_hypothesis(&builtin("strang-outer-a").unwrap().validate().unwrap()).holds);
    assert!(check_hypothesis(&builtin("strang-two-noise").unwrap().validate().unwrap()).holds);
}
