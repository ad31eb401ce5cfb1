use splitorder_core::bridge::{
    convert_system, iterated_integral_identity, rho, rho_by_transposition, rho_word, theta, verify_hoffman_iso,
};
use splitorder_core::ring::{q, qi, Q};
use splitorder_core::scheme::{builtin, Interpretation};
use splitorder_core::series::{QWordPoly, WordPoly};
use splitorder_core::words::{Alphabet, Weight};

fn wp(al: &Alphabet, terms: &[(&str, Q)]) -> QWordPoly {
    let mut p = WordPoly::default();
    for (s, c) in terms {
        p.add_term(al.parse_word(s).unwrap(), c.clone());
    }
    p
}

#[test]
fn rho_displays() {
    let al = Alphabet::new(&["a"], &["A"]).unwrap();
    let r = |s: &str| rho_word(&al, &al.parse_word(s).unwrap());
    assert_eq!(r("AA"), wp(&al, &[("AA", qi(1)), ("A*", q(-1, 2))]));
    assert_eq!(r("aAAA"), wp(&al, &[("aAAA", qi(1)), ("aA*A", q(-1, 2)), ("aAA*", q(-1, 2))]));
    assert_eq!(
        r("AAAA"),
        wp(&al, &[("AAAA", qi(1)), ("A*AA", q(-1, 2)), ("AA*A", q(-1, 2)), ("AAA*", q(-1, 2)), ("A*A*", q(1, 4))])
    );
    let two = Alphabet::new(&[] as &[&str], &["A", "B"]).unwrap();
    assert_eq!(rho_word(&two, &two.parse_word("AB").unwrap()), wp(&two, &[("AB", qi(1))]));
}

#[test]
fn closed_form_matches_transposition() {
    let al = Alphabet::new(&["a"], &["A", "B"]).unwrap();
    for w in al.enumerate_words(al.extended_set(), Weight::from_int(2)).unwrap() {
        assert_eq!(rho_word(&al, &w), rho_by_transposition(&al, &w).unwrap(), "{}", al.render(&w));
    }
}

#[test]
fn theta_and_rho_are_transposed() {
    // (θ(u), w) = (u, ρ(w)) for all star words u and extended words w.
    let al = Alphabet::new(&["a"], &["A"]).unwrap();
    let t = Weight::parse("3/2").unwrap();
    let us = al.enumerate_words(al.star_set(), t).unwrap();
    let ws = al.enumerate_words(al.extended_set(), t).unwrap();
    for u in &us {
        let tu = theta(&al, &QWordPoly::word(u.clone()));
        for w in &ws {
            assert_eq!(tu.get(w), rho(&al, &QWordPoly::word(w.clone())).get(u));
        }
    }
}

#[test]
fn hoffman_isomorphism() {
    let al = Alphabet::new(&["a"], &["A"]).unwrap();
    let no_bar = al.strat_set();
    assert!(verify_hoffman_iso(&al, no_bar, Weight::from_int(2)).unwrap().is_empty());
    let two = Alphabet::new(&["a"], &["A", "B"]).unwrap();
    assert!(verify_hoffman_iso(&two, two.extended_set(), Weight::from_int(2)).unwrap().is_empty());
}

#[test]
fn identities() {
    let al = Alphabet::new(&["a"], &["A"]).unwrap();
    assert_eq!(iterated_integral_identity(&al, &al.parse_word("AA").unwrap()), "I_AA = J_AA - (1/2)J_A*");
}

#[test]
fn conversion() {
    let spec = builtin("counterexample").unwrap();
    let c = convert_system(&spec, Some(true)).unwrap();
    assert_eq!(c.corrections.len(), 1);
    assert!(c.corrections[0].1.contains("-(1/2)"));
    let strat = spec.with_interpretation(Interpretation::Stratonovich);
    assert_eq!(convert_system(&strat, None).unwrap_err().to_string().contains("ito→strat only"), true);
}
