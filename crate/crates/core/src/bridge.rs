//! Translation between the Ito calculus on the extended alphabet (letters
//! a, A, Ā) and the Stratonovich calculus on the starred alphabet (a, A, A*).
//!
//! `theta` substitutes `A* -> Ā - (1/2)AA` letterwise. `rho` is its transpose
//! and expresses an Ito iterated integral through Stratonovich ones:
//! `I_w = Σ_u rho(w)_u J_u`.

use num_traits::One;

use crate::error::Result;
use crate::ring::{fmt_q, q, Q};
use crate::scheme::{Interpretation, SchemeSpec};
use crate::series::{quasishuffle, shuffle_poly, QWordPoly};
use crate::words::{Alphabet, LetterKind, LetterSet, Weight, Word};

/// Letterwise substitution, extended multiplicatively and linearly.
pub fn theta(al: &Alphabet, p: &QWordPoly) -> QWordPoly {
    let mut out = QWordPoly::default();
    for (w, c) in p.terms() {
        let mut acc = QWordPoly::term(Word::empty(), c.clone());
        for &id in w.ids() {
            let img = if al.kind(id) == LetterKind::Starred {
                let base = al.base(id).expect("starred letter has a base");
                let mut x = QWordPoly::word(Word::letter(al.barred(base)));
                x.add_term(Word::from_ids(&[base, base]), q(-1, 2));
                x
            } else {
                QWordPoly::word(Word::letter(id))
            };
            acc = acc.concat(&img);
        }
        out = out.add(&acc);
    }
    out
}

/// Closed form: every Ā becomes A*, and any set of r disjoint adjacent pairs
/// AA (same stochastic letter) becomes A* with weight (-1/2)^r.
pub fn rho_word(al: &Alphabet, w: &Word) -> QWordPoly {
    let ids: Vec<u8> = w
        .ids()
        .iter()
        .map(|&id| if al.kind(id) == LetterKind::Barred { al.starred(al.base(id).unwrap()) } else { id })
        .collect();
    let mut out = QWordPoly::default();
    fn go(al: &Alphabet, ids: &[u8], i: usize, cur: &mut Word, coef: Q, out: &mut QWordPoly) {
        if i == ids.len() {
            out.add_term(cur.clone(), coef);
            return;
        }
        cur.push(ids[i]);
        go(al, ids, i + 1, cur, coef.clone(), out);
        cur.0.pop();
        if i + 1 < ids.len() && ids[i] == ids[i + 1] && al.kind(ids[i]) == LetterKind::Stochastic {
            cur.push(al.starred(ids[i]));
            go(al, ids, i + 2, cur, coef * q(-1, 2), out);
            cur.0.pop();
        }
    }
    go(al, &ids, 0, &mut Word::empty(), Q::one(), &mut out);
    out
}

pub fn rho(al: &Alphabet, p: &QWordPoly) -> QWordPoly {
    let mut out = QWordPoly::default();
    for (w, c) in p.terms() {
        out = out.add(&rho_word(al, w).scale(c));
    }
    out
}

/// `rho(w)` read off the definition `(theta(S), w) = (S, rho(w))`: the
/// coefficient of `u` is the coefficient of `w` in `theta(u)`.
pub fn rho_by_transposition(al: &Alphabet, w: &Word) -> Result<QWordPoly> {
    let wt = al.weight(w);
    let mut out = QWordPoly::default();
    if w.is_empty() {
        return Ok(QWordPoly::word(Word::empty()));
    }
    let letters = al.star_set();
    for u in al.enumerate_words(letters, wt)? {
        if al.weight(&u) != wt {
            continue;
        }
        let c = theta(al, &QWordPoly::word(u.clone())).get(w);
        out.add_term(u, c);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct IsoViolation {
    pub u: Word,
    pub v: Word,
    pub lhs: QWordPoly,
    pub rhs: QWordPoly,
}

/// Checks `rho(u ⋈ v) = rho(u) ⧢ rho(v)` for all pairs of words over
/// `letters` (a subset of the extended alphabet) with total weight at most
/// `max`.
pub fn verify_hoffman_iso(al: &Alphabet, letters: LetterSet, max: Weight) -> Result<Vec<IsoViolation>> {
    let words = al.enumerate_words(letters, max)?;
    let mut out = Vec::new();
    for (i, u) in words.iter().enumerate() {
        for v in &words[i..] {
            if al.weight(u) + al.weight(v) > max {
                continue;
            }
            let lhs = rho(al, &quasishuffle(al, u, v));
            let rhs = shuffle_poly(&rho_word(al, u), &rho_word(al, v));
            if lhs != rhs {
                out.push(IsoViolation { u: u.clone(), v: v.clone(), lhs, rhs });
            }
        }
    }
    Ok(out)
}

/// `I_w = ...` as a combination of Stratonovich integrals.
pub fn iterated_integral_identity(al: &Alphabet, w: &Word) -> String {
    let r = rho_word(al, w);
    let rendered = r.render(al, fmt_q);
    let mut rhs = String::new();
    for tok in rendered.split(' ') {
        // Tokens are words with optional "(c)" prefix, or +/- separators.
        if tok == "+" || tok == "-" {
            rhs.push_str(&format!(" {tok} "));
            continue;
        }
        let (sign, rest) = tok.strip_prefix('-').map_or(("", tok), |r| ("-", r));
        let (coef, word) = match rest.find(')') {
            Some(i) if rest.starts_with('(') => (&rest[..=i], &rest[i + 1..]),
            _ => ("", rest),
        };
        rhs.push_str(&format!("{sign}{coef}J_{word}"));
    }
    format!("I_{} = {}", al.render(w), rhs)
}

/// Stratonovich form of an Ito system: one starred letter per noise with
/// drift field `-(1/2) f_A' f_A`.
#[derive(Clone, Debug)]
pub struct ConvertedSystem {
    pub deterministic: Vec<String>,
    pub stochastic: Vec<String>,
    pub corrections: Vec<(String, String)>,
    pub coincide: Option<bool>,
}

pub fn convert_system(spec: &SchemeSpec, additive_noise: Option<bool>) -> Result<ConvertedSystem> {
    if spec.interpretation != Interpretation::Ito {
        return Err(crate::Error::Input("conversion implemented ito→strat only".into()));
    }
    let al = Alphabet::new(&spec.alphabet.deterministic, &spec.alphabet.stochastic)?;
    let mut det = spec.alphabet.deterministic.clone();
    let mut corrections = Vec::new();
    for id in al.stochastic().ids() {
        let s = &al.letter(id).symbol;
        let star = al.letter(al.starred(id)).symbol.clone();
        det.push(star.clone());
        corrections.push((star, format!("f_{s}* = -(1/2) f_{s}' f_{s}")));
    }
    Ok(ConvertedSystem {
        deterministic: det,
        stochastic: spec.alphabet.stochastic.clone(),
        corrections,
        coincide: additive_noise,
    })
}
