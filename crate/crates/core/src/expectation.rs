//! Expectations of iterated integrals, weak order conditions, the
//! non-overlap hypothesis, deterministic order and the weak order barrier.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::chen::{Atom, ChenEngine, Grid, IIPoly};
use crate::error::{Error, Result};
use crate::poly::HPoly;
use crate::ring::{factorial, fmt_q, pow_q, q, qi, Coeff, Q};
use crate::scheme::{Interpretation, Scheme};
use crate::series::{exp_concat, quasishuffle_poly, shuffle_poly, FreeSeries, QWordPoly};
use crate::words::{Alphabet, LetterKind, LetterSet, Weight, Word};

/// `E J_w` over an interval of length `λh`: zero unless `w` is a
/// concatenation of deterministic letters and pairs `AA`, in which case it is
/// `2^{-π} (λh)^{‖w‖} / ‖w‖!` with π the number of pairs. Starred letters
/// count as deterministic.
pub fn expected_j(al: &Alphabet, w: &Word, lambda: &Q) -> HPoly {
    let ids = w.ids();
    let mut pairs = 0u32;
    let mut i = 0;
    while i < ids.len() {
        if al.kind(ids[i]).is_deterministic() {
            i += 1;
        } else if i + 1 < ids.len() && ids[i + 1] == ids[i] {
            pairs += 1;
            i += 2;
        } else {
            return HPoly::default();
        }
    }
    let n = al.weight(w).as_integer().expect("paired words have integer weight");
    let c = pow_q(lambda, n) / factorial(n) / pow_q(&qi(2), pairs);
    HPoly::monomial(c, n)
}

/// `E I_w`: `(λh)^n/n!` when all n letters are deterministic (barred letters
/// included), zero otherwise.
pub fn expected_i(al: &Alphabet, w: &Word, lambda: &Q) -> HPoly {
    if !al.all_deterministic(w) {
        return HPoly::default();
    }
    let n = w.len() as u32;
    HPoly::monomial(pow_q(lambda, n) / factorial(n), n)
}

/// `E[Π J_{u_i}]` via the shuffle product, or `E[Π I_{u_i}]` via the
/// quasishuffle product.
pub fn moment(al: &Alphabet, words: &[Word], interp: Interpretation, lambda: &Q) -> HPoly {
    let mut p = QWordPoly::word(Word::empty());
    for u in words {
        let x = QWordPoly::word(u.clone());
        p = match interp {
            Interpretation::Stratonovich => shuffle_poly(&p, &x),
            Interpretation::Ito => quasishuffle_poly(al, &p, &x),
        };
    }
    let mut out = HPoly::default();
    for (w, c) in p.terms() {
        let e = match interp {
            Interpretation::Stratonovich => expected_j(al, w, lambda),
            Interpretation::Ito => expected_i(al, w, lambda),
        };
        out.accumulate(&e.scaled(c));
    }
    out
}

/// Generator whose concatenation exponential is the expected Chen series:
/// `Σa + (1/2)ΣAA` (Stratonovich) or `Σa + ΣĀ` (Ito), over the given
/// deterministic and stochastic letters.
pub fn generator(al: &Alphabet, letters: LetterSet, interp: Interpretation) -> QWordPoly {
    let mut g = QWordPoly::default();
    for id in letters.ids() {
        match (al.kind(id), interp) {
            (LetterKind::Deterministic, _) => g.add_term(Word::letter(id), Q::one()),
            (LetterKind::Stochastic, Interpretation::Stratonovich) => g.add_term(Word::from_ids(&[id, id]), q(1, 2)),
            (LetterKind::Stochastic, Interpretation::Ito) => g.add_term(Word::letter(al.barred(id)), Q::one()),
            _ => {}
        }
    }
    g
}

/// `exp(h 𝔊)`, the expected Chen series of the full system.
pub fn exact_expectation(al: Arc<Alphabet>, interp: Interpretation, trunc: Weight) -> Result<FreeSeries<HPoly>> {
    let g = generator(&al, al.strat_set(), interp);
    exp_concat(al, &g, &Q::one(), trunc)
}

/// Expectations of canonical coefficients. Atoms on different cells are
/// independent; atoms on one cell are handled by the shuffle moment formula
/// on the Stratonovich (starred) alphabet.
pub struct ExpectationEngine<'a> {
    alphabet: &'a Alphabet,
    grid: &'a Grid,
    cache: HashMap<(usize, Vec<(Word, u32)>), HPoly>,
}

impl<'a> ExpectationEngine<'a> {
    pub fn new(alphabet: &'a Alphabet, grid: &'a Grid) -> Self {
        ExpectationEngine { alphabet, grid, cache: HashMap::new() }
    }

    fn cell_moment(&mut self, cell: usize, atoms: Vec<(Word, u32)>) -> HPoly {
        let key = (cell, atoms);
        if let Some(e) = self.cache.get(&key) {
            return e.clone();
        }
        let words: Vec<Word> = key.1.iter().flat_map(|(w, e)| std::iter::repeat_n(w.clone(), *e as usize)).collect();
        let lam = self.grid.length(cell);
        let m = moment(self.alphabet, &words, Interpretation::Stratonovich, &lam);
        self.cache.insert(key, m.clone());
        m
    }

    pub fn expect(&mut self, p: &IIPoly) -> HPoly {
        let mut out = HPoly::default();
        for (mono, c) in p.terms() {
            let mut hpow = 0;
            let mut by_cell: Vec<(usize, Vec<(Word, u32)>)> = Vec::new();
            for (a, e) in &mono.0 {
                match a {
                    Atom::H => hpow += e,
                    Atom::X { cell, word } => {
                        let cell = *cell as usize;
                        match by_cell.iter_mut().find(|(k, _)| *k == cell) {
                            Some((_, v)) => v.push((word.clone(), *e)),
                            None => by_cell.push((cell, vec![(word.clone(), *e)])),
                        }
                    }
                }
            }
            let mut t = HPoly::monomial(c.clone(), hpow);
            for (cell, atoms) in by_cell {
                if t.is_zero_elem() {
                    break;
                }
                t = t.times(&self.cell_moment(cell, atoms));
            }
            out.accumulate(&t);
        }
        out
    }

    pub fn expect_series(&mut self, s: &FreeSeries<IIPoly>) -> FreeSeries<HPoly> {
        s.map(|_, c| self.expect(c))
    }
}

pub fn expected_scheme_series(scheme: &Scheme, trunc: Weight) -> Result<FreeSeries<HPoly>> {
    let mut eng = ChenEngine::for_scheme(scheme, trunc);
    let s = eng.scheme_series(scheme)?;
    let grid = eng.grid().clone();
    Ok(ExpectationEngine::new(&scheme.alphabet, &grid).expect_series(&s))
}

/// `Π exp(h(d_i - c_i)𝔊^{(i)})`, valid when the hypothesis holds.
pub fn factorized_expectation(scheme: &Scheme, trunc: Weight) -> Result<FreeSeries<HPoly>> {
    let al = scheme.alphabet.clone();
    let mut acc = FreeSeries::unit(al.clone(), trunc);
    for st in &scheme.stages {
        let g = generator(&al, st.letters, scheme.interpretation);
        acc = acc.convolve(&exp_concat(al.clone(), &g, &st.length(), trunc)?)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug)]
pub struct Overlap {
    pub letter: String,
    pub stages: (usize, usize),
}

#[derive(Clone, Debug)]
pub struct Hypothesis {
    pub holds: bool,
    pub overlaps: Vec<Overlap>,
    /// Per stochastic letter, the 1-based stages using it.
    pub usage: Vec<(String, Vec<usize>)>,
}

/// Whether, for every noise, the stages driven by it use disjoint time
/// intervals (so that stage expectations factorize).
pub fn check_hypothesis(scheme: &Scheme) -> Hypothesis {
    let al = &scheme.alphabet;
    let mut overlaps = Vec::new();
    let mut usage = Vec::new();
    for a in al.stochastic().ids() {
        let using: Vec<usize> = (0..scheme.stages.len()).filter(|&i| scheme.stages[i].letters.contains(a)).collect();
        for (x, &i) in using.iter().enumerate() {
            for &j in &using[x + 1..] {
                let (si, sj) = (&scheme.stages[i], &scheme.stages[j]);
                let lo = (&si.c).max(&sj.c);
                let hi = (&si.d).min(&sj.d);
                if lo < hi {
                    overlaps.push(Overlap { letter: al.letter(a).symbol.clone(), stages: (i + 1, j + 1) });
                }
            }
        }
        usage.push((al.letter(a).symbol.clone(), using.iter().map(|i| i + 1).collect()));
    }
    Hypothesis { holds: overlaps.is_empty(), overlaps, usage }
}

#[derive(Clone, Debug)]
pub struct WeakFailure {
    pub word: Word,
    pub scheme: HPoly,
    pub exact: HPoly,
    pub residual: HPoly,
}

#[derive(Clone, Debug)]
pub struct WeakOrder {
    pub order: u32,
    pub decided: bool,
    pub max_sigma: u32,
    pub failing: Vec<WeakFailure>,
    pub hypothesis: Hypothesis,
    pub expected_scheme: FreeSeries<HPoly>,
    pub expected_exact: FreeSeries<HPoly>,
}

/// Largest σ ≤ `max_sigma` such that expectations of scheme and exact
/// coefficients agree on all words of integer weight ≤ σ.
pub fn weak_order(scheme: &Scheme, max_sigma: u32) -> Result<WeakOrder> {
    let trunc = Weight::from_int(max_sigma);
    let al = scheme.alphabet.clone();
    let mut eng = ChenEngine::for_scheme(scheme, trunc);
    let approx = eng.scheme_series(scheme)?;
    let grid = eng.grid().clone();
    let expected_scheme = ExpectationEngine::new(&al, &grid).expect_series(&approx);
    let expected_exact = exact_expectation(al.clone(), scheme.interpretation, trunc)?;
    let mut first_fail: Option<Weight> = None;
    let mut failing = Vec::new();
    for w in al.enumerate_words(eng.full_letters(), trunc)? {
        let (a, b) = (expected_scheme.get(&w), expected_exact.get(&w));
        if a == b {
            continue;
        }
        let wt = al.weight(&w);
        if !wt.is_integer() {
            return Err(Error::Inconsistent(format!(
                "nonzero expectation residual at half-integer weight {wt} (word {})",
                al.render(&w)
            )));
        }
        if first_fail.is_none_or(|f| wt == f) {
            first_fail = Some(wt);
            failing.push(WeakFailure { residual: a.minus(&b), scheme: a, exact: b, word: w });
        }
    }
    let hypothesis = check_hypothesis(scheme);
    Ok(match first_fail {
        Some(f) => WeakOrder {
            order: f.as_integer().unwrap_or(0) - 1,
            decided: true,
            max_sigma,
            failing,
            hypothesis,
            expected_scheme,
            expected_exact,
        },
        None => WeakOrder {
            order: max_sigma,
            decided: false,
            max_sigma,
            failing,
            hypothesis,
            expected_scheme,
            expected_exact,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicOrder {
    pub order: u32,
    /// True when no discrepancy was found up to the cap.
    pub at_cap: bool,
}

/// Order of the scheme on the deterministic system obtained by replacing
/// each `dB_A` by `dt`: the product of stage exponentials against the
/// exponential of the full generator, on words of at most `max_order` letters.
pub fn deterministic_order(scheme: &Scheme, max_order: u32) -> Result<DeterministicOrder> {
    let al = scheme.alphabet.clone();
    // Each noise letter is replaced by its barred companion, a weight-one
    // deterministic letter.
    let proxy = |id: u8| if al.kind(id) == LetterKind::Stochastic { al.barred(id) } else { id };
    let gen_of = |set: LetterSet| {
        let mut g = QWordPoly::default();
        for id in set.ids() {
            g.add_term(Word::letter(proxy(id)), Q::one());
        }
        g
    };
    let trunc = Weight::from_int(max_order);
    let mut prod = FreeSeries::unit(al.clone(), trunc);
    for st in &scheme.stages {
        let e = exp_concat(al.clone(), &gen_of(st.letters), &st.length(), trunc)?;
        prod = prod.convolve(&e)?;
    }
    let exact = exp_concat(al.clone(), &gen_of(al.strat_set()), &Q::one(), trunc)?;
    let mut first: Option<usize> = None;
    let keys: std::collections::BTreeSet<Word> =
        prod.support().map(|(w, _)| w.clone()).chain(exact.support().map(|(w, _)| w.clone())).collect();
    for w in keys {
        if prod.get(&w) != exact.get(&w) {
            first = Some(first.map_or(w.len(), |f: usize| f.min(w.len())));
        }
    }
    Ok(match first {
        Some(n) => DeterministicOrder { order: n as u32 - 1, at_cap: false },
        None => DeterministicOrder { order: max_order, at_cap: true },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BarrierStatus {
    Respected,
    NotApplicable,
    Contradiction,
}

#[derive(Clone, Debug)]
pub struct Barrier {
    pub status: BarrierStatus,
    pub message: String,
}

/// Weak order of a genuine splitting satisfying the hypothesis cannot
/// reach 3; report a contradiction if the computation says otherwise.
pub fn barrier_check(scheme: &Scheme, weak: &WeakOrder) -> Barrier {
    let all = scheme.alphabet.strat_set();
    if !weak.hypothesis.holds {
        return Barrier {
            status: BarrierStatus::NotApplicable,
            message: "hypothesis violated; barrier theorem not applicable".into(),
        };
    }
    if scheme.stages.iter().any(|s| s.letters == all) {
        return Barrier {
            status: BarrierStatus::NotApplicable,
            message: "a stage integrates the full system; barrier theorem not applicable".into(),
        };
    }
    if weak.order >= 3 {
        return Barrier {
            status: BarrierStatus::Contradiction,
            message: format!("σ≥{} contradicts the weak order barrier σ≤2", weak.order),
        };
    }
    Barrier { status: BarrierStatus::Respected, message: format!("σ={}, barrier respected", weak.order) }
}

pub fn describe_lambda(l: &Q) -> String {
    if l.is_one() {
        "h".into()
    } else if l.is_zero() {
        "0".into()
    } else {
        format!("{}h", fmt_q(l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expected_j_examples() {
        let al = Alphabet::new(&["a"], &["A"]).unwrap();
        let w = |s: &str| al.parse_word(s).unwrap();
        assert_eq!(expected_j(&al, &w("AA"), &qi(1)), HPoly::monomial(q(1, 2), 1));
        assert_eq!(expected_j(&al, &w("AAAA"), &qi(1)), HPoly::monomial(q(1, 8), 2));
        assert!(expected_j(&al, &w("AAA"), &qi(1)).is_zero_elem());
        assert!(expected_j(&al, &w("AaA"), &qi(1)).is_zero_elem());
        assert_eq!(expected_j(&al, &w("aAA"), &q(1, 2)), HPoly::monomial(q(1, 16), 2));
    }

    #[test]
    fn expected_i_examples() {
        let al = Alphabet::new(&["a"], &["A"]).unwrap();
        let w = |s: &str| al.parse_word(s).unwrap();
        assert_eq!(expected_i(&al, &w("A^"), &qi(1)), HPoly::monomial(qi(1), 1));
        assert_eq!(expected_i(&al, &w("aA^"), &qi(1)), HPoly::monomial(q(1, 2), 2));
        assert!(expected_i(&al, &w("A"), &qi(1)).is_zero_elem());
    }

    #[test]
    fn moments() {
        let al = Alphabet::new(&["a"], &["A"]).unwrap();
        let w = |s: &str| al.parse_word(s).unwrap();
        let h = HPoly::monomial(qi(1), 1);
        assert_eq!(moment(&al, &[w("A"), w("A")], Interpretation::Ito, &qi(1)), h);
        assert_eq!(moment(&al, &[w("A"), w("A")], Interpretation::Stratonovich, &qi(1)), h);
        assert_eq!(moment(&al, &[w("aa")], Interpretation::Ito, &qi(1)), HPoly::monomial(q(1, 2), 2));
        // Fourth moment of a Gaussian with variance h.
        let four = moment(&al, &[w("A"), w("A"), w("A"), w("A")], Interpretation::Stratonovich, &qi(1));
        assert_eq!(four, HPoly::monomial(qi(3), 2));
    }
}
