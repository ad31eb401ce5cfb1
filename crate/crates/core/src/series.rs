//! Word polynomials and truncated word series: convolution, shuffle and
//! quasishuffle products, pairing, relation checks, exponentials and the
//! Lyndon (Radford) canonical form.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::{HPoly, Monomial, Poly};
use crate::ring::{factorial, pow_q, Coeff, Q};
use crate::words::{Alphabet, LetterKind, LetterSet, Weight, Word};

/// Finitely supported linear combination of words.
#[derive(Clone, Debug, PartialEq)]
pub struct WordPoly<C: Coeff> {
    terms: BTreeMap<Word, C>,
}

impl<C: Coeff> Default for WordPoly<C> {
    fn default() -> Self {
        WordPoly { terms: BTreeMap::new() }
    }
}

impl<C: Coeff> WordPoly<C> {
    pub fn word(w: Word) -> Self {
        Self::term(w, C::one_elem())
    }

    pub fn term(w: Word, c: C) -> Self {
        let mut p = WordPoly::default();
        p.add_term(w, c);
        p
    }

    pub fn add_term(&mut self, w: Word, c: C) {
        if c.is_zero_elem() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(x) => {
                x.accumulate(&c);
                if x.is_zero_elem() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (w, c) in &o.terms {
            r.add_term(w.clone(), c.clone());
        }
        r
    }

    pub fn scale(&self, x: &C) -> Self {
        let mut r = WordPoly::default();
        for (w, c) in &self.terms {
            r.add_term(w.clone(), c.times(x));
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&C::one_elem().negated()))
    }

    pub fn get(&self, w: &Word) -> C {
        self.terms.get(w).cloned().unwrap_or_else(C::zero_elem)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Concatenation product.
    pub fn concat(&self, o: &Self) -> Self {
        let mut r = WordPoly::default();
        for (u, a) in &self.terms {
            for (v, b) in &o.terms {
                r.add_term(u.concat(v), a.times(b));
            }
        }
        r
    }

    pub fn max_word(&self) -> Option<&Word> {
        self.terms.keys().next_back()
    }

    pub fn render(&self, al: &Alphabet, coeff: impl Fn(&C) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut ws: Vec<&Word> = self.terms.keys().collect();
        ws.sort_by(|u, v| v.len().cmp(&u.len()).then_with(|| u.cmp(v)));
        let mut s = String::new();
        for (i, w) in ws.into_iter().enumerate() {
            let t = coeff(&self.terms[w]);
            let body = al.render(w);
            let item = if t == "1" {
                body
            } else if t == "-1" {
                format!("-{body}")
            } else if t.starts_with('-') {
                format!("-({}){body}", &t[1..])
            } else {
                format!("({t}){body}")
            };
            if i == 0 {
                s.push_str(&item);
            } else if let Some(rest) = item.strip_prefix('-') {
                s.push_str(" - ");
                s.push_str(rest);
            } else {
                s.push_str(" + ");
                s.push_str(&item);
            }
        }
        s
    }
}

pub type QWordPoly = WordPoly<Q>;

pub fn render_qwp(al: &Alphabet, p: &QWordPoly) -> String {
    p.render(al, crate::ring::fmt_q)
}

fn counts_to_poly(m: HashMap<Word, i64>) -> QWordPoly {
    let mut p = WordPoly::default();
    for (w, c) in m {
        p.add_term(w, Q::from_integer(c.into()));
    }
    p
}

fn grow(map: &HashMap<Word, i64>, letter: u8, into: &mut HashMap<Word, i64>) {
    for (w, c) in map {
        let mut x = w.clone();
        x.push(letter);
        *into.entry(x).or_insert(0) += c;
    }
}

/// Interleavings of `u` and `v`, computed by the right-recursion
/// `uℓ ⧢ vm = (uℓ ⧢ v)m + (u ⧢ vm)ℓ`.
pub fn shuffle(u: &Word, v: &Word) -> QWordPoly {
    counts_to_poly(product_table(u, v, |_, _| None))
}

/// Shuffle with the bracket `[A,A] = Ā` for equal stochastic letters.
pub fn quasishuffle(al: &Alphabet, u: &Word, v: &Word) -> QWordPoly {
    counts_to_poly(product_table(u, v, |l, m| {
        (l == m && al.kind(l) == LetterKind::Stochastic).then(|| al.barred(l))
    }))
}

fn product_table(u: &Word, v: &Word, bracket: impl Fn(u8, u8) -> Option<u8>) -> HashMap<Word, i64> {
    let (n, m) = (u.len(), v.len());
    let mut t: Vec<Vec<HashMap<Word, i64>>> = vec![vec![HashMap::new(); m + 1]; n + 1];
    for i in 0..=n {
        for j in 0..=m {
            if i == 0 || j == 0 {
                let w = if i == 0 { v.slice(0, j) } else { u.slice(0, i) };
                t[i][j].insert(w, 1);
                continue;
            }
            let mut cell = HashMap::new();
            let (l, r) = (u.ids()[i - 1], v.ids()[j - 1]);
            grow(&t[i][j - 1], r, &mut cell);
            grow(&t[i - 1][j], l, &mut cell);
            if let Some(b) = bracket(l, r) {
                grow(&t[i - 1][j - 1], b, &mut cell);
            }
            t[i][j] = cell;
        }
    }
    std::mem::take(&mut t[n][m])
}

fn bilinear(p: &QWordPoly, q: &QWordPoly, f: impl Fn(&Word, &Word) -> QWordPoly) -> QWordPoly {
    let mut r = WordPoly::default();
    for (u, a) in p.terms() {
        for (v, b) in q.terms() {
            for (w, c) in f(u, v).terms() {
                r.add_term(w.clone(), c * a * b);
            }
        }
    }
    r
}

pub fn shuffle_poly(p: &QWordPoly, q: &QWordPoly) -> QWordPoly {
    bilinear(p, q, shuffle)
}

pub fn quasishuffle_poly(al: &Alphabet, p: &QWordPoly, q: &QWordPoly) -> QWordPoly {
    bilinear(p, q, |u, v| quasishuffle(al, u, v))
}

/// Graded word series materialized up to a truncation weight.
#[derive(Clone, Debug)]
pub struct FreeSeries<C: Coeff> {
    alphabet: Arc<Alphabet>,
    trunc: Weight,
    coeffs: BTreeMap<Word, C>,
}

impl<C: Coeff> FreeSeries<C> {
    pub fn new(alphabet: Arc<Alphabet>, trunc: Weight) -> Self {
        FreeSeries { alphabet, trunc, coeffs: BTreeMap::new() }
    }

    pub fn unit(alphabet: Arc<Alphabet>, trunc: Weight) -> Self {
        let mut s = Self::new(alphabet, trunc);
        s.set(Word::empty(), C::one_elem());
        s
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn truncation(&self) -> Weight {
        self.trunc
    }

    pub fn get(&self, w: &Word) -> C {
        self.coeffs.get(w).cloned().unwrap_or_else(C::zero_elem)
    }

    /// Stores a coefficient; words above the truncation are dropped.
    pub fn set(&mut self, w: Word, c: C) {
        if self.alphabet.weight(&w) > self.trunc {
            return;
        }
        if c.is_zero_elem() {
            self.coeffs.remove(&w);
        } else {
            self.coeffs.insert(w, c);
        }
    }

    pub fn add_to(&mut self, w: Word, c: &C) {
        let cur = self.get(&w);
        self.set(w, cur.plus(c));
    }

    pub fn support(&self) -> impl Iterator<Item = (&Word, &C)> {
        self.coeffs.iter()
    }

    /// Support sorted by (weight, lexicographic).
    pub fn sorted_support(&self) -> Vec<(&Word, &C)> {
        let mut v: Vec<_> = self.coeffs.iter().collect();
        v.sort_by(|a, b| self.alphabet.word_order(a.0, b.0));
        v
    }

    pub fn map<D: Coeff>(&self, mut f: impl FnMut(&Word, &C) -> D) -> FreeSeries<D> {
        let mut out = FreeSeries::new(self.alphabet.clone(), self.trunc);
        for (w, c) in &self.coeffs {
            out.set(w.clone(), f(w, c));
        }
        out
    }

    pub fn equals_up_to_truncation(&self, o: &Self) -> bool {
        let t = self.trunc.min(o.trunc);
        let al = &self.alphabet;
        let keys: std::collections::BTreeSet<&Word> = self.coeffs.keys().chain(o.coeffs.keys()).collect();
        keys.into_iter().filter(|w| al.weight(w) <= t).all(|w| self.get(w) == o.get(w))
    }

    fn same_alphabet(&self, o: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.alphabet, &o.alphabet) || self.alphabet == o.alphabet {
            Ok(())
        } else {
            Err(Error::Input("series over different alphabets".into()))
        }
    }

    /// Convolution (concatenation) product: coefficient of w is the sum over
    /// deconcatenations w = uv of S_u T_v.
    pub fn convolve(&self, o: &Self) -> Result<Self> {
        self.same_alphabet(o)?;
        let trunc = self.trunc.min(o.trunc);
        let al = &self.alphabet;
        let mut acc: BTreeMap<Word, C> = BTreeMap::new();
        for (u, a) in &self.coeffs {
            let wu = al.weight(u);
            if wu > trunc {
                continue;
            }
            for (v, b) in &o.coeffs {
                if wu + al.weight(v) > trunc {
                    continue;
                }
                let p = a.times(b);
                match acc.entry(u.concat(v)) {
                    std::collections::btree_map::Entry::Occupied(mut e) => e.get_mut().accumulate(&p),
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(p);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero_elem());
        Ok(FreeSeries { alphabet: self.alphabet.clone(), trunc, coeffs: acc })
    }

    /// `(S, p) = Σ S_w p_w`.
    pub fn pairing(&self, p: &QWordPoly) -> Result<C> {
        let mut out = C::zero_elem();
        for (w, c) in p.terms() {
            if self.alphabet.weight(w) > self.trunc {
                return Err(Error::Truncation(format!(
                    "pairing needs word {} of weight {} above truncation {}",
                    self.alphabet.render(w),
                    self.alphabet.weight(w),
                    self.trunc
                )));
            }
            out.accumulate(&self.get(w).scaled(c));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct Violation<C> {
    pub u: Word,
    pub v: Word,
    pub lhs: C,
    pub rhs: C,
}

/// Checks `(S, u*v) = (S,u)(S,v)` over all nonempty pairs of words over
/// `letters` whose weights sum to at most the truncation.
fn check_relations<C: Coeff>(
    s: &FreeSeries<C>,
    letters: LetterSet,
    product: impl Fn(&Word, &Word) -> QWordPoly,
) -> Result<Vec<Violation<C>>> {
    if s.get(&Word::empty()) != C::one_elem() {
        return Err(Error::Input("relation check needs a series with unit constant term".into()));
    }
    let al = s.alphabet();
    let words = al.enumerate_words(letters, s.truncation())?;
    let mut out = Vec::new();
    for (i, u) in words.iter().enumerate().skip(1) {
        let wu = al.weight(u);
        for v in &words[i..] {
            if wu + al.weight(v) > s.truncation() {
                continue;
            }
            let lhs = s.pairing(&product(u, v))?;
            let rhs = s.get(u).times(&s.get(v));
            if lhs != rhs {
                out.push(Violation { u: u.clone(), v: v.clone(), lhs, rhs });
            }
        }
    }
    Ok(out)
}

pub fn check_shuffle_relations<C: Coeff>(s: &FreeSeries<C>, letters: LetterSet) -> Result<Vec<Violation<C>>> {
    check_relations(s, letters, shuffle)
}

pub fn check_quasishuffle_relations<C: Coeff>(
    s: &FreeSeries<C>,
    letters: LetterSet,
) -> Result<Vec<Violation<C>>> {
    let al = s.alphabet().clone();
    check_relations(s, letters, |u, v| quasishuffle(&al, u, v))
}

/// `exp(λ h g)` under concatenation, truncated. Coefficients are
/// polynomials in h.
pub fn exp_concat(al: Arc<Alphabet>, g: &QWordPoly, lambda: &Q, trunc: Weight) -> Result<FreeSeries<HPoly>> {
    for (w, _) in g.terms() {
        if w.is_empty() {
            return Err(Error::Input("generator must not contain the empty word".into()));
        }
        let wt = al.weight(w);
        if !wt.is_integer() {
            return Err(Error::Input(format!(
                "generator word {} has non-integer weight {}",
                al.render(w),
                wt
            )));
        }
    }
    let mut out = FreeSeries::unit(al.clone(), trunc);
    let mut power = QWordPoly::word(Word::empty());
    let mut k = 0u32;
    loop {
        k += 1;
        let mut next = WordPoly::default();
        for (u, a) in power.terms() {
            for (v, b) in g.terms() {
                let w = u.concat(v);
                if al.weight(&w) <= trunc {
                    next.add_term(w, a * b);
                }
            }
        }
        if next.is_zero() {
            break;
        }
        let scale = pow_q(lambda, k) / factorial(k);
        for (w, c) in next.terms() {
            out.add_to(w.clone(), &HPoly::monomial(c * &scale, k));
        }
        power = next;
    }
    Ok(out)
}

/// Polynomial in Lyndon-word indeterminates.
pub type LyndonPoly = Poly<Word>;

/// Memoized Radford canonical form: each word as a polynomial in its
/// Lyndon words under the shuffle product. Not shared across threads.
#[derive(Default)]
pub struct Canonicalizer {
    cache: HashMap<Word, Arc<LyndonPoly>>,
}

impl Canonicalizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn word(&mut self, w: &Word) -> Result<Arc<LyndonPoly>> {
        if let Some(p) = self.cache.get(w) {
            return Ok(p.clone());
        }
        let p = if w.is_empty() {
            Poly::constant(Q::from_integer(1.into()))
        } else {
            let factors = w.lyndon_factorization()?;
            if factors.len() == 1 {
                Poly::var(w.clone())
            } else {
                // L1 ⧢ ... ⧢ Lk has w as its largest word; peel it off.
                let mut sh = QWordPoly::word(Word::empty());
                let mut mono = Monomial::one();
                for f in &factors {
                    sh = shuffle_poly(&sh, &QWordPoly::word(f.clone()));
                    mono = mono.mul(&Monomial::var(f.clone()));
                }
                let lead = sh.get(w);
                debug_assert_eq!(sh.max_word(), Some(w));
                let mut acc = LyndonPoly::term(mono, Q::from_integer(1.into()));
                for (u, c) in sh.terms() {
                    if u != w {
                        let cu = self.word(u)?;
                        acc.add_scaled(&cu, &(-c));
                    }
                }
                acc.scaled(&(Q::from_integer(1.into()) / lead))
            }
        };
        let p = Arc::new(p);
        self.cache.insert(w.clone(), p.clone());
        Ok(p)
    }

    pub fn canonicalize(&mut self, p: &QWordPoly) -> Result<LyndonPoly> {
        let mut out = LyndonPoly::default();
        for (w, c) in p.terms() {
            if c.is_zero() {
                continue;
            }
            let cw = self.word(w)?;
            out.add_scaled(&cw, c);
        }
        Ok(out)
    }
}

/// Shuffle-evaluation of a Lyndon polynomial back into words.
pub fn expand_lyndon_poly(p: &LyndonPoly) -> QWordPoly {
    p.eval(|l: &Word| ShuffleWp(QWordPoly::word(l.clone()))).0
}

/// Word polynomials under the shuffle product, as a coefficient ring.
#[derive(Clone, Debug, PartialEq)]
pub struct ShuffleWp(pub QWordPoly);

impl Coeff for ShuffleWp {
    fn zero_elem() -> Self {
        ShuffleWp(WordPoly::default())
    }
    fn one_elem() -> Self {
        ShuffleWp(WordPoly::word(Word::empty()))
    }
    fn is_zero_elem(&self) -> bool {
        self.0.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        ShuffleWp(self.0.add(&o.0))
    }
    fn times(&self, o: &Self) -> Self {
        ShuffleWp(shuffle_poly(&self.0, &o.0))
    }
    fn negated(&self) -> Self {
        ShuffleWp(self.0.scale(&Q::from_integer((-1).into())))
    }
    fn from_q(x: &Q) -> Self {
        ShuffleWp(WordPoly::term(Word::empty(), x.clone()))
    }
}
