//! Chen series of schemes and exact flows with canonical random
//! coefficients.
//!
//! The step `[t0, t0+h]` is cut at every stage endpoint into elementary
//! cells. On each cell an iterated integral is rewritten, through the shuffle
//! relations, as a polynomial in Lyndon iterated integrals on that cell;
//! integrals over purely deterministic words become `(λh)^n/n!`. Coefficients
//! over longer intervals follow from Chen's relation, i.e. from convolution of
//! the cell series. Ito integrals are first rewritten as Stratonovich ones on
//! the starred alphabet.
//!
//! Two coefficients are treated as equal when their canonical polynomials
//! coincide. This is exact for sufficiency; reading inequality as a genuine
//! difference assumes the Lyndon atoms on disjoint cells are algebraically
//! independent.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::bridge::rho_word;
use crate::error::{Error, Result};
use crate::poly::{Monomial, Poly};
use crate::ring::{factorial, fmt_q, pow_q, Coeff, Q};
use crate::scheme::{Interpretation, Scheme, Stage};
use crate::series::{Canonicalizer, FreeSeries};
use crate::words::{Alphabet, LetterKind, LetterSet, Weight, Word};

/// Indeterminates of iterated-integral polynomials.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// The step size.
    H,
    /// Lyndon iterated integral over elementary cell `cell` (0-based).
    X { cell: u16, word: Word },
}

pub type IIPoly = Poly<Atom>;

/// Uncanonicalized iterated integral over `[t0 + c h, t0 + d h]`, used only
/// for display.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RawAtom {
    /// Position of the stage in the scheme; orders factors of a product.
    pub stage: u16,
    pub c: Q,
    pub d: Q,
    pub word: Word,
}

pub type RawPoly = Poly<RawAtom>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    points: Vec<Q>,
}

impl Grid {
    pub fn new(points: Vec<Q>) -> Result<Grid> {
        let ok = points.len() >= 2
            && points[0].is_zero()
            && points.last().is_some_and(|x| x.is_one())
            && points.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(Error::Input("grid must be strictly increasing from 0 to 1".into()));
        }
        Ok(Grid { points })
    }

    pub fn single() -> Grid {
        Grid { points: vec![Q::zero(), Q::one()] }
    }

    pub fn uniform(n: usize) -> Grid {
        let points = (0..=n).map(|i| Q::new((i as i64).into(), (n as i64).into())).collect();
        Grid { points }
    }

    pub fn of_scheme(s: &Scheme) -> Grid {
        Grid { points: s.breakpoints() }
    }

    pub fn points(&self) -> &[Q] {
        &self.points
    }

    pub fn cells(&self) -> usize {
        self.points.len() - 1
    }

    pub fn length(&self, k: usize) -> Q {
        &self.points[k + 1] - &self.points[k]
    }

    /// Cells covering `[c, d]`, when `c < d` are both breakpoints.
    pub fn cells_of(&self, c: &Q, d: &Q) -> Option<Range<usize>> {
        let i = self.points.iter().position(|p| p == c)?;
        let j = self.points.iter().position(|p| p == d)?;
        (i < j).then_some(i..j)
    }
}

/// `(λh)^n / n!` as an iterated-integral polynomial.
pub fn det_integral(lambda: &Q, n: u32) -> IIPoly {
    if n == 0 {
        return IIPoly::one_elem();
    }
    IIPoly::term(Monomial(vec![(Atom::H, n)]), pow_q(lambda, n) / factorial(n))
}

/// `ρ(w)`: the Stratonovich word polynomial on the starred alphabet whose
/// pairing with the Chen series `J★` gives `I_w`.
pub fn ito_canonical_embed(al: &Alphabet, w: &Word) -> crate::series::QWordPoly {
    rho_word(al, w)
}

/// Builds canonical Chen series for one scheme (or exact flow) on a fixed
/// grid. Holds memo tables; use one engine per thread.
pub struct ChenEngine {
    alphabet: Arc<Alphabet>,
    grid: Grid,
    interp: Interpretation,
    trunc: Weight,
    canon: Canonicalizer,
    strat_cell: HashMap<(usize, Word), IIPoly>,
    ito_cell: HashMap<(usize, Word), IIPoly>,
}

impl ChenEngine {
    pub fn new(alphabet: Arc<Alphabet>, grid: Grid, interp: Interpretation, trunc: Weight) -> ChenEngine {
        ChenEngine {
            alphabet,
            grid,
            interp,
            trunc,
            canon: Canonicalizer::new(),
            strat_cell: HashMap::new(),
            ito_cell: HashMap::new(),
        }
    }

    pub fn for_scheme(s: &Scheme, trunc: Weight) -> ChenEngine {
        ChenEngine::new(s.alphabet.clone(), Grid::of_scheme(s), s.interpretation, trunc)
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn interpretation(&self) -> Interpretation {
        self.interp
    }

    pub fn truncation(&self) -> Weight {
        self.trunc
    }

    /// Letters of the Stratonovich or extended Ito alphabet.
    pub fn full_letters(&self) -> LetterSet {
        match self.interp {
            Interpretation::Stratonovich => self.alphabet.strat_set(),
            Interpretation::Ito => self.alphabet.extended_set(),
        }
    }

    /// Letters whose words appear in the series of a subsystem.
    pub fn working_letters(&self, letters: LetterSet) -> LetterSet {
        match self.interp {
            Interpretation::Stratonovich => letters,
            Interpretation::Ito => self.alphabet.with_barred(letters),
        }
    }

    /// Canonical Stratonovich integral over a cell; `w` may use starred
    /// letters, which count as deterministic.
    pub fn strat_cell(&mut self, cell: usize, w: &Word) -> Result<IIPoly> {
        if let Some(p) = self.strat_cell.get(&(cell, w.clone())) {
            return Ok(p.clone());
        }
        let lam = self.grid.length(cell);
        let al = self.alphabet.clone();
        let lp = self.canon.word(w)?;
        let p = lp.substitute(|l: &Word| {
            if al.all_deterministic(l) {
                det_integral(&lam, l.len() as u32)
            } else {
                IIPoly::var(Atom::X { cell: cell as u16, word: l.clone() })
            }
        });
        self.strat_cell.insert((cell, w.clone()), p.clone());
        Ok(p)
    }

    /// Coefficient of `w` in the cell's Chen series for the engine's
    /// interpretation.
    pub fn elementary(&mut self, cell: usize, w: &Word) -> Result<IIPoly> {
        match self.interp {
            Interpretation::Stratonovich => self.strat_cell(cell, w),
            Interpretation::Ito => {
                if let Some(p) = self.ito_cell.get(&(cell, w.clone())) {
                    return Ok(p.clone());
                }
                let mut out = IIPoly::default();
                for (u, c) in rho_word(&self.alphabet, w).terms() {
                    let pu = self.strat_cell(cell, u)?;
                    out.add_scaled(&pu, c);
                }
                self.ito_cell.insert((cell, w.clone()), out.clone());
                Ok(out)
            }
        }
    }

    pub fn elementary_series(&mut self, cell: usize, letters: LetterSet) -> Result<FreeSeries<IIPoly>> {
        let al = self.alphabet.clone();
        let mut s = FreeSeries::new(al.clone(), self.trunc);
        for w in al.enumerate_words(letters, self.trunc)? {
            let c = self.elementary(cell, &w)?;
            s.set(w, c);
        }
        Ok(s)
    }

    /// Series over consecutive cells, assembled with Chen's relation.
    pub fn interval_series(&mut self, cells: Range<usize>, letters: LetterSet) -> Result<FreeSeries<IIPoly>> {
        let mut acc = FreeSeries::unit(self.alphabet.clone(), self.trunc);
        for k in cells {
            let e = self.elementary_series(k, letters)?;
            acc = acc.convolve(&e)?;
        }
        Ok(acc)
    }

    pub fn exact_series(&mut self) -> Result<FreeSeries<IIPoly>> {
        let letters = self.full_letters();
        self.interval_series(0..self.grid.cells(), letters)
    }

    pub fn stage_series(&mut self, alphabet: &Alphabet, st: &Stage) -> Result<FreeSeries<IIPoly>> {
        let stochastic = st.letters.ids().any(|id| alphabet.kind(id) == LetterKind::Stochastic);
        if !stochastic {
            // Deterministic flows may run backward; use the signed length.
            let lam = st.length();
            let mut s = FreeSeries::new(self.alphabet.clone(), self.trunc);
            for w in self.alphabet.enumerate_words(st.letters, self.trunc)? {
                let n = w.len() as u32;
                s.set(w, det_integral(&lam, n));
            }
            return Ok(s);
        }
        let cells = self.grid.cells_of(&st.c, &st.d).ok_or_else(|| {
            Error::Inconsistent(format!(
                "stage interval [{}, {}] is not a union of grid cells",
                fmt_q(&st.c),
                fmt_q(&st.d)
            ))
        })?;
        let letters = self.working_letters(st.letters);
        self.interval_series(cells, letters)
    }

    pub fn scheme_series(&mut self, scheme: &Scheme) -> Result<FreeSeries<IIPoly>> {
        let mut acc = FreeSeries::unit(self.alphabet.clone(), self.trunc);
        for st in &scheme.stages {
            let s = self.stage_series(&scheme.alphabet, st)?;
            acc = acc.convolve(&s)?;
        }
        Ok(acc)
    }

    /// Stage-by-stage product in raw (uncanonicalized) atoms.
    pub fn raw_scheme_series(&self, scheme: &Scheme) -> Result<FreeSeries<RawPoly>> {
        let mut acc = FreeSeries::unit(self.alphabet.clone(), self.trunc);
        for (i, st) in scheme.stages.iter().enumerate() {
            let acc_st = self.raw_interval_series(i as u16, &st.c, &st.d, self.working_letters(st.letters))?;
            acc = acc.convolve(&acc_st)?;
        }
        Ok(acc)
    }

    pub fn raw_interval_series(&self, stage: u16, c: &Q, d: &Q, letters: LetterSet) -> Result<FreeSeries<RawPoly>> {
        let mut s = FreeSeries::unit(self.alphabet.clone(), self.trunc);
        for w in self.alphabet.enumerate_words(letters, self.trunc)? {
            if !w.is_empty() {
                s.set(w.clone(), RawPoly::var(RawAtom { stage, c: c.clone(), d: d.clone(), word: w }));
            }
        }
        Ok(s)
    }

    /// Words on which order conditions are imposed: all words
    /// (Stratonovich) or those not ending in a barred letter (Ito).
    pub fn is_condition_word(&self, w: &Word) -> bool {
        match self.interp {
            Interpretation::Stratonovich => true,
            Interpretation::Ito => w.last().is_none_or(|l| self.alphabet.kind(l) != LetterKind::Barred),
        }
    }
}

/// Coefficient of `w` in the product of two series, from the deconcatenations.
pub fn chen_decompose<C: Coeff>(w: &Word, left: &FreeSeries<C>, right: &FreeSeries<C>) -> Result<C> {
    let al = left.alphabet();
    let t = left.truncation().min(right.truncation());
    if al.weight(w) > t {
        return Err(Error::Truncation(format!("word {} above truncation {t}", al.render(w))));
    }
    let mut out = C::zero_elem();
    for (u, v) in w.deconcatenations() {
        out.accumulate(&left.get(&u).times(&right.get(&v)));
    }
    Ok(out)
}

/// Renders atoms as `J[cell;word]` (1-based cells) or `I[...]`.
pub struct Renderer<'a> {
    pub alphabet: &'a Alphabet,
    pub grid: &'a Grid,
    pub interp: Interpretation,
}

impl Renderer<'_> {
    fn integral_symbol(&self) -> &'static str {
        match self.interp {
            Interpretation::Stratonovich => "J",
            Interpretation::Ito => "I",
        }
    }

    /// In the Ito pipeline a canonical atom is a Stratonovich integral on the
    /// starred alphabet; it equals the Ito integral of the same word when
    /// the word has no starred letter and no repeated adjacent noise.
    pub fn atom(&self, a: &Atom) -> String {
        match a {
            Atom::H => "h".into(),
            Atom::X { cell, word } => {
                let al = self.alphabet;
                let plain = word.ids().iter().all(|&i| al.kind(i) != LetterKind::Starred)
                    && word.ids().windows(2).all(|p| !(p[0] == p[1] && al.kind(p[0]) == LetterKind::Stochastic));
                let sym = if self.interp == Interpretation::Ito && plain { "I" } else { "J" };
                format!("{sym}[{};{}]", cell + 1, al.render(word))
            }
        }
    }

    pub fn ii(&self, p: &IIPoly) -> String {
        p.render(|a| self.atom(a))
    }

    pub fn interval(&self, c: &Q, d: &Q) -> String {
        match self.grid.cells_of(c, d) {
            Some(r) if r.len() == 1 => format!("{}", r.start + 1),
            Some(r) => format!("{}-{}", r.start + 1, r.end),
            None => format!("{},{}", fmt_q(c), fmt_q(d)),
        }
    }

    pub fn raw_atom(&self, a: &RawAtom) -> String {
        format!("{}[{};{}]", self.integral_symbol(), self.interval(&a.c, &a.d), self.alphabet.render(&a.word))
    }

    /// Atoms over the same interval from different stages (a reused
    /// increment) are merged under the earliest stage before rendering.
    pub fn raw(&self, p: &RawPoly) -> String {
        let mut first: BTreeMap<(Q, Q, Word), u16> = BTreeMap::new();
        for (m, _) in p.terms() {
            for (a, _) in &m.0 {
                let e = first.entry((a.c.clone(), a.d.clone(), a.word.clone())).or_insert(a.stage);
                *e = (*e).min(a.stage);
            }
        }
        let merged = p.substitute(|a| {
            let stage = first[&(a.c.clone(), a.d.clone(), a.word.clone())];
            RawPoly::var(RawAtom { stage, ..a.clone() })
        });
        merged.render(|a| self.raw_atom(a))
    }

    /// `scheme - exact` with the exact coefficient as a single atom over the
    /// whole step, e.g. `J[1;A]·J[1;b] - J[1;Ab]`.
    pub fn raw_residual(&self, scheme_coeff: &RawPoly, w: &Word) -> String {
        let exact = self.raw_atom(&RawAtom { stage: 0, c: Q::zero(), d: Q::one(), word: w.clone() });
        if scheme_coeff.is_zero_elem() {
            format!("-{exact}")
        } else {
            format!("{} - {exact}", self.raw(scheme_coeff))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{q, qi};

    fn engine(grid: Grid, interp: Interpretation) -> (Arc<Alphabet>, ChenEngine) {
        let al = Arc::new(Alphabet::new(&["a", "b"], &["A"]).unwrap());
        (al.clone(), ChenEngine::new(al, grid, interp, Weight(6)))
    }

    fn x(cell: u16, al: &Alphabet, w: &str) -> IIPoly {
        IIPoly::var(Atom::X { cell, word: al.parse_word(w).unwrap() })
    }

    #[test]
    fn elementary_coefficients() {
        let (al, mut e) = engine(Grid::uniform(2), Interpretation::Stratonovich);
        let w = |s: &str| al.parse_word(s).unwrap();
        assert_eq!(e.elementary(0, &w("a")).unwrap(), det_integral(&q(1, 2), 1));
        assert_eq!(e.elementary(1, &w("aa")).unwrap(), det_integral(&q(1, 2), 2));
        let expect = det_integral(&q(1, 2), 1).times(&x(0, &al, "A")).minus(&x(0, &al, "aA"));
        assert_eq!(e.elementary(0, &w("Aa")).unwrap(), expect);
    }

    #[test]
    fn exact_series_over_halves() {
        let (al, mut e) = engine(Grid::uniform(2), Interpretation::Stratonovich);
        let s = e.exact_series().unwrap();
        let w = |s: &str| al.parse_word(s).unwrap();
        assert_eq!(s.get(&w("a")), det_integral(&qi(1), 1));
        let x1 = x(0, &al, "A");
        let x2 = x(1, &al, "A");
        let expect = x1
            .times(&x1)
            .scaled(&q(1, 2))
            .plus(&x1.times(&x2))
            .plus(&x2.times(&x2).scaled(&q(1, 2)));
        assert_eq!(s.get(&w("AA")), expect);
        let (_, mut e1) = engine(Grid::single(), Interpretation::Stratonovich);
        assert_eq!(e1.exact_series().unwrap().get(&w("A")), x(0, &al, "A"));
    }

    #[test]
    fn decompose_two_letters() {
        let (al, mut e) = engine(Grid::uniform(2), Interpretation::Stratonovich);
        let l = e.elementary_series(0, al.strat_set()).unwrap();
        let r = e.elementary_series(1, al.strat_set()).unwrap();
        let w = al.parse_word("bA").unwrap();
        let got = chen_decompose(&w, &l, &r).unwrap();
        let expect = l
            .get(&w)
            .plus(&l.get(&w.slice(0, 1)).times(&r.get(&w.slice(1, 2))))
            .plus(&r.get(&w));
        assert_eq!(got, expect);
        assert_eq!(chen_decompose(&Word::empty(), &l, &r).unwrap(), IIPoly::one_elem());
    }

    #[test]
    fn ito_elementary_matches_rho() {
        let (al, mut e) = engine(Grid::single(), Interpretation::Ito);
        let w = |s: &str| al.parse_word(s).unwrap();
        // I_AA = J_AA - (1/2) h = (1/2) X_A^2 - h/2
        let xa = x(0, &al, "A");
        let expect = xa.times(&xa).scaled(&q(1, 2)).minus(&det_integral(&qi(1), 1).scaled(&q(1, 2)));
        assert_eq!(e.elementary(0, &w("AA")).unwrap(), expect);
        assert_eq!(e.elementary(0, &w("A^")).unwrap(), det_integral(&qi(1), 1));
    }
}
