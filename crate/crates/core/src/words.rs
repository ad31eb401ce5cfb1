//! Letters, alphabets, words and Lyndon machinery.
//!
//! A word is stored as a sequence of letter ids. Ids are ranks in the
//! alphabet's total order, so comparing id sequences is lexicographic
//! comparison of words (a proper prefix sorts first).

use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type LetterId = u8;

/// Most letters an alphabet may hold (deterministic plus three per noise).
pub const MAX_LETTERS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LetterKind {
    Deterministic,
    Stochastic,
    Barred,
    Starred,
}

impl LetterKind {
    /// True for letters graded like `dt` (everything except stochastic).
    pub fn is_deterministic(self) -> bool {
        self != LetterKind::Stochastic
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Letter {
    pub symbol: String,
    pub kind: LetterKind,
    /// Stochastic letter a barred/starred letter derives from.
    pub base: Option<LetterId>,
}

/// Weight counted in halves: `Weight(3)` is 3/2.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(pub u32);

impl Weight {
    pub const ZERO: Weight = Weight(0);
    pub const HALF: Weight = Weight(1);
    pub const ONE: Weight = Weight(2);

    pub fn from_int(n: u32) -> Weight {
        Weight(2 * n)
    }

    pub fn halves(self) -> u32 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Integer part when the weight is an integer.
    pub fn as_integer(self) -> Option<u32> {
        self.is_integer().then_some(self.0 / 2)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Parses "3/2", "1", "0.5"-free forms only: integers or halves "p/2".
    pub fn parse(s: &str) -> Result<Weight> {
        let s = s.trim();
        let bad = || Error::Input(format!("weight `{s}` is not a nonnegative multiple of 1/2"));
        if let Some((p, q)) = s.split_once('/') {
            let p: u32 = p.trim().parse().map_err(|_| bad())?;
            match q.trim() {
                "1" => Ok(Weight(2 * p)),
                "2" => Ok(Weight(p)),
                _ => Err(bad()),
            }
        } else {
            let n: u32 = s.parse().map_err(|_| bad())?;
            Ok(Weight(2 * n))
        }
    }
}

impl std::ops::Add for Weight {
    type Output = Weight;
    fn add(self, o: Weight) -> Weight {
        Weight(self.0 + o.0)
    }
}

impl std::ops::Sub for Weight {
    type Output = Weight;
    fn sub(self, o: Weight) -> Weight {
        Weight(self.0 - o.0)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub SmallVec<[LetterId; 8]>);

impl Word {
    pub fn empty() -> Word {
        Word(SmallVec::new())
    }

    pub fn from_ids(ids: &[LetterId]) -> Word {
        Word(SmallVec::from_slice(ids))
    }

    pub fn letter(id: LetterId) -> Word {
        Word::from_ids(&[id])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ids(&self) -> &[LetterId] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, id: LetterId) {
        self.0.push(id);
    }

    pub fn slice(&self, lo: usize, hi: usize) -> Word {
        Word::from_ids(&self.0[lo..hi])
    }

    pub fn last(&self) -> Option<LetterId> {
        self.0.last().copied()
    }

    /// All splittings `w = uv`, from `(∅, w)` to `(w, ∅)`.
    pub fn deconcatenations(&self) -> Vec<(Word, Word)> {
        (0..=self.len())
            .map(|i| (self.slice(0, i), self.slice(i, self.len())))
            .collect()
    }

    /// Strictly smaller than each proper rotation.
    pub fn is_lyndon(&self) -> Result<bool> {
        if self.is_empty() {
            return Err(Error::Input("the empty word has no Lyndon status".into()));
        }
        let n = self.len();
        let s = &self.0[..];
        Ok((1..n).all(|i| {
            let rot = s[i..].iter().chain(s[..i].iter());
            s.iter().lt(rot)
        }))
    }

    /// Duval's algorithm: the unique nonincreasing factorization into
    /// Lyndon words.
    pub fn lyndon_factorization(&self) -> Result<Vec<Word>> {
        if self.is_empty() {
            return Err(Error::Input("cannot factor the empty word".into()));
        }
        let s = &self.0[..];
        let n = s.len();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            let mut k = i;
            while j < n && s[k] <= s[j] {
                if s[k] < s[j] {
                    k = i;
                } else {
                    k += 1;
                }
                j += 1;
            }
            while i <= k {
                out.push(Word::from_ids(&s[i..i + j - k]));
                i += j - k;
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word{:?}", &self.0[..])
    }
}

/// Subset of an alphabet's letters as a bitmask over ids.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct LetterSet(pub u64);

impl LetterSet {
    pub fn contains(self, id: LetterId) -> bool {
        self.0 >> id & 1 == 1
    }

    pub fn insert(&mut self, id: LetterId) {
        self.0 |= 1 << id;
    }

    pub fn with(mut self, id: LetterId) -> LetterSet {
        self.insert(id);
        self
    }

    pub fn union(self, o: LetterSet) -> LetterSet {
        LetterSet(self.0 | o.0)
    }

    pub fn is_subset(self, o: LetterSet) -> bool {
        self.0 & !o.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn ids(self) -> impl Iterator<Item = LetterId> {
        (0..64u8).filter(move |&i| self.contains(i))
    }

    pub fn contains_word(self, w: &Word) -> bool {
        w.ids().iter().all(|&i| self.contains(i))
    }
}

/// Letters in their total order. Every stochastic letter is immediately
/// followed by its barred and then its starred companion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    letters: Vec<Letter>,
}

pub const BAR: char = '\u{0304}';

impl Alphabet {
    pub fn new<S: AsRef<str>>(deterministic: &[S], stochastic: &[S]) -> Result<Alphabet> {
        if deterministic.is_empty() && stochastic.is_empty() {
            return Err(Error::Input("alphabet is empty".into()));
        }
        let n = deterministic.len() + 3 * stochastic.len();
        if n > MAX_LETTERS {
            return Err(Error::Input(format!(
                "alphabet needs {n} letters, at most {MAX_LETTERS} supported"
            )));
        }
        let mut letters = Vec::with_capacity(n);
        for s in deterministic {
            letters.push(Letter {
                symbol: s.as_ref().to_string(),
                kind: LetterKind::Deterministic,
                base: None,
            });
        }
        for s in stochastic {
            let s = s.as_ref();
            let id = letters.len() as LetterId;
            letters.push(Letter { symbol: s.to_string(), kind: LetterKind::Stochastic, base: None });
            letters.push(Letter { symbol: format!("{s}{BAR}"), kind: LetterKind::Barred, base: Some(id) });
            letters.push(Letter { symbol: format!("{s}*"), kind: LetterKind::Starred, base: Some(id) });
        }
        for (i, l) in letters.iter().enumerate() {
            let s = &l.symbol;
            let user_given = matches!(l.kind, LetterKind::Deterministic | LetterKind::Stochastic);
            if user_given
                && (s.is_empty()
                    || s.chars().any(|c| c.is_whitespace() || "*^~★,|∅".contains(c) || c == BAR))
            {
                return Err(Error::Input(format!("invalid letter symbol `{s}`")));
            }
            if letters[..i].iter().any(|m| &m.symbol == s) {
                return Err(Error::Input(format!("duplicate letter symbol `{s}`")));
            }
        }
        Ok(Alphabet { letters })
    }

    /// Parses "a,b|A,B": deterministic letters before the bar, stochastic after.
    pub fn parse_spec(spec: &str) -> Result<Alphabet> {
        let (det, sto) = spec.split_once('|').unwrap_or((spec, ""));
        let split = |s: &str| -> Vec<String> {
            s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(String::from).collect()
        };
        Alphabet::new(&split(det), &split(sto))
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letter(&self, id: LetterId) -> &Letter {
        &self.letters[id as usize]
    }

    pub fn kind(&self, id: LetterId) -> LetterKind {
        self.letters[id as usize].kind
    }

    pub fn ids(&self) -> impl Iterator<Item = LetterId> + '_ {
        (0..self.letters.len()).map(|i| i as LetterId)
    }

    pub fn id_of(&self, symbol: &str) -> Option<LetterId> {
        self.letters.iter().position(|l| l.symbol == symbol).map(|i| i as LetterId)
    }

    pub fn letter_weight(&self, id: LetterId) -> Weight {
        if self.kind(id) == LetterKind::Stochastic {
            Weight::HALF
        } else {
            Weight::ONE
        }
    }

    pub fn weight(&self, w: &Word) -> Weight {
        Weight(w.ids().iter().map(|&i| self.letter_weight(i).0).sum())
    }

    pub fn barred(&self, stochastic: LetterId) -> LetterId {
        debug_assert_eq!(self.kind(stochastic), LetterKind::Stochastic);
        stochastic + 1
    }

    pub fn starred(&self, stochastic: LetterId) -> LetterId {
        debug_assert_eq!(self.kind(stochastic), LetterKind::Stochastic);
        stochastic + 2
    }

    pub fn base(&self, id: LetterId) -> Option<LetterId> {
        self.letter(id).base
    }

    pub fn set_of(&self, pred: impl Fn(LetterKind) -> bool) -> LetterSet {
        let mut s = LetterSet::default();
        for id in self.ids() {
            if pred(self.kind(id)) {
                s.insert(id);
            }
        }
        s
    }

    pub fn deterministic(&self) -> LetterSet {
        self.set_of(|k| k == LetterKind::Deterministic)
    }

    pub fn stochastic(&self) -> LetterSet {
        self.set_of(|k| k == LetterKind::Stochastic)
    }

    /// Letters of the Stratonovich system.
    pub fn strat_set(&self) -> LetterSet {
        self.set_of(|k| matches!(k, LetterKind::Deterministic | LetterKind::Stochastic))
    }

    /// Extended alphabet of the Ito system (barred letters added).
    pub fn extended_set(&self) -> LetterSet {
        self.set_of(|k| k != LetterKind::Starred)
    }

    /// Starred alphabet used by the Ito-to-Stratonovich translation.
    pub fn star_set(&self) -> LetterSet {
        self.set_of(|k| k != LetterKind::Barred)
    }

    /// The set plus barred companions of its stochastic letters.
    pub fn with_barred(&self, s: LetterSet) -> LetterSet {
        let mut out = s;
        for id in s.ids() {
            if self.kind(id) == LetterKind::Stochastic {
                out.insert(self.barred(id));
            }
        }
        out
    }

    /// The set plus starred companions of its stochastic letters.
    pub fn with_starred(&self, s: LetterSet) -> LetterSet {
        let mut out = s;
        for id in s.ids() {
            if self.kind(id) == LetterKind::Stochastic {
                out.insert(self.starred(id));
            }
        }
        out
    }

    pub fn all_deterministic(&self, w: &Word) -> bool {
        w.ids().iter().all(|&i| self.kind(i).is_deterministic())
    }

    pub fn render(&self, w: &Word) -> String {
        if w.is_empty() {
            return "∅".to_string();
        }
        w.ids().iter().map(|&i| self.letter(i).symbol.as_str()).collect()
    }

    /// Parses a word by greedy longest match on letter symbols. Accepts
    /// "A^" or "A~" for the barred letter and "A★" for the starred one.
    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let s = s.trim();
        let mut w = Word::empty();
        if s.is_empty() || s == "∅" || s == "()" {
            return Ok(w);
        }
        let mut rest = s;
        while !rest.is_empty() {
            let mut best: Option<(usize, LetterId)> = None;
            for id in self.ids() {
                for form in self.symbol_forms(id) {
                    if rest.starts_with(&form) && best.is_none_or(|(n, _)| form.len() > n) {
                        best = Some((form.len(), id));
                    }
                }
            }
            match best {
                Some((n, id)) => {
                    w.push(id);
                    rest = &rest[n..];
                }
                None => {
                    let c = rest.chars().next().unwrap_or(' ');
                    return Err(Error::Input(format!("unknown letter {c} in word `{s}`")));
                }
            }
        }
        Ok(w)
    }

    fn symbol_forms(&self, id: LetterId) -> Vec<String> {
        let l = self.letter(id);
        match (l.kind, l.base) {
            (LetterKind::Barred, Some(b)) => {
                let s = &self.letter(b).symbol;
                vec![l.symbol.clone(), format!("{s}^"), format!("{s}~")]
            }
            (LetterKind::Starred, Some(b)) => {
                let s = &self.letter(b).symbol;
                vec![l.symbol.clone(), format!("{s}★")]
            }
            _ => vec![l.symbol.clone()],
        }
    }

    /// All words over `set` of weight at most `max`, sorted by (weight, lex).
    pub fn enumerate_words(&self, set: LetterSet, max: Weight) -> Result<Vec<Word>> {
        if set.is_empty() {
            return Err(Error::Input("cannot enumerate words over an empty alphabet".into()));
        }
        let ids: Vec<LetterId> = set.ids().collect();
        let mut out = vec![Word::empty()];
        let mut frontier = vec![Word::empty()];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for w in &frontier {
                let wt = self.weight(w);
                for &l in &ids {
                    if wt + self.letter_weight(l) <= max {
                        let mut v = w.clone();
                        v.push(l);
                        next.push(v);
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        self.sort_words(&mut out);
        Ok(out)
    }

    pub fn enumerate_lyndon(&self, set: LetterSet, max: Weight) -> Result<Vec<Word>> {
        Ok(self
            .enumerate_words(set, max)?
            .into_iter()
            .filter(|w| !w.is_empty() && w.is_lyndon().unwrap_or(false))
            .collect())
    }

    pub fn sort_words(&self, ws: &mut [Word]) {
        ws.sort_by(|u, v| self.weight(u).cmp(&self.weight(v)).then_with(|| u.cmp(v)));
    }

    pub fn word_order(&self, u: &Word, v: &Word) -> std::cmp::Ordering {
        self.weight(u).cmp(&self.weight(v)).then_with(|| u.cmp(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Alphabet {
        Alphabet::new(&["a", "b"], &["A"]).unwrap()
    }

    #[test]
    fn letter_order_places_companions_after_base() {
        let al = abc();
        let syms: Vec<_> = al.ids().map(|i| al.letter(i).symbol.clone()).collect();
        assert_eq!(syms, vec!["a", "b", "A", "A\u{0304}", "A*"]);
        assert_eq!(al.letter_weight(3), Weight::ONE);
    }

    #[test]
    fn weight_display_and_parse() {
        assert_eq!(Weight(3).to_string(), "3/2");
        assert_eq!(Weight(4).to_string(), "2");
        assert_eq!(Weight::parse("3/2").unwrap(), Weight(3));
        assert_eq!(Weight::parse("2").unwrap(), Weight(4));
        assert!(Weight::parse("1/3").is_err());
        assert!(Weight::parse("0.5").is_err());
    }

    #[test]
    fn parse_and_render_words() {
        let al = abc();
        let w = al.parse_word("aA^A*b").unwrap();
        assert_eq!(w.ids(), &[0, 3, 4, 1]);
        assert_eq!(al.parse_word(&al.render(&w)).unwrap(), w);
        assert!(al.parse_word("aZ").unwrap_err().to_string().contains("unknown letter Z"));
    }

    #[test]
    fn concat_weight() {
        let al = Alphabet::new(&["a"], &["A"]).unwrap();
        let w = al.parse_word("a").unwrap().concat(&al.parse_word("A").unwrap());
        assert_eq!(al.weight(&w), Weight(3));
        assert_eq!(Word::empty().concat(&w), w);
    }

    #[test]
    fn duplicate_symbols_rejected() {
        assert!(Alphabet::new(&["a", "a"], &[]).is_err());
        assert!(Alphabet::new(&["a"], &["a"]).is_err());
        let none: [&str; 0] = [];
        assert!(Alphabet::new(&none, &none).is_err());
    }
}
