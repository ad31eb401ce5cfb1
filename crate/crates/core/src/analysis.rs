//! Strong order conditions and the local error expansion.

use crate::chen::{ChenEngine, Grid, IIPoly, RawPoly, Renderer};
use crate::error::Result;
use crate::ring::Coeff;
use crate::scheme::{Interpretation, Scheme};
use crate::words::{Alphabet, LetterKind, LetterSet, Weight, Word};

/// Nonzero coefficient of the local error series.
#[derive(Clone, Debug)]
pub struct ResidualTerm {
    pub word: Word,
    pub weight: Weight,
    /// Scheme minus exact coefficient in canonical atoms.
    pub canonical: IIPoly,
    /// Scheme coefficient as a product of stage integrals.
    pub raw_scheme: RawPoly,
}

#[derive(Clone, Debug)]
pub struct LocalError {
    pub interpretation: Interpretation,
    pub grid: Grid,
    pub truncation: Weight,
    pub terms: Vec<ResidualTerm>,
}

impl LocalError {
    pub fn renderer<'a>(&'a self, al: &'a Alphabet) -> Renderer<'a> {
        Renderer { alphabet: al, grid: &self.grid, interp: self.interpretation }
    }
}

/// Residuals `δ_w` (or `η_w`) of all condition words up to `trunc`, sorted
/// by weight then lexicographically.
pub fn local_error_expansion(scheme: &Scheme, trunc: Weight) -> Result<LocalError> {
    let mut eng = ChenEngine::for_scheme(scheme, trunc);
    let approx = eng.scheme_series(scheme)?;
    let exact = eng.exact_series()?;
    let raw = eng.raw_scheme_series(scheme)?;
    let al = scheme.alphabet.clone();
    let mut terms = Vec::new();
    for w in al.enumerate_words(eng.full_letters(), trunc)? {
        if w.is_empty() || !eng.is_condition_word(&w) {
            continue;
        }
        let d = approx.get(&w).minus(&exact.get(&w));
        if !d.is_zero_elem() {
            terms.push(ResidualTerm { weight: al.weight(&w), raw_scheme: raw.get(&w), canonical: d, word: w });
        }
    }
    Ok(LocalError { interpretation: scheme.interpretation, grid: eng.grid().clone(), truncation: trunc, terms })
}

#[derive(Clone, Debug)]
pub struct StrongOrder {
    /// Largest μ with every condition of weight ≤ μ satisfied.
    pub order: Weight,
    /// False when no condition failed below the cap.
    pub decided: bool,
    pub checked_up_to: Weight,
    /// Residuals at weight μ + 1/2.
    pub failing: Vec<ResidualTerm>,
    pub expansion: LocalError,
}

pub fn strong_order(scheme: &Scheme, max_check: Weight) -> Result<StrongOrder> {
    let expansion = local_error_expansion(scheme, max_check)?;
    let first = expansion.terms.first().map(|t| t.weight);
    Ok(match first {
        Some(nu) => StrongOrder {
            order: nu - Weight::HALF,
            decided: true,
            checked_up_to: max_check,
            failing: expansion.terms.iter().filter(|t| t.weight == nu).cloned().collect(),
            expansion,
        },
        None => StrongOrder { order: max_check, decided: false, checked_up_to: max_check, failing: Vec::new(), expansion },
    })
}

/// Lyndon condition words of weight ≤ `target`: over the alphabet
/// (Stratonovich) or over the extended alphabet without a final barred
/// letter (Ito).
pub fn lyndon_reduced_conditions(al: &Alphabet, interp: Interpretation, target: Weight) -> Result<Vec<Word>> {
    let set = condition_letters(al, interp);
    Ok(al
        .enumerate_lyndon(set, target)?
        .into_iter()
        .filter(|w| is_ito_condition(al, interp, w))
        .collect())
}

/// All condition words of weight ≤ `target`, without the empty word.
pub fn full_conditions(al: &Alphabet, interp: Interpretation, target: Weight) -> Result<Vec<Word>> {
    let set = condition_letters(al, interp);
    Ok(al
        .enumerate_words(set, target)?
        .into_iter()
        .filter(|w| !w.is_empty() && is_ito_condition(al, interp, w))
        .collect())
}

fn condition_letters(al: &Alphabet, interp: Interpretation) -> LetterSet {
    match interp {
        Interpretation::Stratonovich => al.strat_set(),
        Interpretation::Ito => al.extended_set(),
    }
}

fn is_ito_condition(al: &Alphabet, interp: Interpretation, w: &Word) -> bool {
    interp == Interpretation::Stratonovich || w.last().is_none_or(|l| al.kind(l) != LetterKind::Barred)
}
