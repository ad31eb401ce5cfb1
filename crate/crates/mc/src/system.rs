//! Split test systems: letter-indexed affine fields, witness systems and
//! word basis functions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use splitorder_core::words::{Alphabet, LetterKind, Word};
use splitorder_core::{Error, Result};

use crate::field::{Affine, Op};

#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    Coordinate(usize),
    Square(usize),
}

impl Observable {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Observable::Coordinate(i) => x[i],
            Observable::Square(i) => x[i] * x[i],
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Observable::Coordinate(i) => format!("x{}", i + 1),
            Observable::Square(i) => format!("x{}^2", i + 1),
        }
    }

    pub fn parse(s: &str) -> Result<Observable> {
        let bad = || Error::Input(format!("unknown observable {s:?} (expected xK or xK^2)"));
        let rest = s.strip_prefix('x').ok_or_else(bad)?;
        let (idx, sq) = match rest.strip_suffix("^2") {
            Some(r) => (r, true),
            None => (rest, false),
        };
        let k: usize = idx.parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        Ok(if sq { Observable::Square(k - 1) } else { Observable::Coordinate(k - 1) })
    }
}

/// An SDE split into affine fields named by letter symbols.
#[derive(Clone, Debug)]
pub struct System {
    pub name: String,
    pub dim: usize,
    pub fields: Vec<(String, Affine)>,
    pub x0: DVector<f64>,
    /// Final time of convergence studies.
    pub horizon: f64,
    pub observable: Observable,
}

pub const SYSTEMS: &[&str] = &["gbm-integrator", "ou", "gbm"];

fn mat(n: usize, entries: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for &(i, j, v) in entries {
        m[(i, j)] = v;
    }
    m
}

/// Catalog systems:
/// - `gbm-integrator`: `dx2 = α x2 dt + σ x2 ∘dB` split as a (drift) and A
///   (noise), plus b: `dx1 = x2 dt`; α = -1/2, σ = 1/2, x0 = (0, 1), T = 1.
/// - `ou`: a: `-θx dt`, A: `σ dB`; θ = σ = 1, x0 = 1, T = 8, χ = x².
/// - `gbm`: a: `αx dt`, A: `σx dB`; commuting, α = -1/2, σ = 1/2, x0 = 1, T = 1.
pub fn builtin_system(name: &str) -> Result<System> {
    let z1 = DVector::zeros(1);
    let z2 = DVector::zeros(2);
    Ok(match name {
        "gbm-integrator" => System {
            name: name.into(),
            dim: 2,
            fields: vec![
                ("a".into(), Affine::new(mat(2, &[(1, 1, -0.5)]), z2.clone())),
                ("b".into(), Affine::new(mat(2, &[(0, 1, 1.0)]), z2.clone())),
                ("A".into(), Affine::new(mat(2, &[(1, 1, 0.5)]), z2)),
            ],
            x0: DVector::from_row_slice(&[0.0, 1.0]),
            horizon: 1.0,
            observable: Observable::Coordinate(0),
        },
        "ou" => System {
            name: name.into(),
            dim: 1,
            fields: vec![
                ("a".into(), Affine::new(mat(1, &[(0, 0, -1.0)]), z1)),
                ("A".into(), Affine::new(DMatrix::zeros(1, 1), DVector::from_element(1, 1.0))),
            ],
            x0: DVector::from_element(1, 1.0),
            horizon: 8.0,
            observable: Observable::Square(0),
        },
        "gbm" => System {
            name: name.into(),
            dim: 1,
            fields: vec![
                ("a".into(), Affine::new(mat(1, &[(0, 0, -0.5)]), z1.clone())),
                ("A".into(), Affine::new(mat(1, &[(0, 0, 0.5)]), z1)),
            ],
            x0: DVector::from_element(1, 1.0),
            horizon: 1.0,
            observable: Observable::Coordinate(0),
        },
        _ => {
            return Err(Error::Input(format!("unknown system {name:?}; available: {}", SYSTEMS.join(", "))))
        }
    })
}

/// The witness system of a nonempty word: dimension `d = len(w)`, combined
/// field `[x2, ..., xd, 1]`, with component `d-j+1` assigned to the letter at
/// position `j`. Letters not in `w` get the zero field.
pub fn witness_system(al: &Alphabet, w: &Word) -> Result<System> {
    if w.is_empty() {
        return Err(Error::Input("witness system needs a nonempty word".into()));
    }
    let d = w.len();
    let mut fields: Vec<(String, Affine)> =
        al.strat_set().ids().map(|id| (al.letter(id).symbol.clone(), Affine::zero(d))).collect();
    for (j, &id) in w.ids().iter().enumerate() {
        let kind = al.kind(id);
        if kind != LetterKind::Deterministic && kind != LetterKind::Stochastic {
            return Err(Error::Input(format!("witness words use plain letters only, got {}", al.letter(id).symbol)));
        }
        let sym = &al.letter(id).symbol;
        let f = &mut fields.iter_mut().find(|(s, _)| s == sym).expect("letter of the alphabet").1;
        // 0-based component d-j-1 for 0-based position j.
        let c = d - j - 1;
        if j == 0 {
            f.shift[c] = 1.0;
        } else {
            f.lin[(c, c + 1)] = 1.0;
        }
    }
    Ok(System {
        name: format!("witness:{}", al.render(w)),
        dim: d,
        fields,
        x0: DVector::zeros(d),
        horizon: 1.0,
        observable: Observable::Coordinate(0),
    })
}

/// Fields of a system indexed by the letters of a scheme alphabet, including
/// barred letters (`(1/2)f''[f,f] = 0` for affine fields) and starred letters
/// (`-(1/2)f'f`).
#[derive(Clone, Debug)]
pub struct BoundSystem {
    pub alphabet: Arc<Alphabet>,
    pub dim: usize,
    pub fields: Vec<Affine>,
    /// Augmented generators, one per letter id.
    pub ops: Vec<Op>,
    pub x0: DVector<f64>,
    pub horizon: f64,
    pub observable: Observable,
    pub name: String,
}

impl BoundSystem {
    pub fn bind(sys: &System, al: Arc<Alphabet>) -> Result<BoundSystem> {
        for (sym, f) in &sys.fields {
            if al.id_of(sym).is_none_or(|id| !al.strat_set().contains(id)) {
                return Err(Error::Input(format!("system {} has field {sym} not in the scheme alphabet", sys.name)));
            }
            if f.dim() != sys.dim {
                return Err(Error::Input(format!("field {sym} has dimension {} ≠ {}", f.dim(), sys.dim)));
            }
        }
        let mut fields = Vec::with_capacity(al.len());
        for id in al.ids() {
            let l = al.letter(id);
            let f = match l.kind {
                LetterKind::Deterministic | LetterKind::Stochastic => sys
                    .fields
                    .iter()
                    .find(|(s, _)| *s == l.symbol)
                    .map(|(_, f)| f.clone())
                    .ok_or_else(|| Error::Input(format!("system {} has no field for letter {}", sys.name, l.symbol)))?,
                LetterKind::Barred => Affine::zero(sys.dim),
                LetterKind::Starred => {
                    let base = l.base.expect("starred letter has a base");
                    let sym = &al.letter(base).symbol;
                    let f = &sys.fields.iter().find(|(s, _)| s == sym).expect("checked above").1;
                    Affine::new(&f.lin * &f.lin * -0.5, &f.lin * &f.shift * -0.5)
                }
            };
            fields.push(f);
        }
        let ops = fields.iter().map(|f| Op::from_matrix(&f.augmented())).collect();
        Ok(BoundSystem {
            alphabet: al,
            dim: sys.dim,
            fields,
            ops,
            x0: sys.x0.clone(),
            horizon: sys.horizon,
            observable: sys.observable.clone(),
            name: sys.name.clone(),
        })
    }

    /// `f_w(x)`: `f_{ℓ1 ℓ2 … ℓn} = N_{ℓn} ⋯ N_{ℓ2} f_{ℓ1}(x)`, the leftmost
    /// letter entering the Jacobian of the rest. Zero for the empty word.
    pub fn word_basis_function(&self, w: &Word, x: &DVector<f64>) -> DVector<f64> {
        let ids = w.ids();
        let Some((&first, rest)) = ids.split_first() else {
            return DVector::zeros(self.dim);
        };
        let mut v = self.fields[first as usize].eval(x);
        for &id in rest {
            v = &self.fields[id as usize].lin * v;
        }
        v
    }
}

pub fn word_basis_function(sys: &BoundSystem, w: &Word, x: &DVector<f64>) -> DVector<f64> {
    sys.word_basis_function(w, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_fields_of_five_letter_word() {
        let al = Alphabet::new(&["l", "m"], &[] as &[&str]).unwrap();
        let w = al.parse_word("llmlm").unwrap();
        let s = witness_system(&al, &w).unwrap();
        let fl = &s.fields.iter().find(|(x, _)| x == "l").unwrap().1;
        let fm = &s.fields.iter().find(|(x, _)| x == "m").unwrap().1;
        // f_l = [0, x3, 0, x5, 1], f_m = [x2, 0, x4, 0, 0].
        assert_eq!(fl.shift.as_slice(), &[0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(fl.lin[(1, 2)], 1.0);
        assert_eq!(fl.lin[(3, 4)], 1.0);
        assert_eq!(fl.lin.iter().filter(|v| **v != 0.0).count(), 2);
        assert_eq!(fm.lin[(0, 1)], 1.0);
        assert_eq!(fm.lin[(2, 3)], 1.0);
        assert!(fm.shift.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn observable_parsing() {
        assert_eq!(Observable::parse("x1").unwrap(), Observable::Coordinate(0));
        assert_eq!(Observable::parse("x2^2").unwrap(), Observable::Square(1));
        assert!(Observable::parse("y").is_err());
    }
}
