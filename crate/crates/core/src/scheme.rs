//! Splitting schemes: JSON format, validation and the builtin catalog.
//!
//! Stages are listed in the order their flows are applied, so the first
//! stage acts first on the initial value. Each stage integrates a subset of
//! the letters from `t0 + c h` to `t0 + d h`.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{fmt_q, parse_q, q, qi, Q};
use crate::words::{Alphabet, LetterKind, LetterSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpretation {
    Stratonovich,
    Ito,
}

impl Interpretation {
    pub fn parse(s: &str) -> Result<Interpretation> {
        match s.to_ascii_lowercase().as_str() {
            "stratonovich" | "strat" => Ok(Interpretation::Stratonovich),
            "ito" => Ok(Interpretation::Ito),
            _ => Err(Error::Input(format!("unknown interpretation `{s}` (expected stratonovich or ito)"))),
        }
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interpretation::Stratonovich => "stratonovich",
            Interpretation::Ito => "ito",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphabetSpec {
    #[serde(default)]
    pub deterministic: Vec<String>,
    #[serde(default)]
    pub stochastic: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSpec {
    pub letters: Vec<String>,
    pub c: Q,
    pub d: Q,
}

/// Unvalidated scheme description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeSpec {
    pub name: Option<String>,
    pub alphabet: AlphabetSpec,
    pub interpretation: Interpretation,
    pub stages: Vec<StageSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeFile {
    #[serde(default)]
    name: Option<String>,
    alphabet: AlphabetSpec,
    interpretation: Interpretation,
    stages: Vec<StageFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StageFile {
    letters: Vec<String>,
    c: serde_json::Value,
    d: serde_json::Value,
}

#[derive(Serialize)]
struct SchemeOut<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: &'a Option<String>,
    alphabet: &'a AlphabetSpec,
    interpretation: Interpretation,
    stages: Vec<StageOut<'a>>,
}

#[derive(Serialize)]
struct StageOut<'a> {
    letters: &'a [String],
    c: String,
    d: String,
}

/// 1-based line and column of the first occurrence of `needle` after `from`.
fn locate(text: &str, needle: &str, from: usize) -> Option<(usize, usize, usize)> {
    let at = text[from.min(text.len())..].find(needle)? + from;
    let line = text[..at].matches('\n').count() + 1;
    let col = at - text[..at].rfind('\n').map_or(0, |i| i + 1) + 1;
    Some((line, col, at))
}

fn rational_value(v: &serde_json::Value) -> std::result::Result<Q, String> {
    match v {
        serde_json::Value::String(s) => parse_q(s).map_err(|e| e.to_string()),
        serde_json::Value::Number(n) if n.is_i64() => Ok(qi(n.as_i64().unwrap_or(0))),
        serde_json::Value::Number(n) => Err(format!(
            "float literal {n} is not allowed; write rationals as \"p/q\" strings"
        )),
        other => Err(format!("expected a rational \"p/q\" or an integer, found {other}")),
    }
}

impl SchemeSpec {
    /// Parses the JSON scheme format. Errors carry line:column positions.
    pub fn parse(text: &str) -> Result<SchemeSpec> {
        let file: SchemeFile = serde_json::from_str(text).map_err(|e| {
            Error::Input(format!("line {} column {}: {}", e.line(), e.column(), strip_pos(&e.to_string())))
        })?;
        let mut errors = Vec::new();
        let mut stages = Vec::new();
        let stages_at = locate(text, "\"stages\"", 0).map_or(0, |p| p.2);
        let mut cursor = stages_at;
        for (i, st) in file.stages.iter().enumerate() {
            // Track the stage's position so repeated literals resolve to it.
            if let Some(p) = locate(text, "\"letters\"", cursor) {
                cursor = p.2 + 1;
            }
            let mut get = |key: &str, v: &serde_json::Value| -> Q {
                match rational_value(v) {
                    Ok(x) => x,
                    Err(msg) => {
                        let pos = locate(text, &format!("\"{key}\""), cursor)
                            .map(|(l, c, _)| format!("line {l} column {c}: "))
                            .unwrap_or_default();
                        errors.push(format!("{pos}stage {}: field {key}: {msg}", i + 1));
                        Q::zero()
                    }
                }
            };
            let c = get("c", &st.c);
            let d = get("d", &st.d);
            stages.push(StageSpec { letters: st.letters.clone(), c, d });
        }
        let spec = SchemeSpec {
            name: file.name,
            alphabet: file.alphabet,
            interpretation: file.interpretation,
            stages,
        };
        let declared: Vec<&String> =
            spec.alphabet.deterministic.iter().chain(spec.alphabet.stochastic.iter()).collect();
        let mut cursor = stages_at;
        for (i, st) in spec.stages.iter().enumerate() {
            if let Some(p) = locate(text, "\"letters\"", cursor) {
                cursor = p.2 + 1;
            }
            for l in &st.letters {
                if !declared.contains(&l) {
                    let pos = locate(text, &format!("\"{l}\""), cursor)
                        .map(|(ln, c, _)| format!("line {ln} column {c}: "))
                        .unwrap_or_default();
                    errors.push(format!("{pos}stage {}: unknown letter {l}", i + 1));
                }
            }
        }
        for (i, s) in declared.iter().enumerate() {
            if declared[..i].contains(s) {
                let first = locate(text, &format!("\"{s}\""), 0).map_or(0, |p| p.2 + 1);
                let pos = locate(text, &format!("\"{s}\""), first)
                    .map(|(ln, c, _)| format!("line {ln} column {c}: "))
                    .unwrap_or_default();
                errors.push(format!("{pos}duplicate letter symbol {s}"));
            }
        }
        if errors.is_empty() {
            Ok(spec)
        } else {
            Err(Error::Input(errors.join("\n")))
        }
    }

    pub fn to_json(&self) -> String {
        let out = SchemeOut {
            name: &self.name,
            alphabet: &self.alphabet,
            interpretation: self.interpretation,
            stages: self
                .stages
                .iter()
                .map(|s| StageOut { letters: &s.letters, c: fmt_q(&s.c), d: fmt_q(&s.d) })
                .collect(),
        };
        serde_json::to_string_pretty(&out).unwrap_or_default()
    }

    pub fn with_interpretation(mut self, i: Interpretation) -> SchemeSpec {
        self.interpretation = i;
        self
    }

    /// Checks every stage; returns all violations at once.
    pub fn validate(&self) -> std::result::Result<Scheme, Vec<String>> {
        let mut errors = Vec::new();
        let alphabet = match Alphabet::new(&self.alphabet.deterministic, &self.alphabet.stochastic) {
            Ok(a) => a,
            Err(e) => return Err(vec![e.to_string()]),
        };
        if self.stages.is_empty() {
            errors.push("scheme has no stages".to_string());
        }
        let mut stages = Vec::new();
        let mut used = LetterSet::default();
        for (i, st) in self.stages.iter().enumerate() {
            let n = i + 1;
            let mut set = LetterSet::default();
            if st.letters.is_empty() {
                errors.push(format!("stage {n}: empty stage"));
            }
            for l in &st.letters {
                match alphabet.id_of(l) {
                    Some(id) if matches!(alphabet.kind(id), LetterKind::Deterministic | LetterKind::Stochastic) => {
                        if set.contains(id) {
                            errors.push(format!("stage {n}: letter {l} listed twice"));
                        }
                        set.insert(id);
                    }
                    _ => errors.push(format!("stage {n}: unknown letter {l}")),
                }
            }
            let unit = |x: &Q| *x >= Q::zero() && *x <= Q::one();
            if !unit(&st.c) || !unit(&st.d) {
                errors.push(format!(
                    "stage {n}: interval [{}, {}] not inside [0, 1]",
                    fmt_q(&st.c),
                    fmt_q(&st.d)
                ));
            }
            let stochastic = set.ids().any(|id| alphabet.kind(id) == LetterKind::Stochastic);
            if stochastic && st.c >= st.d {
                errors.push(format!(
                    "stage {n}: stochastic stage evolved backward (c = {} must be < d = {})",
                    fmt_q(&st.c),
                    fmt_q(&st.d)
                ));
            } else if st.c == st.d {
                errors.push(format!("stage {n}: zero-length stage (c = d = {})", fmt_q(&st.c)));
            }
            used = used.union(set);
            stages.push(Stage { letters: set, c: st.c.clone(), d: st.d.clone() });
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        let warnings = alphabet
            .strat_set()
            .ids()
            .filter(|&id| !used.contains(id))
            .map(|id| format!("letter {} appears in no stage; its vector field is ignored", alphabet.letter(id).symbol))
            .collect();
        Ok(Scheme {
            name: self.name.clone(),
            alphabet: Arc::new(alphabet),
            interpretation: self.interpretation,
            stages,
            warnings,
            spec: self.clone(),
        })
    }
}

fn strip_pos(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub letters: LetterSet,
    pub c: Q,
    pub d: Q,
}

impl Stage {
    /// Signed elapsed fraction of the step.
    pub fn length(&self) -> Q {
        &self.d - &self.c
    }
}

/// A validated scheme.
#[derive(Clone, Debug)]
pub struct Scheme {
    pub name: Option<String>,
    pub alphabet: Arc<Alphabet>,
    pub interpretation: Interpretation,
    pub stages: Vec<Stage>,
    pub warnings: Vec<String>,
    pub spec: SchemeSpec,
}

impl Scheme {
    pub fn is_stochastic(&self, st: &Stage) -> bool {
        st.letters.ids().any(|id| self.alphabet.kind(id) == LetterKind::Stochastic)
    }

    /// Sorted distinct breakpoints: 0, 1 and every stage endpoint.
    pub fn breakpoints(&self) -> Vec<Q> {
        let mut pts = vec![Q::zero(), Q::one()];
        for s in &self.stages {
            pts.push(s.c.clone());
            pts.push(s.d.clone());
        }
        pts.sort();
        pts.dedup();
        pts
    }

    /// Ordered letter sets of the stages (as maps applied in sequence).
    pub fn describe(&self) -> String {
        self.stages
            .iter()
            .map(|s| {
                let ls: Vec<&str> = s.letters.ids().map(|i| self.alphabet.letter(i).symbol.as_str()).collect();
                format!("{{{}}}[{}, {}]", ls.join(","), fmt_q(&s.c), fmt_q(&s.d))
            })
            .collect::<Vec<_>>()
            .join(" -> ")
    }
}

pub const CATALOG: &[&str] = &[
    "lie-trotter",
    "lie-trotter-a-A",
    "strang-outer-a",
    "strang-outer-A",
    "counterexample",
    "strang-two-noise",
    "exact",
];

fn stage(letters: &[&str], c: Q, d: Q) -> StageSpec {
    StageSpec { letters: letters.iter().map(|s| s.to_string()).collect(), c, d }
}

fn alpha(det: &[&str], sto: &[&str]) -> AlphabetSpec {
    AlphabetSpec {
        deterministic: det.iter().map(|s| s.to_string()).collect(),
        stochastic: sto.iter().map(|s| s.to_string()).collect(),
    }
}

/// Named schemes. Stratonovich unless noted; the reused-increment
/// counterexample is an Ito scheme.
pub fn builtin(name: &str) -> Result<SchemeSpec> {
    let (zero, half, one) = (qi(0), q(1, 2), qi(1));
    let (alphabet, interpretation, stages) = match name {
        "lie-trotter" => (
            alpha(&["a", "b"], &["A"]),
            Interpretation::Stratonovich,
            vec![stage(&["a", "A"], zero.clone(), one.clone()), stage(&["b"], zero, one)],
        ),
        "lie-trotter-a-A" => (
            alpha(&["a"], &["A"]),
            Interpretation::Stratonovich,
            vec![stage(&["a"], zero.clone(), one.clone()), stage(&["A"], zero, one)],
        ),
        "strang-outer-a" => (
            alpha(&["a"], &["A"]),
            Interpretation::Stratonovich,
            vec![
                stage(&["a"], zero.clone(), half.clone()),
                stage(&["A"], zero, one.clone()),
                stage(&["a"], half, one),
            ],
        ),
        "strang-outer-A" => (
            alpha(&["a"], &["A"]),
            Interpretation::Stratonovich,
            vec![
                stage(&["A"], zero.clone(), half.clone()),
                stage(&["a"], zero, one.clone()),
                stage(&["A"], half, one),
            ],
        ),
        "counterexample" => (
            alpha(&["a"], &["A"]),
            Interpretation::Ito,
            vec![
                stage(&["A"], zero.clone(), half.clone()),
                stage(&["a"], zero.clone(), one),
                stage(&["A"], zero, half),
            ],
        ),
        "strang-two-noise" => (
            alpha(&[], &["A", "B"]),
            Interpretation::Stratonovich,
            vec![
                stage(&["A"], zero.clone(), half.clone()),
                stage(&["B"], zero, one.clone()),
                stage(&["A"], half, one),
            ],
        ),
        "exact" => (
            alpha(&["a", "b"], &["A"]),
            Interpretation::Stratonovich,
            vec![stage(&["a", "b", "A"], zero, one)],
        ),
        _ => {
            return Err(Error::Input(format!(
                "unknown builtin scheme `{name}`; available: {}",
                CATALOG.join(", ")
            )))
        }
    };
    Ok(SchemeSpec { name: Some(name.to_string()), alphabet, interpretation, stages })
}
