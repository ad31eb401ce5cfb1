//! JSON report structures and the envelope every command emits.

use serde::Serialize;
use sha2::{Digest, Sha256};
use splitorder_core::chen::{Atom, Grid, IIPoly};
use splitorder_core::poly::HPoly;
use splitorder_core::ring::fmt_q;
use splitorder_core::words::Alphabet;

pub const TOOL: &str = "splitorder";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Envelope<P: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub input_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub payload: P,
}

/// Lowercase hex SHA-256 of the concatenated inputs, each followed by a
/// zero byte.
pub fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize, Clone, Debug, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct MonomialJson {
    /// `[interval, lyndonWord, exponent]` per random atom.
    pub monomial: Vec<(String, String, u32)>,
    pub h_power: u32,
    pub coefficient: String,
}

/// Terms of an iterated-integral polynomial, in the polynomial's own
/// (deterministic) term order.
pub fn ii_json(al: &Alphabet, grid: &Grid, p: &IIPoly) -> Vec<MonomialJson> {
    p.terms()
        .map(|(m, c)| {
            let mut monomial = Vec::new();
            let mut h_power = 0;
            for (a, e) in &m.0 {
                match a {
                    Atom::H => h_power += e,
                    Atom::X { cell, word } => {
                        let k = *cell as usize;
                        let iv = format!("[{},{}]", fmt_q(&grid.points()[k]), fmt_q(&grid.points()[k + 1]));
                        monomial.push((iv, al.render(word), *e));
                    }
                }
            }
            MonomialJson { monomial, h_power, coefficient: fmt_q(c) }
        })
        .collect()
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct HTermJson {
    pub h_power: u32,
    pub coefficient: String,
}

pub fn h_json(p: &HPoly) -> Vec<HTermJson> {
    p.terms().map(|(d, c)| HTermJson { h_power: d, coefficient: fmt_q(c) }).collect()
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct StrongFailureJson {
    pub word: String,
    pub weight: String,
    /// Scheme minus exact in stage integrals, e.g. `J[1;A]·J[1;b] - J[1;Ab]`.
    pub residual: String,
    /// Same residual over elementary cells and Lyndon words.
    pub canonical_text: String,
    pub canonical: Vec<MonomialJson>,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct WeakFailureJson {
    pub word: String,
    pub residual: String,
    pub scheme: String,
    pub exact: String,
    pub residual_terms: Vec<HTermJson>,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct OverlapJson {
    pub letter: String,
    pub stages: (usize, usize),
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct DeterministicJson {
    pub order: u32,
    pub at_cap: bool,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct BarrierJson {
    pub status: &'static str,
    pub message: String,
}

/// Order report of one mode. `order` is a weight string ("1", "1/2") for
/// strong order and an integer for weak order.
#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct OrderReport {
    pub mode: &'static str,
    pub order: serde_json::Value,
    pub decided: bool,
    pub checked_up_to: String,
    pub failing: serde_json::Value,
    pub hypothesis: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub overlaps: Vec<OverlapJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deterministic_order: Option<DeterministicJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub barrier: Option<BarrierJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyndon_conditions: Option<Vec<String>>,
    pub notes: Vec<String>,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct AnalyzePayload {
    pub scheme: String,
    pub interpretation: String,
    pub stages: String,
    pub warnings: Vec<String>,
    pub reports: Vec<OrderReport>,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct ConditionJson {
    pub word: String,
    pub weight: String,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct ConditionsPayload {
    pub alphabet: String,
    pub interpretation: String,
    pub max_weight: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_length: Option<usize>,
    pub lyndon: bool,
    pub words: Vec<ConditionJson>,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct ResidualRowJson {
    pub word: String,
    pub weight: String,
    pub residual: String,
    pub canonical_text: String,
    pub canonical: Vec<MonomialJson>,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct StageTermJson {
    pub word: String,
    pub coefficient: String,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct StageSeriesJson {
    pub stage: usize,
    pub letters: String,
    pub terms: Vec<StageTermJson>,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct LocalErrorPayload {
    pub scheme: String,
    pub interpretation: String,
    pub max_weight: String,
    pub residuals: Vec<ResidualRowJson>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub stage_series: Vec<StageSeriesJson>,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct ConvertPayload {
    pub input_interpretation: String,
    pub output_interpretation: String,
    pub deterministic: Vec<String>,
    pub stochastic: Vec<String>,
    pub corrections: Vec<CorrectionJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub systems_coincide: Option<bool>,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct CorrectionJson {
    pub letter: String,
    pub field: String,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct EstimateJson {
    pub mode: splitorder_mc::estimate::Mode,
    pub scheme: String,
    pub system: String,
    pub h_list: Vec<f64>,
    pub slope: f64,
    pub stderr: f64,
    pub paths: usize,
    pub seed: u64,
    pub verdict: splitorder_mc::estimate::Verdict,
    pub predicted: Option<f64>,
    pub tolerance: f64,
    pub points: Vec<splitorder_mc::estimate::LadderPoint>,
    pub notes: Vec<String>,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct McPayload {
    pub scheme: String,
    pub system: String,
    pub interpretation: String,
    pub estimates: Vec<EstimateJson>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<splitorder_mc::iterated::CoefficientCheck>,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct PropertyJson {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub detail: String,
}

#[derive(Serialize, Clone, Debug)]
#[serde(rename_all = "camelCase")]
pub struct SelfcheckPayload {
    pub max_weight: String,
    pub properties: Vec<PropertyJson>,
    pub first_failure: Option<String>,
}
