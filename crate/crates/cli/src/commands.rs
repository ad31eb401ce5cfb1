//! Subcommand implementations. Each returns its text report, the JSON
//! envelope and the process exit code.

use std::fmt::Write as _;

use serde::Serialize;
use splitorder_core::analysis::{full_conditions, local_error_expansion, lyndon_reduced_conditions, strong_order};
use splitorder_core::bridge::convert_system;
use splitorder_core::chen::ChenEngine;
use splitorder_core::expectation::{barrier_check, deterministic_order, weak_order, BarrierStatus};
use splitorder_core::scheme::{Interpretation, Scheme};
use splitorder_core::words::{Alphabet, LetterKind, Weight, Word};
use splitorder_core::Error;
use splitorder_mc::estimate::{estimate_strong_order, estimate_weak_order, McConfig, OrderEstimate, Verdict};
use splitorder_mc::iterated::{verify_symbolic_coefficient, CheckOptions};
use splitorder_mc::system::Observable;

use crate::input::{load_scheme, load_system, load_system_file, parse_h_list, validate};
use crate::report::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;
pub const EXIT_INCONSISTENT: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Input(_) | Error::Invalid(_) => EXIT_INPUT,
            Error::Truncation(_) => EXIT_UNDECIDED,
            Error::Inconsistent(_) => EXIT_INCONSISTENT,
        };
        CliError { code, message: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub struct Outcome {
    pub text: String,
    pub json: String,
    pub exit: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Strong,
    Weak,
    Both,
}

impl Mode {
    fn strong(self) -> bool {
        self != Mode::Weak
    }
    fn weak(self) -> bool {
        self != Mode::Strong
    }
}

/// Options shared by every command.
#[derive(Clone, Debug, Default)]
pub struct Common {
    pub timestamp: bool,
}

fn envelope<P: Serialize>(command: &str, digest: String, common: &Common, payload: P) -> String {
    let timestamp = common.timestamp.then(|| {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        format!("{secs}")
    });
    let env = Envelope { tool: TOOL, version: VERSION, command: command.into(), input_digest: digest, timestamp, payload };
    serde_json::to_string_pretty(&env).expect("report serializes") + "\n"
}

fn header(out: &mut String, label: &str, scheme: &Scheme) {
    let _ = writeln!(out, "scheme {label} ({})", scheme.interpretation);
    let _ = writeln!(out, "stages {}", scheme.describe());
    for w in &scheme.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
}

/// Items sorted by word weight, then by rendered word (uppercase first).
fn display_order<'a, T>(al: &Alphabet, items: &'a [T], word: impl Fn(&T) -> &Word) -> Vec<&'a T> {
    let mut v: Vec<&T> = items.iter().collect();
    v.sort_by_cached_key(|t| (al.weight(word(t)), al.render(word(t))));
    v
}

fn words_list(al: &Alphabet, ws: &[Word]) -> Vec<String> {
    ws.iter().map(|w| al.render(w)).collect()
}

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    pub scheme: String,
    pub mode: Mode,
    pub max_weight: Option<Weight>,
    pub interpretation: Option<Interpretation>,
}

pub fn analyze(o: &AnalyzeOptions, common: &Common) -> CliResult<Outcome> {
    let input = load_scheme(&o.scheme)?;
    let scheme = validate(&input.spec, o.interpretation)?;
    let al = scheme.alphabet.clone();
    let cap = o.max_weight.unwrap_or(Weight::from_int(3));
    let mut text = String::new();
    header(&mut text, &input.label, &scheme);
    let mut reports = Vec::new();
    let mut exit = EXIT_OK;

    if o.mode.strong() {
        let so = strong_order(&scheme, cap)?;
        let r = so.expansion.renderer(&al);
        let failing: Vec<StrongFailureJson> = display_order(&al, &so.failing, |t| &t.word)
            .into_iter()
            .map(|t| StrongFailureJson {
                word: al.render(&t.word),
                weight: t.weight.to_string(),
                residual: r.raw_residual(&t.raw_scheme, &t.word),
                canonical_text: r.ii(&t.canonical),
                canonical: ii_json(&al, &so.expansion.grid, &t.canonical),
            })
            .collect();
        let satisfied = if so.decided { so.order } else { cap };
        let lyndon = lyndon_reduced_conditions(&al, scheme.interpretation, satisfied)?;
        let mut notes = vec![format!(
            "global strong error exponent μ = {}; local residuals start at weight μ+1/2",
            so.order
        )];
        if so.decided {
            let names: Vec<&str> = failing.iter().map(|f| f.word.as_str()).collect();
            let _ = writeln!(text, "strong order {}; first failing words {}", so.order, names.join(", "));
            for f in &failing {
                let _ = writeln!(text, "  {}  weight {}  {}", f.word, f.weight, f.residual);
                if f.canonical_text != f.residual {
                    let _ = writeln!(text, "      canonical: {}", f.canonical_text);
                }
            }
        } else {
            notes.push(format!("undecided at weight cap {cap}"));
            let _ = writeln!(text, "strong order ≥ {cap}: undecided at weight cap (no residual up to weight {cap})");
            exit = EXIT_UNDECIDED;
        }
        let _ = writeln!(
            text,
            "  Lyndon conditions up to weight {satisfied}: {}",
            if lyndon.is_empty() { "none".to_string() } else { words_list(&al, &lyndon).join(", ") }
        );
        reports.push(OrderReport {
            mode: "strong",
            order: serde_json::Value::String(so.order.to_string()),
            decided: so.decided,
            checked_up_to: cap.to_string(),
            failing: serde_json::to_value(&failing).expect("serializable"),
            hypothesis: splitorder_core::expectation::check_hypothesis(&scheme).holds,
            overlaps: Vec::new(),
            deterministic_order: None,
            barrier: None,
            lyndon_conditions: Some(words_list(&al, &lyndon)),
            notes,
        });
    }

    if o.mode.weak() {
        let max_sigma = cap.halves() / 2;
        let wo = weak_order(&scheme, max_sigma)?;
        let det = deterministic_order(&scheme, max_sigma)?;
        let barrier = barrier_check(&scheme, &wo);
        let failing: Vec<WeakFailureJson> = display_order(&al, &wo.failing, |f| &f.word)
            .into_iter()
            .map(|f| WeakFailureJson {
                word: al.render(&f.word),
                residual: f.residual.render(),
                scheme: f.scheme.render(),
                exact: f.exact.render(),
                residual_terms: h_json(&f.residual),
            })
            .collect();
        let respected = barrier.status == BarrierStatus::Respected;
        if wo.decided {
            match (respected, failing.first()) {
                (false, Some(f)) => {
                    let _ = writeln!(text, "weak order {}; E residual {} at {}", wo.order, f.residual, f.word);
                }
                _ => {
                    let _ = writeln!(text, "weak order {}; barrier respected", wo.order);
                }
            }
            for f in &failing {
                let _ = writeln!(text, "  E residual {} at {}  (scheme {}, exact {})", f.residual, f.word, f.scheme, f.exact);
            }
        } else {
            let _ = writeln!(text, "weak order ≥ {max_sigma}: undecided at weight cap");
            exit = exit.max(EXIT_UNDECIDED);
        }
        if wo.hypothesis.holds {
            let _ = writeln!(text, "  hypothesis holds (stage intervals of each noise are disjoint)");
        } else {
            for ov in &wo.hypothesis.overlaps {
                let _ = writeln!(
                    text,
                    "  hypothesis violated: {} drives overlapping stages {} and {}",
                    ov.letter, ov.stages.0, ov.stages.1
                );
            }
        }
        let _ = writeln!(
            text,
            "  deterministic order {}{}",
            det.order,
            if det.at_cap { " (at cap)" } else { "" }
        );
        let _ = writeln!(text, "  barrier: {}", barrier.message);
        let status = match barrier.status {
            BarrierStatus::Respected => "respected",
            BarrierStatus::NotApplicable => "not-applicable",
            BarrierStatus::Contradiction => "contradiction",
        };
        if barrier.status == BarrierStatus::Contradiction {
            exit = EXIT_INCONSISTENT;
        }
        let mut notes = vec![format!(
            "global weak error exponent σ = {}; expectation residuals start at weight σ+1",
            wo.order
        )];
        if !wo.decided {
            notes.push(format!("undecided at weight cap {max_sigma}"));
        }
        reports.push(OrderReport {
            mode: "weak",
            order: serde_json::Value::from(wo.order),
            decided: wo.decided,
            checked_up_to: max_sigma.to_string(),
            failing: serde_json::to_value(&failing).expect("serializable"),
            hypothesis: wo.hypothesis.holds,
            overlaps: wo
                .hypothesis
                .overlaps
                .iter()
                .map(|o| OverlapJson { letter: o.letter.clone(), stages: o.stages })
                .collect(),
            deterministic_order: Some(DeterministicJson { order: det.order, at_cap: det.at_cap }),
            barrier: Some(BarrierJson { status, message: barrier.message.clone() }),
            lyndon_conditions: None,
            notes,
        });
    }

    let mode = match o.mode {
        Mode::Strong => "strong",
        Mode::Weak => "weak",
        Mode::Both => "both",
    };
    let interp = scheme.interpretation.to_string();
    let digest = digest(&[b"analyze", &input.bytes, mode.as_bytes(), cap.to_string().as_bytes(), interp.as_bytes()]);
    let payload = AnalyzePayload {
        scheme: input.label.clone(),
        interpretation: interp,
        stages: scheme.describe(),
        warnings: scheme.warnings.clone(),
        reports,
    };
    Ok(Outcome { text, json: envelope("analyze", digest, common, payload), exit })
}

#[derive(Clone, Debug)]
pub struct ConditionsOptions {
    pub alphabet: String,
    pub order: Option<Weight>,
    pub max_length: Option<usize>,
    pub lyndon: bool,
    pub interpretation: Interpretation,
}

pub fn conditions(o: &ConditionsOptions, common: &Common) -> CliResult<Outcome> {
    let al = Alphabet::parse_spec(&o.alphabet)?;
    if al.strat_set().is_empty() {
        return Err(Error::Input("alphabet is empty".into()).into());
    }
    let target = match (o.order, o.max_length) {
        (Some(w), _) => w,
        // Every letter weighs at most 1.
        (None, Some(n)) => Weight::from_int(n as u32),
        (None, None) => return Err(Error::Input("give --order, --max-length or both".into()).into()),
    };
    let mut words = if o.lyndon {
        lyndon_reduced_conditions(&al, o.interpretation, target)?
    } else {
        full_conditions(&al, o.interpretation, target)?
    };
    if let Some(n) = o.max_length {
        words.retain(|w| w.len() <= n);
    }
    words.retain(|w| !w.is_empty());
    let rows: Vec<ConditionJson> =
        words.iter().map(|w| ConditionJson { word: al.render(w), weight: al.weight(w).to_string() }).collect();
    let mut text = String::new();
    let kind = if o.lyndon { "Lyndon-reduced" } else { "full" };
    let _ = writeln!(
        text,
        "{kind} {} conditions up to weight {target}{}: {} word{}",
        o.interpretation,
        o.max_length.map(|n| format!(", length ≤ {n}")).unwrap_or_default(),
        rows.len(),
        if rows.len() == 1 { "" } else { "s" }
    );
    for r in &rows {
        let _ = writeln!(text, "  {}  {}", r.word, r.weight);
    }
    let digest = digest(&[
        b"conditions",
        o.alphabet.as_bytes(),
        target.to_string().as_bytes(),
        format!("{:?} {} {}", o.max_length, o.lyndon, o.interpretation).as_bytes(),
    ]);
    let payload = ConditionsPayload {
        alphabet: o.alphabet.clone(),
        interpretation: o.interpretation.to_string(),
        max_weight: target.to_string(),
        max_length: o.max_length,
        lyndon: o.lyndon,
        words: rows,
    };
    Ok(Outcome { text, json: envelope("conditions", digest, common, payload), exit: EXIT_OK })
}

#[derive(Clone, Debug)]
pub struct LocalErrorOptions {
    pub scheme: String,
    pub max_weight: Option<Weight>,
    pub interpretation: Option<Interpretation>,
    pub stages: bool,
}

pub fn local_error(o: &LocalErrorOptions, common: &Common) -> CliResult<Outcome> {
    let input = load_scheme(&o.scheme)?;
    let scheme = validate(&input.spec, o.interpretation)?;
    let al = scheme.alphabet.clone();
    let cap = o.max_weight.unwrap_or(Weight::from_int(3));
    let le = local_error_expansion(&scheme, cap)?;
    let r = le.renderer(&al);
    let mut text = String::new();
    header(&mut text, &input.label, &scheme);
    let sym = match scheme.interpretation {
        Interpretation::Stratonovich => "δ_w",
        Interpretation::Ito => "η_w",
    };
    let rows: Vec<ResidualRowJson> = display_order(&al, &le.terms, |t| &t.word)
        .into_iter()
        .map(|t| ResidualRowJson {
            word: al.render(&t.word),
            weight: t.weight.to_string(),
            residual: r.raw_residual(&t.raw_scheme, &t.word),
            canonical_text: r.ii(&t.canonical),
            canonical: ii_json(&al, &le.grid, &t.canonical),
        })
        .collect();
    if rows.is_empty() {
        let _ = writeln!(text, "no residuals up to weight cap {cap}");
    } else {
        let _ = writeln!(text, "local error residuals {sym} up to weight {cap}:");
        let width = rows.iter().map(|r| r.word.chars().count()).max().unwrap_or(1);
        for row in &rows {
            let pad = width - row.word.chars().count();
            let _ = writeln!(text, "  {}{}  {:>3}  {}", row.word, " ".repeat(pad), row.weight, row.residual);
            if row.canonical_text != row.residual {
                let _ = writeln!(text, "  {}       = {}", " ".repeat(width), row.canonical_text);
            }
        }
    }
    let mut stage_series = Vec::new();
    if o.stages {
        let mut eng = ChenEngine::for_scheme(&scheme, cap);
        for (i, st) in scheme.stages.iter().enumerate() {
            let s = eng.stage_series(&al, st)?;
            let letters: Vec<&str> = st.letters.ids().map(|id| al.letter(id).symbol.as_str()).collect();
            let terms: Vec<StageTermJson> = s
                .sorted_support()
                .into_iter()
                .map(|(w, c)| StageTermJson { word: al.render(w), coefficient: r.ii(c) })
                .collect();
            let _ = writeln!(text, "stage {} {{{}}} series:", i + 1, letters.join(","));
            for t in &terms {
                let _ = writeln!(text, "  {}  {}", t.word, t.coefficient);
            }
            stage_series.push(StageSeriesJson { stage: i + 1, letters: letters.join(","), terms });
        }
    }
    let interp = scheme.interpretation.to_string();
    let digest = digest(&[
        b"local-error",
        &input.bytes,
        cap.to_string().as_bytes(),
        interp.as_bytes(),
        format!("{}", o.stages).as_bytes(),
    ]);
    let payload = LocalErrorPayload {
        scheme: input.label,
        interpretation: interp,
        max_weight: cap.to_string(),
        residuals: rows,
        stage_series,
    };
    Ok(Outcome { text, json: envelope("local-error", digest, common, payload), exit: EXIT_OK })
}

#[derive(Clone, Debug)]
pub struct ConvertOptions {
    pub system: String,
    pub additive: Option<bool>,
}

pub fn convert(o: &ConvertOptions, common: &Common) -> CliResult<Outcome> {
    let f = load_system_file(&o.system)?;
    let additive = o.additive.or(f.additive);
    let c = convert_system(&f.spec, additive)?;
    let mut text = String::new();
    let _ = writeln!(text, "ito system: deterministic {{{}}}, stochastic {{{}}}", f.spec.alphabet.deterministic.join(","), c.stochastic.join(","));
    let _ = writeln!(
        text,
        "stratonovich system: deterministic {{{}}}, stochastic {{{}}}",
        c.deterministic.join(","),
        c.stochastic.join(",")
    );
    for (l, recipe) in &c.corrections {
        let _ = writeln!(text, "  {l}: {recipe}");
    }
    match c.coincide {
        Some(true) => {
            let _ = writeln!(text, "additive noise: correction fields vanish, systems coincide");
        }
        Some(false) => {
            let _ = writeln!(text, "multiplicative noise: correction fields are nonzero");
        }
        None => {}
    }
    let digest = digest(&[b"convert", &f.bytes, format!("{additive:?}").as_bytes()]);
    let payload = ConvertPayload {
        input_interpretation: f.spec.interpretation.to_string(),
        output_interpretation: Interpretation::Stratonovich.to_string(),
        deterministic: c.deterministic.clone(),
        stochastic: c.stochastic.clone(),
        corrections: c.corrections.iter().map(|(l, r)| CorrectionJson { letter: l.clone(), field: r.clone() }).collect(),
        systems_coincide: c.coincide,
    };
    Ok(Outcome { text, json: envelope("convert", digest, common, payload), exit: EXIT_OK })
}

#[derive(Clone, Debug)]
pub struct VerifyMcOptions {
    pub scheme: String,
    pub system: String,
    pub mode: Mode,
    pub paths: usize,
    pub h_list: Option<String>,
    pub seed: u64,
    pub observable: Option<String>,
    pub interpretation: Option<Interpretation>,
    pub coefficients: bool,
    pub coefficient_paths: usize,
}

fn estimate_line(e: &OrderEstimate) -> String {
    let pred = e.predicted.map_or("none".to_string(), |p| format!("{p}"));
    let mode = match e.mode {
        splitorder_mc::estimate::Mode::Strong => "strong",
        splitorder_mc::estimate::Mode::Weak => "weak",
    };
    let verdict = match e.verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "FAIL",
        Verdict::Inconclusive => "inconclusive",
        Verdict::NoPrediction => "no prediction",
    };
    format!("{mode} slope {:.3} ± {:.3} (predicted {pred}, tolerance {}): {verdict}", e.slope, e.stderr, e.tolerance)
}

pub fn verify_mc(o: &VerifyMcOptions, common: &Common) -> CliResult<Outcome> {
    let input = load_scheme(&o.scheme)?;
    let scheme = validate(&input.spec, o.interpretation)?;
    let al = scheme.alphabet.clone();
    let sys = load_system(&o.system, &al)?;
    let h_list = match &o.h_list {
        Some(s) => parse_h_list(s, sys.horizon)?,
        None => (3..=6).map(|k| sys.horizon / f64::from(1u32 << k)).collect(),
    };
    splitorder_mc::estimate::parse_ladder(&h_list, sys.horizon)?;
    let observable = match &o.observable {
        Some(s) => Observable::parse(s)?,
        None => sys.observable.clone(),
    };
    let (Observable::Coordinate(i) | Observable::Square(i)) = observable;
    if i >= sys.dim {
        return Err(Error::Input(format!("observable {} exceeds dimension {}", observable.describe(), sys.dim)).into());
    }
    if o.paths < 2 {
        return Err(Error::Input("need at least 2 paths".into()).into());
    }
    let cfg = McConfig::new(o.paths, o.seed, h_list.clone());
    let mut text = String::new();
    header(&mut text, &input.label, &scheme);
    let _ = writeln!(text, "system {} (T = {}), {} paths, seed {}", sys.name, sys.horizon, o.paths, o.seed);
    let mut estimates = Vec::new();
    let mut exit = EXIT_OK;
    let mut runs = Vec::new();
    if o.mode.strong() {
        runs.push(estimate_strong_order(&scheme, &sys, &cfg)?);
    }
    if o.mode.weak() {
        runs.push(estimate_weak_order(&scheme, &sys, &observable, &cfg)?);
    }
    for e in runs {
        let _ = writeln!(text, "{}", estimate_line(&e));
        for p in &e.points {
            let _ = writeln!(text, "  h = {:<10} error {:.4e} ± {:.1e}", p.h, p.error, p.stderr);
        }
        for n in &e.notes {
            let _ = writeln!(text, "  note: {n}");
        }
        if e.verdict == Verdict::Fail {
            exit = EXIT_INCONSISTENT;
        }
        estimates.push(EstimateJson {
            mode: e.mode,
            scheme: input.label.clone(),
            system: sys.name.clone(),
            h_list: h_list.clone(),
            slope: e.slope,
            stderr: e.stderr,
            paths: o.paths,
            seed: o.seed,
            verdict: e.verdict,
            predicted: e.predicted,
            tolerance: e.tolerance,
            points: e.points,
            notes: e.notes,
        });
    }
    let mut coefficients = Vec::new();
    if o.coefficients {
        let words = full_conditions(&al, scheme.interpretation, Weight::from_int(2))?;
        let _ = writeln!(text, "symbolic coefficients against witness simulations ({} paths):", o.coefficient_paths);
        for w in words {
            if w.ids().iter().any(|&id| !matches!(al.kind(id), LetterKind::Deterministic | LetterKind::Stochastic)) {
                continue;
            }
            let c = verify_symbolic_coefficient(
                &scheme,
                &w,
                CheckOptions { paths: o.coefficient_paths, seed: o.seed, ..Default::default() },
            )?;
            let _ = writeln!(
                text,
                "  {:<5} symbolic {:+.4} direct {:+.4}  z {:+.2} / {:+.2}  {}",
                c.word,
                c.symbolic_mean,
                c.direct_mean,
                c.z_mean,
                c.z_second_moment,
                if c.pass { "pass" } else { "FAIL" }
            );
            if !c.pass {
                exit = EXIT_INCONSISTENT;
            }
            coefficients.push(c);
        }
    }
    let interp = scheme.interpretation.to_string();
    let digest = digest(&[
        b"verify-mc",
        &input.bytes,
        o.system.as_bytes(),
        format!("{:?} {} {:?} {} {} {} {}", o.mode, o.paths, h_list, o.seed, observable.describe(), o.coefficients, o.coefficient_paths)
            .as_bytes(),
        interp.as_bytes(),
    ]);
    let payload = McPayload { scheme: input.label, system: sys.name.clone(), interpretation: interp, estimates, coefficients };
    Ok(Outcome { text, json: envelope("verify-mc", digest, common, payload), exit })
}

pub fn selfcheck(max_weight: Weight, fault: Option<&str>, common: &Common) -> CliResult<Outcome> {
    let results = crate::selfcheck::run(max_weight, fault)?;
    let mut text = String::new();
    let mut first = None;
    for r in &results {
        let status = if r.passed { "ok  " } else { "FAIL" };
        let _ = writeln!(text, "{status} {:<28} {:>6} checks  {:>6} ms  {}", r.name, r.checked, r.millis, r.detail);
        if !r.passed && first.is_none() {
            first = Some(r.name.clone());
        }
    }
    match &first {
        Some(n) => {
            let _ = writeln!(text, "first failing property: {n}");
        }
        None => {
            let _ = writeln!(text, "all {} properties pass at weight {max_weight}", results.len());
        }
    }
    let digest = digest(&[b"selfcheck", max_weight.to_string().as_bytes(), fault.unwrap_or("").as_bytes()]);
    let payload = SelfcheckPayload {
        max_weight: max_weight.to_string(),
        properties: results
            .iter()
            .map(|r| PropertyJson { name: r.name.clone(), passed: r.passed, checked: r.checked, detail: r.detail.clone() })
            .collect(),
        first_failure: first.clone(),
    };
    let exit = if first.is_some() { EXIT_INCONSISTENT } else { EXIT_OK };
    Ok(Outcome { text, json: envelope("selfcheck", digest, common, payload), exit })
}
