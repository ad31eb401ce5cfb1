//! Acceptance criteria, one line each. Tolerances are pinned here; MC
//! seeds are fixed so that every run sees the same paths.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use splitorder_core::analysis::strong_order;
use splitorder_core::bridge::{iterated_integral_identity, rho_by_transposition, rho_word, verify_hoffman_iso};
use splitorder_core::chen::{Atom, ChenEngine, IIPoly};
use splitorder_core::expectation::{
    barrier_check, check_hypothesis, deterministic_order, exact_expectation, expected_i, expected_j, moment,
    weak_order, BarrierStatus,
};
use splitorder_core::poly::HPoly;
use splitorder_core::ring::{factorial, q, qi, Coeff, Q};
use splitorder_core::scheme::{builtin, Interpretation, Scheme, CATALOG};
use splitorder_core::series::{check_quasishuffle_relations, check_shuffle_relations, QWordPoly};
use splitorder_core::words::{Alphabet, LetterKind, Weight, Word};
use splitorder_mc::estimate::{estimate_strong_order, estimate_weak_order, McConfig, OrderEstimate, Verdict};
use splitorder_mc::iterated::{verify_symbolic_coefficient, CheckOptions};
use splitorder_mc::system::{builtin_system, witness_system, BoundSystem, Observable};

const STRONG_TOL: f64 = 0.25;
const WEAK_TOL: f64 = 0.35;
const Z_MAX: f64 = 4.0;
const SYMBOLIC_BUDGET: Duration = Duration::from_secs(1);
const MC_BUDGET: Duration = Duration::from_secs(300);
const SELFCHECK_BUDGET: Duration = Duration::from_secs(60);

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_splitorder")
}

fn schemes_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemes")
}

fn scheme_file(name: &str) -> String {
    schemes_dir().join(name).to_string_lossy().into_owned()
}

struct Run {
    stdout: String,
    code: i32,
    elapsed: Duration,
}

fn run(args: &[&str]) -> Run {
    let t0 = Instant::now();
    let out = Command::new(bin()).args(args).output().expect("binary runs");
    Run {
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        code: out.status.code().unwrap_or(-1),
        elapsed: t0.elapsed(),
    }
}

fn scheme(name: &str, interp: Option<Interpretation>) -> Scheme {
    let spec = builtin(name).unwrap();
    let spec = match interp {
        Some(i) => spec.with_interpretation(i),
        None => spec,
    };
    spec.validate().unwrap()
}

fn h(c: Q, deg: u32) -> HPoly {
    HPoly::monomial(c, deg)
}

fn word_poly(al: &Alphabet, terms: &[(&str, Q)]) -> QWordPoly {
    let mut p = QWordPoly::default();
    for (w, c) in terms {
        p.add_term(al.parse_word(w).unwrap(), c.clone());
    }
    p
}

/// Strong residual lines of the Lie-Trotter example, through the binary
/// and through the library.
fn lie_trotter_residuals(file: &str, sym: char) -> Check {
    let r = run(&["analyze", &scheme_file(file), "--mode", "strong"]);
    ensure!(r.code == 0, "exit code {}", r.code);
    ensure!(r.elapsed < SYMBOLIC_BUDGET, "took {:?}", r.elapsed);
    ensure!(r.stdout.contains("strong order 1; first failing words Ab, bA"), "headline missing:\n{}", r.stdout);
    let ab = format!("  Ab  weight 3/2  {sym}[1;A]·{sym}[1;b] - {sym}[1;Ab]");
    let ba = format!("  bA  weight 3/2  -{sym}[1;bA]");
    ensure!(r.stdout.lines().any(|l| l == ab), "missing line {ab:?}");
    ensure!(r.stdout.lines().any(|l| l == ba), "missing line {ba:?}");
    let interp = if sym == 'J' { Interpretation::Stratonovich } else { Interpretation::Ito };
    let s = scheme("lie-trotter", Some(interp));
    let so = strong_order(&s, Weight::from_int(3)).map_err(|e| e.to_string())?;
    let words: Vec<String> = so.failing.iter().map(|t| s.alphabet.render(&t.word)).collect();
    ensure!(so.order == Weight::ONE && so.decided, "order {}", so.order);
    ensure!(words.len() == 2 && words.contains(&"Ab".into()) && words.contains(&"bA".into()), "failing {words:?}");
    Ok(format!("strong order 1, residuals on Ab and bA in {:?}", r.elapsed))
}

fn criterion_1() -> Check {
    lie_trotter_residuals("lie-trotter.json", 'J')
}

fn criterion_2() -> Check {
    let msg = lie_trotter_residuals("lie-trotter-ito.json", 'I')?;
    let s = scheme("lie-trotter", Some(Interpretation::Ito));
    let al = s.alphabet.clone();
    let mut eng = ChenEngine::for_scheme(&s, Weight(3));
    let phi1 = eng.stage_series(&al, &s.stages[0]).map_err(|e| e.to_string())?;
    let hp = IIPoly::var(Atom::H);
    ensure!(phi1.get(&al.parse_word("A^").unwrap()) == hp, "Φ(1) coefficient of Ā is not h");
    for w in ["A^A", "AA^"] {
        let c = phi1.get(&al.parse_word(w).unwrap());
        ensure!(c != IIPoly::default(), "Φ(1) has no {w} term");
    }
    let phi2 = eng.stage_series(&al, &s.stages[1]).map_err(|e| e.to_string())?;
    ensure!(phi2.get(&al.parse_word("b").unwrap()) == hp, "Φ(2) coefficient of b is not h");
    Ok(format!("{msg}; Φ(1) carries Ā, ĀA, AĀ"))
}

fn criterion_3() -> Check {
    let s = scheme("counterexample", None);
    let al = s.alphabet.clone();
    ensure!(s.interpretation == Interpretation::Ito, "counterexample must be Ito");
    ensure!(!check_hypothesis(&s).holds, "hypothesis should fail");
    let wo = weak_order(&s, 1).map_err(|e| e.to_string())?;
    let w = |x: &str| al.parse_word(x).unwrap();
    let expect = [
        ("", h(qi(1), 0)),
        ("A", HPoly::default()),
        ("a", h(qi(1), 1)),
        ("AA", h(q(1, 2), 1)),
        ("A^", h(qi(1), 1)),
    ];
    for (x, want) in &expect {
        let got = wo.expected_scheme.get(&w(x));
        ensure!(&got == want, "E Ĩ at {x:?}: {} ≠ {}", got.render(), want.render());
    }
    let exact = exact_expectation(al.clone(), Interpretation::Ito, Weight::ONE).map_err(|e| e.to_string())?;
    ensure!(exact.get(&w("AA")) == HPoly::default(), "E I_AA ≠ 0");
    ensure!(wo.decided && wo.order == 0, "weak order {}", wo.order);
    ensure!(wo.failing.len() == 1 && wo.failing[0].word == w("AA"), "weak failing words differ");
    ensure!(wo.failing[0].residual == h(q(1, 2), 1), "weak residual {}", wo.failing[0].residual.render());
    let so = strong_order(&s, Weight::from_int(2)).map_err(|e| e.to_string())?;
    ensure!(so.decided && so.order == Weight::ZERO, "strong order {}", so.order);
    ensure!(so.failing.len() == 1 && so.failing[0].word == w("A"), "strong failing words differ");
    // The scheme's A coefficient is twice the half-step integral.
    let mut eng = ChenEngine::for_scheme(&s, Weight::ONE);
    let series = eng.scheme_series(&s).map_err(|e| e.to_string())?;
    let two_ia = IIPoly::var(Atom::X { cell: 0, word: w("A") }).scaled(&qi(2));
    ensure!(series.get(&w("A")) == two_ia, "Ĩ_A ≠ 2 I_A over the first half step");
    let r = run(&["analyze", &scheme_file("counterexample.json"), "--mode", "weak"]);
    ensure!(r.stdout.contains("weak order 0; E residual h/2 at AA"), "weak headline:\n{}", r.stdout);
    Ok("E Ĩ = 1∅ + 0A + h a + (h/2)AA + hĀ; weak 0 at AA (h/2); strong 0 at A".into())
}

fn criterion_4() -> Check {
    let al = Alphabet::new(&["a"], &["A"]).unwrap();
    let one = qi(1);
    let w = |x: &str| al.parse_word(x).unwrap();
    ensure!(expected_j(&al, &w("AA"), &one) == h(q(1, 2), 1), "E J_AA");
    ensure!(expected_j(&al, &w("AAAA"), &one) == h(q(1, 8), 2), "E J_AAAA");
    ensure!(expected_j(&al, &w("AAA"), &one) == HPoly::default(), "E J_AAA");
    let mut checked = 0;
    for u in al.enumerate_words(al.extended_set(), Weight::from_int(4)).unwrap() {
        let n = u.len() as u32;
        let want = if u.ids().iter().all(|&i| al.kind(i) != LetterKind::Stochastic) {
            h(qi(1) / factorial(n), n)
        } else {
            HPoly::default()
        };
        ensure!(expected_i(&al, &u, &one) == want, "E I_{}", al.render(&u));
        checked += 1;
    }
    let m = moment(&al, &[w("A"), w("A")], Interpretation::Ito, &one);
    ensure!(m == h(qi(1), 1), "E I_A² = {}", m.render());
    Ok(format!("E J_AA = h/2, E J_AAAA = h^2/8, E J_AAA = 0, {checked} Ito words, E I_A² = h"))
}

fn criterion_5() -> Check {
    let cap = Weight::from_int(3);
    let mut n = 0;
    for name in CATALOG {
        for interp in [Interpretation::Stratonovich, Interpretation::Ito] {
            let s = scheme(name, Some(interp));
            let mut eng = ChenEngine::for_scheme(&s, cap);
            let letters = eng.full_letters();
            let series = [eng.scheme_series(&s), eng.exact_series()];
            for (tag, ser) in ["scheme", "exact"].iter().zip(series) {
                let ser = ser.map_err(|e| e.to_string())?;
                let v = match interp {
                    Interpretation::Stratonovich => check_shuffle_relations(&ser, letters),
                    Interpretation::Ito => check_quasishuffle_relations(&ser, letters),
                }
                .map_err(|e| e.to_string())?;
                ensure!(v.is_empty(), "{name} ({interp}) {tag}: {} violations", v.len());
                n += 1;
            }
        }
    }
    let al = Arc::new(Alphabet::new(&["a"], &["A"]).unwrap());
    let ito = exact_expectation(al.clone(), Interpretation::Ito, cap).map_err(|e| e.to_string())?;
    let v = check_shuffle_relations(&ito, al.extended_set()).map_err(|e| e.to_string())?;
    ensure!(v.is_empty(), "Ito expectation: {} shuffle violations", v.len());
    let strat = exact_expectation(al.clone(), Interpretation::Stratonovich, cap).map_err(|e| e.to_string())?;
    let v = check_shuffle_relations(&strat, al.strat_set()).map_err(|e| e.to_string())?;
    let a = al.parse_word("A").unwrap();
    let aa = v.iter().find(|x| x.u == a && x.v == a);
    ensure!(aa.is_some_and(|x| x.lhs == h(qi(1), 1) && x.rhs == HPoly::default()), "no (A,A) violation h ≠ 0");
    Ok(format!("{n} Chen series multiplicative; Ito E shuffle-multiplicative; Strat E fails at (A,A)"))
}

fn criterion_6() -> Check {
    let al = Alphabet::new(&["a"], &["A"]).unwrap();
    let aa = rho_word(&al, &al.parse_word("AA").unwrap());
    ensure!(aa == word_poly(&al, &[("AA", qi(1)), ("A*", q(-1, 2))]), "ρ(AA)");
    let p = rho_word(&al, &al.parse_word("aAAA").unwrap());
    ensure!(p == word_poly(&al, &[("aAAA", qi(1)), ("aA*A", q(-1, 2)), ("aAA*", q(-1, 2))]), "ρ(aAAA)");
    let p = rho_word(&al, &al.parse_word("AAAA").unwrap());
    let want = word_poly(
        &al,
        &[("AAAA", qi(1)), ("A*AA", q(-1, 2)), ("AA*A", q(-1, 2)), ("AAA*", q(-1, 2)), ("A*A*", q(1, 4))],
    );
    ensure!(p == want, "ρ(AAAA)");
    let id = iterated_integral_identity(&al, &al.parse_word("AA").unwrap());
    ensure!(id == "I_AA = J_AA - (1/2)J_A★" || id == "I_AA = J_AA - (1/2)J_A*", "identity {id:?}");
    let v = verify_hoffman_iso(&al, al.extended_set(), Weight::from_int(2)).map_err(|e| e.to_string())?;
    ensure!(v.is_empty(), "{} Hoffman violations", v.len());
    for u in al.enumerate_words(al.extended_set(), Weight::from_int(2)).unwrap() {
        ensure!(rho_word(&al, &u) == rho_by_transposition(&al, &u).unwrap(), "ρ({}) transposition", al.render(&u));
    }
    Ok(format!("ρ displays exact; {id}; ρ(u⋈v) = ρ(u)⧢ρ(v) to weight 2"))
}

fn criterion_7() -> Check {
    let s = scheme("strang-outer-a", None);
    let wo = weak_order(&s, 3).map_err(|e| e.to_string())?;
    let det = deterministic_order(&s, 3).map_err(|e| e.to_string())?;
    ensure!(wo.decided && wo.order == 2, "strang weak order {}", wo.order);
    ensure!(!det.at_cap && det.order == 2, "strang deterministic order {}", det.order);
    ensure!(
        !wo.failing.is_empty() && wo.failing.iter().all(|f| s.alphabet.weight(&f.word) == Weight::from_int(3)),
        "weak order 3 conditions should fail"
    );
    ensure!(barrier_check(&s, &wo).status == BarrierStatus::Respected, "barrier");
    let mut n = 0;
    for name in CATALOG {
        for interp in [Interpretation::Stratonovich, Interpretation::Ito] {
            let s = scheme(name, Some(interp));
            if !check_hypothesis(&s).holds {
                continue;
            }
            let wo = weak_order(&s, 3).map_err(|e| e.to_string())?;
            let det = deterministic_order(&s, 3).map_err(|e| e.to_string())?;
            ensure!(wo.order == det.order, "{name} ({interp}): weak {} vs deterministic {}", wo.order, det.order);
            ensure!(barrier_check(&s, &wo).status != BarrierStatus::Contradiction, "{name}: barrier contradiction");
            n += 1;
        }
    }
    let r = run(&["analyze", &scheme_file("strang.json"), "--mode", "weak"]);
    ensure!(r.stdout.contains("weak order 2; barrier respected"), "strang headline:\n{}", r.stdout);
    Ok(format!("strang weak 2 = deterministic 2; weak = deterministic on {n} schemes"))
}

fn criterion_8() -> Check {
    let al = Arc::new(Alphabet::new(&["a"], &["A"]).unwrap());
    let words: Vec<Word> = al
        .enumerate_words(al.strat_set(), Weight::from_int(4))
        .unwrap()
        .into_iter()
        .filter(|w| !w.is_empty() && w.len() <= 4)
        .collect();
    ensure!(words.len() == 30, "{} words of length ≤ 4", words.len());
    for w in &words {
        let sys = BoundSystem::bind(&witness_system(&al, w).unwrap(), al.clone()).unwrap();
        let origin = nalgebra::DVector::zeros(sys.dim);
        for u in &words {
            let v = sys.word_basis_function(u, &origin)[0];
            ensure!(v == if u == w { 1.0 } else { 0.0 }, "witness {}: f_{} = {v}", al.render(w), al.render(u));
        }
    }
    Ok("30 × 30 witness evaluations exact".into())
}

fn estimate_ok(e: &OrderEstimate, tol: f64, label: &str) -> Check {
    let p = e.predicted.ok_or(format!("{label}: no prediction"))?;
    ensure!((e.slope - p).abs() <= tol, "{label}: slope {:.3} vs {p} (tol {tol})", e.slope);
    ensure!(e.verdict == Verdict::Pass, "{label}: verdict {:?}", e.verdict);
    Ok(format!("{label} {:.2}/{p}", e.slope))
}

fn criterion_9() -> Check {
    let t0 = Instant::now();
    let ladder = |t: f64| (3..=6).map(|k| t / f64::from(1u32 << k)).collect::<Vec<_>>();
    let mut parts = Vec::new();

    let lt = scheme("lie-trotter", None);
    let sys = BoundSystem::bind(&witness_system(&lt.alphabet, &lt.alphabet.parse_word("Ab").unwrap()).unwrap(), lt.alphabet.clone())
        .unwrap();
    let e = estimate_strong_order(&lt, &sys, &McConfig::new(10_000, 11, ladder(sys.horizon))).map_err(|e| e.to_string())?;
    parts.push(estimate_ok(&e, STRONG_TOL, "LT witness:Ab strong")?);

    let sys = BoundSystem::bind(&builtin_system("gbm-integrator").unwrap(), lt.alphabet.clone()).unwrap();
    let cfg = McConfig::new(10_000, 12, ladder(sys.horizon));
    parts.push(estimate_ok(&estimate_strong_order(&lt, &sys, &cfg).map_err(|e| e.to_string())?, STRONG_TOL, "LT gbm-integrator strong")?);
    let obs = sys.observable.clone();
    parts.push(estimate_ok(&estimate_weak_order(&lt, &sys, &obs, &cfg).map_err(|e| e.to_string())?, WEAK_TOL, "LT gbm-integrator weak")?);

    let st = scheme("strang-outer-a", None);
    let sys = BoundSystem::bind(&builtin_system("ou").unwrap(), st.alphabet.clone()).unwrap();
    let cfg = McConfig::new(10_000, 13, ladder(sys.horizon));
    parts.push(estimate_ok(&estimate_strong_order(&st, &sys, &cfg).map_err(|e| e.to_string())?, STRONG_TOL, "Strang ou strong")?);
    let cfg = McConfig::new(40_000, 14, ladder(sys.horizon));
    let sq = Observable::parse("x1^2").unwrap();
    parts.push(estimate_ok(&estimate_weak_order(&st, &sys, &sq, &cfg).map_err(|e| e.to_string())?, WEAK_TOL, "Strang ou weak x²")?);

    let mut coeffs = 0;
    for (interp, paths) in [(Interpretation::Stratonovich, 2000), (Interpretation::Ito, 1000)] {
        let s = scheme("lie-trotter", Some(interp));
        let al = s.alphabet.clone();
        for w in al.enumerate_words(al.strat_set(), Weight::from_int(2)).unwrap().into_iter().skip(1) {
            let c = verify_symbolic_coefficient(&s, &w, CheckOptions { paths, seed: 15, h: 1.0, subdivision: 64 })
                .map_err(|e| e.to_string())?;
            ensure!(
                c.pass && c.z_mean.abs() < Z_MAX && c.z_second_moment.abs() < Z_MAX,
                "coefficient {} ({interp}): z {} / {}",
                c.word,
                c.z_mean,
                c.z_second_moment
            );
            coeffs += 1;
        }
    }
    let dt = t0.elapsed();
    ensure!(dt < MC_BUDGET, "MC took {dt:?}");
    Ok(format!("{}; {coeffs} coefficients |z| < {Z_MAX}; {:.0?}", parts.join(", "), dt))
}

fn criterion_10() -> Check {
    let r = run(&["selfcheck", "--max-weight", "3"]);
    ensure!(r.code == 0, "exit {}:\n{}", r.code, r.stdout);
    ensure!(r.elapsed < SELFCHECK_BUDGET, "took {:?}", r.elapsed);
    let n = r.stdout.lines().filter(|l| l.starts_with("ok ")).count();
    Ok(format!("{n} properties pass at weight 3 in {:.1?}", r.elapsed))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("Lie-Trotter Stratonovich residuals", criterion_1),
        ("Lie-Trotter Ito residuals", criterion_2),
        ("reused-increment counterexample", criterion_3),
        ("expectation formulas", criterion_4),
        ("multiplicativity suites", criterion_5),
        ("Ito/Stratonovich bridge", criterion_6),
        ("weak order barrier", criterion_7),
        ("witness oracle", criterion_8),
        ("Monte Carlo slopes and coefficients", criterion_9),
        ("self-check at weight 3", criterion_10),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed.push(i + 1);
                ("FAIL", d)
            }
        };
        let _ = writeln!(err, "criterion {:>2} {tag}  {name}: {detail}", i + 1);
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
