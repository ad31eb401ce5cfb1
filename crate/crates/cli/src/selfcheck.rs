//! Property suite behind `splitorder selfcheck`. Every property is
//! exhaustive up to the weight cap; none depends on random sampling except
//! the flow bridge, which uses a fixed seed.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitorder_core::analysis::{full_conditions, local_error_expansion, lyndon_reduced_conditions};
use splitorder_core::bridge::{rho_by_transposition, rho_word, verify_hoffman_iso};
use splitorder_core::chen::ChenEngine;
use splitorder_core::expectation::{
    barrier_check, check_hypothesis, deterministic_order, exact_expectation, expected_i, expected_j,
    expected_scheme_series, factorized_expectation, generator, weak_order, BarrierStatus,
};
use splitorder_core::ring::{q, qi};
use splitorder_core::scheme::{builtin, Interpretation, Scheme, CATALOG};
use splitorder_core::series::{
    check_quasishuffle_relations, check_shuffle_relations, exp_concat, expand_lyndon_poly, quasishuffle,
    quasishuffle_poly, shuffle, shuffle_poly, Canonicalizer, QWordPoly,
};
use splitorder_core::words::{Alphabet, Weight, Word};
use splitorder_core::Result;
use splitorder_mc::field::{exp_op, Affine, Op};
use splitorder_mc::system::{witness_system, BoundSystem, Observable, System};

pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub detail: String,
    pub millis: u64,
}

/// Counts checks and keeps the first failure. An injected fault inverts the
/// outcome of the first check.
struct Probe {
    checked: usize,
    failure: Option<String>,
    fault: bool,
}

impl Probe {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        let ok = if self.fault && self.checked == 1 { !ok } else { ok };
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }
}

type Property = fn(&mut Probe, Weight) -> Result<()>;

const PROPERTIES: &[(&str, Property)] = &[
    ("lyndon-factorization", lyndon_factorization),
    ("lyndon-count", lyndon_count),
    ("shuffle-algebra", shuffle_algebra),
    ("quasishuffle-algebra", quasishuffle_algebra),
    ("radford-basis", radford_basis),
    ("chen-multiplicativity", chen_multiplicativity),
    ("expectation-characters", expectation_characters),
    ("expectation-routes", expectation_routes),
    ("factorized-expectation", factorized_routes),
    ("rho-transposition", rho_transposition),
    ("hoffman-isomorphism", hoffman_isomorphism),
    ("lyndon-sufficiency", lyndon_sufficiency),
    ("weak-equals-deterministic", weak_equals_deterministic),
    ("weak-order-barrier", weak_order_barrier),
    ("witness-delta", witness_delta),
    ("ito-strat-flow-bridge", flow_bridge),
];

pub fn property_names() -> Vec<&'static str> {
    PROPERTIES.iter().map(|(n, _)| *n).collect()
}

pub fn run(max_weight: Weight, fault: Option<&str>) -> Result<Vec<PropertyResult>> {
    if let Some(f) = fault {
        if !PROPERTIES.iter().any(|(n, _)| *n == f) {
            return Err(splitorder_core::Error::Input(format!(
                "unknown property {f:?}; available: {}",
                property_names().join(", ")
            )));
        }
    }
    let mut out = Vec::new();
    for (name, prop) in PROPERTIES {
        let mut p = Probe { checked: 0, failure: None, fault: fault == Some(*name) };
        let t0 = Instant::now();
        prop(&mut p, max_weight)?;
        out.push(PropertyResult {
            name: name.to_string(),
            passed: p.failure.is_none(),
            checked: p.checked,
            detail: p.failure.unwrap_or_default(),
            millis: t0.elapsed().as_millis() as u64,
        });
    }
    Ok(out)
}

fn catalog() -> Vec<Scheme> {
    let mut out = Vec::new();
    for name in CATALOG {
        for i in [Interpretation::Stratonovich, Interpretation::Ito] {
            let s = builtin(name).and_then(|s| {
                s.with_interpretation(i).validate().map_err(splitorder_core::Error::Invalid)
            });
            out.push(s.expect("catalog schemes validate"));
        }
    }
    out
}

fn label(s: &Scheme) -> String {
    format!("{} ({})", s.name.as_deref().unwrap_or("?"), s.interpretation)
}

fn lyndon_factorization(p: &mut Probe, w: Weight) -> Result<()> {
    let al = Alphabet::new(&["a", "b"], &["A"])?;
    for word in al.enumerate_words(al.strat_set(), w)?.into_iter().skip(1) {
        let fs = word.lyndon_factorization()?;
        let mut cat = Word::empty();
        for f in &fs {
            cat = cat.concat(f);
        }
        let lyndon = fs.iter().map(|f| f.is_lyndon()).collect::<Result<Vec<_>>>()?.into_iter().all(|b| b);
        let decreasing = fs.windows(2).all(|x| x[0] >= x[1]);
        p.check(cat == word && lyndon && decreasing, || format!("factorization of {}", al.render(&word)));
    }
    Ok(())
}

fn mobius(n: u32) -> i64 {
    let (mut n, mut k, mut m) = (n, 2, 1i64);
    while k * k <= n {
        if n % k == 0 {
            n /= k;
            if n % k == 0 {
                return 0;
            }
            m = -m;
        }
        k += 1;
    }
    if n > 1 {
        m = -m;
    }
    m
}

/// Necklace counts: (1/n) Σ_{d|n} μ(d) k^{n/d} Lyndon words of length n.
fn lyndon_count(p: &mut Probe, w: Weight) -> Result<()> {
    let al = Alphabet::new(&[] as &[&str], &["A", "B"])?;
    let lw = al.enumerate_lyndon(al.strat_set(), w)?;
    for n in 1..=w.halves() {
        let got = lw.iter().filter(|x| x.len() == n as usize).count() as i64;
        let want: i64 = (1..=n).filter(|d| n % d == 0).map(|d| mobius(d) * 2i64.pow(n / d)).sum::<i64>() / n as i64;
        p.check(got == want, || format!("length {n}: {got} Lyndon words, expected {want}"));
    }
    Ok(())
}

fn binom(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

fn shuffle_algebra(p: &mut Probe, w: Weight) -> Result<()> {
    let al = Alphabet::new(&["a"], &["A"])?;
    let words = al.enumerate_words(al.strat_set(), w)?;
    let one = QWordPoly::word(Word::empty());
    for u in &words {
        let pu = QWordPoly::word(u.clone());
        p.check(shuffle_poly(&pu, &one) == pu, || format!("unit for {}", al.render(u)));
        for v in &words {
            if al.weight(u) + al.weight(v) > w {
                continue;
            }
            let uv = shuffle(u, v);
            p.check(uv == shuffle(v, u), || format!("{} ⧢ {} not commutative", al.render(u), al.render(v)));
            let total = uv.terms().fold(qi(0), |acc, (_, c)| acc + c);
            p.check(total == qi(binom(u.len() + v.len(), u.len())), || {
                format!("{} ⧢ {} has the wrong number of terms", al.render(u), al.render(v))
            });
            for x in &words {
                if al.weight(u) + al.weight(v) + al.weight(x) > w {
                    continue;
                }
                let px = QWordPoly::word(x.clone());
                let l = shuffle_poly(&uv, &px);
                let r = shuffle_poly(&pu, &shuffle(v, x));
                p.check(l == r, || format!("shuffle not associative at {},{},{}", al.render(u), al.render(v), al.render(x)));
            }
        }
    }
    Ok(())
}

fn quasishuffle_algebra(p: &mut Probe, w: Weight) -> Result<()> {
    let al = Alphabet::new(&["a"], &["A"])?;
    let words = al.enumerate_words(al.extended_set(), w)?;
    for u in &words {
        for v in &words {
            if al.weight(u) + al.weight(v) > w {
                continue;
            }
            let uv = quasishuffle(&al, u, v);
            p.check(uv == quasishuffle(&al, v, u), || format!("{} ⋈ {} not commutative", al.render(u), al.render(v)));
            // Every term keeps the total weight.
            let wt = al.weight(u) + al.weight(v);
            p.check(uv.terms().all(|(t, _)| al.weight(t) == wt), || format!("{} ⋈ {} not homogeneous", al.render(u), al.render(v)));
            for x in &words {
                if wt + al.weight(x) > w {
                    continue;
                }
                let l = quasishuffle_poly(&al, &uv, &QWordPoly::word(x.clone()));
                let r = quasishuffle_poly(&al, &QWordPoly::word(u.clone()), &quasishuffle(&al, v, x));
                p.check(l == r, || format!("⋈ not associative at {},{},{}", al.render(u), al.render(v), al.render(x)));
            }
        }
    }
    Ok(())
}

fn radford_basis(p: &mut Probe, w: Weight) -> Result<()> {
    let al = Alphabet::new(&["a", "b"], &["A"])?;
    let mut c = Canonicalizer::new();
    for word in al.enumerate_words(al.strat_set(), w)? {
        let lp = c.word(&word)?;
        let back = expand_lyndon_poly(&lp);
        let mut lyndon_atoms = true;
        for (m, _) in lp.terms() {
            for (l, _) in &m.0 {
                lyndon_atoms &= l.is_lyndon()?;
            }
        }
        p.check(back == QWordPoly::word(word.clone()) && lyndon_atoms, || {
            format!("canonical form of {} does not expand back", al.render(&word))
        });
    }
    Ok(())
}

fn chen_multiplicativity(p: &mut Probe, w: Weight) -> Result<()> {
    for s in catalog() {
        let mut eng = ChenEngine::for_scheme(&s, w);
        let letters = eng.full_letters();
        for (tag, series) in [("scheme", eng.scheme_series(&s)?), ("exact", eng.exact_series()?)] {
            let v = match s.interpretation {
                Interpretation::Stratonovich => check_shuffle_relations(&series, letters)?.len(),
                Interpretation::Ito => check_quasishuffle_relations(&series, letters)?.len(),
            };
            p.check(v == 0, || format!("{} {tag} series: {v} relation violations", label(&s)));
        }
    }
    Ok(())
}

fn expectation_characters(p: &mut Probe, w: Weight) -> Result<()> {
    let al = Arc::new(Alphabet::new(&["a"], &["A"])?);
    let ito = exact_expectation(al.clone(), Interpretation::Ito, w)?;
    let v = check_shuffle_relations(&ito, al.extended_set())?;
    p.check(v.is_empty(), || format!("Ito expectations violate {} shuffle relations", v.len()));
    let strat = exact_expectation(al.clone(), Interpretation::Stratonovich, w)?;
    let v = check_shuffle_relations(&strat, al.strat_set())?;
    let a = al.parse_word("A")?;
    p.check(v.iter().any(|x| x.u == a && x.v == a), || "Stratonovich expectations satisfy the (A,A) relation".into());
    Ok(())
}

fn expectation_routes(p: &mut Probe, w: Weight) -> Result<()> {
    let al = Arc::new(Alphabet::new(&["a"], &["A", "B"])?);
    let lam = q(2, 3);
    for interp in [Interpretation::Stratonovich, Interpretation::Ito] {
        let e = exp_concat(al.clone(), &generator(&al, al.strat_set(), interp), &lam, w)?;
        let letters = match interp {
            Interpretation::Stratonovich => al.strat_set(),
            Interpretation::Ito => al.extended_set(),
        };
        for word in al.enumerate_words(letters, w)? {
            let direct = match interp {
                Interpretation::Stratonovich => expected_j(&al, &word, &lam),
                Interpretation::Ito => expected_i(&al, &word, &lam),
            };
            p.check(e.get(&word) == direct, || format!("{interp} expectation of {}", al.render(&word)));
        }
    }
    Ok(())
}

fn factorized_routes(p: &mut Probe, w: Weight) -> Result<()> {
    for s in catalog() {
        if !check_hypothesis(&s).holds {
            continue;
        }
        let general = expected_scheme_series(&s, w)?;
        let fact = factorized_expectation(&s, w)?;
        p.check(general.equals_up_to_truncation(&fact), || format!("{}: expectation routes differ", label(&s)));
    }
    Ok(())
}

fn rho_transposition(p: &mut Probe, w: Weight) -> Result<()> {
    let al = Alphabet::new(&["a"], &["A", "B"])?;
    for word in al.enumerate_words(al.extended_set(), w)? {
        let closed = rho_word(&al, &word);
        let by_def = rho_by_transposition(&al, &word)?;
        p.check(closed == by_def, || format!("ρ({}) closed form differs from transposition", al.render(&word)));
    }
    Ok(())
}

fn hoffman_isomorphism(p: &mut Probe, w: Weight) -> Result<()> {
    let al = Alphabet::new(&["a"], &["A"])?;
    let v = verify_hoffman_iso(&al, al.extended_set(), w)?;
    p.check(v.is_empty(), || match v.first() {
        Some(x) => format!("ρ({} ⋈ {}) ≠ ρ({}) ⧢ ρ({})", al.render(&x.u), al.render(&x.v), al.render(&x.u), al.render(&x.v)),
        None => "ρ(u ⋈ v) = ρ(u) ⧢ ρ(v) reported as violated".into(),
    });
    Ok(())
}

/// The first failing weight over Lyndon condition words equals the first
/// failing weight over all condition words.
fn lyndon_sufficiency(p: &mut Probe, w: Weight) -> Result<()> {
    for s in catalog() {
        let le = local_error_expansion(&s, w)?;
        let first_all = le.terms.iter().map(|t| t.weight).min();
        let lyndon = lyndon_reduced_conditions(&s.alphabet, s.interpretation, w)?;
        let first_lyndon = le.terms.iter().filter(|t| lyndon.contains(&t.word)).map(|t| t.weight).min();
        p.check(first_all == first_lyndon, || {
            format!("{}: first residual weight {first_all:?} vs Lyndon {first_lyndon:?}", label(&s))
        });
        let conds = full_conditions(&s.alphabet, s.interpretation, w)?;
        p.check(le.terms.iter().all(|t| conds.contains(&t.word)), || format!("{}: residual off the condition set", label(&s)));
    }
    Ok(())
}

fn weak_equals_deterministic(p: &mut Probe, w: Weight) -> Result<()> {
    let cap = w.halves() / 2;
    if cap == 0 {
        return Ok(());
    }
    for s in catalog() {
        if !check_hypothesis(&s).holds {
            continue;
        }
        let wo = weak_order(&s, cap)?;
        let det = deterministic_order(&s, cap)?;
        p.check(wo.order == det.order && wo.decided != det.at_cap, || {
            format!("{}: weak order {} vs deterministic order {}", label(&s), wo.order, det.order)
        });
    }
    Ok(())
}

fn weak_order_barrier(p: &mut Probe, w: Weight) -> Result<()> {
    let cap = w.halves() / 2;
    for s in catalog() {
        let wo = weak_order(&s, cap)?;
        let b = barrier_check(&s, &wo);
        p.check(b.status != BarrierStatus::Contradiction, || format!("{}: {}", label(&s), b.message));
    }
    Ok(())
}

fn witness_delta(p: &mut Probe, _w: Weight) -> Result<()> {
    let al = Arc::new(Alphabet::new(&["a"], &["A"])?);
    let words: Vec<Word> = al
        .enumerate_words(al.strat_set(), Weight::from_int(4))?
        .into_iter()
        .filter(|x| !x.is_empty() && x.len() <= 4)
        .collect();
    for word in &words {
        let sys = BoundSystem::bind(&witness_system(&al, word)?, al.clone())?;
        let origin = DVector::zeros(sys.dim);
        for u in &words {
            let v = sys.word_basis_function(u, &origin)[0];
            let want = if u == word { 1.0 } else { 0.0 };
            p.check(v == want, || format!("witness {}: f_{}(0) = {v}", al.render(word), al.render(u)));
        }
    }
    Ok(())
}

fn flow_bridge(p: &mut Probe, _w: Weight) -> Result<()> {
    let al = Arc::new(Alphabet::new(&[] as &[&str], &["A"])?);
    let id = al.id_of("A").expect("letter A");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let n = rng.random_range(1..4);
        let lin = DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.8..0.8));
        let shift = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let sys = System {
            name: "random".into(),
            dim: n,
            fields: vec![("A".into(), Affine::new(lin, shift))],
            x0: DVector::zeros(n),
            horizon: 1.0,
            observable: Observable::Coordinate(0),
        };
        let b = BoundSystem::bind(&sys, al.clone())?;
        let (a, star) = (&b.ops[id as usize], &b.ops[al.starred(id) as usize]);
        let (db, dt) = (rng.random_range(-1.5..1.5), rng.random_range(0.01..1.0));
        let ito = exp_op(&Op::combine(&[(db, a), (-0.5 * dt, &a.mul(a))], n + 1), 1.0);
        let split = exp_op(star, dt).mul(&exp_op(a, db));
        let err = ito.data.iter().zip(&split.data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        p.check(err < 1e-10, || format!("Ito flow differs from Stratonovich flow plus drift by {err:e}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mobius_values() {
        assert_eq!([1, 2, 3, 4, 5, 6].map(mobius), [1, -1, -1, 0, -1, 1]);
    }

    #[test]
    fn fault_flips_only_the_named_property() {
        let r = run(Weight::ONE, Some("hoffman-isomorphism")).unwrap();
        for x in &r {
            assert_eq!(x.passed, x.name != "hoffman-isomorphism", "{}", x.name);
        }
    }
}
