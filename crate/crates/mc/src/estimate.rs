//! Convergence-slope estimates of strong and weak global errors against a
//! fine-grid reference computed on the same Brownian paths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use splitorder_core::analysis::strong_order;
use splitorder_core::expectation::weak_order;
use splitorder_core::scheme::Scheme;
use splitorder_core::words::Weight;
use splitorder_core::{Error, Result};

use crate::brownian::{BrownianSampler, PathView};
use crate::integrate::{dyadic_depth, Integrator};
use crate::system::{BoundSystem, Observable};

#[derive(Clone, Debug)]
pub struct McConfig {
    pub paths: usize,
    pub seed: u64,
    /// Step sizes, each `T / 2^k`.
    pub h_list: Vec<f64>,
    /// Extra dyadic levels of the reference below the finest scheme grid.
    pub reference_levels: u32,
    pub bootstrap: usize,
}

impl McConfig {
    pub fn new(paths: usize, seed: u64, h_list: Vec<f64>) -> McConfig {
        McConfig { paths, seed, h_list, reference_levels: 3, bootstrap: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strong,
    Weak,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    NoPrediction,
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderPoint {
    pub h: f64,
    /// RMS endpoint error (strong) or |mean observable difference| (weak).
    pub error: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderEstimate {
    pub mode: Mode,
    pub slope: f64,
    pub stderr: f64,
    pub points: Vec<LadderPoint>,
    /// Symbolic global order: μ (strong) or σ (weak).
    pub predicted: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

pub const STRONG_TOLERANCE: f64 = 0.25;
pub const WEAK_TOLERANCE: f64 = 0.35;

/// Exponents `k` with `h = T / 2^k`; at least three distinct values.
pub fn parse_ladder(h_list: &[f64], horizon: f64) -> Result<Vec<u32>> {
    let mut ks = Vec::new();
    for &h in h_list {
        let r = horizon / h;
        let k = r.log2().round();
        if !(h > 0.0) || k < 0.0 || k > 30.0 || (2f64.powi(k as i32) - r).abs() > 1e-9 * r {
            return Err(Error::Input(format!("step {h} is not T/2^k for T = {horizon}")));
        }
        ks.push(k as u32);
    }
    ks.sort_unstable();
    ks.dedup();
    if ks.len() < 3 {
        return Err(Error::Input(format!("step ladder needs at least 3 distinct sizes, got {}", ks.len())));
    }
    Ok(ks)
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Per path, per step size: the scheme and reference endpoints.
struct Samples {
    hs: Vec<f64>,
    /// `[path][k]` scheme endpoint, and `[path]` reference endpoint.
    scheme: Vec<Vec<Vec<f64>>>,
    reference: Vec<Vec<f64>>,
}

fn run_paths(scheme: &Scheme, sys: &BoundSystem, cfg: &McConfig) -> Result<Samples> {
    let horizon = sys.horizon;
    let ks = parse_ladder(&cfg.h_list, horizon)?;
    let depth = dyadic_depth(scheme)?;
    let kmax = *ks.last().unwrap();
    let level = kmax + depth + cfg.reference_levels;
    if level > 24 {
        return Err(Error::Input(format!("path resolution 2^{level} too fine")));
    }
    let integ = Integrator::new(sys, scheme.interpretation);
    let noises = integ.noise_count() as u32;
    let sampler = BrownianSampler { seed: cfg.seed, horizon };
    let fine_cells = 1usize << level;
    let fine_dt = horizon / fine_cells as f64;
    let dim = sys.dim;
    integ.check_grid(scheme, 1 << depth)?;
    let per_path: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|p| {
            let values: Vec<Vec<f64>> = (0..noises).map(|s| sampler.sample(p, s, level)).collect();
            let fine = PathView { values: &values, stride: 1, dt: fine_dt };
            let mut xr = integ.augmented_start();
            integ.run_reference(&fine, fine_cells, &mut xr);
            let mut ends = Vec::with_capacity(ks.len());
            for &k in &ks {
                // View cells at resolution 2^(k + depth); one step spans 2^depth cells.
                let res = k + depth;
                let stride = 1usize << (level - res);
                let view = PathView { values: &values, stride, dt: fine_dt * stride as f64 };
                let mut x = integ.augmented_start();
                integ.run_scheme(scheme, &view, 1 << depth, 1 << k, &mut x).expect("checked above");
                ends.push(x[..dim].to_vec());
            }
            (xr[..dim].to_vec(), ends)
        })
        .collect();
    let (reference, scheme_ends) = per_path.into_iter().unzip();
    Ok(Samples { hs: ks.iter().map(|&k| horizon / 2f64.powi(k as i32)).collect(), scheme: scheme_ends, reference })
}

fn bootstrap_slopes(
    per_path: &[Vec<f64>],
    hs: &[f64],
    stat: impl Fn(&[f64]) -> f64,
    cfg: &McConfig,
) -> f64 {
    let n = per_path.len();
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_b007);
    let mut slopes = Vec::with_capacity(cfg.bootstrap);
    let mut col = vec![0.0; n];
    for _ in 0..cfg.bootstrap {
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let ys: Vec<f64> = (0..hs.len())
            .map(|j| {
                for (c, &i) in col.iter_mut().zip(&idx) {
                    *c = per_path[i][j];
                }
                stat(&col).ln()
            })
            .collect();
        let s = slope(&xs, &ys);
        if s.is_finite() {
            slopes.push(s);
        }
    }
    let m = slopes.iter().sum::<f64>() / slopes.len().max(1) as f64;
    (slopes.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (slopes.len().max(2) - 1) as f64).sqrt()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn std_err(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1).max(1) as f64 / v.len() as f64).sqrt()
}

fn finish(mode: Mode, points: Vec<LadderPoint>, stderr: f64, predicted: Option<f64>, mut notes: Vec<String>, noisy: bool) -> OrderEstimate {
    let xs: Vec<f64> = points.iter().map(|p| p.h.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.error.ln()).collect();
    let s = slope(&xs, &ys);
    let tolerance = match mode {
        Mode::Strong => STRONG_TOLERANCE,
        Mode::Weak => WEAK_TOLERANCE,
    };
    let verdict = match predicted {
        None => {
            notes.push("symbolic order undecided at the weight cap (exact scheme?)".into());
            Verdict::NoPrediction
        }
        Some(_) if noisy || !s.is_finite() => {
            notes.push("statistical floor exceeds the signal at some step size".into());
            Verdict::Inconclusive
        }
        Some(p) if (s - p).abs() <= tolerance => Verdict::Pass,
        Some(_) => Verdict::Fail,
    };
    OrderEstimate { mode, slope: s, stderr, points, predicted, tolerance, verdict, notes }
}

fn global_note(mode: Mode, p: Option<f64>) -> String {
    match (mode, p) {
        (Mode::Strong, Some(mu)) => format!("symbolic μ={mu}: local residuals of weight ≥ {}, global slope {mu}", mu + 0.5),
        (Mode::Weak, Some(s)) => format!("symbolic σ={s}: expectation residuals of weight ≥ {}, global slope {s}", s + 1.0),
        _ => "no symbolic prediction".into(),
    }
}

/// Global strong order: slope of log RMS endpoint error against log h.
pub fn estimate_strong_order(scheme: &Scheme, sys: &BoundSystem, cfg: &McConfig) -> Result<OrderEstimate> {
    let so = strong_order(scheme, Weight::from_int(2))?;
    let predicted = so.decided.then(|| so.order.to_f64());
    let s = run_paths(scheme, sys, cfg)?;
    let sq: Vec<Vec<f64>> = s
        .scheme
        .iter()
        .zip(&s.reference)
        .map(|(ends, r)| ends.iter().map(|e| e.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum()).collect())
        .collect();
    let points: Vec<LadderPoint> = (0..s.hs.len())
        .map(|j| {
            let col: Vec<f64> = sq.iter().map(|v| v[j]).collect();
            let ms = mean(&col);
            let rms = ms.sqrt();
            LadderPoint { h: s.hs[j], error: rms, stderr: std_err(&col) / (2.0 * rms.max(1e-300)) }
        })
        .collect();
    let stderr = bootstrap_slopes(&sq, &s.hs, |c| mean(c).sqrt(), cfg);
    Ok(finish(Mode::Strong, points, stderr, predicted, vec![global_note(Mode::Strong, predicted)], false))
}

/// Global weak order: slope of log |E χ(scheme) - E χ(reference)| against
/// log h, with common random numbers.
pub fn estimate_weak_order(
    scheme: &Scheme,
    sys: &BoundSystem,
    observable: &Observable,
    cfg: &McConfig,
) -> Result<OrderEstimate> {
    let wo = weak_order(scheme, 3)?;
    let predicted = wo.decided.then_some(wo.order as f64);
    let s = run_paths(scheme, sys, cfg)?;
    let diffs: Vec<Vec<f64>> = s
        .scheme
        .iter()
        .zip(&s.reference)
        .map(|(ends, r)| ends.iter().map(|e| observable.eval(e) - observable.eval(r)).collect())
        .collect();
    let mut noisy = false;
    let points: Vec<LadderPoint> = (0..s.hs.len())
        .map(|j| {
            let col: Vec<f64> = diffs.iter().map(|v| v[j]).collect();
            let (m, se) = (mean(&col), std_err(&col));
            if m.abs() < 2.0 * se {
                noisy = true;
            }
            LadderPoint { h: s.hs[j], error: m.abs(), stderr: se }
        })
        .collect();
    let stderr = bootstrap_slopes(&diffs, &s.hs, |c| mean(c).abs(), cfg);
    let notes = vec![global_note(Mode::Weak, predicted), format!("observable {}", observable.describe())];
    Ok(finish(Mode::Weak, points, stderr, predicted, notes, noisy))
}

/// Endpoint samples of the scheme with step `h` over the system's horizon.
pub fn simulate_scheme(scheme: &Scheme, sys: &BoundSystem, h: f64, paths: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let k = parse_single(h, sys.horizon)?;
    let depth = dyadic_depth(scheme)?;
    let level = k + depth;
    let integ = Integrator::new(sys, scheme.interpretation);
    let sampler = BrownianSampler { seed, horizon: sys.horizon };
    let noises = integ.noise_count() as u32;
    let dt = sys.horizon / (1u64 << level) as f64;
    (0..paths as u64)
        .into_par_iter()
        .map(|p| {
            let values: Vec<Vec<f64>> = (0..noises).map(|s| sampler.sample(p, s, level)).collect();
            let view = PathView { values: &values, stride: 1, dt };
            let mut x = integ.augmented_start();
            integ.run_scheme(scheme, &view, 1 << depth, 1 << k, &mut x)?;
            Ok(x[..sys.dim].to_vec())
        })
        .collect()
}

/// Endpoint samples of the Strang reference on `2^levels` cells per step `h`.
pub fn reference_solution(sys: &BoundSystem, scheme: &Scheme, h: f64, levels: u32, paths: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let k = parse_single(h, sys.horizon)?;
    let level = k + levels;
    let integ = Integrator::new(sys, scheme.interpretation);
    let sampler = BrownianSampler { seed, horizon: sys.horizon };
    let noises = integ.noise_count() as u32;
    let cells = 1usize << level;
    let dt = sys.horizon / cells as f64;
    Ok((0..paths as u64)
        .into_par_iter()
        .map(|p| {
            let values: Vec<Vec<f64>> = (0..noises).map(|s| sampler.sample(p, s, level)).collect();
            let view = PathView { values: &values, stride: 1, dt };
            let mut x = integ.augmented_start();
            integ.run_reference(&view, cells, &mut x);
            x[..sys.dim].to_vec()
        })
        .collect())
}

fn parse_single(h: f64, horizon: f64) -> Result<u32> {
    let r = horizon / h;
    let k = r.log2().round();
    if !(h > 0.0) || k < 0.0 || (2f64.powi(k as i32) - r).abs() > 1e-9 * r {
        return Err(Error::Input(format!("step {h} is not T/2^k for T = {horizon}")));
    }
    Ok(k as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladders() {
        assert_eq!(parse_ladder(&[0.125, 0.25, 0.0625], 1.0).unwrap(), vec![2, 3, 4]);
        assert!(parse_ladder(&[0.125, 0.25], 1.0).is_err());
        assert!(parse_ladder(&[0.125, 0.25, 0.3], 1.0).is_err());
        assert!(parse_ladder(&[0.125, 0.25, 0.25], 1.0).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = [1.0f64, 0.5, 0.25].iter().map(|h| h.ln()).collect();
        let ys: Vec<f64> = [1.0f64, 0.25, 0.0625].iter().map(|e| e.ln()).collect();
        assert!((slope(&xs, &ys) - 2.0).abs() < 1e-12);
    }
}
