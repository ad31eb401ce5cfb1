//! Pathwise iterated integrals by quadrature, and the statistical check of
//! canonical scheme coefficients against a direct simulation on the
//! witness system.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use splitorder_core::chen::{Atom, ChenEngine, Grid, IIPoly};
use splitorder_core::ring::q_to_f64;
use splitorder_core::scheme::{Interpretation, Scheme};
use splitorder_core::words::{Alphabet, LetterKind, Word};
use splitorder_core::{Error, Result};

use crate::brownian::{BrownianSampler, PathView};
use crate::integrate::{dyadic_depth, dyadic_exponent, Integrator};
use crate::system::{witness_system, BoundSystem};

/// `J_w` (trapezoidal rule) or `I_w` (left point rule) over view cells
/// `i0..i1`, by the recursion `J_{uℓ}(t) = ∫ J_u dW_ℓ`. Noise letters
/// integrate against their Brownian increments, all other letters against
/// time.
pub fn quadrature(al: &Alphabet, w: &Word, interp: Interpretation, view: &PathView, i0: usize, i1: usize) -> f64 {
    let slots = noise_slots(al);
    let ids = w.ids();
    let n = ids.len();
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    let mut old = vec![0.0; n + 1];
    for i in i0..i1 {
        old.copy_from_slice(&p);
        for j in 1..=n {
            let id = ids[j - 1];
            let d = match slots[id as usize] {
                Some(s) if al.kind(id) == LetterKind::Stochastic => view.incr(s, i, i + 1),
                _ => view.dt,
            };
            let integrand = match interp {
                Interpretation::Stratonovich => 0.5 * (old[j - 1] + p[j - 1]),
                Interpretation::Ito => old[j - 1],
            };
            p[j] += integrand * d;
        }
    }
    p[n]
}

fn noise_slots(al: &Alphabet) -> Vec<Option<usize>> {
    let mut slots = vec![None; al.len()];
    for (k, id) in al.stochastic().ids().enumerate() {
        slots[id as usize] = Some(k);
    }
    slots
}

/// View-cell range of grid cell `k` when one step of length `h` spans
/// `cells` view cells.
fn cell_range(grid: &Grid, k: usize, cells: usize) -> (usize, usize) {
    let to = |q: &splitorder_core::ring::Q| (q_to_f64(q) * cells as f64).round() as usize;
    (to(&grid.points()[k]), to(&grid.points()[k + 1]))
}

fn check_subdivision(subdivision: usize) -> Result<u32> {
    if subdivision < 64 || !subdivision.is_power_of_two() {
        return Err(Error::Input(format!("subdivision must be a power of two ≥ 64, got {subdivision}")));
    }
    Ok(subdivision.trailing_zeros())
}

fn grid_depth(grid: &Grid) -> Result<u32> {
    grid.points().iter().try_fold(0, |m, q| Ok(m.max(dyadic_exponent(q)?)))
}

/// Per path, the quadrature values of `atoms` (grid cell, word) over a step
/// of length `h`, with `subdivision` quadrature cells per unit fraction of
/// the finest grid cell.
#[allow(clippy::too_many_arguments)]
pub fn sample_iterated_integrals(
    al: &Alphabet,
    grid: &Grid,
    atoms: &[(usize, Word)],
    interp: Interpretation,
    h: f64,
    subdivision: usize,
    paths: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let level = grid_depth(grid)? + check_subdivision(subdivision)?;
    let sampler = BrownianSampler { seed, horizon: h };
    let noises = al.stochastic().ids().count() as u32;
    let cells = 1usize << level;
    let dt = h / cells as f64;
    Ok((0..paths as u64)
        .into_par_iter()
        .map(|p| {
            let values: Vec<Vec<f64>> = (0..noises).map(|s| sampler.sample(p, s, level)).collect();
            let view = PathView { values: &values, stride: 1, dt };
            atoms
                .iter()
                .map(|(k, w)| {
                    let (i0, i1) = cell_range(grid, *k, cells);
                    quadrature(al, w, interp, &view, i0, i1)
                })
                .collect()
        })
        .collect())
}

/// Value of an iterated-integral polynomial with `X[k,L]` given by
/// Stratonovich quadrature on the view and `H = h`.
fn eval_ii(al: &Alphabet, poly: &IIPoly, grid: &Grid, view: &PathView, cells: usize, h: f64) -> f64 {
    let mut out = 0.0;
    for (m, c) in poly.terms() {
        let mut t = q_to_f64(c);
        for (a, e) in &m.0 {
            let v = match a {
                Atom::H => h,
                Atom::X { cell, word } => {
                    let (i0, i1) = cell_range(grid, *cell as usize, cells);
                    quadrature(al, word, Interpretation::Stratonovich, view, i0, i1)
                }
            };
            t *= v.powi(*e as i32);
        }
        out += t;
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientCheck {
    pub word: String,
    pub symbolic_mean: f64,
    pub direct_mean: f64,
    pub symbolic_second_moment: f64,
    pub direct_second_moment: f64,
    /// Mean of symbolic minus direct over z-score denominator.
    pub z_mean: f64,
    pub z_second_moment: f64,
    /// Richardson estimate of the quadrature error in the mean difference.
    pub discretization: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub paths: usize,
    pub seed: u64,
    pub h: f64,
    pub subdivision: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { paths: 4000, seed: 1, h: 1.0, subdivision: 256 }
    }
}

/// Compares the canonical coefficient `J̃_w` (or `Ĩ_w`), evaluated pathwise
/// from quadrature atoms, with the first endpoint component of the scheme
/// applied to the witness system of `w` from the origin.
pub fn verify_symbolic_coefficient(scheme: &Scheme, w: &Word, opts: CheckOptions) -> Result<CoefficientCheck> {
    let al: Arc<Alphabet> = scheme.alphabet.clone();
    let mut eng = ChenEngine::for_scheme(scheme, al.weight(w));
    let coeff = eng.scheme_series(scheme)?.get(w);
    let grid = eng.grid().clone();
    let wit = BoundSystem::bind(&witness_system(&al, w)?, al.clone())?;
    let integ = Integrator::new(&wit, scheme.interpretation);
    let depth = dyadic_depth(scheme)?.max(grid_depth(&grid)?);
    let level = depth + check_subdivision(opts.subdivision)?;
    let sampler = BrownianSampler { seed: opts.seed, horizon: opts.h };
    let noises = integ.noise_count() as u32;
    let fine = 1usize << level;
    integ.check_grid(scheme, fine)?;
    // Per path: (symbolic, direct) at the full and at half resolution.
    let rows: Vec<[f64; 4]> = (0..opts.paths as u64)
        .into_par_iter()
        .map(|p| {
            let values: Vec<Vec<f64>> = (0..noises).map(|s| sampler.sample(p, s, level)).collect();
            let mut row = [0.0; 4];
            for (r, stride) in [1usize, 2].into_iter().enumerate() {
                let cells = fine / stride;
                let view = PathView { values: &values, stride, dt: opts.h / cells as f64 };
                row[2 * r] = eval_ii(&al, &coeff, &grid, &view, cells, opts.h);
                let mut x = integ.augmented_start();
                integ.run_scheme(scheme, &view, cells, 1, &mut x).expect("grid checked");
                row[2 * r + 1] = x[0];
            }
            row
        })
        .collect();
    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&[f64; 4]) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let se = |f: &dyn Fn(&[f64; 4]) -> f64| {
        let m = mean(f);
        (rows.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0) / n).sqrt()
    };
    let d1 = |r: &[f64; 4]| r[0] - r[1];
    let d1_half = |r: &[f64; 4]| r[2] - r[3];
    let d2 = |r: &[f64; 4]| r[0] * r[0] - r[1] * r[1];
    let d2_half = |r: &[f64; 4]| r[2] * r[2] - r[3] * r[3];
    let z = |m: f64, s: f64, disc: f64, scale: f64| {
        let den = (s * s + disc * disc).sqrt().max(1e-12 * (1.0 + scale));
        m / den
    };
    let (m1, m1h) = (mean(&d1), mean(&d1_half));
    let (m2, m2h) = (mean(&d2), mean(&d2_half));
    let symbolic_mean = mean(&|r| r[0]);
    let direct_mean = mean(&|r| r[1]);
    let symbolic_second_moment = mean(&|r| r[0] * r[0]);
    let direct_second_moment = mean(&|r| r[1] * r[1]);
    let z_mean = z(m1, se(&d1), (m1 - m1h).abs(), symbolic_mean.abs());
    let z_second_moment = z(m2, se(&d2), (m2 - m2h).abs(), symbolic_second_moment.abs());
    Ok(CoefficientCheck {
        word: al.render(w),
        symbolic_mean,
        direct_mean,
        symbolic_second_moment,
        direct_second_moment,
        z_mean,
        z_second_moment,
        discretization: (m1 - m1h).abs(),
        pass: z_mean.abs() < 4.0 && z_second_moment.abs() < 4.0,
    })
}
