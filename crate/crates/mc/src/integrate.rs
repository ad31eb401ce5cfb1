//! Split flows of a scheme on sampled Brownian paths, and the fine-grid
//! reference solver.

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use splitorder_core::ring::Q;
use splitorder_core::scheme::{Interpretation, Scheme};
use splitorder_core::words::{LetterId, LetterKind};
use splitorder_core::{Error, Result};

use crate::brownian::PathView;
use crate::field::Op;
use crate::system::BoundSystem;

#[derive(Clone, Debug)]
struct StagePlan {
    letters: Vec<LetterId>,
    c: Q,
    d: Q,
    stochastic: bool,
    /// Whether all generators of the stage commute, so that the stage flow
    /// is a single exponential.
    commuting: bool,
}

/// Applies schemes and the reference solver to one system.
#[derive(Clone, Debug)]
pub struct Integrator<'a> {
    sys: &'a BoundSystem,
    interp: Interpretation,
    /// Noise slot of each stochastic letter id.
    slots: Vec<Option<usize>>,
    squares: Vec<Op>,
    m: usize,
}

impl<'a> Integrator<'a> {
    pub fn new(sys: &'a BoundSystem, interp: Interpretation) -> Integrator<'a> {
        let al = &sys.alphabet;
        let mut slots = vec![None; al.len()];
        for (k, id) in al.stochastic().ids().enumerate() {
            slots[id as usize] = Some(k);
        }
        let squares = sys.ops.iter().map(|o| o.mul(o)).collect();
        Integrator { sys, interp, slots, squares, m: sys.dim + 1 }
    }

    pub fn noise_count(&self) -> usize {
        self.sys.alphabet.stochastic().ids().count()
    }

    /// Generator of one letter over a time `dt` with noise increment `db`:
    /// `dt·A` (drift), `db·A` (Stratonovich noise) or `db·A - (dt/2)A²` (Ito
    /// noise, whose two parts commute).
    fn letter_generator(&self, id: LetterId, dt: f64, db: f64, out: &mut Op) {
        let op = &self.sys.ops[id as usize];
        match (self.slots[id as usize].is_some(), self.interp) {
            (false, _) => add_scaled(out, dt, op),
            (true, Interpretation::Stratonovich) => add_scaled(out, db, op),
            (true, Interpretation::Ito) => {
                add_scaled(out, db, op);
                add_scaled(out, -0.5 * dt, &self.squares[id as usize]);
            }
        }
    }

    fn letter_flow(&self, id: LetterId, dt: f64, db: f64, x: &mut [f64]) {
        let mut g = Op::zeros(self.m);
        self.letter_generator(id, dt, db, &mut g);
        g.apply_exp(1.0, x);
    }

    fn plan(&self, scheme: &Scheme) -> Vec<StagePlan> {
        scheme
            .stages
            .iter()
            .map(|st| {
                let letters: Vec<LetterId> = st.letters.ids().collect();
                let mut gens: Vec<&Op> = letters.iter().map(|&id| &self.sys.ops[id as usize]).collect();
                if self.interp == Interpretation::Ito {
                    gens.extend(letters.iter().filter(|&&id| self.slots[id as usize].is_some()).map(|&id| &self.squares[id as usize]));
                }
                let commuting = gens.iter().enumerate().all(|(i, a)| gens[i + 1..].iter().all(|b| a.commutes_with(b)));
                StagePlan {
                    stochastic: letters.iter().any(|&id| self.sys.alphabet.kind(id) == LetterKind::Stochastic),
                    letters,
                    c: st.c.clone(),
                    d: st.d.clone(),
                    commuting,
                }
            })
            .collect()
    }

    /// Symmetric Strang composition of single-letter flows over one fine
    /// cell: half flows in letter order, then back.
    fn strang_cell(&self, letters: &[LetterId], view: &PathView, i: usize, dt: f64, x: &mut [f64]) {
        let inc: Vec<f64> = letters
            .iter()
            .map(|&id| self.slots[id as usize].map_or(0.0, |s| view.incr(s, i, i + 1)))
            .collect();
        let k = letters.len();
        for j in 0..k {
            let half = if j + 1 == k { 1.0 } else { 0.5 };
            self.letter_flow(letters[j], half * dt, half * inc[j], x);
        }
        for j in (0..k.saturating_sub(1)).rev() {
            self.letter_flow(letters[j], 0.5 * dt, 0.5 * inc[j], x);
        }
    }

    fn stage_flow(&self, st: &StagePlan, view: &PathView, i0: i64, i1: i64, x: &mut [f64]) {
        let dt = (i1 - i0) as f64 * view.dt;
        if st.commuting {
            let mut g = Op::zeros(self.m);
            for &id in &st.letters {
                let db = match self.slots[id as usize] {
                    Some(s) => view.incr(s, i0 as usize, i1 as usize),
                    None => 0.0,
                };
                self.letter_generator(id, dt, db, &mut g);
            }
            g.apply_exp(1.0, x);
        } else if st.stochastic {
            for i in i0..i1 {
                self.strang_cell(&st.letters, view, i as usize, view.dt, x);
            }
        } else {
            let sign = if i1 >= i0 { 1.0 } else { -1.0 };
            for _ in 0..(i1 - i0).abs() {
                self.strang_cell_det(&st.letters, sign * view.dt, x);
            }
        }
    }

    fn strang_cell_det(&self, letters: &[LetterId], dt: f64, x: &mut [f64]) {
        let k = letters.len();
        for j in 0..k {
            let half = if j + 1 == k { 1.0 } else { 0.5 };
            self.letter_flow(letters[j], half * dt, 0.0, x);
        }
        for j in (0..k.saturating_sub(1)).rev() {
            self.letter_flow(letters[j], 0.5 * dt, 0.0, x);
        }
    }

    /// Errors unless every stage endpoint is a whole number of cells.
    pub fn check_grid(&self, scheme: &Scheme, cells_per_step: usize) -> Result<()> {
        for st in &scheme.stages {
            cell_offset(&st.c, cells_per_step)?;
            cell_offset(&st.d, cells_per_step)?;
        }
        Ok(())
    }

    /// Runs `scheme` from the view's start over `steps` macro steps of
    /// `cells_per_step` view cells each.
    pub fn run_scheme(&self, scheme: &Scheme, view: &PathView, cells_per_step: usize, steps: usize, x: &mut [f64]) -> Result<()> {
        let plan = self.plan(scheme);
        let offsets: Vec<(i64, i64)> = plan
            .iter()
            .map(|st| Ok((cell_offset(&st.c, cells_per_step)?, cell_offset(&st.d, cells_per_step)?)))
            .collect::<Result<_>>()?;
        for n in 0..steps {
            let start = (n * cells_per_step) as i64;
            for (st, &(c, d)) in plan.iter().zip(&offsets) {
                self.stage_flow(st, view, start + c, start + d, x);
            }
        }
        Ok(())
    }

    /// Strang substepping of the full system on every view cell.
    pub fn run_reference(&self, view: &PathView, cells: usize, x: &mut [f64]) {
        let letters: Vec<LetterId> = self.sys.alphabet.strat_set().ids().collect();
        for i in 0..cells {
            self.strang_cell(&letters, view, i, view.dt, x);
        }
    }

    pub fn augmented_start(&self) -> Vec<f64> {
        let mut x = vec![1.0; self.m];
        x[..self.sys.dim].copy_from_slice(self.sys.x0.as_slice());
        x
    }

    /// Whether stage `i` of `scheme` is integrated by one exponential.
    pub fn stage_is_exact(&self, scheme: &Scheme, i: usize) -> bool {
        self.plan(scheme)[i].commuting
    }
}

fn add_scaled(out: &mut Op, c: f64, a: &Op) {
    if c == 0.0 {
        return;
    }
    for (o, v) in out.data.iter_mut().zip(&a.data) {
        *o += c * v;
    }
}

fn cell_offset(c: &Q, cells_per_step: usize) -> Result<i64> {
    let v = c * Q::from_integer(cells_per_step.into());
    if !v.denom().is_one() {
        return Err(Error::Input(format!(
            "stage endpoint {c} does not fall on the dyadic path grid; Monte Carlo needs dyadic endpoints"
        )));
    }
    Ok(v.numer().to_i64().expect("small offset"))
}

/// `m` with `q = p / 2^m`, `p` odd (0 for integers); error if the
/// denominator is not a power of two.
pub fn dyadic_exponent(q: &Q) -> Result<u32> {
    let mut x = q.denom().clone();
    let mut k = 0u32;
    while x.is_even() && !x.is_zero() {
        x >>= 1;
        k += 1;
    }
    if !x.is_one() {
        return Err(Error::Input(format!("stage endpoint {q} is not dyadic; Monte Carlo needs dyadic endpoints")));
    }
    Ok(k)
}

/// Smallest `m` with every stage endpoint a multiple of `2^-m`.
pub fn dyadic_depth(scheme: &Scheme) -> Result<u32> {
    scheme.breakpoints().iter().try_fold(0, |m, q| Ok(m.max(dyadic_exponent(q)?)))
}
