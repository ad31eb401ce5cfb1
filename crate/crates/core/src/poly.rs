//! Sparse commutative polynomials over exact rationals.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_traits::{One, Signed, Zero};

use crate::ring::{fmt_q, Coeff, Q};

pub trait Var: Clone + Ord + Debug + Send + Sync {}
impl<T: Clone + Ord + Debug + Send + Sync> Var for T {}

/// Product of variables with positive exponents, sorted by variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial<V>(pub Vec<(V, u32)>);

impl<V: Var> Monomial<V> {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: V) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn pow(&self, n: u32) -> Self {
        Monomial(self.0.iter().map(|(v, e)| (v.clone(), e * n)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly<V: Var> {
    terms: BTreeMap<Monomial<V>, Q>,
}

impl<V: Var> Default for Poly<V> {
    fn default() -> Self {
        Poly { terms: BTreeMap::new() }
    }
}

impl<V: Var> Poly<V> {
    pub fn constant(c: Q) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn var(v: V) -> Self {
        Self::term(Monomial::var(v), Q::one())
    }

    pub fn term(m: Monomial<V>, c: Q) -> Self {
        let mut p = Poly::default();
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial<V>, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial<V>, c: &Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn add_scaled(&mut self, o: &Self, c: &Q) {
        for (m, x) in &o.terms {
            self.add_term(m.clone(), &(x * c));
        }
    }

    pub fn coefficient(&self, m: &Monomial<V>) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coefficient(&Monomial::one())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = Self::one_elem();
        for _ in 0..n {
            r = r.times(self);
        }
        r
    }

    /// Ring morphism determined by the images of the variables.
    pub fn eval<C: Coeff>(&self, mut f: impl FnMut(&V) -> C) -> C {
        let mut out = C::zero_elem();
        for (m, c) in &self.terms {
            let mut t = C::from_q(c);
            for (v, e) in &m.0 {
                let x = f(v);
                for _ in 0..*e {
                    t = t.times(&x);
                }
            }
            out.accumulate(&t);
        }
        out
    }

    pub fn substitute<W: Var>(&self, mut f: impl FnMut(&V) -> Poly<W>) -> Poly<W> {
        self.eval(|v| f(v))
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Renders with the given variable printer; "0" for the zero polynomial.
    pub fn render(&self, mut var: impl FnMut(&V) -> String) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        // Highest degree first reads like the usual hand-written form.
        terms.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then_with(|| a.0.cmp(b.0)));
        let mut s = String::new();
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let body: Vec<String> = m
                .0
                .iter()
                .map(|(v, e)| if *e == 1 { var(v) } else { format!("{}^{}", var(v), e) })
                .collect();
            let body = body.join("·");
            let t = render_term(c, &body);
            if i == 0 {
                s.push_str(&t);
            } else if let Some(rest) = t.strip_prefix('-') {
                s.push_str(" - ");
                s.push_str(rest);
            } else {
                s.push_str(" + ");
                s.push_str(&t);
            }
        }
        s
    }
}

/// Coefficient times a rendered monomial, e.g. "-(1/2)X", "3X", "1/4".
pub fn render_term(c: &Q, body: &str) -> String {
    if body.is_empty() {
        return fmt_q(c);
    }
    let neg = c.is_negative();
    let a = c.abs();
    let mag = if a.is_one() {
        body.to_string()
    } else if a.is_integer() {
        format!("{}{}", fmt_q(&a), body)
    } else {
        format!("({}){}", fmt_q(&a), body)
    };
    if neg {
        format!("-{mag}")
    } else {
        mag
    }
}

impl<V: Var> Coeff for Poly<V> {
    fn zero_elem() -> Self {
        Poly::default()
    }
    fn one_elem() -> Self {
        Poly::constant(Q::one())
    }
    fn is_zero_elem(&self) -> bool {
        self.terms.is_empty()
    }
    fn plus(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.accumulate(o);
        r
    }
    fn accumulate(&mut self, o: &Self) {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c);
        }
    }
    fn times(&self, o: &Self) -> Self {
        let mut r = Poly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        r
    }
    fn negated(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
    fn from_q(x: &Q) -> Self {
        Poly::constant(x.clone())
    }
    fn scaled(&self, x: &Q) -> Self {
        if x.is_zero() {
            return Poly::default();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * x)).collect() }
    }
}

/// Univariate polynomial in the step size h.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HPoly(BTreeMap<u32, Q>);

impl HPoly {
    pub fn monomial(c: Q, deg: u32) -> HPoly {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(deg, c);
        }
        HPoly(m)
    }

    pub fn coefficient(&self, deg: u32) -> Q {
        self.0.get(&deg).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Q)> {
        self.0.iter().map(|(d, c)| (*d, c))
    }

    /// Lowest power of h present.
    pub fn order(&self) -> Option<u32> {
        self.0.keys().next().copied()
    }

    pub fn eval(&self, h: f64) -> f64 {
        self.0.iter().map(|(d, c)| crate::ring::q_to_f64(c) * h.powi(*d as i32)).sum()
    }

    pub fn render(&self) -> String {
        if self.0.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (d, c)) in self.0.iter().enumerate() {
            let hp = match d {
                0 => String::new(),
                1 => "h".into(),
                _ => format!("h^{d}"),
            };
            let neg = c.is_negative();
            let a = c.abs();
            let mag = if hp.is_empty() {
                fmt_q(&a)
            } else {
                let num = a.numer();
                let den = a.denom();
                let head = if num.is_one() { hp.clone() } else { format!("{num}{hp}") };
                if den.is_one() {
                    head
                } else {
                    format!("{head}/{den}")
                }
            };
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            s.push_str(&mag);
        }
        s
    }
}

impl Coeff for HPoly {
    fn zero_elem() -> Self {
        HPoly::default()
    }
    fn one_elem() -> Self {
        HPoly::monomial(Q::one(), 0)
    }
    fn is_zero_elem(&self) -> bool {
        self.0.is_empty()
    }
    fn plus(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.accumulate(o);
        r
    }
    fn accumulate(&mut self, o: &Self) {
        for (d, c) in &o.0 {
            let e = self.0.entry(*d).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                self.0.remove(d);
            }
        }
    }
    fn times(&self, o: &Self) -> Self {
        let mut r = HPoly::default();
        for (d1, c1) in &self.0 {
            for (d2, c2) in &o.0 {
                r.accumulate(&HPoly::monomial(c1 * c2, d1 + d2));
            }
        }
        r
    }
    fn negated(&self) -> Self {
        HPoly(self.0.iter().map(|(d, c)| (*d, -c)).collect())
    }
    fn from_q(x: &Q) -> Self {
        HPoly::monomial(x.clone(), 0)
    }
}
