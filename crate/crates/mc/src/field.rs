//! Affine vector fields `f(x) = Nx + e` and their exact flows.
//!
//! Flows are computed on the augmented state `[x; 1]`, where the field acts
//! as the matrix `[[N, e], [0, 0]]`.

use nalgebra::{DMatrix, DVector};

/// Largest augmented dimension handled by the allocation-free flow kernels.
pub const MAX_AUG: usize = 16;

const SERIES_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct Affine {
    pub lin: DMatrix<f64>,
    pub shift: DVector<f64>,
}

impl Affine {
    pub fn new(lin: DMatrix<f64>, shift: DVector<f64>) -> Affine {
        assert_eq!(lin.nrows(), lin.ncols());
        assert_eq!(lin.nrows(), shift.len());
        Affine { lin, shift }
    }

    pub fn zero(n: usize) -> Affine {
        Affine::new(DMatrix::zeros(n, n), DVector::zeros(n))
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.lin * x + &self.shift
    }

    pub fn is_zero(&self) -> bool {
        self.lin.iter().all(|v| *v == 0.0) && self.shift.iter().all(|v| *v == 0.0)
    }

    pub fn augmented(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(&self.lin);
        m.view_mut((0, n), (n, 1)).copy_from(&self.shift);
        m
    }

    /// Exact flow over "time" `t` applied to `x`.
    pub fn flow(&self, t: f64, x: &DVector<f64>) -> DVector<f64> {
        let e = expm(&(self.augmented() * t));
        let n = self.dim();
        let mut xa = DVector::from_element(n + 1, 1.0);
        xa.rows_mut(0, n).copy_from(x);
        (e * xa).rows(0, n).into_owned()
    }
}

/// Matrix exponential by scaling and squaring of the Taylor series.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = m.iter().fold(0.0f64, |a, v| a.max(v.abs())) * n as f64;
    let mut s = 0u32;
    while norm / 2f64.powi(s as i32) > 0.5 {
        s += 1;
    }
    let a = m / 2f64.powi(s as i32);
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..60 {
        term = &term * &a / k as f64;
        sum += &term;
        let t = term.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if t <= SERIES_TOL * 1e-2 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Dense row-major square matrix for the hot flow loops.
#[derive(Clone, Debug, PartialEq)]
pub struct Op {
    pub m: usize,
    pub data: Vec<f64>,
}

impl Op {
    pub fn zeros(m: usize) -> Op {
        assert!(m <= MAX_AUG, "augmented dimension {m} exceeds {MAX_AUG}");
        Op { m, data: vec![0.0; m * m] }
    }

    pub fn from_matrix(a: &DMatrix<f64>) -> Op {
        let m = a.nrows();
        let mut o = Op::zeros(m);
        for i in 0..m {
            for j in 0..m {
                o.data[i * m + j] = a[(i, j)];
            }
        }
        o
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.m, self.m, &self.data)
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.m).map(|i| self.data[i * self.m..(i + 1) * self.m].iter().map(|v| v.abs()).sum()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| *v == 0.0)
    }

    pub fn mul(&self, o: &Op) -> Op {
        Op::from_matrix(&(self.to_matrix() * o.to_matrix()))
    }

    /// `Σ c_i A_i`.
    pub fn combine(terms: &[(f64, &Op)], m: usize) -> Op {
        let mut out = Op::zeros(m);
        for (c, a) in terms {
            for (o, v) in out.data.iter_mut().zip(&a.data) {
                *o += c * v;
            }
        }
        out
    }

    pub fn commutes_with(&self, o: &Op) -> bool {
        let (a, b) = (self.to_matrix(), o.to_matrix());
        let c = &a * &b - &b * &a;
        let scale = 1.0 + self.norm_inf() * o.norm_inf();
        c.iter().all(|v| v.abs() <= 1e-13 * scale)
    }

    /// `y = A x` for the leading `m` entries.
    #[inline]
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = self.m;
        for i in 0..m {
            let row = &self.data[i * m..(i + 1) * m];
            y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// `x <- exp(t A) x` by the truncated series, with substeps keeping
    /// `|t|·‖A‖ ≤ 1/2`. Nilpotent generators terminate exactly.
    pub fn apply_exp(&self, t: f64, x: &mut [f64]) {
        if t == 0.0 {
            return;
        }
        let m = self.m;
        let r = t.abs() * self.norm_inf();
        if r == 0.0 {
            return;
        }
        let steps = (r / 0.5).ceil().max(1.0) as usize;
        let tau = t / steps as f64;
        let mut v = [0.0; MAX_AUG];
        let mut w = [0.0; MAX_AUG];
        for _ in 0..steps {
            v[..m].copy_from_slice(&x[..m]);
            for k in 1..60 {
                self.apply(&v[..m], &mut w[..m]);
                let f = tau / k as f64;
                let mut big = 0.0f64;
                let mut scale = 0.0f64;
                for i in 0..m {
                    v[i] = w[i] * f;
                    x[i] += v[i];
                    big = big.max(v[i].abs());
                    scale = scale.max(x[i].abs());
                }
                if big <= SERIES_TOL * 1e-2 * scale.max(1e-300) || big == 0.0 {
                    break;
                }
            }
        }
    }
}

/// `exp(tA)` as a dense operator, for flows reused many times.
pub fn exp_op(a: &Op, t: f64) -> Op {
    Op::from_matrix(&expm(&(a.to_matrix() * t)))
}
