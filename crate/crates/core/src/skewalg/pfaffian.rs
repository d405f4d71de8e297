use std::collections::HashMap;
use std::ops::Neg;

use serde::{Deserialize, Serialize};

use super::jet::{Jet, JetShape};
use crate::error::{domain, Error, Result};

pub const SKEW_TOL: f64 = 1e-12;
pub const MAX_JET_HALF_DIM: usize = 6;

/// Even-dimensional skew-symmetric matrix, stored densely in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix<T> {
    dim: usize,
    entries: Vec<T>,
}

impl<T: Clone> SkewMatrix<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }
}

impl<T: Clone + Neg<Output = T>> SkewMatrix<T> {
    /// Build from the strict upper triangle `f(i, j)`, `i < j`; the diagonal
    /// is `zero`.
    pub fn from_upper(dim: usize, zero: T, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        if dim % 2 != 0 {
            return Err(Error::OddDimension(dim));
        }
        let mut entries = vec![zero; dim * dim];
        for i in 0..dim {
            for j in i + 1..dim {
                let v = f(i, j);
                entries[j * dim + i] = -v.clone();
                entries[i * dim + j] = v;
            }
        }
        Ok(Self { dim, entries })
    }
}

impl SkewMatrix<f64> {
    /// Check and wrap a dense row-major matrix. The tolerance is relative to
    /// the largest entry.
    pub fn from_dense(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return domain(format!("expected {} entries, got {}", dim * dim, entries.len()));
        }
        if dim % 2 != 0 {
            return Err(Error::OddDimension(dim));
        }
        let scale = entries.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..dim {
            for j in i..dim {
                let defect = (entries[i * dim + j] + entries[j * dim + i]).abs();
                if !(defect <= SKEW_TOL * scale) {
                    return Err(Error::NotSkew { row: i, col: j, defect });
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return domain("matrix rows have unequal lengths");
        }
        Self::from_dense(dim, rows.concat())
    }
}

/// Pfaffian in sign / log-magnitude form. A zero Pfaffian has `sign == 0`
/// and `log_abs == -∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PfaffianValue {
    pub sign: f64,
    pub log_abs: f64,
}

impl PfaffianValue {
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

fn swap_rc(a: &mut [f64], n: usize, p: usize, q: usize) {
    if p == q {
        return;
    }
    for c in 0..n {
        a.swap(p * n + c, q * n + c);
    }
    for r in 0..n {
        a.swap(r * n + p, r * n + q);
    }
}

/// Pfaffian by skew-symmetric Parlett–Reid elimination with full pivoting.
pub fn pfaffian_real(m: &SkewMatrix<f64>) -> PfaffianValue {
    let n = m.dim;
    if n == 0 {
        return PfaffianValue { sign: 1.0, log_abs: 0.0 };
    }
    let mut a = m.entries.clone();
    let mut sign = 1.0;
    let mut log_abs = 0.0;
    for k in (0..n - 1).step_by(2) {
        // largest remaining entry, moved to (k, k+1)
        let (mut bp, mut bq, mut best) = (k, k + 1, -1.0);
        for p in k..n {
            for q in p + 1..n {
                let v = a[p * n + q].abs();
                if v > best {
                    (bp, bq, best) = (p, q, v);
                }
            }
        }
        if best == 0.0 {
            return PfaffianValue { sign: 0.0, log_abs: f64::NEG_INFINITY };
        }
        if bp != k {
            swap_rc(&mut a, n, k, bp);
            sign = -sign;
        }
        if bq != k + 1 {
            swap_rc(&mut a, n, k + 1, bq);
            sign = -sign;
        }
        let pivot = a[k * n + k + 1];
        sign *= pivot.signum();
        log_abs += pivot.abs().ln();
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|c| a[k * n + c] / pivot).collect();
            let col: Vec<f64> = (k + 2..n).map(|r| a[r * n + k + 1]).collect();
            for (ri, r) in (k + 2..n).enumerate() {
                for (ci, c) in (k + 2..n).enumerate() {
                    a[r * n + c] += tau[ri] * col[ci] - col[ri] * tau[ci];
                }
            }
        }
    }
    PfaffianValue { sign, log_abs }
}

/// Exact Pfaffian over truncated Taylor jets by expansion along the first
/// row, memoised on the set of remaining indices.
pub fn pfaffian_jet(m: &SkewMatrix<Jet>) -> Result<Jet> {
    let n = m.dim;
    if n / 2 > MAX_JET_HALF_DIM {
        return domain(format!("jet Pfaffians are limited to dimension {}, got {n}", 2 * MAX_JET_HALF_DIM));
    }
    let shape = match m.entries.first() {
        Some(j) => j.shape().clone(),
        None => return domain("empty matrix has no jet shape"),
    };
    let mut memo: HashMap<u32, Jet> = HashMap::new();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    Ok(expand(m, full, &shape, &mut memo))
}

fn expand(m: &SkewMatrix<Jet>, mask: u32, shape: &std::sync::Arc<JetShape>, memo: &mut HashMap<u32, Jet>) -> Jet {
    if mask == 0 {
        return Jet::constant(shape, 1.0);
    }
    if let Some(j) = memo.get(&mask) {
        return j.clone();
    }
    let i = mask.trailing_zeros() as usize;
    let rest = mask & !(1 << i);
    let mut out = Jet::zero(shape);
    let mut sign = 1.0;
    let mut bits = rest;
    while bits != 0 {
        let j = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let minor = expand(m, rest & !(1 << j), shape, memo);
        out.add_product(m.get(i, j), &minor, sign);
        sign = -sign;
    }
    memo.insert(mask, out.clone());
    out
}
