use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use crate::error::{domain, Result};

const FIELD_BITS: u32 = 8;
const MAX_VARS: usize = 8;

/// Index layout shared by all jets of one shape.
#[derive(Debug, PartialEq)]
pub struct JetShape {
    nvars: usize,
    order: usize,
    max_total: usize,
    strides: Vec<usize>,
    // exponents packed FIELD_BITS per variable
    packed: Vec<u64>,
    degree: Vec<usize>,
    overflow_bias: u64,
    overflow_mask: u64,
}

impl JetShape {
    /// Jets in `nvars` variables keeping exponents `≤ order` per variable and
    /// total degree `≤ max_total`.
    pub fn new(nvars: usize, order: usize, max_total: usize) -> Result<Arc<Self>> {
        if nvars == 0 || nvars > MAX_VARS {
            return domain(format!("jets support 1..={MAX_VARS} variables, got {nvars}"));
        }
        if order > 60 {
            return domain(format!("jet order {order} is too large"));
        }
        let radix = order + 1;
        let len = radix.pow(nvars as u32);
        let mut strides = Vec::with_capacity(nvars);
        let mut s = 1;
        for _ in 0..nvars {
            strides.push(s);
            s *= radix;
        }
        let mut packed = Vec::with_capacity(len);
        let mut degree = Vec::with_capacity(len);
        for idx in 0..len {
            let mut p = 0u64;
            let mut d = 0;
            let mut rest = idx;
            for v in 0..nvars {
                let e = rest % radix;
                rest /= radix;
                p |= (e as u64) << (FIELD_BITS * v as u32);
                d += e;
            }
            packed.push(p);
            degree.push(d);
        }
        let (mut bias, mut mask) = (0u64, 0u64);
        for v in 0..nvars {
            let shift = FIELD_BITS * v as u32;
            bias |= (127 - order as u64) << shift;
            mask |= 128u64 << shift;
        }
        Ok(Arc::new(Self {
            nvars,
            order,
            max_total: max_total.min(nvars * order),
            strides,
            packed,
            degree,
            overflow_bias: bias,
            overflow_mask: mask,
        }))
    }

    /// Shape used for ℓ-point coincident limits: order `ℓ-1`, total `ℓ(ℓ-1)/2`.
    pub fn for_limit(ell: usize) -> Result<Arc<Self>> {
        let order = ell.saturating_sub(1);
        Self::new(ell, order, ell * order / 2)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn max_total(&self) -> usize {
        self.max_total
    }

    pub fn len(&self) -> usize {
        self.packed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packed.is_empty()
    }

    /// Flat index of an exponent tuple, `None` if it is truncated away.
    pub fn index(&self, exps: &[usize]) -> Option<usize> {
        assert_eq!(exps.len(), self.nvars, "exponent tuple has wrong length");
        if exps.iter().any(|&e| e > self.order) || exps.iter().sum::<usize>() > self.max_total {
            return None;
        }
        Some(exps.iter().zip(&self.strides).map(|(e, s)| e * s).sum())
    }

    pub fn exponents(&self, idx: usize) -> Vec<usize> {
        let radix = self.order + 1;
        let mut rest = idx;
        (0..self.nvars)
            .map(|_| {
                let e = rest % radix;
                rest /= radix;
                e
            })
            .collect()
    }

    fn kept(&self, idx: usize) -> bool {
        self.degree[idx] <= self.max_total
    }

    #[inline]
    fn product_index(&self, a: usize, b: usize) -> Option<usize> {
        if self.degree[a] + self.degree[b] > self.max_total {
            return None;
        }
        let sum = self.packed[a] + self.packed[b];
        if (sum + self.overflow_bias) & self.overflow_mask != 0 {
            return None;
        }
        Some(a + b)
    }
}

/// Truncated multivariate Taylor polynomial.
///
/// Coefficients are stored densely; products skip zero coefficients, so a
/// jet in two of the variables multiplies a full jet cheaply.
#[derive(Debug, Clone)]
pub struct Jet {
    shape: Arc<JetShape>,
    coeffs: Vec<f64>,
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.same_shape(other) && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn zero(shape: &Arc<JetShape>) -> Self {
        Self { shape: Arc::clone(shape), coeffs: vec![0.0; shape.len()] }
    }

    pub fn constant(shape: &Arc<JetShape>, c: f64) -> Self {
        let mut j = Self::zero(shape);
        j.coeffs[0] = c;
        j
    }

    /// `c + δ_v`.
    pub fn variable(shape: &Arc<JetShape>, v: usize, c: f64) -> Self {
        assert!(v < shape.nvars, "variable index out of range");
        let mut j = Self::constant(shape, c);
        if shape.order >= 1 && shape.max_total >= 1 {
            j.coeffs[shape.strides[v]] = 1.0;
        }
        j
    }

    /// Jet of a function of two of the variables, `Σ c[p][q] δ_a^p δ_b^q`.
    /// With `a == b` the monomial becomes `δ_a^{p+q}`.
    pub fn from_bivariate(shape: &Arc<JetShape>, a: usize, b: usize, c: &[Vec<f64>]) -> Self {
        let mut j = Self::zero(shape);
        let mut exps = vec![0; shape.nvars];
        for (p, row) in c.iter().enumerate() {
            for (q, &v) in row.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                exps.iter_mut().for_each(|e| *e = 0);
                exps[a] += p;
                exps[b] += q;
                if let Some(idx) = shape.index(&exps) {
                    j.coeffs[idx] += v;
                }
            }
        }
        j
    }

    pub fn shape(&self) -> &Arc<JetShape> {
        &self.shape
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[0]
    }

    /// Coefficient of `∏ δ_v^{exps[v]}`; zero for truncated monomials.
    pub fn coefficient(&self, exps: &[usize]) -> f64 {
        self.shape.index(exps).map_or(0.0, |i| self.coeffs[i])
    }

    pub fn set_coefficient(&mut self, exps: &[usize], value: f64) {
        if let Some(i) = self.shape.index(exps) {
            self.coeffs[i] = value;
        }
    }

    pub fn scale(mut self, c: f64) -> Self {
        self.coeffs.iter_mut().for_each(|x| *x *= c);
        self
    }

    /// Evaluate the truncated polynomial at `δ`.
    pub fn eval(&self, delta: &[f64]) -> f64 {
        assert_eq!(delta.len(), self.shape.nvars);
        let mut total = 0.0;
        for (idx, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let e = self.shape.exponents(idx);
            total += c * e.iter().zip(delta).map(|(&k, &d)| d.powi(k as i32)).product::<f64>();
        }
        total
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn same_shape(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.shape, &other.shape) || *self.shape == *other.shape
    }

    fn check_shape(&self, other: &Self) {
        assert!(self.same_shape(other), "jets of different shapes combined");
    }

    /// `self += a * b`.
    pub fn add_product(&mut self, a: &Jet, b: &Jet, sign: f64) {
        self.check_shape(a);
        self.check_shape(b);
        let (sparse, dense) = if nnz(a) <= nnz(b) { (a, b) } else { (b, a) };
        let shape = &self.shape;
        for (i, &ca) in sparse.coeffs.iter().enumerate() {
            if ca == 0.0 || !shape.kept(i) {
                continue;
            }
            let ca = sign * ca;
            for (k, &cb) in dense.coeffs.iter().enumerate() {
                if cb == 0.0 {
                    continue;
                }
                if let Some(idx) = shape.product_index(i, k) {
                    self.coeffs[idx] += ca * cb;
                }
            }
        }
    }
}

fn nnz(j: &Jet) -> usize {
    j.coeffs.iter().filter(|c| **c != 0.0).count()
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let mut out = Jet::zero(&self.shape);
        out.add_product(self, rhs, 1.0);
        out
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.check_shape(rhs);
        self.coeffs.iter_mut().zip(&rhs.coeffs).for_each(|(a, b)| *a += b);
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.check_shape(rhs);
        self.coeffs.iter_mut().zip(&rhs.coeffs).for_each(|(a, b)| *a -= b);
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.clone().scale(-1.0)
    }
}
