use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::skewalg::{Jet, SkewMatrix};

/// Asymmetry `τ` and dimension `N` of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticParams {
    pub tau: f64,
    pub n: usize,
}

impl EllipticParams {
    /// Parameters for the kernel paths: `τ ∈ [0, 1)`, `N ≥ 2`.
    pub fn new(tau: f64, n: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&tau) {
            return domain(format!("tau must lie in [0, 1), got {tau}"));
        }
        if n < 2 {
            return domain(format!("the kernel needs N >= 2, got {n}"));
        }
        Ok(Self { tau, n })
    }

    /// Parameters accepted by the sampler: `τ ∈ (-1, 1)`, `N ≥ 1`.
    pub fn for_sampling(tau: f64, n: usize) -> Result<Self> {
        if !(tau > -1.0 && tau < 1.0) {
            return domain(format!("sampler needs tau in (-1, 1), got {tau}"));
        }
        if n == 0 {
            return domain("dimension must be positive");
        }
        Ok(Self { tau, n })
    }

    /// Half-width `1 + τ` of the real bulk.
    pub fn edge(&self) -> f64 {
        1.0 + self.tau
    }
}

/// One 2×2 block `[[-I(x,y), S(x,y)], [-S(y,x), D(x,y)]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelBlock {
    pub i_val: f64,
    pub s_xy: f64,
    pub s_yx: f64,
    pub d_val: f64,
}

impl KernelBlock {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[-self.i_val, self.s_xy], [-self.s_yx, self.d_val]]
    }

    pub fn frobenius_distance(&self, other: &KernelBlock) -> f64 {
        let d = [self.i_val - other.i_val, self.s_xy - other.s_xy, self.s_yx - other.s_yx, self.d_val - other.d_val];
        d.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Kernel block with Taylor-jet entries.
#[derive(Debug, Clone)]
pub struct JetBlock {
    pub i_val: Jet,
    pub s_xy: Jet,
    pub s_yx: Jet,
    pub d_val: Jet,
}

impl JetBlock {
    fn entry(&self, a: usize, b: usize) -> Jet {
        match (a, b) {
            (0, 0) => -&self.i_val,
            (0, 1) => self.s_xy.clone(),
            (1, 0) => -&self.s_yx,
            _ => self.d_val.clone(),
        }
    }
}

/// Assemble `[K(x_i, x_j)]` from the blocks with `i <= j`; the lower half
/// is filled by skew-symmetry.
pub fn assemble(blocks: &[Vec<KernelBlock>]) -> Result<SkewMatrix<f64>> {
    let ell = blocks.len();
    SkewMatrix::from_upper(2 * ell, 0.0, |r, c| blocks[r / 2][c / 2 - r / 2].matrix()[r % 2][c % 2])
}

/// Jet counterpart of [`assemble`].
pub fn assemble_jet(blocks: &[Vec<JetBlock>], zero: Jet) -> Result<SkewMatrix<Jet>> {
    let ell = blocks.len();
    SkewMatrix::from_upper(2 * ell, zero, |r, c| blocks[r / 2][c / 2 - r / 2].entry(r % 2, c % 2))
}

/// Evaluate `f(i, j)` on the upper triangle `i <= j`, in the layout
/// [`assemble`] expects.
pub fn upper_blocks<T>(ell: usize, mut f: impl FnMut(usize, usize) -> Result<T>) -> Result<Vec<Vec<T>>> {
    (0..ell).map(|i| (i..ell).map(|j| f(i, j)).collect()).collect()
}
