//! The finite-N matrix kernel, its frozen-sign continuation `K̂` as Taylor
//! jets, the bulk limit kernel, and the residual between them.
//!
//! Internally everything is written in the local variable `u = √N x`.

mod block;
mod finite;
mod hat;
mod limit;
mod residual;

pub use block::{assemble, assemble_jet, upper_blocks, EllipticParams, JetBlock, KernelBlock};
pub use finite::{d_n, i_n, kernel_block_n, s_n, FiniteKernel};
pub use hat::{kernel_hat_jet, kernel_hat_matrix, HatExpansion, KernelSource};
pub use limit::limit_kernel;
pub use residual::residual;
