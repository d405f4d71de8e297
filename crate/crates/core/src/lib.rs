// `!(x > c)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlations;
pub mod ensemble;
pub mod error;
pub mod kernels;
pub mod moments;
pub mod skewalg;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
