//! Weinstein–Navier–Stokes solver toolkit.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod grid;
pub mod io;
pub mod operators;
pub mod oracle;
pub mod selftest;
pub mod solver;
pub mod special_fn;
pub mod transform;
pub mod translation;

pub use error::{Result, WnsError};
