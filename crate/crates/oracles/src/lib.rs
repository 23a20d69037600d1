//! Brute-force reference computations for tests.
//!
//! Nothing here depends on `rspscrn-core`: each routine re-derives its
//! result from first principles on plain slices, so tests can compare the
//! production code path against an independent one.

#![allow(clippy::needless_range_loop)]

pub mod auc;
pub mod cart;
pub mod dft;
pub mod filterbank;
pub mod lstm;
