//! Prolate-spheroidal super-resolution toolkit.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fieldmodel;
pub mod metrics;
pub mod mp;
pub mod prolate;
pub mod special;
pub mod stochastic;

pub use error::{Error, Parity, Result};
pub use prolate::{load_basis, save_basis, ProlateBasis, ProlateMode};
