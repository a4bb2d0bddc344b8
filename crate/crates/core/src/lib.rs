#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod model;
pub mod models;
pub mod numerics;
pub mod optimizers;
pub mod quasirandom;
pub mod replicate;

pub use error::{Error, Result};
