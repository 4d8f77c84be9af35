pub mod acceptance;
pub mod analytic;
pub mod cli;
pub mod config;
pub mod critcount;
pub mod ensembles;
pub mod error;
pub mod fieldsim;
pub mod kacrice;
pub mod matrix;
pub mod rng;

pub use error::{Error, Result};
