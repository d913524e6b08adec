//! File formats, caching, experiment sweeps and the command line for
//! `cluster-mbqc`.

pub mod cache;
pub mod config;
pub mod error;
pub mod experiments;
pub mod persist;
pub mod table;
pub mod verify;

pub use error::{LabError, Result};
