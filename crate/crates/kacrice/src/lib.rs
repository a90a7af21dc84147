//! Command line, parallel batch runner and file formats for Kac-Rice statistics of
//! critical points. The numerics live in [`kacrice_core`].

pub use kacrice_core;

pub mod cli;
pub mod config;
pub mod output;
pub mod parallel;
pub mod simulate;
pub mod validate;
