//! Subbotin graphical models with file formats, an experiment runner and a
//! command-line front end. The numerical library lives in `subbotin-core`
//! and is re-exported here as [`core`].

pub use subbotin_core as core;

pub mod bench;
pub mod config;
pub mod io;
