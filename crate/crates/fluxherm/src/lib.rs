//! File formats, experiment drivers and parallel wrappers around
//! `fluxherm-core`.

pub mod experiments;
pub mod io;
pub mod output;

pub use fluxherm_core as core;
