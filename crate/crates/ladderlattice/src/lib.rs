//! Catalog files, report serialization, tabulation and the command-line front end over
//! [`ladderlattice_core`].

pub mod catalog;
pub mod cli;
pub mod compute;
pub mod report;
pub mod table;

pub use ladderlattice_core as core;
