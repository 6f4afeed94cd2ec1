//! Command-line surface: bound tables, code construction, simulation, fits
//! and figure pipelines, all emitting CSV.

pub mod commands;
pub mod figure;
pub mod manifest;
pub mod range;
pub mod svg;
pub mod table;
