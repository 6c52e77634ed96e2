//! Experiment driver for the detection library: argument parsing,
//! sweep execution, CSV serialization and SVG charts.

pub mod args;
pub mod csv;
pub mod run;
pub mod svg;
