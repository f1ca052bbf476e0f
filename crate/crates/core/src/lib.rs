pub mod cli;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod metric;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod uncertainty;
pub mod reduction;
pub mod report;
