//! Finite-domain evaluation and proof-rule workbench for B proof obligations.

pub mod eval;
pub mod pipeline;
pub mod prover;
pub mod rules;
pub mod store;
pub mod syntax;
