//! Command line and HTTP front ends over `bevalkit-core`.

pub mod api;
pub mod cli;
pub mod error;
pub mod ops;
