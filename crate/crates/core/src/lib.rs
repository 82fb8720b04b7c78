//! Fits six heavy-tailed model distributions to yearly citation counts by
//! maximum likelihood with likelihood-ratio model selection, computes
//! journal- and time-normalized citation scores, and runs the cited-year
//! correlation (memory) analysis — with a seeded synthetic-corpus generator
//! as the end-to-end verification oracle.

pub mod analysis;
pub mod corpus;
pub mod distributions;
pub mod fitting;
pub mod pipeline;
pub mod report;
pub mod rescale;
pub mod synthgen;

pub use distributions::{ModelFamily, ModelSpec, SampleVector};
pub use fitting::{FitOptions, FitResult, SelectionResult, XMinPolicy};
