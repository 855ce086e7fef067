//! Possibilistic and probabilistic classification of correlations in causal
//! networks of independent sources.

pub mod certificates;
pub mod examples;
pub mod inflation;
pub mod lp;
pub mod pipeline;
pub mod possibility;
pub mod sat;
pub mod scenario;
pub mod symmetry;
