//! Desk-scale coarse geometry: hyperbolicity of finite graphs, isometries of
//! trees, quasi-actions and their classification, quasicharacters, and exact
//! SL(n, Z) machinery.

pub mod arith;
pub mod coarse;
pub mod corpus;
pub mod error;
pub mod group;
pub mod metric;
pub mod pseudochar;
pub mod qfa;
pub mod rational;
pub mod tree;

pub use error::{Error, Result};
pub use metric::MetricGraph;
pub use rational::Q;
