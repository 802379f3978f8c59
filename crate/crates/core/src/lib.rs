//! Exact resolution of singularities of marked ideals in affine charts.

pub mod algebra;
pub mod chart;
pub mod error;
pub mod invariant;
pub mod marked;
pub mod problem;
pub mod resolver;
pub mod testseq;
