//! Solver for d-stable locally checkable vertex partitioning problems with
//! size and connectivity constraints, over a binary decomposition tree.

pub mod decomp;
pub mod dp;
pub mod gen;
pub mod graph;
pub mod nec;
pub mod oracle;
pub mod problems;
