//! Entropy of topological dynamical systems through étale covers and their
//! compactifications, computed on systems that admit exact or numerical
//! representations.

pub mod algdyn;
pub mod bracket;
pub mod etale;
pub mod metric;
pub mod spectral;
pub mod symbolic;

pub use bracket::Bracket;
