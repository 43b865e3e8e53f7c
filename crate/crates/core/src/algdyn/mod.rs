//! Correspondences on finite sets, weighted étale entropy, and dynamical
//! degrees of monomial maps.

mod correspondence;
mod monomial;

use thiserror::Error;

use crate::spectral::SpectralError;

pub use correspondence::{
    gamma_infinity_entropy, h_et, pullback_correspondence, trim_correspondence, EntryKind, FiniteCorrespondence,
    GammaEntropy, Trimmed, WeightedEntropy, WeightedFamilyEntry,
};
pub use monomial::{
    gromov_yomdin_gap, integer_degree, monomial_dynamical_degrees, DegreeProfile, GapReport, MonomialMap,
    GROWTH_ITERATE, MAX_MODEL_DEGREE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgdynError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("map table is empty")]
    EmptyMap,
    #[error("point {point} maps to {value}, outside 0..{size}")]
    MapRange { point: usize, value: usize, size: usize },
    #[error("point {point} has no preimage")]
    NotOnto { point: usize },
    #[error("fiber sizes {sizes:?} are not constant")]
    NonConstantFibers { sizes: Vec<usize> },
    #[error("multiplicity identity fails at ({point}, {image})")]
    Semiconjugacy { point: usize, image: usize },
    #[error("cover degree must be at least 1")]
    ZeroDegree,
    #[error("family has no identity entry")]
    MissingIdentity,
    #[error("matrix is singular")]
    Singular,
    #[error("declared degrees must be positive finite numbers")]
    DeclaredDegrees,
    #[error("covering model of degree {degree} exceeds cap {cap}")]
    ModelTooLarge { degree: String, cap: u64 },
}
