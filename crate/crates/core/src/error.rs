use thiserror::Error;

use crate::complex::Simplex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate simplex {0:?}: vertices are affinely dependent or repeated")]
    DegenerateSimplex(Vec<usize>),
    #[error("simplexes {0:?} and {1:?} have overlapping interiors")]
    OverlappingInteriors(Simplex, Simplex),
    #[error("vertex index {index} out of range ({count} vertices)")]
    VertexOutOfRange { index: usize, count: usize },
    #[error("simplex {0:?} not found")]
    SimplexNotFound(Simplex),
    #[error("point lies outside the complex")]
    PointOutsideComplex,
    #[error("not a subcomplex: {0}")]
    NotSubcomplex(String),
    #[error("W is not a subcomplex of V: {0}")]
    NotSubcomplexPair(String),
    #[error("partition mixes components inside simplex {0:?}")]
    PartitionMixesComponents(Simplex),
    #[error("map is not simplicial: image of {0:?} spans no target simplex")]
    NotSimplicial(Simplex),
    #[error("general position perturbation failed after {attempts} attempts: {detail}")]
    PerturbationFailed { attempts: usize, detail: String },
    #[error("map is not in general position: {0}")]
    GeneralPositionFailed(String),
    #[error("overshadowing cycle among simplexes {0:?}")]
    OvershadowCycle(Vec<Simplex>),
    #[error("derivation point for {0:?} is not in the open simplex")]
    DerivationPointOutsideInterior(Simplex),
    #[error("center value of the height function is not positive on {0:?}")]
    NonPositiveCenterValue(Simplex),
    #[error("codimension too low: {0}")]
    CodimensionTooLow(String),
    #[error("projection is degenerate on singular simplex {0:?}")]
    NondegeneracyViolated(Simplex),
    #[error("blister construction failed: {0}")]
    BlisterConstruction(String),
    #[error("source sequence is not a valid collapse: {0}")]
    InvalidSourceCollapse(String),
    #[error("invalid collapse sequence: {0}")]
    InvalidSequence(String),
    #[error("collapse search stuck: {0}")]
    CollapseStuck(String),
    #[error("sunny certificate failed: {0}")]
    SunnyCertificateFailed(String),
    #[error("stable certificate failed: {0}")]
    StabilizationCertificateFailed(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("unknown example {0:?}")]
    UnknownExample(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal invariant breached: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
