//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("constant has modulus {modulus} but an inner function needs |c| = 1")]
    NonUnimodularConstant { modulus: f64 },

    #[error("zero {index} has |a| = {modulus}, outside the radial guard {guard}")]
    ZeroOutsideGuard {
        index: usize,
        modulus: f64,
        guard: f64,
    },

    #[error("evaluation point is within {distance:e} of the pole 1/conj(a), a = {zero}")]
    PoleProximity { zero: String, distance: f64 },

    #[error("evaluation point has |z| = {modulus}, outside the closed disc")]
    OutsideDisc { modulus: f64 },

    #[error("degree {degree} exceeds the factorization-enumeration guard {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("Gram residual {residual:e} still exceeds {tol:e} at {points} quadrature points")]
    IllConditioned {
        residual: f64,
        tol: f64,
        points: usize,
    },

    #[error("model space requires degree >= 1")]
    ConstantInner,

    #[error("frame tail {tail} too short: decay bound requires {required}")]
    TailTooShort { tail: usize, required: usize },

    #[error("({eta}, {phi}) does not factor theta = {theta}")]
    NotAFactor {
        eta: String,
        phi: String,
        theta: String,
    },

    #[error("subspace is not invariant: residual {residual:e} exceeds {tol:e}")]
    NotInvariant { residual: f64, tol: f64 },

    #[error("no factorization matches the subspace; best principal-angle distance {best:e}")]
    NoMatch { best: f64 },

    #[error("subspace dimension {dim} is invalid here")]
    BadSubspaceDim { dim: usize },

    #[error("product of {total} total dimensions exceeds the size budget {budget}")]
    SizeBudgetExceeded { total: usize, budget: usize },

    #[error("number of factors {n} outside the supported range 1..={max}")]
    FactorCountUnsupported { n: usize, max: usize },

    #[error("subspace is not a submodule: invariance residual {residual:e}")]
    NotASubmodule { residual: f64 },

    #[error("subspace does not reduce the tuple: residual {residual:e}")]
    NotReducing { residual: f64 },

    #[error("subspace is not doubly commuting: residual {residual:e}")]
    NotDoublyCommuting { residual: f64 },

    #[error("reconstruction mismatch: principal-angle distance {distance:e} exceeds {tol:e}")]
    ReconstructionMismatch { distance: f64, tol: f64 },

    #[error("generator degree {degree} exceeds the budget {max} at degree cap {cap}")]
    DegreeBudget {
        degree: usize,
        max: usize,
        cap: usize,
    },

    #[error("windowed defect product is not rank one: gap ratio {gap:e}")]
    NotRankOne { gap: f64 },

    #[error("degree cap {cap} cannot certify a generator of degree {degree}; need cap >= {required}")]
    TruncationInconclusive {
        cap: usize,
        degree: usize,
        required: usize,
    },

    #[error("ambient spaces differ: {detail}")]
    AmbientMismatch { detail: String },

    #[error("subspace has ambient dimension {got}, expected {expected}")]
    AmbientDimMismatch { got: usize, expected: usize },

    #[error("frame columns are not orthonormal: residual {residual:e}")]
    FrameNotOrthonormal { residual: f64 },

    #[error("scenario error: {0}")]
    Scenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
