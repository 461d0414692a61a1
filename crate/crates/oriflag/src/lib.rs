//! Oriented flag combinatorics for SL(n,ℝ) and PSL(n,ℝ).
//!
//! The extended Weyl group of SL(n,ℝ) consists of signed permutation
//! matrices of determinant one. This crate implements exact arithmetic in
//! that group, the refined Bruhat order and its quotients by oriented
//! parabolic types, enumeration of balanced ideals, numeric Bruhat
//! factorization of concrete matrices, irreducible and block embeddings of
//! SL(2,ℝ), and rasterization of cocompact domains of discontinuity on
//! spheres for Schottky-type limit sets.

pub mod bits;
pub mod bruhat;
pub mod cli;
pub mod domain;
pub mod flag;
pub mod ideal;
pub mod io;
pub mod mat;
pub mod rep;
pub mod weyl;

use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("root index {index} out of range 1..={max}")]
    RootIndexOutOfRange { index: usize, max: usize },
    #[error("projective mode requires even n, got {0}")]
    ProjectiveOddRank(usize),
    #[error("rank must be at least 2, got {0}")]
    RankTooSmall(usize),
    #[error("element is not transverse (not a lift of the longest element)")]
    NotTransverse,
    #[error("theta must be a proper subset of the simple roots")]
    ThetaNotProper,
    #[error("E is not a subgroup of the sign group")]
    ENotSubgroup,
    #[error("E does not contain the sign part of <v(theta)>")]
    EMissingThetaSigns,
    #[error("element set is not of the form <v(theta)> E")]
    NotAParabolicType,
    #[error("length precondition violated: need length(b) = length(a) + 1")]
    LengthGap,
    #[error("w0 does not normalize E")]
    W0DoesNotNormalizeE,
    #[error("w0 squared is not contained in E")]
    W0SquareNotInE,
    #[error("theta is not invariant under the opposition involution")]
    ThetaNotIotaInvariant,
    #[error("subset is not downward closed")]
    NotAnIdeal,
    #[error("involution has a fixed point; no balanced ideal exists")]
    FixedPoint,
    #[error("grassmannian parameters out of range: n={n}, k={k}")]
    GrassmannianRange { n: usize, k: usize },
    #[error("matrix is numerically degenerate: {0}")]
    Degenerate(String),
    #[error("matrix determinant is not positive")]
    NonPositiveDeterminant,
    #[error("factorization did not land in the extended Weyl group")]
    NotUnimodular,
    #[error("summands are not transverse")]
    NonTransverseSummands,
    #[error("subspaces do not span the whole space")]
    SumNotFull,
    #[error("power iteration did not converge; matrix is not proximal enough")]
    NotProximal,
    #[error("computed transversality type does not match the closed form: {0}")]
    VerificationMismatch(String),
    #[error("block parameters invalid: n={n} (odd required), k={k}")]
    BlockRange { n: usize, k: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
