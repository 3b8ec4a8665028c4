//! Fusion frames over ℝ or ℂ: frame operators and the fusion frame potential,
//! Riemannian descent toward tight fusion frames, and certification tools
//! (Welch-bound gaps, property-𝒮 checks, Plücker embeddings and
//! one-parameter-subgroup instability certificates).
//!
//! A fusion frame of type `(d, k)` is represented by an N-tuple of
//! row-orthonormal blocks `A_i` of shape `k_i × d`; the subspace `𝒮_i` is
//! the row space of `A_i` and `P_i = A_i* A_i` its orthogonal projector.
//! Every routine is generic over the [`Scalar`] field, so real data can be
//! pushed through the complex code path unchanged.

// NaN-rejecting guards are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admissibility;
pub mod error;
pub mod flow;
pub mod frame;
pub mod git;
pub mod io;
pub mod linalg;
pub mod scalar;
pub mod tol;

pub use error::{Error, Result};
pub use flow::{
    classify_critical_point, descend, extrinsic_gradient, retract, riemannian_gradient,
    CriticalPointReport, DescentError, DescentSettings, DescentTrace, TraceRecord,
};
pub use frame::{
    check_spectral_membership, ffp, find_unitary_equivalence, frame_operator, is_fusion_frame,
    is_tight, random_fusion_frame, spectrum, welch_bound, FrameConfig, HermitianOperator,
    OperatorFrame, SpectralData,
};
pub use git::{
    check_property_s, instability_certificate, plucker_embed, welch_gap, OnePSCertificate,
    PluckerVector, PropertySOptions, PropertySVerdict, SubspaceWitness,
};
pub use io::AnyFrame;
pub use scalar::{Field, Scalar};

pub use nalgebra::DMatrix;
pub use num_complex::Complex64;
