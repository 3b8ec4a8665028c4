//! Default tolerances. Every routine that compares floating-point values
//! takes its tolerance as an argument; these are the values used when the
//! caller has no better choice.

/// Row orthonormality and positive-definiteness checks.
pub const STRUCTURAL: f64 = 1e-8;

/// Comparisons between computed and target spectra.
pub const SPECTRAL: f64 = 1e-8;

/// Gradient-norm threshold at which descent stops.
pub const CONVERGENCE: f64 = 1e-10;

/// Relative singular-value cutoff for numerical rank.
pub const RANK_RELATIVE: f64 = 1e-8;

/// Absolute tolerance for majorization partial sums.
pub const MAJORIZATION: f64 = 1e-9;

/// Eigenvalues closer than this are treated as one cluster.
pub const CLUSTER_GAP: f64 = 1e-8;

/// Smallest Gram eigenvalue a block may have before retraction refuses it.
pub const RETRACTION: f64 = 1e-12;
