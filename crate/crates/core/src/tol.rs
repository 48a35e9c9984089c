//! Numerical tolerances shared by every module.

/// Exact algebraic identities (products, unitarity of constructions).
pub const ALGEBRAIC: f64 = 1e-12;
/// Probability normalization and channel completeness.
pub const STOCHASTIC: f64 = 1e-9;
/// Eigenvalue and eigenvector checks.
pub const SPECTRAL: f64 = 1e-8;
/// Unitarity of sampled or user supplied matrices.
pub const UNITARY: f64 = 1e-10;
/// Entries below this magnitude are treated as zero by the global-phase
/// canonicalization of Clifford matrices.
pub const PHASE_PIVOT: f64 = 1e-9;
/// Quantization scale for Clifford fingerprints.
pub const FINGERPRINT_SCALE: f64 = 1e6;
/// Slack on the decay-model constraints (`|lambda| <= 1`, plateau detection).
pub const FIT: f64 = 1e-6;
