//! Numerical tolerances used across the crate.
//!
//! Every cutoff lives here so the relationships between them stay visible:
//! representation-level checks are the tightest, certification of
//! reconstructed operators is looser, and statistical checks are looser
//! still. The ordering is enforced at compile time at the bottom of this
//! file.

/// Below this norm a vector cannot represent a ray; also the threshold for
/// treating two canonical representatives (or tied entry moduli) as equal.
pub const GAUGE: f64 = 1e-12;

/// Two rays closer than this in transition probability are treated as
/// orthogonal: the log map and graph coordinates are undefined there.
pub const CUT_LOCUS: f64 = 1e-12;

/// Maximum deviation of U*U from the identity accepted when constructing a
/// symmetry operator, and the default cutoff for phase equality of two
/// operators. Looser than [`GAUGE`] because matrix products accumulate a
/// few hundred rounding steps.
pub const UNITARITY: f64 = 1e-10;

/// Default certification tolerance for reconstructed symmetries: probe
/// residuals, orthonormality of assembled columns, the linear/antilinear
/// dichotomy margin, and cocycle identities. Chosen so that honest tables
/// pass with orders of magnitude to spare while perturbations of size
/// 10x this are always rejected.
pub const SYM: f64 = 1e-8;

/// Default step for the finite-difference curvature oracle.
pub const FD_STEP: f64 = 1e-3;

/// Steps outside this range make the oracle unreliable: below, rounding in
/// the second differences dominates; above, the O(h^2) truncation does.
pub const FD_STEP_RANGE: (f64, f64) = (1e-4, 1e-2);

/// Agreement expected between the closed-form curvature tensor and the
/// finite-difference oracle at the default step.
pub const FD_MATCH: f64 = 1e-4;

const _: () = {
    assert!(GAUGE <= UNITARITY);
    assert!(CUT_LOCUS <= UNITARITY);
    assert!(UNITARITY < SYM);
    assert!(SYM < FD_MATCH);
    assert!(FD_STEP_RANGE.0 <= FD_STEP && FD_STEP <= FD_STEP_RANGE.1);
};
