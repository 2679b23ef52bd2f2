//! Geometry of pure quantum states and reconstruction of their symmetries.
//!
//! The crate works with the space of rays (one-dimensional subspaces) of a
//! finite-dimensional complex Hilbert space and provides, in layers:
//!
//! - [`state_space`]: rays in a canonical gauge, the Fubini–Study distance
//!   and metric, geodesics, curvature with an independent finite-difference
//!   oracle, and a sphere chart for two-dimensional state spaces.
//! - [`symmetry`]: unitary and antiunitary operators, their action on rays,
//!   phase-insensitive comparison, Haar-random sampling, and the test for
//!   operators that act trivially on every ray.
//! - [`wigner`]: reconstruction of an operator from a finite probe table of
//!   ray images — the constructive form of the fact that every
//!   transition-probability-preserving ray map comes from a unitary or
//!   antiunitary operator, unique up to phase.
//! - [`extension`]: lifting a finite group of ray maps elementwise and
//!   measuring how far the family is from a genuine operator representation
//!   (grading homomorphism, twisted cocycle, trivialization search).
//! - [`suites`]: seeded statistical sweeps over all of the above, shared by
//!   the test gate, the benchmarks, and the command-line tool.
//!
//! All randomized entry points take explicit seeds and produce identical
//! results whether or not the `parallel` feature (on by default) spreads
//! their sample loops across threads.

#![forbid(unsafe_code)]

pub mod error;
pub mod exec;
pub mod extension;
pub mod io;
pub mod state_space;
pub mod suites;
pub mod symmetry;
pub mod tol;
pub mod wigner;

pub use error::{Error, RejectStage, Result};
pub use extension::{
    antiunitary_square_sign, coboundary_trivialization, cocycle_table, conjugation_family,
    grading_homomorphism, lift_family, time_reversal_family, twisted_cocycle_check, GradedCocycle,
    GroupTable,
};
pub use state_space::{
    bloch_point, curvature, curvature_fd_oracle, exp_map, fs_metric, graph_extract, graph_ray,
    log_map, ray_from_bloch, BlochPoint, Ray, StateVector, TangentVector,
};
pub use symmetry::{
    equal_up_to_phase, haar_unitary, random_ray, random_state_vector, random_symmetry,
    scalar_kernel_check, Grading, PhaseEquivalence, SymmetryOp,
};
pub use wigner::{
    make_probe_table, verify_lift, wigner_lift, LiftReport, LiftResiduals, ProbeTable,
    RealLinearData, VerifyReport,
};
