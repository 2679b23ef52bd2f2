//! Error types shared across the crate.
//!
//! One enum covers every failure mode: geometric preconditions (zero
//! vectors, cut locus, frame defects), symmetry reconstruction rejections,
//! and group-table defects. Rejections carry enough context to name the
//! pipeline stage that refused the input.

use thiserror::Error;

/// Stage of the lift pipeline at which an input was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectStage {
    /// Transition probabilities of the table disagree with a symmetry image.
    ProbeConsistency,
    /// Graph coordinates of an image could not be extracted (cut locus) or
    /// had the wrong norm.
    Extraction,
    /// The linear/antilinear dichotomy test was inconclusive.
    LinearityDetection,
    /// The assembled columns were not orthonormal.
    Assembly,
    /// The assembled operator failed to reproduce the table.
    Verification,
}

impl RejectStage {
    /// Stable label used in diagnostics and CLI output.
    pub fn label(self) -> &'static str {
        match self {
            RejectStage::ProbeConsistency => "probe-consistency",
            RejectStage::Extraction => "extraction",
            RejectStage::LinearityDetection => "linearity-detection",
            RejectStage::Assembly => "assembly",
            RejectStage::Verification => "verification",
        }
    }
}

impl std::fmt::Display for RejectStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("vector has norm {norm:.3e}, below the representability threshold")]
    ZeroVector { norm: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("dimension {dim} is too small for this operation (need at least {min})")]
    DimTooSmall { dim: usize, min: usize },

    #[error("rays are orthogonal within tolerance (p = {p:.3e}); point lies on the cut locus")]
    CutLocus { p: f64 },

    #[error("tangent vectors live at different base rays (deviation {deviation:.3e})")]
    BaseMismatch { deviation: f64 },

    #[error("frame is not orthonormal (deviation {deviation:.3e})")]
    NonOrthonormalFrame { deviation: f64 },

    #[error("ray does not lie in the spanned subspace (residual {residual:.3e})")]
    NotInSpan { residual: f64 },

    #[error("tangent component is not orthogonal to the base ray (deviation {deviation:.3e})")]
    NotTangent { deviation: f64 },

    #[error(
        "finite-difference step {step:.3e} outside the supported range [{min:.1e}, {max:.1e}]"
    )]
    StepOutOfRange { step: f64, min: f64, max: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("extracted image norm {norm} deviates from 1 beyond tolerance {tol:.3e}")]
    NormDeviation { norm: f64, tol: f64 },

    #[error(
        "linear/antilinear dichotomy is ambiguous (residuals {unitary:.3e} vs {antiunitary:.3e})"
    )]
    Ambiguous { unitary: f64, antiunitary: f64 },

    #[error("table rejected at stage {stage}: {detail} (residual {residual:.3e})")]
    NotASymmetry {
        stage: RejectStage,
        detail: String,
        residual: f64,
    },

    #[error("multiplication table is not a group: {0}")]
    NotAGroup(String),

    #[error("gradings do not form a homomorphism to Z/2 ({violations} violating pairs)")]
    NotAHomomorphism { violations: usize },

    #[error("lifts are not projective: ({g}, {h}) composes to a non-scalar multiple")]
    NotProjective { g: usize, h: usize },

    #[error("lift of group element {element} failed: {source}")]
    ElementLift { element: usize, source: Box<Error> },

    #[error("operator is not a scalar multiple of the identity (deviation {deviation:.3e})")]
    NotScalar { deviation: f64 },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
