//! Reconstruction of a symmetry operator from ray-level data.
//!
//! A map of rays that preserves transition probabilities is induced by a
//! unitary or antiunitary operator, unique up to a global phase. This
//! module makes that effective: it fixes the finite probe set whose images
//! pin the map down, and rebuilds the operator from those images alone.
//!
//! The probes at dimension n are the base ray [e0], the superpositions
//! A_k = [(e0 + e_k)/sqrt2] and B_k = [(e0 + i e_k)/sqrt2] for each k >= 1,
//! and optionally the axes V_k = [e_k] for validation. The pipeline stages:
//! check probe probabilities, move the base image back to [e0] by a
//! deterministic reflection, read off matrix columns as graph coordinates,
//! decide linear vs antilinear from the relative phase of the A and B
//! columns, assemble, and certify against the full table. Each stage owns a
//! residual; rejections name the stage that failed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, RejectStage, Result};
use crate::state_space::{graph_extract, Ray, StateVector};
use crate::symmetry::{random_ray, Grading, SymmetryOp};
use crate::tol;

/// Phase convention of reconstructed operators: the largest-modulus matrix
/// entry is made real and nonnegative.
pub const GAUGE_CONVENTION: &str = "largest-entry-real-nonnegative";

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The base probe [e0].
pub fn base_probe(dim: usize) -> Result<Ray> {
    if dim < 2 {
        return Err(Error::DimTooSmall { dim, min: 2 });
    }
    Ray::basis(dim, 0)
}

fn superposition_probe(dim: usize, k: usize, phase: Complex64) -> Result<Ray> {
    if dim < 2 {
        return Err(Error::DimTooSmall { dim, min: 2 });
    }
    if k == 0 || k >= dim {
        return Err(Error::Invalid(format!(
            "probe index {k} out of range 1..{dim}"
        )));
    }
    let mut v = DVector::from_element(dim, c64(0.0, 0.0));
    v[0] = c64(1.0, 0.0);
    v[k] = phase;
    Ray::new(&StateVector::from_dvector(v))
}

/// A_k = [(e0 + e_k)/sqrt2] for k in 1..dim.
pub fn a_probe(dim: usize, k: usize) -> Result<Ray> {
    superposition_probe(dim, k, c64(1.0, 0.0))
}

/// B_k = [(e0 + i e_k)/sqrt2] for k in 1..dim.
pub fn b_probe(dim: usize, k: usize) -> Result<Ray> {
    superposition_probe(dim, k, c64(0.0, 1.0))
}

/// V_k = [e_k] for k in 1..dim.
pub fn v_probe(dim: usize, k: usize) -> Result<Ray> {
    if dim < 2 {
        return Err(Error::DimTooSmall { dim, min: 2 });
    }
    if k == 0 || k >= dim {
        return Err(Error::Invalid(format!(
            "probe index {k} out of range 1..{dim}"
        )));
    }
    Ray::basis(dim, k)
}

/// Every probe ray at dimension n: base, all A_k, all B_k, all V_k.
pub fn probe_rays(dim: usize) -> Result<Vec<Ray>> {
    let mut rays = vec![base_probe(dim)?];
    for k in 1..dim {
        rays.push(a_probe(dim, k)?);
    }
    for k in 1..dim {
        rays.push(b_probe(dim, k)?);
    }
    for k in 1..dim {
        rays.push(v_probe(dim, k)?);
    }
    Ok(rays)
}

/// Images of the probe set under some map of rays, plus the certification
/// tolerance. Construction validates shape only; probability consistency
/// is a pipeline stage so that corrupt tables can be loaded and rejected
/// with a diagnosis.
#[derive(Debug, Clone)]
pub struct ProbeTable {
    dim: usize,
    tolerance: f64,
    image_base: Ray,
    images_a: Vec<Ray>,
    images_b: Vec<Ray>,
    images_v: Option<Vec<Ray>>,
}

impl ProbeTable {
    pub fn from_images(
        tolerance: f64,
        image_base: Ray,
        images_a: Vec<Ray>,
        images_b: Vec<Ray>,
        images_v: Option<Vec<Ray>>,
    ) -> Result<Self> {
        let dim = image_base.dim();
        if dim < 2 {
            return Err(Error::DimTooSmall { dim, min: 2 });
        }
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::Invalid(format!(
                "tolerance must be positive and finite, got {tolerance}"
            )));
        }
        for (name, list) in [("A", &images_a), ("B", &images_b)] {
            if list.len() != dim - 1 {
                return Err(Error::Invalid(format!(
                    "expected {} {name} images for dimension {dim}, got {}",
                    dim - 1,
                    list.len()
                )));
            }
            for r in list {
                if r.dim() != dim {
                    return Err(Error::DimMismatch {
                        left: dim,
                        right: r.dim(),
                    });
                }
            }
        }
        if let Some(v) = &images_v {
            if v.len() != dim - 1 {
                return Err(Error::Invalid(format!(
                    "expected {} V images for dimension {dim}, got {}",
                    dim - 1,
                    v.len()
                )));
            }
            for r in v {
                if r.dim() != dim {
                    return Err(Error::DimMismatch {
                        left: dim,
                        right: r.dim(),
                    });
                }
            }
        }
        Ok(ProbeTable {
            dim,
            tolerance,
            image_base,
            images_a,
            images_b,
            images_v,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn image_base(&self) -> &Ray {
        &self.image_base
    }

    pub fn images_a(&self) -> &[Ray] {
        &self.images_a
    }

    pub fn images_b(&self) -> &[Ray] {
        &self.images_b
    }

    pub fn images_v(&self) -> Option<&[Ray]> {
        self.images_v.as_deref()
    }

    /// Largest deviation of p(base image, A_k or B_k image) from 1/2, the
    /// probability relations every symmetry image satisfies.
    pub fn consistency_residual(&self) -> f64 {
        let mut dev = 0.0f64;
        for list in [&self.images_a, &self.images_b] {
            for img in list {
                let p = self
                    .image_base
                    .transition_probability(img)
                    .expect("table rays share a dimension");
                dev = dev.max((p - 0.5).abs());
            }
        }
        dev
    }

    /// (probe, image) pairs for verification, V images included.
    fn pairs(&self) -> Result<Vec<(Ray, Ray)>> {
        let mut out = vec![(base_probe(self.dim)?, self.image_base.clone())];
        for (k, img) in self.images_a.iter().enumerate() {
            out.push((a_probe(self.dim, k + 1)?, img.clone()));
        }
        for (k, img) in self.images_b.iter().enumerate() {
            out.push((b_probe(self.dim, k + 1)?, img.clone()));
        }
        if let Some(v) = &self.images_v {
            for (k, img) in v.iter().enumerate() {
                out.push((v_probe(self.dim, k + 1)?, img.clone()));
            }
        }
        Ok(out)
    }
}

/// The probe table of a known operator, V images included.
pub fn make_probe_table(s: &SymmetryOp) -> Result<ProbeTable> {
    let dim = s.dim();
    if dim < 2 {
        return Err(Error::DimTooSmall { dim, min: 2 });
    }
    let image_base = s.apply_ray(&base_probe(dim)?)?;
    let mut images_a = Vec::with_capacity(dim - 1);
    let mut images_b = Vec::with_capacity(dim - 1);
    let mut images_v = Vec::with_capacity(dim - 1);
    for k in 1..dim {
        images_a.push(s.apply_ray(&a_probe(dim, k)?)?);
        images_b.push(s.apply_ray(&b_probe(dim, k)?)?);
        images_v.push(s.apply_ray(&v_probe(dim, k)?)?);
    }
    ProbeTable::from_images(tol::SYM, image_base, images_a, images_b, Some(images_v))
}

/// Deterministic unitary moving the base image back onto [e0], and the
/// table with every image pushed through it.
///
/// The representative of the base image is rephased so its first component
/// is real nonnegative; the Householder reflection through (a - e0) then
/// exchanges it with e0. When the base image already is [e0] the identity
/// is returned.
pub fn fix_base_point(t: &ProbeTable) -> Result<(SymmetryOp, ProbeTable)> {
    let dim = t.dim;
    let a = t.image_base.rep().raw();
    let first = a[0];
    let aligned = if first.norm() > tol::GAUGE {
        a * (first.conj() / c64(first.norm(), 0.0))
    } else {
        a.clone()
    };
    let mut e0 = DVector::from_element(dim, c64(0.0, 0.0));
    e0[0] = c64(1.0, 0.0);
    let v = &aligned - &e0;
    let u0 = if v.norm() <= tol::GAUGE {
        SymmetryOp::identity(dim)
    } else {
        let vv = v.dotc(&v).re;
        let outer = &v * v.adjoint();
        let m = DMatrix::identity(dim, dim) - outer * c64(2.0 / vv, 0.0);
        SymmetryOp::new(m, Grading::Unitary)?
    };
    let push = |r: &Ray| u0.apply_ray(r);
    let fixed = ProbeTable::from_images(
        t.tolerance,
        push(&t.image_base)?,
        t.images_a.iter().map(&push).collect::<Result<_>>()?,
        t.images_b.iter().map(&push).collect::<Result<_>>()?,
        match &t.images_v {
            Some(v) => Some(v.iter().map(&push).collect::<Result<_>>()?),
            None => None,
        },
    )?;
    Ok((u0, fixed))
}

/// Matrix column data read off a base-fixed table: w_k and w'_k are the
/// graph coordinates of the A_k and B_k images over [e0]. For a genuine
/// symmetry w_k is the k-th column of the operator up to one overall
/// phase, and w'_k = +/- i w_k decides the grading.
#[derive(Debug, Clone)]
pub struct RealLinearData {
    base_fix: SymmetryOp,
    w: Vec<StateVector>,
    w_prime: Vec<StateVector>,
}

impl RealLinearData {
    pub fn base_fix(&self) -> &SymmetryOp {
        &self.base_fix
    }

    pub fn w(&self) -> &[StateVector] {
        &self.w
    }

    pub fn w_prime(&self) -> &[StateVector] {
        &self.w_prime
    }
}

/// Reads graph coordinates of every A and B image of a base-fixed table.
/// Fails with CutLocus when an image is orthogonal to [e0] and with
/// NormDeviation when a coordinate is not a unit vector within the table
/// tolerance (both signal the table is not a symmetry image).
pub fn extract_real_linear(base_fix: SymmetryOp, t: &ProbeTable) -> Result<RealLinearData> {
    let dim = t.dim;
    let e0 = base_probe(dim)?;
    let dev = t
        .image_base
        .rep()
        .max_abs_diff(e0.rep())
        .expect("same dimension");
    if dev > tol::UNITARITY {
        return Err(Error::Invalid(format!(
            "table is not base-fixed: image of the base deviates from [e0] by {dev:.3e}"
        )));
    }
    let read = |img: &Ray| -> Result<StateVector> {
        let f = graph_extract(&e0, img)?;
        let norm = f.norm();
        if (norm - 1.0).abs() > t.tolerance {
            return Err(Error::NormDeviation {
                norm,
                tol: t.tolerance,
            });
        }
        Ok(f.component().clone())
    };
    let w = t.images_a.iter().map(read).collect::<Result<Vec<_>>>()?;
    let w_prime = t.images_b.iter().map(read).collect::<Result<Vec<_>>>()?;
    Ok(RealLinearData {
        base_fix,
        w,
        w_prime,
    })
}

/// Decides linear vs antilinear from the A and B columns.
///
/// Graph coordinates carry no residual gauge, so a genuine table has
/// w'_k = i w_k exactly (linear) or w'_k = -i w_k exactly (antilinear);
/// the base-image phase divides out of both columns equally. The total
/// deviation of the winning alternative is returned as the residual.
/// When the two alternatives disagree by no more than `tolerance` the
/// input carries no linearity signal and the call refuses to choose.
pub fn detect_linearity(d: &RealLinearData, tolerance: f64) -> Result<(Grading, f64)> {
    let i = c64(0.0, 1.0);
    let mut res_u = 0.0;
    let mut res_a = 0.0;
    for (w, wp) in d.w.iter().zip(d.w_prime.iter()) {
        res_u += wp.sub(&w.scaled(i))?.norm();
        res_a += wp.add(&w.scaled(i))?.norm();
    }
    if (res_u - res_a).abs() <= tolerance {
        return Err(Error::Ambiguous {
            unitary: res_u,
            antiunitary: res_a,
        });
    }
    if res_u < res_a {
        Ok((Grading::Unitary, res_u))
    } else {
        Ok((Grading::Antiunitary, res_a))
    }
}

/// Assembles the operator with first column e0 and k-th column w_k, undoes
/// the base-point reflection, and fixes the output phase canonically.
/// Rejects column sets that are not orthonormal within `tolerance`.
pub fn assemble_lift(d: &RealLinearData, grading: Grading, tolerance: f64) -> Result<SymmetryOp> {
    let dim = d.base_fix.dim();
    let mut m = DMatrix::from_element(dim, dim, c64(0.0, 0.0));
    m[(0, 0)] = c64(1.0, 0.0);
    for (k, w) in d.w.iter().enumerate() {
        m.set_column(k + 1, w.raw());
    }
    let mut dev = 0.0f64;
    let gram = m.adjoint() * &m;
    for r in 0..dim {
        for col in 0..dim {
            let expected = if r == col { 1.0 } else { 0.0 };
            dev = dev.max((gram[(r, col)] - c64(expected, 0.0)).norm());
        }
    }
    if dev > tolerance {
        return Err(Error::NonUnitary { deviation: dev });
    }
    let graded = SymmetryOp::new(m, grading)?;
    Ok(d.base_fix.inverse().compose(&graded)?.canonical_phase())
}

/// Residuals certifying a reconstructed operator against its table.
#[derive(Debug, Clone, Copy)]
pub struct LiftResiduals {
    /// Largest distance between a mapped probe and its tabled image, V
    /// probes included.
    pub probe_max: f64,
    /// Deviation of the assembled matrix from unitarity.
    pub orthonormality: f64,
    /// Total deviation of the winning linearity alternative.
    pub alpha_consistency: f64,
}

impl LiftResiduals {
    pub fn max(&self) -> f64 {
        self.probe_max
            .max(self.orthonormality)
            .max(self.alpha_consistency)
    }
}

/// A certified reconstruction: the operator, the residuals backing it, and
/// the tolerance they were certified at.
#[derive(Debug, Clone)]
pub struct LiftReport {
    lift: SymmetryOp,
    residuals: LiftResiduals,
    tolerance: f64,
}

impl LiftReport {
    pub fn lift(&self) -> &SymmetryOp {
        &self.lift
    }

    pub fn grading(&self) -> Grading {
        self.lift.grading()
    }

    pub fn residuals(&self) -> &LiftResiduals {
        &self.residuals
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn accepted(&self) -> bool {
        self.residuals.max() <= self.tolerance
    }

    pub fn gauge_phase_convention(&self) -> &'static str {
        GAUGE_CONVENTION
    }
}

fn reject(stage: RejectStage, detail: impl Into<String>, residual: f64) -> Error {
    Error::NotASymmetry {
        stage,
        detail: detail.into(),
        residual,
    }
}

/// Full reconstruction pipeline. Returns a report whose residuals all pass
/// the table tolerance; any failure is a rejection naming the stage.
pub fn wigner_lift(t: &ProbeTable) -> Result<LiftReport> {
    let tolerance = t.tolerance;

    let consistency = t.consistency_residual();
    if consistency > tolerance {
        return Err(reject(
            RejectStage::ProbeConsistency,
            "probe probabilities deviate from the symmetry pattern",
            consistency,
        ));
    }

    let (u0, fixed) = fix_base_point(t)?;

    let data = extract_real_linear(u0, &fixed).map_err(|e| match e {
        Error::CutLocus { p } => reject(
            RejectStage::Extraction,
            "an image ray is orthogonal to the base image",
            p,
        ),
        Error::NormDeviation { norm, .. } => reject(
            RejectStage::Extraction,
            "a graph coordinate is not a unit vector",
            (norm - 1.0).abs(),
        ),
        other => other,
    })?;

    let (grading, alpha_consistency) = match detect_linearity(&data, tolerance) {
        Ok((g, r)) => (g, r),
        Err(Error::Ambiguous {
            unitary,
            antiunitary,
        }) => {
            return Err(reject(
                RejectStage::LinearityDetection,
                "linear and antilinear alternatives are indistinguishable",
                (unitary - antiunitary).abs(),
            ))
        }
        Err(other) => return Err(other),
    };
    if alpha_consistency > tolerance {
        return Err(reject(
            RejectStage::LinearityDetection,
            "winning linearity alternative still deviates beyond tolerance",
            alpha_consistency,
        ));
    }

    let lift = match assemble_lift(&data, grading, tolerance) {
        Ok(s) => s,
        Err(Error::NonUnitary { deviation }) => {
            return Err(reject(
                RejectStage::Assembly,
                "assembled columns are not orthonormal",
                deviation,
            ))
        }
        Err(other) => return Err(other),
    };

    let mut probe_max = 0.0f64;
    for (probe, image) in t.pairs()? {
        let mapped = lift.apply_ray(&probe)?;
        probe_max = probe_max.max(mapped.fs_distance(&image)?);
    }
    let orthonormality = {
        let gram = lift.matrix().adjoint() * lift.matrix();
        let mut dev = 0.0f64;
        for r in 0..t.dim {
            for col in 0..t.dim {
                let expected = if r == col { 1.0 } else { 0.0 };
                dev = dev.max((gram[(r, col)] - c64(expected, 0.0)).norm());
            }
        }
        dev
    };
    let residuals = LiftResiduals {
        probe_max,
        orthonormality,
        alpha_consistency,
    };
    if probe_max > tolerance {
        return Err(reject(
            RejectStage::Verification,
            "reconstructed operator does not reproduce the table",
            probe_max,
        ));
    }
    Ok(LiftReport {
        lift,
        residuals,
        tolerance,
    })
}

/// Independent certification of an operator against a table: worst probe
/// distance, plus worst transition-probability drift over seeded random
/// ray pairs.
#[derive(Debug, Clone, Copy)]
pub struct VerifyReport {
    pub probe_max: f64,
    pub probability_deviation: f64,
}

pub fn verify_lift(
    s: &SymmetryOp,
    t: &ProbeTable,
    extra_samples: usize,
    seed: u64,
) -> Result<VerifyReport> {
    if s.dim() != t.dim {
        return Err(Error::DimMismatch {
            left: s.dim(),
            right: t.dim,
        });
    }
    let mut probe_max = 0.0f64;
    for (probe, image) in t.pairs()? {
        probe_max = probe_max.max(s.apply_ray(&probe)?.fs_distance(&image)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probability_deviation = 0.0f64;
    for _ in 0..extra_samples {
        let l1 = random_ray(t.dim, &mut rng);
        let l2 = random_ray(t.dim, &mut rng);
        let before = l1.transition_probability(&l2)?;
        let after = s
            .apply_ray(&l1)?
            .transition_probability(&s.apply_ray(&l2)?)?;
        probability_deviation = probability_deviation.max((before - after).abs());
    }
    Ok(VerifyReport {
        probe_max,
        probability_deviation,
    })
}
