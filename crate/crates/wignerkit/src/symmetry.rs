//! Symmetries of the ray space: unitary and antiunitary operators.
//!
//! An operator is a unitary matrix together with a grading flag; the
//! antiunitary ones conjugate coordinates before applying the matrix.
//! Both kinds preserve transition probabilities, and composition follows
//! the grading arithmetic of Z/2 (the matrix of the second factor gets
//! conjugated when the first factor is antiunitary).
//!
//! Randomness lives here and nowhere else in the crate: Haar-distributed
//! unitaries and Gaussian rays, always drawn from caller-seeded ChaCha
//! streams so every consumer is reproducible.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state_space::{Ray, StateVector};
use crate::tol;
use crate::wigner;

/// Linear or antilinear character of a symmetry. Composition adds mod 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grading {
    #[serde(rename = "unitary")]
    Unitary,
    #[serde(rename = "antiunitary")]
    Antiunitary,
}

impl Grading {
    pub fn compose(self, other: Grading) -> Grading {
        if self == other {
            Grading::Unitary
        } else {
            Grading::Antiunitary
        }
    }

    pub fn is_antiunitary(self) -> bool {
        self == Grading::Antiunitary
    }

    /// 0 for unitary, 1 for antiunitary; the value of the grading
    /// homomorphism to Z/2.
    pub fn parity(self) -> u8 {
        match self {
            Grading::Unitary => 0,
            Grading::Antiunitary => 1,
        }
    }
}

impl std::fmt::Display for Grading {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Grading::Unitary => "unitary",
            Grading::Antiunitary => "antiunitary",
        })
    }
}

/// A probability-preserving symmetry: v -> U v (unitary grading) or
/// v -> U conj(v) (antiunitary grading), with U unitary.
#[derive(Debug, Clone)]
pub struct SymmetryOp {
    matrix: DMatrix<Complex64>,
    grading: Grading,
}

impl SymmetryOp {
    /// Requires a square matrix with U*U = I within [`tol::UNITARITY`].
    pub fn new(matrix: DMatrix<Complex64>, grading: Grading) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimMismatch {
                left: matrix.nrows(),
                right: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::DimTooSmall { dim: 0, min: 1 });
        }
        let dev = unitarity_deviation(&matrix);
        if dev > tol::UNITARITY {
            return Err(Error::NonUnitary { deviation: dev });
        }
        Ok(SymmetryOp { matrix, grading })
    }

    pub fn identity(dim: usize) -> Self {
        SymmetryOp {
            matrix: DMatrix::identity(dim, dim),
            grading: Grading::Unitary,
        }
    }

    /// Plain complex conjugation of coordinates.
    pub fn conjugation(dim: usize) -> Self {
        SymmetryOp {
            matrix: DMatrix::identity(dim, dim),
            grading: Grading::Antiunitary,
        }
    }

    /// lambda * identity for a unit-modulus lambda.
    pub fn scalar(dim: usize, lambda: Complex64) -> Result<Self> {
        if (lambda.norm() - 1.0).abs() > tol::UNITARITY {
            return Err(Error::NonUnitary {
                deviation: (lambda.norm() - 1.0).abs(),
            });
        }
        Ok(SymmetryOp {
            matrix: DMatrix::identity(dim, dim) * lambda,
            grading: Grading::Unitary,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn apply_vector(&self, v: &StateVector) -> Result<StateVector> {
        if v.dim() != self.dim() {
            return Err(Error::DimMismatch {
                left: self.dim(),
                right: v.dim(),
            });
        }
        let input = if self.grading.is_antiunitary() {
            v.raw().map(|e| e.conj())
        } else {
            v.raw().clone()
        };
        Ok(StateVector::from_dvector(&self.matrix * input))
    }

    pub fn apply_ray(&self, l: &Ray) -> Result<Ray> {
        Ray::new(&self.apply_vector(l.rep())?)
    }

    /// self after other: (self.compose(other))(v) = self(other(v)).
    pub fn compose(&self, other: &SymmetryOp) -> Result<SymmetryOp> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let rhs = if self.grading.is_antiunitary() {
            other.matrix.map(|e| e.conj())
        } else {
            other.matrix.clone()
        };
        Ok(SymmetryOp {
            matrix: &self.matrix * rhs,
            grading: self.grading.compose(other.grading),
        })
    }

    /// Two-sided inverse: the adjoint for unitaries, the transpose for
    /// antiunitaries (so that compose in either order gives the identity).
    pub fn inverse(&self) -> SymmetryOp {
        let matrix = match self.grading {
            Grading::Unitary => self.matrix.adjoint(),
            Grading::Antiunitary => self.matrix.transpose(),
        };
        SymmetryOp {
            matrix,
            grading: self.grading,
        }
    }

    /// lambda * self for unit-modulus lambda; same ray action.
    pub fn scaled(&self, lambda: Complex64) -> Result<SymmetryOp> {
        if (lambda.norm() - 1.0).abs() > tol::UNITARITY {
            return Err(Error::NonUnitary {
                deviation: (lambda.norm() - 1.0).abs(),
            });
        }
        Ok(SymmetryOp {
            matrix: &self.matrix * lambda,
            grading: self.grading,
        })
    }

    /// Rescale by a unit phase so the largest-modulus entry (row-major
    /// tie-break within [`tol::GAUGE`]) is real and nonnegative. Fixes the
    /// scalar ambiguity of reconstructed operators deterministically.
    pub fn canonical_phase(&self) -> SymmetryOp {
        let (idx, _) = largest_entry(&self.matrix);
        let pivot = self.matrix[idx];
        if pivot.norm() <= tol::GAUGE {
            return self.clone();
        }
        let phase = (pivot / Complex64::new(pivot.norm(), 0.0)).conj();
        SymmetryOp {
            matrix: &self.matrix * phase,
            grading: self.grading,
        }
    }
}

fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.ncols();
    let gram = m.adjoint() * m;
    let mut dev = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let expected = if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            dev = dev.max((gram[(r, c)] - expected).norm());
        }
    }
    dev
}

/// Row-major position of the entry of largest modulus; ties within
/// [`tol::GAUGE`] go to the earliest position.
fn largest_entry(m: &DMatrix<Complex64>) -> ((usize, usize), f64) {
    let mut max_mod = 0.0f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            max_mod = max_mod.max(m[(r, c)].norm());
        }
    }
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if m[(r, c)].norm() >= max_mod - tol::GAUGE {
                return ((r, c), max_mod);
            }
        }
    }
    ((0, 0), max_mod)
}

/// Outcome of a phase-equality test between two operators.
#[derive(Debug, Clone)]
pub struct PhaseEquivalence {
    pub equal: bool,
    /// The unit scalar with a = phase * b, when `equal`.
    pub phase: Option<Complex64>,
}

/// Tests whether a = lambda b for a unit scalar lambda, elementwise within
/// `tolerance`. The candidate phase comes from the largest-modulus entry
/// of b, so the test is well conditioned for (near-)unitary inputs.
pub fn equal_up_to_phase(
    a: &SymmetryOp,
    b: &SymmetryOp,
    tolerance: f64,
) -> Result<PhaseEquivalence> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    if a.grading != b.grading {
        return Ok(PhaseEquivalence {
            equal: false,
            phase: None,
        });
    }
    let (idx, max_mod) = largest_entry(&b.matrix);
    if max_mod <= tol::GAUGE {
        return Ok(PhaseEquivalence {
            equal: false,
            phase: None,
        });
    }
    let lambda = a.matrix[idx] / b.matrix[idx];
    if (lambda.norm() - 1.0).abs() > tolerance {
        return Ok(PhaseEquivalence {
            equal: false,
            phase: None,
        });
    }
    let mut dev = 0.0f64;
    for r in 0..a.dim() {
        for c in 0..a.dim() {
            dev = dev.max((a.matrix[(r, c)] - lambda * b.matrix[(r, c)]).norm());
        }
    }
    if dev <= tolerance {
        Ok(PhaseEquivalence {
            equal: true,
            phase: Some(lambda / Complex64::new(lambda.norm(), 0.0)),
        })
    } else {
        Ok(PhaseEquivalence {
            equal: false,
            phase: None,
        })
    }
}

/// Vector of independent standard complex Gaussians.
pub fn random_state_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    let v = DVector::from_fn(dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    StateVector::from_dvector(v)
}

/// Ray of a complex Gaussian vector; the induced distribution on rays is
/// the unitarily invariant one.
pub fn random_ray<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Ray {
    loop {
        if let Ok(r) = Ray::new(&random_state_vector(dim, rng)) {
            return r;
        }
    }
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the R
/// diagonal phases multiplied back into Q. Without that correction the QR
/// convention would bias the distribution.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / Complex64::new(d.norm(), 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        };
        for row in 0..dim {
            q[(row, k)] *= phase;
        }
    }
    q
}

/// Seeded Haar-random symmetry of the requested grading. Deterministic in
/// the seed.
pub fn random_symmetry(dim: usize, grading: Grading, seed: u64) -> Result<SymmetryOp> {
    if dim == 0 {
        return Err(Error::DimTooSmall { dim: 0, min: 1 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SymmetryOp::new(haar_unitary(dim, &mut rng), grading)
}

/// Tests whether `s` acts trivially on every ray: the probe set of the
/// lift pipeline plus `samples` seeded random rays, each required to be
/// fixed within [`tol::SYM`] in distance. Operators passing this test are
/// unit scalars with unitary grading; everything else moves some probe.
pub fn scalar_kernel_check(s: &SymmetryOp, samples: usize, seed: u64) -> Result<bool> {
    let dim = s.dim();
    if dim < 2 {
        return Err(Error::DimTooSmall { dim, min: 2 });
    }
    let mut rays = wigner::probe_rays(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        rays.push(random_ray(dim, &mut rng));
    }
    for l in &rays {
        let moved = s.apply_ray(l)?;
        if l.fs_distance(&moved)? > tol::SYM {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// The antiunitary time-reversal of a two-level system: T = iSigmaY K.
    fn time_reversal() -> SymmetryOp {
        let m =
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        SymmetryOp::new(m, Grading::Antiunitary).unwrap()
    }

    #[test]
    fn constructor_rejects_non_unitary_matrices() {
        let m =
            DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.1, 0.0)]);
        assert!(matches!(
            SymmetryOp::new(m, Grading::Unitary),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn conjugation_fixes_real_rays_and_flips_phases() {
        let k = SymmetryOp::conjugation(2);
        let plus = Ray::new(&StateVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap()).unwrap();
        assert!(k.apply_ray(&plus).unwrap().approx_eq(&plus, 1e-15));
        let circ = Ray::new(&StateVector::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap()).unwrap();
        let flipped =
            Ray::new(&StateVector::new(vec![c(1.0, 0.0), c(0.0, -1.0)]).unwrap()).unwrap();
        assert!(k.apply_ray(&circ).unwrap().approx_eq(&flipped, 1e-15));
    }

    #[test]
    fn antiunitaries_conjugate_inner_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let s = SymmetryOp::new(haar_unitary(4, &mut rng), Grading::Antiunitary).unwrap();
        for _ in 0..50 {
            let v1 = random_state_vector(4, &mut rng);
            let v2 = random_state_vector(4, &mut rng);
            let before = v1.inner(&v2).unwrap();
            let after = s
                .apply_vector(&v1)
                .unwrap()
                .inner(&s.apply_vector(&v2).unwrap())
                .unwrap();
            assert!((after - before.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn both_gradings_preserve_transition_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for grading in [Grading::Unitary, Grading::Antiunitary] {
            let s = SymmetryOp::new(haar_unitary(5, &mut rng), grading).unwrap();
            for _ in 0..100 {
                let l1 = random_ray(5, &mut rng);
                let l2 = random_ray(5, &mut rng);
                let p = l1.transition_probability(&l2).unwrap();
                let q = s
                    .apply_ray(&l1)
                    .unwrap()
                    .transition_probability(&s.apply_ray(&l2).unwrap())
                    .unwrap();
                assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn composition_follows_the_grading_arithmetic() {
        let t = time_reversal();
        // T o T = -identity: antiunitary squared is unitary.
        let tt = t.compose(&t).unwrap();
        assert_eq!(tt.grading(), Grading::Unitary);
        let minus_i = DMatrix::identity(2, 2) * c(-1.0, 0.0);
        assert!((tt.matrix() - minus_i).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let a = SymmetryOp::new(haar_unitary(3, &mut rng), Grading::Antiunitary).unwrap();
        let b = SymmetryOp::new(haar_unitary(3, &mut rng), Grading::Unitary).unwrap();
        let d = SymmetryOp::new(haar_unitary(3, &mut rng), Grading::Antiunitary).unwrap();
        // Associativity on vectors, through all grading combinations.
        let v = random_state_vector(3, &mut rng);
        let left = a.compose(&b).unwrap().compose(&d).unwrap();
        let right = a.compose(&b.compose(&d).unwrap()).unwrap();
        assert_eq!(left.grading(), right.grading());
        let lv = left.apply_vector(&v).unwrap();
        let rv = right.apply_vector(&v).unwrap();
        assert!(lv.max_abs_diff(&rv).unwrap() < 1e-12);
        // And composition acts as application in sequence.
        let seq = a.apply_vector(&b.apply_vector(&v).unwrap()).unwrap();
        let joint = a.compose(&b).unwrap().apply_vector(&v).unwrap();
        assert!(seq.max_abs_diff(&joint).unwrap() < 1e-12);
    }

    #[test]
    fn inverse_is_two_sided_for_both_gradings() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for grading in [Grading::Unitary, Grading::Antiunitary] {
            let s = SymmetryOp::new(haar_unitary(4, &mut rng), grading).unwrap();
            let inv = s.inverse();
            let left = inv.compose(&s).unwrap();
            let right = s.compose(&inv).unwrap();
            let id = DMatrix::<Complex64>::identity(4, 4);
            assert_eq!(left.grading(), Grading::Unitary);
            assert!((left.matrix() - &id).norm() < 1e-13);
            assert!((right.matrix() - &id).norm() < 1e-13);
        }
    }

    #[test]
    fn phase_equality_detects_scalars_and_rejects_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let s = SymmetryOp::new(haar_unitary(3, &mut rng), Grading::Unitary).unwrap();
        let rotated = s.scaled(c(0.0, 1.0)).unwrap();
        let eq = equal_up_to_phase(&rotated, &s, tol::UNITARITY).unwrap();
        assert!(eq.equal);
        assert!((eq.phase.unwrap() - c(0.0, 1.0)).norm() < 1e-12);

        let mut bumped = s.matrix().clone();
        bumped[(0, 0)] += c(1e-3, 0.0);
        // Bypass the unitarity check deliberately: compare matrices only.
        let perturbed = SymmetryOp {
            matrix: bumped,
            grading: Grading::Unitary,
        };
        assert!(
            !equal_up_to_phase(&perturbed, &s, tol::UNITARITY)
                .unwrap()
                .equal
        );

        let anti = SymmetryOp::new(s.matrix().clone(), Grading::Antiunitary).unwrap();
        assert!(!equal_up_to_phase(&anti, &s, tol::UNITARITY).unwrap().equal);
    }

    #[test]
    fn canonical_phase_is_idempotent_and_phase_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let s = SymmetryOp::new(haar_unitary(4, &mut rng), Grading::Unitary).unwrap();
        let a = s.canonical_phase();
        let b = s.scaled(c(-0.6, 0.8)).unwrap().canonical_phase();
        assert!((a.matrix() - b.matrix()).norm() < 1e-12);
        assert!((a.canonical_phase().matrix() - a.matrix()).norm() < 1e-15);
    }

    #[test]
    fn haar_sampling_is_deterministic_in_the_seed() {
        let a = random_symmetry(5, Grading::Unitary, 99).unwrap();
        let b = random_symmetry(5, Grading::Unitary, 99).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let d = random_symmetry(5, Grading::Unitary, 100).unwrap();
        assert!((a.matrix() - d.matrix()).norm() > 1e-3);
    }

    #[test]
    fn haar_first_moment_of_trace_magnitude() {
        // E |tr U|^2 = 1 for Haar measure in any dimension.
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let samples = 1000;
        let mut acc = 0.0;
        for _ in 0..samples {
            let u = haar_unitary(8, &mut rng);
            let tr: Complex64 = (0..8).map(|k| u[(k, k)]).sum();
            acc += tr.norm_sqr();
        }
        let mean = acc / samples as f64;
        assert!(
            (mean - 1.0).abs() < 0.15,
            "mean |tr U|^2 = {mean}, expected 1 within 0.15"
        );
    }

    #[test]
    fn scalar_kernel_contains_only_unitary_scalars() {
        let phase = c(0.6, 0.8);
        let s = SymmetryOp::scalar(3, phase).unwrap();
        assert!(scalar_kernel_check(&s, 50, 1).unwrap());
        // A diagonal relative phase moves superposition probes.
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![
            c(1.0, 0.0),
            (c(0.0, 1.0) * 0.1).exp(),
            c(1.0, 0.0),
        ]));
        let d = SymmetryOp::new(m, Grading::Unitary).unwrap();
        assert!(!scalar_kernel_check(&d, 50, 1).unwrap());
        // Scalar with antiunitary grading is not in the kernel either.
        let k = SymmetryOp::conjugation(3);
        assert!(!scalar_kernel_check(&k, 50, 1).unwrap());
    }
}
