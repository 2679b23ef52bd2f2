//! Geometry of the projective space of pure states.
//!
//! Points are rays (complex lines) in C^n, stored through a canonical unit
//! representative so equality is plain elementwise comparison. The distance
//! between two rays is determined by the transition probability alone via
//! cos(d) = 2p - 1, which makes the space a metric space of diameter pi;
//! tangent vectors at a ray L are vectors orthogonal to its representative,
//! and with that identification geodesics, the metric pairing, graph
//! coordinates, and the curvature tensor all have short closed forms below.
//!
//! Everything here is deterministic; no randomness enters this module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

/// A nonzero vector of C^n. Not normalized; rays normalize on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    v: DVector<Complex64>,
}

impl StateVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimTooSmall { dim: 0, min: 1 });
        }
        Ok(StateVector {
            v: DVector::from_vec(entries),
        })
    }

    /// Standard basis vector e_k (zero-based).
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimTooSmall { dim: 0, min: 1 });
        }
        if k >= dim {
            return Err(Error::Invalid(format!(
                "basis index {k} out of range for dimension {dim}"
            )));
        }
        let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
        v[k] = Complex64::new(1.0, 0.0);
        Ok(StateVector { v })
    }

    pub(crate) fn from_dvector(v: DVector<Complex64>) -> Self {
        StateVector { v }
    }

    pub(crate) fn raw(&self) -> &DVector<Complex64> {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        self.v.as_slice()
    }

    /// Hermitian inner product, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self.v.dotc(&other.v))
    }

    pub fn norm(&self) -> f64 {
        self.v.norm()
    }

    pub fn scaled(&self, lambda: Complex64) -> Self {
        StateVector {
            v: &self.v * lambda,
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(StateVector {
            v: &self.v + &other.v,
        })
    }

    pub fn sub(&self, other: &StateVector) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(StateVector {
            v: &self.v - &other.v,
        })
    }

    /// Max elementwise modulus of the difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .v
            .iter()
            .zip(other.v.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// A ray (complex line) through the origin of C^n.
///
/// The stored representative is the canonical one: unit norm, and the entry
/// of largest modulus is real and nonnegative. Ties in modulus (within
/// [`tol::GAUGE`]) go to the lowest index, so representatives of equal rays
/// agree elementwise and the constructor is scale and phase invariant.
#[derive(Debug, Clone)]
pub struct Ray {
    rep: StateVector,
}

impl Ray {
    /// Canonicalize `v` into its ray. Fails only on (near-)zero input.
    pub fn new(v: &StateVector) -> Result<Self> {
        let norm = v.norm();
        if norm <= tol::GAUGE {
            return Err(Error::ZeroVector { norm });
        }
        let unit = &v.v / Complex64::new(norm, 0.0);
        let mut max_mod = 0.0f64;
        for e in unit.iter() {
            max_mod = max_mod.max(e.norm());
        }
        let idx = unit
            .iter()
            .position(|e| e.norm() >= max_mod - tol::GAUGE)
            .expect("a unit vector has an entry of maximal modulus");
        let pivot = unit[idx];
        let phase = pivot / Complex64::new(pivot.norm(), 0.0);
        Ok(Ray {
            rep: StateVector::from_dvector(unit * phase.conj()),
        })
    }

    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        Ray::new(&StateVector::basis(dim, k)?)
    }

    pub fn rep(&self) -> &StateVector {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    /// Elementwise agreement of canonical representatives.
    pub fn approx_eq(&self, other: &Ray, tolerance: f64) -> bool {
        match self.rep.max_abs_diff(&other.rep) {
            Ok(d) => d <= tolerance,
            Err(_) => false,
        }
    }

    /// p = |<r1, r2>|^2, the transition probability. Symmetric, in [0, 1].
    pub fn transition_probability(&self, other: &Ray) -> Result<f64> {
        let ip = self.rep.inner(&other.rep)?;
        Ok(ip.norm_sqr().clamp(0.0, 1.0))
    }

    /// Distance d in [0, pi] with cos(d) = 2p - 1.
    ///
    /// Evaluated through arccos only for p <= 1/2; for nearby rays that
    /// formula amplifies the rounding of p by 1/sqrt(1-p), so the distance
    /// comes from the phase-aligned chord instead (d = 4 asin(delta/2)
    /// with delta^2 = 2 - 2 sqrt(p), the same function exactly).
    pub fn fs_distance(&self, other: &Ray) -> Result<f64> {
        let ip = self.rep.inner(&other.rep)?;
        let p = ip.norm_sqr().clamp(0.0, 1.0);
        if p <= 0.5 {
            return Ok((2.0 * p - 1.0).clamp(-1.0, 1.0).acos());
        }
        let phase = ip / Complex64::new(ip.norm(), 0.0);
        let delta = (&self.rep.v * phase - &other.rep.v).norm();
        Ok(4.0 * (delta / 2.0).clamp(0.0, 1.0).asin())
    }
}

/// A tangent vector at a base ray: a vector orthogonal to the canonical
/// representative. Its Euclidean norm is the metric norm, i.e. geodesic
/// speed in the distance above.
#[derive(Debug, Clone)]
pub struct TangentVector {
    base: Ray,
    w: StateVector,
}

impl TangentVector {
    /// Requires |<base rep, w>| within [`tol::GAUGE`].
    pub fn new(base: Ray, w: StateVector) -> Result<Self> {
        if base.dim() != w.dim() {
            return Err(Error::DimMismatch {
                left: base.dim(),
                right: w.dim(),
            });
        }
        let overlap = base.rep.inner(&w)?.norm();
        if overlap > tol::GAUGE {
            return Err(Error::NotTangent { deviation: overlap });
        }
        Ok(TangentVector { base, w })
    }

    /// Orthogonal projection of an arbitrary vector into the tangent space.
    pub fn project(base: Ray, v: &StateVector) -> Result<Self> {
        let c = base.rep.inner(v)?;
        let w = v.sub(&base.rep.scaled(c))?;
        // Re-project once; the residual after two passes is at rounding level.
        let c2 = base.rep.inner(&w)?;
        let w = w.sub(&base.rep.scaled(c2))?;
        TangentVector::new(base, w)
    }

    pub fn zero(base: Ray) -> Self {
        let dim = base.dim();
        TangentVector {
            base,
            w: StateVector::from_dvector(DVector::from_element(dim, Complex64::new(0.0, 0.0))),
        }
    }

    pub fn base(&self) -> &Ray {
        &self.base
    }

    /// The orthogonal component identifying this tangent vector.
    pub fn component(&self) -> &StateVector {
        &self.w
    }

    pub fn norm(&self) -> f64 {
        self.w.norm()
    }

    /// Complex rescaling; stays tangent at the same base.
    pub fn scaled(&self, lambda: Complex64) -> Self {
        TangentVector {
            base: self.base.clone(),
            w: self.w.scaled(lambda),
        }
    }

    /// The complex structure: multiplication by i.
    pub fn rotate_i(&self) -> Self {
        self.scaled(Complex64::new(0.0, 1.0))
    }

    pub fn add(&self, other: &TangentVector) -> Result<Self> {
        check_same_base(&[self, other])?;
        Ok(TangentVector {
            base: self.base.clone(),
            w: self.w.add(&other.w)?,
        })
    }

    pub fn sub(&self, other: &TangentVector) -> Result<Self> {
        check_same_base(&[self, other])?;
        Ok(TangentVector {
            base: self.base.clone(),
            w: self.w.sub(&other.w)?,
        })
    }
}

fn check_same_base(vectors: &[&TangentVector]) -> Result<()> {
    let first = &vectors[0].base;
    for v in &vectors[1..] {
        let dev = first.rep.max_abs_diff(&v.base.rep)?;
        if dev > tol::GAUGE {
            return Err(Error::BaseMismatch { deviation: dev });
        }
    }
    Ok(())
}

/// Hermitian metric pairing of two tangent vectors at the same base,
/// conjugate-linear in the first argument. Its real part is the Riemannian
/// metric used by [`curvature`].
pub fn fs_metric(f1: &TangentVector, f2: &TangentVector) -> Result<Complex64> {
    check_same_base(&[f1, f2])?;
    f1.w.inner(&f2.w)
}

/// Geodesic through the base of `xi` with initial speed `xi`.
///
/// Returns the ray of cos(t/2) l + sin(t/2) u where t = |xi| and u is the
/// unit direction; the distance from the base is exactly t for t < pi.
pub fn exp_map(xi: &TangentVector) -> Ray {
    let t = xi.norm();
    if t == 0.0 {
        return xi.base.clone();
    }
    let l = &xi.base.rep.v;
    let u = &xi.w.v / Complex64::new(t, 0.0);
    let v = l * Complex64::new((t / 2.0).cos(), 0.0) + u * Complex64::new((t / 2.0).sin(), 0.0);
    Ray::new(&StateVector::from_dvector(v)).expect("geodesic point has unit norm")
}

/// Inverse of [`exp_map`]: the tangent vector at `l` reaching `m`.
///
/// Undefined when the rays are orthogonal (antipodal, p at rounding level):
/// every direction works there, so the call reports the cut locus instead.
pub fn log_map(l: &Ray, m: &Ray) -> Result<TangentVector> {
    let p = l.transition_probability(m)?;
    if p <= tol::CUT_LOCUS {
        return Err(Error::CutLocus { p });
    }
    let d = (2.0 * p - 1.0).clamp(-1.0, 1.0).acos();
    let c = l.rep.inner(&m.rep)?;
    // Rescale m's representative so its component along l is real positive;
    // the remainder then points along the geodesic.
    let aligned = m.rep.scaled(c.conj() / Complex64::new(c.norm(), 0.0));
    let radial = l.rep.scaled(Complex64::new(c.norm(), 0.0));
    let w = aligned.sub(&radial)?;
    let n = w.norm();
    if n <= 1e-15 {
        return Ok(TangentVector::zero(l.clone()));
    }
    TangentVector::new(l.clone(), w.scaled(Complex64::new(d / n, 0.0)))
}

/// The ray of l + f, the graph chart centered at the base of `f`. Inverse
/// of [`graph_extract`]; related to [`exp_map`] by the radial substitution
/// t = 2 atan(|f|).
pub fn graph_ray(f: &TangentVector) -> Ray {
    let v = f.base.rep.add(&f.w).expect("same dimension");
    Ray::new(&v).expect("graph vector has norm at least one")
}

/// Graph coordinate of `m` in the chart centered at `l`: the unique
/// tangent vector f with m = [l + f]. Fails on the cut locus, where no
/// graph coordinate exists.
pub fn graph_extract(l: &Ray, m: &Ray) -> Result<TangentVector> {
    let p = l.transition_probability(m)?;
    if p <= tol::CUT_LOCUS {
        return Err(Error::CutLocus { p });
    }
    let c = l.rep.inner(&m.rep)?;
    let w = m.rep.sub(&l.rep.scaled(c))?;
    TangentVector::new(l.clone(), w.scaled(c.inv()))
}

/// Curvature tensor R(x, y)z at the common base of the three arguments.
///
/// With g the real part of [`fs_metric`] and I multiplication by i,
///   R(x,y)z = (1/4)[g(y,z)x - g(x,z)y + g(Iy,z)Ix - g(Ix,z)Iy - 2g(Ix,y)Iz].
/// This is the constant-holomorphic-sectional-curvature-one tensor: on the
/// two-dimensional state space it reduces to the unit round sphere.
pub fn curvature(x: &TangentVector, y: &TangentVector, z: &TangentVector) -> Result<TangentVector> {
    check_same_base(&[x, y, z])?;
    let i = Complex64::new(0.0, 1.0);
    let g = |a: &DVector<Complex64>, b: &DVector<Complex64>| a.dotc(b).re;
    let (xw, yw, zw) = (&x.w.v, &y.w.v, &z.w.v);
    let (ix, iy, iz) = (xw * i, yw * i, zw * i);
    let mut r = xw * Complex64::new(g(yw, zw), 0.0);
    r -= yw * Complex64::new(g(xw, zw), 0.0);
    r += &ix * Complex64::new(g(&iy, zw), 0.0);
    r -= &iy * Complex64::new(g(&ix, zw), 0.0);
    r -= &iz * Complex64::new(2.0 * g(&ix, yw), 0.0);
    r *= Complex64::new(0.25, 0.0);
    TangentVector::new(x.base.clone(), StateVector::from_dvector(r))
}

/// Independent check of [`curvature`]: the Riemann tensor assembled from
/// finite differences of the pulled-back metric in the graph chart.
///
/// The chart sends real coordinates to rays via [`graph_ray`]; its metric
/// is computed exactly at each stencil point from derivatives of the
/// normalized chart map, and Christoffel symbols and their derivatives come
/// from central differences with step `h`. Agreement with the closed form
/// is O(h^2). Steps outside [`tol::FD_STEP_RANGE`] are rejected.
pub fn curvature_fd_oracle(
    x: &TangentVector,
    y: &TangentVector,
    z: &TangentVector,
    h: f64,
) -> Result<TangentVector> {
    check_same_base(&[x, y, z])?;
    let (min, max) = tol::FD_STEP_RANGE;
    if !(h >= min && h <= max) {
        return Err(Error::StepOutOfRange { step: h, min, max });
    }
    let base = x.base.clone();
    let n = base.dim();
    if n == 1 {
        return Ok(TangentVector::zero(base));
    }
    let m = 2 * (n - 1);
    let basis = perp_basis(&base);
    let chart = GraphChart {
        l: base.rep.v.clone(),
        basis,
    };

    // Christoffel symbols on the stencil, then their central differences.
    let gamma0 = chart.christoffel(&vec![0.0; m], h)?;
    let mut dgamma = vec![vec![vec![vec![0.0; m]; m]; m]; m]; // [i][l][j][k]
    for i in 0..m {
        let mut fwd = vec![0.0; m];
        fwd[i] = h;
        let mut bwd = vec![0.0; m];
        bwd[i] = -h;
        let gf = chart.christoffel(&fwd, h)?;
        let gb = chart.christoffel(&bwd, h)?;
        for l in 0..m {
            for j in 0..m {
                for k in 0..m {
                    dgamma[i][l][j][k] = (gf[l][j][k] - gb[l][j][k]) / (2.0 * h);
                }
            }
        }
    }

    // R^l_{kij} = d_i G^l_{jk} - d_j G^l_{ik} + G^l_{ia} G^a_{jk} - G^l_{ja} G^a_{ik}
    let xc = chart.coords(&x.w.v);
    let yc = chart.coords(&y.w.v);
    let zc = chart.coords(&z.w.v);
    let mut out = vec![0.0; m];
    for l in 0..m {
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let rljik = dgamma[i][l][j][k] - dgamma[j][l][i][k]
                        + (0..m)
                            .map(|a| {
                                gamma0[l][i][a] * gamma0[a][j][k]
                                    - gamma0[l][j][a] * gamma0[a][i][k]
                            })
                            .sum::<f64>();
                    acc += rljik * xc[i] * yc[j] * zc[k];
                }
            }
        }
        out[l] = acc;
    }
    // Coordinate velocities are half the tangent components and outputs are
    // doubled back, so the (1,3) tensor picks up a net factor 1/4.
    let w = chart.vector(&out) * Complex64::new(0.25, 0.0);
    TangentVector::new(base, StateVector::from_dvector(w))
}

/// Orthonormal basis of the orthogonal complement of a ray: the trailing
/// columns of the Householder reflection exchanging e_0 with a phase-aligned
/// representative.
fn perp_basis(l: &Ray) -> Vec<DVector<Complex64>> {
    let n = l.dim();
    let e0 = DVector::from_fn(n, |r, _| {
        if r == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let first = l.rep.v[0];
    let aligned = if first.norm() > tol::GAUGE {
        &l.rep.v * (first.conj() / Complex64::new(first.norm(), 0.0))
    } else {
        l.rep.v.clone()
    };
    let v = &aligned - &e0;
    let vv = v.dotc(&v).re;
    let house = |x: &DVector<Complex64>| {
        if vv <= tol::GAUGE {
            x.clone()
        } else {
            x - &v * (v.dotc(x) * Complex64::new(2.0 / vv, 0.0))
        }
    };
    (1..n)
        .map(|k| {
            let ek = DVector::from_fn(n, |r, _| {
                if r == k {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            house(&ek)
        })
        .collect()
}

/// The graph chart around a ray together with its exact pullback metric.
struct GraphChart {
    l: DVector<Complex64>,
    basis: Vec<DVector<Complex64>>,
}

impl GraphChart {
    fn dim(&self) -> usize {
        2 * self.basis.len()
    }

    /// Real coordinates of a vector in the complement of the base.
    fn coords(&self, w: &DVector<Complex64>) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        for (k, b) in self.basis.iter().enumerate() {
            let ip = b.dotc(w);
            c[2 * k] = ip.re;
            c[2 * k + 1] = ip.im;
        }
        c
    }

    fn vector(&self, c: &[f64]) -> DVector<Complex64> {
        let mut v = DVector::from_element(self.l.len(), Complex64::new(0.0, 0.0));
        for (k, b) in self.basis.iter().enumerate() {
            v += b * Complex64::new(c[2 * k], c[2 * k + 1]);
        }
        v
    }

    /// Coordinate tangent direction i as a constant vector of C^n.
    fn direction(&self, i: usize) -> DVector<Complex64> {
        let b = &self.basis[i / 2];
        if i.is_multiple_of(2) {
            b.clone()
        } else {
            b * Complex64::new(0.0, 1.0)
        }
    }

    /// Pullback metric at coordinate point `w`, computed exactly: project
    /// the derivative of the normalized chart map onto the complement of
    /// the image representative. The overall scale drops out of the
    /// Christoffel symbols, so no normalization factor appears here.
    fn metric(&self, w: &[f64]) -> DMatrix<f64> {
        let m = self.dim();
        let v = &self.l + self.vector(w);
        let norm = v.norm();
        let psi = &v / Complex64::new(norm, 0.0);
        let tangents: Vec<DVector<Complex64>> = (0..m)
            .map(|i| {
                let dv = self.direction(i);
                let radial = v.dotc(&dv).re / (norm * norm * norm);
                let dpsi = &dv / Complex64::new(norm, 0.0) - &v * Complex64::new(radial, 0.0);
                &dpsi - &psi * psi.dotc(&dpsi)
            })
            .collect();
        DMatrix::from_fn(m, m, |i, j| tangents[i].dotc(&tangents[j]).re)
    }

    /// Christoffel symbols at `w`; metric derivatives by central
    /// differences with step `h`. Indexed [l][i][j] for G^l_{ij}.
    fn christoffel(&self, w: &[f64], h: f64) -> Result<Vec<Vec<Vec<f64>>>> {
        let m = self.dim();
        let g = self.metric(w);
        let ginv = g.clone().try_inverse().ok_or_else(|| {
            Error::Invalid("pullback metric is singular at a stencil point".into())
        })?;
        let mut dg = vec![DMatrix::zeros(m, m); m];
        for l in 0..m {
            let mut fwd = w.to_vec();
            fwd[l] += h;
            let mut bwd = w.to_vec();
            bwd[l] -= h;
            dg[l] = (self.metric(&fwd) - self.metric(&bwd)) / (2.0 * h);
        }
        let mut gamma = vec![vec![vec![0.0; m]; m]; m];
        for l in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let mut s = 0.0;
                    for a in 0..m {
                        s += ginv[(l, a)] * (dg[i][(j, a)] + dg[j][(i, a)] - dg[a][(i, j)]);
                    }
                    gamma[l][i][j] = 0.5 * s;
                }
            }
        }
        Ok(gamma)
    }
}

/// A point of the unit sphere in R x C: the image of a two-dimensional
/// state space under the chart of [`bloch_point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochPoint {
    pub x: f64,
    pub z: Complex64,
}

impl BlochPoint {
    /// Euclidean pairing x1 x2 + Re(conj(z1) z2); equals cos of the
    /// distance between the underlying rays.
    pub fn pairing(&self, other: &BlochPoint) -> f64 {
        self.x * other.x + (self.z.conj() * other.z).re
    }

    /// Deviation of x^2 + |z|^2 from 1.
    pub fn sphere_residual(&self) -> f64 {
        (self.x * self.x + self.z.norm_sqr() - 1.0).abs()
    }
}

/// Chart identifying the rays inside span{e1, e2} with the unit sphere in
/// R x C: [e1 + mu e2] maps to ((|mu|^2 - 1)/(|mu|^2 + 1), 2 mu/(|mu|^2 + 1)),
/// so [e1] sits at (-1, 0) and [e2] at (1, 0). The frame must be
/// orthonormal and the ray must lie in its span.
pub fn bloch_point(e1: &StateVector, e2: &StateVector, l: &Ray) -> Result<BlochPoint> {
    if e1.dim() != e2.dim() {
        return Err(Error::DimMismatch {
            left: e1.dim(),
            right: e2.dim(),
        });
    }
    let frame_dev = (e1.norm() - 1.0)
        .abs()
        .max((e2.norm() - 1.0).abs())
        .max(e1.inner(e2)?.norm());
    if frame_dev > tol::GAUGE {
        return Err(Error::NonOrthonormalFrame {
            deviation: frame_dev,
        });
    }
    let a = e1.inner(l.rep())?;
    let b = e2.inner(l.rep())?;
    let residual = l.rep().sub(&e1.scaled(a))?.sub(&e2.scaled(b))?.norm();
    if residual > tol::GAUGE {
        return Err(Error::NotInSpan { residual });
    }
    if a.norm() <= tol::GAUGE {
        return Ok(BlochPoint {
            x: 1.0,
            z: Complex64::new(0.0, 0.0),
        });
    }
    let mu = b / a;
    let m2 = mu.norm_sqr();
    Ok(BlochPoint {
        x: (m2 - 1.0) / (m2 + 1.0),
        z: mu * (2.0 / (m2 + 1.0)),
    })
}

/// Inverse of [`bloch_point`]: the ray in span{e1, e2} over a sphere point.
pub fn ray_from_bloch(e1: &StateVector, e2: &StateVector, p: &BlochPoint) -> Result<Ray> {
    if 1.0 - p.x <= tol::GAUGE {
        return Ray::new(e2);
    }
    let mu = p.z / Complex64::new(1.0 - p.x, 0.0);
    Ray::new(&e1.add(&e2.scaled(mu))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sv(entries: &[Complex64]) -> StateVector {
        StateVector::new(entries.to_vec()).unwrap()
    }

    fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> StateVector {
        let v = DVector::from_fn(dim, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        });
        StateVector::from_dvector(v)
    }

    fn random_ray(dim: usize, rng: &mut ChaCha8Rng) -> Ray {
        loop {
            if let Ok(r) = Ray::new(&random_vector(dim, rng)) {
                return r;
            }
        }
    }

    fn random_tangent(base: &Ray, rng: &mut ChaCha8Rng) -> TangentVector {
        TangentVector::project(base.clone(), &random_vector(base.dim(), rng)).unwrap()
    }

    #[test]
    fn canonical_representative_divides_out_the_global_phase() {
        // (i, i)/norm: the canonical representative is (1, 1)/sqrt(2).
        let r = Ray::new(&sv(&[c(0.0, 1.0), c(0.0, 1.0)])).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert!(r.rep().max_abs_diff(&sv(&[c(s, 0.0), c(s, 0.0)])).unwrap() < 1e-15);

        // Brute force over the gauge circle: among all unit-phase
        // representatives, the canonical one is the unique (up to rounding)
        // phase whose largest-modulus entry is real and nonnegative, and it
        // maximizes the real part of that entry.
        let v = sv(&[c(0.3, -0.4), c(-0.1, 0.7), c(0.2, 0.2)]);
        let canon = Ray::new(&v).unwrap();
        let unit = v.scaled(c(1.0 / v.norm(), 0.0));
        let mut best_re = f64::NEG_INFINITY;
        let mut best = None;
        for k in 0..1000 {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / 1000.0;
            let cand = unit.scaled(c(theta.cos(), theta.sin()));
            let pivot_re = cand.entries()[1].re; // index of largest modulus
            if pivot_re > best_re {
                best_re = pivot_re;
                best = Some(cand);
            }
        }
        assert!(canon.rep().max_abs_diff(&best.unwrap()).unwrap() < 1e-2);
        assert!(canon.rep().entries()[1].im.abs() < 1e-15);
        assert!(canon.rep().entries()[1].re > 0.0);
    }

    #[test]
    fn canonical_representative_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let v = random_vector(5, &mut rng);
            let lambda = c(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            );
            if lambda.norm() < 1e-3 {
                continue;
            }
            let r1 = Ray::new(&v).unwrap();
            let r2 = Ray::new(&v.scaled(lambda)).unwrap();
            assert!(r1.approx_eq(&r2, 1e-12));
        }
    }

    #[test]
    fn zero_vector_is_rejected() {
        let v = sv(&[c(0.0, 0.0), c(1e-13, 0.0)]);
        assert!(matches!(Ray::new(&v), Err(Error::ZeroVector { .. })));
    }

    #[test]
    fn transition_probability_matches_hand_values() {
        let e1 = Ray::basis(2, 0).unwrap();
        let e2 = Ray::basis(2, 1).unwrap();
        let plus = Ray::new(&sv(&[c(1.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert_eq!(e1.transition_probability(&e1).unwrap(), 1.0);
        assert_eq!(e1.transition_probability(&e2).unwrap(), 0.0);
        assert!((e1.transition_probability(&plus).unwrap() - 0.5).abs() < 1e-15);
        assert!((e1.fs_distance(&e2).unwrap() - std::f64::consts::PI).abs() < 1e-15);
        assert!((e1.fs_distance(&plus).unwrap() - std::f64::consts::PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn distance_identity_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for dim in 2..=6 {
            for _ in 0..200 {
                let r1 = random_ray(dim, &mut rng);
                let r2 = random_ray(dim, &mut rng);
                let p = r1.transition_probability(&r2).unwrap();
                let d = r1.fs_distance(&r2).unwrap();
                assert!((d.cos() - (2.0 * p - 1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exp_map_reaches_the_equal_superposition() {
        // From [e1], walking distance pi/2 toward e2 lands on [(e1+e2)/sqrt2].
        // Cross-checked by sampling the curve: distances from the base grow
        // linearly and the midpoint is equidistant from both ends.
        let base = Ray::basis(4, 0).unwrap();
        let w = StateVector::basis(4, 1)
            .unwrap()
            .scaled(c(std::f64::consts::PI / 2.0, 0.0));
        let xi = TangentVector::new(base.clone(), w).unwrap();
        let target = Ray::new(&sv(&[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])).unwrap();
        let reached = exp_map(&xi);
        assert!(reached.approx_eq(&target, 1e-12));
        assert!((base.fs_distance(&reached).unwrap() - std::f64::consts::PI / 2.0).abs() < 1e-12);

        for k in 0..=10 {
            let s = k as f64 / 10.0;
            let point = exp_map(&xi.scaled(c(s, 0.0)));
            let d = base.fs_distance(&point).unwrap();
            assert!((d - s * std::f64::consts::PI / 2.0).abs() < 1e-12);
        }
        let mid = exp_map(&xi.scaled(c(0.5, 0.0)));
        let d1 = base.fs_distance(&mid).unwrap();
        let d2 = mid.fs_distance(&reached).unwrap();
        assert!((d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn exp_log_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in 2..=6 {
            for _ in 0..100 {
                let base = random_ray(dim, &mut rng);
                let m = random_ray(dim, &mut rng);
                let p = base.transition_probability(&m).unwrap();
                if p <= tol::CUT_LOCUS {
                    continue;
                }
                let xi = log_map(&base, &m).unwrap();
                assert!((xi.norm() - base.fs_distance(&m).unwrap()).abs() < 1e-12);
                assert!(exp_map(&xi).approx_eq(&m, 1e-10));

                // And the other way: log(exp(xi)) = xi for |xi| < pi.
                let eta = random_tangent(&base, &mut rng);
                let speed = eta.norm();
                if speed < 1e-6 {
                    continue;
                }
                let eta = eta.scaled(c(2.5 / speed, 0.0)); // inside the cut radius
                let back = log_map(&base, &exp_map(&eta)).unwrap();
                assert!(back.sub(&eta).unwrap().norm() < 1e-9);
            }
        }
    }

    #[test]
    fn log_map_rejects_the_cut_locus() {
        let e1 = Ray::basis(3, 0).unwrap();
        let e2 = Ray::basis(3, 1).unwrap();
        assert!(matches!(log_map(&e1, &e2), Err(Error::CutLocus { .. })));
    }

    #[test]
    fn graph_chart_round_trip_and_radial_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for dim in 2..=5 {
            for _ in 0..100 {
                let base = random_ray(dim, &mut rng);
                let f = random_tangent(&base, &mut rng);
                let m = graph_ray(&f);
                let back = graph_extract(&base, &m).unwrap();
                assert!(back.sub(&f).unwrap().norm() < 1e-10 * (1.0 + f.norm()));
                // Distance of the graph point: 2 atan |f|.
                let d = base.fs_distance(&m).unwrap();
                assert!((d - 2.0 * f.norm().atan()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn graph_and_exp_are_the_same_rays_after_radial_substitution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let base = random_ray(4, &mut rng);
            let f = random_tangent(&base, &mut rng);
            let r = f.norm();
            if r < 1e-9 {
                continue;
            }
            let xi = f.scaled(c(2.0 * r.atan() / r, 0.0));
            assert!(graph_ray(&f).approx_eq(&exp_map(&xi), 1e-12));
        }
    }

    #[test]
    fn metric_pairing_matches_components() {
        let base = Ray::basis(3, 0).unwrap();
        let f1 =
            TangentVector::new(base.clone(), sv(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 2.0)])).unwrap();
        let f2 =
            TangentVector::new(base.clone(), sv(&[c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)])).unwrap();
        let ip = fs_metric(&f1, &f2).unwrap();
        // conj(1)*i + conj(2i)*1 = i - 2i = -i
        assert!((ip - c(0.0, -1.0)).norm() < 1e-15);
        let other = Ray::basis(3, 1).unwrap();
        let f3 = TangentVector::new(other, sv(&[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert!(matches!(
            fs_metric(&f1, &f3),
            Err(Error::BaseMismatch { .. })
        ));
    }

    #[test]
    fn tangent_orthogonality_is_enforced() {
        let base = Ray::basis(2, 0).unwrap();
        let bad = sv(&[c(0.5, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            TangentVector::new(base.clone(), bad.clone()),
            Err(Error::NotTangent { .. })
        ));
        let fixed = TangentVector::project(base, &bad).unwrap();
        assert!(fixed.component().entries()[0].norm() < 1e-15);
    }

    #[test]
    fn curvature_reproduces_the_two_closed_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for dim in 2..=6 {
            for _ in 0..50 {
                let base = random_ray(dim, &mut rng);
                let xi = random_tangent(&base, &mut rng);
                if xi.norm() < 1e-6 {
                    continue;
                }
                let ixi = xi.rotate_i();
                // R(xi, I xi) xi = -|xi|^2 I xi
                let r = curvature(&xi, &ixi, &xi).unwrap();
                let expected = ixi.scaled(c(-xi.norm() * xi.norm(), 0.0));
                assert!(r.sub(&expected).unwrap().norm() < 1e-12 * (1.0 + xi.norm().powi(3)));
                if dim >= 3 {
                    // R(xi, I xi) eta = -(1/2)|xi|^2 I eta for eta complex-
                    // orthogonal to xi.
                    let eta = random_tangent(&base, &mut rng);
                    let overlap = xi.component().inner(eta.component()).unwrap()
                        / c(xi.norm() * xi.norm(), 0.0);
                    let eta = TangentVector::new(
                        base.clone(),
                        eta.component()
                            .sub(&xi.component().scaled(overlap))
                            .unwrap(),
                    )
                    .unwrap();
                    let r2 = curvature(&xi, &ixi, &eta).unwrap();
                    let expected2 = eta.rotate_i().scaled(c(-0.5 * xi.norm() * xi.norm(), 0.0));
                    assert!(
                        r2.sub(&expected2).unwrap().norm()
                            < 1e-12 * (1.0 + xi.norm().powi(2) * eta.norm())
                    );
                }
            }
        }
    }

    #[test]
    fn curvature_is_antisymmetric_and_satisfies_bianchi() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let base = random_ray(5, &mut rng);
            let x = random_tangent(&base, &mut rng);
            let y = random_tangent(&base, &mut rng);
            let z = random_tangent(&base, &mut rng);
            let rxy = curvature(&x, &y, &z).unwrap();
            let ryx = curvature(&y, &x, &z).unwrap();
            assert!(rxy.add(&ryx).unwrap().norm() < 1e-12 * (1.0 + rxy.norm()));
            let cyclic = curvature(&x, &y, &z)
                .unwrap()
                .add(&curvature(&y, &z, &x).unwrap())
                .unwrap()
                .add(&curvature(&z, &x, &y).unwrap())
                .unwrap();
            assert!(cyclic.norm() < 1e-12 * (1.0 + rxy.norm()));
        }
    }

    #[test]
    fn finite_difference_oracle_matches_the_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for dim in [2usize, 3, 4] {
            for _ in 0..8 {
                let base = random_ray(dim, &mut rng);
                let x = random_tangent(&base, &mut rng);
                let y = random_tangent(&base, &mut rng);
                let z = random_tangent(&base, &mut rng);
                let closed = curvature(&x, &y, &z).unwrap();
                let fd = curvature_fd_oracle(&x, &y, &z, tol::FD_STEP).unwrap();
                let scale = 1.0 + x.norm() * y.norm() * z.norm();
                assert!(
                    closed.sub(&fd).unwrap().norm() < tol::FD_MATCH * scale,
                    "dim {dim}: |closed - fd| = {:.3e}",
                    closed.sub(&fd).unwrap().norm()
                );
            }
        }
    }

    #[test]
    fn oracle_vanishes_on_repeated_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let base = random_ray(3, &mut rng);
        let x = random_tangent(&base, &mut rng);
        let z = random_tangent(&base, &mut rng);
        let r = curvature_fd_oracle(&x, &x, &z, tol::FD_STEP).unwrap();
        assert!(r.norm() < 1e-6);
    }

    #[test]
    fn oracle_rejects_out_of_range_steps() {
        let base = Ray::basis(2, 0).unwrap();
        let xi = TangentVector::new(base, sv(&[c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert!(matches!(
            curvature_fd_oracle(&xi, &xi, &xi, 1e-6),
            Err(Error::StepOutOfRange { .. })
        ));
        assert!(matches!(
            curvature_fd_oracle(&xi, &xi, &xi, 0.5),
            Err(Error::StepOutOfRange { .. })
        ));
    }

    #[test]
    fn bloch_chart_sends_the_frame_to_the_poles_and_diagonal_to_the_equator() {
        let e1 = StateVector::basis(2, 0).unwrap();
        let e2 = StateVector::basis(2, 1).unwrap();
        let p1 = bloch_point(&e1, &e2, &Ray::basis(2, 0).unwrap()).unwrap();
        assert!((p1.x + 1.0).abs() < 1e-15 && p1.z.norm() < 1e-15);
        let p2 = bloch_point(&e1, &e2, &Ray::basis(2, 1).unwrap()).unwrap();
        assert!((p2.x - 1.0).abs() < 1e-15 && p2.z.norm() < 1e-15);
        let plus = Ray::new(&sv(&[c(1.0, 0.0), c(1.0, 0.0)])).unwrap();
        let p3 = bloch_point(&e1, &e2, &plus).unwrap();
        assert!(p3.x.abs() < 1e-15 && (p3.z - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn bloch_chart_rejects_bad_inputs() {
        let e1 = StateVector::basis(3, 0).unwrap();
        let e2 = StateVector::basis(3, 1).unwrap();
        let skew = sv(&[c(1.0, 0.0), c(0.1, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            bloch_point(&e1, &skew, &Ray::basis(3, 0).unwrap()),
            Err(Error::NonOrthonormalFrame { .. })
        ));
        assert!(matches!(
            bloch_point(&e1, &e2, &Ray::basis(3, 2).unwrap()),
            Err(Error::NotInSpan { .. })
        ));
    }

    #[test]
    fn bloch_pairing_equals_cos_distance_and_chart_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let dim = 4;
        for _ in 0..200 {
            // Random orthonormal frame from two Gaussians.
            let f1 = {
                let v = random_vector(dim, &mut rng);
                v.scaled(c(1.0 / v.norm(), 0.0))
            };
            let f2 = {
                let v = random_vector(dim, &mut rng);
                let overlap = f1.inner(&v).unwrap();
                let w = v.sub(&f1.scaled(overlap)).unwrap();
                let w = {
                    let o2 = f1.inner(&w).unwrap();
                    w.sub(&f1.scaled(o2)).unwrap()
                };
                w.scaled(c(1.0 / w.norm(), 0.0))
            };
            let mk = |rng: &mut ChaCha8Rng| {
                let a = c(StandardNormal.sample(rng), StandardNormal.sample(rng));
                let b = c(StandardNormal.sample(rng), StandardNormal.sample(rng));
                Ray::new(&f1.scaled(a).add(&f2.scaled(b)).unwrap()).unwrap()
            };
            let l1 = mk(&mut rng);
            let l2 = mk(&mut rng);
            let b1 = bloch_point(&f1, &f2, &l1).unwrap();
            let b2 = bloch_point(&f1, &f2, &l2).unwrap();
            assert!(b1.sphere_residual() < 1e-12);
            let cosd = l1.fs_distance(&l2).unwrap().cos();
            assert!((b1.pairing(&b2) - cosd).abs() < 1e-10);
            let back = ray_from_bloch(&f1, &f2, &b1).unwrap();
            assert!(back.approx_eq(&l1, 1e-9));
        }
    }

    #[test]
    fn restriction_to_a_two_dimensional_subspace_preserves_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100 {
            let a1 = c(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            );
            let b1 = c(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            );
            let a2 = c(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            );
            let b2 = c(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            );
            // Same coordinates in C^6 (in the first two slots) and in C^2.
            let big1 = Ray::new(&sv(&[
                a1,
                b1,
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
            ]));
            let big2 = Ray::new(&sv(&[
                a2,
                b2,
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
            ]));
            let small1 = Ray::new(&sv(&[a1, b1]));
            let small2 = Ray::new(&sv(&[a2, b2]));
            let (big1, big2, small1, small2) = match (big1, big2, small1, small2) {
                (Ok(a), Ok(b), Ok(x), Ok(y)) => (a, b, x, y),
                _ => continue,
            };
            let d_big = big1.fs_distance(&big2).unwrap();
            let d_small = small1.fs_distance(&small2).unwrap();
            assert!((d_big - d_small).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_one_is_a_point() {
        let l = Ray::basis(1, 0).unwrap();
        let m = Ray::new(&sv(&[c(0.0, -3.0)])).unwrap();
        assert!(l.approx_eq(&m, 1e-15));
        assert_eq!(l.fs_distance(&m).unwrap(), 0.0);
        let zero = TangentVector::zero(l.clone());
        assert!(exp_map(&zero).approx_eq(&l, 1e-15));
        assert_eq!(log_map(&l, &m).unwrap().norm(), 0.0);
    }
}
