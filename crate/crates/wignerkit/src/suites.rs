//! Seeded bulk sweeps over the geometry and the reconstruction pipeline.
//!
//! Each sweep derives an independent random stream per sample index, so its
//! result is a pure function of the arguments: identical whether the loop
//! runs threaded or on one core, and identical across runs. The `_sequential`
//! twins force single-threaded execution even when the `parallel` feature is
//! active, so benchmarks can compare the two paths in one build.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::TAU;

use crate::error::{Error, RejectStage, Result};
use crate::exec;
use crate::state_space::{
    bloch_point, curvature, curvature_fd_oracle, exp_map, fs_metric, log_map, ray_from_bloch,
    BlochPoint, Ray, StateVector, TangentVector,
};
use crate::symmetry::{
    equal_up_to_phase, haar_unitary, random_ray, random_state_vector, random_symmetry,
    scalar_kernel_check, Grading, SymmetryOp,
};
use crate::tol;
use crate::wigner::{make_probe_table, wigner_lift, ProbeTable};

/// Independent random stream for sample `index` of a sweep seeded by `seed`.
///
/// Streams of a counter-based generator do not overlap, so per-index streams
/// stay deterministic no matter how samples are scheduled across threads.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Random nonzero complex scale with log-uniform magnitude in
/// [10^-3, 10^3] and uniform phase; exercises inputs far from unit norm.
fn random_scale(rng: &mut ChaCha8Rng) -> Complex64 {
    let mag = 10f64.powf(rng.gen_range(-3.0..3.0));
    let theta = rng.gen_range(0.0..TAU);
    Complex64::from_polar(mag, theta)
}

fn random_unit_tangent(base: &Ray, rng: &mut ChaCha8Rng) -> TangentVector {
    loop {
        let t = TangentVector::project(base.clone(), &random_state_vector(base.dim(), rng))
            .expect("dimensions agree by construction");
        let n = t.norm();
        if n > 1e-3 {
            return t.scaled(Complex64::new(1.0 / n, 0.0));
        }
    }
}

/// Random orthonormal pair spanning a two-dimensional subspace.
fn random_orthonormal_pair(dim: usize, rng: &mut ChaCha8Rng) -> (StateVector, StateVector) {
    loop {
        let v1 = random_state_vector(dim, rng);
        let n1 = v1.norm();
        if n1 < 1e-3 {
            continue;
        }
        let e1 = v1.scaled(Complex64::new(1.0 / n1, 0.0));
        let v2 = random_state_vector(dim, rng);
        let overlap = e1.inner(&v2).expect("dimensions agree");
        let w = v2.sub(&e1.scaled(overlap)).expect("dimensions agree");
        let n2 = w.norm();
        if n2 < 1e-3 {
            continue;
        }
        let e2 = w.scaled(Complex64::new(1.0 / n2, 0.0));
        return (e1, e2);
    }
}

// ---------------------------------------------------------------------------
// Distance/probability compatibility.
// ---------------------------------------------------------------------------

fn distance_probability_sample(dim: usize, seed: u64, index: usize) -> f64 {
    let mut rng = stream_rng(seed, index as u64);
    let (l1, l2) = if dim >= 2 && index % 8 == 7 {
        // Forced orthogonal pair: distance pi, probability zero — the
        // diameter case a generic sample essentially never hits.
        let u = haar_unitary(dim, &mut rng);
        let c1 = Ray::new(&StateVector::from_dvector(u.column(0).into_owned()))
            .expect("unitary columns are unit vectors");
        let c2 = Ray::new(&StateVector::from_dvector(u.column(1).into_owned()))
            .expect("unitary columns are unit vectors");
        (c1, c2)
    } else {
        (random_ray(dim, &mut rng), random_ray(dim, &mut rng))
    };
    let p = l1
        .transition_probability(&l2)
        .expect("dimensions agree by construction");
    let d = l1
        .fs_distance(&l2)
        .expect("dimensions agree by construction");
    (d.cos() - (2.0 * p - 1.0)).abs()
}

fn distance_probability_impl(
    dim: usize,
    samples: usize,
    seed: u64,
    sequential: bool,
) -> Result<f64> {
    if dim < 2 {
        return Err(Error::DimTooSmall { dim, min: 2 });
    }
    let f = |i: usize| distance_probability_sample(dim, seed, i);
    Ok(exec::max_of(if sequential {
        exec::map_indexed_sequential(samples, f)
    } else {
        exec::map_indexed(samples, f)
    }))
}

/// Worst deviation of cos(distance) from 2p - 1 over `samples` seeded random
/// ray pairs in dimension `dim`; every eighth pair is forced orthogonal.
pub fn distance_probability_sweep(dim: usize, samples: usize, seed: u64) -> Result<f64> {
    distance_probability_impl(dim, samples, seed, false)
}

/// Single-threaded twin of [`distance_probability_sweep`].
pub fn distance_probability_sweep_sequential(dim: usize, samples: usize, seed: u64) -> Result<f64> {
    distance_probability_impl(dim, samples, seed, true)
}

// ---------------------------------------------------------------------------
// Sphere-chart cross-checks.
// ---------------------------------------------------------------------------

fn bloch_pairing_sample(dim: usize, seed: u64, index: usize) -> f64 {
    let mut rng = stream_rng(seed, index as u64);
    let (e1, e2) = random_orthonormal_pair(dim, &mut rng);
    let ray_in_span = |rng: &mut ChaCha8Rng| loop {
        let v = e1
            .scaled(gaussian_complex(rng))
            .add(&e2.scaled(gaussian_complex(rng)))
            .expect("dimensions agree");
        if let Ok(r) = Ray::new(&v) {
            return r;
        }
    };
    let l1 = ray_in_span(&mut rng);
    let l2 = ray_in_span(&mut rng);
    let b1 = bloch_point(&e1, &e2, &l1).expect("ray lies in the span");
    let b2 = bloch_point(&e1, &e2, &l2).expect("ray lies in the span");
    let cos_d = l1.fs_distance(&l2).expect("dimensions agree").cos();
    (b1.pairing(&b2) - cos_d)
        .abs()
        .max(b1.sphere_residual())
        .max(b2.sphere_residual())
}

/// Worst deviation between the Euclidean sphere pairing of chart images and
/// cos(distance), over random ray pairs inside random two-dimensional
/// subspaces of dimension `dim`; includes the chart's sphere residual.
pub fn bloch_pairing_sweep(dim: usize, samples: usize, seed: u64) -> Result<f64> {
    if dim < 2 {
        return Err(Error::DimTooSmall { dim, min: 2 });
    }
    Ok(exec::max_of(exec::map_indexed(samples, |i| {
        bloch_pairing_sample(dim, seed, i)
    })))
}

fn lambda_formula_sample(seed: u64, index: usize) -> f64 {
    let mut rng = stream_rng(seed, index as u64);
    let lambda = random_scale(&mut rng);
    let e1 = StateVector::basis(2, 0).expect("valid index");
    let e2 = StateVector::basis(2, 1).expect("valid index");
    let l1 = Ray::new(&e1).expect("unit vector");
    let l2 =
        Ray::new(&e1.scaled(lambda).add(&e2).expect("dimensions agree")).expect("nonzero vector");
    let m2 = lambda.norm_sqr();
    let p_closed = m2 / (m2 + 1.0);
    let cos_closed = (m2 - 1.0) / (m2 + 1.0);
    let p = l1.transition_probability(&l2).expect("dimensions agree");
    let cos_d = l1.fs_distance(&l2).expect("dimensions agree").cos();
    (p - p_closed).abs().max((cos_d - cos_closed).abs())
}

/// Worst deviation of measured probability and cos(distance) from their
/// closed forms p = |lambda|^2/(|lambda|^2+1) and
/// cos d = (|lambda|^2-1)/(|lambda|^2+1) for the pair [e1], [lambda e1 + e2].
pub fn lambda_formula_sweep(samples: usize, seed: u64) -> f64 {
    exec::max_of(exec::map_indexed(samples, |i| {
        lambda_formula_sample(seed, i)
    }))
}

// ---------------------------------------------------------------------------
// Curvature sweeps.
// ---------------------------------------------------------------------------

/// Worst deviations from the two closed curvature identities over seeded
/// random frames.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureIdentitySummary {
    pub frames: usize,
    /// max over frames of ||R(xi, I xi)xi + |xi|^2 I xi||, unit xi.
    pub max_xi_deviation: f64,
    /// max over frames of ||R(xi, I xi)eta + (1/2)|xi|^2 I eta|| for unit
    /// eta complex-orthogonal to xi; absent when the dimension is two, where
    /// no such eta exists.
    pub max_eta_deviation: Option<f64>,
}

fn curvature_identity_sample(dim: usize, seed: u64, index: usize) -> (f64, f64) {
    let mut rng = stream_rng(seed, index as u64);
    let base = random_ray(dim, &mut rng);
    let xi = random_unit_tangent(&base, &mut rng);
    let ixi = xi.rotate_i();
    let r1 = curvature(&xi, &ixi, &xi).expect("shared base");
    let dev_xi = r1.add(&ixi).expect("shared base").norm();
    if dim < 3 {
        return (dev_xi, 0.0);
    }
    let eta = loop {
        let raw = random_unit_tangent(&base, &mut rng);
        let overlap = fs_metric(&xi, &raw).expect("shared base");
        let ortho = raw.sub(&xi.scaled(overlap)).expect("shared base");
        let n = ortho.norm();
        if n > 1e-3 {
            break ortho.scaled(Complex64::new(1.0 / n, 0.0));
        }
    };
    let r2 = curvature(&xi, &ixi, &eta).expect("shared base");
    let dev_eta = r2
        .add(&eta.rotate_i().scaled(Complex64::new(0.5, 0.0)))
        .expect("shared base")
        .norm();
    (dev_xi, dev_eta)
}

fn curvature_identity_impl(
    dim: usize,
    frames: usize,
    seed: u64,
    sequential: bool,
) -> Result<CurvatureIdentitySummary> {
    if dim < 2 {
        return Err(Error::DimTooSmall { dim, min: 2 });
    }
    let f = |i: usize| curvature_identity_sample(dim, seed, i);
    let devs = if sequential {
        exec::map_indexed_sequential(frames, f)
    } else {
        exec::map_indexed(frames, f)
    };
    let max_xi = devs.iter().fold(0.0f64, |m, d| m.max(d.0));
    let max_eta = devs.iter().fold(0.0f64, |m, d| m.max(d.1));
    Ok(CurvatureIdentitySummary {
        frames,
        max_xi_deviation: max_xi,
        max_eta_deviation: if dim >= 3 { Some(max_eta) } else { None },
    })
}

/// Checks the closed curvature identities on seeded random frames: with
/// unit xi, R(xi, I xi)xi = -I xi, and with unit eta complex-orthogonal to
/// xi, R(xi, I xi)eta = -(1/2) I eta.
pub fn curvature_identity_sweep(
    dim: usize,
    frames: usize,
    seed: u64,
) -> Result<CurvatureIdentitySummary> {
    curvature_identity_impl(dim, frames, seed, false)
}

/// Single-threaded twin of [`curvature_identity_sweep`].
pub fn curvature_identity_sweep_sequential(
    dim: usize,
    frames: usize,
    seed: u64,
) -> Result<CurvatureIdentitySummary> {
    curvature_identity_impl(dim, frames, seed, true)
}

/// Worst gap between the closed-form curvature tensor and the
/// finite-difference oracle over seeded random triples of unit tangents.
pub fn curvature_oracle_sweep(dim: usize, triples: usize, seed: u64, h: f64) -> Result<f64> {
    if dim < 2 {
        return Err(Error::DimTooSmall { dim, min: 2 });
    }
    let results = exec::map_indexed(triples, |i| -> Result<f64> {
        let mut rng = stream_rng(seed, i as u64);
        let base = random_ray(dim, &mut rng);
        let x = random_unit_tangent(&base, &mut rng);
        let y = random_unit_tangent(&base, &mut rng);
        let z = random_unit_tangent(&base, &mut rng);
        let closed = curvature(&x, &y, &z)?;
        let probed = curvature_fd_oracle(&x, &y, &z, h)?;
        Ok(closed.sub(&probed)?.norm())
    });
    let mut max = 0.0f64;
    for r in results {
        max = max.max(r?);
    }
    Ok(max)
}

// ---------------------------------------------------------------------------
// Reconstruction round trips.
// ---------------------------------------------------------------------------

/// Outcome of a batch of reconstruction round trips.
#[derive(Debug, Clone, Copy)]
pub struct RoundTripSummary {
    pub attempts: usize,
    /// Samples where the lift was rejected, graded wrongly, or not equal to
    /// the original operator up to phase within the tolerance.
    pub failures: usize,
    /// Largest certification residual among accepted lifts.
    pub max_lift_residual: f64,
    /// Largest elementwise deviation |lift - lambda * original| over
    /// phase-matched samples.
    pub max_phase_deviation: f64,
}

/// Seed for sample `index`, spread by a fixed odd stride so derived seeds
/// never collide for a fixed base seed.
fn derived_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn phase_deviation(a: &SymmetryOp, b: &SymmetryOp, lambda: Complex64) -> f64 {
    let (ma, mb) = (a.matrix(), b.matrix());
    let mut dev = 0.0f64;
    for r in 0..a.dim() {
        for c in 0..a.dim() {
            dev = dev.max((ma[(r, c)] - lambda * mb[(r, c)]).norm());
        }
    }
    dev
}

/// (failed, lift residual, phase deviation) for one seeded operator.
fn round_trip_sample(
    dim: usize,
    grading: Grading,
    tolerance: f64,
    op_seed: u64,
) -> (bool, f64, f64) {
    let run = || -> Result<(bool, f64, f64)> {
        let s = random_symmetry(dim, grading, op_seed)?;
        let table = make_probe_table(&s)?;
        let report = wigner_lift(&table)?;
        let eq = equal_up_to_phase(report.lift(), &s, tolerance)?;
        let failed = !report.accepted() || report.grading() != grading || !eq.equal;
        let dev = match eq.phase {
            Some(lambda) => phase_deviation(report.lift(), &s, lambda),
            None => f64::INFINITY,
        };
        Ok((failed, report.residuals().max(), dev))
    };
    run().unwrap_or((true, f64::INFINITY, f64::INFINITY))
}

fn round_trip_impl(
    dims: &[usize],
    per_cell: usize,
    tolerance: f64,
    seed: u64,
    sequential: bool,
) -> RoundTripSummary {
    let gradings = [Grading::Unitary, Grading::Antiunitary];
    let total = dims.len() * gradings.len() * per_cell;
    let f = |i: usize| {
        let dim = dims[i % dims.len()];
        let grading = gradings[(i / dims.len()) % gradings.len()];
        round_trip_sample(dim, grading, tolerance, derived_seed(seed, i as u64))
    };
    let outcomes = if sequential {
        exec::map_indexed_sequential(total, f)
    } else {
        exec::map_indexed(total, f)
    };
    let mut summary = RoundTripSummary {
        attempts: total,
        failures: 0,
        max_lift_residual: 0.0,
        max_phase_deviation: 0.0,
    };
    for (failed, residual, dev) in outcomes {
        if failed {
            summary.failures += 1;
        } else {
            summary.max_lift_residual = summary.max_lift_residual.max(residual);
            summary.max_phase_deviation = summary.max_phase_deviation.max(dev);
        }
    }
    summary
}

/// Round-trips `per_cell` seeded operators through table construction and
/// reconstruction for every (dimension, grading) cell, comparing each lift
/// with its source up to a global phase within `tolerance`.
pub fn round_trip_sweep(
    dims: &[usize],
    per_cell: usize,
    tolerance: f64,
    seed: u64,
) -> RoundTripSummary {
    round_trip_impl(dims, per_cell, tolerance, seed, false)
}

/// Single-threaded twin of [`round_trip_sweep`].
pub fn round_trip_sweep_sequential(
    dims: &[usize],
    per_cell: usize,
    tolerance: f64,
    seed: u64,
) -> RoundTripSummary {
    round_trip_impl(dims, per_cell, tolerance, seed, true)
}

/// Outcome of the input-gauge robustness sweep.
#[derive(Debug, Clone, Copy)]
pub struct GaugeRobustnessSummary {
    pub attempts: usize,
    /// Samples where the lifts of the original and rescaled tables differ
    /// by more than a global phase within the tolerance.
    pub failures: usize,
    /// Largest elementwise deviation between phase-matched lift pairs.
    pub max_phase_deviation: f64,
}

fn rescaled_ray(r: &Ray, rng: &mut ChaCha8Rng) -> Ray {
    Ray::new(&r.rep().scaled(random_scale(rng))).expect("nonzero scale of a unit vector")
}

fn rescaled_table(t: &ProbeTable, rng: &mut ChaCha8Rng) -> ProbeTable {
    let base = rescaled_ray(t.image_base(), rng);
    let a = t.images_a().iter().map(|r| rescaled_ray(r, rng)).collect();
    let b = t.images_b().iter().map(|r| rescaled_ray(r, rng)).collect();
    let v = t
        .images_v()
        .map(|list| list.iter().map(|r| rescaled_ray(r, rng)).collect());
    ProbeTable::from_images(t.tolerance(), base, a, b, v).expect("shape preserved")
}

/// Reconstructs seeded operators from their tables and from copies whose
/// every image vector has been multiplied by a random nonzero complex
/// scale, requiring the two lifts to agree up to a global phase.
pub fn gauge_robustness_sweep(
    dims: &[usize],
    per_cell: usize,
    tolerance: f64,
    seed: u64,
) -> GaugeRobustnessSummary {
    let gradings = [Grading::Unitary, Grading::Antiunitary];
    let total = dims.len() * gradings.len() * per_cell;
    let outcomes = exec::map_indexed(total, |i| -> (bool, f64) {
        let dim = dims[i % dims.len()];
        let grading = gradings[(i / dims.len()) % gradings.len()];
        let op_seed = derived_seed(seed, i as u64);
        let run = || -> Result<(bool, f64)> {
            let s = random_symmetry(dim, grading, op_seed)?;
            let table = make_probe_table(&s)?;
            let mut rng = stream_rng(seed, i as u64);
            let scrambled = rescaled_table(&table, &mut rng);
            let lift1 = wigner_lift(&table)?;
            let lift2 = wigner_lift(&scrambled)?;
            let eq = equal_up_to_phase(lift1.lift(), lift2.lift(), tolerance)?;
            let dev = match eq.phase {
                Some(lambda) => phase_deviation(lift1.lift(), lift2.lift(), lambda),
                None => f64::INFINITY,
            };
            Ok((!eq.equal, dev))
        };
        run().unwrap_or((true, f64::INFINITY))
    });
    let mut summary = GaugeRobustnessSummary {
        attempts: total,
        failures: 0,
        max_phase_deviation: 0.0,
    };
    for (failed, dev) in outcomes {
        if failed {
            summary.failures += 1;
        } else {
            summary.max_phase_deviation = summary.max_phase_deviation.max(dev);
        }
    }
    summary
}

// ---------------------------------------------------------------------------
// Scalar-kernel exactness.
// ---------------------------------------------------------------------------

/// Outcome of the scalar-kernel exactness sweep.
#[derive(Debug, Clone, Copy)]
pub struct KernelSummary {
    pub scalar_cases: usize,
    /// Unit scalars wrongly reported as moving some ray.
    pub scalar_failures: usize,
    pub nonscalar_cases: usize,
    /// Non-scalar candidates wrongly reported as fixing every ray.
    pub nonscalar_passes: usize,
}

fn kernel_candidate(dim: usize, kind: usize, rng: &mut ChaCha8Rng) -> (SymmetryOp, bool) {
    match kind {
        // Unit scalar: the only operators that fix every ray.
        0 => {
            let theta = rng.gen_range(0.0..TAU);
            let op =
                SymmetryOp::scalar(dim, Complex64::from_polar(1.0, theta)).expect("unit scalar");
            (op, true)
        }
        // Scalar perturbed by small diagonal phases: moves the k-th
        // equal-weight probe by at least half the perturbation angle, which
        // stays two orders above the detection tolerance.
        1 => {
            let eps = 10f64.powf(rng.gen_range(-6.0..-0.5));
            let theta = rng.gen_range(0.0..TAU);
            let mut diag = vec![Complex64::from_polar(1.0, theta); dim];
            for (k, d) in diag.iter_mut().enumerate().skip(1) {
                let spread = eps * rng.gen_range(0.5..1.0) * if k % 2 == 0 { -1.0 } else { 1.0 };
                *d *= Complex64::from_polar(1.0, spread);
            }
            let m = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag));
            (
                SymmetryOp::new(m, Grading::Unitary).expect("unit diagonal"),
                false,
            )
        }
        // Generic operator.
        2 => {
            let op = SymmetryOp::new(haar_unitary(dim, rng), Grading::Unitary)
                .expect("haar matrix is unitary");
            (op, false)
        }
        // Antiunitary with scalar matrix part: conjugation moves any ray
        // with a genuinely complex coordinate ratio.
        _ => {
            let theta = rng.gen_range(0.0..TAU);
            let m = nalgebra::DMatrix::from_diagonal_element(
                dim,
                dim,
                Complex64::from_polar(1.0, theta),
            );
            (
                SymmetryOp::new(m, Grading::Antiunitary).expect("unit scalar"),
                false,
            )
        }
    }
}

/// Feeds unit scalars and three families of non-scalar candidates through
/// the ray-fixing test, counting classification errors in both directions.
pub fn kernel_exactness_sweep(
    dim: usize,
    cases: usize,
    ray_samples: usize,
    seed: u64,
) -> Result<KernelSummary> {
    if dim < 2 {
        return Err(Error::DimTooSmall { dim, min: 2 });
    }
    let outcomes = exec::map_indexed(cases, |i| -> Result<(bool, bool)> {
        let mut rng = stream_rng(seed, i as u64);
        let (op, is_scalar) = kernel_candidate(dim, i % 4, &mut rng);
        let passed = scalar_kernel_check(&op, ray_samples, derived_seed(seed, i as u64))?;
        Ok((is_scalar, passed))
    });
    let mut summary = KernelSummary {
        scalar_cases: 0,
        scalar_failures: 0,
        nonscalar_cases: 0,
        nonscalar_passes: 0,
    };
    for o in outcomes {
        let (is_scalar, passed) = o?;
        if is_scalar {
            summary.scalar_cases += 1;
            if !passed {
                summary.scalar_failures += 1;
            }
        } else {
            summary.nonscalar_cases += 1;
            if passed {
                summary.nonscalar_passes += 1;
            }
        }
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Sphere-symmetry dichotomy.
// ---------------------------------------------------------------------------

/// The 48 signed permutation matrices of R^3: the full symmetry group of
/// the cube (and octahedron), 24 proper rotations and 24 improper elements.
pub fn signed_permutations() -> Vec<[[f64; 3]; 3]> {
    let perms = [
        [0usize, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut out = Vec::with_capacity(48);
    for perm in perms {
        for mask in 0..8u8 {
            let mut m = [[0.0f64; 3]; 3];
            for (row, &col) in perm.iter().enumerate() {
                let sign = if mask & (1 << row) == 0 { 1.0 } else { -1.0 };
                m[row][col] = sign;
            }
            out.push(m);
        }
    }
    out
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn apply3(m: &[[f64; 3]; 3], p: &BlochPoint) -> BlochPoint {
    let v = [p.x, p.z.re, p.z.im];
    let mut out = [0.0f64; 3];
    for (row, o) in out.iter_mut().enumerate() {
        *o = (0..3).map(|col| m[row][col] * v[col]).sum();
    }
    BlochPoint {
        x: out[0],
        z: Complex64::new(out[1], out[2]),
    }
}

/// The probe table of a sphere isometry in the two-dimensional state space:
/// each probe ray is sent through the sphere chart, moved by the orthogonal
/// matrix, and pulled back to a ray.
pub fn sphere_isometry_table(m: &[[f64; 3]; 3]) -> Result<ProbeTable> {
    let e1 = StateVector::basis(2, 0)?;
    let e2 = StateVector::basis(2, 1)?;
    let transport = |probe: &Ray| -> Result<Ray> {
        let bp = bloch_point(&e1, &e2, probe)?;
        ray_from_bloch(&e1, &e2, &apply3(m, &bp))
    };
    let base = transport(&crate::wigner::base_probe(2)?)?;
    let a = vec![transport(&crate::wigner::a_probe(2, 1)?)?];
    let b = vec![transport(&crate::wigner::b_probe(2, 1)?)?];
    let v = vec![transport(&crate::wigner::v_probe(2, 1)?)?];
    ProbeTable::from_images(tol::SYM, base, a, b, Some(v))
}

/// Outcome of lifting every signed permutation of the sphere.
#[derive(Debug, Clone, Copy)]
pub struct SphereDichotomySummary {
    pub elements: usize,
    /// Proper rotations whose lift came back unitary.
    pub rotations_unitary: usize,
    /// Improper elements whose lift came back antiunitary.
    pub improper_antiunitary: usize,
    /// Elements that failed to lift or lifted with the wrong grading.
    pub failures: usize,
}

/// Lifts all 48 signed permutations of the sphere through the probe
/// pipeline: determinant +1 elements must come back unitary, determinant -1
/// elements antiunitary.
pub fn sphere_dichotomy_sweep() -> SphereDichotomySummary {
    let elements = signed_permutations();
    let outcomes = exec::map_indexed(elements.len(), |i| -> (bool, Option<Grading>) {
        let m = &elements[i];
        let proper = det3(m) > 0.0;
        let run = || -> Result<Grading> {
            let table = sphere_isometry_table(m)?;
            Ok(wigner_lift(&table)?.grading())
        };
        (proper, run().ok())
    });
    let mut summary = SphereDichotomySummary {
        elements: elements.len(),
        rotations_unitary: 0,
        improper_antiunitary: 0,
        failures: 0,
    };
    for (proper, grading) in outcomes {
        match (proper, grading) {
            (true, Some(Grading::Unitary)) => summary.rotations_unitary += 1,
            (false, Some(Grading::Antiunitary)) => summary.improper_antiunitary += 1,
            _ => summary.failures += 1,
        }
    }
    summary
}

// ---------------------------------------------------------------------------
// Rejection behavior.
// ---------------------------------------------------------------------------

/// Outcome of the corrupted-table rejection sweep.
#[derive(Debug, Clone, Copy)]
pub struct RejectionSummary {
    pub cases: usize,
    /// Cases rejected with the probe-consistency stage label.
    pub correctly_labeled: usize,
    /// Smallest corruption applied, as a probability deviation from 1/2.
    pub min_violation: f64,
}

/// Moves `image` along the geodesic from `from` so that the transition
/// probability between them becomes `target_p`.
fn retune_probability(from: &Ray, image: &Ray, target_p: f64) -> Result<Ray> {
    let xi = log_map(from, image)?;
    let d_new = (2.0 * target_p - 1.0).acos();
    let n = xi.norm();
    Ok(exp_map(&xi.scaled(Complex64::new(d_new / n, 0.0))))
}

/// Corrupts one image of a seeded honest table by a probability violation
/// at least `min_violation` away from 1/2 and checks that reconstruction
/// rejects it with the probe-consistency diagnosis.
pub fn rejection_sweep(cases: usize, min_violation: f64, seed: u64) -> RejectionSummary {
    let outcomes = exec::map_indexed(cases, |i| -> (bool, f64) {
        let mut rng = stream_rng(seed, i as u64);
        let dim = rng.gen_range(2..=8usize);
        let grading = if i % 2 == 0 {
            Grading::Unitary
        } else {
            Grading::Antiunitary
        };
        let delta = min_violation * 10f64.powf(rng.gen_range(0.0..4.0));
        let delta = delta.min(0.4);
        let signed = if rng.gen_bool(0.5) { delta } else { -delta };
        let mut run = || -> Result<bool> {
            let s = random_symmetry(dim, grading, derived_seed(seed, i as u64))?;
            let table = make_probe_table(&s)?;
            let corrupt_a = rng.gen_bool(0.5);
            let k = rng.gen_range(0..dim - 1);
            let mut a: Vec<Ray> = table.images_a().to_vec();
            let mut b: Vec<Ray> = table.images_b().to_vec();
            let list = if corrupt_a { &mut a } else { &mut b };
            list[k] = retune_probability(table.image_base(), &list[k], 0.5 + signed)?;
            let bad = ProbeTable::from_images(
                table.tolerance(),
                table.image_base().clone(),
                a,
                b,
                table.images_v().map(|v| v.to_vec()),
            )?;
            match wigner_lift(&bad) {
                Err(Error::NotASymmetry { stage, .. }) => {
                    Ok(stage == RejectStage::ProbeConsistency)
                }
                _ => Ok(false),
            }
        };
        (run().unwrap_or(false), delta)
    });
    let mut summary = RejectionSummary {
        cases,
        correctly_labeled: 0,
        min_violation: f64::INFINITY,
    };
    for (labeled, delta) in outcomes {
        if labeled {
            summary.correctly_labeled += 1;
        }
        summary.min_violation = summary.min_violation.min(delta);
    }
    if cases == 0 {
        summary.min_violation = 0.0;
    }
    summary
}
