//! Graded group extensions arising from families of lifted symmetries.
//!
//! Lifting each element of a finite group of ray maps produces operators
//! that compose only up to phase. The bookkeeping of those phases is a
//! 2-cocycle twisted by the grading: scalars pass through an antiunitary
//! operator conjugated, so mu(g,h) mu(gh,k) = tau_g(mu(h,k)) mu(g,hk)
//! where tau_g conjugates exactly when g is graded antiunitary. The
//! canonical fixture is time reversal of a two-level system: T^2 acts
//! trivially on rays but any unitary representative U of the lift obeys
//! U conj(U) = -I, an invariant no choice of phases can remove.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symmetry::{equal_up_to_phase, Grading, SymmetryOp};
use crate::tol;
use crate::wigner::{make_probe_table, wigner_lift, ProbeTable};

/// A finite group as a multiplication table: mult[g][h] = g*h, elements
/// 0..order with 0 the identity. Construction checks the axioms exactly.
#[derive(Debug, Clone)]
pub struct GroupTable {
    order: usize,
    mult: Vec<Vec<usize>>,
}

impl GroupTable {
    pub fn new(mult: Vec<Vec<usize>>) -> Result<Self> {
        let order = mult.len();
        if order == 0 {
            return Err(Error::NotAGroup("empty multiplication table".into()));
        }
        if mult.iter().any(|row| row.len() != order) {
            return Err(Error::NotAGroup(format!(
                "multiplication table is not {order} x {order}"
            )));
        }
        for row in &mult {
            for &e in row {
                if e >= order {
                    return Err(Error::NotAGroup(format!(
                        "entry {e} out of range for order {order}"
                    )));
                }
            }
        }
        for (g, row) in mult.iter().enumerate() {
            if mult[0][g] != g || row[0] != g {
                return Err(Error::NotAGroup(
                    "element 0 is not a two-sided identity".into(),
                ));
            }
        }
        // Latin square: every row and column is a permutation.
        for g in 0..order {
            let mut seen_row = vec![false; order];
            let mut seen_col = vec![false; order];
            for h in 0..order {
                if std::mem::replace(&mut seen_row[mult[g][h]], true) {
                    return Err(Error::NotAGroup(format!("row {g} repeats an element")));
                }
                if std::mem::replace(&mut seen_col[mult[h][g]], true) {
                    return Err(Error::NotAGroup(format!("column {g} repeats an element")));
                }
            }
        }
        for g in 0..order {
            for h in 0..order {
                for k in 0..order {
                    if mult[mult[g][h]][k] != mult[g][mult[h][k]] {
                        return Err(Error::NotAGroup(format!(
                            "associativity fails at ({g}, {h}, {k})"
                        )));
                    }
                }
            }
        }
        Ok(GroupTable { order, mult })
    }

    /// Cyclic group Z/n with generator 1.
    pub fn cyclic(n: usize) -> Self {
        let mult = (0..n)
            .map(|g| (0..n).map(|h| (g + h) % n).collect())
            .collect();
        GroupTable::new(mult).expect("cyclic tables satisfy the axioms")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn product(&self, g: usize, h: usize) -> usize {
        self.mult[g][h]
    }

    pub fn mult(&self) -> &[Vec<usize>] {
        &self.mult
    }
}

/// Lifts every element's probe table, in element order. The identity's
/// table must map every probe to itself; its lift is then normalized to
/// the exact identity operator so cocycles are normalized too.
pub fn lift_family(group: &GroupTable, tables: &[ProbeTable]) -> Result<Vec<SymmetryOp>> {
    if tables.len() != group.order() {
        return Err(Error::Invalid(format!(
            "expected {} probe tables, got {}",
            group.order(),
            tables.len()
        )));
    }
    let dim = tables[0].dim();
    for (g, t) in tables.iter().enumerate() {
        if t.dim() != dim {
            return Err(Error::Invalid(format!(
                "probe table {g} has dimension {}, expected {dim}",
                t.dim()
            )));
        }
    }
    let identity_residual = {
        let honest = crate::wigner::make_probe_table(&SymmetryOp::identity(dim))?;
        let t = &tables[0];
        let mut dev: f64 = t
            .image_base()
            .fs_distance(honest.image_base())
            .expect("same dimension");
        for k in 0..dim - 1 {
            dev = dev.max(t.images_a()[k].fs_distance(&honest.images_a()[k])?);
            dev = dev.max(t.images_b()[k].fs_distance(&honest.images_b()[k])?);
        }
        dev
    };
    if identity_residual > tables[0].tolerance() {
        return Err(Error::Invalid(format!(
            "table of the identity element moves probes by {identity_residual:.3e}"
        )));
    }
    let lifted = crate::exec::map_indexed(tables.len(), |g| {
        wigner_lift(&tables[g]).map(|r| r.lift().clone())
    });
    let mut lifts = Vec::with_capacity(tables.len());
    for (g, l) in lifted.into_iter().enumerate() {
        lifts.push(l.map_err(|e| Error::ElementLift {
            element: g,
            source: Box::new(e),
        })?);
    }
    lifts[0] = SymmetryOp::identity(dim);
    Ok(lifts)
}

/// The grading of each lift, verified to be a homomorphism to Z/2.
pub fn grading_homomorphism(group: &GroupTable, lifts: &[SymmetryOp]) -> Result<Vec<Grading>> {
    if lifts.len() != group.order() {
        return Err(Error::Invalid(format!(
            "expected {} lifts, got {}",
            group.order(),
            lifts.len()
        )));
    }
    let gradings: Vec<Grading> = lifts.iter().map(|l| l.grading()).collect();
    let mut violations = 0usize;
    for g in 0..group.order() {
        for h in 0..group.order() {
            let expected = (gradings[g].parity() + gradings[h].parity()) % 2;
            if gradings[group.product(g, h)].parity() != expected {
                violations += 1;
            }
        }
    }
    if violations > 0 {
        return Err(Error::NotAHomomorphism { violations });
    }
    Ok(gradings)
}

/// The phase defect table of a lift family, with its gradings.
#[derive(Debug, Clone)]
pub struct GradedCocycle {
    grading: Vec<Grading>,
    mu: Vec<Vec<Complex64>>,
}

impl GradedCocycle {
    pub fn grading(&self) -> &[Grading] {
        &self.grading
    }

    pub fn mu(&self) -> &[Vec<Complex64>] {
        &self.mu
    }

    pub fn order(&self) -> usize {
        self.grading.len()
    }

    /// tau_g: conjugation when g is graded antiunitary.
    fn twist(&self, g: usize, z: Complex64) -> Complex64 {
        if self.grading[g].is_antiunitary() {
            z.conj()
        } else {
            z
        }
    }
}

/// mu(g,h) defined by lift(g) lift(h) = mu(g,h) lift(g h). Fails with
/// NotProjective when some composition is not a scalar multiple of the
/// tabled lift.
pub fn cocycle_table(group: &GroupTable, lifts: &[SymmetryOp]) -> Result<GradedCocycle> {
    let grading = grading_homomorphism(group, lifts)?;
    let m = group.order();
    let mut mu = vec![vec![Complex64::new(1.0, 0.0); m]; m];
    for g in 0..m {
        for h in 0..m {
            let composed = lifts[g].compose(&lifts[h])?;
            let target = &lifts[group.product(g, h)];
            let eq = equal_up_to_phase(&composed, target, tol::SYM)?;
            match eq.phase {
                Some(phase) if eq.equal => mu[g][h] = phase,
                _ => return Err(Error::NotProjective { g, h }),
            }
        }
    }
    Ok(GradedCocycle { grading, mu })
}

/// Largest deviation from the twisted cocycle identity
/// mu(g,h) mu(gh,k) = tau_g(mu(h,k)) mu(g,hk) over all triples.
pub fn twisted_cocycle_check(c: &GradedCocycle, group: &GroupTable) -> f64 {
    let m = group.order();
    let mut dev = 0.0f64;
    for g in 0..m {
        for h in 0..m {
            for k in 0..m {
                let lhs = c.mu[g][h] * c.mu[group.product(g, h)][k];
                let rhs = c.twist(g, c.mu[h][k]) * c.mu[g][group.product(h, k)];
                dev = dev.max((lhs - rhs).norm());
            }
        }
    }
    dev
}

/// The sign s with U conj(U) = s I for an antiunitary (U, conj) lift.
///
/// Rescaling U by any unit phase leaves U conj(U) unchanged, so the sign
/// survives every choice of lift phases: s = -1 certifies that the
/// extension cannot be trivialized. Fails with NotScalar when U conj(U)
/// is not a multiple of the identity (the operator does not square to a
/// scalar on rays).
pub fn antiunitary_square_sign(op: &SymmetryOp) -> Result<f64> {
    if !op.grading().is_antiunitary() {
        return Err(Error::Invalid(
            "square sign is defined for antiunitary operators".into(),
        ));
    }
    let squared = op.compose(op)?;
    let n = op.dim();
    let trace: Complex64 = (0..n).map(|k| squared.matrix()[(k, k)]).sum();
    let s = trace / Complex64::new(n as f64, 0.0);
    let mut dev = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let expected = if r == c { s } else { Complex64::new(0.0, 0.0) };
            dev = dev.max((squared.matrix()[(r, c)] - expected).norm());
        }
    }
    if dev > tol::SYM {
        return Err(Error::NotScalar { deviation: dev });
    }
    Ok(s.re)
}

/// Searches for a phase assignment c with c(0) = 1 making the rescaled
/// lifts compose on the nose, i.e. trivializing the cocycle:
/// mu(g,h) c(g) tau_g(c(h)) / c(gh) = 1 for all pairs.
///
/// Free generators get values from a circle grid of `resolution` points
/// and everything reachable as a product is propagated, so the cost is
/// resolution^(free generators), not resolution^order. The search is
/// approximate by construction: it can only find trivializations whose
/// phases lie near the grid, and it reports the best defect it saw.
/// Intended for small groups (order at most 8 or so).
pub fn coboundary_trivialization(
    c: &GradedCocycle,
    group: &GroupTable,
    resolution: usize,
) -> Option<Vec<Complex64>> {
    let m = group.order();
    assert_eq!(c.order(), m, "cocycle and group order disagree");

    // Order of assignment: identity first, then breadth-first products;
    // elements not reachable from already-assigned ones become free
    // generators whose phases are enumerated.
    #[derive(Clone, Copy)]
    enum Source {
        Free(usize),           // index into the free-generator list
        Product(usize, usize), // c(gh) = mu(g,h) c(g) tau_g(c(h))
    }
    let mut source = vec![None::<Source>; m];
    source[0] = Some(Source::Product(0, 0)); // c(0) = mu(0,0) = 1
    let mut free = Vec::new();
    let mut assigned = vec![false; m];
    assigned[0] = true;
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    let mut order_of_assignment = vec![0usize];
    loop {
        while let Some(g) = queue.pop_front() {
            for h in 0..m {
                if assigned[g] && assigned[h] {
                    let gh = group.product(g, h);
                    if !assigned[gh] {
                        assigned[gh] = true;
                        source[gh] = Some(Source::Product(g, h));
                        order_of_assignment.push(gh);
                        queue.push_back(gh);
                    }
                }
            }
        }
        match (0..m).find(|&g| !assigned[g]) {
            Some(g) => {
                assigned[g] = true;
                source[g] = Some(Source::Free(free.len()));
                free.push(g);
                order_of_assignment.push(g);
                queue.push_back(g);
            }
            None => break,
        }
    }

    let grid: Vec<Complex64> = (0..resolution)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / resolution as f64;
            Complex64::new(theta.cos(), theta.sin())
        })
        .collect();
    // Grid spacing bounds how well a true trivialization can be hit.
    let slack = 4.0 * std::f64::consts::PI / resolution as f64 + tol::SYM;

    let mut choice = vec![0usize; free.len()];
    loop {
        let mut phases = vec![Complex64::new(1.0, 0.0); m];
        for &g in &order_of_assignment {
            match source[g].expect("every element has a source") {
                Source::Free(idx) => phases[g] = grid[choice[idx]],
                Source::Product(a, b) => {
                    phases[g] = c.mu[a][b] * phases[a] * c.twist(a, phases[b]);
                }
            }
        }
        let mut defect = 0.0f64;
        'pairs: for g in 0..m {
            for h in 0..m {
                let gh = group.product(g, h);
                let lhs = c.mu[g][h] * phases[g] * c.twist(g, phases[h]);
                defect = defect.max((lhs - phases[gh]).norm());
                if defect > slack {
                    break 'pairs;
                }
            }
        }
        if defect <= slack {
            return Some(phases);
        }
        // Advance the odometer over free-generator choices.
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return None;
            }
            choice[pos] += 1;
            if choice[pos] < resolution {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// The operator T = i sigma_y followed by conjugation: the antiunitary
/// time reversal of a two-level system, with T^2 = -1.
pub fn time_reversal_operator() -> SymmetryOp {
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    );
    SymmetryOp::new(m, Grading::Antiunitary).expect("i sigma_y is unitary")
}

/// The cyclic order-4 group generated by time reversal of a two-level
/// system, with the probe tables of 1, T, T^2, T^3.
///
/// The canonical example of a family whose phase defects cannot be
/// removed: the gradings alternate, and every antiunitary lift U of T
/// satisfies U conj(U) = -I.
pub fn time_reversal_family() -> Result<(GroupTable, Vec<ProbeTable>)> {
    let t = time_reversal_operator();
    let mut ops = vec![SymmetryOp::identity(2)];
    for _ in 0..3 {
        let prev = ops.last().expect("seeded with the identity");
        ops.push(t.compose(prev)?);
    }
    let tables = ops
        .iter()
        .map(make_probe_table)
        .collect::<Result<Vec<_>>>()?;
    Ok((GroupTable::cyclic(4), tables))
}

/// The order-2 group generated by entrywise conjugation in dimension
/// `dim`, with its probe tables: the simplest antiunitary family, whose
/// phase defect table is already trivial.
pub fn conjugation_family(dim: usize) -> Result<(GroupTable, Vec<ProbeTable>)> {
    let ops = [SymmetryOp::identity(dim), SymmetryOp::conjugation(dim)];
    let tables = ops
        .iter()
        .map(make_probe_table)
        .collect::<Result<Vec<_>>>()?;
    Ok((GroupTable::cyclic(2), tables))
}
