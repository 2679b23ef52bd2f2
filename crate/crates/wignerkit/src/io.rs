//! JSON file formats for operators, probe tables, lift reports, and groups.
//!
//! Complex numbers serialize as two-element arrays `[re, im]`, vectors as
//! arrays of complex entries, matrices as row-major arrays of rows. Rays
//! are written through their canonical representative; on input any nonzero
//! scale and phase is accepted and canonicalized. Parsing errors name the
//! offending field so callers can surface them directly.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{GradedCocycle, GroupTable};
use crate::state_space::{Ray, StateVector};
use crate::symmetry::{Grading, SymmetryOp};
use crate::tol;
use crate::wigner::{LiftReport, ProbeTable};

/// A complex number as `[re, im]`.
pub type ComplexPair = [f64; 2];

fn pair(z: Complex64) -> ComplexPair {
    [z.re, z.im]
}

fn unpair(p: ComplexPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn vector_pairs(v: &StateVector) -> Vec<ComplexPair> {
    v.entries().iter().map(|&z| pair(z)).collect()
}

fn state_vector(field: &str, entries: &[ComplexPair], dim: usize) -> Result<StateVector> {
    if entries.len() != dim {
        return Err(Error::Invalid(format!(
            "field \"{field}\": expected {dim} entries, got {}",
            entries.len()
        )));
    }
    for (k, p) in entries.iter().enumerate() {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return Err(Error::Invalid(format!(
                "field \"{field}\": entry {k} is not finite"
            )));
        }
    }
    StateVector::new(entries.iter().map(|&p| unpair(p)).collect())
        .map_err(|e| Error::Invalid(format!("field \"{field}\": {e}")))
}

fn ray(field: &str, entries: &[ComplexPair], dim: usize) -> Result<Ray> {
    Ray::new(&state_vector(field, entries, dim)?)
        .map_err(|e| Error::Invalid(format!("field \"{field}\": {e}")))
}

/// Parses a JSON document, labeling failures with what was being read.
/// Unknown fields are tolerated, so richer documents embedding a format
/// (such as a lift report standing in for an operator) parse too.
pub fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("{what}: {e}")))
}

/// Serializes a value as pretty-printed JSON with a trailing newline.
/// Field order is fixed by the struct definitions, so output is
/// byte-identical across runs for identical values.
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("formats contain only plain data");
    s.push('\n');
    s
}

/// File form of a unitary or antiunitary operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryOpFile {
    pub dim: usize,
    pub grading: Grading,
    /// Row-major matrix of `[re, im]` entries.
    pub matrix: Vec<Vec<ComplexPair>>,
}

impl SymmetryOpFile {
    pub fn from_op(op: &SymmetryOp) -> Self {
        let n = op.dim();
        let m = op.matrix();
        SymmetryOpFile {
            dim: n,
            grading: op.grading(),
            matrix: (0..n)
                .map(|r| (0..n).map(|c| pair(m[(r, c)])).collect())
                .collect(),
        }
    }

    pub fn to_op(&self) -> Result<SymmetryOp> {
        if self.dim == 0 {
            return Err(Error::Invalid("field \"dim\": must be at least 1".into()));
        }
        if self.matrix.len() != self.dim {
            return Err(Error::Invalid(format!(
                "field \"matrix\": expected {} rows, got {}",
                self.dim,
                self.matrix.len()
            )));
        }
        for (r, row) in self.matrix.iter().enumerate() {
            if row.len() != self.dim {
                return Err(Error::Invalid(format!(
                    "field \"matrix\": row {r} has {} entries, expected {}",
                    row.len(),
                    self.dim
                )));
            }
            for (c, p) in row.iter().enumerate() {
                if !(p[0].is_finite() && p[1].is_finite()) {
                    return Err(Error::Invalid(format!(
                        "field \"matrix\": entry ({r}, {c}) is not finite"
                    )));
                }
            }
        }
        let m = DMatrix::from_fn(self.dim, self.dim, |r, c| unpair(self.matrix[r][c]));
        SymmetryOp::new(m, self.grading)
            .map_err(|e| Error::Invalid(format!("field \"matrix\": {e}")))
    }
}

/// File form of a probe table. Image vectors may carry any nonzero scale
/// and phase; they are canonicalized on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeTableFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub base: Vec<ComplexPair>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<ComplexPair>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<ComplexPair>>,
    #[serde(rename = "V", default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Vec<ComplexPair>>>,
}

impl ProbeTableFile {
    pub fn from_table(t: &ProbeTable) -> Self {
        ProbeTableFile {
            dim: t.dim(),
            tolerance: Some(t.tolerance()),
            base: vector_pairs(t.image_base().rep()),
            a: t.images_a().iter().map(|r| vector_pairs(r.rep())).collect(),
            b: t.images_b().iter().map(|r| vector_pairs(r.rep())).collect(),
            v: t.images_v()
                .map(|list| list.iter().map(|r| vector_pairs(r.rep())).collect()),
        }
    }

    pub fn to_table(&self) -> Result<ProbeTable> {
        let dim = self.dim;
        if dim < 2 {
            return Err(Error::Invalid(
                "field \"dim\": probe tables need dimension at least 2".into(),
            ));
        }
        let expected = dim - 1;
        for (name, list) in [("A", &self.a), ("B", &self.b)] {
            if list.len() != expected {
                return Err(Error::Invalid(format!(
                    "field \"{name}\": expected {expected} vectors, got {}",
                    list.len()
                )));
            }
        }
        if let Some(v) = &self.v {
            if v.len() != expected {
                return Err(Error::Invalid(format!(
                    "field \"V\": expected {expected} vectors, got {}",
                    v.len()
                )));
            }
        }
        let tolerance = self.tolerance.unwrap_or(tol::SYM);
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::Invalid(format!(
                "field \"tolerance\": must be positive and finite, got {tolerance}"
            )));
        }
        let base = ray("base", &self.base, dim)?;
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(k, e)| ray(&format!("A[{k}]"), e, dim))
            .collect::<Result<Vec<_>>>()?;
        let b = self
            .b
            .iter()
            .enumerate()
            .map(|(k, e)| ray(&format!("B[{k}]"), e, dim))
            .collect::<Result<Vec<_>>>()?;
        let v = match &self.v {
            Some(list) => Some(
                list.iter()
                    .enumerate()
                    .map(|(k, e)| ray(&format!("V[{k}]"), e, dim))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        ProbeTable::from_images(tolerance, base, a, b, v)
    }
}

/// Residual block of a lift report file.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResidualsFile {
    pub probe_max: f64,
    pub orthonormality: f64,
    pub alpha_consistency: f64,
    pub max: f64,
}

/// File form of a certified reconstruction: the operator fields plus the
/// certification data. Parses anywhere an operator file is expected.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiftReportFile {
    pub dim: usize,
    pub grading: Grading,
    pub matrix: Vec<Vec<ComplexPair>>,
    pub residuals: ResidualsFile,
    pub tolerance: f64,
    pub accepted: bool,
    /// Identifier of the output phase convention.
    pub gauge: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl LiftReportFile {
    pub fn from_report(report: &LiftReport, warnings: Vec<String>) -> Self {
        let op = SymmetryOpFile::from_op(report.lift());
        let r = report.residuals();
        LiftReportFile {
            dim: op.dim,
            grading: op.grading,
            matrix: op.matrix,
            residuals: ResidualsFile {
                probe_max: r.probe_max,
                orthonormality: r.orthonormality,
                alpha_consistency: r.alpha_consistency,
                max: r.max(),
            },
            tolerance: report.tolerance(),
            accepted: report.accepted(),
            gauge: report.gauge_phase_convention().to_string(),
            warnings,
        }
    }
}

/// File form of a finite group with one probe table per element.
///
/// Tables are keyed by the element index as a decimal string ("0" for the
/// identity). The optional `generators` list carries human-readable labels,
/// one per element where known; it is echoed through, never interpreted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupFile {
    pub order: usize,
    pub mult: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<String>>,
    pub tables: BTreeMap<String, ProbeTableFile>,
}

impl GroupFile {
    pub fn from_parts(
        group: &GroupTable,
        tables: &[ProbeTable],
        generators: Option<Vec<String>>,
    ) -> Self {
        GroupFile {
            order: group.order(),
            mult: group.mult().to_vec(),
            generators,
            tables: tables
                .iter()
                .enumerate()
                .map(|(g, t)| (g.to_string(), ProbeTableFile::from_table(t)))
                .collect(),
        }
    }

    pub fn to_parts(&self) -> Result<(GroupTable, Vec<ProbeTable>)> {
        if self.mult.len() != self.order {
            return Err(Error::Invalid(format!(
                "field \"mult\": expected {} rows, got {}",
                self.order,
                self.mult.len()
            )));
        }
        let group = GroupTable::new(self.mult.clone())?;
        let mut tables = Vec::with_capacity(self.order);
        for g in 0..self.order {
            let key = g.to_string();
            let file = self.tables.get(&key).ok_or_else(|| {
                Error::Invalid(format!(
                    "field \"tables\": missing table for element \"{key}\""
                ))
            })?;
            tables.push(
                file.to_table()
                    .map_err(|e| Error::Invalid(format!("table \"{key}\": {e}")))?,
            );
        }
        Ok((group, tables))
    }
}

/// One phase-invariant square certificate: the element index and the sign
/// s with lift(g) conj(lift(g)) = s I.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SquareSignFile {
    pub element: usize,
    pub sign: f64,
}

/// File form of the extension analysis of a lifted group family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtensionReportFile {
    pub order: usize,
    /// Parity of each element's lift: 0 unitary, 1 antiunitary.
    pub grading: Vec<u8>,
    /// Phase defect table: mu[g][h] with lift(g) lift(h) = mu lift(gh).
    pub mu: Vec<Vec<ComplexPair>>,
    /// Largest deviation from the twisted composition identity.
    pub twisted_identity_residual: f64,
    /// Square certificates for antiunitary elements whose square acts as a
    /// scalar.
    pub square_signs: Vec<SquareSignFile>,
    /// Grid size used by the trivialization search.
    pub trivialization_resolution: usize,
    /// Phases removing the defect table entirely, when the search finds
    /// them; absent means none exist near the grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trivialization: Option<Vec<ComplexPair>>,
}

impl ExtensionReportFile {
    pub fn new(
        cocycle: &GradedCocycle,
        residual: f64,
        square_signs: Vec<SquareSignFile>,
        resolution: usize,
        trivialization: Option<Vec<Complex64>>,
    ) -> Self {
        ExtensionReportFile {
            order: cocycle.order(),
            grading: cocycle.grading().iter().map(|g| g.parity()).collect(),
            mu: cocycle
                .mu()
                .iter()
                .map(|row| row.iter().map(|&z| pair(z)).collect())
                .collect(),
            twisted_identity_residual: residual,
            square_signs,
            trivialization_resolution: resolution,
            trivialization: trivialization.map(|p| p.into_iter().map(pair).collect()),
        }
    }
}

/// An orthonormal frame spanning a two-dimensional subspace, for the
/// sphere-chart command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameFile {
    pub e1: Vec<ComplexPair>,
    pub e2: Vec<ComplexPair>,
}

impl FrameFile {
    pub fn to_vectors(&self) -> Result<(StateVector, StateVector)> {
        let dim = self.e1.len();
        if dim == 0 {
            return Err(Error::Invalid("field \"e1\": empty vector".into()));
        }
        Ok((
            state_vector("e1", &self.e1, dim)?,
            state_vector("e2", &self.e2, dim)?,
        ))
    }
}

/// Parses a bare JSON vector of `[re, im]` entries into a ray.
pub fn ray_from_json(text: &str, what: &str) -> Result<Ray> {
    let entries: Vec<ComplexPair> = parse_json(text, what)?;
    if entries.is_empty() {
        return Err(Error::Invalid(format!("{what}: empty vector")));
    }
    let dim = entries.len();
    ray(what, &entries, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{cocycle_table, lift_family, time_reversal_family};
    use crate::symmetry::random_symmetry;
    use crate::wigner::{make_probe_table, wigner_lift};

    #[test]
    fn operator_files_round_trip() {
        let op = random_symmetry(3, Grading::Antiunitary, 7).unwrap();
        let text = to_json_pretty(&SymmetryOpFile::from_op(&op));
        let parsed: SymmetryOpFile = parse_json(&text, "operator").unwrap();
        let back = parsed.to_op().unwrap();
        assert_eq!(back.grading(), op.grading());
        assert!((back.matrix() - op.matrix()).norm() < 1e-15);
    }

    #[test]
    fn probe_table_files_round_trip_and_canonicalize() {
        let op = random_symmetry(4, Grading::Unitary, 11).unwrap();
        let table = make_probe_table(&op).unwrap();
        let mut file = ProbeTableFile::from_table(&table);
        // Scale a stored vector arbitrarily; the parsed table must agree.
        for p in &mut file.base {
            p[0] *= -3.0;
            p[1] *= -3.0;
        }
        let back = file.to_table().unwrap();
        assert!(back.image_base().approx_eq(table.image_base(), 1e-14));
        for k in 0..3 {
            assert!(back.images_a()[k].approx_eq(&table.images_a()[k], 1e-14));
        }
        assert_eq!(back.tolerance(), table.tolerance());
    }

    #[test]
    fn parse_errors_name_the_offending_field() {
        let mut file = ProbeTableFile {
            dim: 2,
            tolerance: None,
            base: vec![[1.0, 0.0], [0.0, 0.0]],
            a: vec![vec![[0.0, 0.0], [0.0, 0.0]]],
            b: vec![vec![[1.0, 0.0], [0.0, 1.0]]],
            v: None,
        };
        let err = file.to_table().unwrap_err().to_string();
        assert!(err.contains("A[0]"), "error was: {err}");
        file.a = vec![];
        let err = file.to_table().unwrap_err().to_string();
        assert!(err.contains("\"A\""), "error was: {err}");
        let err = parse_json::<ProbeTableFile>("{\"dim\": 2}", "table file")
            .unwrap_err()
            .to_string();
        assert!(err.contains("base"), "error was: {err}");
    }

    #[test]
    fn lift_reports_parse_as_operator_files() {
        let op = random_symmetry(2, Grading::Unitary, 3).unwrap();
        let report = wigner_lift(&make_probe_table(&op).unwrap()).unwrap();
        let text = to_json_pretty(&LiftReportFile::from_report(&report, vec![]));
        let as_op: SymmetryOpFile = parse_json(&text, "operator").unwrap();
        let parsed = as_op.to_op().unwrap();
        assert!((parsed.matrix() - report.lift().matrix()).norm() < 1e-15);
    }

    #[test]
    fn group_files_round_trip() {
        let (group, tables) = time_reversal_family().unwrap();
        let file = GroupFile::from_parts(&group, &tables, Some(vec!["T".into()]));
        let text = to_json_pretty(&file);
        let parsed: GroupFile = parse_json(&text, "group").unwrap();
        let (group2, tables2) = parsed.to_parts().unwrap();
        assert_eq!(group2.order(), 4);
        let lifts = lift_family(&group2, &tables2).unwrap();
        let cocycle = cocycle_table(&group2, &lifts).unwrap();
        assert!((cocycle.mu()[1][1] - Complex64::new(-1.0, 0.0)).norm() < 1e-10);
        // Missing table detected by name.
        let mut broken = parsed.clone();
        broken.tables.remove("2");
        let err = broken.to_parts().unwrap_err().to_string();
        assert!(err.contains("element \"2\""), "error was: {err}");
    }

    #[test]
    fn deterministic_serialization_is_byte_identical() {
        let op = random_symmetry(3, Grading::Unitary, 5).unwrap();
        let a = to_json_pretty(&SymmetryOpFile::from_op(&op));
        let b = to_json_pretty(&SymmetryOpFile::from_op(&op));
        assert_eq!(a, b);
    }
}
