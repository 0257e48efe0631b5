//! Problem and result documents.
//!
//! Problems are stored as one self-describing JSON document: explicit
//! order, 0-based upper-triangle triples `[i, j, v]` for `C`, `M` and every
//! constraint matrix, and a run-length encoded pattern over the packed upper
//! triangle (column-major). Results are [`RunRecord`]s.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cones::{ConePattern, EntryKind};
use crate::dnnsdp::{DnnSdpProblem, DnnSolveResult, Inequalities, ObjectiveMap, TuningPolicy};
use crate::engine::SolverConfig;
use crate::error::{Error, Result};
use crate::linalg::{SparseSym, SparseSymList, SymMat};
use crate::SolveStatus;

pub const PROBLEM_FORMAT: &str = "cadmm-dnnsdp";
pub const PROBLEM_VERSION: u32 = 1;

pub type Triple = (usize, usize, f64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintBlock {
    pub b: Vec<f64>,
    pub rows: Vec<Vec<Triple>>,
}

/// On-disk form of a [`DnnSdpProblem`] plus free-form metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub format: String,
    pub version: u32,
    pub n: usize,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    #[serde(default)]
    pub objective: ObjectiveMap,
    pub c: Vec<Triple>,
    pub equalities: ConstraintBlock,
    #[serde(default)]
    pub inequalities: Option<ConstraintBlock>,
    #[serde(default)]
    pub shift: Vec<Triple>,
    /// `(kind, count)` runs covering `n(n+1)/2` packed entries.
    pub pattern: Vec<(EntryKind, usize)>,
}

fn dense_triples(m: &SymMat) -> Vec<Triple> {
    let mut out = Vec::new();
    for j in 0..m.n() {
        for i in 0..=j {
            let v = m.get(i, j);
            if v != 0.0 {
                out.push((i, j, v));
            }
        }
    }
    out
}

fn block(a: &SparseSymList, b: &DVector<f64>) -> ConstraintBlock {
    ConstraintBlock { b: b.iter().copied().collect(), rows: a.mats().iter().map(|m| m.entries.clone()).collect() }
}

fn rle(kinds: &[EntryKind]) -> Vec<(EntryKind, usize)> {
    let mut out: Vec<(EntryKind, usize)> = Vec::new();
    for &k in kinds {
        match out.last_mut() {
            Some((last, count)) if *last == k => *count += 1,
            _ => out.push((k, 1)),
        }
    }
    out
}

fn matrix_from_triples(n: usize, triples: &[Triple], what: &str) -> Result<SymMat> {
    let mut m = SymMat::zeros(n);
    let mut seen = std::collections::HashSet::new();
    for &(i, j, v) in triples {
        let (i, j) = (i.min(j), i.max(j));
        if j >= n {
            return Err(Error::IndexOutOfRange { i, j, n });
        }
        if !seen.insert((i, j)) {
            return Err(Error::InvalidProblem(format!("duplicate entry ({i}, {j}) in {what}")));
        }
        m.set(i, j, v);
    }
    Ok(m)
}

fn constraint_list(n: usize, blk: &ConstraintBlock, what: &str) -> Result<(SparseSymList, DVector<f64>)> {
    if blk.b.len() != blk.rows.len() {
        return Err(Error::Dimension(format!(
            "{what}: {} right-hand sides for {} rows",
            blk.b.len(),
            blk.rows.len()
        )));
    }
    let list = SparseSymList::new(n, blk.rows.iter().map(|r| SparseSym::new(r.clone())).collect())?;
    Ok((list, DVector::from_vec(blk.b.clone())))
}

impl ProblemFile {
    pub fn from_problem(p: &DnnSdpProblem, metadata: BTreeMap<String, String>) -> Self {
        ProblemFile {
            format: PROBLEM_FORMAT.into(),
            version: PROBLEM_VERSION,
            n: p.n(),
            metadata,
            objective: p.objective(),
            c: dense_triples(p.c()),
            equalities: block(p.a_e(), p.b_e()),
            inequalities: p.ineq().map(|q| block(&q.a, &q.b)),
            shift: dense_triples(p.shift()),
            pattern: rle(p.pattern().packed()),
        }
    }

    /// Validates the document and builds the problem.
    pub fn to_problem(&self) -> Result<DnnSdpProblem> {
        if self.format != PROBLEM_FORMAT || self.version != PROBLEM_VERSION {
            return Err(Error::InvalidProblem(format!(
                "unsupported document '{}' version {} (expected '{PROBLEM_FORMAT}' version {PROBLEM_VERSION})",
                self.format, self.version
            )));
        }
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidProblem("matrix order must be at least 1".into()));
        }
        let c = matrix_from_triples(n, &self.c, "C")?;
        let shift = matrix_from_triples(n, &self.shift, "M")?;
        let (a_e, b_e) = constraint_list(n, &self.equalities, "equalities")?;
        let ineq = match &self.inequalities {
            Some(blk) => {
                let (a, b) = constraint_list(n, blk, "inequalities")?;
                Some(Inequalities { a, b })
            }
            None => None,
        };
        let mut kinds = Vec::with_capacity(n * (n + 1) / 2);
        for &(k, count) in &self.pattern {
            kinds.extend(std::iter::repeat(k).take(count));
        }
        let pattern = ConePattern::from_packed(n, kinds)?;
        Ok(DnnSdpProblem::new(c, a_e, b_e, ineq, shift, pattern)?.with_objective(self.objective))
    }
}

/// Maps a JSON error to a parse error carrying its line number.
fn json_err(e: serde_json::Error) -> Error {
    if e.is_io() {
        Error::Json(e)
    } else {
        Error::Parse { line: e.line(), msg: e.to_string() }
    }
}

pub fn problem_to_string(p: &DnnSdpProblem, metadata: BTreeMap<String, String>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ProblemFile::from_problem(p, metadata))? + "\n")
}

pub fn parse_problem_file(text: &str) -> Result<ProblemFile> {
    serde_json::from_str(text).map_err(json_err)
}

pub fn parse_problem(text: &str) -> Result<DnnSdpProblem> {
    parse_problem_file(text)?.to_problem()
}

pub fn write_problem(p: &DnnSdpProblem, metadata: BTreeMap<String, String>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, problem_to_string(p, metadata)?)?;
    Ok(())
}

pub fn read_problem_file(path: impl AsRef<Path>) -> Result<ProblemFile> {
    parse_problem_file(&std::fs::read_to_string(path)?)
}

pub fn read_problem(path: impl AsRef<Path>) -> Result<DnnSdpProblem> {
    read_problem_file(path)?.to_problem()
}

/// Floats that may be NaN or infinite after a failed run. Finite values are
/// written as numbers, the rest as the strings `"NaN"`, `"inf"`, `"-inf"`.
mod lossy_float {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Num(f64),
        Str(String),
    }

    pub(super) fn to_repr_str(v: f64) -> Option<&'static str> {
        if v.is_nan() {
            Some("NaN")
        } else if v == f64::INFINITY {
            Some("inf")
        } else if v == f64::NEG_INFINITY {
            Some("-inf")
        } else {
            None
        }
    }

    pub(super) fn from_repr<E: serde::de::Error>(r: Repr) -> Result<f64, E> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(E::custom(format!("invalid number '{s}'"))),
            },
        }
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        match to_repr_str(*v) {
            Some(t) => s.serialize_str(t),
            None => s.serialize_f64(*v),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_repr(Repr::deserialize(d).map_err(D::Error::custom)?)
    }
}

mod lossy_float_map {
    use std::collections::BTreeMap;

    use serde::{ser::SerializeMap, Deserialize, Deserializer, Serializer};

    use super::lossy_float::{from_repr, to_repr_str, Repr};

    pub fn serialize<S: Serializer>(m: &BTreeMap<String, f64>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            match to_repr_str(*v) {
                Some(t) => map.serialize_entry(k, t)?,
                None => map.serialize_entry(k, v)?,
            }
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<String, f64>, D::Error> {
        BTreeMap::<String, Repr>::deserialize(d)?.into_iter().map(|(k, r)| Ok((k, from_repr(r)?))).collect()
    }
}

/// Solver parameters echoed into a result record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub solver: SolverConfig,
    pub policy: TuningPolicy,
    /// Fixed step of the directly extended method.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dext_tau: Option<f64>,
}

/// One solver run on one problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub solver: String,
    pub status: SolveStatus,
    pub iterations: usize,
    #[serde(with = "lossy_float")]
    pub eta: f64,
    #[serde(with = "lossy_float_map")]
    pub eta_components: BTreeMap<String, f64>,
    #[serde(with = "lossy_float")]
    pub eta_g: f64,
    #[serde(with = "lossy_float")]
    pub objective: f64,
    #[serde(with = "lossy_float")]
    pub tau: f64,
    #[serde(with = "lossy_float")]
    pub sigma: f64,
    pub restarts: usize,
    pub wall_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigEcho>,
}

impl RunRecord {
    pub fn from_result(problem: &str, solver: &str, r: &DnnSolveResult, config: Option<ConfigEcho>) -> Self {
        RunRecord {
            problem: problem.into(),
            solver: solver.into(),
            status: r.status,
            iterations: r.iterations,
            eta: r.report.eta,
            eta_components: r.report.components().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            eta_g: r.report.eta_g,
            objective: r.objective,
            tau: r.tau,
            sigma: r.sigma,
            restarts: r.restarts.len(),
            wall_secs: r.elapsed_secs,
            error: None,
            config,
        }
    }

    /// Record for a run that ended with an error.
    pub fn failed(problem: &str, solver: &str, err: &Error, wall_secs: f64, config: Option<ConfigEcho>) -> Self {
        RunRecord {
            problem: problem.into(),
            solver: solver.into(),
            status: SolveStatus::Error,
            iterations: 0,
            eta: f64::NAN,
            eta_components: BTreeMap::new(),
            eta_g: f64::NAN,
            objective: f64::NAN,
            tau: f64::NAN,
            sigma: f64::NAN,
            restarts: 0,
            wall_secs,
            error: Some(err.to_string()),
            config,
        }
    }

    pub fn solved(&self) -> bool {
        self.status == SolveStatus::Converged
    }

    /// Header matching [`summary_line`](Self::summary_line).
    pub fn summary_header() -> &'static str {
        "problem              solver   status     iter |       eta |       gap |     tau |   time"
    }

    /// `iter | η | gap | τ | time` in one line.
    pub fn summary_line(&self) -> String {
        format!(
            "{:<20} {:<8} {:<9} {:>6} | {:>9.2e} | {:>9.2e} | {:>7.3} | {:>6.2}",
            self.problem,
            self.solver,
            format!("{:?}", self.status),
            self.iterations,
            self.eta,
            self.eta_g,
            self.tau,
            self.wall_secs
        )
    }

    /// Copy with the timing field zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> Self {
        RunRecord { wall_secs: 0.0, ..self.clone() }
    }
}

pub fn record_to_string(r: &RunRecord) -> Result<String> {
    Ok(serde_json::to_string_pretty(r)? + "\n")
}

pub fn parse_record(text: &str) -> Result<RunRecord> {
    serde_json::from_str(text).map_err(json_err)
}

pub fn write_result(r: &RunRecord, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, record_to_string(r)?)?;
    Ok(())
}

pub fn read_result(path: impl AsRef<Path>) -> Result<RunRecord> {
    parse_record(&std::fs::read_to_string(path)?)
}

/// Several records in one JSON array.
pub fn write_records(rs: &[RunRecord], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(rs)? + "\n")?;
    Ok(())
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    serde_json::from_str(&std::fs::read_to_string(path)?).map_err(json_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{generate, Family};

    const TINY: &str = r#"{
  "format": "cadmm-dnnsdp",
  "version": 1,
  "n": 2,
  "c": [[0, 0, 1.0], [1, 1, 2.0]],
  "equalities": { "b": [1.0], "rows": [[[0, 0, 1.0]]] },
  "pattern": [["NonNeg", 3]]
}
"#;

    #[test]
    fn hand_written_file_matches_direct_construction() {
        let p = parse_problem(TINY).unwrap();
        let direct = DnnSdpProblem::new(
            SymMat::from_fn(2, |i, j| if i == j { (i + 1) as f64 } else { 0.0 }),
            SparseSymList::new(2, vec![SparseSym::new(vec![(0, 0, 1.0)])]).unwrap(),
            DVector::from_vec(vec![1.0]),
            None,
            SymMat::zeros(2),
            ConePattern::nonneg(2),
        )
        .unwrap();
        assert_eq!(p.c(), direct.c());
        assert_eq!(p.a_e(), direct.a_e());
        assert_eq!(p.b_e(), direct.b_e());
        assert_eq!(p.pattern(), direct.pattern());
        assert_eq!(p.shift(), direct.shift());
        assert!(p.ineq().is_none());
    }

    #[test]
    fn round_trip_is_identity() {
        for fam in [Family::Biq, Family::ExtBiq, Family::Fap, Family::Qap] {
            let p = generate(fam, 4, 3).unwrap();
            let mut meta = BTreeMap::new();
            meta.insert("family".into(), format!("{fam:?}"));
            let text = problem_to_string(&p, meta.clone()).unwrap();
            let f = parse_problem_file(&text).unwrap();
            assert_eq!(f.metadata, meta);
            assert_eq!(f, ProblemFile::from_problem(&f.to_problem().unwrap(), meta));
        }
    }

    #[test]
    fn truncated_file_reports_line() {
        let cut = &TINY[..TINY.find("\"equalities\"").unwrap() + 20];
        match parse_problem(cut) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_field_reports_line() {
        let bad = TINY.replace("\"n\": 2", "\"n\": \"two\"");
        assert!(matches!(parse_problem(&bad), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn invariant_violations_are_named() {
        let short = TINY.replace("[[\"NonNeg\", 3]]", "[[\"NonNeg\", 2]]");
        assert!(matches!(parse_problem(&short), Err(Error::Dimension(_))));
        let oob = TINY.replace("[1, 1, 2.0]", "[1, 2, 2.0]");
        assert!(matches!(parse_problem(&oob), Err(Error::IndexOutOfRange { .. })));
        let dup = TINY.replace("[1, 1, 2.0]", "[0, 0, 2.0]");
        assert!(matches!(parse_problem(&dup), Err(Error::InvalidProblem(_))));
        let singular = TINY.replace("\"b\": [1.0], \"rows\": [[[0, 0, 1.0]]]", "\"b\": [1.0, 2.0], \"rows\": [[[0, 0, 1.0]], [[0, 0, 2.0]]]");
        assert!(matches!(parse_problem(&singular), Err(Error::SingularGram { .. })));
    }

    #[test]
    fn record_round_trip_with_non_finite_values() {
        let mut r = RunRecord::failed("p", "cadmm", &Error::InvalidConfig("x".into()), 0.5, None);
        r.eta_components.insert("eta_p".into(), f64::INFINITY);
        r.eta_components.insert("eta_d".into(), 1e-7);
        let back = parse_record(&record_to_string(&r).unwrap()).unwrap();
        assert!(back.eta.is_nan() && back.objective.is_nan());
        assert_eq!(back.eta_components["eta_p"], f64::INFINITY);
        assert_eq!(back.eta_components["eta_d"], 1e-7);
        assert_eq!(back.error, r.error);
    }

    #[test]
    fn unwritable_path_is_an_error() {
        let r = RunRecord::failed("p", "cadmm", &Error::InvalidConfig("x".into()), 0.0, None);
        assert!(write_result(&r, "/nonexistent-dir/out.json").is_err());
    }
}
