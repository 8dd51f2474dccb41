//! JSON wire formats for exact integer data.
//!
//! All matrix entries travel as decimal strings so that consumers never
//! lose precision to fixed-width integer types; shapes are explicit and
//! validated on the way in.

use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::IntMat;

/// A matrix on the wire: explicit shape, row-major entries, every entry a
/// decimal string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatWire {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<String>>,
}

pub fn mat_to_wire(m: &IntMat) -> MatWire {
    MatWire {
        rows: m.rows(),
        cols: m.cols(),
        entries: (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.at(i, j).to_string()).collect())
            .collect(),
    }
}

pub fn mat_from_wire(w: &MatWire) -> Result<IntMat> {
    if w.entries.len() != w.rows {
        return Err(Error::BadInput(format!(
            "matrix declares {} rows but lists {}",
            w.rows,
            w.entries.len()
        )));
    }
    let mut out = IntMat::zero(w.rows, w.cols);
    for (i, row) in w.entries.iter().enumerate() {
        if row.len() != w.cols {
            return Err(Error::BadInput(format!(
                "row {i} has {} entries, expected {}",
                row.len(),
                w.cols
            )));
        }
        for (j, s) in row.iter().enumerate() {
            let v = BigInt::from_str(s.trim()).map_err(|_| {
                Error::BadInput(format!("entry ({i},{j}) is not a decimal integer: {s:?}"))
            })?;
            *out.at_mut(i, j) = v;
        }
    }
    Ok(out)
}

/// Input file for module-with-group-action commands.
///
/// `generators` define the group (square, rank x rank, invertible over the
/// integers).  When `action` is present it gives one matrix per generator
/// acting on a module of possibly different rank; otherwise the group acts
/// on itself, i.e. by the generator matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeSpecWire {
    pub rank: usize,
    pub generators: Vec<MatWire>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Vec<MatWire>>,
}

#[derive(Debug, Clone)]
pub struct LatticeSpec {
    pub rank: usize,
    pub generators: Vec<IntMat>,
    pub action: Option<Vec<IntMat>>,
}

/// Wraps a serde error so callers see the line/column position.
pub fn json_input_error(e: serde_json::Error) -> Error {
    Error::BadInput(format!("json parse error: {e}"))
}

pub fn parse_matrix(text: &str) -> Result<IntMat> {
    let wire: MatWire = serde_json::from_str(text).map_err(json_input_error)?;
    mat_from_wire(&wire)
}

pub fn parse_lattice_spec(text: &str) -> Result<LatticeSpec> {
    let wire: LatticeSpecWire = serde_json::from_str(text).map_err(json_input_error)?;
    let generators = wire
        .generators
        .iter()
        .map(mat_from_wire)
        .collect::<Result<Vec<_>>>()?;
    for g in &generators {
        if g.rows() != wire.rank || g.cols() != wire.rank {
            return Err(Error::BadInput(format!(
                "generator is {}x{}, expected {2}x{2} from the declared rank",
                g.rows(),
                g.cols(),
                wire.rank,
            )));
        }
    }
    let action = match &wire.action {
        None => None,
        Some(mats) => {
            if mats.len() != generators.len() {
                return Err(Error::BadInput(format!(
                    "{} action matrices for {} generators",
                    mats.len(),
                    generators.len()
                )));
            }
            Some(mats.iter().map(mat_from_wire).collect::<Result<Vec<_>>>()?)
        }
    };
    Ok(LatticeSpec { rank: wire.rank, generators, action })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip_preserves_big_entries() {
        let mut m = IntMat::zero(2, 3);
        *m.at_mut(0, 0) = BigInt::from_str("-123456789012345678901234567890").unwrap();
        m.set_i64(1, 2, 7);
        let wire = mat_to_wire(&m);
        assert_eq!(mat_from_wire(&wire).unwrap(), m);
        let text = serde_json::to_string(&wire).unwrap();
        assert_eq!(parse_matrix(&text).unwrap(), m);
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let bad = MatWire { rows: 2, cols: 2, entries: vec![vec!["1".into(), "2".into()]] };
        assert!(mat_from_wire(&bad).is_err());
        let bad = MatWire {
            rows: 1,
            cols: 2,
            entries: vec![vec!["1".into(), "2".into(), "3".into()]],
        };
        assert!(mat_from_wire(&bad).is_err());
        let bad = MatWire { rows: 1, cols: 1, entries: vec![vec!["x".into()]] };
        assert!(mat_from_wire(&bad).is_err());
    }

    #[test]
    fn parse_error_reports_position() {
        let err = parse_matrix("{\"rows\": 1,").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("line"), "missing position info: {text}");
        assert!(text.contains("column"), "missing position info: {text}");
    }

    #[test]
    fn lattice_spec_with_separate_action_parses() {
        let text = r#"{
            "rank": 1,
            "generators": [{"rows":1,"cols":1,"entries":[["1"]]}],
            "action": [{"rows":2,"cols":2,"entries":[["0","1"],["1","0"]]}]
        }"#;
        let spec = parse_lattice_spec(text).unwrap();
        assert_eq!(spec.rank, 1);
        assert_eq!(spec.action.as_ref().unwrap()[0].rows(), 2);
    }

    #[test]
    fn generator_shape_must_match_declared_rank() {
        let text = r#"{
            "rank": 2,
            "generators": [{"rows":1,"cols":1,"entries":[["1"]]}]
        }"#;
        assert!(parse_lattice_spec(text).is_err());
    }
}
