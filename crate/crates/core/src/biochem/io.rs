//! JSON model files.
//!
//! ```json
//! {"name": "toy", "m": 2, "n": 1,
//!  "F": [[0, 0, 1]], "R": [[1, 0, 1]], "w": [0.0, 0.5]}
//! ```
//!
//! `F` and `R` are lists of `[species, reaction, coefficient]` triplets with
//! 0-based indices; `w` has length `2n`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::network::ReactionNetwork;
use super::sparse::SparseIntMatrix;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model JSON at line {line}, column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("invalid field `{field}`: {reason}")]
    Schema { field: String, reason: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    name: String,
    m: usize,
    n: usize,
    #[serde(rename = "F")]
    forward: Vec<[i64; 3]>,
    #[serde(rename = "R")]
    reverse: Vec<[i64; 3]>,
    w: Vec<f64>,
}

fn schema(field: impl Into<String>, reason: impl Into<String>) -> ModelError {
    ModelError::Schema {
        field: field.into(),
        reason: reason.into(),
    }
}

fn triplets(label: &str, raw: &[[i64; 3]], m: usize, n: usize) -> Result<Vec<(usize, usize, u32)>, ModelError> {
    let mut out = Vec::with_capacity(raw.len());
    let mut seen = std::collections::HashSet::new();
    for (k, &[i, j, v]) in raw.iter().enumerate() {
        let field = format!("{label}[{k}]");
        if i < 0 || i as usize >= m {
            return Err(schema(field, format!("species index {i} outside 0..{m}")));
        }
        if j < 0 || j as usize >= n {
            return Err(schema(field, format!("reaction index {j} outside 0..{n}")));
        }
        if v < 0 {
            return Err(schema(field, format!("negative stoichiometry {v}")));
        }
        if v > u32::MAX as i64 {
            return Err(schema(field, format!("stoichiometry {v} too large")));
        }
        if !seen.insert((i, j)) {
            return Err(schema(field, format!("duplicate entry for ({i}, {j})")));
        }
        out.push((i as usize, j as usize, v as u32));
    }
    Ok(out)
}

/// Parses a model from JSON text.
pub fn parse_network(text: &str) -> Result<ReactionNetwork, ModelError> {
    let raw: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.m == 0 {
        return Err(schema("m", "must be positive"));
    }
    if raw.n == 0 {
        return Err(schema("n", "must be positive"));
    }
    if raw.w.len() != 2 * raw.n {
        return Err(schema("w", format!("length {} but 2n = {}", raw.w.len(), 2 * raw.n)));
    }
    if let Some(k) = raw.w.iter().position(|v| !v.is_finite()) {
        return Err(schema(format!("w[{k}]"), "not finite"));
    }
    let f = triplets("F", &raw.forward, raw.m, raw.n)?;
    let r = triplets("R", &raw.reverse, raw.m, raw.n)?;
    let net = ReactionNetwork::new(
        raw.name,
        SparseIntMatrix::from_triplets(raw.m, raw.n, &f),
        SparseIntMatrix::from_triplets(raw.m, raw.n, &r),
        raw.w,
    )
    .map_err(|e| schema("model", e.to_string()))?;
    for w in net.cardinality_warnings() {
        log::warn!("{}: {w}", net.name);
    }
    Ok(net)
}

pub fn to_json(net: &ReactionNetwork) -> String {
    let conv = |m: &SparseIntMatrix| -> Vec<[i64; 3]> {
        m.triplets().into_iter().map(|(i, j, v)| [i as i64, j as i64, v as i64]).collect()
    };
    let file = ModelFile {
        name: net.name.clone(),
        m: net.m(),
        n: net.n(),
        forward: conv(net.forward()),
        reverse: conv(net.reverse()),
        w: net.w().to_vec(),
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

pub fn load_network(path: impl AsRef<Path>) -> Result<ReactionNetwork, ModelError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_network(&text)
}

pub fn save_network(net: &ReactionNetwork, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    fs::write(path, to_json(net)).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biochem::generator::{generate_network, GeneratorConfig};

    const TOY: &str = r#"{"name": "toy", "m": 2, "n": 1,
        "F": [[0, 0, 1]], "R": [[1, 0, 1]], "w": [0.0, 0.5]}"#;

    fn field_of(err: ModelError) -> String {
        match err {
            ModelError::Schema { field, .. } => field,
            other => panic!("expected a schema error, got {other}"),
        }
    }

    #[test]
    fn parses_toy() {
        let net = parse_network(TOY).unwrap();
        assert_eq!((net.m(), net.n()), (2, 1));
        assert_eq!(net.forward().get(0, 0), 1);
        assert_eq!(net.reverse().get(1, 0), 1);
        assert_eq!(net.w(), &[0.0, 0.5]);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let neg = TOY.replace("[[1, 0, 1]]", "[[1, 0, -2]]");
        assert_eq!(field_of(parse_network(&neg).unwrap_err()), "R[0]");
        let short = TOY.replace("[0.0, 0.5]", "[0.0]");
        assert_eq!(field_of(parse_network(&short).unwrap_err()), "w");
        let oob = TOY.replace("[[0, 0, 1]]", "[[0, 0, 1], [5, 0, 1]]");
        assert_eq!(field_of(parse_network(&oob).unwrap_err()), "F[1]");
        let dup = TOY.replace("[[0, 0, 1]]", "[[0, 0, 1], [0, 0, 2]]");
        assert_eq!(field_of(parse_network(&dup).unwrap_err()), "F[1]");
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_network("{\"name\": \"x\",\n \"m\": oops}").unwrap_err();
        assert!(matches!(err, ModelError::Json { line: 2, .. }), "{err}");
        let err = parse_network(&TOY.replace("\"w\"", "\"weights\"")).unwrap_err();
        assert!(matches!(err, ModelError::Json { .. }));
    }

    #[test]
    fn cardinality_problems_do_not_reject() {
        let text = r#"{"name": "lonely", "m": 2, "n": 1, "F": [[0, 0, 1]], "R": [[0, 0, 2]], "w": [0, 0]}"#;
        let net = parse_network(text).unwrap();
        assert!(!net.cardinality_warnings().is_empty());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let net = generate_network(15, 20, 3, &GeneratorConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        save_network(&net, &path).unwrap();
        let back = load_network(&path).unwrap();
        assert_eq!(back, net);
        assert_eq!(to_json(&back), to_json(&net));
    }
}
