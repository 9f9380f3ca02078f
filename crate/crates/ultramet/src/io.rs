//! Textual file formats shared by the CLI and the fuzz targets.
//!
//! Three JSON-shaped formats, all built from the printable grammars so that
//! every file the tool writes re-parses to the same object:
//!
//! * space file: `{"field":{"backend":"padic","prime":2},"weights":["1","2^-1/2"]}`
//! * vectors file: an array of vectors, each an array of scalar strings
//! * subspace file: `{"span":[[...],[...]]}` with the same vector encoding
//!
//! Parsers reject unknown keys and anything the scalar or magnitude grammars
//! reject; all such failures surface as [`Error::Parse`].

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::magnitude::Magnitude;
use crate::scalar::FieldDescriptor;
use crate::space::{Subspace, Vector, WeightedSpace};

/// First 120 characters of the offending input, for error messages.
fn snippet(text: &str) -> String {
    let mut s: String = text.chars().take(120).collect();
    if s.len() < text.len() {
        s.push_str("...");
    }
    s
}

fn json_err(what: &'static str, text: &str, err: serde_json::Error) -> Error {
    Error::Parse {
        what,
        input: snippet(text),
        reason: err.to_string(),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    field: FieldDescriptor,
    weights: Vec<Magnitude>,
}

/// Parses a space file. The field descriptor is validated (primality, no
/// tail order on the rational backend) and the weights must be positive
/// magnitudes, so the result is always a usable space.
pub fn parse_space(text: &str) -> Result<WeightedSpace> {
    let file: SpaceFile =
        serde_json::from_str(text).map_err(|e| json_err("space file", text, e))?;
    WeightedSpace::new(file.field, file.weights)
}

/// Serializes a space in the file format. `parse_space` inverts this.
pub fn space_json(space: &WeightedSpace) -> String {
    serde_json::to_string_pretty(space).expect("space serialization is infallible")
}

fn vectors_from_rows(rows: &[Vec<String>], space: &WeightedSpace) -> Result<Vec<Vector>> {
    rows.iter()
        .map(|row| {
            let coords = row
                .iter()
                .map(|s| space.field().parse_scalar(s))
                .collect::<Result<Vec<_>>>()?;
            let v = Vector::new(coords);
            space.check_vector(&v)?;
            Ok(v)
        })
        .collect()
}

/// Parses a vectors file against a space: every row must have the space's
/// dimension and every entry must parse in the space's field.
pub fn parse_vectors(text: &str, space: &WeightedSpace) -> Result<Vec<Vector>> {
    let rows: Vec<Vec<String>> =
        serde_json::from_str(text).map_err(|e| json_err("vectors file", text, e))?;
    vectors_from_rows(&rows, space)
}

/// Serializes vectors in the file format. `parse_vectors` inverts this.
pub fn vectors_json(vectors: &[Vector]) -> String {
    serde_json::to_string_pretty(vectors).expect("vector serialization is infallible")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SubspaceFile {
    span: Vec<Vec<String>>,
}

/// Parses a subspace file against a space. The span is reduced on
/// construction, so the result is ready for distance and membership queries.
pub fn parse_subspace(text: &str, space: &WeightedSpace) -> Result<Subspace> {
    let file: SubspaceFile =
        serde_json::from_str(text).map_err(|e| json_err("subspace file", text, e))?;
    let span = vectors_from_rows(&file.span, space)?;
    Subspace::new(space.clone(), span)
}

/// Serializes a subspace's span in the file format. `parse_subspace`
/// inverts this up to re-reduction of the span.
pub fn subspace_json(sub: &Subspace) -> String {
    serde_json::to_string_pretty(&serde_json::json!({ "span": sub.span() }))
        .expect("subspace serialization is infallible")
}
