//! File formats. All rationals travel as strings in lowest terms with the
//! sign on the numerator (`"3/2"`, `"-1/3"`, `"2"`); map keys are decimal
//! vertex ids. Parsers are liberal about non-reduced rationals, emitters
//! always canonical, so emitted values round-trip unchanged.
//!
//! * tree: `{ "root": 0, "children": { "0": [1, 2], ... } }`
//! * radius labelling: `{ "0": "3/2", "1": "1/2", ... }`
//! * boundary measure: `{ "3": "1/4", "4": "1/4", ... }`
//! * metric space: `{ "points": ["p", ...], "dist": [["0", "1/2", ...], ...] }`
//! * walk: `{ "p": { "0": { "1": "1/2", ... }, ... } }`
//! * radius distribution: `{ "kind": "standard" }` or
//!   `{ "kind": "table", "cdf": [["1/2", "1/4"], ...] }`
//! * operators: `{ "leaves": [ids], "entries": [[row], ...] }`, row-major,
//!   entries rational strings (exact mode) or numbers (float mode).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::boundary::{LeafMatrix, SigmaMeasure};
use crate::error::Error;
use crate::ratio::{fmt_rat, parse_rat, Rat};
use crate::tree::{Tree, TreeDescription, UltrametricElement, UltrametricSpace, Vertex};
use crate::walk::{BoundaryMeasure, Walk};
use crate::Result;

fn parse_error(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

fn parse_id(s: &str) -> Result<Vertex> {
    s.parse::<Vertex>().map_err(|_| Error::Parse(format!("bad vertex id {s:?}")))
}

#[derive(Debug, Serialize, Deserialize)]
struct TreeFile {
    root: Vertex,
    children: BTreeMap<String, Vec<Vertex>>,
}

/// Parse and validate a tree file.
pub fn parse_tree(input: &str, allow_unary: bool) -> Result<Tree> {
    let file: TreeFile = serde_json::from_str(input).map_err(parse_error)?;
    let mut children = BTreeMap::new();
    for (k, v) in file.children {
        children.insert(parse_id(&k)?, v);
    }
    Tree::build(&TreeDescription { root: file.root, children, allow_unary })
}

pub fn emit_tree(tree: &Tree) -> Value {
    let children: BTreeMap<String, Vec<Vertex>> = tree
        .interior_vertices()
        .map(|v| (v.to_string(), tree.children(v).to_vec()))
        .collect();
    serde_json::json!({ "root": tree.root(), "children": children })
}

/// Parse a radius labelling (bare map vertex id -> rational) against a tree.
pub fn parse_phi(input: &str, tree: &Tree) -> Result<UltrametricElement> {
    let raw: BTreeMap<String, String> = serde_json::from_str(input).map_err(parse_error)?;
    let mut values = BTreeMap::new();
    for (k, v) in raw {
        values.insert(parse_id(&k)?, parse_rat(&v)?);
    }
    UltrametricElement::new(tree, values)
}

pub fn emit_phi(phi: &UltrametricElement) -> Value {
    let map: BTreeMap<String, String> =
        phi.iter().map(|(v, r)| (v.to_string(), fmt_rat(r))).collect();
    serde_json::json!(map)
}

/// Parse a boundary measure (bare map leaf id -> rational) against a tree.
pub fn parse_mu(input: &str, tree: &Tree) -> Result<BoundaryMeasure> {
    let raw: BTreeMap<String, String> = serde_json::from_str(input).map_err(parse_error)?;
    let mut map = BTreeMap::new();
    for (k, v) in raw {
        map.insert(parse_id(&k)?, parse_rat(&v)?);
    }
    BoundaryMeasure::from_map(tree, &map)
}

pub fn emit_mu(tree: &Tree, mu: &BoundaryMeasure) -> Value {
    let map: BTreeMap<String, String> =
        mu.to_map(tree).into_iter().map(|(v, r)| (v.to_string(), fmt_rat(&r))).collect();
    serde_json::json!(map)
}

#[derive(Debug, Serialize, Deserialize)]
struct SpaceFile {
    points: Vec<String>,
    dist: Vec<Vec<String>>,
}

/// Parse and validate an ultrametric space file.
pub fn parse_space(input: &str) -> Result<UltrametricSpace> {
    let file: SpaceFile = serde_json::from_str(input).map_err(parse_error)?;
    let mut dist = Vec::with_capacity(file.dist.len());
    for row in &file.dist {
        let mut out = Vec::with_capacity(row.len());
        for s in row {
            out.push(parse_rat(s)?);
        }
        dist.push(out);
    }
    UltrametricSpace::new(file.points, dist)
}

pub fn emit_space(space: &UltrametricSpace) -> Value {
    let dist: Vec<Vec<String>> =
        space.dist.iter().map(|row| row.iter().map(fmt_rat).collect()).collect();
    serde_json::json!({ "points": space.points, "dist": dist })
}

#[derive(Debug, Serialize, Deserialize)]
struct WalkFile {
    p: BTreeMap<String, BTreeMap<String, String>>,
}

/// Parse transition rows without a tree (syntax + rational checks only).
/// Used by the front ends to separate parse errors from semantic ones.
pub fn parse_walk_rows(input: &str) -> Result<BTreeMap<Vertex, BTreeMap<Vertex, Rat>>> {
    let file: WalkFile = serde_json::from_str(input).map_err(parse_error)?;
    let mut rows = BTreeMap::new();
    for (x, row) in file.p {
        let mut out = BTreeMap::new();
        for (y, p) in row {
            out.insert(parse_id(&y)?, parse_rat(&p)?);
        }
        rows.insert(parse_id(&x)?, out);
    }
    Ok(rows)
}

/// Parse and validate a walk file against a tree.
pub fn parse_walk(input: &str, tree: Tree) -> Result<Walk> {
    let rows = parse_walk_rows(input)?;
    Walk::new(tree, &rows)
}

pub fn emit_walk(walk: &Walk) -> Value {
    let p: BTreeMap<String, BTreeMap<String, String>> = walk
        .to_map()
        .into_iter()
        .map(|(x, row)| {
            (
                x.to_string(),
                row.into_iter().map(|(y, q)| (y.to_string(), fmt_rat(&q))).collect(),
            )
        })
        .collect();
    serde_json::json!({ "p": p })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SigmaFile {
    Standard,
    Table { cdf: Vec<(String, String)> },
}

/// Parse a radius distribution file.
pub fn parse_sigma(input: &str) -> Result<SigmaMeasure> {
    let file: SigmaFile = serde_json::from_str(input).map_err(parse_error)?;
    match file {
        SigmaFile::Standard => Ok(SigmaMeasure::standard()),
        SigmaFile::Table { cdf } => {
            let mut entries = Vec::with_capacity(cdf.len());
            for (r, v) in cdf {
                entries.push((parse_rat(&r)?, parse_rat(&v)?));
            }
            SigmaMeasure::tabulated(entries)
        }
    }
}

pub fn emit_sigma(sigma: &SigmaMeasure) -> Value {
    match sigma {
        SigmaMeasure::Standard => serde_json::json!({ "kind": "standard" }),
        SigmaMeasure::Tabulated(entries) => {
            let cdf: Vec<(String, String)> =
                entries.iter().map(|(r, v)| (fmt_rat(r), fmt_rat(v))).collect();
            serde_json::json!({ "kind": "table", "cdf": cdf })
        }
    }
}

/// Dense operator with exact rational entries.
pub fn emit_operator_exact(m: &LeafMatrix<Rat>) -> Value {
    let entries: Vec<Vec<String>> =
        m.rows().iter().map(|row| row.iter().map(fmt_rat).collect()).collect();
    serde_json::json!({ "leaves": m.leaves, "entries": entries })
}

/// Dense operator with binary64 entries.
pub fn emit_operator_float(m: &LeafMatrix<f64>) -> Value {
    serde_json::json!({ "leaves": m.leaves, "entries": m.rows() })
}

/// Pretty or compact JSON to a string.
pub fn to_string(value: &Value, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(value).expect("serializable")
    } else {
        serde_json::to_string(value).expect("serializable")
    }
}
