//! The JSON scenario document: parsing with located errors and canonical
//! serialization.
//!
//! Layout:
//!
//! ```json
//! {
//!   "bundle": {
//!     "fibers": [{"dim": 1, "vertex": 0}, …],
//!     "transports": [{"edge": [0, 1], "matrix": [[2.0e0]], "inverse": [[5.0e-1]]}, …]
//!   },
//!   "cochains": {"alpha": {"degree": 1, "kind": "vector", "values": [{"simplex": [0, 1], "value": [1.0e0]}]}},
//!   "complex": {"cells": [[0, 1], [0, 2], [1, 2]]},
//!   "format": 1,
//!   "gauge": [{"matrix": [[1.0e0]], "vertex": 0}, …],
//!   "metric": [{"matrix": [[1.0e0]], "vertex": 0}, …]
//! }
//! ```
//!
//! Edge `[i, j]` (ascending) carries `U_ij : E_j → E_i`. The optional
//! `inverse` is a declared `U_ji`, checked by `dvbc check`. Cochain kinds are
//! `scalar` (numbers), `vector` (vectors in the fiber of the lowest vertex) and
//! `hom` (matrices `dim(lowest) × dim(highest)`).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use dvbc_core::{
    Bundle, GaugeTransform, HomCochain, Metric, ScalarCochain, SimplexKey, SimplicialComplex,
    Tolerance, VBCochain, Vertex,
};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::{json, Map, Number, Value};
use thiserror::Error;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid document at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{key}: {message}")]
    Semantic { key: String, message: String },
}

fn semantic(key: impl Into<String>, message: impl std::fmt::Display) -> ParseError {
    ParseError::Semantic {
        key: key.into(),
        message: message.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NamedCochain {
    Scalar(ScalarCochain),
    Vector(VBCochain),
    Hom(HomCochain),
}

impl NamedCochain {
    pub fn kind(&self) -> &'static str {
        match self {
            NamedCochain::Scalar(_) => "scalar",
            NamedCochain::Vector(_) => "vector",
            NamedCochain::Hom(_) => "hom",
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            NamedCochain::Scalar(c) => c.degree(),
            NamedCochain::Vector(c) => c.degree(),
            NamedCochain::Hom(c) => c.degree(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Document {
    pub complex: Option<Arc<SimplicialComplex>>,
    pub bundle: Option<Arc<Bundle>>,
    /// Declared `U_ji` per stored edge `(i, j)`, when the file carries one.
    pub inverses: BTreeMap<(Vertex, Vertex), DMatrix<f64>>,
    pub metric: Option<Metric>,
    pub cochains: BTreeMap<String, NamedCochain>,
    pub gauge: Option<GaugeTransform>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    format: u64,
    complex: Option<RawComplex>,
    bundle: Option<RawBundle>,
    metric: Option<Vec<RawVertexMatrix>>,
    cochains: Option<BTreeMap<String, RawCochain>>,
    gauge: Option<Vec<RawVertexMatrix>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComplex {
    cells: Vec<Vec<Vertex>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBundle {
    fibers: Vec<RawFiber>,
    transports: Vec<RawTransport>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFiber {
    vertex: Vertex,
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransport {
    edge: Vec<Vertex>,
    matrix: Vec<Vec<f64>>,
    inverse: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVertexMatrix {
    vertex: Vertex,
    matrix: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawKind {
    Scalar,
    Vector,
    Hom,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCochain {
    kind: RawKind,
    degree: usize,
    values: Vec<RawEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    simplex: Vec<Vertex>,
    value: Value,
}

/// Parses with the default tolerance (used for metric validation).
pub fn parse(text: &str) -> Result<Document, ParseError> {
    parse_with(text, &Tolerance::default())
}

pub fn parse_with(text: &str, tol: &Tolerance) -> Result<Document, ParseError> {
    let raw: RawDocument = serde_json::from_str(text).map_err(|e| {
        let (line, column, message) = (e.line(), e.column(), e.to_string());
        match e.classify() {
            serde_json::error::Category::Data => ParseError::Schema {
                line,
                column,
                message,
            },
            _ => ParseError::Syntax {
                line,
                column,
                message,
            },
        }
    })?;
    build(raw, tol)
}

fn matrix(rows: &[Vec<f64>], key: &str) -> Result<DMatrix<f64>, ParseError> {
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || ncols == 0 {
        return Err(semantic(
            key,
            "matrix must have at least one row and one column",
        ));
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(semantic(
                key,
                format!("row {r} has {} entries, expected {ncols}", row.len()),
            ));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

fn expect_shape(m: &DMatrix<f64>, shape: (usize, usize), key: &str) -> Result<(), ParseError> {
    if m.shape() != shape {
        return Err(semantic(
            key,
            format!(
                "shape {}×{}, expected {}×{}",
                m.nrows(),
                m.ncols(),
                shape.0,
                shape.1
            ),
        ));
    }
    Ok(())
}

fn build(raw: RawDocument, tol: &Tolerance) -> Result<Document, ParseError> {
    if raw.format != FORMAT_VERSION {
        return Err(semantic(
            "format",
            format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                raw.format
            ),
        ));
    }
    let mut doc = Document::default();
    if let Some(c) = raw.complex {
        for (i, cell) in c.cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(semantic(format!("complex.cells[{i}]"), "empty cell"));
            }
        }
        let x =
            SimplicialComplex::from_cells(&c.cells).map_err(|e| semantic("complex.cells", e))?;
        doc.complex = Some(Arc::new(x));
    }
    if let Some(b) = raw.bundle {
        let x = doc
            .complex
            .clone()
            .ok_or_else(|| semantic("bundle", "requires a complex section"))?;
        let (bundle, inverses) = build_bundle(x, b)?;
        doc.bundle = Some(Arc::new(bundle));
        doc.inverses = inverses;
    }
    if let Some(entries) = raw.metric {
        let bundle = doc
            .bundle
            .clone()
            .ok_or_else(|| semantic("metric", "requires a bundle section"))?;
        let grams = vertex_matrices(&entries, &bundle, "metric")?;
        doc.metric = Some(Metric::new(grams, tol).map_err(|e| semantic("metric", e))?);
    }
    if let Some(entries) = raw.gauge {
        let bundle = doc
            .bundle
            .clone()
            .ok_or_else(|| semantic("gauge", "requires a bundle section"))?;
        let g = vertex_matrices(&entries, &bundle, "gauge")?;
        doc.gauge = Some(GaugeTransform::new(g).map_err(|e| semantic("gauge", e))?);
    }
    for (name, c) in raw.cochains.unwrap_or_default() {
        let cochain = build_cochain(&doc, &name, c)?;
        doc.cochains.insert(name, cochain);
    }
    Ok(doc)
}

/// Declared inverses keyed by stored edge.
type Inverses = BTreeMap<(Vertex, Vertex), DMatrix<f64>>;

fn build_bundle(
    x: Arc<SimplicialComplex>,
    raw: RawBundle,
) -> Result<(Bundle, Inverses), ParseError> {
    let mut dims = BTreeMap::new();
    for (i, f) in raw.fibers.iter().enumerate() {
        let key = format!("bundle.fibers[{i}]");
        if !x.has_vertex(f.vertex) {
            return Err(semantic(
                key,
                format!("vertex {} is not in the complex", f.vertex),
            ));
        }
        if f.dim == 0 {
            return Err(semantic(key, "fiber dimension must be at least 1"));
        }
        if dims.insert(f.vertex, f.dim).is_some() {
            return Err(semantic(
                key,
                format!("duplicate fiber for vertex {}", f.vertex),
            ));
        }
    }
    if let Some(v) = x.vertices().find(|v| !dims.contains_key(v)) {
        return Err(semantic(
            "bundle.fibers",
            format!("missing fiber for vertex {v}"),
        ));
    }
    let mut transports = BTreeMap::new();
    let mut inverses = BTreeMap::new();
    for (t, entry) in raw.transports.iter().enumerate() {
        let key = format!("bundle.transports[{t}]");
        let (i, j) = match entry.edge[..] {
            [i, j] if i < j => (i, j),
            _ => {
                return Err(semantic(
                    format!("{key}.edge"),
                    "edge must be two ascending vertices",
                ))
            }
        };
        if !x.has_edge(i, j) {
            return Err(semantic(
                format!("{key}.edge"),
                format!("[{i},{j}] is not an edge of the complex"),
            ));
        }
        let mkey = format!("{key}.matrix");
        let m = matrix(&entry.matrix, &mkey)?;
        expect_shape(&m, (dims[&i], dims[&j]), &mkey)?;
        if let Some(inv) = &entry.inverse {
            let ikey = format!("{key}.inverse");
            let inv = matrix(inv, &ikey)?;
            expect_shape(&inv, (dims[&j], dims[&i]), &ikey)?;
            inverses.insert((i, j), inv);
        }
        if transports.insert((i, j), m).is_some() {
            return Err(semantic(
                key,
                format!("duplicate transport for edge [{i},{j}]"),
            ));
        }
    }
    if let Some((i, j)) = x.edges().find(|e| !transports.contains_key(e)) {
        return Err(semantic(
            "bundle.transports",
            format!("missing transport for edge [{i},{j}]"),
        ));
    }
    let bundle = Bundle::new(x, dims, transports).map_err(|e| semantic("bundle.transports", e))?;
    Ok((bundle, inverses))
}

fn vertex_matrices(
    entries: &[RawVertexMatrix],
    bundle: &Bundle,
    section: &str,
) -> Result<BTreeMap<Vertex, DMatrix<f64>>, ParseError> {
    let mut out = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        let key = format!("{section}[{i}]");
        if !bundle.complex().has_vertex(e.vertex) {
            return Err(semantic(
                key,
                format!("vertex {} is not in the complex", e.vertex),
            ));
        }
        let mkey = format!("{key}.matrix");
        let m = matrix(&e.matrix, &mkey)?;
        let d = bundle.dim(e.vertex);
        expect_shape(&m, (d, d), &mkey)?;
        if out.insert(e.vertex, m).is_some() {
            return Err(semantic(
                key,
                format!("duplicate entry for vertex {}", e.vertex),
            ));
        }
    }
    if let Some(v) = bundle.complex().vertices().find(|v| !out.contains_key(v)) {
        return Err(semantic(section, format!("missing matrix for vertex {v}")));
    }
    Ok(out)
}

fn build_cochain(doc: &Document, name: &str, raw: RawCochain) -> Result<NamedCochain, ParseError> {
    let base = format!("cochains.{name}");
    let x = doc
        .complex
        .clone()
        .ok_or_else(|| semantic(&base, "requires a complex section"))?;
    let bundle =
        match raw.kind {
            RawKind::Scalar => None,
            RawKind::Vector | RawKind::Hom => Some(doc.bundle.clone().ok_or_else(|| {
                semantic(&base, "bundle-valued cochains require a bundle section")
            })?),
        };
    if raw.degree > x.dimension() {
        return Err(semantic(
            format!("{base}.degree"),
            format!(
                "degree {} exceeds the complex dimension {}",
                raw.degree,
                x.dimension()
            ),
        ));
    }
    let mut scalars = BTreeMap::new();
    let mut vectors = BTreeMap::new();
    let mut matrices = BTreeMap::new();
    for (i, entry) in raw.values.into_iter().enumerate() {
        let key = format!("{base}.values[{i}]");
        let simplex = SimplexKey::new(entry.simplex.clone())
            .map_err(|e| semantic(format!("{key}.simplex"), e))?;
        if simplex.dim() != raw.degree {
            return Err(semantic(
                format!("{key}.simplex"),
                format!(
                    "{simplex} has dimension {}, expected {}",
                    simplex.dim(),
                    raw.degree
                ),
            ));
        }
        if !x.contains(&simplex) {
            return Err(semantic(
                format!("{key}.simplex"),
                format!("{simplex} is not a simplex of the complex"),
            ));
        }
        let vkey = format!("{key}.value");
        let duplicate = match raw.kind {
            RawKind::Scalar => {
                let v: f64 = serde_json::from_value(entry.value)
                    .map_err(|e| semantic(&vkey, format!("expected a number ({e})")))?;
                scalars.insert(simplex.clone(), v).is_some()
            }
            RawKind::Vector => {
                let v: Vec<f64> = serde_json::from_value(entry.value)
                    .map_err(|e| semantic(&vkey, format!("expected an array of numbers ({e})")))?;
                let n = bundle
                    .as_ref()
                    .expect("checked above")
                    .dim(simplex.lowest());
                if v.len() != n {
                    return Err(semantic(&vkey, format!("length {}, expected {n}", v.len())));
                }
                vectors
                    .insert(simplex.clone(), DVector::from_vec(v))
                    .is_some()
            }
            RawKind::Hom => {
                let rows: Vec<Vec<f64>> = serde_json::from_value(entry.value)
                    .map_err(|e| semantic(&vkey, format!("expected a matrix ({e})")))?;
                let m = matrix(&rows, &vkey)?;
                let b = bundle.as_ref().expect("checked above");
                expect_shape(
                    &m,
                    (b.dim(simplex.lowest()), b.dim(simplex.highest())),
                    &vkey,
                )?;
                matrices.insert(simplex.clone(), m).is_some()
            }
        };
        if duplicate {
            return Err(semantic(key, format!("duplicate value for {simplex}")));
        }
    }
    let wrap = |e: dvbc_core::CochainError| semantic(&base, e);
    Ok(match raw.kind {
        RawKind::Scalar => {
            NamedCochain::Scalar(ScalarCochain::new(x, raw.degree, scalars).map_err(wrap)?)
        }
        RawKind::Vector => NamedCochain::Vector(
            VBCochain::new(bundle.expect("vector kind"), raw.degree, vectors).map_err(wrap)?,
        ),
        RawKind::Hom => NamedCochain::Hom(
            HomCochain::new(bundle.expect("hom kind"), raw.degree, matrices).map_err(wrap)?,
        ),
    })
}

fn float(x: f64) -> Value {
    // Non-finite values cannot be represented; they never survive validation.
    Value::Number(Number::from_f64(x).unwrap_or_else(|| Number::from(0)))
}

fn matrix_value(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|&x| float(x)).collect()))
            .collect(),
    )
}

fn simplex_value(k: &SimplexKey) -> Value {
    json!(k.vertices())
}

fn vertex_matrices_value(ms: &BTreeMap<Vertex, DMatrix<f64>>) -> Value {
    Value::Array(
        ms.iter()
            .map(|(v, m)| json!({"vertex": v, "matrix": matrix_value(m)}))
            .collect(),
    )
}

fn cochain_value(c: &NamedCochain) -> Value {
    let values: Vec<Value> = match c {
        NamedCochain::Scalar(s) => s
            .values()
            .iter()
            .map(|(k, &v)| json!({"simplex": simplex_value(k), "value": float(v)}))
            .collect(),
        NamedCochain::Vector(a) => a
            .values()
            .iter()
            .map(|(k, v)| {
                let v: Vec<Value> = v.iter().map(|&x| float(x)).collect();
                json!({"simplex": simplex_value(k), "value": v})
            })
            .collect(),
        NamedCochain::Hom(h) => h
            .values()
            .iter()
            .map(|(k, m)| json!({"simplex": simplex_value(k), "value": matrix_value(m)}))
            .collect(),
    };
    json!({"kind": c.kind(), "degree": c.degree(), "values": values})
}

impl Document {
    /// The document as a JSON value with canonically ordered content.
    pub fn to_value(&self) -> Value {
        let mut root = Map::new();
        root.insert("format".into(), json!(FORMAT_VERSION));
        if let Some(x) = &self.complex {
            let cells: Vec<Value> = x.maximal_simplices().iter().map(simplex_value).collect();
            root.insert("complex".into(), json!({"cells": cells}));
        }
        if let Some(b) = &self.bundle {
            let fibers: Vec<Value> = b
                .dims()
                .iter()
                .map(|(v, d)| json!({"vertex": v, "dim": d}))
                .collect();
            let transports: Vec<Value> = b
                .stored_transports()
                .iter()
                .map(|(&(i, j), m)| {
                    let mut t = Map::new();
                    t.insert("edge".into(), json!([i, j]));
                    t.insert("matrix".into(), matrix_value(m));
                    if let Some(inv) = self.inverses.get(&(i, j)) {
                        t.insert("inverse".into(), matrix_value(inv));
                    }
                    Value::Object(t)
                })
                .collect();
            root.insert(
                "bundle".into(),
                json!({"fibers": fibers, "transports": transports}),
            );
        }
        if let Some(m) = &self.metric {
            root.insert("metric".into(), vertex_matrices_value(m.grams()));
        }
        if let Some(g) = &self.gauge {
            root.insert("gauge".into(), vertex_matrices_value(g.matrices()));
        }
        if !self.cochains.is_empty() {
            let cochains: Map<String, Value> = self
                .cochains
                .iter()
                .map(|(name, c)| (name.clone(), cochain_value(c)))
                .collect();
            root.insert("cochains".into(), Value::Object(cochains));
        }
        Value::Object(root)
    }

    /// Canonical text: sorted keys, two-space indentation, floats with 17
    /// significant digits, trailing newline.
    pub fn serialize(&self) -> String {
        to_canonical_string(&self.to_value())
    }
}

/// Renders any JSON value in the canonical layout.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

/// Scalars, vectors and matrices print on one line; so do objects built
/// from them.
fn is_inline(v: &Value) -> bool {
    match v {
        Value::Array(a) => a
            .iter()
            .all(|x| is_scalar(x) || x.as_array().is_some_and(|r| r.iter().all(is_scalar))),
        Value::Object(o) => o
            .values()
            .all(|x| is_scalar(x) || (x.is_array() && is_inline(x))),
        _ => true,
    }
}

fn is_scalar(v: &Value) -> bool {
    !v.is_array() && !v.is_object()
}

fn write_number(out: &mut String, n: &Number) {
    if let Some(u) = n.as_u64() {
        write!(out, "{u}").expect("write to string");
    } else if let Some(i) = n.as_i64() {
        write!(out, "{i}").expect("write to string");
    } else {
        write!(out, "{:.16e}", n.as_f64().expect("finite")).expect("write to string");
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Object(o) if o.is_empty() => out.push_str("{}"),
        Value::Array(a) if is_inline(v) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, x, indent);
            }
            out.push(']');
        }
        Value::Object(o) if is_inline(v) => {
            out.push('{');
            for (i, (k, x)) in o.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, indent);
            }
            out.push('}');
        }
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, x, indent + 2);
                if i + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(o) => {
            out.push_str("{\n");
            for (i, (k, x)) in o.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, indent + 2);
                if i + 1 < o.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(out, indent);
            out.push('}');
        }
    }
}
