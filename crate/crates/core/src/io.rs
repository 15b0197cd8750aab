//! Network document serialization.
//!
//! A network is stored as a single JSON object:
//!
//! ```json
//! {
//!   "version": 1,
//!   "bond_dim": 2,
//!   "num_vertices": 2,
//!   "edges": [[0, 0, 1, 0]],
//!   "tensors": [
//!     {"vertex": 0, "entries": [[1.0, 0.0], [2.0, 0.0]]},
//!     {"vertex": 1, "entries": [[3.0, 0.0], [4.0, 0.0]]}
//!   ]
//! }
//! ```
//!
//! Each edge is `[v, p, w, q]`: endpoint ports `(v, p)` and `(w, q)`. Tensor
//! entries are `[re, im]` pairs in row-major port order (port 0 slowest).
//! Floats are written in scientific notation with 18 significant digits, so
//! every f64 round-trips losslessly and re-saving a loaded document
//! reproduces it byte for byte.

use num_complex::Complex64;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::network::{Edge, PortRef, TensorNetwork};
use crate::tensor::Tensor;

/// Current document version.
pub const FORMAT_VERSION: u64 = 1;

fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.17e}")
    } else {
        // Non-finite entries are rejected on save; unreachable but total.
        format!("{x}")
    }
}

/// Serializes a network to the canonical document text.
pub fn save_tn(tn: &TensorNetwork) -> Result<String> {
    for (v, t) in tn.tensors().iter().enumerate() {
        for (k, e) in t.entries().iter().enumerate() {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::Schema {
                    location: format!("tensors[{v}].entries[{k}]"),
                    message: "non-finite entry cannot be serialized".into(),
                });
            }
        }
    }
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"version\": {},\n", FORMAT_VERSION));
    out.push_str(&format!("  \"bond_dim\": {},\n", tn.bond_dim()));
    out.push_str(&format!("  \"num_vertices\": {},\n", tn.num_vertices()));
    out.push_str("  \"edges\": [");
    for (i, e) in tn.edges().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&format!(
            "[{}, {}, {}, {}]",
            e.a.vertex, e.a.port, e.b.vertex, e.b.port
        ));
    }
    out.push_str("],\n");
    out.push_str("  \"tensors\": [\n");
    for (v, t) in tn.tensors().iter().enumerate() {
        out.push_str(&format!("    {{\"vertex\": {v}, \"entries\": ["));
        for (k, e) in t.entries().iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!("[{}, {}]", fmt_f64(e.re), fmt_f64(e.im)));
        }
        out.push_str("]}");
        if v + 1 < tn.num_vertices() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    Ok(out)
}

fn get_u64(obj: &serde_json::Map<String, Value>, key: &str, location: &str) -> Result<u64> {
    obj.get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Schema {
            location: format!("{location}.{key}"),
            message: "missing or non-integer field".into(),
        })
}

/// Parses and validates a network document.
pub fn load_tn(text: &str) -> Result<TensorNetwork> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::Document(format!("invalid JSON: {e}")))?;
    let obj = doc.as_object().ok_or_else(|| Error::Schema {
        location: "$".into(),
        message: "document root must be an object".into(),
    })?;
    let version = get_u64(obj, "version", "$")?;
    if version != FORMAT_VERSION {
        return Err(Error::Schema {
            location: "$.version".into(),
            message: format!("unsupported version {version}, expected {FORMAT_VERSION}"),
        });
    }
    let bond_dim = get_u64(obj, "bond_dim", "$")? as usize;
    let num_vertices = get_u64(obj, "num_vertices", "$")? as usize;

    let edges_val = obj
        .get("edges")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Schema {
            location: "$.edges".into(),
            message: "missing or non-array field".into(),
        })?;
    let mut edges = Vec::with_capacity(edges_val.len());
    for (i, ev) in edges_val.iter().enumerate() {
        let quad = ev.as_array().ok_or_else(|| Error::Schema {
            location: format!("$.edges[{i}]"),
            message: "edge must be an array [v, p, w, q]".into(),
        })?;
        if quad.len() != 4 {
            return Err(Error::Schema {
                location: format!("$.edges[{i}]"),
                message: format!("edge must have 4 components, found {}", quad.len()),
            });
        }
        let mut parts = [0usize; 4];
        for (k, q) in quad.iter().enumerate() {
            parts[k] = q.as_u64().ok_or_else(|| Error::Schema {
                location: format!("$.edges[{i}][{k}]"),
                message: "edge component must be a non-negative integer".into(),
            })? as usize;
        }
        edges.push(Edge::new(
            PortRef::new(parts[0], parts[1]),
            PortRef::new(parts[2], parts[3]),
        ));
    }

    let tensors_val = obj
        .get("tensors")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Schema {
            location: "$.tensors".into(),
            message: "missing or non-array field".into(),
        })?;
    let mut slots: Vec<Option<Vec<Complex64>>> = vec![None; num_vertices];
    for (i, tv) in tensors_val.iter().enumerate() {
        let tobj = tv.as_object().ok_or_else(|| Error::Schema {
            location: format!("$.tensors[{i}]"),
            message: "tensor must be an object".into(),
        })?;
        let vertex = get_u64(tobj, "vertex", &format!("$.tensors[{i}]"))? as usize;
        if vertex >= num_vertices {
            return Err(Error::Schema {
                location: format!("$.tensors[{i}].vertex"),
                message: format!("vertex {vertex} out of range ({num_vertices} vertices)"),
            });
        }
        if slots[vertex].is_some() {
            return Err(Error::Schema {
                location: format!("$.tensors[{i}].vertex"),
                message: format!("duplicate tensor for vertex {vertex}"),
            });
        }
        let entries_val = tobj
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Schema {
                location: format!("$.tensors[{i}].entries"),
                message: "missing or non-array field".into(),
            })?;
        let mut entries = Vec::with_capacity(entries_val.len());
        for (k, pair) in entries_val.iter().enumerate() {
            let loc = format!("$.tensors[{i}].entries[{k}]");
            let pair = pair.as_array().ok_or_else(|| Error::Schema {
                location: loc.clone(),
                message: "entry must be a [re, im] pair".into(),
            })?;
            if pair.len() != 2 {
                return Err(Error::Schema {
                    location: loc,
                    message: format!("entry must have 2 components, found {}", pair.len()),
                });
            }
            let mut comps = [0.0f64; 2];
            for (j, c) in pair.iter().enumerate() {
                comps[j] = c.as_f64().ok_or_else(|| Error::Schema {
                    location: format!("{loc}[{j}]"),
                    message: "entry component must be a number".into(),
                })?;
            }
            entries.push(Complex64::new(comps[0], comps[1]));
        }
        slots[vertex] = Some(entries);
    }

    // Determine each vertex's rank from the edge list, then check lengths.
    let mut degrees = vec![0usize; num_vertices];
    for e in &edges {
        for end in [e.a, e.b] {
            if end.vertex < num_vertices {
                degrees[end.vertex] += 1;
            }
        }
    }
    let mut tensors = Vec::with_capacity(num_vertices);
    for (v, slot) in slots.into_iter().enumerate() {
        let entries = slot.ok_or_else(|| Error::Schema {
            location: "$.tensors".into(),
            message: format!("missing tensor for vertex {v}"),
        })?;
        let t = Tensor::new(bond_dim, degrees[v], entries).map_err(|e| Error::Schema {
            location: format!("$.tensors (vertex {v})"),
            message: e.to_string(),
        })?;
        tensors.push(t);
    }
    TensorNetwork::new(bond_dim, edges, tensors)
}
