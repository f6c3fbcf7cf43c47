//! Text formats: excursion CSV, tree JSON and chain CSV.
//!
//! Floats in CSV are written with 17 significant digits, so a write/read
//! round trip is exact. Metadata travels as `# key=value` comment lines in
//! CSV and as a `meta` object in JSON.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dynamics::{ChainTrajectory, Record};
use crate::error::{Error, Result};
use crate::excursion::Excursion;
use crate::rtree::{Atom, Edge, PointRef, Tree, WeightedTree};

/// Key/value pairs written ahead of the data.
pub type Meta = Vec<(String, String)>;

/// `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_meta(out: &mut String, meta: &Meta) {
    for (k, v) in meta {
        let v = v.replace('\n', " ");
        writeln!(out, "# {k}={v}").unwrap();
    }
}

pub fn excursion_to_csv(e: &Excursion, meta: &Meta) -> String {
    let mut out = String::new();
    write_meta(&mut out, meta);
    out.push_str("t,value\n");
    for (t, v) in e.times().iter().zip(e.values()) {
        writeln!(out, "{},{}", fmt_f64(*t), fmt_f64(*v)).unwrap();
    }
    out
}

/// Parses an excursion CSV, returning the path and its metadata.
pub fn excursion_from_csv(text: &str) -> Result<(Excursion, Meta)> {
    let mut meta = Meta::new();
    let mut header = false;
    let (mut ts, mut vs) = (Vec::new(), Vec::new());
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some((k, v)) = c.trim().split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        if !header {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols != ["t", "value"] {
                return Err(Error::Parse(format!(
                    "line {}: expected header `t,value`",
                    no + 1
                )));
            }
            header = true;
            continue;
        }
        let (t, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected two columns", no + 1)))?;
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: `{}`: {e}", no + 1, s.trim())))
        };
        ts.push(num(t)?);
        vs.push(num(v)?);
    }
    if !header {
        return Err(Error::Parse("missing header `t,value`".into()));
    }
    Ok((Excursion::new(ts, vs)?, meta))
}

#[derive(Serialize, Deserialize)]
struct VertexJson {
    id: i64,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    a: i64,
    b: i64,
    len: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AtJson {
    Vertex { vertex: i64 },
    Edge { edge: i64, offset: f64 },
}

#[derive(Serialize, Deserialize)]
struct WeightJson {
    at: AtJson,
    mass: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<Value>,
    vertices: Vec<VertexJson>,
    edges: Vec<EdgeJson>,
    weights: Vec<WeightJson>,
    root: Option<i64>,
}

/// Pretty JSON for a weighted tree; `meta` goes first when given.
pub fn tree_to_json(t: &WeightedTree, meta: Option<Value>) -> String {
    let tree = t.tree();
    let doc = TreeJson {
        meta,
        vertices: (0..tree.num_vertices())
            .map(|i| VertexJson { id: i as i64 })
            .collect(),
        edges: tree
            .edges()
            .iter()
            .map(|e| EdgeJson {
                a: e.a as i64,
                b: e.b as i64,
                len: e.len,
            })
            .collect(),
        weights: t
            .atoms()
            .iter()
            .map(|a| WeightJson {
                at: match a.at {
                    PointRef::Vertex(v) => AtJson::Vertex { vertex: v as i64 },
                    PointRef::Edge { edge, offset } => AtJson::Edge {
                        edge: edge as i64,
                        offset,
                    },
                },
                mass: a.mass,
            })
            .collect(),
        root: tree.root().map(|r| r as i64),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("tree JSON serializes");
    s.push('\n');
    s
}

/// Parses tree JSON. Vertex ids may be any distinct integers.
pub fn tree_from_json(text: &str) -> Result<(WeightedTree, Option<Value>)> {
    let doc: TreeJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut index = HashMap::with_capacity(doc.vertices.len());
    for (i, v) in doc.vertices.iter().enumerate() {
        if index.insert(v.id, i).is_some() {
            return Err(Error::InvalidTree(format!("duplicate vertex id {}", v.id)));
        }
    }
    let vid = |id: i64| {
        index
            .get(&id)
            .copied()
            .ok_or_else(|| Error::InvalidTree(format!("unknown vertex id {id}")))
    };
    let edges = doc
        .edges
        .iter()
        .map(|e| {
            Ok(Edge {
                a: vid(e.a)?,
                b: vid(e.b)?,
                len: e.len,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let root = doc.root.map(vid).transpose()?;
    let tree = Tree::new(doc.vertices.len(), edges, root)?;
    let atoms = doc
        .weights
        .iter()
        .map(|w| {
            let at = match w.at {
                AtJson::Vertex { vertex } => PointRef::Vertex(vid(vertex)?),
                AtJson::Edge { edge, offset } => PointRef::Edge {
                    edge: usize::try_from(edge)
                        .map_err(|_| Error::InvalidPoint(format!("edge {edge}")))?,
                    offset,
                },
            };
            Ok(Atom { at, mass: w.mass })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((WeightedTree::new(tree, atoms)?, doc.meta))
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn chain_row(out: &mut String, i: usize, time: f64, r: &Record) {
    writeln!(
        out,
        "{i},{},{},{},{},{}",
        fmt_f64(time),
        opt(r.mean_dist),
        opt(r.height),
        opt(r.diameter),
        fmt_f64(r.total_length)
    )
    .unwrap();
}

/// Chain CSV; row 0 is the initial state and unrequested observables are
/// left empty.
pub fn chain_to_csv(traj: &ChainTrajectory, meta: &Meta) -> String {
    let mut out = String::new();
    write_meta(&mut out, meta);
    out.push_str("jump_index,time,mean_dist,height,diameter,total_length\n");
    chain_row(&mut out, 0, 0.0, &traj.initial);
    for (k, (t, r)) in traj.times.iter().zip(&traj.records).enumerate() {
        chain_row(&mut out, k + 1, *t, r);
    }
    out
}
