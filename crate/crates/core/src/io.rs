//! JSON formats for graphs, connections and element tuples.
//!
//! A connection file looks like
//!
//! ```json
//! {
//!   "group": "S3",
//!   "graph": {"vertices": ["m"], "base": "m", "edges": [{"name": "a", "from": "m", "to": "m"}]},
//!   "values": {"a": "(123)"}
//! }
//! ```
//!
//! where `graph` may instead be a path to a graph file, resolved relative to
//! the connection file.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec};
use crate::path::{Graph, GraphFile};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphRef {
    Inline(GraphFile),
    Path(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub graph: GraphRef,
    pub values: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TupleFile {
    Bare(Vec<Value>),
    Tagged {
        #[serde(default)]
        group: Option<String>,
        base: Vec<Value>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn load_graph(path: &Path) -> Result<Graph> {
    let file: GraphFile = parse_json(path, &read(path)?)?;
    Graph::from_file(&file).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Resolves the group of a file: an explicit `spec` wins, otherwise the
/// file's `group` field is required.
fn resolve_group(path: &Path, declared: Option<&str>, spec: Option<&GroupSpec>) -> Result<GroupSpec> {
    match (spec, declared) {
        (Some(s), Some(d)) => {
            let named = GroupSpec::from_name(d)?;
            if named != *s {
                return Err(Error::SpecMismatch(format!(
                    "{} declares group {d}, but {s} was requested",
                    path.display()
                )));
            }
            Ok(s.clone())
        }
        (Some(s), None) => Ok(s.clone()),
        (None, Some(d)) => GroupSpec::from_name(d),
        (None, None) => Err(Error::Parse(format!("{}: no `group` field and no group given", path.display()))),
    }
}

pub fn connection_from_file(file: &ConnectionFile, dir: &Path, origin: &Path, spec: Option<&GroupSpec>) -> Result<Connection> {
    let spec = resolve_group(origin, file.group.as_deref(), spec)?;
    let graph = match &file.graph {
        GraphRef::Inline(g) => Graph::from_file(g).map_err(|e| Error::Parse(format!("{}: graph: {e}", origin.display())))?,
        GraphRef::Path(p) => load_graph(&dir.join(p))?,
    };
    for name in file.values.keys() {
        if graph.edge_index(name).is_none() {
            return Err(Error::Parse(format!("{}: values.{name}: no such edge", origin.display())));
        }
    }
    let values = graph
        .edges()
        .iter()
        .map(|e| {
            let v = file
                .values
                .get(&e.name)
                .ok_or_else(|| Error::Parse(format!("{}: values.{}: missing", origin.display(), e.name)))?;
            spec.parse_element(v)
                .map_err(|err| Error::Parse(format!("{}: values.{}: {err}", origin.display(), e.name)))
        })
        .collect::<Result<Vec<_>>>()?;
    Connection::new(spec, Arc::new(graph), values)
}

pub fn load_connection(path: &Path, spec: Option<&GroupSpec>) -> Result<Connection> {
    let file: ConnectionFile = parse_json(path, &read(path)?)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    connection_from_file(&file, &dir, path, spec)
}

pub fn connection_to_file(c: &Connection) -> ConnectionFile {
    let spec = c.spec();
    ConnectionFile {
        group: Some(spec.to_string()),
        graph: GraphRef::Inline(c.graph().to_file()),
        values: c
            .graph()
            .edges()
            .iter()
            .zip(c.values())
            .map(|(e, g)| (e.name.clone(), spec.element_to_json(g)))
            .collect(),
    }
}

/// Reads a tuple `[lit, lit, ...]` or `{"group": .., "base": [...]}`.
pub fn load_tuple(path: &Path, spec: Option<&GroupSpec>) -> Result<(GroupSpec, Vec<GroupElement>)> {
    let file: TupleFile = parse_json(path, &read(path)?)?;
    let (declared, raw) = match file {
        TupleFile::Bare(v) => (None, v),
        TupleFile::Tagged { group, base } => (group, base),
    };
    let spec = resolve_group(path, declared.as_deref(), spec)?;
    let tuple = raw
        .iter()
        .enumerate()
        .map(|(i, v)| {
            spec.parse_element(v)
                .map_err(|e| Error::Parse(format!("{}: base[{i}]: {e}", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((spec, tuple))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Quat;

    #[test]
    fn connection_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = GroupSpec::Su2;
        let c = Connection::bouquet(spec.clone(), vec![GroupElement::Su2(Quat::I), GroupElement::Su2(Quat::ONE)]).unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, serde_json::to_string(&connection_to_file(&c)).unwrap()).unwrap();
        let back = load_connection(&path, None).unwrap();
        assert_eq!(back, c);
        assert!(load_connection(&path, Some(&GroupSpec::s3())).is_err());
    }

    #[test]
    fn graph_by_path_and_diagnostics() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("g.json"),
            r#"{"vertices": ["m", "v"], "base": "m", "edges": [{"name": "t", "from": "m", "to": "v"}, {"name": "l", "from": "v", "to": "v"}]}"#,
        )
        .unwrap();
        let conn = dir.path().join("c.json");
        std::fs::write(&conn, r#"{"group": "S3", "graph": "g.json", "values": {"t": 0, "l": "(13)"}}"#).unwrap();
        let c = load_connection(&conn, None).unwrap();
        assert_eq!(c.values()[1], GroupElement::Finite(2));

        std::fs::write(&conn, r#"{"group": "S3", "graph": "g.json", "values": {"t": 0, "l": "(14)"}}"#).unwrap();
        let err = load_connection(&conn, None).unwrap_err().to_string();
        assert!(err.contains("values.l"), "{err}");

        std::fs::write(&conn, "{\"group\": \"S3\",\n  \"graph\": }").unwrap();
        let err = load_connection(&conn, None).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");

        std::fs::write(&conn, r#"{"group": "S3", "graph": "g.json", "values": {"t": 0}}"#).unwrap();
        assert!(load_connection(&conn, None).unwrap_err().to_string().contains("missing"));
    }

    #[test]
    fn tuples() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        std::fs::write(&p, r#"[[0, 1, 0, 0], [0, 0, 1, 0]]"#).unwrap();
        let (spec, t) = load_tuple(&p, Some(&GroupSpec::Su2)).unwrap();
        assert_eq!(spec, GroupSpec::Su2);
        assert_eq!(t, vec![GroupElement::Su2(Quat::I), GroupElement::Su2(Quat::J)]);
        std::fs::write(&p, r#"{"group": "S3", "base": ["(12)", "(123)"]}"#).unwrap();
        assert_eq!(load_tuple(&p, None).unwrap().1.len(), 2);
    }
}
