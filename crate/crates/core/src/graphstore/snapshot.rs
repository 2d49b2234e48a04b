//! Snapshot file format (UTF-8, one record per line, tab-separated fields,
//! each field percent-escaped):
//!
//! ```text
//! APITASK-KG  1  corpus=<sha256>  config=<sha256>  tool=<version>
//! N  <id>  <Api|Task>  <entity json>
//! E  <src>  <dst>  <label>  <key>=<value> ...
//! END  <node count>  <edge count>
//! ```
//!
//! Node records are sorted by id, edge records by (src, dst, label). The
//! trailing `END` record detects truncation.

use std::path::Path;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};

use super::{BuildMetadata, Edge, EdgeKey, GraphError, KnowledgeGraph, Label, Node, Payload};

pub const MAGIC: &str = "APITASK-KG";
pub const FORMAT_VERSION: &str = "1";

const ESCAPED: &AsciiSet = &CONTROLS.add(b'%').add(b'=');

fn esc(s: &str) -> String {
    utf8_percent_encode(s, ESCAPED).to_string()
}

fn unesc(s: &str, line: usize) -> Result<String, GraphError> {
    percent_decode_str(s)
        .decode_utf8()
        .map(|c| c.into_owned())
        .map_err(|e| corrupt(line, format!("bad escape: {e}")))
}

fn corrupt(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::CorruptSnapshot {
        line,
        message: message.into(),
    }
}

impl KnowledgeGraph {
    /// Canonical serialization; identical graphs give identical strings.
    pub fn to_snapshot_string(&self) -> String {
        let m = &self.metadata;
        let mut out = format!(
            "{MAGIC}\t{FORMAT_VERSION}\tcorpus={}\tconfig={}\ttool={}\n",
            esc(&m.corpus_hash),
            esc(&m.config_hash),
            esc(&m.tool_version)
        );
        for node in self.nodes.values() {
            let json = match &node.payload {
                Payload::Api(e) => serde_json::to_string(e),
                Payload::Task(t) => serde_json::to_string(t),
            }
            .expect("entities serialize");
            out.push_str(&format!("N\t{}\t{}\t{}\n", esc(&node.id), node.family().as_str(), esc(&json)));
        }
        for (k, attrs) in &self.edges {
            out.push_str(&format!("E\t{}\t{}\t{}", esc(&k.src), esc(&k.dst), k.label));
            for (key, value) in attrs {
                out.push_str(&format!("\t{}={}", esc(key), esc(value)));
            }
            out.push('\n');
        }
        out.push_str(&format!("END\t{}\t{}\n", self.nodes.len(), self.edges.len()));
        out
    }

    pub fn from_snapshot_str(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.split_terminator('\n').enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or_else(|| corrupt(1, "empty file"))?;
        let fields: Vec<&str> = header.split('\t').collect();
        if fields.first() != Some(&MAGIC) {
            return Err(corrupt(1, "missing snapshot header"));
        }
        match fields.get(1) {
            Some(&FORMAT_VERSION) => {}
            found => {
                return Err(GraphError::VersionMismatch {
                    found: found.unwrap_or(&"").to_string(),
                    expected: FORMAT_VERSION.to_string(),
                })
            }
        }
        let meta_field = |i: usize, key: &str| -> Result<String, GraphError> {
            let raw = fields
                .get(i)
                .and_then(|f| f.strip_prefix(key))
                .ok_or_else(|| corrupt(1, format!("missing header field {key}")))?;
            unesc(raw, 1)
        };
        let mut g = KnowledgeGraph {
            metadata: BuildMetadata {
                corpus_hash: meta_field(2, "corpus=")?,
                config_hash: meta_field(3, "config=")?,
                tool_version: meta_field(4, "tool=")?,
            },
            ..Default::default()
        };

        let mut last_node: Option<String> = None;
        let mut last_edge: Option<EdgeKey> = None;
        let mut ended = false;
        for (line, l) in lines {
            if ended {
                return Err(corrupt(line, "record after END"));
            }
            let f: Vec<&str> = l.split('\t').collect();
            match f[0] {
                "N" => {
                    if f.len() != 4 || last_edge.is_some() {
                        return Err(corrupt(line, "malformed node record"));
                    }
                    let id = unesc(f[1], line)?;
                    let json = unesc(f[3], line)?;
                    let payload = match f[2] {
                        "Api" => Payload::Api(serde_json::from_str(&json).map_err(|e| corrupt(line, e.to_string()))?),
                        "Task" => Payload::Task(serde_json::from_str(&json).map_err(|e| corrupt(line, e.to_string()))?),
                        other => return Err(corrupt(line, format!("unknown family {other:?}"))),
                    };
                    let node = Node { id, payload };
                    let payload_id = match &node.payload {
                        Payload::Api(e) => &e.id,
                        Payload::Task(t) => &t.id,
                    };
                    if *payload_id != node.id {
                        return Err(corrupt(line, "record id differs from payload id"));
                    }
                    if last_node.as_ref().is_some_and(|p| *p >= node.id) {
                        return Err(corrupt(line, "node records out of order"));
                    }
                    last_node = Some(node.id.clone());
                    g.put_node(node).map_err(|e| corrupt(line, e.to_string()))?;
                }
                "E" => {
                    if f.len() < 4 {
                        return Err(corrupt(line, "malformed edge record"));
                    }
                    let label: Label = f[3].parse().map_err(|e: GraphError| corrupt(line, e.to_string()))?;
                    let mut edge = Edge::new(&unesc(f[1], line)?, &unesc(f[2], line)?, label);
                    if edge.src != unesc(f[1], line)? {
                        return Err(corrupt(line, "symmetric edge not in canonical order"));
                    }
                    for kv in &f[4..] {
                        let (k, v) = kv.split_once('=').ok_or_else(|| corrupt(line, "attribute without '='"))?;
                        edge.attrs.insert(unesc(k, line)?, unesc(v, line)?);
                    }
                    let key = edge.key();
                    if last_edge.as_ref().is_some_and(|p| *p >= key) {
                        return Err(corrupt(line, "edge records out of order"));
                    }
                    last_edge = Some(key);
                    g.put_edge(edge).map_err(|e| corrupt(line, e.to_string()))?;
                }
                "END" => {
                    let counts = (f.get(1).and_then(|n| n.parse::<usize>().ok()), f.get(2).and_then(|n| n.parse::<usize>().ok()));
                    if counts != (Some(g.node_count()), Some(g.edge_count())) || f.len() != 3 {
                        return Err(corrupt(line, "record counts do not match END"));
                    }
                    ended = true;
                }
                other => return Err(corrupt(line, format!("unknown record kind {other:?}"))),
            }
        }
        if !ended {
            let n = text.split_terminator('\n').count();
            return Err(corrupt(n + 1, "missing END record (truncated file)"));
        }
        Ok(g)
    }

    pub fn save(&self, path: &Path) -> Result<(), GraphError> {
        std::fs::write(path, self.to_snapshot_string()).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_snapshot_str(&text)
    }
}
