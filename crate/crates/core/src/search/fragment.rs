use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::SearchError;
use crate::graphstore::{Direction, Family, KnowledgeGraph, Node};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeRef {
    pub id: String,
    pub family: Family,
    pub display: String,
}

impl NodeRef {
    pub fn of(node: &Node) -> Self {
        NodeRef {
            id: node.id.clone(),
            family: node.family(),
            display: node.display(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FragmentEdge {
    pub src: String,
    pub dst: String,
    pub label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFragment {
    pub anchors: Vec<String>,
    pub nodes: Vec<NodeRef>,
    pub edges: Vec<FragmentEdge>,
}

/// Breadth-first neighbourhood of `anchors` up to `radius` hops, with the
/// edges induced on it. Anchors are always kept; at most `budget` other
/// nodes are added, nearest first and in neighbour order within a hop.
pub fn assemble_fragment(graph: &KnowledgeGraph, anchors: &[String], radius: usize, budget: usize) -> Result<GraphFragment, SearchError> {
    let mut kept: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    for a in anchors {
        if !graph.contains(a) {
            return Err(SearchError::UnknownNode { id: a.clone() });
        }
        if seen.insert(a.clone()) {
            kept.push(a.clone());
            queue.push_back((a.clone(), 0));
        }
    }
    let anchors: Vec<String> = kept.clone();
    let mut added = 0;
    'bfs: while let Some((id, depth)) = queue.pop_front() {
        if depth >= radius {
            continue;
        }
        for (_, other) in graph.neighbors(&id, None, Direction::Both)? {
            if added >= budget {
                break 'bfs;
            }
            if seen.insert(other.id.clone()) {
                kept.push(other.id.clone());
                added += 1;
                queue.push_back((other.id.clone(), depth + 1));
            }
        }
    }

    let mut nodes: Vec<NodeRef> = kept.iter().filter_map(|id| graph.node(id)).map(NodeRef::of).collect();
    nodes.sort();
    let mut edges = BTreeSet::new();
    for id in &kept {
        for (e, other) in graph.neighbors(id, None, Direction::Out)? {
            if seen.contains(&other.id) {
                edges.insert(FragmentEdge {
                    src: e.src,
                    dst: e.dst,
                    label: e.label.as_str().to_string(),
                });
            }
        }
    }
    Ok(GraphFragment {
        anchors,
        nodes,
        edges: edges.into_iter().collect(),
    })
}
