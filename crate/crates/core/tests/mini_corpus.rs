//! Checks of the built mini corpus against independent recomputation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use apitask_kg::graphstore::{Edge, KnowledgeGraph, Label};
use apitask_kg::pipeline::{GraphStats, Pipeline, PipelineConfig};
use apitask_kg::search::SearchEngine;

struct Built {
    _dir: tempfile::TempDir,
    graph: KnowledgeGraph,
    engine: SearchEngine,
}

fn mini() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/mini"))
}

fn built() -> &'static Built {
    static B: OnceLock<Built> = OnceLock::new();
    B.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = PipelineConfig::load(&mini().join("pipeline.toml")).unwrap();
        cfg.file.output.dir = dir.path().display().to_string();
        cfg.file.output.snapshot = None;
        let pipeline = Pipeline::new(cfg).unwrap();
        pipeline.run_all().unwrap();
        let graph = KnowledgeGraph::load(&pipeline.cfg.snapshot_path()).unwrap();
        let engine = pipeline.engine(None, None).unwrap();
        Built { _dir: dir, graph, engine }
    })
}

fn expand(id: &str) -> String {
    if id.starts_with("task:") {
        id.to_string()
    } else {
        format!("{id}@{}", &hex::encode(Sha256::digest(id.as_bytes()))[..8])
    }
}

#[test]
fn stats_agree_with_the_manifest() {
    let text = std::fs::read_to_string(mini().join("expected.txt")).unwrap();
    let (mut apis, mut tasks) = (0, 0);
    let mut labels: BTreeMap<String, usize> = BTreeMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
        let parts: Vec<&str> = line.split(' ').collect();
        match parts[0] {
            "node" if parts[1].starts_with("task:") => tasks += 1,
            "node" => apis += 1,
            _ => *labels.entry(parts[3].to_string()).or_default() += 1,
        }
    }
    let stats = GraphStats::of(&built().graph);
    assert_eq!(stats.api_entities, apis);
    assert_eq!(stats.task_entities, tasks);
    assert_eq!(stats.fusion_links, labels.get("FusionLink").copied().unwrap_or(0));
    for (label, n) in &stats.edges {
        assert_eq!(*n, labels.get(label).copied().unwrap_or(0), "{label}");
    }
    let semantic: usize = stats.api_semantic.values().chain(stats.task_semantic.values()).sum();
    let expected: usize = Label::ALL.iter().filter(|l| l.is_semantic()).map(|l| labels.get(l.as_str()).copied().unwrap_or(0)).sum();
    assert_eq!(semantic, expected);
    assert!(built().graph.node("java.util.List").is_none());
    assert!(built().graph.contains(&expand("java.util.List")));
}

fn adjacency(edges: &[Edge]) -> BTreeMap<&str, BTreeSet<&str>> {
    let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for e in edges {
        adj.entry(&e.src).or_default().insert(&e.dst);
        adj.entry(&e.dst).or_default().insert(&e.src);
    }
    adj
}

/// Hop distance from `start` to every node within `radius`.
fn distances<'a>(adj: &BTreeMap<&'a str, BTreeSet<&'a str>>, start: &'a str, radius: usize) -> BTreeMap<&'a str, usize> {
    let mut dist = BTreeMap::from([(start, 0)]);
    let mut queue = VecDeque::from([start]);
    while let Some(id) = queue.pop_front() {
        let d = dist[id];
        if d == radius {
            continue;
        }
        for &n in adj.get(id).into_iter().flatten() {
            if !dist.contains_key(n) {
                dist.insert(n, d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

#[test]
fn fragments_match_a_breadth_first_oracle() {
    let b = built();
    let edges: Vec<Edge> = b.graph.edges().collect();
    let adj = adjacency(&edges);
    for node in b.graph.nodes() {
        for radius in 0..=2 {
            let dist = distances(&adj, &node.id, radius);
            let full = b.engine.fragment(&node.id, radius, 10_000).unwrap();
            let ids: BTreeSet<&str> = full.nodes.iter().map(|n| n.id.as_str()).collect();
            assert_eq!(ids, dist.keys().copied().collect(), "{} radius {radius}", node.id);
            let induced: BTreeSet<(&str, &str, &str)> = edges
                .iter()
                .filter(|e| ids.contains(e.src.as_str()) && ids.contains(e.dst.as_str()))
                .map(|e| (e.src.as_str(), e.dst.as_str(), e.label.as_str()))
                .collect();
            let got: BTreeSet<(&str, &str, &str)> = full.edges.iter().map(|e| (e.src.as_str(), e.dst.as_str(), e.label.as_str())).collect();
            assert_eq!(got, induced, "{} radius {radius}", node.id);

            // A budget keeps the nearest nodes.
            for budget in [0, 1, 3] {
                let cut = b.engine.fragment(&node.id, radius, budget).unwrap();
                let kept: BTreeSet<&str> = cut.nodes.iter().map(|n| n.id.as_str()).collect();
                assert_eq!(kept.len(), dist.len().min(budget + 1));
                assert!(kept.contains(node.id.as_str()));
                let farthest_kept = kept.iter().map(|id| dist[id]).max().unwrap();
                let nearest_dropped = dist.iter().filter(|(id, _)| !kept.contains(*id)).map(|(_, d)| *d).min();
                assert!(nearest_dropped.is_none_or(|d| d >= farthest_kept), "{} budget {budget}", node.id);
            }
        }
    }
}

#[test]
fn extended_knowledge_lists_incident_semantic_edges() {
    let b = built();
    let edges: Vec<Edge> = b.graph.edges().collect();
    for node in b.graph.nodes() {
        let got: Vec<(String, String, String)> = b
            .engine
            .extended(std::slice::from_ref(&node.id))
            .unwrap()
            .into_iter()
            .map(|x| (x.src.id, x.dst.id, x.label))
            .collect();
        let unique: BTreeSet<_> = got.iter().cloned().collect();
        assert_eq!(unique.len(), got.len(), "{}", node.id);
        let expected: BTreeSet<(String, String, String)> = edges
            .iter()
            .filter(|e| e.label.is_semantic() && (e.src == node.id || e.dst == node.id))
            .map(|e| (e.src.clone(), e.dst.clone(), e.label.as_str().to_string()))
            .collect();
        assert_eq!(unique, expected, "{}", node.id);
    }
}

#[test]
fn search_results_reference_graph_content() {
    let b = built();
    for q in ["how to insert an item in List with add()", "remove an element from a List", "update rows in a table"] {
        let r = b.engine.search_text(q).unwrap();
        let best = r.best_task.expect("a task");
        assert!(b.graph.contains(&best.task.id));
        for k in &r.api_knowledge {
            assert!(b.graph.contains(&k.entity.id), "{q}: {}", k.entity.id);
        }
        for x in &r.extended {
            assert!(b.graph.edges().any(|e| e.src == x.src.id && e.dst == x.dst.id && e.label.as_str() == x.label), "{q}");
        }
        for n in &r.fragment.nodes {
            assert!(b.graph.contains(&n.id));
        }
    }
}
