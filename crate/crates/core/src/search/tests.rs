use super::*;
use crate::apikg::ApiKind;
use crate::enrich_api::RelationCategory;
use crate::fusion::{train_embeddings, EmbeddingConfig, FusionLink};
use crate::graphstore::Edge;

fn tp() -> &'static TextProcessor {
    static TP: std::sync::OnceLock<TextProcessor> = std::sync::OnceLock::new();
    TP.get_or_init(TextProcessor::default)
}

fn lead_ins() -> Vec<String> {
    SearchConfig::default().lead_ins
}

#[test]
fn query_parsing() {
    let p = parse_text_query(tp(), "how to insert an item in List with add()", &lead_ins()).unwrap();
    assert_eq!(p.task, Some(("insert an item".to_string(), "List".to_string())));
    let texts: Vec<&str> = p.mentions.iter().map(|m| m.text.as_str()).collect();
    assert_eq!(texts, vec!["List", "add()"]);
    assert_eq!(p.text, "insert an item in List with add()");

    let p = parse_text_query(tp(), "How do I remove an element at the given index?", &lead_ins()).unwrap();
    assert!(p.task.is_some());
    assert_eq!(p.text, "remove an element at the given index");

    // A lead-in must end at a word boundary.
    assert_eq!(strip_lead_in("how together", &lead_ins()), "how together");
    assert_eq!(strip_lead_in("What is HashMap", &lead_ins()), "HashMap");

    for q in ["", "   ", "how to", "???"] {
        assert!(matches!(parse_text_query(tp(), q, &lead_ins()), Err(SearchError::UnparsableQuery { .. })), "{q:?}");
    }
}

fn method(qn: &str, name: &str, container: &str, n: u32, sentence: &str) -> ApiEntity {
    let mut e = ApiEntity::new(
        ApiKind::Method,
        qn.into(),
        name.trim_end_matches("()").into(),
        ApiPacket::new(name, Some(container), Some(n)),
    );
    e.function_sentence = Some(sentence.into());
    e
}

fn task(id: &str, action: &str, object: &str, code: Option<&str>) -> TaskEntity {
    TaskEntity {
        id: id.into(),
        action: action.into(),
        object: object.into(),
        phrase: format!("{action} {object}"),
        notes: None,
        code_snippet: code.map(str::to_string),
        code_summary: None,
        api_packets: vec![],
        source: "doc#s".into(),
    }
}

struct Fx {
    engine: SearchEngine,
    list: String,
    add: String,
    remove: String,
    query: String,
    update: String,
}

fn fixture() -> Fx {
    let list = ApiEntity::new(ApiKind::Interface, "java.util.List".into(), "List".into(), ApiPacket::new("List", Some("java.util"), None));
    let add = method("java.util.List.add(int,E)", "add()", "java.util.List", 2, "Inserts the specified element at the specified position in this list.");
    let remove = method("java.util.List.remove(int)", "remove()", "java.util.List", 1, "Removes the element at the specified position in this list.");
    let stmt = ApiEntity::new(ApiKind::Interface, "java.sql.Statement".into(), "Statement".into(), ApiPacket::new("Statement", Some("java.sql"), None));
    let query = method("java.sql.Statement.executeQuery(String)", "executeQuery()", "java.sql.Statement", 1, "Executes the given SQL statement, which returns a single ResultSet object.");
    let update = method("java.sql.Statement.executeUpdate(String)", "executeUpdate()", "java.sql.Statement", 1, "Executes the given SQL statement, which may be an INSERT, UPDATE, or DELETE statement.");
    let mut g = KnowledgeGraph::new();
    for e in [&list, &add, &remove, &stmt, &query, &update] {
        g.put_node(Node::api(e.clone())).unwrap();
    }
    g.put_edge(Edge::new(&list.id, &add.id, Label::HasMethod)).unwrap();
    g.put_edge(Edge::new(&list.id, &remove.id, Label::HasMethod)).unwrap();
    g.put_edge(Edge::new(&stmt.id, &query.id, Label::HasMethod)).unwrap();
    g.put_edge(Edge::new(&stmt.id, &update.id, Label::HasMethod)).unwrap();
    g.put_edge(
        Edge::new(&update.id, &query.id, RelationCategory::FunctionReplace.label())
            .with_attr("evidence", "you call the executeUpdate() instead of executeQuery()"),
    )
    .unwrap();
    let tasks = [
        task("t:insert", "insert an element", "List", Some("List<String> xs = new ArrayList<>();\nxs.add(0, \"a\");")),
        task("t:remove", "remove an element", "List", None),
        task("t:update", "update the database", "table", Some("Statement st = conn.createStatement();\nst.executeUpdate(sql);")),
        task("t:read", "read the rows", "table", None),
    ];
    for t in &tasks {
        g.put_node(Node::task(t.clone())).unwrap();
    }
    for (t, api) in [("t:insert", &add.id), ("t:remove", &remove.id), ("t:update", &update.id), ("t:read", &query.id)] {
        let l = FusionLink {
            task: t.into(),
            api: api.clone(),
            via_packet: ApiPacket::new("x()", None, None),
            disambiguated: false,
        };
        g.put_edge(l.edge()).unwrap();
    }
    g.put_edge(Edge::new("t:insert", "t:remove", Label::Sibling)).unwrap();
    g.put_edge(Edge::new("t:update", "t:read", Label::TaskAlign).with_attr("score", "1.600000")).unwrap();
    let corpus: Vec<String> = [
        "insert an element into the list",
        "insert an item at the given position",
        "add an item to the list",
        "remove an element from the list",
        "update the database table",
        "read the rows of the table",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let model = train_embeddings(tp(), &corpus, &EmbeddingConfig { dim: 32, epochs: 60, ..Default::default() }).unwrap();
    let keywords = crate::resources::LexicalLists::shipped().code_keywords;
    Fx {
        engine: SearchEngine::new(g, model, TextProcessor::default(), keywords, SearchConfig::default()),
        list: list.id,
        add: add.id,
        remove: remove.id,
        query: query.id,
        update: update.id,
    }
}

#[test]
fn text_search() {
    let f = fixture();
    let r = f.engine.search_text("how to insert an item in List with add()").unwrap();
    assert_eq!(r.best_task.as_ref().unwrap().task.id, "t:insert");
    let ids: Vec<&str> = r.api_knowledge.iter().map(|k| k.entity.id.as_str()).collect();
    assert_eq!(ids, vec![f.list.as_str(), f.add.as_str()]);
    assert_eq!(r.api_knowledge[1].provenance, "mention");
    assert_eq!(r.related_tasks.len(), 1);
    assert_eq!((r.related_tasks[0].task.id.as_str(), r.related_tasks[0].relation.as_str()), ("t:remove", "sibling"));
    assert!(r.fragment.anchors.contains(&"t:insert".to_string()));
    assert!(r.fragment.nodes.iter().any(|n| n.id == f.add));

    let again = f.engine.search_text("how to insert an item in List with add()").unwrap();
    assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&again).unwrap());

    // Fused entities of the best task are reported when nothing was mentioned.
    let r = f.engine.search_text("remove an element from a list").unwrap();
    assert_eq!(r.best_task.unwrap().task.id, "t:remove");
    assert!(r.api_knowledge.iter().any(|k| k.entity.id == f.remove && k.provenance == "fused"));
}

#[test]
fn code_search() {
    let f = fixture();
    let code = "Statement st = conn.createStatement();\nResultSet rs = st.executeQuery(\"UPDATE t SET a = 1\");";
    let r = f.engine.search_code(code).unwrap();
    assert_eq!(r.api_knowledge[0].entity.id, f.query);
    assert_eq!(r.api_knowledge[0].provenance, "code");
    assert_eq!(r.best_task.unwrap().task.id, "t:read");
    let replace: Vec<_> = r.extended.iter().filter(|x| x.label == "FunctionReplace").collect();
    assert_eq!(replace.len(), 1);
    assert_eq!(replace[0].src.id, f.update);
    assert_eq!(replace[0].evidence.len(), 1);
    assert!(r.related_tasks.iter().any(|t| t.task.id == "t:update" && t.relation == "TaskAlign"));

    assert_eq!(f.engine.search_code("").unwrap_err(), SearchError::NoApiFound);
    assert_eq!(f.engine.search_code("int x = 1;").unwrap_err(), SearchError::NoApiFound);
}

#[test]
fn empty_graph_and_unknown_nodes() {
    let f = fixture();
    let empty = SearchEngine::new(KnowledgeGraph::new(), f.engine.model().clone(), TextProcessor::default(), vec![], SearchConfig::default());
    assert_eq!(empty.search_text("insert an element").unwrap_err(), SearchError::EmptyGraph);
    assert_eq!(empty.search_code("a.b();").unwrap_err(), SearchError::EmptyGraph);
    let err = f.engine.fragment("nope", 1, 10).unwrap_err();
    assert_eq!(err.code(), "UnknownNode");
}

#[test]
fn fragments() {
    let f = fixture();
    let g = f.engine.graph();
    let one = assemble_fragment(g, &[f.add.clone()], 1, 100).unwrap();
    let ids: BTreeSet<&str> = one.nodes.iter().map(|n| n.id.as_str()).collect();
    assert_eq!(ids, BTreeSet::from([f.add.as_str(), f.list.as_str(), "t:insert"]));
    assert_eq!(one.edges.len(), 2);
    for e in &one.edges {
        assert!(ids.contains(e.src.as_str()) && ids.contains(e.dst.as_str()));
    }

    let zero = assemble_fragment(g, &[f.add.clone(), f.update.clone()], 0, 0).unwrap();
    assert_eq!(zero.nodes.len(), 2);
    assert!(zero.edges.is_empty());

    let capped = assemble_fragment(g, &[f.list.clone()], 3, 2).unwrap();
    assert_eq!(capped.nodes.len(), 3);
    assert_eq!(capped, assemble_fragment(g, &[f.list.clone()], 3, 2).unwrap());

    let wide = assemble_fragment(g, &[f.list.clone()], 10, 1000).unwrap();
    assert!(wide.nodes.iter().all(|n| n.id != f.query));
}
