use super::*;
use crate::textproc::{TextProcessor, VerbPhrase};

fn tp() -> &'static TextProcessor {
    static TP: std::sync::OnceLock<TextProcessor> = std::sync::OnceLock::new();
    TP.get_or_init(TextProcessor::default)
}

fn classifier() -> &'static LinearClassifier {
    static C: std::sync::OnceLock<LinearClassifier> = std::sync::OnceLock::new();
    C.get_or_init(|| LinearClassifier::shipped(tp()))
}

fn types() -> TypeTable {
    TypeTable::from_qualified_names([
        "java.util.List",
        "java.util.ArrayList",
        "java.util.SortedMap",
        "java.util.TreeMap",
        "java.sql.Statement",
        "java.sql.ResultSet",
    ])
}

fn phrase(text: &str) -> VerbPhrase {
    let s = &tp().sentences(text)[0];
    tp().extract_verb_phrases(s).into_iter().next().expect("verb phrase")
}

#[test]
fn classifier_examples() {
    assert!(classifier().score(&phrase("Convert Set to List")).unwrap() >= 0.5);
    assert!(classifier().score(&phrase("pass the set as parameter to addAll()")).unwrap() < 0.5);
    let empty = VerbPhrase { tokens: vec![] };
    assert_eq!(classifier().score(&empty), Err(TaskKgError::EmptyPhrase));
}

#[test]
fn rule_classifier() {
    let rules = RuleClassifier::new(["convert", "remove"]);
    assert_eq!(rules.score(&phrase("Convert Set to List")).unwrap(), 1.0);
    assert_eq!(rules.score(&phrase("Removes the element")).unwrap(), 1.0);
    assert_eq!(rules.score(&phrase("pass the set as parameter to addAll()")).unwrap(), 0.0);
}

#[test]
fn chunking_examples() {
    assert_eq!(
        chunk_action_object(&phrase("Reads a single character")).unwrap(),
        ("reads".to_string(), "a single character".to_string())
    );
    assert_eq!(
        chunk_action_object(&phrase("Remove element from Collection")).unwrap(),
        ("remove element".to_string(), "Collection".to_string())
    );
    assert!(matches!(
        chunk_action_object(&phrase("sort")),
        Err(TaskKgError::NoPatternMatch { .. })
    ));
}

fn packets(sentence: &str, snippet: Option<&str>) -> Vec<ApiPacket> {
    let marked = crate::textproc::strip_code_markup(sentence);
    let s = &tp().sentences(&marked.text)[0];
    extract_api_packets(tp(), s, &marked.code_spans, snippet, &types(), &[])
}

#[test]
fn packets_resolved_from_snippet() {
    let p = packets(
        "Use <code>add()</code> to append.",
        Some("List<String> list = new ArrayList<>();\nlist.add(\"element\");"),
    );
    assert_eq!(p, vec![ApiPacket::new("add()", Some("java.util.List"), Some(1))]);

    let p = packets(
        "Call <code>put()</code> on it.",
        Some("SortedMap<String, String> sortedMap = new TreeMap<>();\nsortedMap.put(\"a\", \"one\");"),
    );
    assert_eq!(p, vec![ApiPacket::new("put()", Some("java.util.SortedMap"), Some(2))]);

    let p = packets("Then <code>parse()</code> it.", None);
    assert_eq!(p, vec![ApiPacket::name_only("parse()")]);
}

#[test]
fn packets_from_qualified_mentions() {
    let t = types();
    assert_eq!(
        mention_packet("List.add(int, E)", None, &[], &t),
        ApiPacket::new("add()", Some("java.util.List"), Some(2))
    );
    assert_eq!(mention_packet("java.util.List", None, &[], &t), ApiPacket::new("List", Some("java.util"), None));
    assert_eq!(mention_packet("List", None, &[], &t), ApiPacket::name_only("List"));
    assert_eq!(
        mention_packet("ArrayList(int)", None, &[], &t),
        ApiPacket::new("ArrayList()", Some("java.util.ArrayList"), Some(1))
    );
}

#[test]
fn call_sites_and_chains() {
    let t = types();
    let code = "Statement statement = connection.createStatement();\n\
                ResultSet rs = statement.executeQuery(\"SELECT a, b FROM t\");\n\
                while (rs.next()) { rs.getString(1).trim(); }\n\
                // list.clear();";
    let sites = SnippetResolver::new(code, &t).call_sites(&["while".to_string()]);
    let got: Vec<_> = sites.iter().map(|s| (s.name.as_str(), s.container.as_deref(), s.arg_count)).collect();
    assert_eq!(
        got,
        vec![
            ("createStatement()", None, 0),
            ("executeQuery()", Some("java.sql.Statement"), 1),
            ("next()", Some("java.sql.ResultSet"), 0),
            ("getString()", Some("java.sql.ResultSet"), 1),
            ("trim()", None, 0),
        ]
    );
}

#[test]
fn argument_counting() {
    use super::code::count_args;
    assert_eq!(count_args("()", 0), Some(0));
    assert_eq!(count_args("(a, f(b, c), \"x,y\")", 0), Some(3));
    assert_eq!(count_args("(a", 0), None);
}

fn extractor_for<'a>(c: &'a dyn TaskClassifier, t: &'a TypeTable, lex: &'a TaskLexicon) -> TaskExtractor<'a> {
    TaskExtractor {
        tp: tp(),
        classifier: c,
        threshold: 0.5,
        types: t,
        lexicon: lex,
    }
}

const DOC: &str = r#"<html><body>
<h1>Work with a List</h1>
<p>Lists keep order.</p>
<h2>Add elements to a List</h2>
<p>Use <code>add()</code> to append. Note: the list must be mutable.</p>
<codebox>List&lt;String&gt; list = new ArrayList&lt;&gt;();
list.add("element");</codebox>
<p>This example appends one element. Then it stops.</p>
<h2>Remove elements from a List</h2>
<p>Once the list has elements, call <code>remove()</code>.</p>
</body></html>"#;

#[test]
fn document_structure_and_attributes() {
    let t = types();
    let lex = TaskLexicon::default();
    let ex = extractor_for(classifier(), &t, &lex);
    let doc = parse_tutorial("lists", DOC, "codebox");
    let (tasks, relations, sentences) = ex.extract_document(&doc);
    let ids: Vec<_> = tasks.iter().map(|t| t.id.as_str()).collect();
    assert_eq!(
        ids,
        vec![
            "task:lists:work-with-a-list",
            "task:lists:add-elements-to-a-list",
            "task:lists:remove-elements-from-a-list"
        ]
    );
    let count = |k| relations.iter().filter(|r| r.kind == k).count();
    assert_eq!(count(TaskDeclKind::ParentChild), 2);
    assert_eq!(count(TaskDeclKind::Sibling), 1);
    assert_eq!(count(TaskDeclKind::Temporal), 1);
    assert!(sentences.len() >= 8);

    let add = &tasks[1];
    assert_eq!((add.action.as_str(), add.object.as_str()), ("add elements", "a List"));
    assert_eq!(add.notes.as_deref(), Some("Note: the list must be mutable."));
    assert_eq!(add.code_summary.as_deref(), Some("This example appends one element. Then it stops."));
    assert!(add.code_snippet.as_deref().unwrap().contains("list.add(\"element\");"));
    let names: Vec<_> = add.api_packets.iter().map(|p| p.packet.to_string()).collect();
    assert_eq!(names, vec!["<List, -, ->", "<add(), java.util.List, 1>"]);

    let section = &doc.root.children[0].children[0];
    let attrs = extract_task_attributes(&ex, section);
    assert!(attrs.notes.is_some() && attrs.code_snippet.is_some());
}

#[test]
fn flat_document_has_no_relations() {
    let t = types();
    let lex = TaskLexicon::default();
    let ex = extractor_for(classifier(), &t, &lex);
    let doc = parse_tutorial("flat", "<h1>Sort a List</h1><p>Plain text.</p>", "codebox");
    assert!(extract_task_relations(&ex, &doc).is_empty());
    let doc = parse_tutorial("none", "<p>Nothing.</p>", "codebox");
    let (tasks, rels, _) = ex.extract_document(&doc);
    assert!(tasks.is_empty() && rels.is_empty());
}

#[test]
fn list_items_become_child_tasks() {
    let t = types();
    let lex = TaskLexicon::default();
    let ex = extractor_for(classifier(), &t, &lex);
    let html = "<h1>Iterate a List</h1><ul><li>Create an Iterator for the List</li><li>then remove elements from the List</li><li>some remarks here</li></ul>";
    let (tasks, rels, _) = ex.extract_document(&parse_tutorial("it", html, "codebox"));
    assert_eq!(tasks.len(), 3, "{tasks:#?}");
    let count = |k| rels.iter().filter(|r| r.kind == k).count();
    assert_eq!(count(TaskDeclKind::ParentChild), 2);
    assert_eq!(count(TaskDeclKind::Sibling), 1);
    assert_eq!(count(TaskDeclKind::Temporal), 1);
}

#[test]
fn sibling_relations_are_canonical() {
    let r = TaskDeclRelation::new("b", "a", TaskDeclKind::Sibling);
    assert_eq!((r.src.as_str(), r.dst.as_str()), ("a", "b"));
    let r = TaskDeclRelation::new("b", "a", TaskDeclKind::Temporal);
    assert_eq!((r.src.as_str(), r.dst.as_str()), ("b", "a"));
}
