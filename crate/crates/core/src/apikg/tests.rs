use super::*;

fn tp() -> &'static TextProcessor {
    static TP: std::sync::OnceLock<TextProcessor> = std::sync::OnceLock::new();
    TP.get_or_init(TextProcessor::default)
}

fn sentences(text: &str) -> Vec<crate::textproc::Sentence> {
    tp().sentences(text)
}

fn entity(kind: ApiKind, qn: &str, simple: &str) -> ApiEntity {
    ApiEntity::new(kind, qn.into(), simple.into(), ApiPacket::name_only(simple))
}

const CLASS_PAGE: &str = r#"<html><body>
<div class="type-header" data-kind="class" data-name="Counter"></div>
<ul class="extends"><li>Base</li></ul>
<div class="type-description"><p>Counts things.</p></div>
<div class="member" data-kind="field"><pre class="signature">public int total</pre></div>
<div class="member" data-kind="method">
  <pre class="signature">public void add(int amount)</pre>
  <div class="description"><p>Adds the amount. It must be positive.</p></div>
</div>
<div class="member" data-kind="method"><pre class="signature">public int size()</pre></div>
</body></html>"#;

#[test]
fn class_page_entities_and_relations() {
    let page = parse_api_reference("counter", CLASS_PAGE, tp(), &KeywordSet::shipped()).unwrap();
    let qns: Vec<_> = page.entities.iter().map(|e| e.qualified_name.as_str()).collect();
    assert_eq!(qns, vec!["Counter.total", "Counter.add(int).amount", "Counter.add(int)", "Counter.size()", "Counter"]);
    let count = |k| page.relations.iter().filter(|r| r.kind == k).count();
    assert_eq!(count(DeclKind::HasMethod), 2);
    assert_eq!(count(DeclKind::HasField), 1);
    assert_eq!(count(DeclKind::HasParameter), 1);
    assert_eq!(count(DeclKind::Extend), 1);
    assert!(page.relations.contains(&DeclRelation {
        src: entity_id("Counter"),
        dst: entity_id("Base"),
        kind: DeclKind::Extend
    }));

    let add = page.entities.iter().find(|e| e.simple_name == "add").unwrap();
    assert_eq!(add.packet, ApiPacket::new("add()", Some("Counter"), Some(1)));
    assert_eq!(add.param_count, Some(1));
    // The resolved pronoun makes add() the subject of the second sentence.
    assert_eq!(add.function_sentence.as_deref(), Some("Adds the amount. add() must be positive."));
    assert_eq!(add.directive_sentences, vec!["add() must be positive.".to_string()]);
}

#[test]
fn empty_interface_is_one_entity() {
    let html = r#"<div class="type-header" data-kind="interface" data-name="Marker"></div>"#;
    let page = parse_api_reference("m", html, tp(), &KeywordSet::shipped()).unwrap();
    assert_eq!(page.entities.len(), 1);
    assert!(page.relations.is_empty());
    assert_eq!(page.entities[0].param_count, None);
}

#[test]
fn missing_header_is_malformed() {
    let err = parse_api_reference("bad", "<p>nothing</p>", tp(), &KeywordSet::shipped()).unwrap_err();
    assert!(matches!(err, ApiKgError::MalformedDocument { ref page, ref marker } if page == "bad" && marker == "div.type-header"));
}

#[test]
fn signatures() {
    let s = parse_signature("public boolean addAll(int index, Collection<? extends E> c)", true).unwrap();
    assert_eq!(s.name, "addAll");
    assert_eq!(
        s.params.unwrap(),
        vec![("int".into(), "index".into()), ("Collection".into(), "c".into())]
    );
    let f = parse_signature("static final int RETURN_GENERATED_KEYS = 1", false).unwrap();
    assert_eq!((f.name.as_str(), f.params), ("RETURN_GENERATED_KEYS", None));
}

#[test]
fn function_sentence_criteria() {
    let size = entity(ApiKind::Method, "java.util.Collection.size()", "size");
    let s = sentences("returns the numbers of the elements in this collection");
    assert_eq!(identify_function_sentences(&size, &s).len(), 1);

    let array = entity(ApiKind::Interface, "java.sql.Array", "Array");
    let s = sentences("All methods on the Array interface must be fully implemented if the JDBC driver supports the data type.");
    assert!(identify_function_sentences(&array, &s).is_empty());

    let s = sentences("The Array interface maps an SQL array.");
    assert_eq!(identify_function_sentences(&array, &s).len(), 1);
    let s = sentences("The driver maps an SQL array.");
    assert!(identify_function_sentences(&array, &s).is_empty());
    let s = sentences("Array maps an SQL array.");
    assert_eq!(identify_function_sentences(&array, &s).len(), 1);
    assert!(identify_function_sentences(&array, &[]).is_empty());
}

#[test]
fn directive_sentences() {
    let kw = KeywordSet::shipped();
    let stems = tp().stems();
    let keep = |t: &str| !identify_directive_sentences(&sentences(t), &kw, stems).is_empty();
    assert!(keep("All methods on the Array interface must be fully implemented if the JDBC driver supports the data type"));
    assert!(!keep("Returns the element count."));
    assert!(keep("Use only with synchronized access."));
    assert!(keep("A value is required here."));
}

#[test]
fn attributes_merge_functions_and_keep_directives() {
    let e = entity(ApiKind::Method, "A.f()", "f");
    let fns = sentences("Does one thing. Does another.");
    let dirs = sentences("Must hold a lock. Never null. Only once.");
    let e = attach_sentence_attributes(e, &fns, &dirs);
    assert_eq!(e.function_sentence.as_deref(), Some("Does one thing. Does another."));
    assert_eq!(e.directive_sentences.len(), 3);
    assert_eq!(e.directive_sentences[2], "Only once.");

    let e = attach_sentence_attributes(entity(ApiKind::Method, "A.g()", "g"), &[], &[]);
    assert_eq!(e.function_sentence, None);
}

#[test]
fn ids_are_stable_and_distinct() {
    assert_eq!(entity_id("java.util.List"), entity_id("java.util.List"));
    assert_ne!(entity_id("java.util.List.add(E)"), entity_id("java.util.List.add(int,E)"));
    assert!(entity_id("java.util.List").starts_with("java.util.List@"));
}

#[test]
fn assembly_drops_dangling_relations() {
    let page = parse_api_reference("counter", CLASS_PAGE, tp(), &KeywordSet::shipped()).unwrap();
    let g = ApiGraph::assemble(vec![page]).unwrap();
    assert_eq!(g.diagnostics.len(), 1);
    assert!(g.relations.iter().all(|r| r.kind != DeclKind::Extend));
}
