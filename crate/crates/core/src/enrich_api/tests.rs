use proptest::prelude::*;

use super::*;
use crate::apikg::{ApiEntity, ApiKind};
use crate::fusion::{train_embeddings, ApiPacketIndex, EmbeddingConfig};
use crate::packet::ApiPacket;
use crate::textproc::{Sentence, Span};

fn tp() -> &'static TextProcessor {
    static TP: std::sync::OnceLock<TextProcessor> = std::sync::OnceLock::new();
    TP.get_or_init(TextProcessor::default)
}

/// Strip backticks, returning the text and the spans they enclosed.
fn marked(text: &str) -> (String, Vec<Span>) {
    let mut out = String::new();
    let mut spans = Vec::new();
    let mut open = None;
    for c in text.chars() {
        if c == '`' {
            match open.take() {
                Some(s) => spans.push((s, out.len())),
                None => open = Some(out.len()),
            }
        } else {
            out.push(c);
        }
    }
    (out, spans)
}

fn sentence(text: &str) -> (Sentence, Vec<Mention>) {
    let (plain, spans) = marked(text);
    let mut ss = tp().sentences(&plain);
    assert_eq!(ss.len(), 1, "{plain:?} splits into {ss:?}");
    let s = ss.remove(0);
    let mentions = tp().detect_api_mentions(&s, Some(&spans));
    (s, mentions)
}

fn triples(text: &str) -> Vec<(RelationCategory, String, String)> {
    let (s, mentions) = sentence(text);
    match_patterns(&s, &mentions, &PatternSet::shipped(), tp().stems())
        .into_iter()
        .map(|m| (m.category, m.mention1.text, m.mention2.text))
        .collect()
}

fn t(c: RelationCategory, a: &str, b: &str) -> (RelationCategory, String, String) {
    (c, a.to_string(), b.to_string())
}

use RelationCategory::*;

#[test]
fn table_sentences() {
    let cases = [
        ("`Deque.pop()` is similar to how the `removeFirst()` works", t(FunctionSimilarity, "Deque.pop()", "removeFirst()")),
        ("The `floor()` does the opposite of the `ceiling()`.", t(FunctionOpposite, "floor()", "ceiling()")),
        (
            "The `add()` and `offer()` methods differ in how the behave if the Queue is full so no more elements can be added",
            t(BehaviorDifference, "add()", "offer()"),
        ),
        (
            "if some of the operations in the transaction fail, you would call the `rollback()` instead of `commit()`.",
            t(FunctionReplace, "rollback()", "commit()"),
        ),
        (
            "`DataInputStream` is often used together with `DataOutputStream`",
            t(FunctionCollaboration, "DataInputStream", "DataOutputStream"),
        ),
        ("Convert `List` to `Set`", t(TypeConversion, "List", "Set")),
        ("`remove()` method will use `equals()` to decide if the object is present.", t(ImplementConstraint, "remove()", "equals()")),
        ("`run()` is executed by the thread after call `start()`", t(LogicConstraint, "run()", "start()")),
        ("`HashMap` is typically faster than `TreeMap` for lookups.", t(EfficiencyComparison, "HashMap", "TreeMap")),
    ];
    for (text, expected) in cases {
        assert_eq!(triples(text), vec![expected], "{text}");
    }
}

#[test]
fn concurrent_hash_map_sentence() {
    let mut got = triples(
        "The ConcurrentHashMap is very similar to the java.util.HashTable class, except that ConcurrentHashMap offers better concurrency than HashTable does.",
    );
    got.sort();
    assert_eq!(
        got,
        vec![
            t(BehaviorDifference, "ConcurrentHashMap", "java.util.HashTable"),
            t(EfficiencyComparison, "ConcurrentHashMap", "HashTable"),
        ]
    );
}

#[test]
fn replace_in_reverse_order() {
    let got = triples("But, instead of calling the executeQuery() method, you call the executeUpdate() method.");
    assert_eq!(got, vec![t(FunctionReplace, "executeUpdate()", "executeQuery()")]);
}

#[test]
fn gaps_are_bounded() {
    assert!(triples("`HashMap` is in many of the very common and typical cases faster than `TreeMap`.").is_empty());
    assert!(triples("Use `HashMap`. It is faster than `TreeMap`.".split(". ").nth(1).unwrap()).is_empty());
}

#[test]
fn compile_valid_patterns() {
    let p = compile_pattern("FunctionSimilarity :: AE1 [like/similar/same] AE2", "x").unwrap();
    assert_eq!(p.category, FunctionSimilarity);
    assert_eq!(p.template(), "AE1 [like/similar/same] AE2");
    let p = compile_pattern("FunctionOpposite :: AE1 opposite (ADP) AE2", "x").unwrap();
    assert_eq!(p.elements[2], Element::Optional(vec![Element::Pos(Wildcard::ADP)]));
    let p = compile_pattern("FunctionCollaboration :: AE1 (be) VB(VBN) [with/to] AE2", "x").unwrap();
    assert_eq!(p.elements.len(), 6);
    let p = compile_pattern("FunctionReplace :: VB ((ADP) NP) AE1 [instead of/rather than/not] AE2", "x").unwrap();
    assert_eq!(
        p.elements[3],
        Element::Keyword(vec![
            vec!["instead".into(), "of".into()],
            vec!["rather".into(), "than".into()],
            vec!["not".into()]
        ])
    );
    assert_eq!(PatternSet::shipped().patterns.len(), 11);
}

#[test]
fn compile_errors_carry_position() {
    let err = compile_pattern("FunctionSimilarity :: AE1 AE1", "x").unwrap_err();
    assert_eq!(err.position, 27);
    let err = compile_template(FunctionSimilarity, "AE1 like", "x").unwrap_err();
    assert!(err.message.contains("AE2"));
    let err = compile_template(FunctionSimilarity, "AE1 [] AE2", "x").unwrap_err();
    assert_eq!(err.position, 5);
    let err = compile_template(FunctionSimilarity, "AE1 [a//b] AE2", "x").unwrap_err();
    assert!(err.message.contains("empty alternative"));
    let err = compile_template(FunctionSimilarity, "AE1 (like AE2", "x").unwrap_err();
    assert_eq!(err.position, 5);
    let err = compile_template(FunctionSimilarity, "AE1 like) AE2", "x").unwrap_err();
    assert_eq!(err.position, 9);
    assert!(compile_template(FunctionSimilarity, "(AE1) like AE2", "x").is_err());
    assert!(compile_template(FunctionSimilarity, "AE1 [AE2/x]", "x").is_err());
    assert!(compile_pattern("NoSuchCategory :: AE1 AE2", "x").is_err());
    assert!(compile_pattern("AE1 AE2", "x").is_err());
}

#[test]
fn stem_and_prefix_keywords() {
    let set = PatternSet {
        patterns: vec![compile_pattern("BehaviorDifference :: AE1 and AE2 differ* in", "p").unwrap()],
    };
    for text in ["`a()` and `b()` are different in speed.", "`a()` and `b()` differs in speed."] {
        let (s, m) = sentence(text);
        assert_eq!(match_patterns(&s, &m, &set, tp().stems()).len(), 1, "{text}");
    }
}

#[test]
fn relation_sentence_selection() {
    let doc = |text: &str| {
        let (plain, spans) = marked(text);
        DescriptionSentence {
            doc: "d".into(),
            sentence: tp().sentences(&plain).remove(0),
            code_spans: spans,
            snippet: None,
        }
    };
    let ds = vec![
        doc("`run()` is executed by the thread after call `start()`"),
        doc("Returns the size."),
        doc("`a()` calls `b()` and `c()`."),
    ];
    let kept: Vec<usize> = select_relation_sentences(tp(), &ds).iter().map(|(_, m)| m.len()).collect();
    assert_eq!(kept, vec![2, 3]);
}

fn method(qn: &str, name: &str, container: &str) -> ApiEntity {
    ApiEntity::new(ApiKind::Method, qn.into(), name.into(), ApiPacket::new(name, Some(container), Some(0)))
}

#[test]
fn relations_are_linked_and_merged() {
    let es = vec![
        method("java.sql.Connection.rollback()", "rollback()", "java.sql.Connection"),
        method("java.sql.Connection.commit()", "commit()", "java.sql.Connection"),
    ];
    let index = ApiPacketIndex::new(&es);
    let m = train_embeddings(tp(), &["call commit or rollback".to_string()], &EmbeddingConfig::default()).unwrap();
    let linker = Linker {
        tp: tp(),
        index: &index,
        model: &m,
    };
    let doc = |text: &str| DescriptionSentence {
        doc: "d".into(),
        sentence: tp().sentences(text).remove(0),
        code_spans: vec![],
        snippet: None,
    };
    let ds = vec![
        doc("If the update fails, you would call the rollback() instead of commit()."),
        doc("On error we call the rollback() instead of commit()."),
        doc("Sometimes call the dostop() instead of commit()."),
    ];
    let types = TypeTable::default();
    let report = add_api_semantic_relations(tp(), &ds, &PatternSet::shipped(), &linker, &types, &[]);
    assert_eq!(report.relations.len(), 1);
    let r = &report.relations[0];
    assert_eq!((r.src.as_str(), r.dst.as_str(), r.category), (es[0].id.as_str(), es[1].id.as_str(), FunctionReplace));
    assert_eq!(r.evidence.len(), 2, "{report:?}");
    assert_eq!(report.diagnostics.len(), 1);
    assert!(report.diagnostics[0].starts_with("unlinked\t"));
    let e = r.edge();
    assert_eq!(e.attrs["evidence"].split('\n').count(), 2);
    // Evidence replays through its pattern.
    for ev in &r.evidence {
        let s = tp().sentences(ev).remove(0);
        let mentions = tp().detect_api_mentions(&s, None);
        let hits = match_patterns(&s, &mentions, &PatternSet::shipped(), tp().stems());
        assert!(hits.iter().any(|h| r.pattern_ids.contains(&h.pattern_id)));
    }
}

proptest! {
    #[test]
    fn matches_bind_distinct_mentions_in_slot_order(words in prop::collection::vec(
        prop::sample::select(vec!["the", "is", "similar", "to", "faster", "than", "a()", "b()", "List", "use", "and", "differ", "in", "after", "convert"]),
        1..14,
    )) {
        let text = words.join(" ");
        for s in tp().sentences(&text) {
            let mentions = tp().detect_api_mentions(&s, None);
            for m in match_patterns(&s, &mentions, &PatternSet::shipped(), tp().stems()) {
                prop_assert!(m.mention1.span != m.mention2.span);
                prop_assert!(mentions.contains(&m.mention1) && mentions.contains(&m.mention2));
                let p = PatternSet::shipped().get(&m.pattern_id).cloned().unwrap();
                let slot1_first = p.template().find("AE1") < p.template().find("AE2");
                prop_assert_eq!(m.mention1.span.0 < m.mention2.span.0, slot1_first);
            }
        }
    }
}
