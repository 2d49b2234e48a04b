use super::*;

fn tp() -> &'static TextProcessor {
    static TP: std::sync::OnceLock<TextProcessor> = std::sync::OnceLock::new();
    TP.get_or_init(TextProcessor::default)
}

fn kinds(tokens: &[Token]) -> Vec<(TokenKind, &str)> {
    tokens.iter().map(|t| (t.kind, t.text.as_str())).collect()
}

#[test]
fn api_token_with_arguments_is_not_split() {
    let toks = tp().tokenize("the method add(index, E) inserts");
    assert_eq!(
        kinds(&toks),
        vec![
            (TokenKind::Word, "the"),
            (TokenKind::Word, "method"),
            (TokenKind::ApiToken, "add(index, E)"),
            (TokenKind::Word, "inserts"),
        ]
    );
}

#[test]
fn empty_input_has_no_tokens() {
    assert!(tp().tokenize("").is_empty());
    assert!(tp().split_sentences("").is_empty());
}

#[test]
fn keyword_then_call_chain() {
    let toks = tp().tokenize("while (it.hasNext())");
    assert_eq!(
        kinds(&toks),
        vec![
            (TokenKind::CodeKeyword, "while"),
            (TokenKind::Punct, "("),
            (TokenKind::ApiToken, "it.hasNext()"),
            (TokenKind::Punct, ")"),
        ]
    );
}

#[test]
fn generics_stay_inside_api_token() {
    let toks = tp().tokenize("push onto the Stack<E> now");
    assert!(toks.iter().any(|t| t.kind == TokenKind::ApiToken && t.text == "Stack<E>"));
}

#[test]
fn abbreviations_are_not_api_tokens() {
    let toks = tp().tokenize("for lists, e.g. ArrayList");
    let api: Vec<_> = toks.iter().filter(|t| t.kind == TokenKind::ApiToken).collect();
    assert_eq!(api.len(), 1);
    assert_eq!(api[0].text, "ArrayList");
}

#[test]
fn conjunction_led_sentence_is_merged() {
    let text = "In order to update the database you need to use a Statement. But, instead of calling the executeQuery() method, you call the executeUpdate() method.";
    let s = tp().split_sentences(text);
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].raw, text);
}

#[test]
fn plain_sentences_split() {
    assert_eq!(tp().split_sentences("Reads a single character.").len(), 1);
    let s = tp().split_sentences("A runs. C waits.");
    assert_eq!(s.len(), 2);
    assert_eq!(s[1].raw, "C waits.");
    assert_eq!(s[1].offset, 8);
}

#[test]
fn dots_inside_api_tokens_do_not_split() {
    let s = tp().split_sentences("Call java.util.List.add(E) first. Then stop.");
    assert_eq!(s.len(), 2);
}

fn tags(text: &str) -> Vec<PosTag> {
    tp().pos_tag(tp().tokenize(text)).iter().map(|t| t.pos).collect()
}

#[test]
fn tagger_examples() {
    use PosTag::*;
    assert_eq!(tags("Reads a single character"), vec![VB, DET, ADJ, NN]);
    assert_eq!(tags("remove element from Collection"), vec![VB, NN, ADP, NN]);
    let list = tp().tagged_fragment("List");
    assert_eq!((list[0].kind, list[0].pos), (TokenKind::ApiToken, NN));
    assert_eq!(tags("Convert Set to List"), vec![VB, NN, ADP, NN]);
}

#[test]
fn tagger_context_rules() {
    use PosTag::*;
    assert_eq!(tags("the set"), vec![DET, NN]);
    assert_eq!(tags("a given index"), vec![DET, ADJ, NN]);
}

#[test]
fn verb_phrases() {
    let p = tp();
    let s = &p.sentences("Convert Set to List")[0];
    let vps = p.extract_verb_phrases(s);
    assert_eq!(vps.len(), 1);
    assert_eq!(vps[0].text_in(&s.raw), "Convert Set to List");

    let s = &p.sentences("pass the set as parameter to addAll()")[0];
    let vps = p.extract_verb_phrases(s);
    assert_eq!(vps.len(), 1);
    assert_eq!(vps[0].text(), "pass the set as parameter to addAll()");

    let s = &p.sentences("the list of items")[0];
    assert!(p.extract_verb_phrases(s).is_empty());
}

#[test]
fn pronoun_resolution() {
    let p = tp();
    assert_eq!(
        p.resolve_pronouns("It returns the head of the queue.", "Queue.peek()"),
        "peek() returns the head of the queue."
    );
    assert_eq!(
        p.resolve_pronouns("Returns the size. This method is slow.", "java.util.List.size()"),
        "Returns the size. size() is slow."
    );
    assert_eq!(p.resolve_pronouns("They may throw.", "X.y()"), "They may throw.");
    assert_eq!(p.resolve_pronouns("Nothing here.", "X.y()"), "Nothing here.");
}

#[test]
fn display_names() {
    assert_eq!(display_name("java.util.List.add(int,E)"), "add()");
    assert_eq!(display_name("java.util.List"), "List");
}

#[test]
fn mentions_in_markup_and_orthography() {
    let p = tp();
    let marked = strip_code_markup("<code>remove()</code> element from collection");
    let s = &p.sentences(&marked.text)[0];
    let m = p.detect_api_mentions(s, Some(&marked.code_spans));
    assert_eq!(m.iter().map(|m| m.text.as_str()).collect::<Vec<_>>(), vec!["remove()"]);

    let s = &p.sentences("the list of items")[0];
    assert!(p.detect_api_mentions(s, None).is_empty());

    let s = &p.sentences("use ListIterator instead of Iterator")[0];
    let m = p.detect_api_mentions(s, None);
    assert_eq!(
        m.iter().map(|m| m.text.as_str()).collect::<Vec<_>>(),
        vec!["ListIterator", "Iterator"]
    );
}

#[test]
fn markup_collapses_whitespace() {
    let m = strip_code_markup("<p>Use   <code>List.add(E)</code>\n to append.</p>");
    assert_eq!(m.text, "Use List.add(E) to append.");
    assert_eq!(&m.text[m.code_spans[0].0..m.code_spans[0].1], "List.add(E)");
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn word() -> impl Strategy<Value = String> {
        prop_oneof![
            Just("the".to_string()),
            Just("and".to_string()),
            Just("But".to_string()),
            Just("list".to_string()),
            Just("add(index, E)".to_string()),
            Just("java.util.List".to_string()),
            Just("ArrayList".to_string()),
            Just("while".to_string()),
            Just("it.hasNext()".to_string()),
            Just(".".to_string()),
            Just(",".to_string()),
            Just("?".to_string()),
            Just("42".to_string()),
            "[a-zA-Z]{1,8}",
        ]
    }

    fn text() -> impl Strategy<Value = String> {
        prop::collection::vec(word(), 0..30).prop_map(|w| w.join(" "))
    }

    proptest! {
        #[test]
        fn spans_are_ordered_and_in_bounds(t in text()) {
            let toks = tp().tokenize(&t);
            let mut last = 0;
            for tok in &toks {
                prop_assert!(tok.span.0 >= last && tok.span.1 <= t.len() && tok.span.0 < tok.span.1);
                prop_assert_eq!(&t[tok.span.0..tok.span.1], tok.text.as_str());
                last = tok.span.1;
            }
        }

        #[test]
        fn api_tokens_are_nouns_matching_orthography(t in text()) {
            let p = tp();
            for tok in p.pos_tag(p.tokenize(&t)) {
                if tok.kind == TokenKind::ApiToken {
                    prop_assert_eq!(tok.pos, PosTag::NN);
                    prop_assert!(p.orthography().is_api(&tok.text, false)
                        || p.orthography().is_api(&tok.text, true));
                }
            }
        }

        #[test]
        fn sentences_reconstruct_input(t in text()) {
            let joined: String = tp().split_sentences(&t).iter().map(|s| s.raw.clone()).collect();
            let strip = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
            prop_assert_eq!(strip(&joined), strip(&t));
        }

        #[test]
        fn no_sentence_after_the_first_starts_with_conjunction(t in text()) {
            let p = tp();
            for s in p.split_sentences(&t).iter().skip(1) {
                let first = &s.tokens[0].text;
                prop_assert!(!p.conjunctions().iter().any(|c| c.eq_ignore_ascii_case(first)));
            }
        }

        #[test]
        fn tagging_is_deterministic(t in text()) {
            let p = tp();
            prop_assert_eq!(p.pos_tag(p.tokenize(&t)), p.pos_tag(p.tokenize(&t)));
        }

        #[test]
        fn accepted_mentions_survive_tokenization(
            prefix in "[a-z ]{0,10}",
            m in prop_oneof![
                Just("add(index, E)"), Just("java.util.List.add(E)"), Just("HashMap<K, V>"),
                Just("removeFirst()"), Just("it.next()"), Just("ConcurrentHashMap"),
            ],
        ) {
            let t = format!("{prefix} {m} here");
            let toks = tp().tokenize(&t);
            prop_assert!(toks.iter().any(|tok| tok.text == m && tok.kind == TokenKind::ApiToken));
        }
    }
}
