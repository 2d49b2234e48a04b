use scraper::{ElementRef, Html, Selector};

use super::{
    attach_sentence_attributes, identify_directive_sentences, identify_function_sentences,
    ApiEntity, ApiKgError, ApiKind, ApiPage, DeclKind, DeclRelation, KeywordSet,
};
use crate::packet::ApiPacket;
use crate::textproc::{MarkedText, TextProcessor};

/// A parsed member signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    /// `(erased type, parameter name)`; `None` for fields.
    pub params: Option<Vec<(String, String)>>,
}

/// Split at top-level commas, ignoring commas nested in `<>`, `()` or `[]`.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '<' | '(' | '[' => depth += 1,
            '>' | ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// Drop generic arguments and whitespace: "Collection<? extends E>" → "Collection".
pub fn erase_type(t: &str) -> String {
    let mut out = String::new();
    let mut depth = 0;
    for c in t.chars() {
        match c {
            '<' => depth += 1,
            '>' => depth -= 1,
            c if depth == 0 && !c.is_whitespace() => out.push(c),
            _ => {}
        }
    }
    out
}

fn last_ident(s: &str) -> Option<&str> {
    s.split(|c: char| !(c.is_alphanumeric() || c == '_' || c == '$'))
        .rfind(|w| !w.is_empty())
}

/// Parse "public void add(int index, E element)" or "static final int MAX".
pub fn parse_signature(sig: &str, callable: bool) -> Option<Signature> {
    let sig = sig.split_whitespace().collect::<Vec<_>>().join(" ");
    if !callable {
        let decl = sig.split('=').next()?.trim();
        return Some(Signature {
            name: last_ident(decl)?.to_string(),
            params: None,
        });
    }
    let open = sig.find('(')?;
    let close = sig.rfind(')')?;
    if close < open {
        return None;
    }
    let name = last_ident(&sig[..open])?.to_string();
    let inner = sig[open + 1..close].trim();
    let mut params = Vec::new();
    if !inner.is_empty() {
        for p in split_top_level(inner) {
            let p = p.trim();
            let cut = p.rfind(' ')?;
            let ty = p[..cut]
                .split(' ')
                .filter(|w| *w != "final" && !w.starts_with('@'))
                .collect::<Vec<_>>()
                .join(" ");
            params.push((erase_type(&ty), p[cut + 1..].to_string()));
        }
    }
    Some(Signature {
        name,
        params: Some(params),
    })
}

fn sel(s: &str) -> Selector {
    Selector::parse(s).expect("static selector")
}

fn malformed(page: &str, marker: &str) -> ApiKgError {
    ApiKgError::MalformedDocument {
        page: page.to_string(),
        marker: marker.to_string(),
    }
}

fn list_items(scope: ElementRef<'_>, selector: &str) -> Vec<String> {
    scope
        .select(&sel(selector))
        .map(|li| li.text().collect::<String>().trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

/// Paragraph text of a description block, joined with single spaces.
fn description_text(scope: ElementRef<'_>, selector: &str) -> String {
    scope
        .select(&sel(selector))
        .map(|p| MarkedText::from_element(p).text)
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn with_sentences(mut e: ApiEntity, description: &str, tp: &TextProcessor, keywords: &KeywordSet, out: &mut Vec<String>) -> ApiEntity {
    if description.is_empty() {
        return e;
    }
    let resolved = tp.resolve_pronouns(description, &e.qualified_name);
    let sentences = tp.sentences(&resolved);
    out.extend(sentences.iter().map(|s| s.raw.clone()));
    let fns = identify_function_sentences(&e, &sentences);
    let dirs = identify_directive_sentences(&sentences, keywords, tp.stems());
    e = attach_sentence_attributes(e, &fns, &dirs);
    e
}

/// Parse one API reference page into entities and declaration relations.
pub fn parse_api_reference(
    page_id: &str,
    html: &str,
    tp: &TextProcessor,
    keywords: &KeywordSet,
) -> Result<ApiPage, ApiKgError> {
    let doc = Html::parse_document(html);
    let root = doc.root_element();
    let header = root
        .select(&sel("div.type-header"))
        .next()
        .ok_or_else(|| malformed(page_id, "div.type-header"))?;
    let attr = |name: &str| header.value().attr(name).map(str::trim).filter(|s| !s.is_empty());
    let kind = match attr("data-kind") {
        Some("class") | Some("enum") => ApiKind::Class,
        Some("interface") => ApiKind::Interface,
        Some("exception") => ApiKind::Exception,
        _ => return Err(malformed(page_id, "type-header data-kind")),
    };
    let name = attr("data-name").ok_or_else(|| malformed(page_id, "type-header data-name"))?;
    let package = attr("data-package");
    let type_qn = match package {
        Some(p) => format!("{p}.{name}"),
        None => name.to_string(),
    };

    let mut page = ApiPage::default();
    let rel = |src: &ApiEntity, dst: &str, kind| DeclRelation {
        src: src.id.clone(),
        dst: super::entity_id(dst),
        kind,
    };

    let type_entity = ApiEntity::new(
        kind,
        type_qn.clone(),
        name.to_string(),
        ApiPacket::new(name, package, None),
    );
    let type_entity = with_sentences(
        type_entity,
        &description_text(root, "div.type-description p"),
        tp,
        keywords,
        &mut page.sentences,
    );

    if let Some(p) = package {
        let pkg = ApiEntity::new(
            ApiKind::Package,
            p.to_string(),
            p.rsplit('.').next().unwrap_or(p).to_string(),
            ApiPacket::name_only(p),
        );
        page.relations.push(rel(&pkg, &type_qn, DeclKind::Contain));
        page.entities.push(pkg);
    }
    for sup in list_items(root, "ul.extends li") {
        page.relations.push(rel(&type_entity, &sup, DeclKind::Extend));
    }
    for iface in list_items(root, "ul.implements li") {
        page.relations.push(rel(&type_entity, &iface, DeclKind::Implement));
    }

    for member in root.select(&sel("div.member")) {
        let member_kind = match member.value().attr("data-kind") {
            Some("method") => ApiKind::Method,
            Some("constructor") => ApiKind::Constructor,
            Some("field") => ApiKind::Field,
            _ => return Err(malformed(page_id, "member data-kind")),
        };
        let sig_text = member
            .select(&sel("pre.signature"))
            .next()
            .map(|e| e.text().collect::<String>())
            .ok_or_else(|| malformed(page_id, "pre.signature"))?;
        let sig = parse_signature(&sig_text, member_kind.is_callable())
            .ok_or_else(|| malformed(page_id, "pre.signature"))?;

        let (qn, packet, relation) = match &sig.params {
            None => (
                format!("{type_qn}.{}", sig.name),
                ApiPacket::new(sig.name.clone(), Some(&type_qn), None),
                DeclKind::HasField,
            ),
            Some(params) => {
                let types: Vec<&str> = params.iter().map(|(t, _)| t.as_str()).collect();
                let relation = if member_kind == ApiKind::Constructor {
                    DeclKind::HasConstructor
                } else {
                    DeclKind::HasMethod
                };
                (
                    format!("{type_qn}.{}({})", sig.name, types.join(",")),
                    ApiPacket::new(format!("{}()", sig.name), Some(&type_qn), Some(params.len() as u32)),
                    relation,
                )
            }
        };
        let entity = ApiEntity::new(member_kind, qn.clone(), sig.name.clone(), packet);
        let entity = with_sentences(entity, &description_text(member, "div.description p"), tp, keywords, &mut page.sentences);
        page.relations.push(rel(&type_entity, &qn, relation));

        for (_, pname) in sig.params.iter().flatten() {
            let param_qn = format!("{qn}.{pname}");
            page.relations.push(rel(&entity, &param_qn, DeclKind::HasParameter));
            page.entities.push(ApiEntity::new(
                ApiKind::Parameter,
                param_qn,
                pname.clone(),
                ApiPacket::new(pname.clone(), Some(&qn), None),
            ));
        }
        for exc in list_items(member, "ul.throws li") {
            page.relations.push(rel(&entity, &exc, DeclKind::Throw));
        }
        page.entities.push(entity);
    }
    page.entities.push(type_entity);
    Ok(page)
}
