use super::code::{CallSite, SnippetResolver, TypeTable};
use crate::apikg::erase_type as erase_generics;
use crate::packet::ApiPacket;

fn qualify(q: &str, resolver: Option<&SnippetResolver<'_>>, types: &TypeTable) -> Option<String> {
    if let Some(r) = resolver {
        return r.resolve_receiver(q);
    }
    if q.contains('.') {
        return types.is_qualified_type(q).then(|| q.to_string());
    }
    types.resolve(q).map(str::to_string)
}

/// Top-level argument count of "a, b(c, d)" (0 for blank).
fn arg_count(args: &str) -> u32 {
    if args.trim().is_empty() {
        return 0;
    }
    let mut depth = 0i32;
    let mut n = 1;
    for c in args.chars() {
        match c {
            '(' | '[' | '<' => depth += 1,
            ')' | ']' | '>' => depth -= 1,
            ',' if depth == 0 => n += 1,
            _ => {}
        }
    }
    n
}

/// Packet for one API mention. Explicit argument lists set the parameter
/// count; empty parentheses leave it open. A qualifier is resolved through
/// the snippet's variables and the known types. Remaining open slots are
/// filled from the first call site in the snippet with the same name.
pub fn mention_packet(
    mention: &str,
    resolver: Option<&SnippetResolver<'_>>,
    sites: &[CallSite],
    types: &TypeTable,
) -> ApiPacket {
    let (head, args) = match mention.find('(') {
        Some(open) => {
            let close = mention[open..].find(')').map(|c| open + c).unwrap_or(mention.len());
            (&mention[..open], Some(&mention[open + 1..close]))
        }
        None => (mention, None),
    };
    let head = erase_generics(head).replace("[]", "");
    let (qualifier, last) = match head.rsplit_once('.') {
        Some((q, n)) => (Some(q), n),
        None => (None, head.as_str()),
    };

    let mut packet = match args {
        Some(args) => {
            let count = (!args.trim().is_empty()).then(|| arg_count(args));
            let container = match qualifier {
                Some(q) => qualify(q, resolver, types),
                // Bare "ArrayList(int)": a constructor of a known type.
                None if last.starts_with(char::is_uppercase) => qualify(last, resolver, types),
                None => None,
            };
            ApiPacket {
                name: Some(format!("{last}()")),
                container,
                param_count: count,
            }
        }
        None => {
            let container = qualifier.and_then(|q| {
                qualify(q, resolver, types).or_else(|| {
                    q.chars()
                        .all(|c| c.is_lowercase() || c == '.' || c.is_ascii_digit() || c == '_')
                        .then(|| q.to_string())
                })
            });
            ApiPacket {
                name: Some(last.to_string()),
                container,
                param_count: None,
            }
        }
    };

    if args.is_some() {
        let name = packet.name.clone();
        let site = sites.iter().find(|s| {
            Some(&s.name) == name.as_ref()
                && (packet.container.is_none() || s.container.is_none() || s.container == packet.container)
                && (packet.param_count.is_none() || Some(s.arg_count) == packet.param_count)
        });
        if let Some(site) = site {
            if packet.container.is_none() {
                packet.container = site.container.clone();
            }
            if packet.param_count.is_none() {
                packet.param_count = Some(site.arg_count);
            }
        }
    }
    packet
}

/// Packets of every call in a snippet, in snippet order.
pub fn code_packets(code: &str, types: &TypeTable, keywords: &[String]) -> Vec<ApiPacket> {
    SnippetResolver::new(code, types)
        .call_sites(keywords)
        .iter()
        .map(CallSite::packet)
        .collect()
}
