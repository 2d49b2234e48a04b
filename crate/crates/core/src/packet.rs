//! API packets: the ⟨name, container, parameter count⟩ triple used for
//! syntactic API matching.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ApiPacket {
    /// Simple name; methods and constructors carry a trailing "()".
    pub name: Option<String>,
    /// Qualified name of the enclosing package, class or interface.
    pub container: Option<String>,
    pub param_count: Option<u32>,
}

impl ApiPacket {
    pub fn new(name: impl Into<String>, container: Option<&str>, param_count: Option<u32>) -> Self {
        ApiPacket {
            name: Some(name.into()),
            container: container.map(str::to_string),
            param_count,
        }
    }

    pub fn name_only(name: impl Into<String>) -> Self {
        Self::new(name, None, None)
    }

    /// Query-side matching against a candidate's packet. Absent container
    /// or parameter count on the query side match anything; the name must
    /// be present and equal.
    pub fn matches(&self, candidate: &ApiPacket) -> bool {
        match_api_packet(self, candidate)
    }
}

pub fn match_api_packet(q: &ApiPacket, c: &ApiPacket) -> bool {
    let name_ok = matches!((&q.name, &c.name), (Some(a), Some(b)) if a == b);
    let container_ok = match (&q.container, &c.container) {
        (None, _) => true,
        (Some(a), Some(b)) => a.trim() == b.trim(),
        (Some(_), None) => false,
    };
    let count_ok = q.param_count.is_none() || q.param_count == c.param_count;
    name_ok && container_ok && count_ok
}

impl fmt::Display for ApiPacket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slot = |s: &Option<String>| s.clone().unwrap_or_else(|| "-".to_string());
        let count = self.param_count.map(|n| n.to_string()).unwrap_or_else(|| "-".to_string());
        write!(f, "<{}, {}, {}>", slot(&self.name), slot(&self.container), count)
    }
}
