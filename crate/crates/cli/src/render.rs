//! Plain-text rendering of search results.

use std::fmt::Write;

use apitask_kg::search::SearchResult;
use apitask_kg::taskkg::TaskEntity;

fn task_line(t: &TaskEntity) -> String {
    format!("{} [{}]", t.phrase, t.id)
}

pub fn search_result(r: &SearchResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "query: {}", r.query);
    match &r.best_task {
        Some(b) => {
            let _ = writeln!(s, "best task: {} (score {:.3})", task_line(&b.task), b.score);
            if let Some(code) = &b.task.code_snippet {
                let _ = writeln!(s, "  code:");
                for line in code.lines() {
                    let _ = writeln!(s, "    {line}");
                }
            }
        }
        None => {
            let _ = writeln!(s, "best task: none");
        }
    }
    if !r.related_tasks.is_empty() {
        let _ = writeln!(s, "related tasks:");
        for t in &r.related_tasks {
            let _ = writeln!(s, "  {:<14} {} (score {:.3})", t.relation, task_line(&t.task), t.score);
        }
    }
    if !r.api_knowledge.is_empty() {
        let _ = writeln!(s, "API knowledge:");
        for k in &r.api_knowledge {
            let _ = writeln!(s, "  {:<8} {}", k.provenance, k.entity.qualified_name);
            if let Some(f) = &k.entity.function_sentence {
                let _ = writeln!(s, "           {f}");
            }
        }
    }
    if !r.extended.is_empty() {
        let _ = writeln!(s, "extended knowledge:");
        for x in &r.extended {
            let _ = writeln!(s, "  {}: {} -> {}", x.label, x.src.display, x.dst.display);
            for e in &x.evidence {
                let _ = writeln!(s, "      \"{e}\"");
            }
        }
    }
    let _ = writeln!(s, "fragment: {} nodes, {} edges", r.fragment.nodes.len(), r.fragment.edges.len());
    s
}
