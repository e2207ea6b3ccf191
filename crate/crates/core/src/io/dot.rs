//! Graphviz export.

use std::fmt::Write as _;

use crate::automaton::Automaton;
use crate::event::EventSet;

#[derive(Debug, Clone, Default)]
pub struct DotOptions {
    /// Graph name; `G` when empty.
    pub name: String,
    /// Decision set per state, shown under the state name.
    pub decisions: Option<Vec<EventSet>>,
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// One node per state (double circle when marked, bold when initial) and
/// one edge per transition.
pub fn export_dot(a: &Automaton, options: &DotOptions) -> String {
    let name = if options.name.is_empty() {
        "G"
    } else {
        &options.name
    };
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(name)).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    for x in a.states() {
        let mut attrs = Vec::new();
        if a.is_marked(x) {
            attrs.push("shape=doublecircle".to_string());
        }
        if x == a.initial() {
            attrs.push("style=bold".to_string());
        }
        if let Some(d) = &options.decisions {
            let label = format!("{}\n{}", a.name(x), a.alphabet().format_set(d[x.index()]));
            attrs.push(format!("label={}", quote(&label)));
        }
        writeln!(out, "  {} [{}];", quote(a.name(x)), attrs.join(", ")).unwrap();
    }
    for (x, e, y) in a.transitions() {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(a.name(x)),
            quote(a.name(y)),
            quote(a.alphabet().name(e))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
