//! Line-oriented automaton and supervisor files.
//!
//! ```text
//! alphabet a b c
//! states 0 1 2
//! initial 0
//! marked 2
//! trans 0 a 1
//! trans 1 b 2
//! ```
//!
//! `alphabet`, `states` and `marked` may repeat and accumulate. Supervisor
//! files add one `decision <state>: <events>` line per state.

use std::fmt::Write as _;

use crate::automaton::{Automaton, AutomatonBuilder, AutomatonError, StateId};
use crate::event::{Alphabet, EventSet};

use super::{strip_comment, words, Category, Diagnostic, Diagnostics};

struct Parsed {
    automaton: Automaton,
    decisions: Vec<Option<EventSet>>,
}

fn parse(text: &str, allow_decisions: bool) -> Result<Parsed, Diagnostics> {
    let mut diags = Vec::new();
    let lines: Vec<(usize, Vec<(usize, &str)>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, words(strip_comment(l))))
        .filter(|(_, w)| !w.is_empty())
        .collect();

    // first pass: declarations
    let mut event_names: Vec<&str> = Vec::new();
    let mut alphabet_line = None;
    let mut state_decls: Vec<(usize, usize, &str)> = Vec::new();
    for (line, w) in &lines {
        match w[0].1 {
            "alphabet" => {
                alphabet_line.get_or_insert(*line);
                for &(col, name) in &w[1..] {
                    if event_names.contains(&name) {
                        diags.push(Diagnostic::new(
                            *line,
                            col,
                            Category::Duplicate,
                            format!("event `{name}` declared twice"),
                        ));
                    } else {
                        event_names.push(name);
                    }
                }
            }
            "states" => state_decls.extend(w[1..].iter().map(|&(c, n)| (*line, c, n))),
            "initial" | "marked" | "trans" => {}
            "decision" if allow_decisions => {}
            other => diags.push(Diagnostic::new(
                *line,
                w[0].0,
                Category::Syntax,
                format!("unknown keyword `{other}`"),
            )),
        }
    }
    if alphabet_line.is_none() {
        diags.push(Diagnostic::global(
            Category::MissingDeclaration,
            "no `alphabet` line",
        ));
    }
    let alphabet = match Alphabet::new(event_names.iter().copied()) {
        Ok(a) => a,
        Err(e) => {
            diags.push(Diagnostic::new(
                alphabet_line.unwrap_or(0),
                1,
                Category::Invalid,
                e.to_string(),
            ));
            return Err(Diagnostics {
                source: None,
                items: diags,
            });
        }
    };
    let mut b = AutomatonBuilder::new(alphabet.clone());
    for &(line, col, name) in &state_decls {
        match b.add_state(name) {
            Ok(_) => {}
            Err(AutomatonError::DuplicateState(_)) => diags.push(Diagnostic::new(
                line,
                col,
                Category::Duplicate,
                format!("state `{name}` declared twice"),
            )),
            Err(e) => diags.push(Diagnostic::new(line, col, Category::Invalid, e.to_string())),
        }
    }

    // second pass: everything that refers to declarations
    let mut decisions: Vec<Option<EventSet>> = vec![None; b.num_states()];
    let mut initial_seen = false;
    for (line, w) in &lines {
        let line = *line;
        let state = |b: &AutomatonBuilder,
                     diags: &mut Vec<Diagnostic>,
                     (col, name): (usize, &str)|
         -> Option<StateId> {
            let s = b.state(name);
            if s.is_none() {
                diags.push(Diagnostic::new(
                    line,
                    col,
                    Category::UnknownState,
                    format!("undeclared state `{name}`"),
                ));
            }
            s
        };
        let event = |diags: &mut Vec<Diagnostic>, (col, name): (usize, &str)| {
            let e = alphabet.id(name);
            if e.is_none() {
                diags.push(Diagnostic::new(
                    line,
                    col,
                    Category::UnknownEvent,
                    format!("undeclared event `{name}`"),
                ));
            }
            e
        };
        match w[0].1 {
            "initial" => {
                if w.len() != 2 {
                    diags.push(Diagnostic::new(
                        line,
                        w[0].0,
                        Category::Syntax,
                        "`initial` takes exactly one state",
                    ));
                } else if initial_seen {
                    diags.push(Diagnostic::new(
                        line,
                        w[0].0,
                        Category::Duplicate,
                        "second `initial` line",
                    ));
                } else if let Some(x) = state(&b, &mut diags, w[1]) {
                    initial_seen = true;
                    b.set_initial(x);
                }
            }
            "marked" => {
                for &word in &w[1..] {
                    if let Some(x) = state(&b, &mut diags, word) {
                        b.mark(x);
                    }
                }
            }
            "trans" => {
                if w.len() != 4 {
                    diags.push(Diagnostic::new(
                        line,
                        w[0].0,
                        Category::Syntax,
                        "expected `trans <from> <event> <to>`",
                    ));
                    continue;
                }
                let from = state(&b, &mut diags, w[1]);
                let e = event(&mut diags, w[2]);
                let to = state(&b, &mut diags, w[3]);
                if let (Some(from), Some(e), Some(to)) = (from, e, to) {
                    b.transition(from, e, to);
                }
            }
            "decision" => {
                let Some(&(col, head)) = w.get(1) else {
                    diags.push(Diagnostic::new(
                        line,
                        w[0].0,
                        Category::Syntax,
                        "expected `decision <state>: <events>`",
                    ));
                    continue;
                };
                let Some(name) = head.strip_suffix(':') else {
                    diags.push(Diagnostic::new(
                        line,
                        col,
                        Category::Syntax,
                        "state name must be followed by `:`",
                    ));
                    continue;
                };
                let mut set = EventSet::EMPTY;
                for &word in &w[2..] {
                    if let Some(e) = event(&mut diags, word) {
                        set.insert(e);
                    }
                }
                if let Some(x) = state(&b, &mut diags, (col, name)) {
                    if decisions[x.index()].replace(set).is_some() {
                        diags.push(Diagnostic::new(
                            line,
                            col,
                            Category::Duplicate,
                            format!("second decision for `{name}`"),
                        ));
                    }
                }
            }
            _ => {}
        }
    }
    if !initial_seen && alphabet_line.is_some() {
        diags.push(Diagnostic::global(
            Category::MissingDeclaration,
            "no `initial` line",
        ));
    }
    if !diags.is_empty() {
        return Err(Diagnostics {
            source: None,
            items: diags,
        });
    }
    let automaton = b
        .build()
        .map_err(|e| Diagnostics::one(Diagnostic::global(Category::Invalid, e.to_string())))?;
    Ok(Parsed {
        automaton,
        decisions,
    })
}

/// Parses an automaton file, collecting every diagnostic.
pub fn parse_automaton(text: &str) -> Result<Automaton, Diagnostics> {
    parse(text, false).map(|p| p.automaton)
}

/// Parses a supervisor file: an automaton plus a decision for every state.
pub fn parse_supervisor(text: &str) -> Result<(Automaton, Vec<EventSet>), Diagnostics> {
    let p = parse(text, true)?;
    let mut out = Vec::with_capacity(p.decisions.len());
    let mut missing = Vec::new();
    for (x, d) in p.automaton.states().zip(&p.decisions) {
        match d {
            Some(d) => out.push(*d),
            None => missing.push(Diagnostic::global(
                Category::MissingDeclaration,
                format!("no decision for state `{}`", p.automaton.name(x)),
            )),
        }
    }
    if missing.is_empty() {
        Ok((p.automaton, out))
    } else {
        Err(Diagnostics {
            source: None,
            items: missing,
        })
    }
}

fn join_states(a: &Automaton, states: impl Iterator<Item = StateId>) -> String {
    states.map(|x| a.name(x)).collect::<Vec<_>>().join(" ")
}

/// Canonical text form; parsing it yields an equal automaton.
pub fn write_automaton(a: &Automaton) -> String {
    let mut out = String::new();
    writeln!(out, "alphabet {}", a.alphabet().names().join(" ")).unwrap();
    writeln!(out, "states {}", join_states(a, a.states())).unwrap();
    writeln!(out, "initial {}", a.name(a.initial())).unwrap();
    if a.marked_states().next().is_some() {
        writeln!(out, "marked {}", join_states(a, a.marked_states())).unwrap();
    }
    for (x, e, y) in a.transitions() {
        writeln!(
            out,
            "trans {} {} {}",
            a.name(x),
            a.alphabet().name(e),
            a.name(y)
        )
        .unwrap();
    }
    out
}

/// Automaton text followed by one `decision` line per state.
pub fn write_supervisor(a: &Automaton, decisions: &[EventSet]) -> String {
    let mut out = write_automaton(a);
    for (x, d) in a.states().zip(decisions) {
        let names: Vec<&str> = d.iter().map(|e| a.alphabet().name(e)).collect();
        let sep = if names.is_empty() { "" } else { " " };
        writeln!(out, "decision {}:{sep}{}", a.name(x), names.join(" ")).unwrap();
    }
    out
}

/// `pair <left> <right>` lines for a relation between two automata.
pub fn write_relation(a: &Automaton, b: &Automaton, pairs: &[(StateId, StateId)]) -> String {
    let mut out = String::new();
    for &(x, y) in pairs {
        writeln!(out, "pair {} {}", a.name(x), b.name(y)).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn round_trip() {
        for a in [fixtures::fix_b(), fixtures::example1().plant().clone()] {
            let text = write_automaton(&a);
            assert_eq!(parse_automaton(&text).unwrap(), a);
            assert_eq!(write_automaton(&parse_automaton(&text).unwrap()), text);
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let a =
            parse_automaton("# header\nalphabet a  # one event\n\nstates x\ninitial x\nmarked x\n")
                .unwrap();
        assert_eq!(a.num_states(), 1);
        assert!(a.is_marked(a.initial()));
    }

    #[test]
    fn undeclared_ids_are_line_numbered() {
        let err = parse_automaton("alphabet a\nstates x\ninitial x\ntrans x b y\n").unwrap_err();
        assert_eq!(err.items.len(), 2);
        assert_eq!((err.items[0].line, err.items[0].column), (4, 9));
        assert_eq!(err.items[0].category, Category::UnknownEvent);
        assert_eq!((err.items[1].line, err.items[1].column), (4, 11));
        assert_eq!(err.items[1].category, Category::UnknownState);
    }

    #[test]
    fn structural_errors() {
        let cases = [
            ("states x\ninitial x\n", Category::MissingDeclaration),
            ("alphabet a\nstates x\n", Category::MissingDeclaration),
            ("alphabet a\nstates x x\ninitial x\n", Category::Duplicate),
            ("alphabet a a\nstates x\ninitial x\n", Category::Duplicate),
            (
                "alphabet a\nstates x\ninitial x\nfrobnicate\n",
                Category::Syntax,
            ),
            (
                "alphabet a\nstates x\ninitial x\ntrans x a\n",
                Category::Syntax,
            ),
            (
                "alphabet a\nstates x\ninitial x\ndecision x: a\n",
                Category::Syntax,
            ),
        ];
        for (text, cat) in cases {
            let err = parse_automaton(text).unwrap_err();
            assert_eq!(err.items[0].category, cat, "{text}");
        }
    }

    #[test]
    fn supervisor_round_trip() {
        let a = fixtures::fix_b();
        let sigma = a.alphabet().clone();
        let decisions: Vec<EventSet> = a
            .states()
            .map(|x| {
                if x.index() % 2 == 0 {
                    sigma.full()
                } else {
                    EventSet::EMPTY
                }
            })
            .collect();
        let text = write_supervisor(&a, &decisions);
        assert!(text.contains("decision 0: a b c\n"));
        assert!(text.contains("decision 1:\n"));
        let (b, d) = parse_supervisor(&text).unwrap();
        assert_eq!(b, a);
        assert_eq!(d, decisions);
        let missing = parse_supervisor(&write_automaton(&a)).unwrap_err();
        assert_eq!(missing.items.len(), a.num_states());
    }
}
