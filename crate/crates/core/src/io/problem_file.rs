//! Problem files.
//!
//! ```text
//! plant example1_plant.aut
//! spec example1_spec.aut
//! architecture conjunctive
//! agent 1 { controllable: b1 b2 d1 d2 d3; observable: a c b1 b2 d1 d2 }
//! agent 2 { controllable: b3 d3; observable: a c b3 d3 }
//! enable-default: f e
//! disable-default: a
//! output out
//! ```
//!
//! Agent blocks may span several lines. Automaton paths are resolved
//! relative to the problem file.

use std::fmt::Write as _;
use std::path::Path;

use crate::event::{Alphabet, EventSet};
use crate::problem::{AgentProfile, Architecture, ControlProblem, DefaultSplit, ProblemError};

use super::text::parse_automaton;
use super::{Category, Diagnostic, Diagnostics};

/// Source position that never takes part in equality.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentBlock {
    pub index: usize,
    pub controllable: Vec<Word>,
    pub observable: Vec<Word>,
    pub span: Span,
}

/// Syntactic content of a problem file, before automata are loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemFile {
    pub plant: String,
    pub spec: String,
    pub architecture: Architecture,
    pub agents: Vec<AgentBlock>,
    pub enable_default: Option<Vec<Word>>,
    pub disable_default: Option<Vec<Word>>,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Open,
    Close,
    Semi,
    Colon,
    Newline,
}

fn lex(text: &str) -> Vec<(Tok, Span)> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut word: Option<(usize, String)> = None;
        let flush = |word: &mut Option<(usize, String)>, out: &mut Vec<(Tok, Span)>| {
            if let Some((col, w)) = word.take() {
                out.push((
                    Tok::Word(w),
                    Span {
                        line: i + 1,
                        column: col,
                    },
                ));
            }
        };
        for (j, c) in line.chars().enumerate() {
            let span = Span {
                line: i + 1,
                column: j + 1,
            };
            let punct = match c {
                '{' => Some(Tok::Open),
                '}' => Some(Tok::Close),
                ';' => Some(Tok::Semi),
                ':' => Some(Tok::Colon),
                _ => None,
            };
            if c == '#' {
                break;
            } else if let Some(t) = punct {
                flush(&mut word, &mut out);
                out.push((t, span));
            } else if c.is_whitespace() {
                flush(&mut word, &mut out);
            } else {
                word.get_or_insert_with(|| (j + 1, String::new())).1.push(c);
            }
        }
        flush(&mut word, &mut out);
        out.push((
            Tok::Newline,
            Span {
                line: i + 1,
                column: line.chars().count() + 1,
            },
        ));
    }
    out
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, Span)> {
        self.toks.get(self.pos)
    }

    fn end_span(&self) -> Span {
        self.toks
            .last()
            .map(|t| t.1)
            .unwrap_or(Span { line: 1, column: 1 })
    }

    fn error(&mut self, span: Span, category: Category, msg: impl Into<String>) {
        self.diags
            .push(Diagnostic::new(span.line, span.column, category, msg));
    }

    fn skip_line(&mut self) {
        while let Some((t, _)) = self.peek() {
            let newline = *t == Tok::Newline;
            self.pos += 1;
            if newline {
                break;
            }
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> bool {
        match self.peek().cloned() {
            Some((t, _)) if t == want => {
                self.pos += 1;
                true
            }
            Some((_, span)) => {
                self.error(span, Category::Syntax, format!("expected {what}"));
                false
            }
            None => {
                let span = self.end_span();
                self.error(span, Category::Syntax, format!("expected {what}"));
                false
            }
        }
    }

    fn word(&mut self, what: &str) -> Option<Word> {
        match self.peek().cloned() {
            Some((Tok::Word(w), span)) => {
                self.pos += 1;
                Some(Word { text: w, span })
            }
            Some((_, span)) => {
                self.error(span, Category::Syntax, format!("expected {what}"));
                None
            }
            None => {
                let span = self.end_span();
                self.error(span, Category::Syntax, format!("expected {what}"));
                None
            }
        }
    }

    fn end_of_statement(&mut self) {
        if let Some((t, span)) = self.peek().cloned() {
            if t != Tok::Newline {
                self.error(span, Category::Syntax, "unexpected trailing input");
            }
        }
        self.skip_line();
    }

    fn words_until(&mut self, stop: &[Tok]) -> Vec<Word> {
        let mut out = Vec::new();
        while let Some((t, span)) = self.peek().cloned() {
            match t {
                Tok::Word(w) => {
                    out.push(Word { text: w, span });
                    self.pos += 1;
                }
                Tok::Newline if !stop.contains(&Tok::Newline) => self.pos += 1,
                t if stop.contains(&t) => break,
                _ => {
                    self.error(
                        span,
                        Category::Syntax,
                        "unexpected punctuation in event list",
                    );
                    self.pos += 1;
                }
            }
        }
        out
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek(), Some((Tok::Newline, _))) {
            self.pos += 1;
        }
    }

    fn agent(&mut self, span: Span) -> Option<AgentBlock> {
        let n = self.word("agent number")?;
        let Ok(index) = n.text.parse::<usize>() else {
            self.error(
                n.span,
                Category::Syntax,
                format!("agent number expected, found `{}`", n.text),
            );
            return None;
        };
        self.skip_newlines();
        if !self.expect(Tok::Open, "`{`") {
            return None;
        }
        let mut controllable = None;
        let mut observable = None;
        loop {
            self.skip_newlines();
            match self.peek().cloned() {
                Some((Tok::Close, _)) => {
                    self.pos += 1;
                    break;
                }
                Some((Tok::Semi, _)) => {
                    self.pos += 1;
                    continue;
                }
                _ => {}
            }
            let field = self.word("`controllable`, `observable` or `}`")?;
            self.skip_newlines();
            if !self.expect(Tok::Colon, "`:`") {
                return None;
            }
            let list = self.words_until(&[Tok::Semi, Tok::Close]);
            let slot = match field.text.as_str() {
                "controllable" => &mut controllable,
                "observable" => &mut observable,
                other => {
                    self.error(
                        field.span,
                        Category::Syntax,
                        format!("unknown agent field `{other}`"),
                    );
                    continue;
                }
            };
            if slot.replace(list).is_some() {
                self.error(
                    field.span,
                    Category::Duplicate,
                    format!("field `{}` given twice", field.text),
                );
            }
        }
        let mut missing = |name: &str, v: Option<Vec<Word>>| {
            v.unwrap_or_else(|| {
                self.diags.push(Diagnostic::new(
                    span.line,
                    span.column,
                    Category::MissingDeclaration,
                    format!("agent {index} has no `{name}` field"),
                ));
                Vec::new()
            })
        };
        let controllable = missing("controllable", controllable);
        let observable = missing("observable", observable);
        Some(AgentBlock {
            index,
            controllable,
            observable,
            span,
        })
    }
}

/// Parses the syntax of a problem file without loading the automata.
pub fn parse_problem_file(text: &str) -> Result<ProblemFile, Diagnostics> {
    let mut p = Parser {
        toks: lex(text),
        pos: 0,
        diags: Vec::new(),
    };
    let mut plant = None;
    let mut spec = None;
    let mut architecture = None;
    let mut agents = Vec::new();
    let mut enable_default = None;
    let mut disable_default = None;
    let mut output = None;

    while let Some((tok, span)) = p.peek().cloned() {
        let Tok::Word(key) = tok else {
            if tok != Tok::Newline {
                p.error(span, Category::Syntax, "expected a keyword");
            }
            p.skip_line();
            continue;
        };
        p.pos += 1;
        match key.as_str() {
            "plant" | "spec" | "output" => {
                if let Some(w) = p.word("a path") {
                    let slot = match key.as_str() {
                        "plant" => &mut plant,
                        "spec" => &mut spec,
                        _ => &mut output,
                    };
                    if slot.replace(w.text).is_some() {
                        p.error(span, Category::Duplicate, format!("`{key}` given twice"));
                    }
                }
                p.end_of_statement();
            }
            "architecture" => {
                if let Some(w) = p.word("an architecture") {
                    match w.text.parse::<Architecture>() {
                        Ok(a) => {
                            if architecture.replace(a).is_some() {
                                p.error(span, Category::Duplicate, "`architecture` given twice");
                            }
                        }
                        Err(e) => p.error(w.span, Category::Invalid, e),
                    }
                }
                p.end_of_statement();
            }
            "agent" => match p.agent(span) {
                Some(block) => {
                    if agents.iter().any(|a: &AgentBlock| a.index == block.index) {
                        p.error(
                            span,
                            Category::Duplicate,
                            format!("agent {} declared twice", block.index),
                        );
                    }
                    agents.push(block);
                    p.end_of_statement();
                }
                None => p.skip_line(),
            },
            "enable-default" | "disable-default" => {
                if p.expect(Tok::Colon, "`:`") {
                    let list = p.words_until(&[
                        Tok::Newline,
                        Tok::Semi,
                        Tok::Open,
                        Tok::Close,
                        Tok::Colon,
                    ]);
                    let slot = if key == "enable-default" {
                        &mut enable_default
                    } else {
                        &mut disable_default
                    };
                    if slot.replace(list).is_some() {
                        p.error(span, Category::Duplicate, format!("`{key}` given twice"));
                    }
                }
                p.end_of_statement();
            }
            other => {
                p.error(span, Category::Syntax, format!("unknown keyword `{other}`"));
                p.skip_line();
            }
        }
    }

    let mut require = |name: &str, v: Option<String>| {
        if v.is_none() {
            p.diags.push(Diagnostic::global(
                Category::MissingDeclaration,
                format!("no `{name}` line"),
            ));
        }
        v.unwrap_or_default()
    };
    let plant = require("plant", plant);
    let spec = require("spec", spec);
    if architecture.is_none() {
        p.diags.push(Diagnostic::global(
            Category::MissingDeclaration,
            "no `architecture` line",
        ));
    }
    if agents.is_empty() {
        p.diags.push(Diagnostic::global(
            Category::MissingAgent,
            "no agent blocks",
        ));
    }
    if !p.diags.is_empty() {
        return Err(Diagnostics {
            source: None,
            items: p.diags,
        });
    }
    Ok(ProblemFile {
        plant,
        spec,
        architecture: architecture.expect("checked"),
        agents,
        enable_default,
        disable_default,
        output,
    })
}

fn event_set(alphabet: &Alphabet, words: &[Word], diags: &mut Vec<Diagnostic>) -> EventSet {
    let mut set = EventSet::EMPTY;
    for w in words {
        match alphabet.id(&w.text) {
            Some(e) => set.insert(e),
            None => diags.push(Diagnostic::new(
                w.span.line,
                w.span.column,
                Category::UnknownEvent,
                format!("unknown event `{}`", w.text),
            )),
        }
    }
    set
}

impl ProblemFile {
    /// Loads both automata through `load` (given the paths as written) and
    /// assembles the problem.
    pub fn resolve<F>(&self, mut load: F) -> Result<ControlProblem, Diagnostics>
    where
        F: FnMut(&str) -> Result<String, String>,
    {
        let mut automaton = |path: &str| {
            let text = load(path).map_err(|e| {
                Diagnostics::one(Diagnostic::global(Category::Io, e)).in_source(path)
            })?;
            parse_automaton(&text).map_err(|d| d.in_source(path))
        };
        let plant = automaton(&self.plant)?;
        let spec = automaton(&self.spec)?;
        let alphabet = plant.alphabet().clone();
        let mut diags = Vec::new();
        let agents: Vec<AgentProfile> = self
            .agents
            .iter()
            .map(|b| AgentProfile {
                index: b.index,
                controllable: event_set(&alphabet, &b.controllable, &mut diags),
                observable: event_set(&alphabet, &b.observable, &mut diags),
            })
            .collect();
        let split = match (&self.enable_default, &self.disable_default) {
            (None, None) => None,
            (enable, disable) => {
                let e = event_set(&alphabet, enable.as_deref().unwrap_or_default(), &mut diags);
                let d = event_set(
                    &alphabet,
                    disable.as_deref().unwrap_or_default(),
                    &mut diags,
                );
                let both = e.intersection(d);
                if !both.is_empty() {
                    let at = disable
                        .iter()
                        .flatten()
                        .find(|w| alphabet.id(&w.text).is_some_and(|x| both.contains(x)))
                        .map(|w| w.span)
                        .unwrap_or_default();
                    diags.push(Diagnostic::new(
                        at.line,
                        at.column,
                        Category::Overlap,
                        format!(
                            "events {} are both enable-default and disable-default",
                            alphabet.format_set(both)
                        ),
                    ));
                }
                Some(DefaultSplit {
                    enable: e,
                    disable: d,
                })
            }
        };
        if !diags.is_empty() {
            return Err(Diagnostics {
                source: None,
                items: diags,
            });
        }
        ControlProblem::new(plant, spec, agents, self.architecture, split).map_err(|e| {
            let category = match e {
                ProblemError::SplitOverlap(_) => Category::Overlap,
                ProblemError::SplitCoverage { .. } => Category::Coverage,
                ProblemError::NoAgents => Category::MissingAgent,
                ProblemError::MissingSplit => Category::MissingDeclaration,
                ProblemError::DuplicateAgent(_) => Category::Duplicate,
                _ => Category::Invalid,
            };
            Diagnostics::one(Diagnostic::global(category, e.to_string()))
        })
    }
}

/// Canonical text form of a problem file.
pub fn write_problem_file(f: &ProblemFile) -> String {
    let join = |ws: &[Word]| {
        ws.iter()
            .map(|w| w.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut out = String::new();
    writeln!(out, "plant {}", f.plant).unwrap();
    writeln!(out, "spec {}", f.spec).unwrap();
    writeln!(out, "architecture {}", f.architecture).unwrap();
    for a in &f.agents {
        writeln!(
            out,
            "agent {} {{ controllable: {}; observable: {} }}",
            a.index,
            join(&a.controllable),
            join(&a.observable)
        )
        .unwrap();
    }
    if let Some(e) = &f.enable_default {
        writeln!(out, "enable-default: {}", join(e)).unwrap();
    }
    if let Some(d) = &f.disable_default {
        writeln!(out, "disable-default: {}", join(d)).unwrap();
    }
    if let Some(o) = &f.output {
        writeln!(out, "output {o}").unwrap();
    }
    out
}

/// Parses a problem file and loads the automata it names through `load`.
pub fn parse_problem<F>(text: &str, load: F) -> Result<ControlProblem, Diagnostics>
where
    F: FnMut(&str) -> Result<String, String>,
{
    parse_problem_file(text)?.resolve(load)
}

/// Reads a problem file from disk, resolving automaton paths relative to it.
pub fn load_problem(path: &Path) -> Result<(ProblemFile, ControlProblem), Diagnostics> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| {
        Diagnostics::one(Diagnostic::global(Category::Io, e.to_string())).in_source(&shown)
    })?;
    let file = parse_problem_file(&text).map_err(|d| d.in_source(&shown))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let problem = file
        .resolve(|p| {
            std::fs::read_to_string(base.join(p))
                .map_err(|e| format!("cannot read {}: {e}", base.join(p).display()))
        })
        .map_err(|d| d.in_source(&shown))?;
    Ok((file, problem))
}
