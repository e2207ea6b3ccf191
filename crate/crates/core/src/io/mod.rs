//! Text formats, JSON bundles and DOT export.

pub mod dot;
pub mod json;
pub mod problem_file;
pub mod text;

use std::fmt;

use serde::Serialize;

/// Kind of problem a [`Diagnostic`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Syntax,
    UnknownEvent,
    UnknownState,
    Duplicate,
    MissingDeclaration,
    MissingAgent,
    Overlap,
    Coverage,
    Io,
    Invalid,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Category::Syntax => "syntax",
            Category::UnknownEvent => "unknown-event",
            Category::UnknownState => "unknown-state",
            Category::Duplicate => "duplicate",
            Category::MissingDeclaration => "missing-declaration",
            Category::MissingAgent => "missing-agent",
            Category::Overlap => "overlap",
            Category::Coverage => "coverage",
            Category::Io => "io",
            Category::Invalid => "invalid",
        };
        f.write_str(s)
    }
}

/// A located error. Line and column are 1-based; `0` means the whole input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub category: Category,
    pub message: String,
}

impl Diagnostic {
    pub fn new(line: usize, column: usize, category: Category, message: impl Into<String>) -> Self {
        Diagnostic {
            line,
            column,
            category,
            message: message.into(),
        }
    }

    pub fn global(category: Category, message: impl Into<String>) -> Self {
        Diagnostic::new(0, 0, category, message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "[{}] {}", self.category, self.message)
        } else {
            write!(
                f,
                "{}:{}: [{}] {}",
                self.line, self.column, self.category, self.message
            )
        }
    }
}

/// One or more diagnostics, optionally tied to a source name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics {
    pub source: Option<String>,
    pub items: Vec<Diagnostic>,
}

impl Diagnostics {
    pub fn one(d: Diagnostic) -> Self {
        Diagnostics {
            source: None,
            items: vec![d],
        }
    }

    pub fn in_source(mut self, source: impl Into<String>) -> Self {
        if self.source.is_none() {
            self.source = Some(source.into());
        }
        self
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.items.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            match &self.source {
                Some(s) if d.line == 0 => write!(f, "{s}: {d}")?,
                Some(s) => write!(f, "{s}:{d}")?,
                None => write!(f, "{d}")?,
            }
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

impl From<Diagnostic> for Diagnostics {
    fn from(d: Diagnostic) -> Self {
        Diagnostics::one(d)
    }
}

/// Splits a line into whitespace-separated words with 1-based columns.
pub(crate) fn words(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(|(byte, w)| (line[..byte].chars().count() + 1, w))
        .collect()
}

/// The line with any `#` comment removed.
pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}
