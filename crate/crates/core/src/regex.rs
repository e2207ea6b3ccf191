//! Regular expressions over named events, compiled with the position
//! (Glushkov) construction into an automaton without silent moves.
//!
//! Syntax: event names separated by whitespace denote concatenation, `+` or
//! `|` denotes union, a postfix `*` denotes Kleene star, and parentheses
//! group. The compiled automaton marks exactly the strings of the expression
//! and generates their prefixes.

use std::sync::Arc;

use thiserror::Error;

use crate::automaton::{Automaton, AutomatonBuilder, StateId};
use crate::event::{Alphabet, EventId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegexError {
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unexpected `{0}` at token {1}")]
    Unexpected(String, usize),
    #[error("unexpected end of expression")]
    UnexpectedEnd,
}

#[derive(Debug, Clone)]
enum Node {
    Symbol(usize),
    Concat(Vec<Node>),
    Union(Vec<Node>),
    Star(Box<Node>),
}

struct Parser<'a> {
    tokens: Vec<&'a str>,
    pos: usize,
    alphabet: &'a Alphabet,
    symbols: Vec<EventId>,
}

fn tokenize(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        let special = matches!(c, '+' | '|' | '*' | '(' | ')');
        if c.is_whitespace() || special {
            if let Some(s) = start.take() {
                out.push(&text[s..i]);
            }
            if special {
                out.push(&text[i..i + 1]);
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(&text[s..]);
    }
    out
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).copied()
    }

    fn union(&mut self) -> Result<Node, RegexError> {
        let mut alts = vec![self.concat()?];
        while matches!(self.peek(), Some("+") | Some("|")) {
            self.pos += 1;
            alts.push(self.concat()?);
        }
        Ok(if alts.len() == 1 {
            alts.pop().unwrap()
        } else {
            Node::Union(alts)
        })
    }

    fn concat(&mut self) -> Result<Node, RegexError> {
        let mut parts = Vec::new();
        while let Some(t) = self.peek() {
            if matches!(t, "+" | "|" | ")") {
                break;
            }
            parts.push(self.starred()?);
        }
        match parts.len() {
            0 => match self.peek() {
                Some(t) => Err(RegexError::Unexpected(t.to_string(), self.pos)),
                None => Err(RegexError::UnexpectedEnd),
            },
            1 => Ok(parts.pop().unwrap()),
            _ => Ok(Node::Concat(parts)),
        }
    }

    fn starred(&mut self) -> Result<Node, RegexError> {
        let mut node = self.atom()?;
        while self.peek() == Some("*") {
            self.pos += 1;
            node = Node::Star(Box::new(node));
        }
        Ok(node)
    }

    fn atom(&mut self) -> Result<Node, RegexError> {
        let t = self.peek().ok_or(RegexError::UnexpectedEnd)?;
        match t {
            "(" => {
                self.pos += 1;
                let inner = self.union()?;
                match self.peek() {
                    Some(")") => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    Some(t) => Err(RegexError::Unexpected(t.to_string(), self.pos)),
                    None => Err(RegexError::UnexpectedEnd),
                }
            }
            "*" | ")" => Err(RegexError::Unexpected(t.to_string(), self.pos)),
            name => {
                let e = self
                    .alphabet
                    .id(name)
                    .ok_or_else(|| RegexError::UnknownEvent(name.to_string()))?;
                self.pos += 1;
                self.symbols.push(e);
                Ok(Node::Symbol(self.symbols.len() - 1))
            }
        }
    }
}

struct Info {
    nullable: bool,
    first: Vec<usize>,
    last: Vec<usize>,
}

fn analyse(node: &Node, follow: &mut [Vec<usize>]) -> Info {
    match node {
        Node::Symbol(p) => Info {
            nullable: false,
            first: vec![*p],
            last: vec![*p],
        },
        Node::Union(alts) => {
            let mut out = Info {
                nullable: false,
                first: Vec::new(),
                last: Vec::new(),
            };
            for a in alts {
                let i = analyse(a, follow);
                out.nullable |= i.nullable;
                out.first.extend(i.first);
                out.last.extend(i.last);
            }
            out
        }
        Node::Concat(parts) => {
            let mut out = Info {
                nullable: true,
                first: Vec::new(),
                last: Vec::new(),
            };
            for part in parts {
                let i = analyse(part, follow);
                for &l in &out.last {
                    follow[l].extend(i.first.iter().copied());
                }
                if out.nullable {
                    out.first.extend(i.first.iter().copied());
                }
                if i.nullable {
                    out.last.extend(i.last);
                } else {
                    out.last = i.last;
                }
                out.nullable &= i.nullable;
            }
            out
        }
        Node::Star(inner) => {
            let i = analyse(inner, follow);
            for &l in &i.last {
                follow[l].extend(i.first.iter().copied());
            }
            Info {
                nullable: true,
                first: i.first,
                last: i.last,
            }
        }
    }
}

/// Compiles `text` into an automaton over `alphabet`. State `0` is initial
/// and state `p` stands for the `p`-th event occurrence of the expression.
pub fn compile(alphabet: &Arc<Alphabet>, text: &str) -> Result<Automaton, RegexError> {
    let mut parser = Parser {
        tokens: tokenize(text),
        pos: 0,
        alphabet,
        symbols: Vec::new(),
    };
    let root = parser.union()?;
    if let Some(t) = parser.peek() {
        return Err(RegexError::Unexpected(t.to_string(), parser.pos));
    }
    let n = parser.symbols.len();
    let mut follow = vec![Vec::new(); n];
    let info = analyse(&root, &mut follow);

    let mut b = AutomatonBuilder::new(alphabet.clone());
    for i in 0..=n {
        b.add_state(i.to_string())
            .expect("numeric names are unique");
    }
    let pos = |p: usize| StateId::from_index(p + 1);
    b.set_initial(StateId::from_index(0));
    if info.nullable {
        b.mark(StateId::from_index(0));
    }
    for &l in &info.last {
        b.mark(pos(l));
    }
    for &f in &info.first {
        b.transition(StateId::from_index(0), parser.symbols[f], pos(f));
    }
    for (p, next) in follow.iter().enumerate() {
        for &q in next {
            b.transition(pos(p), parser.symbols[q], pos(q));
        }
    }
    Ok(b.build().expect("positions are declared"))
}
