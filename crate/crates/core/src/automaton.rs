//! Finite nondeterministic automata with marking.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use thiserror::Error;

use crate::event::{Alphabet, EventId, EventSet, EventString};

/// Index of a state inside its [`Automaton`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub(crate) u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        StateId(i as u32)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` declared twice")]
    DuplicateState(String),
    #[error("no initial state")]
    MissingInitial,
    #[error("event index {0} is not in the alphabet")]
    ForeignEvent(usize),
    #[error("alphabets differ")]
    AlphabetMismatch,
    #[error("invalid state name `{0}`")]
    InvalidName(String),
}

/// Result of running a string through an automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    /// Some run ends in a marked state (implies in-language).
    Marked,
    /// Some run exists, none ends marked.
    InLanguage,
    Neither,
}

impl Membership {
    pub fn in_language(self) -> bool {
        self != Membership::Neither
    }

    pub fn marked(self) -> bool {
        self == Membership::Marked
    }
}

/// `G = (X, Σ, α, x0, Xm)`: states, alphabet, transition relation, a single
/// initial state and a set of marked states. Several transitions may share a
/// `(state, event)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    alphabet: Arc<Alphabet>,
    names: Vec<String>,
    lookup: HashMap<String, StateId>,
    initial: StateId,
    marked: Vec<bool>,
    // sorted by (event, target), no duplicates
    out: Vec<Vec<(EventId, StateId)>>,
}

impl Automaton {
    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.names.len()).map(StateId::from_index)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_marked(&self, x: StateId) -> bool {
        self.marked[x.index()]
    }

    pub fn marked_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.states().filter(|&x| self.is_marked(x))
    }

    pub fn name(&self, x: StateId) -> &str {
        &self.names[x.index()]
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.lookup.get(name).copied()
    }

    /// Outgoing transitions of `x`, sorted by event then target.
    pub fn transitions_from(&self, x: StateId) -> &[(EventId, StateId)] {
        &self.out[x.index()]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, EventId, StateId)> + '_ {
        self.states()
            .flat_map(move |x| self.out[x.index()].iter().map(move |&(e, y)| (x, e, y)))
    }

    pub fn successors(&self, x: StateId, e: EventId) -> impl Iterator<Item = StateId> + '_ {
        let row = &self.out[x.index()];
        let start = row.partition_point(|&(f, _)| f < e);
        row[start..]
            .iter()
            .take_while(move |&&(f, _)| f == e)
            .map(|&(_, y)| y)
    }

    /// The unique successor when the automaton is deterministic at `(x, e)`;
    /// the first one otherwise.
    pub fn step(&self, x: StateId, e: EventId) -> Option<StateId> {
        self.successors(x, e).next()
    }

    /// `E_G(x)` without bounds checking of `x`.
    pub fn enabled(&self, x: StateId) -> EventSet {
        self.out[x.index()].iter().map(|&(e, _)| e).collect()
    }

    /// Active event set `E_G(x)`.
    pub fn active_events(&self, x: StateId) -> Result<EventSet, AutomatonError> {
        if x.index() >= self.num_states() {
            return Err(AutomatonError::UnknownState(format!("#{}", x.0)));
        }
        Ok(self.enabled(x))
    }

    pub fn is_deterministic(&self) -> bool {
        self.out
            .iter()
            .all(|row| row.windows(2).all(|w| w[0].0 != w[1].0))
    }

    /// Set of states reached from `from` by `e`, sorted and deduplicated.
    pub fn post(&self, from: &[StateId], e: EventId) -> Vec<StateId> {
        let mut next: Vec<StateId> = from.iter().flat_map(|&x| self.successors(x, e)).collect();
        next.sort_unstable();
        next.dedup();
        next
    }

    /// Membership of `s` in `L(G)` and `L_m(G)`.
    pub fn accepts(&self, s: &EventString) -> Result<Membership, AutomatonError> {
        let mut current = vec![self.initial];
        for e in s.iter() {
            if e.index() >= self.alphabet.len() {
                return Err(AutomatonError::ForeignEvent(e.index()));
            }
            current = self.post(&current, e);
            if current.is_empty() {
                return Ok(Membership::Neither);
            }
        }
        Ok(if current.iter().any(|&x| self.is_marked(x)) {
            Membership::Marked
        } else {
            Membership::InLanguage
        })
    }

    /// Breadth-first order of reachable states, with event-ordered exploration.
    pub fn reachable_order(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![self.initial];
        seen[self.initial.index()] = true;
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            i += 1;
            for &(_, y) in &self.out[x.index()] {
                if !seen[y.index()] {
                    seen[y.index()] = true;
                    order.push(y);
                }
            }
        }
        order
    }

    /// Drops the states that cannot be reached from the initial state.
    /// Surviving states keep their relative order.
    pub fn reachable(&self) -> Automaton {
        let mut keep = vec![false; self.num_states()];
        for x in self.reachable_order() {
            keep[x.index()] = true;
        }
        self.restrict(&keep)
    }

    fn restrict(&self, keep: &[bool]) -> Automaton {
        let mut remap = vec![None; self.num_states()];
        let mut b = AutomatonBuilder::new(self.alphabet.clone());
        for x in self.states().filter(|x| keep[x.index()]) {
            let id = b.add_state_unchecked(self.name(x).to_string());
            if self.is_marked(x) {
                b.mark(id);
            }
            remap[x.index()] = Some(id);
        }
        for (x, e, y) in self.transitions() {
            if let (Some(nx), Some(ny)) = (remap[x.index()], remap[y.index()]) {
                b.transition(nx, e, ny);
            }
        }
        b.set_initial(remap[self.initial.index()].expect("initial is always kept"));
        b.build()
            .expect("restriction of a valid automaton is valid")
    }

    /// The same automaton with its events renumbered to follow `target`,
    /// which must contain exactly the same event names.
    pub fn with_alphabet(&self, target: &Arc<Alphabet>) -> Result<Automaton, AutomatonError> {
        if !self.alphabet.same_events(target) {
            return Err(AutomatonError::AlphabetMismatch);
        }
        if *self.alphabet == **target {
            let mut a = self.clone();
            a.alphabet = target.clone();
            return Ok(a);
        }
        let map: Vec<EventId> = self
            .alphabet
            .names()
            .iter()
            .map(|n| target.id(n).expect("checked above"))
            .collect();
        let mut b = AutomatonBuilder::new(target.clone());
        for x in self.states() {
            b.add_state_unchecked(self.name(x).to_string());
            if self.is_marked(x) {
                b.mark(x);
            }
        }
        for (x, e, y) in self.transitions() {
            b.transition(x, map[e.index()], y);
        }
        b.set_initial(self.initial);
        b.build()
    }

    /// Copy with every state marked.
    pub fn with_all_marked(&self) -> Automaton {
        let mut a = self.clone();
        a.marked.iter_mut().for_each(|m| *m = true);
        a
    }
}

/// Incremental constructor for [`Automaton`].
#[derive(Debug, Clone)]
pub struct AutomatonBuilder {
    alphabet: Arc<Alphabet>,
    names: Vec<String>,
    lookup: HashMap<String, StateId>,
    initial: Option<StateId>,
    marked: Vec<bool>,
    out: Vec<Vec<(EventId, StateId)>>,
}

impl AutomatonBuilder {
    pub fn new(alphabet: Arc<Alphabet>) -> Self {
        AutomatonBuilder {
            alphabet,
            names: Vec::new(),
            lookup: HashMap::new(),
            initial: None,
            marked: Vec::new(),
            out: Vec::new(),
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> Result<StateId, AutomatonError> {
        let name = name.into();
        if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == '#') {
            return Err(AutomatonError::InvalidName(name));
        }
        if self.lookup.contains_key(&name) {
            return Err(AutomatonError::DuplicateState(name));
        }
        Ok(self.add_state_unchecked(name))
    }

    /// Adds a state, renaming it with primes if the name is already taken.
    pub fn add_state_unique(&mut self, name: impl Into<String>) -> StateId {
        let mut name: String = name.into();
        while self.lookup.contains_key(&name) {
            name.push('\'');
        }
        self.add_state_unchecked(name)
    }

    fn add_state_unchecked(&mut self, name: String) -> StateId {
        let id = StateId::from_index(self.names.len());
        self.lookup.insert(name.clone(), id);
        self.names.push(name);
        self.marked.push(false);
        self.out.push(Vec::new());
        id
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.lookup.get(name).copied()
    }

    pub fn set_initial(&mut self, x: StateId) {
        self.initial = Some(x);
    }

    pub fn mark(&mut self, x: StateId) {
        self.marked[x.index()] = true;
    }

    pub fn transition(&mut self, from: StateId, e: EventId, to: StateId) {
        self.out[from.index()].push((e, to));
    }

    pub fn build(mut self) -> Result<Automaton, AutomatonError> {
        let initial = self.initial.ok_or(AutomatonError::MissingInitial)?;
        let n = self.names.len();
        if initial.index() >= n {
            return Err(AutomatonError::UnknownState(format!("#{}", initial.0)));
        }
        for row in &mut self.out {
            for &(e, y) in row.iter() {
                if e.index() >= self.alphabet.len() {
                    return Err(AutomatonError::ForeignEvent(e.index()));
                }
                if y.index() >= n {
                    return Err(AutomatonError::UnknownState(format!("#{}", y.0)));
                }
            }
            row.sort_unstable();
            row.dedup();
        }
        Ok(Automaton {
            alphabet: self.alphabet,
            names: self.names,
            lookup: self.lookup,
            initial,
            marked: self.marked,
            out: self.out,
        })
    }
}

/// Synchronous product together with the component pair behind each state.
pub fn product_pairs(
    a: &Automaton,
    b: &Automaton,
) -> Result<(Automaton, Vec<(StateId, StateId)>), AutomatonError> {
    if a.alphabet() != b.alphabet() {
        return Err(AutomatonError::AlphabetMismatch);
    }
    let mut builder = AutomatonBuilder::new(a.alphabet().clone());
    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut pairs = Vec::new();
    let mut queue = VecDeque::new();

    let mut intern = |builder: &mut AutomatonBuilder,
                      pairs: &mut Vec<(StateId, StateId)>,
                      queue: &mut VecDeque<StateId>,
                      p: (StateId, StateId)| {
        *index.entry(p).or_insert_with(|| {
            let id = builder.add_state_unique(format!("({},{})", a.name(p.0), b.name(p.1)));
            if a.is_marked(p.0) && b.is_marked(p.1) {
                builder.mark(id);
            }
            pairs.push(p);
            queue.push_back(id);
            id
        })
    };

    let init = intern(
        &mut builder,
        &mut pairs,
        &mut queue,
        (a.initial(), b.initial()),
    );
    builder.set_initial(init);
    while let Some(id) = queue.pop_front() {
        let (x, y) = pairs[id.index()];
        for e in a.enabled(x).intersection(b.enabled(y)).iter() {
            for x2 in a.successors(x, e) {
                for y2 in b.successors(y, e) {
                    let to = intern(&mut builder, &mut pairs, &mut queue, (x2, y2));
                    builder.transition(id, e, to);
                }
            }
        }
    }
    Ok((builder.build()?, pairs))
}

/// `G1 || G2`, restricted to reachable pairs.
pub fn product(a: &Automaton, b: &Automaton) -> Result<Automaton, AutomatonError> {
    product_pairs(a, b).map(|(p, _)| p)
}
