//! Events, alphabets, event sets and event strings.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Maximum number of events an alphabet may declare; event sets are 64-bit masks.
pub const MAX_EVENTS: usize = 64;

/// Index of an event inside its [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub(crate) u8);

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        debug_assert!(i < MAX_EVENTS);
        EventId(i as u8)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("alphabet declares {0} events, at most {MAX_EVENTS} are supported")]
    TooLarge(usize),
    #[error("event `{0}` declared twice")]
    Duplicate(String),
    #[error("unknown event `{0}`")]
    Unknown(String),
    #[error("invalid event name `{0}`")]
    InvalidName(String),
}

/// An ordered, finite set of named events. Order is declaration order and is
/// the canonical order used for every tie-break in the crate.
#[derive(Clone)]
pub struct Alphabet {
    names: Vec<String>,
    lookup: HashMap<String, EventId>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Arc<Self>, AlphabetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = Alphabet {
            names: Vec::new(),
            lookup: HashMap::new(),
        };
        for name in names {
            let name = name.into();
            if name.is_empty() || name.chars().any(|c| c.is_whitespace() || c == '#') {
                return Err(AlphabetError::InvalidName(name));
            }
            if out.lookup.contains_key(&name) {
                return Err(AlphabetError::Duplicate(name));
            }
            if out.names.len() == MAX_EVENTS {
                return Err(AlphabetError::TooLarge(out.names.len() + 1));
            }
            out.lookup
                .insert(name.clone(), EventId::from_index(out.names.len()));
            out.names.push(name);
        }
        Ok(Arc::new(out))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<EventId> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, e: EventId) -> &str {
        &self.names[e.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> + '_ {
        (0..self.names.len()).map(EventId::from_index)
    }

    /// The set of every event of the alphabet.
    pub fn full(&self) -> EventSet {
        EventSet::first_n(self.names.len())
    }

    /// Builds an event set from names, failing on the first unknown name.
    pub fn set<I, S>(&self, names: I) -> Result<EventSet, AlphabetError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = EventSet::EMPTY;
        for n in names {
            let n = n.as_ref();
            set.insert(
                self.id(n)
                    .ok_or_else(|| AlphabetError::Unknown(n.to_string()))?,
            );
        }
        Ok(set)
    }

    /// Parses a whitespace-separated list of event names into a string.
    pub fn string(&self, text: &str) -> Result<EventString, AlphabetError> {
        text.split_whitespace()
            .map(|n| {
                self.id(n)
                    .ok_or_else(|| AlphabetError::Unknown(n.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(EventString)
    }

    /// Same events, regardless of declaration order.
    pub fn same_events(&self, other: &Alphabet) -> bool {
        self.len() == other.len() && self.names.iter().all(|n| other.lookup.contains_key(n))
    }

    pub fn format_set(&self, set: EventSet) -> String {
        let names: Vec<&str> = set.iter().map(|e| self.name(e)).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn format_string(&self, s: &EventString) -> String {
        if s.is_empty() {
            "ε".to_string()
        } else {
            s.iter().map(|e| self.name(e)).collect::<Vec<_>>().join("·")
        }
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
    }
}

impl Eq for Alphabet {}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names.iter()).finish()
    }
}

/// A subset of an alphabet, stored as a bit mask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EventSet(u64);

impl EventSet {
    pub const EMPTY: EventSet = EventSet(0);

    pub fn first_n(n: usize) -> Self {
        if n >= 64 {
            EventSet(u64::MAX)
        } else {
            EventSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(e: EventId) -> Self {
        EventSet(1 << e.0)
    }

    pub fn from_bits(bits: u64) -> Self {
        EventSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, e: EventId) -> bool {
        self.0 & (1 << e.0) != 0
    }

    pub fn insert(&mut self, e: EventId) {
        self.0 |= 1 << e.0;
    }

    pub fn remove(&mut self, e: EventId) {
        self.0 &= !(1 << e.0);
    }

    pub fn union(self, other: Self) -> Self {
        EventSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        EventSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        EventSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Events in canonical (index) order.
    pub fn iter(self) -> impl Iterator<Item = EventId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros();
            bits &= bits - 1;
            Some(EventId(i as u8))
        })
    }
}

impl FromIterator<EventId> for EventSet {
    fn from_iter<T: IntoIterator<Item = EventId>>(iter: T) -> Self {
        let mut s = EventSet::EMPTY;
        for e in iter {
            s.insert(e);
        }
        s
    }
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|e| e.0)).finish()
    }
}

/// A finite sequence of events; the empty string is ε.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EventString(pub Vec<EventId>);

impl EventString {
    pub fn epsilon() -> Self {
        EventString(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = EventId> + '_ {
        self.0.iter().copied()
    }

    pub fn push(&mut self, e: EventId) {
        self.0.push(e);
    }

    pub fn with(&self, e: EventId) -> EventString {
        let mut s = self.clone();
        s.push(e);
        s
    }

    pub fn as_slice(&self) -> &[EventId] {
        &self.0
    }
}

impl FromIterator<EventId> for EventString {
    fn from_iter<T: IntoIterator<Item = EventId>>(iter: T) -> Self {
        EventString(iter.into_iter().collect())
    }
}

/// Natural projection: erases every event outside `observable`, keeping order.
pub fn project(s: &EventString, observable: EventSet) -> EventString {
    s.iter().filter(|&e| observable.contains(e)).collect()
}
