//! Brute-force reference implementations and random problem generation.
//!
//! Nothing here uses the determinization, observer, product or verifier
//! code of the rest of the crate: state sets are plain `BTreeSet`s of state
//! indices and every property is evaluated string by string, following the
//! quantifiers of its definition. Strings that reach an already seen
//! configuration are not extended again, since every property below depends
//! on a string only through its configuration.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::automaton::{Automaton, AutomatonBuilder, AutomatonError, StateId};
use crate::event::{Alphabet, EventId, EventSet, EventString};
use crate::problem::{AgentProfile, Architecture, ControlProblem, DefaultSplit};

type States = BTreeSet<usize>;

fn post(a: &Automaton, from: &States, e: EventId) -> States {
    let mut out = States::new();
    for &x in from {
        for &(f, y) in a.transitions_from(StateId::from_index(x)) {
            if f == e {
                out.insert(y.index());
            }
        }
    }
    out
}

fn any_marked(a: &Automaton, set: &States) -> bool {
    set.iter().any(|&x| a.is_marked(StateId::from_index(x)))
}

fn start(a: &Automaton) -> States {
    States::from([a.initial().index()])
}

/// Every string of length at most `depth` generated by an automaton, each
/// tagged with whether it is marked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedLanguage {
    pub depth: usize,
    pub strings: BTreeMap<EventString, bool>,
}

impl BoundedLanguage {
    pub fn contains(&self, s: &EventString) -> bool {
        self.strings.contains_key(s)
    }

    pub fn is_marked(&self, s: &EventString) -> bool {
        self.strings.get(s).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn marked(&self) -> impl Iterator<Item = &EventString> {
        self.strings.iter().filter(|(_, &m)| m).map(|(s, _)| s)
    }
}

/// `L(a)` and `L_m(a)` up to length `depth`, by breadth-first expansion.
pub fn enumerate(a: &Automaton, depth: usize) -> BoundedLanguage {
    let mut strings = BTreeMap::new();
    let mut layer = vec![(EventString::epsilon(), start(a))];
    for len in 0..=depth {
        let mut next = Vec::new();
        for (s, set) in layer {
            strings.insert(s.clone(), any_marked(a, &set));
            if len == depth {
                continue;
            }
            for e in a.alphabet().events() {
                let to = post(a, &set, e);
                if !to.is_empty() {
                    next.push((s.with(e), to));
                }
            }
        }
        layer = next;
    }
    BoundedLanguage { depth, strings }
}

fn naive_subsets(a: &Automaton) -> Vec<(States, Vec<(EventId, usize)>)> {
    let mut index: BTreeMap<States, usize> = BTreeMap::new();
    let mut nodes: Vec<(States, Vec<(EventId, usize)>)> = Vec::new();
    index.insert(start(a), 0);
    nodes.push((start(a), Vec::new()));
    let mut i = 0;
    while i < nodes.len() {
        let set = nodes[i].0.clone();
        for e in a.alphabet().events() {
            let to = post(a, &set, e);
            if to.is_empty() {
                continue;
            }
            let j = *index.entry(to.clone()).or_insert_with(|| {
                nodes.push((to, Vec::new()));
                nodes.len() - 1
            });
            nodes[i].1.push((e, j));
        }
        i += 1;
    }
    nodes
}

/// Deterministic automaton from the plain subset construction, without
/// minimization.
pub fn naive_determinize(a: &Automaton) -> Automaton {
    let nodes = naive_subsets(a);
    let mut b = AutomatonBuilder::new(a.alphabet().clone());
    for (i, (set, _)) in nodes.iter().enumerate() {
        let x = b.add_state_unique(format!("s{i}"));
        if any_marked(a, set) {
            b.mark(x);
        }
    }
    for (i, (_, out)) in nodes.iter().enumerate() {
        for &(e, j) in out {
            b.transition(StateId::from_index(i), e, StateId::from_index(j));
        }
    }
    b.set_initial(StateId::from_index(0));
    b.build().expect("subset automaton is well formed")
}

fn naive_product(a: &Automaton, b: &Automaton) -> Automaton {
    let mut builder = AutomatonBuilder::new(a.alphabet().clone());
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut pairs = vec![(a.initial().index(), b.initial().index())];
    index.insert(pairs[0], 0);
    let mut edges = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (x, y) = pairs[i];
        for &(e, x2) in a.transitions_from(StateId::from_index(x)) {
            for &(f, y2) in b.transitions_from(StateId::from_index(y)) {
                if e == f {
                    let key = (x2.index(), y2.index());
                    let j = *index.entry(key).or_insert_with(|| {
                        pairs.push(key);
                        pairs.len() - 1
                    });
                    edges.push((i, e, j));
                }
            }
        }
        i += 1;
    }
    for (k, &(x, y)) in pairs.iter().enumerate() {
        let id = builder.add_state_unique(format!("p{k}"));
        if a.is_marked(StateId::from_index(x)) && b.is_marked(StateId::from_index(y)) {
            builder.mark(id);
        }
    }
    for (i, e, j) in edges {
        builder.transition(StateId::from_index(i), e, StateId::from_index(j));
    }
    builder.set_initial(StateId::from_index(0));
    builder.build().expect("product is well formed")
}

/// Greatest bisimulation by pair elimination over the full pair table.
pub fn naive_bisim(a: &Automaton, b: &Automaton) -> Result<bool, AutomatonError> {
    if a.alphabet() != b.alphabet() {
        return Err(AutomatonError::AlphabetMismatch);
    }
    let (na, nb) = (a.num_states(), b.num_states());
    let mut rel = vec![vec![false; nb]; na];
    for x in a.states() {
        for y in b.states() {
            rel[x.index()][y.index()] = a.is_marked(x) == b.is_marked(y);
        }
    }
    loop {
        let mut changed = false;
        for x in a.states() {
            for y in b.states() {
                if !rel[x.index()][y.index()] {
                    continue;
                }
                let forth = a.transitions_from(x).iter().all(|&(e, x2)| {
                    b.transitions_from(y)
                        .iter()
                        .any(|&(f, y2)| f == e && rel[x2.index()][y2.index()])
                });
                let back = b.transitions_from(y).iter().all(|&(f, y2)| {
                    a.transitions_from(x)
                        .iter()
                        .any(|&(e, x2)| f == e && rel[x2.index()][y2.index()])
                });
                if !(forth && back) {
                    rel[x.index()][y.index()] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(rel[a.initial().index()][b.initial().index()]);
        }
    }
}

/// Length bound beyond which two automata cannot first disagree on their
/// languages: the product of their subset-construction sizes, plus one.
pub fn sound_depth_bound(a: &Automaton, b: &Automaton) -> usize {
    naive_subsets(a).len() * naive_subsets(b).len() + 1
}

/// Compares `L` and `L_m` of two automata on all strings up to `depth`,
/// returning the first string on which they differ.
pub fn bounded_language_difference(
    a: &Automaton,
    b: &Automaton,
    depth: usize,
) -> Option<EventString> {
    let mut seen: HashSet<(States, States)> = HashSet::new();
    let mut queue = VecDeque::from([(EventString::epsilon(), start(a), start(b))]);
    while let Some((s, x, y)) = queue.pop_front() {
        if x.is_empty() != y.is_empty() || any_marked(a, &x) != any_marked(b, &y) {
            return Some(s);
        }
        if x.is_empty() || s.len() == depth || !seen.insert((x.clone(), y.clone())) {
            continue;
        }
        for e in a.alphabet().events() {
            queue.push_back((s.with(e), post(a, &x, e), post(b, &y, e)));
        }
    }
    None
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("property `gen-coobservable` needs an enable/disable default split")]
    MissingSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    LangControllable,
    CpCoobservable,
    DaCoobservable,
    GenCoobservable,
    MarkedLangClosed,
    BisimPlantDetspec,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::BisimPlantDetspec,
        Property::LangControllable,
        Property::CpCoobservable,
        Property::DaCoobservable,
        Property::GenCoobservable,
        Property::MarkedLangClosed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Property::LangControllable => "lang-controllable",
            Property::CpCoobservable => "cp-coobservable",
            Property::DaCoobservable => "da-coobservable",
            Property::GenCoobservable => "gen-coobservable",
            Property::MarkedLangClosed => "marked-lang-closed",
            Property::BisimPlantDetspec => "bisim-plant-detspec",
        }
    }
}

impl FromStr for Property {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Property::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| OracleError::UnknownProperty(s.to_string()))
    }
}

/// Result of a brute-force evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub holds: bool,
    /// First violating string and event in breadth-first order.
    pub witness: Option<(EventString, Option<EventId>)>,
    pub depth: usize,
    pub sound_bound: usize,
    /// Every reachable configuration was visited within `depth`.
    pub exhaustive: bool,
}

impl OracleVerdict {
    /// True when the verdict is exact rather than bounded only.
    pub fn is_exact(&self) -> bool {
        self.exhaustive || self.depth >= self.sound_bound
    }
}

/// Sound depth bound for a problem: from the plant and specification sizes.
pub fn problem_depth_bound(p: &ControlProblem) -> usize {
    sound_depth_bound(p.plant(), p.spec())
}

// What an agent considers possible: (plant states, spec states) reached by
// each string of L(R) it cannot tell apart from the true one.
type Estimate = BTreeSet<(States, States)>;

#[derive(Clone, PartialEq, Eq, Hash)]
struct Config {
    plant: States,
    spec: States,
    estimates: Vec<Estimate>,
}

struct Literal<'a> {
    g: &'a Automaton,
    r: &'a Automaton,
    agents: &'a [AgentProfile],
}

impl Literal<'_> {
    fn close(&self, agent: &AgentProfile, mut est: Estimate) -> Estimate {
        let mut stack: Vec<(States, States)> = est.iter().cloned().collect();
        while let Some((x, q)) = stack.pop() {
            for e in self.g.alphabet().events() {
                if agent.observable.contains(e) {
                    continue;
                }
                let q2 = post(self.r, &q, e);
                if q2.is_empty() {
                    continue;
                }
                let item = (post(self.g, &x, e), q2);
                if est.insert(item.clone()) {
                    stack.push(item);
                }
            }
        }
        est
    }

    fn initial(&self) -> Config {
        let seed = (start(self.g), start(self.r));
        Config {
            plant: seed.0.clone(),
            spec: seed.1.clone(),
            estimates: self
                .agents
                .iter()
                .map(|a| self.close(a, Estimate::from([seed.clone()])))
                .collect(),
        }
    }

    fn step(&self, c: &Config, e: EventId) -> Option<Config> {
        let spec = post(self.r, &c.spec, e);
        if spec.is_empty() {
            return None;
        }
        let estimates = self
            .agents
            .iter()
            .zip(&c.estimates)
            .map(|(a, est)| {
                if !a.observable.contains(e) {
                    return est.clone();
                }
                let moved = est
                    .iter()
                    .filter_map(|(x, q)| {
                        let q2 = post(self.r, q, e);
                        (!q2.is_empty()).then(|| (post(self.g, x, e), q2))
                    })
                    .collect();
                self.close(a, moved)
            })
            .collect();
        Some(Config {
            plant: post(self.g, &c.plant, e),
            spec,
            estimates,
        })
    }

    fn in_g(&self, x: &States, e: EventId) -> bool {
        !post(self.g, x, e).is_empty()
    }

    fn in_r(&self, q: &States, e: EventId) -> bool {
        !post(self.r, q, e).is_empty()
    }

    /// For some `i` with `σ ∈ C_i`, every confusing string is unable to
    /// continue with `σ` inside `L(R)`.
    fn cp_violation(&self, c: &Config, sets: &[EventSet]) -> Option<EventId> {
        let all = sets.iter().fold(EventSet::EMPTY, |a, &b| a.union(b));
        all.iter().find(|&e| {
            self.in_g(&c.plant, e)
                && !self.in_r(&c.spec, e)
                && !(0..self.agents.len()).any(|i| {
                    sets[i].contains(e) && c.estimates[i].iter().all(|(_, q)| !self.in_r(q, e))
                })
        })
    }

    /// For some `i` with `σ ∈ C_i`, every confusing string that continues
    /// with `σ` in `L(G)` also continues in `L(R)`.
    fn da_violation(&self, c: &Config, sets: &[EventSet]) -> Option<EventId> {
        let all = sets.iter().fold(EventSet::EMPTY, |a, &b| a.union(b));
        all.iter().find(|&e| {
            self.in_r(&c.spec, e)
                && !(0..self.agents.len()).any(|i| {
                    sets[i].contains(e)
                        && c.estimates[i]
                            .iter()
                            .all(|(x, q)| !self.in_g(x, e) || self.in_r(q, e))
                })
        })
    }
}

/// Evaluates `property` on `p` by literal iteration over the strings of
/// `L(R)` up to length `depth`.
pub fn oracle_check(
    property: &str,
    p: &ControlProblem,
    depth: usize,
) -> Result<OracleVerdict, OracleError> {
    let property: Property = property.parse()?;
    let sound_bound = problem_depth_bound(p);
    if property == Property::BisimPlantDetspec {
        let gd = naive_product(p.plant(), &naive_determinize(p.spec()));
        let holds = naive_bisim(&gd, p.spec()).expect("shared alphabet");
        return Ok(OracleVerdict {
            holds,
            witness: None,
            depth,
            sound_bound,
            exhaustive: true,
        });
    }
    let split = p.split();
    let sets_for = |restrict: Option<EventSet>| -> Vec<EventSet> {
        p.agents()
            .iter()
            .map(|a| restrict.map_or(a.controllable, |r| a.controllable.intersection(r)))
            .collect()
    };
    let (cp_sets, da_sets) = match property {
        Property::CpCoobservable => (Some(sets_for(None)), None),
        Property::DaCoobservable => (None, Some(sets_for(None))),
        Property::GenCoobservable => {
            let s = split.ok_or(OracleError::MissingSplit)?;
            (
                Some(sets_for(Some(s.enable))),
                Some(sets_for(Some(s.disable))),
            )
        }
        _ => (None, None),
    };
    let uc = p.uncontrollable();
    let lit = Literal {
        g: p.plant(),
        r: p.spec(),
        agents: p.agents(),
    };
    let violation = |c: &Config| -> Option<Option<EventId>> {
        match property {
            Property::LangControllable => uc
                .iter()
                .find(|&e| lit.in_g(&c.plant, e) && !lit.in_r(&c.spec, e))
                .map(Some),
            Property::MarkedLangClosed => {
                (any_marked(lit.g, &c.plant) && !any_marked(lit.r, &c.spec)).then_some(None)
            }
            _ => {
                let cp = cp_sets.as_ref().and_then(|s| lit.cp_violation(c, s));
                let da = da_sets.as_ref().and_then(|s| lit.da_violation(c, s));
                cp.or(da).map(Some)
            }
        }
    };

    let mut seen: HashSet<Config> = HashSet::new();
    let init = lit.initial();
    seen.insert(init.clone());
    let mut layer = vec![(EventString::epsilon(), init)];
    let mut exhaustive = true;
    for len in 0..=depth {
        let mut next = Vec::new();
        for (s, c) in &layer {
            if let Some(sigma) = violation(c) {
                return Ok(OracleVerdict {
                    holds: false,
                    witness: Some((s.clone(), sigma)),
                    depth,
                    sound_bound,
                    exhaustive: true,
                });
            }
            for e in p.alphabet().events() {
                if let Some(c2) = lit.step(c, e) {
                    if !seen.contains(&c2) {
                        if len == depth {
                            exhaustive = false;
                        } else {
                            seen.insert(c2.clone());
                            next.push((s.with(e), c2));
                        }
                    }
                }
            }
        }
        layer = next;
    }
    Ok(OracleVerdict {
        holds: true,
        witness: None,
        depth,
        sound_bound,
        exhaustive,
    })
}

/// Size limits for [`random_problem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomLimits {
    pub plant_states: usize,
    pub spec_states: usize,
    pub agents: usize,
    pub events: usize,
}

impl Default for RandomLimits {
    fn default() -> Self {
        RandomLimits {
            plant_states: 6,
            spec_states: 5,
            agents: 3,
            events: 5,
        }
    }
}

fn event_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("e{i}")
    }
}

fn random_subset(rng: &mut ChaCha8Rng, sigma: EventSet, p: f64) -> EventSet {
    sigma.iter().filter(|_| rng.gen_bool(p)).collect()
}

/// A reproducible random problem. The specification is built as a copy of
/// part of the plant: every specification state shadows a plant state and
/// only copies transitions that the shadowed state has, so the
/// specification's language is contained in the plant's.
pub fn random_problem(seed: u64, limits: RandomLimits) -> ControlProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = if limits.events == 0 {
        0
    } else {
        rng.gen_range(1..=limits.events)
    };
    let alphabet = Alphabet::new((0..m).map(event_name)).expect("small alphabet");
    let sigma = alphabet.full();
    let n = rng.gen_range(1..=limits.plant_states.max(1));

    let mut g = AutomatonBuilder::new(alphabet.clone());
    for i in 0..n {
        let x = g.add_state(format!("x{i}")).expect("fresh name");
        if rng.gen_bool(0.4) {
            g.mark(x);
        }
    }
    g.set_initial(StateId::from_index(0));
    let mut plant_edges: Vec<Vec<(EventId, usize)>> = vec![Vec::new(); n];
    for (x, edges) in plant_edges.iter_mut().enumerate() {
        for e in alphabet.events() {
            if rng.gen_bool(0.45) {
                edges.push((e, rng.gen_range(0..n)));
                if rng.gen_bool(0.15) {
                    edges.push((e, rng.gen_range(0..n)));
                }
            }
        }
        for &(e, y) in edges.iter() {
            g.transition(StateId::from_index(x), e, StateId::from_index(y));
        }
    }
    let plant = g.build().expect("plant is well formed");

    let cap = limits.spec_states.max(1);
    let mut shadow: Vec<usize> = vec![0];
    let mut spec_edges: Vec<(usize, EventId, usize)> = Vec::new();
    let mut i = 0;
    while i < shadow.len() {
        let x = shadow[i];
        for &(e, y) in &plant_edges[x] {
            if !rng.gen_bool(0.75) {
                continue;
            }
            let existing: Vec<usize> = (0..shadow.len()).filter(|&q| shadow[q] == y).collect();
            let fresh = shadow.len() < cap && (existing.is_empty() || rng.gen_bool(0.4));
            let target = if fresh {
                shadow.push(y);
                shadow.len() - 1
            } else if existing.is_empty() {
                continue;
            } else {
                existing[rng.gen_range(0..existing.len())]
            };
            spec_edges.push((i, e, target));
        }
        i += 1;
    }
    let mut r = AutomatonBuilder::new(alphabet.clone());
    for (q, &x) in shadow.iter().enumerate() {
        let id = r.add_state(format!("q{q}")).expect("fresh name");
        let p = if plant.is_marked(StateId::from_index(x)) {
            0.85
        } else {
            0.15
        };
        if rng.gen_bool(p) {
            r.mark(id);
        }
    }
    for (q, e, q2) in spec_edges {
        r.transition(StateId::from_index(q), e, StateId::from_index(q2));
    }
    r.set_initial(StateId::from_index(0));
    let spec = r.build().expect("spec is well formed");

    let k = rng.gen_range(1..=limits.agents.max(1));
    let agents: Vec<AgentProfile> = (1..=k)
        .map(|index| AgentProfile {
            index,
            controllable: random_subset(&mut rng, sigma, 0.5),
            observable: random_subset(&mut rng, sigma, 0.6),
        })
        .collect();
    let controllable = agents
        .iter()
        .fold(EventSet::EMPTY, |a, b| a.union(b.controllable));
    let architecture = Architecture::ALL[rng.gen_range(0..3)];
    let enable = random_subset(&mut rng, controllable, 0.5);
    let split = DefaultSplit {
        enable,
        disable: controllable.difference(enable),
    };
    ControlProblem::new(plant, spec, agents, architecture, Some(split))
        .expect("generated problems are valid")
}
