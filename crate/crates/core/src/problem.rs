//! Control problems: plant, specification, local agents and architecture.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::automaton::{product_pairs, Automaton, AutomatonError, StateId};
use crate::determinize::{determinize, DeterministicView};
use crate::event::{Alphabet, EventId, EventSet, EventString};

/// How local decisions are fused into a global enabling set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    /// Enable an event only if every agent enables it.
    Conjunctive,
    /// Enable an event if some agent enables it.
    Disjunctive,
    /// Conjunctive on the enable-by-default events, disjunctive on the
    /// disable-by-default events.
    General,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [
        Architecture::Conjunctive,
        Architecture::Disjunctive,
        Architecture::General,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Conjunctive => "conjunctive",
            Architecture::Disjunctive => "disjunctive",
            Architecture::General => "general",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "conjunctive" => Ok(Architecture::Conjunctive),
            "disjunctive" => Ok(Architecture::Disjunctive),
            "general" => Ok(Architecture::General),
            other => Err(format!("unknown architecture `{other}`")),
        }
    }
}

/// One local supervisor's capabilities: `Σ_ci` and `Σ_oi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AgentProfile {
    pub index: usize,
    pub controllable: EventSet,
    pub observable: EventSet,
}

impl AgentProfile {
    /// `Σ_uci` relative to the full event set `sigma`.
    pub fn uncontrollable(&self, sigma: EventSet) -> EventSet {
        sigma.difference(self.controllable)
    }

    /// `Σ_uoi` relative to the full event set `sigma`.
    pub fn unobservable(&self, sigma: EventSet) -> EventSet {
        sigma.difference(self.observable)
    }
}

/// Partition of the controllable events into enable-by-default (`Σ_ce`)
/// and disable-by-default (`Σ_cd`) events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DefaultSplit {
    pub enable: EventSet,
    pub disable: EventSet,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProblemError {
    #[error("plant and specification declare different events")]
    AlphabetMismatch,
    #[error("no agents")]
    NoAgents,
    #[error("agent {0} declared twice")]
    DuplicateAgent(usize),
    #[error("agent {0} refers to events outside the alphabet")]
    ForeignEvents(usize),
    #[error("the general architecture needs an enable/disable default split")]
    MissingSplit,
    #[error("events {0} are both enable-default and disable-default")]
    SplitOverlap(String),
    #[error("default split must cover exactly the controllable events {expected}, got {found}")]
    SplitCoverage { expected: String, found: String },
    #[error(
        "specification is not contained in the plant: `{0}` is generated only by the specification"
    )]
    SpecNotContained(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// Deterministic views of plant and specification and their product
/// restricted to the specification's language.
#[derive(Debug)]
pub(crate) struct Analysis {
    pub det_plant: DeterministicView,
    pub det_spec: DeterministicView,
    /// `det(G) × det(R)` over `L(R)`, states in breadth-first order.
    pub pair: Automaton,
    pub pairs: Vec<(StateId, StateId)>,
    /// Breadth-first tree: predecessor and event of every pair state.
    pub parent: Vec<Option<(StateId, EventId)>>,
}

impl Analysis {
    fn new(plant: &Automaton, spec: &Automaton) -> Result<Self, ProblemError> {
        let det_plant = determinize(plant);
        let det_spec = determinize(spec);
        let (pair, pairs) = product_pairs(det_plant.automaton(), det_spec.automaton())?;
        let mut parent = vec![None; pair.num_states()];
        let mut seen = vec![false; pair.num_states()];
        seen[pair.initial().index()] = true;
        for x in pair.reachable_order() {
            for &(e, y) in pair.transitions_from(x) {
                if !std::mem::replace(&mut seen[y.index()], true) {
                    parent[y.index()] = Some((x, e));
                }
            }
        }
        Ok(Analysis {
            det_plant,
            det_spec,
            pair,
            pairs,
            parent,
        })
    }

    /// Shortest string reaching pair state `z`.
    pub fn access(&self, mut z: StateId) -> EventString {
        let mut rev = Vec::new();
        while let Some((p, e)) = self.parent[z.index()] {
            rev.push(e);
            z = p;
        }
        rev.reverse();
        EventString(rev)
    }

    /// `E_G` at the plant side of pair state `z`.
    pub fn plant_enabled(&self, z: StateId) -> EventSet {
        self.det_plant.automaton().enabled(self.pairs[z.index()].0)
    }

    /// `E_R` at the specification side of pair state `z`.
    pub fn spec_enabled(&self, z: StateId) -> EventSet {
        self.det_spec.automaton().enabled(self.pairs[z.index()].1)
    }

    pub fn plant_marked(&self, z: StateId) -> bool {
        self.det_plant
            .automaton()
            .is_marked(self.pairs[z.index()].0)
    }

    pub fn spec_marked(&self, z: StateId) -> bool {
        self.det_spec.automaton().is_marked(self.pairs[z.index()].1)
    }
}

/// A validated control problem. The specification is stored over the
/// plant's alphabet and its language is contained in the plant's.
#[derive(Debug, Clone)]
pub struct ControlProblem {
    plant: Automaton,
    spec: Automaton,
    agents: Vec<AgentProfile>,
    architecture: Architecture,
    split: Option<DefaultSplit>,
    analysis: Arc<OnceLock<Analysis>>,
}

impl PartialEq for ControlProblem {
    fn eq(&self, other: &Self) -> bool {
        self.plant == other.plant
            && self.spec == other.spec
            && self.agents == other.agents
            && self.architecture == other.architecture
            && self.split == other.split
    }
}

impl ControlProblem {
    /// Validates and assembles a problem. A split may accompany any
    /// architecture but is required for the general one.
    pub fn new(
        plant: Automaton,
        spec: Automaton,
        agents: Vec<AgentProfile>,
        architecture: Architecture,
        split: Option<DefaultSplit>,
    ) -> Result<Self, ProblemError> {
        let spec = spec
            .with_alphabet(plant.alphabet())
            .map_err(|_| ProblemError::AlphabetMismatch)?;
        if agents.is_empty() {
            return Err(ProblemError::NoAgents);
        }
        let sigma = plant.alphabet().full();
        for (k, a) in agents.iter().enumerate() {
            if agents[..k].iter().any(|b| b.index == a.index) {
                return Err(ProblemError::DuplicateAgent(a.index));
            }
            if !a.controllable.union(a.observable).is_subset(sigma) {
                return Err(ProblemError::ForeignEvents(a.index));
            }
        }
        let p = ControlProblem {
            plant,
            spec,
            agents,
            architecture,
            split,
            analysis: Arc::new(OnceLock::new()),
        };
        p.validate_split()?;
        let analysis = Analysis::new(&p.plant, &p.spec)?;
        for z in analysis.pair.states() {
            let extra = analysis
                .spec_enabled(z)
                .difference(analysis.plant_enabled(z));
            if let Some(e) = extra.iter().next() {
                let s = analysis.access(z).with(e);
                return Err(ProblemError::SpecNotContained(
                    p.alphabet().format_string(&s),
                ));
            }
        }
        let _ = p.analysis.set(analysis);
        Ok(p)
    }

    fn validate_split(&self) -> Result<(), ProblemError> {
        let Some(split) = self.split else {
            return match self.architecture {
                Architecture::General => Err(ProblemError::MissingSplit),
                _ => Ok(()),
            };
        };
        let sigma = self.alphabet();
        let both = split.enable.intersection(split.disable);
        if !both.is_empty() {
            return Err(ProblemError::SplitOverlap(sigma.format_set(both)));
        }
        let found = split.enable.union(split.disable);
        if found != self.controllable() {
            return Err(ProblemError::SplitCoverage {
                expected: sigma.format_set(self.controllable()),
                found: sigma.format_set(found),
            });
        }
        Ok(())
    }

    /// The same problem under another architecture.
    pub fn with_architecture(&self, architecture: Architecture) -> Result<Self, ProblemError> {
        let p = ControlProblem {
            architecture,
            ..self.clone()
        };
        p.validate_split()?;
        Ok(p)
    }

    /// The same problem with another default split.
    pub fn with_split(&self, split: Option<DefaultSplit>) -> Result<Self, ProblemError> {
        let p = ControlProblem {
            split,
            ..self.clone()
        };
        p.validate_split()?;
        Ok(p)
    }

    pub fn plant(&self) -> &Automaton {
        &self.plant
    }

    pub fn spec(&self) -> &Automaton {
        &self.spec
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        self.plant.alphabet()
    }

    pub fn agents(&self) -> &[AgentProfile] {
        &self.agents
    }

    /// Agent by position in the agent list.
    pub fn agent(&self, position: usize) -> &AgentProfile {
        &self.agents[position]
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    pub fn split(&self) -> Option<DefaultSplit> {
        self.split
    }

    pub fn sigma(&self) -> EventSet {
        self.alphabet().full()
    }

    /// `Σ_c`, the union of the local controllable sets.
    pub fn controllable(&self) -> EventSet {
        self.agents
            .iter()
            .fold(EventSet::EMPTY, |acc, a| acc.union(a.controllable))
    }

    /// `Σ_o`, the union of the local observable sets.
    pub fn observable(&self) -> EventSet {
        self.agents
            .iter()
            .fold(EventSet::EMPTY, |acc, a| acc.union(a.observable))
    }

    pub fn uncontrollable(&self) -> EventSet {
        self.sigma().difference(self.controllable())
    }

    pub fn unobservable(&self) -> EventSet {
        self.sigma().difference(self.observable())
    }

    /// `Σ_ci` for every agent, in agent order.
    pub fn local_controllable(&self) -> Vec<EventSet> {
        self.agents.iter().map(|a| a.controllable).collect()
    }

    /// `Σ_cei` for every agent; empty without a split.
    pub fn local_enable_default(&self) -> Vec<EventSet> {
        let ce = self.split.map_or(EventSet::EMPTY, |s| s.enable);
        self.agents
            .iter()
            .map(|a| a.controllable.intersection(ce))
            .collect()
    }

    /// `Σ_cdi` for every agent; empty without a split.
    pub fn local_disable_default(&self) -> Vec<EventSet> {
        let cd = self.split.map_or(EventSet::EMPTY, |s| s.disable);
        self.agents
            .iter()
            .map(|a| a.controllable.intersection(cd))
            .collect()
    }

    pub(crate) fn analysis(&self) -> &Analysis {
        self.analysis.get_or_init(|| {
            Analysis::new(&self.plant, &self.spec).expect("validated at construction")
        })
    }
}
