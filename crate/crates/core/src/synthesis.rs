//! Local supervisors, decision fusion and the supervised closed loop.
//!
//! A local supervisor tracks the agent's state estimate: the observer of the
//! specification (or of the plant/specification pair graph) under the
//! agent's projection, extended with a dump state that absorbs locally
//! uncontrollable events the estimate does not expect.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::automaton::{Automaton, AutomatonBuilder, StateId};
use crate::checks::{decide_existence, Verdict};
use crate::determinize::observer_of;
use crate::equivalence::{bisimilar, BisimWitness};
use crate::event::{EventId, EventSet};
use crate::problem::{AgentProfile, Architecture, ControlProblem, DefaultSplit};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthesisError {
    #[error("fusion expects {expected} decisions, got {found}")]
    Arity { expected: usize, found: usize },
    #[error(
        "the {0} architecture needs a supervisor built over the plant/specification pair graph"
    )]
    PairingMismatch(Architecture),
    #[error("the general architecture needs an enable/disable default split")]
    MissingSplit,
    #[error("supervisor {agent} is not compatible: state `{state}` has no move on `{event}`")]
    Incompatible {
        agent: usize,
        state: String,
        event: String,
    },
    #[error("{0} supervisors for {1} agents")]
    SupervisorCount(usize, usize),
}

/// What the states of a supervisor's estimate range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pairing {
    /// Sets of `det(R)` states.
    Spec,
    /// Sets of `det(G) × det(R)` pair states.
    Paired,
}

impl Pairing {
    pub fn for_architecture(arch: Architecture) -> Self {
        match arch {
            Architecture::Conjunctive => Pairing::Spec,
            Architecture::Disjunctive | Architecture::General => Pairing::Paired,
        }
    }
}

/// A supervisor automaton before decisions are attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupervisorAutomaton {
    pub automaton: Automaton,
    pub dump: Option<StateId>,
    pub pairing: Pairing,
    /// Estimate of every non-dump state, as indices into `det(R)` or into
    /// the pair graph depending on `pairing`.
    pub members: Vec<Vec<StateId>>,
    pub agent: AgentProfile,
}

/// `S_i` together with its decision map `ψ_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalSupervisor {
    pub agent: AgentProfile,
    pub automaton: Automaton,
    pub decisions: Vec<EventSet>,
    pub dump: Option<StateId>,
}

impl LocalSupervisor {
    pub fn decision(&self, y: StateId) -> EventSet {
        self.decisions[y.index()]
    }

    /// First compatibility violation: a state lacking a self-loop on a
    /// locally unobservable event, or lacking any move on a locally
    /// uncontrollable event.
    pub fn compatibility_violation(&self) -> Option<(StateId, EventId)> {
        let a = &self.automaton;
        let sigma = a.alphabet().full();
        let uo = self.agent.unobservable(sigma);
        let uc = self.agent.uncontrollable(sigma);
        a.states().find_map(|y| {
            let looped = uo.iter().find(|&e| a.step(y, e) != Some(y));
            let missing = uc.iter().find(|&e| a.step(y, e).is_none());
            looped.or(missing).map(|e| (y, e))
        })
    }
}

/// Builds the supervisor automaton of the agent at `position` in the
/// problem's agent list.
pub fn synth_supervisor_automaton(
    p: &ControlProblem,
    position: usize,
    pairing: Pairing,
) -> SupervisorAutomaton {
    let agent = *p.agent(position);
    let an = p.analysis();
    let base = match pairing {
        Pairing::Spec => an.det_spec.automaton(),
        Pairing::Paired => &an.pair,
    };
    let obs = observer_of(base, agent.observable);
    let o = obs.automaton();
    let sigma = p.sigma();
    let uo = agent.unobservable(sigma);
    let uc = agent.uncontrollable(sigma);

    let mut b = AutomatonBuilder::new(p.alphabet().clone());
    for y in o.states() {
        b.add_state_unique(format!("y{}", y.index()));
        b.mark(y);
    }
    b.set_initial(o.initial());
    let mut dump = None;
    for y in o.states() {
        for e in sigma.iter() {
            if uo.contains(e) {
                b.transition(y, e, y);
            } else if let Some(z) = o.step(y, e) {
                b.transition(y, e, z);
            } else if uc.contains(e) {
                let d = *dump.get_or_insert_with(|| {
                    let d = b.add_state_unique("dump");
                    b.mark(d);
                    d
                });
                b.transition(y, e, d);
            }
        }
    }
    if let Some(d) = dump {
        for e in uo.union(uc).iter() {
            b.transition(d, e, d);
        }
    }
    let members = o.states().map(|y| obs.members(y).to_vec()).collect();
    SupervisorAutomaton {
        automaton: b.build().expect("supervisor is well formed"),
        dump,
        pairing,
        members,
        agent,
    }
}

/// The decision map of a supervisor under `arch`.
pub fn synth_decisions(
    p: &ControlProblem,
    sup: &SupervisorAutomaton,
    arch: Architecture,
) -> Result<Vec<EventSet>, SynthesisError> {
    if arch != Architecture::Conjunctive && sup.pairing != Pairing::Paired {
        return Err(SynthesisError::PairingMismatch(arch));
    }
    let an = p.analysis();
    let agent = sup.agent;
    let uc = p.uncontrollable();
    let (enable_set, disable_set) = match arch {
        Architecture::Conjunctive => (p.controllable(), EventSet::EMPTY),
        Architecture::Disjunctive => (EventSet::EMPTY, p.controllable()),
        Architecture::General => {
            let split = p.split().ok_or(SynthesisError::MissingSplit)?;
            (split.enable, split.disable)
        }
    };
    let ce_i = agent.controllable.intersection(enable_set);
    let cd_i = agent.controllable.intersection(disable_set);
    let defaults = uc.union(enable_set.difference(ce_i));

    // (E_G, E_R) at each estimate member
    let enabled = |z: StateId| match sup.pairing {
        Pairing::Spec => (None, an.det_spec.automaton().enabled(z)),
        Pairing::Paired => (Some(an.plant_enabled(z)), an.spec_enabled(z)),
    };
    let decisions = sup
        .automaton
        .states()
        .map(|y| {
            if Some(y) == sup.dump {
                return defaults;
            }
            let members = &sup.members[y.index()];
            let mut some_in_spec = EventSet::EMPTY;
            let mut unsafe_somewhere = EventSet::EMPTY;
            for &z in members {
                let (g, r) = enabled(z);
                some_in_spec = some_in_spec.union(r);
                if let Some(g) = g {
                    unsafe_somewhere = unsafe_somewhere.union(g.difference(r));
                }
            }
            defaults
                .union(ce_i.intersection(some_in_spec))
                .union(cd_i.difference(unsafe_somewhere))
        })
        .collect();
    Ok(decisions)
}

/// The global decision map `ψ_f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionRule {
    pub kind: Architecture,
    pub uncontrollable: EventSet,
    /// `(Σ_ce, Σ_cd)`; only read by the general rule.
    pub split: Option<DefaultSplit>,
    pub arity: usize,
}

impl FusionRule {
    pub fn for_problem(p: &ControlProblem) -> Self {
        FusionRule {
            kind: p.architecture(),
            uncontrollable: p.uncontrollable(),
            split: p.split(),
            arity: p.agents().len(),
        }
    }

    /// Fuses one decision per agent. Every result contains `Σ_uc`.
    pub fn fuse(&self, decisions: &[EventSet]) -> Result<EventSet, SynthesisError> {
        if decisions.len() != self.arity {
            return Err(SynthesisError::Arity {
                expected: self.arity,
                found: decisions.len(),
            });
        }
        let all = decisions
            .iter()
            .fold(EventSet::first_n(64), |a, &d| a.intersection(d));
        let any = decisions.iter().fold(EventSet::EMPTY, |a, &d| a.union(d));
        let fused = match self.kind {
            Architecture::Conjunctive => all,
            Architecture::Disjunctive => any,
            Architecture::General => {
                let split = self.split.ok_or(SynthesisError::MissingSplit)?;
                all.intersection(split.enable)
                    .union(any.intersection(split.disable))
            }
        };
        Ok(fused.union(self.uncontrollable))
    }
}

/// The supervised system with the plant and supervisor states behind each
/// composite state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedLoop {
    pub automaton: Automaton,
    pub provenance: Vec<(StateId, Vec<StateId>)>,
}

/// Composes the plant with the supervisors: a composite move on `σ` needs a
/// plant move, a move of every supervisor, and `σ` in the fused decision.
/// A composite state is marked iff its plant state is.
pub fn build_closed_loop(
    p: &ControlProblem,
    supervisors: &[LocalSupervisor],
    rule: &FusionRule,
) -> Result<ClosedLoop, SynthesisError> {
    if supervisors.len() != rule.arity {
        return Err(SynthesisError::SupervisorCount(
            supervisors.len(),
            rule.arity,
        ));
    }
    for s in supervisors {
        if let Some((y, e)) = s.compatibility_violation() {
            return Err(SynthesisError::Incompatible {
                agent: s.agent.index,
                state: s.automaton.name(y).to_string(),
                event: p.alphabet().name(e).to_string(),
            });
        }
    }
    let g = p.plant();
    let mut b = AutomatonBuilder::new(p.alphabet().clone());
    let mut index: HashMap<(StateId, Vec<StateId>), StateId> = HashMap::new();
    let mut provenance: Vec<(StateId, Vec<StateId>)> = Vec::new();
    let mut queue = VecDeque::new();

    let mut intern = |b: &mut AutomatonBuilder,
                      provenance: &mut Vec<(StateId, Vec<StateId>)>,
                      queue: &mut VecDeque<StateId>,
                      key: (StateId, Vec<StateId>)| {
        if let Some(&id) = index.get(&key) {
            return id;
        }
        let mut name = g.name(key.0).to_string();
        for (s, &y) in supervisors.iter().zip(&key.1) {
            name.push('/');
            name.push_str(s.automaton.name(y));
        }
        let id = b.add_state_unique(name);
        if g.is_marked(key.0) {
            b.mark(id);
        }
        index.insert(key.clone(), id);
        provenance.push(key);
        queue.push_back(id);
        id
    };

    let start = (
        g.initial(),
        supervisors.iter().map(|s| s.automaton.initial()).collect(),
    );
    let init = intern(&mut b, &mut provenance, &mut queue, start);
    b.set_initial(init);
    let mut local = Vec::with_capacity(supervisors.len());
    while let Some(id) = queue.pop_front() {
        let (x, ys) = provenance[id.index()].clone();
        local.clear();
        local.extend(supervisors.iter().zip(&ys).map(|(s, &y)| s.decision(y)));
        let allowed = rule.fuse(&local)?.intersection(g.enabled(x));
        for e in allowed.iter() {
            let next: Option<Vec<StateId>> = supervisors
                .iter()
                .zip(&ys)
                .map(|(s, &y)| s.automaton.step(y, e))
                .collect();
            let Some(next) = next else { continue };
            for x2 in g.successors(x, e) {
                let to = intern(&mut b, &mut provenance, &mut queue, (x2, next.clone()));
                b.transition(id, e, to);
            }
        }
    }
    Ok(ClosedLoop {
        automaton: b.build().expect("closed loop is well formed"),
        provenance,
    })
}

/// Supervisors, fusion rule and verified closed loop.
#[derive(Debug, Clone)]
pub struct Synthesized {
    pub supervisors: Vec<LocalSupervisor>,
    pub rule: FusionRule,
    pub closed_loop: ClosedLoop,
    /// Bisimulation between the closed loop and the specification.
    pub relation: BisimWitness,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub enum Synthesis {
    Synthesized(Box<Synthesized>),
    Refused(Verdict),
}

/// Builds the local supervisors for every agent under the problem's
/// architecture.
pub fn local_supervisors(p: &ControlProblem) -> Vec<LocalSupervisor> {
    let arch = p.architecture();
    let pairing = Pairing::for_architecture(arch);
    (0..p.agents().len())
        .map(|i| {
            let sup = synth_supervisor_automaton(p, i, pairing);
            let decisions =
                synth_decisions(p, &sup, arch).expect("pairing follows the architecture");
            LocalSupervisor {
                agent: sup.agent,
                automaton: sup.automaton,
                decisions,
                dump: sup.dump,
            }
        })
        .collect()
}

/// Decides existence and, when supervisors exist, builds them and the
/// closed loop.
///
/// # Panics
///
/// If the closed loop of a problem that passed every existence condition is
/// not bisimilar to the specification.
pub fn synthesize(p: &ControlProblem) -> Synthesis {
    let verdict = decide_existence(p);
    if !verdict.overall {
        return Synthesis::Refused(verdict);
    }
    let supervisors = local_supervisors(p);
    let rule = FusionRule::for_problem(p);
    let closed_loop =
        build_closed_loop(p, &supervisors, &rule).expect("synthesized supervisors are compatible");
    let relation = bisimilar(&closed_loop.automaton, p.spec()).expect("shared alphabet");
    assert!(
        relation.holds,
        "defect: closed loop is not bisimilar to the specification although every condition holds"
    );
    Synthesis::Synthesized(Box::new(Synthesized {
        supervisors,
        rule,
        closed_loop,
        relation,
        verdict,
    }))
}
