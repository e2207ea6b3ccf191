//! Existence conditions for decentralized bisimilarity supervisors.
//!
//! Every check runs on `det(G) × det(R)` restricted to `L(R)`, called the
//! pair graph below. The co-observability checks explore a verifier with one
//! track for the true string and one track per agent for a string that the
//! agent cannot tell apart from it.

use std::collections::HashMap;

use crate::automaton::{product, StateId};
use crate::equivalence::{bisimilar, BisimWitness};
use crate::event::{EventId, EventSet, EventString};
use crate::problem::{Analysis, Architecture, ControlProblem, ProblemError};

/// Which co-observability notion an entry refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoobsVariant {
    /// Conjunctive and permissive: some agent is sure the event must be
    /// disabled.
    Cp,
    /// Disjunctive and antipermissive: some agent is sure the event may be
    /// enabled.
    Da,
    /// Both of the above on the respective halves of the default split.
    General,
}

impl CoobsVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            CoobsVariant::Cp => "cp",
            CoobsVariant::Da => "da",
            CoobsVariant::General => "general",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionId {
    BisimPlantDetspec,
    LangControllable,
    Coobservability(CoobsVariant),
    MarkedLangClosed,
}

impl ConditionId {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::BisimPlantDetspec => "bisim-plant-detspec",
            ConditionId::LangControllable => "lang-controllable",
            ConditionId::Coobservability(_) => "coobservability",
            ConditionId::MarkedLangClosed => "marked-lang-closed",
        }
    }

    pub fn variant(self) -> Option<CoobsVariant> {
        match self {
            ConditionId::Coobservability(v) => Some(v),
            _ => None,
        }
    }
}

/// A string of `L(R)` that some agent confuses with the witness string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentConfusion {
    pub agent: usize,
    pub confusing: EventString,
}

/// Evidence for a failed condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub s: EventString,
    pub sigma: Option<EventId>,
    pub per_agent: Vec<AgentConfusion>,
}

impl Witness {
    fn at(s: EventString, sigma: Option<EventId>) -> Self {
        Witness {
            s,
            sigma,
            per_agent: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub condition: ConditionId,
    pub holds: bool,
    /// Present exactly when `holds` is false.
    pub witness: Option<Witness>,
    /// Sub-entries of a composite condition.
    pub parts: Vec<Entry>,
    /// The underlying bisimulation result, for the bisimulation condition.
    pub bisim: Option<BisimWitness>,
}

impl Entry {
    fn simple(condition: ConditionId, witness: Option<Witness>) -> Self {
        Entry {
            condition,
            holds: witness.is_none(),
            witness,
            parts: Vec::new(),
            bisim: None,
        }
    }
}

/// Existence verdict for one architecture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub architecture: Architecture,
    pub entries: Vec<Entry>,
    pub overall: bool,
}

impl Verdict {
    pub fn entry(&self, condition: ConditionId) -> Option<&Entry> {
        self.entries.iter().find(|e| e.condition == condition)
    }

    pub fn coobservability(&self) -> &Entry {
        self.entries
            .iter()
            .find(|e| e.condition.variant().is_some())
            .expect("every verdict has a co-observability entry")
    }

    pub fn failing(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| !e.holds)
    }
}

/// `L(R)` is controllable with respect to `L(G)` and `Σ_uc`.
pub fn check_lang_controllable(p: &ControlProblem) -> Entry {
    let an = p.analysis();
    let uc = p.uncontrollable();
    let witness = an.pair.reachable_order().into_iter().find_map(|z| {
        let escape = an
            .plant_enabled(z)
            .difference(an.spec_enabled(z))
            .intersection(uc);
        escape
            .iter()
            .next()
            .map(|e| Witness::at(an.access(z), Some(e)))
    });
    Entry::simple(ConditionId::LangControllable, witness)
}

/// Every string of `L(R)` marked by the plant is marked by the specification.
pub fn check_marked_closed(p: &ControlProblem) -> Entry {
    let an = p.analysis();
    let witness = an
        .pair
        .reachable_order()
        .into_iter()
        .find(|&z| an.plant_marked(z) && !an.spec_marked(z))
        .map(|z| Witness::at(an.access(z), None));
    Entry::simple(ConditionId::MarkedLangClosed, witness)
}

/// `G || det(R) ≅ R`.
pub fn check_plant_detspec_bisim(p: &ControlProblem) -> Entry {
    let an = p.analysis();
    let gd = product(p.plant(), an.det_spec.automaton()).expect("shared alphabet");
    let w = bisimilar(&gd, p.spec()).expect("shared alphabet");
    let witness = w
        .counterexample
        .as_ref()
        .map(|t| Witness::at(EventString(t.spine()), None));
    Entry {
        bisim: Some(w),
        ..Entry::simple(ConditionId::BisimPlantDetspec, witness)
    }
}

/// Conjunctive-permissive co-observability with respect to `controllable`
/// (one set per agent, `Σ_ci` when `None`): whenever `sσ` leaves `L(R)`
/// inside `L(G)`, some agent controlling `σ` has no confusing string that
/// may continue with `σ` inside `L(R)`.
pub fn check_cp_coobservable(p: &ControlProblem, controllable: Option<&[EventSet]>) -> Entry {
    let sets = controllable.map_or_else(|| p.local_controllable(), <[EventSet]>::to_vec);
    let an = p.analysis();
    let witness = Verifier::new(p, &sets).search(|t, tracks, slots| {
        let exits = an.plant_enabled(t).difference(an.spec_enabled(t));
        candidates(slots, exits)
            .find(|&e| controlling(slots, e).all(|k| an.spec_enabled(tracks[k]).contains(e)))
    });
    Entry::simple(ConditionId::Coobservability(CoobsVariant::Cp), witness)
}

/// Disjunctive-antipermissive co-observability with respect to
/// `controllable` (`Σ_ci` when `None`): whenever `sσ` stays in `L(R)`, some
/// agent controlling `σ` knows that none of its confusing strings leaves
/// `L(R)` by `σ` inside `L(G)`.
pub fn check_da_coobservable(p: &ControlProblem, controllable: Option<&[EventSet]>) -> Entry {
    let sets = controllable.map_or_else(|| p.local_controllable(), <[EventSet]>::to_vec);
    let an = p.analysis();
    let witness = Verifier::new(p, &sets).search(|t, tracks, slots| {
        candidates(slots, an.spec_enabled(t)).find(|&e| {
            controlling(slots, e).all(|k| {
                let z = tracks[k];
                an.plant_enabled(z).contains(e) && !an.spec_enabled(z).contains(e)
            })
        })
    });
    Entry::simple(ConditionId::Coobservability(CoobsVariant::Da), witness)
}

/// Co-observability for the general architecture: C&P over `Σ_cei` and
/// D&A over `Σ_cdi`.
pub fn check_gen_coobservable(p: &ControlProblem) -> Result<Entry, ProblemError> {
    if p.split().is_none() {
        return Err(ProblemError::MissingSplit);
    }
    let cp = check_cp_coobservable(p, Some(&p.local_enable_default()));
    let da = check_da_coobservable(p, Some(&p.local_disable_default()));
    let witness = [&cp, &da].into_iter().find_map(|e| e.witness.clone());
    Ok(Entry {
        parts: vec![cp, da],
        ..Entry::simple(ConditionId::Coobservability(CoobsVariant::General), witness)
    })
}

/// Evaluates the four conditions of the problem's architecture.
pub fn decide_existence(p: &ControlProblem) -> Verdict {
    let coobs = match p.architecture() {
        Architecture::Conjunctive => check_cp_coobservable(p, None),
        Architecture::Disjunctive => check_da_coobservable(p, None),
        Architecture::General => check_gen_coobservable(p).expect("validated split"),
    };
    let entries = vec![
        check_plant_detspec_bisim(p),
        check_lang_controllable(p),
        coobs,
        check_marked_closed(p),
    ];
    Verdict {
        architecture: p.architecture(),
        overall: entries.iter().all(|e| e.holds),
        entries,
    }
}

fn candidates(sets: &[EventSet], within: EventSet) -> impl Iterator<Item = EventId> {
    let all = sets.iter().fold(EventSet::EMPTY, |a, &b| a.union(b));
    all.intersection(within).iter()
}

fn controlling(sets: &[EventSet], e: EventId) -> impl Iterator<Item = usize> + '_ {
    (0..sets.len()).filter(move |&k| sets[k].contains(e))
}

#[derive(Debug, Clone, Copy)]
enum Move {
    Joint(EventId),
    Agent(usize, EventId),
}

struct Verifier<'a> {
    an: &'a Analysis,
    // (agent index, controllable set, observable set), agents without
    // controllable events dropped
    agents: Vec<(usize, EventSet, EventSet)>,
    slots: Vec<EventSet>,
    sigma: EventSet,
}

// tracked states and the parent node with the move that led here
type Node = (Vec<StateId>, Option<(usize, Move)>);

impl<'a> Verifier<'a> {
    fn new(p: &'a ControlProblem, sets: &[EventSet]) -> Self {
        let agents: Vec<(usize, EventSet, EventSet)> = p
            .agents()
            .iter()
            .zip(sets)
            .filter(|(_, c)| !c.is_empty())
            .map(|(a, &c)| (a.index, c, a.observable))
            .collect();
        Verifier {
            an: p.analysis(),
            slots: agents.iter().map(|a| a.1).collect(),
            agents,
            sigma: p.sigma(),
        }
    }

    /// Breadth-first search for a verifier state where `violation` names an
    /// event. The callback receives the true track, the agent tracks and the
    /// controllable set of each agent slot.
    fn search<F>(&self, violation: F) -> Option<Witness>
    where
        F: Fn(StateId, &[StateId], &[EventSet]) -> Option<EventId>,
    {
        if self.agents.is_empty() {
            return None;
        }
        let pair = &self.an.pair;
        let n = self.agents.len();
        let start: Vec<StateId> = vec![pair.initial(); n + 1];
        let mut index: HashMap<Vec<StateId>, usize> = HashMap::new();
        let mut nodes: Vec<Node> = Vec::new();
        index.insert(start.clone(), 0);
        nodes.push((start, None));

        let mut i = 0;
        while i < nodes.len() {
            let state = nodes[i].0.clone();
            if let Some(e) = violation(state[0], &state[1..], &self.slots) {
                return Some(self.witness(&nodes, i, e));
            }
            let mut push = |next: Vec<StateId>, mv: Move| {
                if !index.contains_key(&next) {
                    index.insert(next.clone(), nodes.len());
                    nodes.push((next, Some((i, mv))));
                }
            };
            'joint: for &(e, t2) in pair.transitions_from(state[0]) {
                let mut next = Vec::with_capacity(n + 1);
                next.push(t2);
                for k in 0..n {
                    let a = state[k + 1];
                    if self.agents[k].2.contains(e) {
                        match pair.step(a, e) {
                            Some(a2) => next.push(a2),
                            None => continue 'joint,
                        }
                    } else {
                        next.push(a);
                    }
                }
                push(next, Move::Joint(e));
            }
            for k in 0..n {
                let hidden = self.sigma.difference(self.agents[k].2);
                for &(e, a2) in pair.transitions_from(state[k + 1]) {
                    if hidden.contains(e) {
                        let mut next = state.clone();
                        next[k + 1] = a2;
                        push(next, Move::Agent(k, e));
                    }
                }
            }
            i += 1;
        }
        None
    }

    fn witness(&self, nodes: &[Node], at: usize, sigma: EventId) -> Witness {
        let mut moves = Vec::new();
        let mut i = at;
        while let Some((parent, mv)) = nodes[i].1 {
            moves.push(mv);
            i = parent;
        }
        moves.reverse();
        let n = self.agents.len();
        let mut s = EventString::epsilon();
        let mut confusing = vec![EventString::epsilon(); n];
        for mv in moves {
            match mv {
                Move::Joint(e) => {
                    s.push(e);
                    for (c, agent) in confusing.iter_mut().zip(&self.agents) {
                        if agent.2.contains(e) {
                            c.push(e);
                        }
                    }
                }
                Move::Agent(k, e) => confusing[k].push(e),
            }
        }
        let per_agent = (0..n)
            .filter(|&k| self.agents[k].1.contains(sigma))
            .map(|k| AgentConfusion {
                agent: self.agents[k].0,
                confusing: confusing[k].clone(),
            })
            .collect();
        Witness {
            s,
            sigma: Some(sigma),
            per_agent,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::project;
    use crate::fixtures;
    use crate::io::text::parse_automaton;
    use crate::problem::AgentProfile;

    fn names(p: &ControlProblem, s: &EventString) -> String {
        p.alphabet().format_string(s)
    }

    #[test]
    fn example1_all_conditions_hold() {
        let p = fixtures::example1();
        let v = decide_existence(&p);
        for e in &v.entries {
            assert!(e.holds, "{:?}", e.condition);
        }
        assert!(v.overall);
    }

    #[test]
    fn example2_cp_witness() {
        let p = fixtures::example2();
        let e = check_cp_coobservable(&p, None);
        assert!(!e.holds);
        let w = e.witness.unwrap();
        assert_eq!(w.s, EventString::epsilon());
        assert_eq!(w.sigma, p.alphabet().id("g"));
        let conf: Vec<(usize, String)> = w
            .per_agent
            .iter()
            .map(|c| (c.agent, names(&p, &c.confusing)))
            .collect();
        assert_eq!(conf, [(1, "b".to_string()), (2, "a".to_string())]);
        assert!(check_da_coobservable(&p, None).holds);

        let v = decide_existence(&p.with_architecture(Architecture::Conjunctive).unwrap());
        let failing: Vec<_> = v.failing().map(|e| e.condition).collect();
        assert_eq!(failing, [ConditionId::Coobservability(CoobsVariant::Cp)]);
    }

    #[test]
    fn example3_da_witness() {
        let p = fixtures::example3();
        let e = check_da_coobservable(&p, None);
        let w = e.witness.unwrap();
        assert_eq!(w.s, EventString::epsilon());
        assert_eq!(w.sigma, p.alphabet().id("g"));
        assert!(check_cp_coobservable(&p, None).holds);
    }

    #[test]
    fn example4_needs_general_architecture() {
        let p = fixtures::example4();
        assert!(!check_cp_coobservable(&p, None).holds);
        assert!(!check_da_coobservable(&p, None).holds);
        let gen = check_gen_coobservable(&p).unwrap();
        assert!(gen.holds);
        assert_eq!(gen.parts.len(), 2);
        for arch in [Architecture::Conjunctive, Architecture::Disjunctive] {
            assert!(!decide_existence(&p.with_architecture(arch).unwrap()).overall);
        }
        assert!(decide_existence(&p).overall);

        let all_enable = crate::problem::DefaultSplit {
            enable: p.controllable(),
            disable: EventSet::EMPTY,
        };
        let q = p.with_split(Some(all_enable)).unwrap();
        let gen = check_gen_coobservable(&q).unwrap();
        assert!(!gen.holds);
        assert!(!gen.parts[0].holds);
        assert!(gen.parts[1].holds);
    }

    #[test]
    fn witnesses_replay_through_accepts_and_project() {
        for p in [fixtures::example2(), fixtures::example3()] {
            for entry in [
                check_cp_coobservable(&p, None),
                check_da_coobservable(&p, None),
            ] {
                let Some(w) = entry.witness else { continue };
                let sigma = w.sigma.unwrap();
                let (g, r) = (p.plant(), p.spec());
                assert!(r.accepts(&w.s).unwrap().in_language());
                for c in &w.per_agent {
                    let obs = p
                        .agents()
                        .iter()
                        .find(|a| a.index == c.agent)
                        .unwrap()
                        .observable;
                    assert_eq!(project(&c.confusing, obs), project(&w.s, obs));
                    assert!(r.accepts(&c.confusing).unwrap().in_language());
                    let ext = c.confusing.with(sigma);
                    match entry.condition.variant().unwrap() {
                        CoobsVariant::Cp => assert!(r.accepts(&ext).unwrap().in_language()),
                        _ => {
                            assert!(g.accepts(&ext).unwrap().in_language());
                            assert!(!r.accepts(&ext).unwrap().in_language());
                        }
                    }
                }
            }
        }
    }

    fn single_agent(g: &str, r: &str, c: &[&str], o: &[&str]) -> ControlProblem {
        let g = parse_automaton(g).unwrap();
        let r = parse_automaton(r).unwrap();
        let sigma = g.alphabet().clone();
        let agent = AgentProfile {
            index: 1,
            controllable: sigma.set(c).unwrap(),
            observable: sigma.set(o).unwrap(),
        };
        ControlProblem::new(g, r, vec![agent], Architecture::Conjunctive, None).unwrap()
    }

    const G: &str =
        "alphabet a b\nstates 0 1 2\ninitial 0\nmarked 0 1 2\ntrans 0 a 1\ntrans 0 b 2\n";

    #[test]
    fn full_observation_removes_ambiguity() {
        let r = "alphabet a b\nstates 0 1\ninitial 0\nmarked 0 1\ntrans 0 a 1\n";
        let p = single_agent(G, r, &["a", "b"], &["a", "b"]);
        assert!(check_cp_coobservable(&p, None).holds);
        assert!(check_da_coobservable(&p, None).holds);
        assert!(check_lang_controllable(&p).holds);
    }

    #[test]
    fn uncontrollable_escape() {
        let r = "alphabet a b\nstates 0 1\ninitial 0\nmarked 0 1\ntrans 0 a 1\n";
        let p = single_agent(G, r, &["a"], &["a", "b"]);
        let e = check_lang_controllable(&p);
        let w = e.witness.unwrap();
        assert_eq!(w.s, EventString::epsilon());
        assert_eq!(w.sigma, p.alphabet().id("b"));
        // no uncontrollable events: vacuous
        let p = single_agent(G, r, &["a", "b"], &["a", "b"]);
        assert!(check_lang_controllable(&p).holds);
    }

    #[test]
    fn marked_closure() {
        let r = "alphabet a b\nstates 0 1\ninitial 0\nmarked 0\ntrans 0 a 1\n";
        let p = single_agent(G, r, &["a", "b"], &["a", "b"]);
        let w = check_marked_closed(&p).witness.unwrap();
        assert_eq!(names(&p, &w.s), "a");
        let full = "alphabet a b\nstates 0 1\ninitial 0\nmarked 0 1\ntrans 0 a 1\n";
        assert!(check_marked_closed(&single_agent(G, full, &["a"], &["a"])).holds);
    }

    #[test]
    fn plant_detspec_bisim() {
        let b = fixtures::fix_b();
        let sigma = b.alphabet().clone();
        let agent = AgentProfile {
            index: 1,
            controllable: sigma.full(),
            observable: sigma.full(),
        };
        let same = ControlProblem::new(
            b.clone(),
            b.clone(),
            vec![agent],
            Architecture::Conjunctive,
            None,
        )
        .unwrap();
        assert!(check_plant_detspec_bisim(&same).holds);
        let det = crate::determinize::determinize(&b).into_automaton();
        let p = ControlProblem::new(b, det, vec![agent], Architecture::Conjunctive, None).unwrap();
        let e = check_plant_detspec_bisim(&p);
        assert!(!e.holds);
        assert!(!e.bisim.unwrap().holds);
    }

    #[test]
    fn general_with_empty_disable_set_is_cp() {
        let p = fixtures::example2();
        let split = crate::problem::DefaultSplit {
            enable: p.controllable(),
            disable: EventSet::EMPTY,
        };
        let q = p.with_split(Some(split)).unwrap();
        let gen = check_gen_coobservable(&q).unwrap();
        let cp = check_cp_coobservable(&q, Some(&q.local_enable_default()));
        assert_eq!(gen.holds, cp.holds);
        assert_eq!(gen.witness, cp.witness);
    }
}
