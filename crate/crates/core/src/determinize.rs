//! Subset construction, minimization and observers under natural projection.

use std::collections::HashMap;

use crate::automaton::{Automaton, AutomatonBuilder, StateId};
use crate::event::EventSet;
use crate::partition::coarsest_stable;

/// A deterministic automaton whose states each denote a set of states of
/// the automaton it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicView {
    automaton: Automaton,
    members: Vec<Vec<StateId>>,
}

impl DeterministicView {
    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    pub fn into_automaton(self) -> Automaton {
        self.automaton
    }

    /// Source states denoted by `z`, sorted.
    pub fn members(&self, z: StateId) -> &[StateId] {
        &self.members[z.index()]
    }

    pub fn num_states(&self) -> usize {
        self.automaton.num_states()
    }
}

fn subset_name(a: &Automaton, set: &[StateId]) -> String {
    let names: Vec<&str> = set.iter().map(|&x| a.name(x)).collect();
    format!("{{{}}}", names.join(","))
}

/// Closes `set` under transitions on events outside `observable`.
pub(crate) fn unobservable_closure(a: &Automaton, set: &mut Vec<StateId>, observable: EventSet) {
    let mut seen: Vec<bool> = vec![false; a.num_states()];
    for &x in set.iter() {
        seen[x.index()] = true;
    }
    let mut i = 0;
    while i < set.len() {
        let x = set[i];
        i += 1;
        for &(e, y) in a.transitions_from(x) {
            if !observable.contains(e) && !seen[y.index()] {
                seen[y.index()] = true;
                set.push(y);
            }
        }
    }
    set.sort_unstable();
}

/// Reachable subset construction where only events in `observable` are
/// kept and every subset is closed under the remaining events.
fn subset_construction(a: &Automaton, observable: EventSet) -> DeterministicView {
    let mut builder = AutomatonBuilder::new(a.alphabet().clone());
    let mut index: HashMap<Vec<StateId>, StateId> = HashMap::new();
    let mut members: Vec<Vec<StateId>> = Vec::new();

    let mut start = vec![a.initial()];
    unobservable_closure(a, &mut start, observable);
    let init = builder.add_state_unique(subset_name(a, &start));
    if start.iter().any(|&x| a.is_marked(x)) {
        builder.mark(init);
    }
    builder.set_initial(init);
    index.insert(start.clone(), init);
    members.push(start);

    let mut i = 0;
    while i < members.len() {
        let from = StateId::from_index(i);
        let current = members[i].clone();
        i += 1;
        let enabled = current
            .iter()
            .fold(EventSet::EMPTY, |acc, &x| acc.union(a.enabled(x)))
            .intersection(observable);
        for e in enabled.iter() {
            let mut next = a.post(&current, e);
            unobservable_closure(a, &mut next, observable);
            let to = match index.get(&next) {
                Some(&id) => id,
                None => {
                    let id = builder.add_state_unique(subset_name(a, &next));
                    if next.iter().any(|&x| a.is_marked(x)) {
                        builder.mark(id);
                    }
                    index.insert(next.clone(), id);
                    members.push(next);
                    id
                }
            };
            builder.transition(from, e, to);
        }
    }
    DeterministicView {
        automaton: builder.build().expect("subset construction is well formed"),
        members,
    }
}

/// Merges states of a deterministic view that agree on the language and the
/// marked language they accept. Merged states are named after their first
/// member in breadth-first order and denote the union of the merged subsets.
fn minimize(d: DeterministicView) -> DeterministicView {
    let a = &d.automaton;
    let initial: Vec<usize> = a.states().map(|x| a.is_marked(x) as usize).collect();
    let edges: Vec<_> = a
        .transitions()
        .map(|(x, e, y)| (x.index(), e, y.index()))
        .collect();
    let block = coarsest_stable(&initial, &edges);
    let num_blocks = block.iter().copied().max().map_or(0, |m| m + 1);
    if num_blocks == a.num_states() {
        return d;
    }

    let mut builder = AutomatonBuilder::new(a.alphabet().clone());
    let mut members: Vec<Vec<StateId>> = vec![Vec::new(); num_blocks];
    // block ids are numbered by first occurrence, so representatives come in order
    for x in a.states() {
        let b = block[x.index()];
        if b == builder.num_states() {
            let id = builder.add_state_unique(a.name(x).to_string());
            if a.is_marked(x) {
                builder.mark(id);
            }
        }
        members[b].extend_from_slice(&d.members[x.index()]);
    }
    for m in &mut members {
        m.sort_unstable();
        m.dedup();
    }
    let mut done = vec![false; num_blocks];
    for x in a.states() {
        let b = block[x.index()];
        if std::mem::replace(&mut done[b], true) {
            continue;
        }
        for &(e, y) in a.transitions_from(x) {
            builder.transition(
                StateId::from_index(b),
                e,
                StateId::from_index(block[y.index()]),
            );
        }
    }
    builder.set_initial(StateId::from_index(block[a.initial().index()]));
    DeterministicView {
        automaton: builder.build().expect("quotient is well formed"),
        members,
    }
}

/// `det(G)`: a minimal deterministic automaton with the same language and
/// marked language as `a`.
pub fn determinize(a: &Automaton) -> DeterministicView {
    minimize(subset_construction(a, a.alphabet().full()))
}

/// Observer of `d` under the projection onto `observable`. The state reached
/// by `P(s)` denotes every state of `d` reachable by a string `s'` of `L(d)`
/// with `P(s') = P(s)`.
pub fn observer(d: &DeterministicView, observable: EventSet) -> DeterministicView {
    observer_of(d.automaton(), observable)
}

/// Observer over an arbitrary (possibly nondeterministic) automaton.
pub fn observer_of(a: &Automaton, observable: EventSet) -> DeterministicView {
    subset_construction(a, observable)
}
