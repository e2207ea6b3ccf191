//! Marking-respecting strong bisimulation and simulation, with witness
//! relations and distinguishing move trees.
//!
//! Both relations follow the usual two clauses: every move of the simulated
//! side is matched by an equally labelled move of the simulating side into a
//! related pair, and a marked state is only related to a marked state. A
//! bisimulation is a symmetric relation that is a simulation both ways, which
//! amounts to stable partition refinement of the disjoint union starting from
//! the split into marked and unmarked states.

use serde::Serialize;

use crate::automaton::{Automaton, AutomatonError, StateId};
use crate::event::EventId;
use crate::partition::coarsest_stable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Which game a move tree was produced for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Game {
    /// The attacker may move on either side; markings must agree.
    Bisimulation,
    /// The attacker moves on the left only; a marked left state needs a
    /// marked right state.
    Simulation,
}

/// A finite strategy for the attacker showing that `left` and `right` are
/// not related.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveTree {
    pub left: StateId,
    pub right: StateId,
    pub reason: Distinction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Distinction {
    /// The pair disagrees on marking.
    Marking,
    /// The attacker takes `event` on `side` to `target`; every reply of the
    /// defender leads to a pair that is again distinguished. No replies means
    /// the move cannot be matched at all.
    Move {
        side: Side,
        event: EventId,
        target: StateId,
        replies: Vec<(StateId, MoveTree)>,
    },
}

impl MoveTree {
    /// Checks that the tree is a winning attacker strategy in `game`.
    pub fn replay(&self, a: &Automaton, b: &Automaton, game: Game) -> bool {
        match &self.reason {
            Distinction::Marking => match game {
                Game::Bisimulation => a.is_marked(self.left) != b.is_marked(self.right),
                Game::Simulation => a.is_marked(self.left) && !b.is_marked(self.right),
            },
            Distinction::Move {
                side,
                event,
                target,
                replies,
            } => {
                if game == Game::Simulation && *side == Side::Right {
                    return false;
                }
                let (mover, from, defender, defend_from) = match side {
                    Side::Left => (a, self.left, b, self.right),
                    Side::Right => (b, self.right, a, self.left),
                };
                if !mover.successors(from, *event).any(|x| x == *target) {
                    return false;
                }
                let answers: Vec<StateId> = defender.successors(defend_from, *event).collect();
                let replied: Vec<StateId> = replies.iter().map(|(r, _)| *r).collect();
                if answers != replied {
                    return false;
                }
                replies.iter().all(|(reply, sub)| {
                    let expect = match side {
                        Side::Left => (*target, *reply),
                        Side::Right => (*reply, *target),
                    };
                    (sub.left, sub.right) == expect && sub.replay(a, b, game)
                })
            }
        }
    }

    /// Events along the first branch, down to a leaf.
    pub fn spine(&self) -> Vec<EventId> {
        let mut out = Vec::new();
        let mut node = self;
        while let Distinction::Move { event, replies, .. } = &node.reason {
            out.push(*event);
            match replies.first() {
                Some((_, sub)) => node = sub,
                None => break,
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        match &self.reason {
            Distinction::Marking => 0,
            Distinction::Move { replies, .. } => {
                1 + replies.iter().map(|(_, t)| t.depth()).max().unwrap_or(0)
            }
        }
    }
}

/// Outcome of a bisimulation or simulation check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisimWitness {
    pub holds: bool,
    /// Related `(left, right)` pairs; empty when the check fails.
    pub relation: Vec<(StateId, StateId)>,
    /// Present exactly when the check fails.
    pub counterexample: Option<MoveTree>,
    // block ids of left and right states, bisimulation only
    blocks: Option<(Vec<usize>, Vec<usize>)>,
}

/// A pair of states of the disjoint union, each tagged with its side.
pub type TaggedPair = ((Side, StateId), (Side, StateId));

impl BisimWitness {
    /// The relation closed under symmetry and extended to same-side pairs,
    /// over the side-tagged disjoint union. Only available for bisimulation.
    pub fn full_relation(&self) -> Option<Vec<TaggedPair>> {
        let (lb, rb) = self.blocks.as_ref()?;
        if !self.holds {
            return None;
        }
        let tagged: Vec<(Side, StateId, usize)> = lb
            .iter()
            .enumerate()
            .map(|(i, &b)| (Side::Left, StateId::from_index(i), b))
            .chain(
                rb.iter()
                    .enumerate()
                    .map(|(i, &b)| (Side::Right, StateId::from_index(i), b)),
            )
            .collect();
        let mut out = Vec::new();
        for &(s1, x1, b1) in &tagged {
            for &(s2, x2, b2) in &tagged {
                if b1 == b2 {
                    out.push(((s1, x1), (s2, x2)));
                }
            }
        }
        Some(out)
    }
}

struct Union<'a> {
    a: &'a Automaton,
    b: &'a Automaton,
}

impl Union<'_> {
    fn len(&self) -> usize {
        self.a.num_states() + self.b.num_states()
    }

    fn split(&self, i: usize) -> (Side, StateId) {
        let na = self.a.num_states();
        if i < na {
            (Side::Left, StateId::from_index(i))
        } else {
            (Side::Right, StateId::from_index(i - na))
        }
    }

    fn index(&self, side: Side, x: StateId) -> usize {
        match side {
            Side::Left => x.index(),
            Side::Right => self.a.num_states() + x.index(),
        }
    }

    fn automaton(&self, side: Side) -> &Automaton {
        match side {
            Side::Left => self.a,
            Side::Right => self.b,
        }
    }

    fn marked(&self, i: usize) -> bool {
        let (s, x) = self.split(i);
        self.automaton(s).is_marked(x)
    }

    fn edges(&self) -> Vec<(usize, EventId, usize)> {
        let mut edges: Vec<_> = self
            .a
            .transitions()
            .map(|(x, e, y)| (x.index(), e, y.index()))
            .collect();
        let na = self.a.num_states();
        edges.extend(
            self.b
                .transitions()
                .map(|(x, e, y)| (na + x.index(), e, na + y.index())),
        );
        edges
    }

    fn moves(&self, i: usize) -> impl Iterator<Item = (EventId, usize)> + '_ {
        let (side, x) = self.split(i);
        self.automaton(side)
            .transitions_from(x)
            .iter()
            .map(move |&(e, y)| (e, self.index(side, y)))
    }
}

/// Decides `a ≅ b`. On success the relation lists every cross pair of
/// bisimilar states; on failure a move tree distinguishes the initial states.
pub fn bisimilar(a: &Automaton, b: &Automaton) -> Result<BisimWitness, AutomatonError> {
    if a.alphabet() != b.alphabet() {
        return Err(AutomatonError::AlphabetMismatch);
    }
    let u = Union { a, b };
    let initial: Vec<usize> = (0..u.len()).map(|i| u.marked(i) as usize).collect();
    let block = coarsest_stable(&initial, &u.edges());
    let na = a.num_states();
    let ia = u.index(Side::Left, a.initial());
    let ib = u.index(Side::Right, b.initial());
    let holds = block[ia] == block[ib];

    let (relation, counterexample) = if holds {
        let mut rel = Vec::new();
        for x in a.states() {
            for y in b.states() {
                if block[x.index()] == block[na + y.index()] {
                    rel.push((x, y));
                }
            }
        }
        (rel, None)
    } else {
        let levels = bisim_levels(&u);
        (
            Vec::new(),
            Some(bisim_tree(&u, &levels, a.initial(), b.initial())),
        )
    };
    Ok(BisimWitness {
        holds,
        relation,
        counterexample,
        blocks: Some((block[..na].to_vec(), block[na..].to_vec())),
    })
}

// Partitions of k-step bisimilarity, level 0 being the marking split, up to
// the first stable level.
fn bisim_levels(u: &Union<'_>) -> Vec<Vec<usize>> {
    let n = u.len();
    let mut levels = vec![(0..n).map(|i| u.marked(i) as usize).collect::<Vec<_>>()];
    loop {
        let prev = levels.last().unwrap();
        let mut sigs: std::collections::HashMap<(usize, Vec<(EventId, usize)>), usize> =
            Default::default();
        let next: Vec<usize> = (0..n)
            .map(|i| {
                let mut sig: Vec<(EventId, usize)> =
                    u.moves(i).map(|(e, j)| (e, prev[j])).collect();
                sig.sort_unstable();
                sig.dedup();
                let len = sigs.len();
                *sigs.entry((prev[i], sig)).or_insert(len)
            })
            .collect();
        let blocks: std::collections::HashSet<usize> = prev.iter().copied().collect();
        let stable = sigs.len() == blocks.len();
        if stable {
            return levels;
        }
        levels.push(next);
    }
}

fn first_split(levels: &[Vec<usize>], i: usize, j: usize) -> usize {
    levels
        .iter()
        .position(|l| l[i] != l[j])
        .expect("pair is distinguished at some level")
}

fn bisim_tree(u: &Union<'_>, levels: &[Vec<usize>], x: StateId, y: StateId) -> MoveTree {
    let i = u.index(Side::Left, x);
    let j = u.index(Side::Right, y);
    let k = first_split(levels, i, j);
    if k == 0 {
        return MoveTree {
            left: x,
            right: y,
            reason: Distinction::Marking,
        };
    }
    let prev = &levels[k - 1];
    for (side, from, other) in [(Side::Left, i, j), (Side::Right, j, i)] {
        for (e, t) in u.moves(from) {
            let answers: Vec<usize> = u
                .moves(other)
                .filter(|&(f, _)| f == e)
                .map(|(_, r)| r)
                .collect();
            if answers.iter().all(|&r| prev[r] != prev[t]) {
                let target = u.split(t).1;
                let replies = answers
                    .iter()
                    .map(|&r| {
                        let reply = u.split(r).1;
                        let sub = match side {
                            Side::Left => bisim_tree(u, levels, target, reply),
                            Side::Right => bisim_tree(u, levels, reply, target),
                        };
                        (reply, sub)
                    })
                    .collect();
                return MoveTree {
                    left: x,
                    right: y,
                    reason: Distinction::Move {
                        side,
                        event: e,
                        target,
                        replies,
                    },
                };
            }
        }
    }
    unreachable!("states split at level {k} must differ in some move")
}

/// Decides whether `a` is simulated by `b` (`a ≺ b`) by computing the
/// greatest simulation through iterated pair elimination.
pub fn simulates(a: &Automaton, b: &Automaton) -> Result<BisimWitness, AutomatonError> {
    if a.alphabet() != b.alphabet() {
        return Err(AutomatonError::AlphabetMismatch);
    }
    let (na, nb) = (a.num_states(), b.num_states());
    // round in which a pair was eliminated; None while still related
    let mut removed: Vec<Option<usize>> = vec![None; na * nb];
    for x in a.states() {
        for y in b.states() {
            if a.is_marked(x) && !b.is_marked(y) {
                removed[x.index() * nb + y.index()] = Some(0);
            }
        }
    }
    let mut round = 0;
    loop {
        round += 1;
        let mut kill = Vec::new();
        for x in a.states() {
            for y in b.states() {
                let idx = x.index() * nb + y.index();
                if removed[idx].is_some() {
                    continue;
                }
                let matched = a.transitions_from(x).iter().all(|&(e, x2)| {
                    b.successors(y, e)
                        .any(|y2| removed[x2.index() * nb + y2.index()].is_none())
                });
                if !matched {
                    kill.push(idx);
                }
            }
        }
        if kill.is_empty() {
            break;
        }
        for idx in kill {
            removed[idx] = Some(round);
        }
    }
    let root = a.initial().index() * nb + b.initial().index();
    let holds = removed[root].is_none();
    let (relation, counterexample) = if holds {
        let rel = (0..na * nb)
            .filter(|&i| removed[i].is_none())
            .map(|i| (StateId::from_index(i / nb), StateId::from_index(i % nb)))
            .collect();
        (rel, None)
    } else {
        (
            Vec::new(),
            Some(sim_tree(a, b, &removed, a.initial(), b.initial())),
        )
    };
    Ok(BisimWitness {
        holds,
        relation,
        counterexample,
        blocks: None,
    })
}

fn sim_tree(
    a: &Automaton,
    b: &Automaton,
    removed: &[Option<usize>],
    x: StateId,
    y: StateId,
) -> MoveTree {
    let nb = b.num_states();
    let k = removed[x.index() * nb + y.index()].expect("pair was eliminated");
    if k == 0 {
        return MoveTree {
            left: x,
            right: y,
            reason: Distinction::Marking,
        };
    }
    let earlier = |x2: StateId, y2: StateId| matches!(removed[x2.index() * nb + y2.index()], Some(r) if r < k);
    for &(e, x2) in a.transitions_from(x) {
        if b.successors(y, e).all(|y2| earlier(x2, y2)) {
            let replies = b
                .successors(y, e)
                .map(|y2| (y2, sim_tree(a, b, removed, x2, y2)))
                .collect();
            return MoveTree {
                left: x,
                right: y,
                reason: Distinction::Move {
                    side: Side::Left,
                    event: e,
                    target: x2,
                    replies,
                },
            };
        }
    }
    unreachable!("pair eliminated in round {k} has an unmatched move")
}
