//! Decentralized supervisory control of nondeterministic discrete event
//! systems under bisimulation equivalence.
//!
//! The crate decides whether a set of local supervisors can make a plant
//! bisimilar to a specification under the conjunctive, disjunctive or general
//! fusion architecture, and builds those supervisors and the supervised
//! closed loop when they exist. An independent brute-force [`oracle`] backs
//! every decision procedure in the test suite.

pub mod automaton;
pub mod checks;
pub mod determinize;
pub mod equivalence;
pub mod event;
pub mod fixtures;
pub mod io;
pub mod oracle;
mod partition;
pub mod problem;
pub mod regex;
pub mod synthesis;

pub use automaton::{
    product, product_pairs, Automaton, AutomatonBuilder, AutomatonError, Membership, StateId,
};
pub use checks::{decide_existence, ConditionId, Entry, Verdict, Witness};
pub use determinize::{determinize, observer, DeterministicView};
pub use equivalence::{bisimilar, simulates, BisimWitness, MoveTree};
pub use event::{project, Alphabet, EventId, EventSet, EventString};
pub use problem::{AgentProfile, Architecture, ControlProblem, DefaultSplit, ProblemError};
pub use synthesis::{synthesize, ClosedLoop, FusionRule, LocalSupervisor, Synthesis};
