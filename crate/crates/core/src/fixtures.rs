//! Small reference problems shipped with the crate.
//!
//! The files live in the crate's `fixtures/` directory and are embedded at
//! compile time, so the problems are available without touching the disk.

use crate::automaton::Automaton;
use crate::io::problem_file::parse_problem;
use crate::io::text::parse_automaton;
use crate::problem::ControlProblem;

pub const FIX_B_AUT: &str = include_str!("../fixtures/fix_b.aut");
pub const EXAMPLE1_PROB: &str = include_str!("../fixtures/example1.prob");
pub const EXAMPLE2_PROB: &str = include_str!("../fixtures/example2.prob");
pub const EXAMPLE3_PROB: &str = include_str!("../fixtures/example3.prob");
pub const EXAMPLE4_PROB: &str = include_str!("../fixtures/example4.prob");

const FILES: &[(&str, &str)] = &[
    ("fix_b.aut", FIX_B_AUT),
    (
        "example1_plant.aut",
        include_str!("../fixtures/example1_plant.aut"),
    ),
    (
        "example1_spec.aut",
        include_str!("../fixtures/example1_spec.aut"),
    ),
    (
        "example2_plant.aut",
        include_str!("../fixtures/example2_plant.aut"),
    ),
    (
        "example2_spec.aut",
        include_str!("../fixtures/example2_spec.aut"),
    ),
    (
        "example3_plant.aut",
        include_str!("../fixtures/example3_plant.aut"),
    ),
    (
        "example3_spec.aut",
        include_str!("../fixtures/example3_spec.aut"),
    ),
    (
        "example4_plant.aut",
        include_str!("../fixtures/example4_plant.aut"),
    ),
    (
        "example4_spec.aut",
        include_str!("../fixtures/example4_spec.aut"),
    ),
];

/// Every string of the manufacturing-cycle plant, as a regular expression.
pub const EXAMPLE1_PLANT_REGEX: &str = "(a (b1 + b2 + b3) c a (d1 + d2 + d3) a)*";

/// The allowed machine/station pairings of the manufacturing cycle.
pub const EXAMPLE1_SPEC_REGEX: &str = "(a b1 c a d1 a + a b1 c a d3 a + a b2 c a d2 a \
                                       + a b3 c a d1 a + a b3 c a d3 a)*";

/// Contents of an embedded fixture file by name.
pub fn fixture_text(name: &str) -> Option<String> {
    FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| t.to_string())
}

fn problem(text: &str) -> ControlProblem {
    parse_problem(text, |p| {
        fixture_text(p).ok_or_else(|| format!("no fixture `{p}`"))
    })
    .expect("fixture problems are valid")
}

/// Five states: `0 -a-> 1`, `0 -a-> 2`, `1 -b-> 3`, `2 -c-> 4`, only `3`
/// marked.
pub fn fix_b() -> Automaton {
    parse_automaton(FIX_B_AUT).expect("fixture automaton is valid")
}

/// The manufacturing cycle with two agents, conjunctive.
pub fn example1() -> ControlProblem {
    problem(EXAMPLE1_PROB)
}

/// Not C&P co-observable at `(ε, g)` but D&A co-observable; disjunctive.
pub fn example2() -> ControlProblem {
    problem(EXAMPLE2_PROB)
}

/// Not D&A co-observable at `(ε, g)` but C&P co-observable; conjunctive.
pub fn example3() -> ControlProblem {
    problem(EXAMPLE3_PROB)
}

/// Neither C&P nor D&A co-observable, but co-observable for the general
/// architecture with `f, e` enabled and `a` disabled by default.
pub fn example4() -> ControlProblem {
    problem(EXAMPLE4_PROB)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate;
    use crate::regex::compile;

    #[test]
    fn example1_automata_match_their_expressions() {
        let p = example1();
        let sigma = p.alphabet();
        for (a, re) in [
            (p.plant(), EXAMPLE1_PLANT_REGEX),
            (p.spec(), EXAMPLE1_SPEC_REGEX),
        ] {
            let r = compile(sigma, re).unwrap();
            assert_eq!(enumerate(a, 13), enumerate(&r, 13));
        }
    }

    #[test]
    fn every_fixture_loads() {
        fix_b();
        for p in [example1(), example2(), example3(), example4()] {
            assert!(!p.agents().is_empty());
        }
    }
}
