use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use decsup::checks::{check_cp_coobservable, check_da_coobservable, check_gen_coobservable};
use decsup::io::text::{parse_automaton, write_automaton};
use decsup::oracle::{bounded_language_difference, sound_depth_bound, Property, RandomLimits};
use decsup::oracle::{
    enumerate, naive_bisim, naive_determinize, oracle_check, problem_depth_bound, random_problem,
};
use decsup::synthesis::{build_closed_loop, local_supervisors};
use decsup::{
    bisimilar, decide_existence, determinize, product, project, simulates, AgentProfile, Alphabet,
    Architecture, Automaton, AutomatonBuilder, ControlProblem, DefaultSplit, EventSet, EventString,
    FusionRule, MoveTree,
};

const DEPTH: usize = 6;

fn alphabet(m: usize) -> Arc<Alphabet> {
    Alphabet::new(["a", "b", "c"].into_iter().take(m)).unwrap()
}

/// Automaton with `n` states over the first `m` of `a b c`.
fn automaton(m: usize, max_states: usize) -> impl Strategy<Value = Automaton> {
    (1..=max_states).prop_flat_map(move |n| {
        (
            proptest::collection::vec(any::<bool>(), n),
            proptest::collection::vec((0..n, 0..m, 0..n), 0..=3 * n),
        )
            .prop_map(move |(marked, edges)| {
                let mut b = AutomatonBuilder::new(alphabet(m));
                let ids: Vec<_> = (0..n)
                    .map(|i| b.add_state(format!("s{i}")).unwrap())
                    .collect();
                for (i, &mk) in marked.iter().enumerate() {
                    if mk {
                        b.mark(ids[i]);
                    }
                }
                b.set_initial(ids[0]);
                let sigma = alphabet(m);
                for (x, e, y) in edges {
                    b.transition(ids[x], sigma.events().nth(e).unwrap(), ids[y]);
                }
                b.build().unwrap()
            })
    })
}

fn pair(max_states: usize) -> impl Strategy<Value = (Automaton, Automaton)> {
    (1..=3usize).prop_flat_map(move |m| (automaton(m, max_states), automaton(m, max_states)))
}

fn replays(tree: &MoveTree, a: &Automaton, b: &Automaton) -> bool {
    tree.replay(a, b, decsup::equivalence::Game::Bisimulation)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_language_is_the_intersection((a, b) in pair(5)) {
        let p = enumerate(&product(&a, &b).unwrap(), DEPTH);
        let (la, lb) = (enumerate(&a, DEPTH), enumerate(&b, DEPTH));
        let want: BTreeMap<EventString, bool> = la
            .strings
            .iter()
            .filter(|(s, _)| lb.contains(s))
            .map(|(s, &m)| (s.clone(), m && lb.is_marked(s)))
            .collect();
        prop_assert_eq!(p.strings, want);
    }

    #[test]
    fn determinization_preserves_both_languages(a in (1..=3usize).prop_flat_map(|m| automaton(m, 6))) {
        let d = determinize(&a).into_automaton();
        prop_assert!(d.is_deterministic());
        prop_assert_eq!(enumerate(&d, DEPTH), enumerate(&a, DEPTH));
        let naive = naive_determinize(&a);
        prop_assert!(naive_bisim(&d, &naive).unwrap());
        prop_assert!(d.num_states() <= naive.num_states());
    }

    #[test]
    fn bisimilarity_is_symmetric_and_matches_the_naive_checker((a, b) in pair(6)) {
        let ab = bisimilar(&a, &b).unwrap();
        let ba = bisimilar(&b, &a).unwrap();
        prop_assert_eq!(ab.holds, ba.holds);
        prop_assert_eq!(ab.holds, naive_bisim(&a, &b).unwrap());
        match &ab.counterexample {
            Some(t) => prop_assert!(replays(t, &a, &b)),
            None => {
                let flipped: Vec<_> = ba.relation.iter().map(|&(y, x)| (x, y)).collect();
                let mut rel = ab.relation.clone();
                rel.sort();
                let mut flipped = flipped;
                flipped.sort();
                prop_assert_eq!(rel, flipped);
            }
        }
    }

    #[test]
    fn bisimilar_automata_simulate_each_other((a, b) in pair(5)) {
        if bisimilar(&a, &b).unwrap().holds {
            prop_assert!(simulates(&a, &b).unwrap().holds);
            prop_assert!(simulates(&b, &a).unwrap().holds);
        }
        let s = simulates(&a, &b).unwrap();
        if let Some(t) = &s.counterexample {
            prop_assert!(t.replay(&a, &b, decsup::equivalence::Game::Simulation));
        }
    }

    #[test]
    fn bisimilar_automata_agree_on_bounded_languages((a, b) in pair(5)) {
        if bisimilar(&a, &b).unwrap().holds {
            prop_assert_eq!(enumerate(&a, DEPTH), enumerate(&b, DEPTH));
        }
    }

    #[test]
    fn text_round_trip(a in (1..=3usize).prop_flat_map(|m| automaton(m, 6))) {
        let back = parse_automaton(&write_automaton(&a)).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn projection_is_idempotent(s in proptest::collection::vec(0..3usize, 0..8), mask in 0u64..8) {
        let sigma = alphabet(3);
        let s: EventString = s.into_iter().map(|i| sigma.events().nth(i).unwrap()).collect();
        let o = EventSet::from_bits(mask);
        let once = project(&s, o);
        prop_assert_eq!(project(&once, o), once.clone());
        prop_assert!(once.iter().all(|e| o.contains(e)));
    }
}

fn widen(p: &ControlProblem, agent: usize, extra: EventSet) -> ControlProblem {
    let agents: Vec<AgentProfile> = p
        .agents()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let mut a = *a;
            if i == agent {
                a.observable = a.observable.union(extra.intersection(p.sigma()));
            }
            a
        })
        .collect();
    ControlProblem::new(
        p.plant().clone(),
        p.spec().clone(),
        agents,
        p.architecture(),
        p.split(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn more_observation_never_breaks_coobservability(seed in any::<u64>(), agent in 0..3usize, extra in 0u64..32) {
        let p = random_problem(seed, RandomLimits::default());
        let q = widen(&p, agent % p.agents().len(), EventSet::from_bits(extra));
        if check_cp_coobservable(&p, None).holds {
            prop_assert!(check_cp_coobservable(&q, None).holds);
        }
        if check_da_coobservable(&p, None).holds {
            prop_assert!(check_da_coobservable(&q, None).holds);
        }
    }

    #[test]
    fn general_reduces_to_cp_and_da(seed in any::<u64>()) {
        let p = random_problem(seed, RandomLimits::default());
        let c = p.controllable();
        let all_enable = p
            .with_split(Some(DefaultSplit { enable: c, disable: EventSet::EMPTY }))
            .unwrap();
        let all_disable = p
            .with_split(Some(DefaultSplit { enable: EventSet::EMPTY, disable: c }))
            .unwrap();
        prop_assert_eq!(check_gen_coobservable(&all_enable).unwrap().holds, check_cp_coobservable(&p, None).holds);
        prop_assert_eq!(check_gen_coobservable(&all_disable).unwrap().holds, check_da_coobservable(&p, None).holds);
    }

    #[test]
    fn checkers_agree_with_the_oracle(seed in any::<u64>()) {
        let p = random_problem(seed, RandomLimits::default());
        let k = problem_depth_bound(&p);
        for prop in Property::ALL {
            let o = oracle_check(prop.as_str(), &p, k).unwrap();
            prop_assert!(o.is_exact());
            let entry = match prop {
                Property::BisimPlantDetspec => decsup::checks::check_plant_detspec_bisim(&p),
                Property::LangControllable => decsup::checks::check_lang_controllable(&p),
                Property::CpCoobservable => check_cp_coobservable(&p, None),
                Property::DaCoobservable => check_da_coobservable(&p, None),
                Property::GenCoobservable => check_gen_coobservable(&p).unwrap(),
                Property::MarkedLangClosed => decsup::checks::check_marked_closed(&p),
            };
            prop_assert_eq!(entry.holds, o.holds, "{} on seed {}", prop.as_str(), seed);
        }
    }

    #[test]
    fn existence_implies_a_correct_closed_loop(seed in any::<u64>(), arch in 0..3usize) {
        let p = random_problem(seed, RandomLimits::default())
            .with_architecture(Architecture::ALL[arch])
            .unwrap();
        if decide_existence(&p).overall {
            let sups = local_supervisors(&p);
            for s in &sups {
                prop_assert!(s.compatibility_violation().is_none());
            }
            let cl = build_closed_loop(&p, &sups, &FusionRule::for_problem(&p)).unwrap().automaton;
            prop_assert!(naive_bisim(&cl, p.spec()).unwrap());
            prop_assert_eq!(bounded_language_difference(&cl, p.spec(), sound_depth_bound(&cl, p.spec())), None);
        }
    }

    #[test]
    fn fused_decisions_always_contain_uncontrollable_events(
        uc in 0u64..16, d1 in 0u64..16, d2 in 0u64..16, enable in 0u64..16, arch in 0..3usize
    ) {
        let c = EventSet::first_n(4).difference(EventSet::from_bits(uc));
        let enable = EventSet::from_bits(enable).intersection(c);
        let rule = FusionRule {
            kind: Architecture::ALL[arch],
            uncontrollable: EventSet::from_bits(uc),
            split: Some(DefaultSplit { enable, disable: c.difference(enable) }),
            arity: 2,
        };
        let fused = rule.fuse(&[EventSet::from_bits(d1), EventSet::from_bits(d2)]).unwrap();
        prop_assert!(EventSet::from_bits(uc).is_subset(fused));
        prop_assert!(EventSet::from_bits(d1).intersection(EventSet::from_bits(d2)).is_subset(fused));
    }
}
