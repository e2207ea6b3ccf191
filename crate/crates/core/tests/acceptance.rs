//! Acceptance suite. Every criterion prints one PASS/FAIL line; the process
//! exits non-zero when any criterion fails.

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use decsup::checks::{
    check_cp_coobservable, check_da_coobservable, check_gen_coobservable, check_lang_controllable,
    check_marked_closed, check_plant_detspec_bisim, CoobsVariant,
};
use decsup::fixtures;
use decsup::io::problem_file::{parse_problem_file, write_problem_file};
use decsup::io::text::write_automaton;
use decsup::oracle::{
    bounded_language_difference, naive_bisim, oracle_check, problem_depth_bound, random_problem,
    sound_depth_bound, Property, RandomLimits,
};
use decsup::regex::compile;
use decsup::synthesis::{build_closed_loop, local_supervisors, Synthesized};
use decsup::{
    bisimilar, decide_existence, determinize, synthesize, Alphabet, Architecture, Automaton,
    AutomatonBuilder, ControlProblem, DefaultSplit, EventSet, FusionRule, StateId, Synthesis,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn synthesized(p: &ControlProblem) -> Result<Box<Synthesized>, String> {
    match synthesize(p) {
        Synthesis::Synthesized(s) => Ok(s),
        Synthesis::Refused(v) => Err(format!(
            "synthesis refused: {:?}",
            v.failing()
                .map(|e| e.condition.as_str())
                .collect::<Vec<_>>()
        )),
    }
}

/// Closed loop bisimilar to the specification by the independent checker,
/// and equal bounded languages at the sound bound.
fn verify_closed_loop(p: &ControlProblem, s: &Synthesized) -> Result<(), String> {
    let cl = &s.closed_loop.automaton;
    ensure(naive_bisim(cl, p.spec()).unwrap(), || {
        "closed loop not bisimilar to R".into()
    })?;
    let k = sound_depth_bound(cl, p.spec());
    match bounded_language_difference(cl, p.spec(), k) {
        None => Ok(()),
        Some(w) => Err(format!(
            "languages differ at {}",
            p.alphabet().format_string(&w)
        )),
    }
}

fn confusion_strings(
    p: &ControlProblem,
    variant: CoobsVariant,
) -> Result<Vec<(usize, String)>, String> {
    let entry = match variant {
        CoobsVariant::Cp => check_cp_coobservable(p, None),
        CoobsVariant::Da => check_da_coobservable(p, None),
        CoobsVariant::General => check_gen_coobservable(p).map_err(|e| e.to_string())?,
    };
    let w = entry.witness.ok_or("expected a witness")?;
    let sigma = p.alphabet();
    ensure(w.s.is_empty(), || {
        format!("witness string {} is not ε", sigma.format_string(&w.s))
    })?;
    ensure(w.sigma == sigma.id("g"), || "witness event is not g".into())?;
    let g = sigma.id("g").unwrap();
    let mut out = Vec::new();
    // C&P: every agent would have to disable a legal move; D&A: every
    // agent would have to enable an illegal one
    let want_in_spec = variant == CoobsVariant::Cp;
    for c in &w.per_agent {
        let t = c.confusing.with(g);
        let in_spec = p.spec().accepts(&t).unwrap().in_language();
        let in_plant = p.plant().accepts(&t).unwrap().in_language();
        ensure(in_plant && in_spec == want_in_spec, || {
            format!("unexpected confusion {}", sigma.format_string(&t))
        })?;
        out.push((c.agent, sigma.format_string(&c.confusing)));
    }
    Ok(out)
}

fn checker_verdict(p: &ControlProblem, prop: Property) -> Option<bool> {
    Some(match prop {
        Property::BisimPlantDetspec => check_plant_detspec_bisim(p).holds,
        Property::LangControllable => check_lang_controllable(p).holds,
        Property::CpCoobservable => check_cp_coobservable(p, None).holds,
        Property::DaCoobservable => check_da_coobservable(p, None).holds,
        Property::GenCoobservable => check_gen_coobservable(p).ok()?.holds,
        Property::MarkedLangClosed => check_marked_closed(p).holds,
    })
}

/// Disagreements between each checker and the oracle at the sound bound,
/// plus the number of comparisons made and how many of them failed.
fn oracle_disagreements(p: &ControlProblem) -> (Vec<String>, usize, usize) {
    let k = problem_depth_bound(p);
    let mut bad = Vec::new();
    let mut n = 0;
    let mut failing = 0;
    for prop in Property::ALL {
        let Some(checker) = checker_verdict(p, prop) else {
            continue;
        };
        let o = oracle_check(prop.as_str(), p, k).unwrap();
        n += 1;
        failing += !o.holds as usize;
        if o.holds != checker || !o.is_exact() {
            bad.push(format!(
                "{} checker={} oracle={} exact={}",
                prop.as_str(),
                checker,
                o.holds,
                o.is_exact()
            ));
        }
    }
    (bad, n, failing)
}

fn criterion1() -> Outcome {
    let start = Instant::now();
    let fixture = fixtures::example1();
    let sigma = fixture.alphabet();
    let plant =
        determinize(&compile(sigma, fixtures::EXAMPLE1_PLANT_REGEX).unwrap()).into_automaton();
    let spec =
        determinize(&compile(sigma, fixtures::EXAMPLE1_SPEC_REGEX).unwrap()).into_automaton();
    ensure(plant.is_deterministic() && spec.is_deterministic(), || {
        "not deterministic".into()
    })?;
    let p = ControlProblem::new(
        plant,
        spec,
        fixture.agents().to_vec(),
        Architecture::Conjunctive,
        None,
    )
    .map_err(|e| e.to_string())?;
    let v = decide_existence(&p);
    for e in &v.entries {
        ensure(e.holds, || format!("{} fails", e.condition.as_str()))?;
    }
    ensure(v.entries.len() == 4 && v.overall, || {
        "expected four holding conditions".into()
    })?;
    let s = synthesized(&p)?;
    ensure(s.supervisors.len() == 2, || {
        "expected two supervisors".into()
    })?;
    for sup in &s.supervisors {
        ensure(sup.compatibility_violation().is_none(), || {
            format!("agent {} incompatible", sup.agent.index)
        })?;
    }
    ensure(
        bisimilar(&s.closed_loop.automaton, p.spec()).unwrap().holds,
        || "closed loop ≇ R".into(),
    )?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
    Ok(format!(
        "all conditions hold, closed loop ≅ R, {:.3} s",
        t.as_secs_f64()
    ))
}

fn criterion2() -> Outcome {
    let p = fixtures::example2();
    let cp = confusion_strings(&p, CoobsVariant::Cp)?;
    ensure(cp == vec![(1, "b".into()), (2, "a".into())], || {
        format!("confusions {cp:?}")
    })?;
    ensure(check_da_coobservable(&p, None).holds, || "D&A fails".into())?;
    let p = p.with_architecture(Architecture::Disjunctive).unwrap();
    let s = synthesized(&p)?;
    verify_closed_loop(&p, &s)?;
    let (bad, n, _) = oracle_disagreements(&p);
    ensure(bad.is_empty(), || bad.join("; "))?;
    Ok(format!(
        "C&P fails at (ε, g) via b·g and a·g, D&A holds, {n} oracle verdicts agree"
    ))
}

fn criterion3() -> Outcome {
    let p = fixtures::example3();
    let da = confusion_strings(&p, CoobsVariant::Da)?;
    ensure(!da.is_empty(), || "no confusions reported".into())?;
    ensure(check_cp_coobservable(&p, None).holds, || "C&P fails".into())?;
    let p = p.with_architecture(Architecture::Conjunctive).unwrap();
    let s = synthesized(&p)?;
    verify_closed_loop(&p, &s)?;
    let (bad, ..) = oracle_disagreements(&p);
    ensure(bad.is_empty(), || bad.join("; "))?;
    Ok("D&A fails at (ε, g), C&P holds, conjunctive closed loop verified".into())
}

fn criterion4() -> Outcome {
    let p = fixtures::example4();
    ensure(!check_cp_coobservable(&p, None).holds, || {
        "C&P holds".into()
    })?;
    ensure(!check_da_coobservable(&p, None).holds, || {
        "D&A holds".into()
    })?;
    let sigma = p.alphabet();
    let want = DefaultSplit {
        enable: sigma.set(["f", "e"]).unwrap(),
        disable: sigma.set(["a"]).unwrap(),
    };
    ensure(p.split() == Some(want), || "unexpected split".into())?;
    ensure(check_gen_coobservable(&p).unwrap().holds, || {
        "general co-observability fails".into()
    })?;
    let s = synthesized(&p)?;
    verify_closed_loop(&p, &s)?;
    let (bad, ..) = oracle_disagreements(&p);
    ensure(bad.is_empty(), || bad.join("; "))?;
    Ok("C&P and D&A fail, general with Σ_ce={f,e}, Σ_cd={a} holds, closed loop verified".into())
}

const RANDOM_PROBLEMS: u64 = 500;
const RANDOM_PAIRS: u64 = 1000;

/// Random automaton with at most `max` states over `alphabet`.
fn random_automaton(rng: &mut ChaCha8Rng, alphabet: &Arc<Alphabet>, max: usize) -> Automaton {
    let n = rng.gen_range(1..=max);
    let mut b = AutomatonBuilder::new(alphabet.clone());
    let ids: Vec<StateId> = (0..n)
        .map(|i| b.add_state(format!("s{i}")).unwrap())
        .collect();
    for &x in &ids {
        if rng.gen_bool(0.4) {
            b.mark(x);
        }
    }
    b.set_initial(ids[0]);
    for &x in &ids {
        for e in alphabet.events() {
            while rng.gen_bool(0.35) {
                b.transition(x, e, ids[rng.gen_range(0..n)]);
            }
        }
    }
    b.build().unwrap()
}

/// Copy of `a` with one state duplicated and its incoming edges shared
/// between the original and the copy; bisimilar to `a`.
fn split_state(rng: &mut ChaCha8Rng, a: &Automaton) -> Automaton {
    let n = a.num_states();
    let v = rng.gen_range(0..n);
    let mut b = AutomatonBuilder::new(a.alphabet().clone());
    for x in a.states() {
        let id = b.add_state(a.name(x)).unwrap();
        if a.is_marked(x) {
            b.mark(id);
        }
    }
    let copy = b.add_state("copy").unwrap();
    if a.is_marked(a.states().nth(v).unwrap()) {
        b.mark(copy);
    }
    b.set_initial(a.initial());
    for (x, e, y) in a.transitions() {
        let to = if y.index() == v && rng.gen_bool(0.5) {
            copy
        } else {
            y
        };
        b.transition(x, e, to);
        if x.index() == v {
            b.transition(copy, e, y);
        }
    }
    b.build().unwrap()
}

fn random_pair(seed: u64) -> (Automaton, Automaton) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=3);
    let alphabet = Alphabet::new(["a", "b", "c"].into_iter().take(m)).unwrap();
    let a = random_automaton(&mut rng, &alphabet, 7);
    let b = match seed % 3 {
        0 => random_automaton(&mut rng, &alphabet, 8),
        1 => split_state(&mut rng, &a),
        _ => {
            // a split copy with one marking flipped: usually not bisimilar
            let s = split_state(&mut rng, &a);
            let mut text = write_automaton(&s);
            let flip = s
                .name(s.states().nth(rng.gen_range(0..s.num_states())).unwrap())
                .to_string();
            let marked: Vec<String> = s.marked_states().map(|x| s.name(x).to_string()).collect();
            let toggled: Vec<String> = if marked.contains(&flip) {
                marked.into_iter().filter(|x| *x != flip).collect()
            } else {
                marked.into_iter().chain([flip]).collect()
            };
            text = text
                .lines()
                .filter(|l| !l.starts_with("marked"))
                .map(|l| format!("{l}\n"))
                .collect::<String>();
            if !toggled.is_empty() {
                text.push_str(&format!("marked {}\n", toggled.join(" ")));
            }
            decsup::io::text::parse_automaton(&text).unwrap()
        }
    };
    (a, b)
}

fn criterion5() -> Outcome {
    let start = Instant::now();
    let mut comparisons = 0;
    let mut negative = 0;
    for seed in 0..RANDOM_PROBLEMS {
        let p = random_problem(seed, RandomLimits::default());
        let (bad, n, failing) = oracle_disagreements(&p);
        ensure(bad.is_empty(), || {
            format!("seed {seed}: {}", bad.join("; "))
        })?;
        comparisons += n;
        negative += failing;
    }
    let mut holds = 0;
    for seed in 0..RANDOM_PAIRS {
        let (a, b) = random_pair(seed);
        let fast = bisimilar(&a, &b).unwrap().holds;
        ensure(fast == naive_bisim(&a, &b).unwrap(), || {
            format!("pair seed {seed}: bisimilar={fast}")
        })?;
        holds += fast as usize;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!(
        "{RANDOM_PROBLEMS} problems, {comparisons} exact property verdicts ({negative} failing), {RANDOM_PAIRS} pairs ({holds} bisimilar), 0 disagreements, {:.1} s",
        t.as_secs_f64()
    ))
}

fn criterion6() -> Outcome {
    let mut verified = 0;
    let mut tried = 0;
    for seed in 0..RANDOM_PROBLEMS {
        let base = random_problem(seed, RandomLimits::default());
        for arch in Architecture::ALL {
            let p = base.with_architecture(arch).map_err(|e| e.to_string())?;
            tried += 1;
            if !decide_existence(&p).overall {
                continue;
            }
            let sups = local_supervisors(&p);
            let rule = FusionRule::for_problem(&p);
            let cl = build_closed_loop(&p, &sups, &rule)
                .map_err(|e| format!("seed {seed} {arch}: {e}"))?;
            let cl = &cl.automaton;
            ensure(bisimilar(cl, p.spec()).unwrap().holds, || {
                format!("seed {seed} {arch}: closed loop ≇ R")
            })?;
            ensure(naive_bisim(cl, p.spec()).unwrap(), || {
                format!("seed {seed} {arch}: naive bisim fails")
            })?;
            let k = sound_depth_bound(cl, p.spec());
            if let Some(w) = bounded_language_difference(cl, p.spec(), k) {
                return Err(format!(
                    "seed {seed} {arch}: languages differ at {}",
                    p.alphabet().format_string(&w)
                ));
            }
            verified += 1;
        }
    }
    ensure(verified > 0, || {
        "no random problem admitted supervisors".into()
    })?;
    Ok(format!(
        "{verified} of {tried} problem/architecture pairs admit supervisors, all verified"
    ))
}

fn criterion7() -> Outcome {
    let sigma = EventSet::first_n(4);
    let mut cases = 0;
    let subsets: Vec<EventSet> = (0..16u64).map(EventSet::from_bits).collect();
    for &uc in &subsets {
        let c = sigma.difference(uc);
        let rule = |kind, split| FusionRule {
            kind,
            uncontrollable: uc,
            split,
            arity: 2,
        };
        let conj = rule(Architecture::Conjunctive, None);
        let disj = rule(Architecture::Disjunctive, None);
        let no_cd = rule(
            Architecture::General,
            Some(DefaultSplit {
                enable: c,
                disable: EventSet::EMPTY,
            }),
        );
        let no_ce = rule(
            Architecture::General,
            Some(DefaultSplit {
                enable: EventSet::EMPTY,
                disable: c,
            }),
        );
        for &d1 in &subsets {
            for &d2 in &subsets {
                let d = [d1, d2];
                let g1 = no_cd.fuse(&d).unwrap();
                let g2 = no_ce.fuse(&d).unwrap();
                ensure(
                    g1 == conj.fuse(&d).unwrap() && g1 == d1.intersection(d2).union(uc),
                    || format!("Σ_cd=∅ mismatch at uc={uc:?} d={d:?}"),
                )?;
                ensure(
                    g2 == disj.fuse(&d).unwrap() && g2 == d1.union(d2).union(uc),
                    || format!("Σ_ce=∅ mismatch at uc={uc:?} d={d:?}"),
                )?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} (Σ_uc, decision pair) cases"))
}

fn criterion8() -> Outcome {
    let limits = RandomLimits {
        plant_states: 10,
        spec_states: 8,
        agents: 3,
        events: 5,
    };
    let mut worst = Duration::ZERO;
    let mut instances = Vec::new();
    let mut seed = 0;
    while instances.len() < 20 && seed < 100_000 {
        let p = random_problem(seed, limits);
        seed += 1;
        if p.plant().num_states() == 10 && p.spec().num_states() == 8 && p.agents().len() == 3 {
            instances.push(p);
        }
    }
    ensure(instances.len() == 20, || {
        "too few full-size instances".into()
    })?;
    for p in &instances {
        for arch in Architecture::ALL {
            let p = p.with_architecture(arch).map_err(|e| e.to_string())?;
            let t = Instant::now();
            decide_existence(&p);
            worst = worst.max(t.elapsed());
        }
    }

    // the same through the command line, from files
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = &instances[0];
    std::fs::write(dir.path().join("g.aut"), write_automaton(p.plant())).unwrap();
    std::fs::write(dir.path().join("r.aut"), write_automaton(p.spec())).unwrap();
    let mut text = String::from("plant g.aut\nspec r.aut\narchitecture conjunctive\n");
    for a in p.agents() {
        text.push_str(&format!(
            "agent {} {{ controllable: {}; observable: {} }}\n",
            a.index,
            names(p, a.controllable),
            names(p, a.observable)
        ));
    }
    let file = parse_problem_file(&text).map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("p.prob"), write_problem_file(&file)).unwrap();
    let t = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_decsup"))
        .arg("check")
        .arg(dir.path().join("p.prob"))
        .output()
        .map_err(|e| e.to_string())?;
    let cli = t.elapsed();
    ensure(matches!(status.status.code(), Some(0 | 2)), || {
        format!(
            "check exited with {:?}: {}",
            status.status.code(),
            String::from_utf8_lossy(&status.stderr)
        )
    })?;
    worst = worst.max(cli);
    ensure(worst < Duration::from_secs(5), || {
        format!("slowest check took {worst:?}")
    })?;
    Ok(format!(
        "60 checks on 10/8-state, 3-agent problems plus one CLI run, slowest {:.3} s",
        worst.as_secs_f64()
    ))
}

fn names(p: &ControlProblem, s: EventSet) -> String {
    s.iter()
        .map(|e| p.alphabet().name(e))
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("manufacturing cycle end to end", criterion1),
        ("C&P fails, D&A holds, disjunctive synthesis", criterion2),
        ("D&A fails, C&P holds, conjunctive synthesis", criterion3),
        ("general architecture rescues both failures", criterion4),
        ("checkers agree with the oracle", criterion5),
        ("synthesized closed loops are bisimilar to R", criterion6),
        (
            "general fusion reduces to conjunctive and disjunctive",
            criterion7,
        ),
        ("check stays fast on 10/8-state problems", criterion8),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
