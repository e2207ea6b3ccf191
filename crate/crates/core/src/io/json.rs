//! JSON views of verdicts and synthesis results. Every document carries a
//! top-level `schema` version.

use serde_json::{json, Value};

use crate::automaton::Automaton;
use crate::checks::{Entry, Verdict, Witness};
use crate::event::{Alphabet, EventSet, EventString};
use crate::oracle::OracleVerdict;
use crate::synthesis::{LocalSupervisor, Synthesized};

pub const SCHEMA: u32 = 1;

fn string(alphabet: &Alphabet, s: &EventString) -> Value {
    s.iter().map(|e| alphabet.name(e)).collect()
}

fn set(alphabet: &Alphabet, s: EventSet) -> Value {
    s.iter().map(|e| alphabet.name(e)).collect()
}

fn witness(alphabet: &Alphabet, w: &Witness) -> Value {
    json!({
        "s": string(alphabet, &w.s),
        "sigma": w.sigma.map(|e| alphabet.name(e)),
        "per_agent": w.per_agent.iter().map(|c| json!({
            "i": c.agent,
            "confusing": string(alphabet, &c.confusing),
        })).collect::<Vec<_>>(),
    })
}

pub fn entry_json(alphabet: &Alphabet, e: &Entry) -> Value {
    let mut v = json!({
        "condition": e.condition.as_str(),
        "holds": e.holds,
        "witness": e.witness.as_ref().map(|w| witness(alphabet, w)),
    });
    if let Some(variant) = e.condition.variant() {
        v["variant"] = json!(variant.as_str());
    }
    if !e.parts.is_empty() {
        v["parts"] = e.parts.iter().map(|p| entry_json(alphabet, p)).collect();
    }
    v
}

fn verdict_body(alphabet: &Alphabet, v: &Verdict) -> Value {
    json!({
        "architecture": v.architecture,
        "overall": v.overall,
        "entries": v.entries.iter().map(|e| entry_json(alphabet, e)).collect::<Vec<_>>(),
    })
}

pub fn verdict_json(alphabet: &Alphabet, v: &Verdict) -> Value {
    let mut body = verdict_body(alphabet, v);
    body["schema"] = json!(SCHEMA);
    body
}

pub fn automaton_json(a: &Automaton) -> Value {
    let sigma = a.alphabet();
    json!({
        "alphabet": sigma.names(),
        "states": a.states().map(|x| a.name(x)).collect::<Vec<_>>(),
        "initial": a.name(a.initial()),
        "marked": a.marked_states().map(|x| a.name(x)).collect::<Vec<_>>(),
        "transitions": a.transitions()
            .map(|(x, e, y)| json!([a.name(x), sigma.name(e), a.name(y)]))
            .collect::<Vec<_>>(),
    })
}

fn supervisor_json(s: &LocalSupervisor) -> Value {
    let a = &s.automaton;
    let mut v = automaton_json(a);
    v["agent"] = json!(s.agent.index);
    v["dump"] = json!(s.dump.map(|d| a.name(d)));
    v["decisions"] = a
        .states()
        .map(|y| json!({ "state": a.name(y), "enabled": set(a.alphabet(), s.decision(y)) }))
        .collect();
    v
}

/// Everything `synthesize` produces, for programmatic use.
pub fn bundle_json(plant: &Automaton, spec: &Automaton, s: &Synthesized) -> Value {
    let cl = &s.closed_loop;
    let provenance: Vec<Value> = cl
        .provenance
        .iter()
        .enumerate()
        .map(|(i, (x, ys))| {
            json!({
                "state": cl.automaton.name(crate::automaton::StateId::from_index(i)),
                "plant": plant.name(*x),
                "supervisors": s.supervisors.iter().zip(ys).map(|(sup, &y)| sup.automaton.name(y)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut closed = automaton_json(&cl.automaton);
    closed["provenance"] = json!(provenance);
    json!({
        "schema": SCHEMA,
        "verdict": verdict_body(plant.alphabet(), &s.verdict),
        "fusion": {
            "kind": s.rule.kind,
            "uncontrollable": set(plant.alphabet(), s.rule.uncontrollable),
            "enable_default": s.rule.split.map(|x| set(plant.alphabet(), x.enable)),
            "disable_default": s.rule.split.map(|x| set(plant.alphabet(), x.disable)),
        },
        "supervisors": s.supervisors.iter().map(supervisor_json).collect::<Vec<_>>(),
        "closed_loop": closed,
        "relation": s.relation.relation.iter()
            .map(|&(x, y)| json!([cl.automaton.name(x), spec.name(y)]))
            .collect::<Vec<_>>(),
    })
}

/// One oracle result next to the checker's verdict for the same property.
pub fn oracle_row(alphabet: &Alphabet, property: &str, checker: bool, o: &OracleVerdict) -> Value {
    json!({
        "property": property,
        "checker": checker,
        "oracle": o.holds,
        "agree": checker == o.holds,
        "depth": o.depth,
        "sound_bound": o.sound_bound,
        "exact": o.is_exact(),
        "witness": o.witness.as_ref().map(|(s, e)| json!({
            "s": string(alphabet, s),
            "sigma": e.map(|e| alphabet.name(e)),
        })),
    })
}
