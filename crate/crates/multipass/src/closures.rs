//! Boolean closure constructions and the accepting-profile decomposition.

use std::collections::BTreeSet;

use crate::analysis::ensure_complete;
use crate::machine::{
    EndKey, FinalVerdict, MidKey, MultipassAutomaton, StackKey, State, Word,
};
use crate::{Error, Result};

/// Swaps the final end-marker verdicts of a complete deterministic machine;
/// the result accepts exactly the complement language. Incomplete inputs
/// are completed first.
pub fn complement(m: &MultipassAutomaton) -> Result<MultipassAutomaton> {
    if !m.is_deterministic() {
        return Err(Error::Precondition(
            "complement is defined for deterministic machines only".into(),
        ));
    }
    let mut out = ensure_complete(m)?;
    for verdict in out.end_final.values_mut() {
        *verdict = match verdict {
            FinalVerdict::Accept => FinalVerdict::Negative,
            FinalVerdict::Negative => FinalVerdict::Accept,
        };
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BoolOp {
    Union,
    Intersection,
}

/// L(m1) ∪ L(m2) with pass count k₁ + k₂: simulate m1, then either commit
/// to a sink verdict or hand over to m2.
pub fn union(m1: &MultipassAutomaton, m2: &MultipassAutomaton) -> Result<MultipassAutomaton> {
    combine(m1, m2, BoolOp::Union)
}

/// L(m1) ∩ L(m2) with pass count k₁ + k₂.
pub fn intersection(
    m1: &MultipassAutomaton,
    m2: &MultipassAutomaton,
) -> Result<MultipassAutomaton> {
    combine(m1, m2, BoolOp::Intersection)
}

const ACC: &str = "__acc";
const REJ: &str = "__rej";
const SKIP: &str = "__skip";
const START: &str = "__start";

fn prefixed(tag: &str, state: &State) -> State {
    format!("{tag}:{state}")
}

fn combine(
    m1: &MultipassAutomaton,
    m2: &MultipassAutomaton,
    op: BoolOp,
) -> Result<MultipassAutomaton> {
    if m1.input_alphabet != m2.input_alphabet {
        return Err(Error::AlphabetMismatch(
            "union/intersection require identical input alphabets".into(),
        ));
    }
    if m1.mode != m2.mode {
        return Err(Error::ModeMismatch(
            "union/intersection require identical modes".into(),
        ));
    }
    let det = m1.is_deterministic();
    let (m1, m2) = if det {
        (ensure_complete(m1)?, ensure_complete(m2)?)
    } else {
        (m1.clone(), m2.clone())
    };
    let (k1, k2) = (m1.passes, m2.passes);
    let k = k1 + k2;

    let mut out = MultipassAutomaton {
        passes: k,
        mode: m1.mode,
        states: BTreeSet::new(),
        initial: String::new(),
        input_alphabet: m1.input_alphabet.clone(),
        stack_alphabet: &m1.stack_alphabet | &m2.stack_alphabet,
        transitions: Default::default(),
        end_nonfinal: Default::default(),
        end_final: Default::default(),
    };
    for q in &m1.states {
        out.states.insert(prefixed("1", q));
    }
    for q in &m2.states {
        out.states.insert(prefixed("2", q));
    }
    let acc: State = ACC.into();
    let rej: State = REJ.into();
    out.states.insert(acc.clone());
    out.states.insert(rej.clone());

    let copy_mid = |out: &mut MultipassAutomaton,
                    m: &MultipassAutomaton,
                    tag: &str,
                    pass_offset: u32| {
        for ((pass, q, input, key), targets) in &m.transitions {
            let mapped: Vec<(State, Word)> = targets
                .iter()
                .map(|(to, push)| (prefixed(tag, to), push.clone()))
                .collect();
            out.transitions
                .insert((pass + pass_offset, prefixed(tag, q), input.clone(), key.clone()), mapped);
        }
        for ((pass, q, key), targets) in &m.end_nonfinal {
            let mapped: BTreeSet<State> =
                targets.iter().map(|to| prefixed(tag, to)).collect();
            out.end_nonfinal
                .insert((pass + pass_offset, prefixed(tag, q), key.clone()), mapped);
        }
    };
    copy_mid(&mut out, &m1, "1", 0);
    copy_mid(&mut out, &m2, "2", k1);

    let m2_start = prefixed("2", &m2.initial);

    // Hand-over at the end of pass k1: m1's final verdicts become nonfinal
    // routing decisions of the combined machine.
    for ((q, key), verdict) in &m1.end_final {
        let target: Option<State> = match (op, verdict, det) {
            (BoolOp::Union, FinalVerdict::Accept, _) => Some(acc.clone()),
            (BoolOp::Union, FinalVerdict::Negative, true) => Some(m2_start.clone()),
            // Nondeterministic union: this computation dies; the scan
            // branch covers L(m2) independently.
            (BoolOp::Union, FinalVerdict::Negative, false) => None,
            (BoolOp::Intersection, FinalVerdict::Accept, _) => Some(m2_start.clone()),
            (BoolOp::Intersection, FinalVerdict::Negative, true) => Some(rej.clone()),
            (BoolOp::Intersection, FinalVerdict::Negative, false) => None,
        };
        if let Some(target) = target {
            out.end_nonfinal
                .entry((k1, prefixed("1", q), key.clone()))
                .or_default()
                .insert(target);
        }
    }

    // Sinks scan the input of every remaining pass without touching the
    // stack and take the forced end-marker transition.
    let keys: Vec<StackKey> = out.stack_keys().collect();
    for sink in [&acc, &rej] {
        for pass in 1..=k {
            for key in &keys {
                let restore: Word = key.iter().cloned().collect();
                for sym in &out.input_alphabet {
                    out.transitions.insert(
                        (pass, sink.clone(), Some(sym.clone()), key.clone()),
                        vec![(sink.clone(), restore.clone())],
                    );
                }
                if pass < k {
                    out.end_nonfinal
                        .entry((pass, sink.clone(), key.clone()))
                        .or_default()
                        .insert(sink.clone());
                }
            }
        }
    }
    for key in &keys {
        out.end_final
            .insert((acc.clone(), key.clone()), FinalVerdict::Accept);
        out.end_final
            .insert((rej.clone(), key.clone()), FinalVerdict::Negative);
    }

    // m2's final verdicts survive as the combined final map.
    for ((q, key), verdict) in &m2.end_final {
        out.end_final.insert((prefixed("2", q), key.clone()), *verdict);
    }

    out.initial = prefixed("1", &m1.initial);

    if !det && op == BoolOp::Union {
        // Scan branch: a fresh initial state nondeterministically either
        // behaves as m1's initial or skips passes 1..k1 and starts m2.
        let start: State = START.into();
        let skip: State = SKIP.into();
        out.states.insert(start.clone());
        out.states.insert(skip.clone());
        // Inherit m1's initial behavior on the empty stack (the only
        // reachable key at the start of pass 1).
        for ((pass, q, input, key), targets) in &m1.transitions {
            if *pass == 1 && q == &m1.initial && key.is_none() {
                let mapped: Vec<(State, Word)> = targets
                    .iter()
                    .map(|(to, push)| (prefixed("1", to), push.clone()))
                    .collect();
                out.transitions
                    .entry((1, start.clone(), input.clone(), None))
                    .or_default()
                    .extend(mapped);
            }
        }
        let mut start_end: BTreeSet<State> = BTreeSet::new();
        if k1 > 1 {
            if let Some(targets) = &m1.end_nonfinal.get(&(1, m1.initial.clone(), None)) {
                start_end.extend(targets.iter().map(|to| prefixed("1", to)));
            }
        } else if m1.end_final.get(&(m1.initial.clone(), None)) == Some(&FinalVerdict::Accept) {
            start_end.insert(acc.clone());
        }
        // The skip alternative.
        for sym in &out.input_alphabet {
            out.transitions
                .entry((1, start.clone(), Some(sym.clone()), None))
                .or_default()
                .push((skip.clone(), Vec::new()));
            for pass in 1..=k1 {
                out.transitions.insert(
                    (pass, skip.clone(), Some(sym.clone()), None),
                    vec![(skip.clone(), Vec::new())],
                );
            }
        }
        for pass in 1..k1 {
            out.end_nonfinal
                .entry((pass, skip.clone(), None))
                .or_default()
                .insert(skip.clone());
        }
        out.end_nonfinal
            .entry((k1, skip.clone(), None))
            .or_default()
            .insert(m2_start.clone());
        start_end.insert(if k1 == 1 { m2_start.clone() } else { skip.clone() });
        out.end_nonfinal.insert((1, start.clone(), None), start_end);
        out.initial = start;
    }

    // Unreachable (state, key) slots in the final map default to Negative.
    let states: Vec<State> = out.states.iter().cloned().collect();
    for q in states {
        for key in &keys {
            out.end_final
                .entry((q.clone(), key.clone()))
                .or_insert(FinalVerdict::Negative);
        }
    }

    if det {
        // Totalize unreachable pass/state combinations so the output
        // remains complete.
        out = ensure_complete(&out)?;
    }
    debug_assert!(out.validate().is_valid(), "{:?}", out.validate().issues);
    Ok(out)
}

/// One accepting profile: per pass, the entry state, the stack top at the
/// end-marker, and the state at the end-marker.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Profile {
    pub triples: Vec<(State, StackKey, State)>,
}

/// Decomposes L(machine) as ⋃ᵢ ⋂ⱼ L(M_{i,j}) over all syntactically
/// consistent accepting profiles. Profiles whose intersection is empty are
/// included (realizability is an undecidable emptiness question); they
/// contribute nothing to the union.
pub fn profile_decomposition(
    machine: &MultipassAutomaton,
) -> Result<Vec<(Profile, Vec<MultipassAutomaton>)>> {
    let m = if machine.is_deterministic() {
        ensure_complete(machine)?
    } else {
        machine.clone()
    };
    let k = m.passes;
    let keys: Vec<StackKey> = m.stack_keys().collect();
    let states: Vec<State> = m.states.iter().cloned().collect();

    let mut profiles: Vec<Profile> = Vec::new();
    // (entry states so far, end-triples so far)
    let mut stack: Vec<(Vec<(State, StackKey, State)>, State)> =
        vec![(Vec::new(), m.initial.clone())];
    while let Some((triples, entry)) = stack.pop() {
        let j = triples.len() as u32 + 1;
        for key in &keys {
            for q1 in &states {
                let mut extended = triples.clone();
                extended.push((entry.clone(), key.clone(), q1.clone()));
                if j < k {
                    let end: EndKey = (j, q1.clone(), key.clone());
                    if let Some(targets) = m.end_nonfinal.get(&end) {
                        for next in targets {
                            stack.push((extended.clone(), next.clone()));
                        }
                    }
                } else if m.end_final.get(&(q1.clone(), key.clone()))
                    == Some(&FinalVerdict::Accept)
                {
                    profiles.push(Profile { triples: extended });
                }
            }
        }
    }
    profiles.sort();
    profiles.dedup();

    let mut out = Vec::with_capacity(profiles.len());
    for profile in profiles {
        let machines = profile
            .triples
            .iter()
            .enumerate()
            .map(|(idx, (entry, key, q1))| pass_slice(&m, idx as u32 + 1, entry, key, q1))
            .collect();
        out.push((profile, machines));
    }
    Ok(out)
}

/// One-pass machine simulating pass `j` of `m` from `entry`, accepting
/// exactly on reading ♯ in state `q1` with `key` on top.
fn pass_slice(
    m: &MultipassAutomaton,
    j: u32,
    entry: &State,
    key: &StackKey,
    q1: &State,
) -> MultipassAutomaton {
    let mut transitions: std::collections::BTreeMap<MidKey, Vec<(State, Word)>> =
        Default::default();
    for ((pass, q, input, k), targets) in &m.transitions {
        if *pass == j {
            transitions.insert((1, q.clone(), input.clone(), k.clone()), targets.clone());
        }
    }
    let mut end_final = std::collections::BTreeMap::new();
    for q in &m.states {
        for kk in m.stack_keys() {
            let verdict = if q == q1 && &kk == key {
                FinalVerdict::Accept
            } else {
                FinalVerdict::Negative
            };
            end_final.insert((q.clone(), kk), verdict);
        }
    }
    MultipassAutomaton {
        passes: 1,
        mode: m.mode,
        states: m.states.clone(),
        initial: entry.clone(),
        input_alphabet: m.input_alphabet.clone(),
        stack_alphabet: m.stack_alphabet.clone(),
        transitions,
        end_nonfinal: Default::default(),
        end_final,
    }
}
