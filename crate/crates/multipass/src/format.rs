//! Canonical JSON (de)serialization for machines, PDAs, gsms, and group
//! specs. Map-backed internals give a canonical ordering, so
//! serialize ∘ parse ∘ serialize is byte-identical.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::groups::GroupSpec;
use crate::gsm::Gsm;
use crate::machine::{
    FinalVerdict, InputKey, Mode, MultipassAutomaton, StackKey, State, Symbol, Word,
};
use crate::pda::PushdownAutomaton;
use crate::{Error, Result};

/// Marker for ε in the `input` field.
pub const EPS: &str = "eps";
/// Marker for the empty stack in `stack` fields.
pub const EMPTY: &str = "empty";

#[derive(Serialize, Deserialize)]
struct TransitionDto {
    pass: u32,
    state: State,
    input: String,
    stack: String,
    to: State,
    push: Word,
}

#[derive(Serialize, Deserialize)]
struct EndNonfinalDto {
    pass: u32,
    state: State,
    stack: String,
    to: State,
}

#[derive(Serialize, Deserialize)]
struct EndFinalDto {
    state: State,
    stack: String,
    verdict: String,
}

#[derive(Serialize, Deserialize)]
struct MachineDto {
    passes: u32,
    mode: Mode,
    states: Vec<State>,
    initial: State,
    input_alphabet: Vec<Symbol>,
    stack_alphabet: Vec<Symbol>,
    transitions: Vec<TransitionDto>,
    end_nonfinal: Vec<EndNonfinalDto>,
    end_final: Vec<EndFinalDto>,
}

fn input_key_str(k: &InputKey) -> String {
    k.clone().unwrap_or_else(|| EPS.to_string())
}

fn stack_key_str(k: &StackKey) -> String {
    k.clone().unwrap_or_else(|| EMPTY.to_string())
}

fn parse_input_key(s: &str) -> InputKey {
    if s == EPS {
        None
    } else {
        Some(s.to_string())
    }
}

fn parse_stack_key(s: &str) -> StackKey {
    if s == EMPTY {
        None
    } else {
        Some(s.to_string())
    }
}

fn verdict_str(v: FinalVerdict, mode: Mode) -> &'static str {
    match (v, mode) {
        (FinalVerdict::Accept, _) => "accept",
        (FinalVerdict::Negative, Mode::Deterministic) => "reject",
        (FinalVerdict::Negative, Mode::Nondeterministic) => "nodecision",
    }
}

fn parse_verdict(s: &str) -> Result<FinalVerdict> {
    match s {
        "accept" => Ok(FinalVerdict::Accept),
        "reject" | "nodecision" => Ok(FinalVerdict::Negative),
        other => Err(Error::Parse(format!("unknown verdict {other:?}"))),
    }
}

/// Rejects symbol names that collide with the ε / empty-stack markers.
fn check_symbols<'a>(syms: impl Iterator<Item = &'a Symbol>) -> Result<()> {
    for s in syms {
        if s == EPS || s == EMPTY {
            return Err(Error::Parse(format!(
                "symbol name {s:?} is reserved by the serialization format"
            )));
        }
    }
    Ok(())
}

pub fn machine_to_json(m: &MultipassAutomaton) -> String {
    let transitions = m
        .transitions
        .iter()
        .flat_map(|((pass, state, input, stack), targets)| {
            targets.iter().map(move |(to, push)| TransitionDto {
                pass: *pass,
                state: state.clone(),
                input: input_key_str(input),
                stack: stack_key_str(stack),
                to: to.clone(),
                push: push.clone(),
            })
        })
        .collect();
    let end_nonfinal = m
        .end_nonfinal
        .iter()
        .flat_map(|((pass, state, stack), targets)| {
            targets.iter().map(move |to| EndNonfinalDto {
                pass: *pass,
                state: state.clone(),
                stack: stack_key_str(stack),
                to: to.clone(),
            })
        })
        .collect();
    let end_final = m
        .end_final
        .iter()
        .map(|((state, stack), v)| EndFinalDto {
            state: state.clone(),
            stack: stack_key_str(stack),
            verdict: verdict_str(*v, m.mode).to_string(),
        })
        .collect();
    let dto = MachineDto {
        passes: m.passes,
        mode: m.mode,
        states: m.states.iter().cloned().collect(),
        initial: m.initial.clone(),
        input_alphabet: m.input_alphabet.iter().cloned().collect(),
        stack_alphabet: m.stack_alphabet.iter().cloned().collect(),
        transitions,
        end_nonfinal,
        end_final,
    };
    let mut out = serde_json::to_string_pretty(&dto).expect("machine serialization");
    out.push('\n');
    out
}

pub fn machine_from_json(text: &str) -> Result<MultipassAutomaton> {
    let dto: MachineDto =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    check_symbols(dto.input_alphabet.iter().chain(dto.stack_alphabet.iter()))?;
    let states: BTreeSet<State> = dto.states.into_iter().collect();
    let input_alphabet: BTreeSet<Symbol> = dto.input_alphabet.into_iter().collect();
    let stack_alphabet: BTreeSet<Symbol> = dto.stack_alphabet.into_iter().collect();
    let known_state = |q: &State| -> Result<()> {
        if states.contains(q) {
            Ok(())
        } else {
            Err(Error::Parse(format!("unknown state {q:?}")))
        }
    };
    let mut transitions: BTreeMap<_, Vec<(State, Word)>> = BTreeMap::new();
    for t in dto.transitions {
        known_state(&t.state)?;
        known_state(&t.to)?;
        let input = parse_input_key(&t.input);
        if let Some(sym) = &input {
            if !input_alphabet.contains(sym) {
                return Err(Error::Parse(format!("unknown input symbol {sym:?}")));
            }
        }
        let stack = parse_stack_key(&t.stack);
        if let Some(sym) = &stack {
            if !stack_alphabet.contains(sym) {
                return Err(Error::Parse(format!("unknown stack symbol {sym:?}")));
            }
        }
        for sym in &t.push {
            if !stack_alphabet.contains(sym) {
                return Err(Error::Parse(format!(
                    "unknown stack symbol {sym:?} in push word"
                )));
            }
        }
        transitions
            .entry((t.pass, t.state, input, stack))
            .or_default()
            .push((t.to, t.push));
    }
    let mut end_nonfinal: BTreeMap<_, BTreeSet<State>> = BTreeMap::new();
    for e in dto.end_nonfinal {
        known_state(&e.state)?;
        known_state(&e.to)?;
        end_nonfinal
            .entry((e.pass, e.state, parse_stack_key(&e.stack)))
            .or_default()
            .insert(e.to);
    }
    let mut end_final = BTreeMap::new();
    for e in dto.end_final {
        known_state(&e.state)?;
        end_final.insert(
            (e.state, parse_stack_key(&e.stack)),
            parse_verdict(&e.verdict)?,
        );
    }
    known_state(&dto.initial)?;
    Ok(MultipassAutomaton {
        passes: dto.passes,
        mode: dto.mode,
        states,
        initial: dto.initial,
        input_alphabet,
        stack_alphabet,
        transitions,
        end_nonfinal,
        end_final,
    })
}

#[derive(Serialize, Deserialize)]
struct PdaTransitionDto {
    state: State,
    input: String,
    stack: Symbol,
    to: State,
    push: Word,
}

#[derive(Serialize, Deserialize)]
struct PdaDto {
    mode: Mode,
    states: Vec<State>,
    initial: State,
    input_alphabet: Vec<Symbol>,
    stack_alphabet: Vec<Symbol>,
    start_symbol: Symbol,
    final_states: Vec<State>,
    transitions: Vec<PdaTransitionDto>,
}

pub fn pda_to_json(p: &PushdownAutomaton) -> String {
    let transitions = p
        .transitions
        .iter()
        .flat_map(|((state, input, stack), targets)| {
            targets.iter().map(move |(to, push)| PdaTransitionDto {
                state: state.clone(),
                input: input_key_str(input),
                stack: stack.clone(),
                to: to.clone(),
                push: push.clone(),
            })
        })
        .collect();
    let dto = PdaDto {
        mode: p.mode,
        states: p.states.iter().cloned().collect(),
        initial: p.initial.clone(),
        input_alphabet: p.input_alphabet.iter().cloned().collect(),
        stack_alphabet: p.stack_alphabet.iter().cloned().collect(),
        start_symbol: p.start_symbol.clone(),
        final_states: p.final_states.iter().cloned().collect(),
        transitions,
    };
    let mut out = serde_json::to_string_pretty(&dto).expect("pda serialization");
    out.push('\n');
    out
}

pub fn pda_from_json(text: &str) -> Result<PushdownAutomaton> {
    let dto: PdaDto = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    check_symbols(dto.input_alphabet.iter().chain(dto.stack_alphabet.iter()))?;
    let states: BTreeSet<State> = dto.states.into_iter().collect();
    let stack_alphabet: BTreeSet<Symbol> = dto.stack_alphabet.into_iter().collect();
    let mut transitions: BTreeMap<_, Vec<(State, Word)>> = BTreeMap::new();
    for t in dto.transitions {
        if !states.contains(&t.state) || !states.contains(&t.to) {
            return Err(Error::Parse(format!(
                "unknown state in transition {:?} -> {:?}",
                t.state, t.to
            )));
        }
        if !stack_alphabet.contains(&t.stack) {
            return Err(Error::Parse(format!("unknown stack symbol {:?}", t.stack)));
        }
        for sym in &t.push {
            if !stack_alphabet.contains(sym) {
                return Err(Error::Parse(format!(
                    "unknown stack symbol {sym:?} in push word"
                )));
            }
        }
        transitions
            .entry((t.state, parse_input_key(&t.input), t.stack))
            .or_default()
            .push((t.to, t.push));
    }
    Ok(PushdownAutomaton {
        mode: dto.mode,
        states,
        initial: dto.initial,
        input_alphabet: dto.input_alphabet.into_iter().collect(),
        stack_alphabet,
        start_symbol: dto.start_symbol,
        final_states: dto.final_states.into_iter().collect(),
        transitions,
    })
}

#[derive(Serialize, Deserialize)]
struct GsmRuleDto {
    state: State,
    input: Symbol,
    output: Word,
    to: State,
}

#[derive(Serialize, Deserialize)]
struct GsmDto {
    states: Vec<State>,
    initial: State,
    /// Derived from the rules when absent.
    #[serde(default)]
    output_alphabet: Vec<Symbol>,
    rules: Vec<GsmRuleDto>,
}

pub fn gsm_to_json(s: &Gsm) -> String {
    let rules = s
        .rules
        .iter()
        .map(|((state, input), (output, to))| GsmRuleDto {
            state: state.clone(),
            input: input.clone(),
            output: output.clone(),
            to: to.clone(),
        })
        .collect();
    let dto = GsmDto {
        states: s.states.iter().cloned().collect(),
        initial: s.initial.clone(),
        output_alphabet: s.output_alphabet.iter().cloned().collect(),
        rules,
    };
    let mut out = serde_json::to_string_pretty(&dto).expect("gsm serialization");
    out.push('\n');
    out
}

pub fn gsm_from_json(text: &str) -> Result<Gsm> {
    let dto: GsmDto = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut input_alphabet = BTreeSet::new();
    let mut output_alphabet: BTreeSet<Symbol> = dto.output_alphabet.into_iter().collect();
    let mut rules = BTreeMap::new();
    for r in dto.rules {
        input_alphabet.insert(r.input.clone());
        output_alphabet.extend(r.output.iter().cloned());
        if rules
            .insert((r.state.clone(), r.input.clone()), (r.output, r.to))
            .is_some()
        {
            return Err(Error::Parse(format!(
                "duplicate gsm rule ({:?}, {:?})",
                r.state, r.input
            )));
        }
    }
    Ok(Gsm {
        states: dto.states.into_iter().collect(),
        initial: dto.initial,
        input_alphabet,
        output_alphabet,
        rules,
    })
}

pub fn group_spec_to_json(spec: &GroupSpec) -> String {
    let mut out = serde_json::to_string_pretty(spec).expect("group spec serialization");
    out.push('\n');
    out
}

pub fn group_spec_from_json(text: &str) -> Result<GroupSpec> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::build_wp;
    use crate::words::word;

    #[test]
    fn machine_round_trip_is_byte_identical() {
        let m = build_wp(&GroupSpec::free_abelian(&["a", "b"])).unwrap();
        let json = machine_to_json(&m);
        let parsed = machine_from_json(&json).unwrap();
        assert_eq!(parsed, m);
        assert_eq!(machine_to_json(&parsed), json);
    }

    #[test]
    fn machine_round_trip_preserves_language() {
        let m = build_wp(&GroupSpec::free(2)).unwrap();
        let parsed = machine_from_json(&machine_to_json(&m)).unwrap();
        assert!(parsed.accepts(&word("a a^-1")));
        assert!(!parsed.accepts(&word("a b")));
    }

    #[test]
    fn bad_push_symbol_is_a_parse_error() {
        let m = build_wp(&GroupSpec::free(1)).unwrap();
        let json = machine_to_json(&m).replace("\"push\": [\n        \"a\"", "\"push\": [\n        \"zz\"");
        assert!(machine_from_json(&json).is_err());
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(
            machine_from_json("{ not json"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn pda_round_trip_is_byte_identical() {
        let m = build_wp(&GroupSpec::free(2)).unwrap();
        let p = crate::pda::onepass_to_pda(&m).unwrap();
        let json = pda_to_json(&p);
        let parsed = pda_from_json(&json).unwrap();
        assert_eq!(parsed, p);
        assert_eq!(pda_to_json(&parsed), json);
    }

    #[test]
    fn gsm_round_trip_is_byte_identical() {
        let images = std::iter::once(("y".to_string(), word("b b"))).collect();
        let s = Gsm::homomorphism(&images);
        let json = gsm_to_json(&s);
        let parsed = gsm_from_json(&json).unwrap();
        assert_eq!(parsed, s);
        assert_eq!(gsm_to_json(&parsed), json);
    }

    #[test]
    fn group_spec_round_trip() {
        for spec in [
            GroupSpec::free(2),
            GroupSpec::klein_bottle(),
            GroupSpec::infinite_dihedral(),
            GroupSpec::z_mod3_quotient(),
        ] {
            let json = group_spec_to_json(&spec);
            assert_eq!(group_spec_from_json(&json).unwrap(), spec);
        }
    }
}
