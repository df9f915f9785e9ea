//! Divergence analysis and the completion construction.
//!
//! A deterministic machine is *complete* when it reads the end-marker on
//! every pass — no configuration starts an unbounded ε-sequence. Every
//! deterministic machine has a complete equivalent: reroute each divergent
//! ε-start to a sink state that scans the rest of the input and rejects.

use std::collections::BTreeSet;

use crate::machine::{
    FinalVerdict, Mode, MultipassAutomaton, StackKey, State, Symbol, Word,
};
use crate::{Error, Result};

/// Name of the sink state introduced by [`make_complete`].
pub const SINK: &str = "__sink";

/// Safety cap for the ε-run simulation; the repeat detection below fires
/// long before this on any finite machine.
const EPS_RUN_CAP: usize = 1_000_000;

/// Outcome of simulating the ε-only run from a single stack cell.
enum EpsRun {
    /// The run stops (cell erased, or input/end-marker needed) after this
    /// many ε-steps.
    Stops(usize),
    Divergent,
}

/// Simulates the deterministic ε-only run of pass `pass` from state `state`
/// with stack `[gamma]`.
///
/// The run is a single path. It diverges iff a full configuration
/// (state, stack) repeats, or a (state, top) pair repeats at height
/// `h₂ ≥ h₁` with the run never dipping below `h₁` in between — in that case
/// the segment between the two occurrences never inspects the stack below
/// the first occurrence's top cell, so it replays forever.
fn eps_run(m: &MultipassAutomaton, pass: u32, state: &State, gamma: &Symbol) -> EpsRun {
    let mut st = state.clone();
    let mut stack: Word = vec![gamma.clone()];
    // (state, top, height, index) per step, for the pumping check.
    let mut history: Vec<(State, Symbol, usize)> = Vec::new();
    let mut heights: Vec<usize> = Vec::new();
    let mut full_configs: BTreeSet<(State, Word)> = BTreeSet::new();

    for step in 0..EPS_RUN_CAP {
        if stack.is_empty() {
            return EpsRun::Stops(step);
        }
        let top = stack.last().unwrap().clone();
        let key = (pass, st.clone(), None, Some(top.clone()));
        let Some((to, push)) = m.transitions.get(&key).and_then(|t| t.first()) else {
            return EpsRun::Stops(step);
        };

        if !full_configs.insert((st.clone(), stack.clone())) {
            return EpsRun::Divergent;
        }
        let h = stack.len();
        for (i, (s0, t0, h0)) in history.iter().enumerate() {
            if s0 == &st && t0 == &top && h >= *h0 && heights[i..].iter().all(|hh| hh >= h0) {
                return EpsRun::Divergent;
            }
        }
        history.push((st.clone(), top, h));
        heights.push(h);

        stack.pop();
        stack.extend_from_slice(push);
        st = to.clone();
    }
    EpsRun::Divergent
}

/// Returns every (pass, state, stack-key) from which the machine starts an
/// unbounded ε-sequence without erasing that stack occurrence. Empty result
/// means the machine never diverges mid-pass.
///
/// Only keys in Γ can diverge: ε-transitions on the empty stack are
/// forbidden, so an empty-stack configuration always stops.
pub fn divergence_analysis(
    m: &MultipassAutomaton,
) -> Result<BTreeSet<(u32, State, Symbol)>> {
    if !m.is_deterministic() {
        return Err(Error::Precondition(
            "divergence_analysis requires a deterministic machine".into(),
        ));
    }
    let mut divergent = BTreeSet::new();
    for pass in 1..=m.passes {
        for state in &m.states {
            for gamma in &m.stack_alphabet {
                let key = (pass, state.clone(), None, Some(gamma.clone()));
                if !m.transitions.contains_key(&key) {
                    continue;
                }
                if let EpsRun::Divergent = eps_run(m, pass, state, gamma) {
                    divergent.insert((pass, state.clone(), gamma.clone()));
                }
            }
        }
    }
    Ok(divergent)
}

/// True when the machine is deterministic, never diverges, and its
/// transition maps are total (so every run reads the end-marker on every
/// pass and ends in a definite verdict).
pub fn is_complete(m: &MultipassAutomaton) -> Result<bool> {
    if !divergence_analysis(m)?.is_empty() {
        return Ok(false);
    }
    let keys: Vec<StackKey> = m.stack_keys().collect();
    for pass in 1..=m.passes {
        for state in &m.states {
            for key in &keys {
                let has_eps =
                    m.transitions
                        .contains_key(&(pass, state.clone(), None, key.clone()));
                if !has_eps {
                    for sym in &m.input_alphabet {
                        if !m.transitions.contains_key(&(
                            pass,
                            state.clone(),
                            Some(sym.clone()),
                            key.clone(),
                        )) {
                            return Ok(false);
                        }
                    }
                }
                if pass < m.passes
                    && !m
                        .end_nonfinal
                        .contains_key(&(pass, state.clone(), key.clone()))
                {
                    return Ok(false);
                }
            }
        }
    }
    for state in &m.states {
        for key in &keys {
            if !m.end_final.contains_key(&(state.clone(), key.clone())) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Completion construction: adds a sink state `r` that scans the rest of
/// the input on every pass and rejects; reroutes every divergent ε-start to
/// `r` (restoring the popped symbol) and totalizes all remaining transition
/// maps toward `r`. The language is unchanged: rerouted configurations
/// could never have reached the end-marker, and totalized keys were stuck.
pub fn make_complete(m: &MultipassAutomaton) -> Result<MultipassAutomaton> {
    if !m.is_deterministic() {
        return Err(Error::Precondition(
            "make_complete requires a deterministic machine".into(),
        ));
    }
    let divergent = divergence_analysis(m)?;
    let mut out = m.clone();
    let sink: State = SINK.into();
    if out.states.contains(&sink) {
        return Err(Error::Precondition(format!(
            "machine already uses the reserved state name {SINK:?}"
        )));
    }
    out.states.insert(sink.clone());

    for (pass, state, gamma) in &divergent {
        out.transitions.insert(
            (*pass, state.clone(), None, Some(gamma.clone())),
            vec![(sink.clone(), vec![gamma.clone()])],
        );
    }

    let keys: Vec<StackKey> = out.stack_keys().collect();
    let states: Vec<State> = out.states.iter().cloned().collect();
    for pass in 1..=out.passes {
        for state in &states {
            for key in &keys {
                let has_eps = out
                    .transitions
                    .contains_key(&(pass, state.clone(), None, key.clone()));
                if !has_eps {
                    // Restore the popped symbol so the sink leaves the stack
                    // alone while scanning.
                    let restore: Word = key.iter().cloned().collect();
                    for sym in out.input_alphabet.clone() {
                        out.transitions
                            .entry((pass, state.clone(), Some(sym), key.clone()))
                            .or_insert_with(|| vec![(sink.clone(), restore.clone())]);
                    }
                }
                if pass < out.passes {
                    out.end_nonfinal
                        .entry((pass, state.clone(), key.clone()))
                        .or_insert_with(|| std::iter::once(sink.clone()).collect());
                }
            }
        }
    }
    for state in &states {
        for key in &keys {
            out.end_final
                .entry((state.clone(), key.clone()))
                .or_insert(FinalVerdict::Negative);
        }
    }
    debug_assert!(out.validate().is_valid());
    Ok(out)
}

/// Returns the completed machine, reusing the input when it already is
/// complete.
pub fn ensure_complete(m: &MultipassAutomaton) -> Result<MultipassAutomaton> {
    if is_complete(m)? {
        Ok(m.clone())
    } else {
        make_complete(m)
    }
}

/// The constants of the linear-time bound: k (passes), C (max push-word
/// length, at least 1) and B (max ε-burst length from any single stack
/// cell, at least 1). Requires a divergence-free deterministic machine.
pub fn step_bound_params(m: &MultipassAutomaton) -> Result<(u64, u64, u64)> {
    match m.mode {
        Mode::Deterministic => {
            if !divergence_analysis(m)?.is_empty() {
                return Err(Error::Precondition(
                    "step bound undefined for divergent machines".into(),
                ));
            }
        }
        Mode::Nondeterministic => {
            return Err(Error::Precondition(
                "step bound applies to deterministic machines".into(),
            ))
        }
    }
    let c = m
        .transitions
        .values()
        .flatten()
        .map(|(_, push)| push.len() as u64)
        .max()
        .unwrap_or(1)
        .max(1);
    let mut b: u64 = 1;
    for pass in 1..=m.passes {
        for state in &m.states {
            for gamma in &m.stack_alphabet {
                if m.transitions
                    .contains_key(&(pass, state.clone(), None, Some(gamma.clone())))
                {
                    if let EpsRun::Stops(steps) = eps_run(m, pass, state, gamma) {
                        b = b.max(steps as u64);
                    }
                }
            }
        }
    }
    Ok((m.passes as u64, c, b))
}

/// The step budget k·C·B²·n + k·C·B² sufficient for any input of length `n`
/// on a complete deterministic machine (the additive term covers the empty
/// input and the end-marker steps).
pub fn linear_budget(m: &MultipassAutomaton, n: usize) -> Result<u64> {
    let (k, c, b) = step_bound_params(m)?;
    Ok(k * c * b * b * (n as u64) + k * c * b * b)
}
