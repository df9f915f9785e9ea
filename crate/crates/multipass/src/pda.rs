//! Pushdown automata and the conversions to and from one-pass multipass
//! automata. PDA acceptance is by final state after the whole input is
//! consumed (trailing ε-moves included); the stack starts as [Z₀].

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::machine::{
    FinalVerdict, InputKey, Mode, MultipassAutomaton, StackKey, State, Symbol, Word,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushdownAutomaton {
    pub mode: Mode,
    pub states: BTreeSet<State>,
    pub initial: State,
    pub input_alphabet: BTreeSet<Symbol>,
    pub stack_alphabet: BTreeSet<Symbol>,
    pub start_symbol: Symbol,
    pub final_states: BTreeSet<State>,
    /// δ(q, σ ∈ Σ∪{ε}, γ ∈ Γ′) → set of (q′, push word ζ). The top symbol
    /// γ is popped and replaced by ζ; no moves exist on an empty stack.
    pub transitions: BTreeMap<(State, InputKey, Symbol), Vec<(State, Word)>>,
}

impl PushdownAutomaton {
    pub fn validate(&self) -> Result<()> {
        if !self.states.contains(&self.initial) {
            return Err(Error::Precondition("pda initial state unknown".into()));
        }
        if !self.stack_alphabet.contains(&self.start_symbol) {
            return Err(Error::Precondition("pda start symbol outside Γ′".into()));
        }
        for f in &self.final_states {
            if !self.states.contains(f) {
                return Err(Error::Precondition(format!("unknown final state {f:?}")));
            }
        }
        let mut eps_keys: HashSet<(&State, &Symbol)> = HashSet::new();
        for ((q, input, gamma), targets) in &self.transitions {
            if !self.states.contains(q) || !self.stack_alphabet.contains(gamma) {
                return Err(Error::Precondition(format!(
                    "pda transition at unknown state or stack symbol ({q}, {gamma})"
                )));
            }
            if let Some(sym) = input {
                if !self.input_alphabet.contains(sym) {
                    return Err(Error::Precondition(format!(
                        "pda transition reads unknown symbol {sym:?}"
                    )));
                }
            } else {
                eps_keys.insert((q, gamma));
            }
            for (to, push) in targets {
                if !self.states.contains(to) {
                    return Err(Error::Precondition(format!("unknown target {to:?}")));
                }
                for sym in push {
                    if !self.stack_alphabet.contains(sym) {
                        return Err(Error::Precondition(format!(
                            "push symbol {sym:?} outside Γ′"
                        )));
                    }
                }
            }
            if self.mode == Mode::Deterministic && targets.len() > 1 {
                return Err(Error::Precondition(format!(
                    "deterministic pda with {} choices at ({q}, {gamma})",
                    targets.len()
                )));
            }
        }
        if self.mode == Mode::Deterministic {
            for ((q, input, gamma), _) in &self.transitions {
                if input.is_some() && eps_keys.contains(&(q, gamma)) {
                    return Err(Error::Precondition(format!(
                        "deterministic pda mixes ε- and letter-moves at ({q}, {gamma})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Membership by configuration search (the unique run in deterministic
    /// mode); acceptance once the input is consumed and a final state is
    /// reached, possibly after trailing ε-moves. `None` means the budget
    /// ran out.
    pub fn accepts(&self, word: &[Symbol], budget: u64) -> Option<bool> {
        let n = word.len();
        let start = (self.initial.clone(), 0usize, vec![self.start_symbol.clone()]);
        let mut visited: HashSet<(State, usize, Word)> = HashSet::new();
        visited.insert(start.clone());
        let mut work = vec![start];
        let mut steps = 0u64;
        while let Some((q, pos, stack)) = work.pop() {
            if pos == n && self.final_states.contains(&q) {
                return Some(true);
            }
            let Some(top) = stack.last().cloned() else {
                continue;
            };
            let push_succ = |targets: &Vec<(State, Word)>, next_pos: usize,
                                 work: &mut Vec<(State, usize, Word)>,
                                 visited: &mut HashSet<(State, usize, Word)>,
                                 steps: &mut u64|
             -> bool {
                for (to, push) in targets {
                    if *steps >= budget {
                        return false;
                    }
                    *steps += 1;
                    let mut s = stack.clone();
                    s.pop();
                    s.extend_from_slice(push);
                    let conf = (to.clone(), next_pos, s);
                    if visited.insert(conf.clone()) {
                        work.push(conf);
                    }
                }
                true
            };
            if let Some(targets) = self.transitions.get(&(q.clone(), None, top.clone())) {
                if !push_succ(targets, pos, &mut work, &mut visited, &mut steps) {
                    return None;
                }
            }
            if pos < n {
                if let Some(targets) =
                    self.transitions
                        .get(&(q.clone(), Some(word[pos].clone()), top.clone()))
                {
                    if !push_succ(targets, pos + 1, &mut work, &mut visited, &mut steps) {
                        return None;
                    }
                }
            }
        }
        Some(false)
    }
}

const INIT: &str = "__init";
/// Cap on the initial ε-closure exploration in [`pda_to_onepass`].
const CLOSURE_CAP: usize = 100_000;

fn flagged(q: &State, flag: bool) -> State {
    format!("{q}|{}", if flag { "f" } else { "n" })
}

/// Configurations reachable from (q₀, [Z₀]) by ε-moves alone, then one
/// σ-move. Also reports whether the ε-closure itself touches a final state
/// (deciding ε-membership).
fn initial_closure(
    pda: &PushdownAutomaton,
) -> Result<(bool, BTreeMap<Symbol, Vec<(State, Word)>>)> {
    let mut visited: HashSet<(State, Word)> = HashSet::new();
    let mut work = vec![(pda.initial.clone(), vec![pda.start_symbol.clone()])];
    visited.insert(work[0].clone());
    let mut eps_final = false;
    let mut by_letter: BTreeMap<Symbol, Vec<(State, Word)>> = BTreeMap::new();
    while let Some((q, stack)) = work.pop() {
        if visited.len() > CLOSURE_CAP {
            return Err(Error::Precondition(
                "pda initial ε-closure does not stabilize".into(),
            ));
        }
        if pda.final_states.contains(&q) {
            eps_final = true;
        }
        let Some(top) = stack.last().cloned() else {
            continue;
        };
        if let Some(targets) = pda.transitions.get(&(q.clone(), None, top.clone())) {
            for (to, push) in targets {
                let mut s = stack.clone();
                s.pop();
                s.extend_from_slice(push);
                if visited.insert((to.clone(), s.clone())) {
                    work.push((to.clone(), s));
                }
            }
        }
        for sigma in &pda.input_alphabet {
            if let Some(targets) =
                pda.transitions
                    .get(&(q.clone(), Some(sigma.clone()), top.clone()))
            {
                for (to, push) in targets {
                    let mut s = stack.clone();
                    s.pop();
                    s.extend_from_slice(push);
                    let entry = (to.clone(), s);
                    let bucket = by_letter.entry(sigma.clone()).or_default();
                    if !bucket.contains(&entry) {
                        bucket.push(entry);
                    }
                }
            }
        }
    }
    Ok((eps_final, by_letter))
}

/// One-pass multipass automaton with the same language as the pda.
///
/// A fresh initial state injects the whole start configuration on the first
/// letter; afterwards machine moves mirror pda moves with the pda's Z₀
/// layer folded away (the machine's empty stack plays the role of Z₀). A
/// passed-through-final flag in the state makes the end-marker verdict
/// reflect whether the pda visits a final state after the input is
/// consumed: letter moves reset it, ε-moves accumulate it.
pub fn pda_to_onepass(pda: &PushdownAutomaton) -> Result<MultipassAutomaton> {
    pda.validate()?;
    let (eps_final, first_moves) = initial_closure(pda)?;

    let init: State = INIT.into();
    let mut out = MultipassAutomaton {
        passes: 1,
        mode: pda.mode,
        states: BTreeSet::new(),
        initial: init.clone(),
        input_alphabet: pda.input_alphabet.clone(),
        stack_alphabet: &pda.stack_alphabet | &pda.input_alphabet,
        transitions: Default::default(),
        end_nonfinal: Default::default(),
        end_final: Default::default(),
    };
    out.states.insert(init.clone());
    for q in &pda.states {
        out.states.insert(flagged(q, false));
        out.states.insert(flagged(q, true));
    }

    // First letter: jump from the fresh initial state into the pda's
    // configuration after ε-closure and one letter move, pushing the
    // reached pda stack wholesale (Z₀ included — it is an ordinary machine
    // stack symbol, and the machine's stack only re-empties if the pda
    // erases Z₀ and halts).
    for (sigma, targets) in &first_moves {
        let mapped: Vec<(State, Word)> = targets
            .iter()
            .map(|(to, stack)| (flagged(to, pda.final_states.contains(to)), stack.clone()))
            .collect();
        out.transitions
            .insert((1, init.clone(), Some(sigma.clone()), None), mapped);
    }

    // Main simulation: machine stack mirrors the pda stack exactly
    // (including Z₀ at the bottom), so machine-empty only occurs before the
    // first move or after the pda empties its stack entirely (it is then
    // stuck, as is the machine).
    for ((q, input, gamma), targets) in &pda.transitions {
        for flag in [false, true] {
            let mapped: Vec<(State, Word)> = targets
                .iter()
                .map(|(to, push)| {
                    let to_final = pda.final_states.contains(to);
                    let new_flag = match input {
                        Some(_) => to_final,
                        None => flag || to_final,
                    };
                    (flagged(to, new_flag), push.clone())
                })
                .collect();
            out.transitions.insert(
                (1, flagged(q, flag), input.clone(), Some(gamma.clone())),
                mapped,
            );
        }
    }

    // End-marker verdicts. In deterministic mode ε-moves take priority, so
    // the verdict is only consulted at the end of the trailing ε-chain and
    // the flag has accumulated every visited state. In nondeterministic
    // mode stopping anywhere is allowed, which matches existential
    // acceptance.
    let keys: Vec<StackKey> = out.stack_keys().collect();
    for q in &pda.states {
        for flag in [false, true] {
            let state = flagged(q, flag);
            for key in &keys {
                let verdict = if flag {
                    FinalVerdict::Accept
                } else {
                    FinalVerdict::Negative
                };
                out.end_final.insert((state.clone(), key.clone()), verdict);
            }
        }
    }
    for key in &keys {
        let verdict = if eps_final {
            FinalVerdict::Accept
        } else {
            FinalVerdict::Negative
        };
        out.end_final.insert((init.clone(), key.clone()), verdict);
    }

    let report = out.validate();
    if !report.is_valid() {
        return Err(Error::InvalidMachine(format!(
            "pda_to_onepass produced an invalid machine: {:?}",
            report.errors().collect::<Vec<_>>()
        )));
    }
    Ok(out)
}

fn cell(gamma: &Symbol, below: &StackKey) -> Symbol {
    match below {
        Some(b) => format!("{gamma}@{b}"),
        None => format!("{gamma}@_"),
    }
}

fn predicted(q: &State, top: &StackKey) -> State {
    match top {
        Some(t) => format!("{q}^{t}"),
        None => format!("{q}^_"),
    }
}

/// Pushdown automaton with the same language as a one-pass machine.
///
/// The pda state is the pair (machine state, predicted machine stack top);
/// stack cells remember the symbol below them so a pop restores the
/// prediction. A fresh bottom symbol Z₀ stands for the machine's empty
/// stack and is never erased. Final states are the pairs whose predicted
/// top yields an accepting end-marker verdict — for deterministic machines
/// restricted to pairs with no pending ε-move, since the machine reads its
/// verdict only at the end of the ε-chain.
pub fn onepass_to_pda(m: &MultipassAutomaton) -> Result<PushdownAutomaton> {
    if m.passes != 1 {
        return Err(Error::Precondition(format!(
            "onepass_to_pda requires a 1-pass machine, got {}",
            m.passes
        )));
    }
    let report = m.validate();
    if !report.is_valid() {
        return Err(Error::InvalidMachine(format!(
            "{:?}",
            report.errors().collect::<Vec<_>>()
        )));
    }

    let z0: Symbol = {
        let mut z = "Z0".to_string();
        while m.stack_alphabet.contains(&z) {
            z.push('_');
        }
        z
    };
    let mkeys: Vec<StackKey> = m.stack_keys().collect();

    let mut pda = PushdownAutomaton {
        mode: m.mode,
        states: BTreeSet::new(),
        initial: predicted(&m.initial, &None),
        input_alphabet: m.input_alphabet.clone(),
        stack_alphabet: std::iter::once(z0.clone()).collect(),
        start_symbol: z0.clone(),
        final_states: BTreeSet::new(),
        transitions: Default::default(),
    };
    for gamma in &m.stack_alphabet {
        for below in &mkeys {
            pda.stack_alphabet.insert(cell(gamma, below));
        }
    }
    for q in &m.states {
        for top in &mkeys {
            pda.states.insert(predicted(q, top));
        }
    }

    // enc(ζ, below): stack cells for the push word, each remembering its
    // predecessor; returns the cells bottom-to-top plus the new prediction.
    let enc = |zeta: &Word, below: &StackKey| -> (Word, StackKey) {
        let mut cells = Vec::with_capacity(zeta.len());
        let mut prev = below.clone();
        for sym in zeta {
            cells.push(cell(sym, &prev));
            prev = Some(sym.clone());
        }
        (cells, prev)
    };

    for ((_, q, input, key), targets) in &m.transitions {
        match key {
            None => {
                // Machine empty stack ⇔ prediction ε ⇔ pda top Z₀.
                let from = predicted(q, &None);
                let mapped: Vec<(State, Word)> = targets
                    .iter()
                    .map(|(to, zeta)| {
                        let (cells, pred) = enc(zeta, &None);
                        let mut push = vec![z0.clone()];
                        push.extend(cells);
                        (predicted(to, &pred), push)
                    })
                    .collect();
                pda.transitions
                    .insert((from, input.clone(), z0.clone()), mapped);
            }
            Some(gamma) => {
                // Defined for every possible symbol below the popped top.
                for below in &mkeys {
                    let from = predicted(q, key);
                    let mapped: Vec<(State, Word)> = targets
                        .iter()
                        .map(|(to, zeta)| {
                            let (cells, pred) = enc(zeta, below);
                            let pred = if zeta.is_empty() { below.clone() } else { pred };
                            (predicted(to, &pred), cells)
                        })
                        .collect();
                    pda.transitions
                        .insert((from, input.clone(), cell(gamma, below)), mapped);
                }
            }
        }
    }

    for q in &m.states {
        for top in &mkeys {
            if m.end_final.get(&(q.clone(), top.clone())) == Some(&FinalVerdict::Accept) {
                let pending_eps = m.is_deterministic()
                    && m.transitions
                        .contains_key(&(1, q.clone(), None, top.clone()));
                if !pending_eps {
                    pda.final_states.insert(predicted(q, top));
                }
            }
        }
    }

    pda.validate()?;
    Ok(pda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::DEFAULT_BUDGET;
    use crate::words::{enumerate_words, word};

    /// Standard deterministic matching-stack pda for {aⁿbⁿ : n ≥ 0}.
    pub fn anbn_pda() -> PushdownAutomaton {
        let mut t: BTreeMap<(State, InputKey, Symbol), Vec<(State, Word)>> = BTreeMap::new();
        let z0 = "Z".to_string();
        t.insert(
            ("s".into(), Some("a".into()), z0.clone()),
            vec![("push".into(), word("Z A"))],
        );
        t.insert(
            ("push".into(), Some("a".into()), "A".into()),
            vec![("push".into(), word("A A"))],
        );
        t.insert(
            ("push".into(), Some("b".into()), "A".into()),
            vec![("pop".into(), vec![])],
        );
        t.insert(
            ("pop".into(), Some("b".into()), "A".into()),
            vec![("pop".into(), vec![])],
        );
        t.insert(
            ("pop".into(), None, z0.clone()),
            vec![("done".into(), vec![z0.clone()])],
        );
        PushdownAutomaton {
            mode: Mode::Deterministic,
            states: ["s", "push", "pop", "done"].iter().map(|s| s.to_string()).collect(),
            initial: "s".into(),
            input_alphabet: ["a", "b"].iter().map(|s| s.to_string()).collect(),
            stack_alphabet: ["Z", "A"].iter().map(|s| s.to_string()).collect(),
            start_symbol: z0,
            final_states: ["s", "done"].iter().map(|s| s.to_string()).collect(),
            transitions: t,
        }
    }

    fn is_anbn(w: &[Symbol]) -> bool {
        let n = w.len();
        n % 2 == 0
            && w[..n / 2].iter().all(|s| s == "a")
            && w[n / 2..].iter().all(|s| s == "b")
    }

    #[test]
    fn anbn_pda_accepts_the_right_words() {
        let pda = anbn_pda();
        pda.validate().unwrap();
        let alphabet: Vec<Symbol> = pda.input_alphabet.iter().cloned().collect();
        for w in enumerate_words(&alphabet, 8) {
            assert_eq!(
                pda.accepts(&w, DEFAULT_BUDGET),
                Some(is_anbn(&w)),
                "pda wrong on {w:?}"
            );
        }
    }

    #[test]
    fn pda_to_onepass_preserves_anbn() {
        let pda = anbn_pda();
        let m = pda_to_onepass(&pda).unwrap();
        assert_eq!(m.passes, 1);
        assert!(m.is_deterministic());
        let alphabet: Vec<Symbol> = pda.input_alphabet.iter().cloned().collect();
        for w in enumerate_words(&alphabet, 10) {
            assert_eq!(m.accepts(&w), is_anbn(&w), "machine wrong on {w:?}");
        }
    }

    #[test]
    fn empty_and_full_languages() {
        let mut pda = anbn_pda();
        pda.final_states.clear();
        let m = pda_to_onepass(&pda).unwrap();
        let alphabet: Vec<Symbol> = pda.input_alphabet.iter().cloned().collect();
        for w in enumerate_words(&alphabet, 6) {
            assert!(!m.accepts(&w));
        }

        // Σ*: single final state with self-loops on Z₀.
        let z0 = "Z".to_string();
        let mut t: BTreeMap<(State, InputKey, Symbol), Vec<(State, Word)>> = BTreeMap::new();
        for sym in ["a", "b"] {
            t.insert(
                ("s".into(), Some(sym.into()), z0.clone()),
                vec![("s".into(), vec![z0.clone()])],
            );
        }
        let full = PushdownAutomaton {
            mode: Mode::Deterministic,
            states: std::iter::once("s".to_string()).collect(),
            initial: "s".into(),
            input_alphabet: ["a", "b"].iter().map(|s| s.to_string()).collect(),
            stack_alphabet: std::iter::once(z0.clone()).collect(),
            start_symbol: z0,
            final_states: std::iter::once("s".to_string()).collect(),
            transitions: t,
        };
        let m = pda_to_onepass(&full).unwrap();
        for w in enumerate_words(&["a".to_string(), "b".to_string()], 6) {
            assert!(m.accepts(&w), "full language missing {w:?}");
        }
    }

    #[test]
    fn round_trip_preserves_membership() {
        let pda = anbn_pda();
        let m = pda_to_onepass(&pda).unwrap();
        let back = onepass_to_pda(&m).unwrap();
        assert_eq!(back.mode, Mode::Deterministic);
        let alphabet: Vec<Symbol> = pda.input_alphabet.iter().cloned().collect();
        for w in enumerate_words(&alphabet, 8) {
            assert_eq!(
                back.accepts(&w, DEFAULT_BUDGET),
                Some(is_anbn(&w)),
                "round trip wrong on {w:?}"
            );
        }
    }

    #[test]
    fn free_group_machine_to_pda() {
        let m = crate::groups::build_wp(&crate::groups::GroupSpec::free(1)).unwrap();
        let pda = onepass_to_pda(&m).unwrap();
        let alphabet: Vec<Symbol> = m.input_alphabet.iter().cloned().collect();
        for w in enumerate_words(&alphabet, 8) {
            assert_eq!(
                pda.accepts(&w, DEFAULT_BUDGET),
                Some(m.accepts(&w)),
                "pda wrong on {w:?}"
            );
        }
    }

    #[test]
    fn epsilon_only_machine_round_trips() {
        use crate::machine::MachineBuilder;
        let mut b = MachineBuilder::new(1, Mode::Deterministic)
            .initial("e")
            .input_symbols(["a"]);
        b.end_final("e", None, FinalVerdict::Accept);
        b.totalize_final();
        let m = b.build();
        let pda = onepass_to_pda(&m).unwrap();
        assert_eq!(pda.accepts(&[], DEFAULT_BUDGET), Some(true));
        assert_eq!(pda.accepts(&word("a"), DEFAULT_BUDGET), Some(false));
    }
}
