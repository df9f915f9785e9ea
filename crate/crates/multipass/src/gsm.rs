//! Generalized sequential machines and the transducer-based closures:
//! inverse gsm images, interleaved products, left quotients by finite sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::closures::{intersection, union};
use crate::machine::{
    FinalVerdict, MachineBuilder, Mode, MultipassAutomaton, StackKey, State, Symbol, Word,
    DEFAULT_BUDGET,
};
use crate::{Error, Result};

/// A deterministic finite-state transducer: reading σ in state q outputs a
/// word and moves to the next state. Defines g: Σ* → Δ* with g(ε) = ε.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gsm {
    pub states: BTreeSet<State>,
    pub initial: State,
    pub input_alphabet: BTreeSet<Symbol>,
    pub output_alphabet: BTreeSet<Symbol>,
    /// λ(q, σ) = (output word, next state); total over states × Σ.
    pub rules: BTreeMap<(State, Symbol), (Word, State)>,
}

impl Gsm {
    /// One-state gsm applying `images` letterwise (a monoid homomorphism).
    pub fn homomorphism(images: &BTreeMap<Symbol, Word>) -> Gsm {
        let q: State = "h".into();
        let mut output_alphabet = BTreeSet::new();
        let mut rules = BTreeMap::new();
        for (sym, image) in images {
            output_alphabet.extend(image.iter().cloned());
            rules.insert((q.clone(), sym.clone()), (image.clone(), q.clone()));
        }
        Gsm {
            states: std::iter::once(q.clone()).collect(),
            initial: q,
            input_alphabet: images.keys().cloned().collect(),
            output_alphabet,
            rules,
        }
    }

    /// Erases every symbol outside `keep`, copies the rest.
    pub fn projection(alphabet: &BTreeSet<Symbol>, keep: &BTreeSet<Symbol>) -> Gsm {
        let images = alphabet
            .iter()
            .map(|sym| {
                let image = if keep.contains(sym) {
                    vec![sym.clone()]
                } else {
                    Vec::new()
                };
                (sym.clone(), image)
            })
            .collect();
        let mut g = Gsm::homomorphism(&images);
        g.output_alphabet = keep.clone();
        g
    }

    pub fn identity(alphabet: &BTreeSet<Symbol>) -> Gsm {
        Gsm::projection(alphabet, alphabet)
    }

    /// Two-state gsm mapping the first letter σ to `prefix`·σ and every
    /// later letter to itself; g(w) = prefix·w for nonempty w.
    pub fn prepend(prefix: &[Symbol], alphabet: &BTreeSet<Symbol>) -> Gsm {
        let (first, rest): (State, State) = ("first".into(), "rest".into());
        let mut rules = BTreeMap::new();
        let mut output_alphabet: BTreeSet<Symbol> = alphabet.clone();
        output_alphabet.extend(prefix.iter().cloned());
        for sym in alphabet {
            let mut burst = prefix.to_vec();
            burst.push(sym.clone());
            rules.insert((first.clone(), sym.clone()), (burst, rest.clone()));
            rules.insert(
                (rest.clone(), sym.clone()),
                (vec![sym.clone()], rest.clone()),
            );
        }
        Gsm {
            states: [first.clone(), rest].into_iter().collect(),
            initial: first,
            input_alphabet: alphabet.clone(),
            output_alphabet,
            rules,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.states.contains(&self.initial) {
            return Err(Error::Precondition("gsm initial state unknown".into()));
        }
        for state in &self.states {
            for sym in &self.input_alphabet {
                match self.rules.get(&(state.clone(), sym.clone())) {
                    None => {
                        return Err(Error::Precondition(format!(
                            "gsm rule missing for ({state}, {sym})"
                        )))
                    }
                    Some((output, to)) => {
                        if !self.states.contains(to) {
                            return Err(Error::Precondition(format!(
                                "gsm rule ({state}, {sym}) targets unknown state"
                            )));
                        }
                        for out in output {
                            if !self.output_alphabet.contains(out) {
                                return Err(Error::Precondition(format!(
                                    "gsm output symbol {out:?} outside Δ"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Applies the gsm map: concatenated outputs along the unique run.
pub fn gsm_apply(s: &Gsm, word: &[Symbol]) -> Result<Word> {
    let mut state = s.initial.clone();
    let mut out = Vec::new();
    for sym in word {
        let (output, next) = s
            .rules
            .get(&(state, sym.clone()))
            .ok_or_else(|| Error::Precondition(format!("symbol {sym:?} outside gsm domain")))?;
        out.extend(output.iter().cloned());
        state = next.clone();
    }
    Ok(out)
}

fn start_name(q: &State) -> State {
    format!("S|{q}")
}
fn main_name(s: &State, q: &State) -> State {
    format!("M|{s}|{q}")
}
fn burst_name(s: &State, q: &State, rest: &[Symbol]) -> State {
    format!("B|{s}|{q}|{}", rest.join(","))
}

/// The inverse image g⁻¹(L(m)) = {w : g(w) ∈ L(m)} as a multipass
/// automaton over the gsm's input alphabet, with the same pass count.
///
/// Product construction: states pair the gsm state with the machine state;
/// reading σ fires the gsm rule and the output burst is then simulated on
/// the machine through chained ε-transitions. A bottom sentinel is pushed
/// under the machine stack on the first letter of each pass so the product
/// may fire ε-transitions while the simulated stack is empty (a sentinel
/// top stands for the machine's empty stack). The gsm resets to its initial
/// state at every pass start.
pub fn inverse_gsm(m: &MultipassAutomaton, s: &Gsm) -> Result<MultipassAutomaton> {
    inverse_gsm_filtered(m, s, None)
}

/// [`inverse_gsm`] with an additional acceptance filter on the gsm state:
/// the product accepts only when the gsm ends in one of `accept_states`
/// (all of them when `None`). Used by the coset-tracking constructions.
pub fn inverse_gsm_filtered(
    m: &MultipassAutomaton,
    s: &Gsm,
    accept_states: Option<&BTreeSet<State>>,
) -> Result<MultipassAutomaton> {
    s.validate()?;
    if !s.output_alphabet.is_subset(&m.input_alphabet) {
        return Err(Error::AlphabetMismatch(
            "gsm output alphabet must lie inside the machine's input alphabet".into(),
        ));
    }
    let det = m.is_deterministic();

    let mut bot: Symbol = "__bot".into();
    while m.stack_alphabet.contains(&bot) || s.input_alphabet.contains(&bot) {
        bot.push('_');
    }

    let mut out = MultipassAutomaton {
        passes: m.passes,
        mode: m.mode,
        states: BTreeSet::new(),
        initial: start_name(&m.initial),
        input_alphabet: s.input_alphabet.clone(),
        stack_alphabet: &(&m.stack_alphabet | &s.input_alphabet)
            | &std::iter::once(bot.clone()).collect(),
        transitions: Default::default(),
        end_nonfinal: Default::default(),
        end_final: Default::default(),
    };

    // Stack keys seen by the product: the sentinel stands for the
    // machine-empty stack.
    let prod_keys: Vec<Symbol> = m
        .stack_alphabet
        .iter()
        .cloned()
        .chain(std::iter::once(bot.clone()))
        .collect();
    let machine_key = |gamma: &Symbol| -> StackKey {
        if gamma == &bot {
            None
        } else {
            Some(gamma.clone())
        }
    };
    // Machine push translated to the product stack: popping the sentinel
    // re-pushes it under the pushed word.
    let prod_push = |gamma: &Symbol, push: &[Symbol]| -> Word {
        if gamma == &bot {
            std::iter::once(bot.clone())
                .chain(push.iter().cloned())
                .collect()
        } else {
            push.to_vec()
        }
    };

    // Burst states: one per (next gsm state, machine state, nonempty burst
    // suffix) arising from some rule.
    let mut suffixes: BTreeSet<(State, Word)> = BTreeSet::new();
    for ((_, _), (output, next)) in &s.rules {
        for i in 0..output.len() {
            suffixes.insert((next.clone(), output[i..].to_vec()));
        }
    }

    for q in &m.states {
        out.states.insert(start_name(q));
        for gs in &s.states {
            out.states.insert(main_name(gs, q));
        }
        for (gs, rest) in &suffixes {
            out.states.insert(burst_name(gs, q, rest));
        }
    }

    for pass in 1..=m.passes {
        for q in &m.states {
            // Start states: truly empty stack, gsm at its initial state.
            let start = start_name(q);
            for sigma in &s.input_alphabet {
                let (output, next) = &s.rules[&(s.initial.clone(), sigma.clone())];
                let target = if output.is_empty() {
                    (main_name(next, q), vec![bot.clone()])
                } else {
                    (burst_name(next, q, output), vec![bot.clone()])
                };
                out.transitions
                    .insert((pass, start.clone(), Some(sigma.clone()), None), vec![target]);
            }
            if pass < m.passes {
                if let Some(targets) = m.end_nonfinal.get(&(pass, q.clone(), None)) {
                    out.end_nonfinal.insert(
                        (pass, start.clone(), None),
                        targets.iter().map(start_name).collect(),
                    );
                }
            }

            for gs in &s.states {
                let main = main_name(gs, q);
                for gamma in &prod_keys {
                    let mkey = machine_key(gamma);
                    let eps = m
                        .transitions
                        .get(&(pass, q.clone(), None, mkey.clone()))
                        .cloned()
                        .unwrap_or_default();
                    // Mirror the machine's pending ε-moves eagerly.
                    if !eps.is_empty() {
                        let mapped: Vec<(State, Word)> = eps
                            .iter()
                            .map(|(to, push)| (main_name(gs, to), prod_push(gamma, push)))
                            .collect();
                        out.transitions
                            .insert((pass, main.clone(), None, Some(gamma.clone())), mapped);
                    }
                    if eps.is_empty() || !det {
                        for sigma in &s.input_alphabet {
                            let (output, next) = &s.rules[&(gs.clone(), sigma.clone())];
                            let target = if output.is_empty() {
                                (main_name(next, q), vec![gamma.clone()])
                            } else {
                                (burst_name(next, q, output), vec![gamma.clone()])
                            };
                            out.transitions
                                .entry((pass, main.clone(), Some(sigma.clone()), Some(gamma.clone())))
                                .or_default()
                                .push(target);
                        }
                        if pass < m.passes {
                            if let Some(targets) =
                                m.end_nonfinal.get(&(pass, q.clone(), mkey.clone()))
                            {
                                out.end_nonfinal.insert(
                                    (pass, main.clone(), Some(gamma.clone())),
                                    targets.iter().map(start_name).collect(),
                                );
                            }
                        }
                    }
                }
            }

            for (gs, rest) in &suffixes {
                let burst = burst_name(gs, q, rest);
                for gamma in &prod_keys {
                    let mkey = machine_key(gamma);
                    let mut targets: Vec<(State, Word)> = Vec::new();
                    if let Some(eps) = m.transitions.get(&(pass, q.clone(), None, mkey.clone())) {
                        for (to, push) in eps {
                            targets.push((burst_name(gs, to, rest), prod_push(gamma, push)));
                        }
                    }
                    let allow_letter = targets.is_empty() || !det;
                    if allow_letter {
                        let letter = &rest[0];
                        if let Some(moves) =
                            m.transitions
                                .get(&(pass, q.clone(), Some(letter.clone()), mkey.clone()))
                        {
                            for (to, push) in moves {
                                let next_state = if rest.len() == 1 {
                                    main_name(gs, to)
                                } else {
                                    burst_name(gs, to, &rest[1..])
                                };
                                targets.push((next_state, prod_push(gamma, push)));
                            }
                        }
                    }
                    if !targets.is_empty() {
                        out.transitions
                            .insert((pass, burst.clone(), None, Some(gamma.clone())), targets);
                    }
                }
            }
        }
    }

    // Final end-marker map: Start and Main states inherit the machine's
    // verdicts (with the sentinel translated back to the empty-stack key);
    // everything else is negative.
    let gsm_accepts = |gs: &State| accept_states.map_or(true, |set| set.contains(gs));
    for q in &m.states {
        if gsm_accepts(&s.initial) {
            if let Some(v) = m.end_final.get(&(q.clone(), None)) {
                out.end_final.insert((start_name(q), None), *v);
            }
        }
        for gs in &s.states {
            if !gsm_accepts(gs) {
                continue;
            }
            for gamma in &prod_keys {
                if let Some(v) = m.end_final.get(&(q.clone(), machine_key(gamma))) {
                    out.end_final
                        .insert((main_name(gs, q), Some(gamma.clone())), *v);
                }
            }
        }
    }
    let keys: Vec<StackKey> = out.stack_keys().collect();
    for state in out.states.clone() {
        for key in &keys {
            out.end_final
                .entry((state.clone(), key.clone()))
                .or_insert(FinalVerdict::Negative);
        }
    }

    let report = out.validate();
    if !report.is_valid() {
        return Err(Error::InvalidMachine(format!(
            "inverse_gsm produced an invalid machine: {:?}",
            report.errors().collect::<Vec<_>>()
        )));
    }
    Ok(out)
}

/// The interleaved product: words over ⋃Σᵢ whose projection to each Σᵢ is
/// accepted by the i-th machine. Built as ⋂ᵢ πᵢ⁻¹(Lᵢ); the shuffle product
/// when the alphabets are disjoint, plain intersection when identical.
pub fn interleaved_product(machines: &[MultipassAutomaton]) -> Result<MultipassAutomaton> {
    let Some(first) = machines.first() else {
        return Err(Error::Precondition(
            "interleaved product of zero machines".into(),
        ));
    };
    if machines.iter().any(|m| m.mode != first.mode) {
        return Err(Error::ModeMismatch(
            "interleaved product requires a uniform mode".into(),
        ));
    }
    let full: BTreeSet<Symbol> = machines
        .iter()
        .flat_map(|m| m.input_alphabet.iter().cloned())
        .collect();
    let mut acc: Option<MultipassAutomaton> = None;
    for m in machines {
        let proj = Gsm::projection(&full, &m.input_alphabet);
        let pulled = inverse_gsm(m, &proj)?;
        acc = Some(match acc {
            None => pulled,
            Some(prev) => intersection(&prev, &pulled)?,
        });
    }
    Ok(acc.unwrap())
}

/// Machine over `alphabet` accepting only the empty word.
fn only_epsilon(alphabet: &BTreeSet<Symbol>, mode: Mode) -> MultipassAutomaton {
    let mut b = MachineBuilder::new(1, mode)
        .initial("e")
        .input_symbols(alphabet.iter().cloned());
    b.end_final("e", None, FinalVerdict::Accept);
    b.totalize_final();
    b.build()
}

/// Machine over `alphabet` accepting every nonempty word.
fn nonempty(alphabet: &BTreeSet<Symbol>, mode: Mode) -> MultipassAutomaton {
    let mut b = MachineBuilder::new(1, mode)
        .initial("z")
        .input_symbols(alphabet.iter().cloned());
    // Neither state pushes, so only the empty-stack key is reachable.
    for sym in alphabet {
        b.mid(1, "z", Some(sym), None, "p", &[]);
        b.mid(1, "p", Some(sym), None, "p", &[]);
    }
    b.end_final("p", None, FinalVerdict::Accept);
    b.totalize_final();
    b.build()
}

/// Machine over `alphabet` accepting nothing.
fn empty_language(alphabet: &BTreeSet<Symbol>, mode: Mode) -> MultipassAutomaton {
    let mut b = MachineBuilder::new(1, mode)
        .initial("d")
        .input_symbols(alphabet.iter().cloned());
    b.totalize_final();
    b.build()
}

/// The left quotient K⁻¹L = {w : uw ∈ L for some u ∈ K}: the union over
/// u ∈ K of the prepend-gsm inverse images, with the empty word corrected
/// separately (g(ε) = ε, so the gsm route cannot decide ε).
pub fn left_quotient(
    m: &MultipassAutomaton,
    k_set: &[Word],
) -> Result<MultipassAutomaton> {
    if k_set.is_empty() {
        return Ok(empty_language(&m.input_alphabet, m.mode));
    }
    let mut acc: Option<MultipassAutomaton> = None;
    for u in k_set {
        for sym in u {
            if !m.input_alphabet.contains(sym) {
                return Err(Error::AlphabetMismatch(format!(
                    "quotient word symbol {sym:?} outside the machine alphabet"
                )));
            }
        }
        let g = Gsm::prepend(u, &m.input_alphabet);
        let pulled = inverse_gsm(m, &g)?;
        acc = Some(match acc {
            None => pulled,
            Some(prev) => union(&prev, &pulled)?,
        });
    }
    let mut out = acc.unwrap();

    // ε-correction: ε ∈ K⁻¹L iff some u ∈ K lies in L.
    let target = k_set
        .iter()
        .any(|u| m.run(u, DEFAULT_BUDGET).accepted());
    let current = out.run(&[], DEFAULT_BUDGET).accepted();
    if target && !current {
        out = union(&out, &only_epsilon(&m.input_alphabet, m.mode))?;
    } else if !target && current {
        out = intersection(&out, &nonempty(&m.input_alphabet, m.mode))?;
    }
    Ok(out)
}
