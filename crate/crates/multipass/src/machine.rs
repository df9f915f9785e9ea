//! The multipass automaton data model and its execution semantics.
//!
//! A `k`-pass automaton reads its input word followed by the end-marker `k`
//! times. Between passes the head is reset to the beginning of the tape and
//! the stack is emptied. Acceptance is decided only by the end-marker
//! transition of the final pass.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Input and stack symbols. Multi-character names are allowed, so `a^-1` is a
/// single symbol.
pub type Symbol = String;
/// Control states, named.
pub type State = String;
/// A word is a sequence of symbols; the empty word is the empty sequence.
pub type Word = Vec<Symbol>;

/// `None` keys the empty stack (or an ε input); `Some(γ)` keys a nonempty
/// stack with top `γ`.
pub type StackKey = Option<Symbol>;
/// `None` is an ε-transition, `Some(σ)` reads the input letter `σ`.
pub type InputKey = Option<Symbol>;

/// Key of a mid-pass transition: (pass, state, input, stack top).
pub type MidKey = (u32, State, InputKey, StackKey);
/// Key of a nonfinal end-marker transition: (pass, state, stack top).
pub type EndKey = (u32, State, StackKey);

/// Verdict stored in the final end-marker map. `Negative` reads as Reject
/// for deterministic machines and NoDecision for nondeterministic ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FinalVerdict {
    Accept,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Deterministic,
    Nondeterministic,
}

/// A k-pass pushdown automaton.
///
/// Stack orientation: the top of the stack is the *right* end of the
/// sequence. A push-word `ζ` is written so that its rightmost symbol becomes
/// the new top; a transition keyed on top `γ` pops `γ` and pushes `ζ`, while
/// a transition keyed on the empty stack pushes `ζ` onto the empty stack.
///
/// End-marker semantics: ε-transitions are input-independent and may also
/// fire while the head is on the end-marker. In deterministic mode an
/// applicable ε-transition takes priority over the end-marker map; in
/// nondeterministic mode both options are explored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultipassAutomaton {
    pub passes: u32,
    pub mode: Mode,
    pub states: BTreeSet<State>,
    pub initial: State,
    pub input_alphabet: BTreeSet<Symbol>,
    pub stack_alphabet: BTreeSet<Symbol>,
    /// Mid-pass transitions. Deterministic machines have at most one target
    /// per key.
    pub transitions: BTreeMap<MidKey, Vec<(State, Word)>>,
    /// End-marker transitions on passes `1..k`.
    pub end_nonfinal: BTreeMap<EndKey, BTreeSet<State>>,
    /// End-marker verdicts on the final pass.
    pub end_final: BTreeMap<(State, StackKey), FinalVerdict>,
}

/// Execution verdict of a single run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Accept,
    Reject,
    NoDecision,
    BudgetExceeded,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Accept => "accept",
            Verdict::Reject => "reject",
            Verdict::NoDecision => "no-decision",
            Verdict::BudgetExceeded => "budget-exceeded",
        };
        f.write_str(s)
    }
}

/// A snapshot of an execution: pass number, control state, head position
/// into `w♯` (position `|w|` reads the end-marker) and full stack contents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub pass: u32,
    pub state: State,
    pub tape_position: usize,
    pub stack: Word,
}

/// Record of one execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTrace {
    pub verdict: Verdict,
    pub steps_total: u64,
    pub steps_per_pass: Vec<u64>,
    /// For nondeterministic accepts: one accepting computation, as the
    /// sequence of configurations visited.
    pub witness: Option<Vec<Configuration>>,
}

impl RunTrace {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }
}

/// Default step budget for searches and divergence-prone runs.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// One invariant violation (or warning) found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
}

/// Outcome of validation: errors make the machine invalid, warnings do not.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        !self.issues.iter().any(|i| i.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Error)
    }

    fn error(&mut self, message: String) {
        self.issues.push(Issue {
            severity: Severity::Error,
            message,
        });
    }

    fn warn(&mut self, message: String) {
        self.issues.push(Issue {
            severity: Severity::Warning,
            message,
        });
    }
}

impl MultipassAutomaton {
    pub fn is_deterministic(&self) -> bool {
        self.mode == Mode::Deterministic
    }

    fn key_name(key: &StackKey) -> &str {
        key.as_deref().unwrap_or("empty")
    }

    /// Checks every structural invariant of the model and returns the list of
    /// violations; an empty error list means the machine is valid.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let r = &mut report;

        if self.passes == 0 {
            r.error("pass count must be at least 1".into());
        }
        if !self.states.contains(&self.initial) {
            r.error(format!("initial state {:?} not in state set", self.initial));
        }
        for sym in &self.input_alphabet {
            if !self.stack_alphabet.contains(sym) {
                r.error(format!(
                    "input symbol {sym:?} missing from stack alphabet (Σ ⊆ Γ required)"
                ));
            }
        }

        for ((pass, state, input, stack), targets) in &self.transitions {
            let loc = format!(
                "δ({pass},{state},{},{})",
                input.as_deref().unwrap_or("eps"),
                Self::key_name(stack)
            );
            if *pass == 0 || *pass > self.passes {
                r.error(format!("{loc}: pass out of range 1..={}", self.passes));
            }
            if !self.states.contains(state) {
                r.error(format!("{loc}: unknown state {state:?}"));
            }
            if let Some(sym) = input {
                if !self.input_alphabet.contains(sym) {
                    r.error(format!("{loc}: input symbol not in alphabet"));
                }
            }
            if let Some(sym) = stack {
                if !self.stack_alphabet.contains(sym) {
                    r.error(format!("{loc}: stack symbol not in stack alphabet"));
                }
            }
            if input.is_none() && stack.is_none() {
                r.error(format!(
                    "{loc}: ε-transition keyed on the empty stack is forbidden"
                ));
            }
            if targets.is_empty() {
                r.warn(format!("{loc}: empty target set"));
            }
            for (to, push) in targets {
                if !self.states.contains(to) {
                    r.error(format!("{loc}: unknown target state {to:?}"));
                }
                for sym in push {
                    if !self.stack_alphabet.contains(sym) {
                        r.error(format!("{loc}: push symbol {sym:?} not in stack alphabet"));
                    }
                }
            }
            if self.is_deterministic() && targets.len() > 1 {
                r.error(format!("{loc}: deterministic machine with {} targets", targets.len()));
            }
        }

        // Determinism: ε vs letter exclusivity per (pass, state, stack key).
        if self.is_deterministic() {
            let mut eps_keys: HashSet<(u32, &State, &StackKey)> = HashSet::new();
            for ((pass, state, input, stack), _) in &self.transitions {
                if input.is_none() {
                    eps_keys.insert((*pass, state, stack));
                }
            }
            for ((pass, state, input, stack), _) in &self.transitions {
                if input.is_some() && eps_keys.contains(&(*pass, state, stack)) {
                    r.error(format!(
                        "determinism violation at ({pass},{state},{}): both ε- and letter-transitions present",
                        Self::key_name(stack)
                    ));
                }
            }
        }

        for ((pass, state, stack), targets) in &self.end_nonfinal {
            let loc = format!("δ({pass},{state},♯,{})", Self::key_name(stack));
            if *pass == 0 || *pass >= self.passes {
                r.error(format!("{loc}: nonfinal end-marker pass out of range"));
            }
            if !self.states.contains(state) {
                r.error(format!("{loc}: unknown state"));
            }
            if let Some(sym) = stack {
                if !self.stack_alphabet.contains(sym) {
                    r.error(format!("{loc}: stack symbol not in stack alphabet"));
                }
            }
            for to in targets {
                if !self.states.contains(to) {
                    r.error(format!("{loc}: unknown target state {to:?}"));
                }
            }
            if self.is_deterministic() && targets.len() > 1 {
                r.error(format!("{loc}: deterministic end-marker map with multiple targets"));
            }
        }

        for ((state, stack), _) in &self.end_final {
            if !self.states.contains(state) {
                r.error(format!("final end-marker entry for unknown state {state:?}"));
            }
            if let Some(sym) = stack {
                if !self.stack_alphabet.contains(sym) {
                    r.error(format!(
                        "final end-marker entry keyed on unknown stack symbol {sym:?}"
                    ));
                }
            }
        }

        // Final map totality over Q × (Γ ∪ {ε}).
        let mut final_missing = Vec::new();
        for state in &self.states {
            for key in self.stack_keys() {
                if !self.end_final.contains_key(&(state.clone(), key.clone())) {
                    final_missing.push((state.clone(), key));
                }
            }
        }
        for (state, key) in final_missing {
            let msg = format!(
                "final end-marker map missing entry for ({state},{})",
                Self::key_name(&key)
            );
            if self.is_deterministic() {
                r.error(msg);
            } else {
                r.warn(msg);
            }
        }

        // Partial mid-transition maps are legal but worth surfacing for
        // deterministic machines: a stuck run rejects at the end via the sink
        // convention of make_complete.
        if self.is_deterministic() {
            let mut missing = 0usize;
            for pass in 1..=self.passes {
                for state in &self.states {
                    for key in self.stack_keys() {
                        let has_eps = self.transitions.contains_key(&(
                            pass,
                            state.clone(),
                            None,
                            key.clone(),
                        ));
                        if has_eps {
                            continue;
                        }
                        for sym in &self.input_alphabet {
                            if !self.transitions.contains_key(&(
                                pass,
                                state.clone(),
                                Some(sym.clone()),
                                key.clone(),
                            )) {
                                missing += 1;
                            }
                        }
                    }
                }
            }
            if missing > 0 {
                r.warn(format!(
                    "mid-transition map is partial ({missing} missing keys); stuck runs reject"
                ));
            }
        }

        report
    }

    /// All stack keys: the empty-stack key plus every stack symbol.
    pub fn stack_keys(&self) -> impl Iterator<Item = StackKey> + '_ {
        std::iter::once(None).chain(self.stack_alphabet.iter().cloned().map(Some))
    }

    fn stack_key_of(stack: &[Symbol]) -> StackKey {
        stack.last().cloned()
    }

    fn apply_push(stack: &mut Word, key: &StackKey, push: &[Symbol]) {
        if key.is_some() {
            stack.pop();
        }
        stack.extend_from_slice(push);
    }

    fn mid(&self, pass: u32, state: &State, input: &InputKey, key: &StackKey) -> Option<&Vec<(State, Word)>> {
        self.transitions
            .get(&(pass, state.clone(), input.clone(), key.clone()))
    }

    /// Executes the machine on `word`.
    ///
    /// Deterministic machines follow their unique computation; a missing
    /// transition makes the run stuck and the word is rejected.
    /// Nondeterministic machines search the configuration graph depth-first
    /// with memoization; `Accept` carries a witness computation.
    /// `BudgetExceeded` signals that `budget` steps were spent without
    /// resolution and is never conflated with rejection.
    pub fn run(&self, word: &[Symbol], budget: u64) -> RunTrace {
        match self.mode {
            Mode::Deterministic => self.run_deterministic(word, budget),
            Mode::Nondeterministic => self.run_search(word, budget),
        }
    }

    /// Runs with the default budget.
    pub fn accepts(&self, word: &[Symbol]) -> bool {
        self.run(word, DEFAULT_BUDGET).accepted()
    }

    fn run_deterministic(&self, word: &[Symbol], budget: u64) -> RunTrace {
        let n = word.len();
        let mut steps_per_pass = vec![0u64; self.passes as usize];
        let mut steps: u64 = 0;
        let mut pass: u32 = 1;
        let mut state = self.initial.clone();
        let mut pos: usize = 0;
        let mut stack: Word = Vec::new();

        let finish = |verdict, steps, steps_per_pass| RunTrace {
            verdict,
            steps_total: steps,
            steps_per_pass,
            witness: None,
        };

        loop {
            if steps >= budget {
                return finish(Verdict::BudgetExceeded, steps, steps_per_pass);
            }
            let key = Self::stack_key_of(&stack);
            // ε-transitions are input-independent and take priority.
            if let Some(targets) = self.mid(pass, &state, &None, &key) {
                if let Some((to, push)) = targets.first() {
                    Self::apply_push(&mut stack, &key, push);
                    state = to.clone();
                    steps += 1;
                    steps_per_pass[(pass - 1) as usize] += 1;
                    continue;
                }
            }
            if pos < n {
                let sym = word[pos].clone();
                match self
                    .mid(pass, &state, &Some(sym), &key)
                    .and_then(|t| t.first())
                {
                    Some((to, push)) => {
                        let (to, push) = (to.clone(), push.clone());
                        Self::apply_push(&mut stack, &key, &push);
                        state = to;
                        pos += 1;
                        steps += 1;
                        steps_per_pass[(pass - 1) as usize] += 1;
                    }
                    // Stuck mid-pass: the machine halts and the word is
                    // rejected (sink convention).
                    None => return finish(Verdict::Reject, steps, steps_per_pass),
                }
            } else if pass < self.passes {
                match self
                    .end_nonfinal
                    .get(&(pass, state.clone(), key))
                    .and_then(|t| t.iter().next())
                {
                    Some(to) => {
                        state = to.clone();
                        steps += 1;
                        steps_per_pass[(pass - 1) as usize] += 1;
                        pass += 1;
                        pos = 0;
                        stack.clear();
                    }
                    None => return finish(Verdict::Reject, steps, steps_per_pass),
                }
            } else {
                steps += 1;
                steps_per_pass[(pass - 1) as usize] += 1;
                let verdict = match self.end_final.get(&(state, key)) {
                    Some(FinalVerdict::Accept) => Verdict::Accept,
                    _ => Verdict::Reject,
                };
                return finish(verdict, steps, steps_per_pass);
            }
        }
    }

    fn run_search(&self, word: &[Symbol], budget: u64) -> RunTrace {
        let n = word.len();
        let mut steps_per_pass = vec![0u64; self.passes as usize];
        let mut steps: u64 = 0;

        // Arena of explored configurations with back-pointers for witness
        // reconstruction.
        let mut arena: Vec<(Configuration, Option<usize>)> = Vec::new();
        let mut visited: HashMap<Configuration, ()> = HashMap::new();
        let mut work: Vec<usize> = Vec::new();

        let start = Configuration {
            pass: 1,
            state: self.initial.clone(),
            tape_position: 0,
            stack: Vec::new(),
        };
        visited.insert(start.clone(), ());
        arena.push((start, None));
        work.push(0);

        let mut exhausted = true;
        let mut accept_at: Option<usize> = None;

        'search: while let Some(idx) = work.pop() {
            let conf = arena[idx].0.clone();
            let key = Self::stack_key_of(&conf.stack);
            let pass = conf.pass;

            let push_succ = |arena: &mut Vec<(Configuration, Option<usize>)>,
                                 visited: &mut HashMap<Configuration, ()>,
                                 work: &mut Vec<usize>,
                                 succ: Configuration| {
                if !visited.contains_key(&succ) {
                    visited.insert(succ.clone(), ());
                    arena.push((succ, Some(idx)));
                    work.push(arena.len() - 1);
                }
            };

            // ε-successors (also while reading the end-marker).
            if let Some(targets) = self.mid(pass, &conf.state, &None, &key) {
                for (to, push) in targets {
                    if steps >= budget {
                        exhausted = false;
                        break 'search;
                    }
                    steps += 1;
                    steps_per_pass[(pass - 1) as usize] += 1;
                    let mut stack = conf.stack.clone();
                    Self::apply_push(&mut stack, &key, push);
                    push_succ(
                        &mut arena,
                        &mut visited,
                        &mut work,
                        Configuration {
                            pass,
                            state: to.clone(),
                            tape_position: conf.tape_position,
                            stack,
                        },
                    );
                }
            }

            if conf.tape_position < n {
                let sym = word[conf.tape_position].clone();
                if let Some(targets) = self.mid(pass, &conf.state, &Some(sym), &key) {
                    for (to, push) in targets {
                        if steps >= budget {
                            exhausted = false;
                            break 'search;
                        }
                        steps += 1;
                        steps_per_pass[(pass - 1) as usize] += 1;
                        let mut stack = conf.stack.clone();
                        Self::apply_push(&mut stack, &key, push);
                        push_succ(
                            &mut arena,
                            &mut visited,
                            &mut work,
                            Configuration {
                                pass,
                                state: to.clone(),
                                tape_position: conf.tape_position + 1,
                                stack,
                            },
                        );
                    }
                }
            } else if pass < self.passes {
                if let Some(targets) = self.end_nonfinal.get(&(pass, conf.state.clone(), key.clone())) {
                    for to in targets {
                        if steps >= budget {
                            exhausted = false;
                            break 'search;
                        }
                        steps += 1;
                        steps_per_pass[(pass - 1) as usize] += 1;
                        push_succ(
                            &mut arena,
                            &mut visited,
                            &mut work,
                            Configuration {
                                pass: pass + 1,
                                state: to.clone(),
                                tape_position: 0,
                                stack: Vec::new(),
                            },
                        );
                    }
                }
            } else {
                steps += 1;
                steps_per_pass[(pass - 1) as usize] += 1;
                if self.end_final.get(&(conf.state.clone(), key)) == Some(&FinalVerdict::Accept) {
                    accept_at = Some(idx);
                    break 'search;
                }
            }
        }

        if let Some(idx) = accept_at {
            let mut path = Vec::new();
            let mut cur = Some(idx);
            while let Some(i) = cur {
                path.push(arena[i].0.clone());
                cur = arena[i].1;
            }
            path.reverse();
            return RunTrace {
                verdict: Verdict::Accept,
                steps_total: steps,
                steps_per_pass,
                witness: Some(path),
            };
        }
        RunTrace {
            verdict: if exhausted {
                Verdict::NoDecision
            } else {
                Verdict::BudgetExceeded
            },
            steps_total: steps,
            steps_per_pass,
            witness: None,
        }
    }

    /// Checks that a witness computation is step-by-step legal against δ and
    /// ends in an accepting final end-marker transition.
    pub fn replay_witness(&self, word: &[Symbol], witness: &[Configuration]) -> bool {
        let n = word.len();
        if witness.is_empty() {
            return false;
        }
        let first = &witness[0];
        if first.pass != 1
            || first.state != self.initial
            || first.tape_position != 0
            || !first.stack.is_empty()
        {
            return false;
        }
        for pair in witness.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let key = Self::stack_key_of(&a.stack);
            let legal_mid = |input: &InputKey, next_pos: usize| -> bool {
                if b.pass != a.pass || b.tape_position != next_pos {
                    return false;
                }
                match self.mid(a.pass, &a.state, input, &key) {
                    Some(targets) => targets.iter().any(|(to, push)| {
                        let mut stack = a.stack.clone();
                        Self::apply_push(&mut stack, &key, push);
                        *to == b.state && stack == b.stack
                    }),
                    None => false,
                }
            };
            let eps_ok = legal_mid(&None, a.tape_position);
            let letter_ok = a.tape_position < n
                && legal_mid(&Some(word[a.tape_position].clone()), a.tape_position + 1);
            let pass_ok = a.tape_position == n
                && a.pass < self.passes
                && b.pass == a.pass + 1
                && b.tape_position == 0
                && b.stack.is_empty()
                && self
                    .end_nonfinal
                    .get(&(a.pass, a.state.clone(), key.clone()))
                    .is_some_and(|t| t.contains(&b.state));
            if !(eps_ok || letter_ok || pass_ok) {
                return false;
            }
        }
        let last = witness.last().unwrap();
        last.pass == self.passes
            && last.tape_position == n
            && self
                .end_final
                .get(&(last.state.clone(), Self::stack_key_of(&last.stack)))
                == Some(&FinalVerdict::Accept)
    }
}

/// Convenience constructor used by the closure and group builders.
#[derive(Debug, Default)]
pub struct MachineBuilder {
    passes: u32,
    mode: Option<Mode>,
    states: BTreeSet<State>,
    initial: Option<State>,
    input_alphabet: BTreeSet<Symbol>,
    stack_alphabet: BTreeSet<Symbol>,
    transitions: BTreeMap<MidKey, Vec<(State, Word)>>,
    end_nonfinal: BTreeMap<EndKey, BTreeSet<State>>,
    end_final: BTreeMap<(State, StackKey), FinalVerdict>,
}

impl MachineBuilder {
    pub fn new(passes: u32, mode: Mode) -> Self {
        MachineBuilder {
            passes,
            mode: Some(mode),
            ..Default::default()
        }
    }

    pub fn initial(mut self, state: impl Into<State>) -> Self {
        let state = state.into();
        self.states.insert(state.clone());
        self.initial = Some(state);
        self
    }

    pub fn input_symbols<I: IntoIterator<Item = S>, S: Into<Symbol>>(mut self, syms: I) -> Self {
        for s in syms {
            let s = s.into();
            self.input_alphabet.insert(s.clone());
            self.stack_alphabet.insert(s);
        }
        self
    }

    pub fn stack_symbols<I: IntoIterator<Item = S>, S: Into<Symbol>>(mut self, syms: I) -> Self {
        for s in syms {
            self.stack_alphabet.insert(s.into());
        }
        self
    }

    pub fn state(&mut self, state: impl Into<State>) -> &mut Self {
        self.states.insert(state.into());
        self
    }

    pub fn mid(
        &mut self,
        pass: u32,
        from: impl Into<State>,
        input: Option<&str>,
        stack: Option<&str>,
        to: impl Into<State>,
        push: &[&str],
    ) -> &mut Self {
        let from = from.into();
        let to = to.into();
        self.states.insert(from.clone());
        self.states.insert(to.clone());
        let key = (
            pass,
            from,
            input.map(str::to_owned),
            stack.map(str::to_owned),
        );
        let target = (to, push.iter().map(|s| s.to_string()).collect());
        let entry = self.transitions.entry(key).or_default();
        if !entry.contains(&target) {
            entry.push(target);
        }
        self
    }

    pub fn end_nonfinal(
        &mut self,
        pass: u32,
        from: impl Into<State>,
        stack: Option<&str>,
        to: impl Into<State>,
    ) -> &mut Self {
        let from = from.into();
        let to = to.into();
        self.states.insert(from.clone());
        self.states.insert(to.clone());
        self.end_nonfinal
            .entry((pass, from, stack.map(str::to_owned)))
            .or_default()
            .insert(to);
        self
    }

    pub fn end_final(
        &mut self,
        state: impl Into<State>,
        stack: Option<&str>,
        verdict: FinalVerdict,
    ) -> &mut Self {
        let state = state.into();
        self.states.insert(state.clone());
        self.end_final
            .insert((state, stack.map(str::to_owned)), verdict);
        self
    }

    /// Fills every missing final end-marker entry with `Negative`.
    pub fn totalize_final(&mut self) -> &mut Self {
        let states: Vec<State> = self.states.iter().cloned().collect();
        let keys: Vec<StackKey> = std::iter::once(None)
            .chain(self.stack_alphabet.iter().cloned().map(Some))
            .collect();
        for state in states {
            for key in &keys {
                self.end_final
                    .entry((state.clone(), key.clone()))
                    .or_insert(FinalVerdict::Negative);
            }
        }
        self
    }

    pub fn build(self) -> MultipassAutomaton {
        MultipassAutomaton {
            passes: self.passes,
            mode: self.mode.expect("mode set"),
            initial: self.initial.expect("initial state set"),
            states: self.states,
            input_alphabet: self.input_alphabet,
            stack_alphabet: self.stack_alphabet,
            transitions: self.transitions,
            end_nonfinal: self.end_nonfinal,
            end_final: self.end_final,
        }
    }
}
