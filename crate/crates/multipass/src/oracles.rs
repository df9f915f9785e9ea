//! Independent brute-force ground truth for the word-problem builders:
//! normal forms, exact matrix representations, the Parikh map and
//! semilinear sets. Nothing here touches the automaton machinery, so
//! machine-vs-oracle agreement is a meaningful check.

use std::collections::{BTreeMap, BTreeSet};

use num::rational::BigRational;
use num::traits::{One, Zero};
use num::BigInt;
use serde::{Deserialize, Serialize};

use crate::machine::{Symbol, Word};
use crate::words::invert_symbol;
use crate::{Error, Result};

/// Multiplication-table description of a finite group; `generators` maps
/// alphabet symbols (inverses included) to elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteGroupTable {
    pub elements: Vec<String>,
    pub identity: String,
    pub mul: BTreeMap<(String, String), String>,
    pub generators: BTreeMap<Symbol, String>,
}

impl FiniteGroupTable {
    pub fn validate(&self) -> Result<()> {
        let set: BTreeSet<&String> = self.elements.iter().collect();
        if set.len() != self.elements.len() {
            return Err(Error::InvalidSpec("duplicate group elements".into()));
        }
        if !set.contains(&self.identity) {
            return Err(Error::InvalidSpec("identity not an element".into()));
        }
        for x in &self.elements {
            for y in &self.elements {
                let Some(z) = self.mul.get(&(x.clone(), y.clone())) else {
                    return Err(Error::InvalidSpec(format!(
                        "multiplication undefined for ({x}, {y})"
                    )));
                };
                if !set.contains(z) {
                    return Err(Error::InvalidSpec(format!(
                        "product {z} of ({x}, {y}) not an element"
                    )));
                }
            }
            if self.mul.get(&(self.identity.clone(), x.clone())) != Some(x)
                || self.mul.get(&(x.clone(), self.identity.clone())) != Some(x)
            {
                return Err(Error::InvalidSpec(format!("identity fails on {x}")));
            }
            if !self
                .elements
                .iter()
                .any(|y| self.mul.get(&(x.clone(), y.clone())) == Some(&self.identity))
            {
                return Err(Error::InvalidSpec(format!("{x} has no inverse")));
            }
        }
        // Associativity, exhaustively (desk scale).
        for x in &self.elements {
            for y in &self.elements {
                for z in &self.elements {
                    let xy = &self.mul[&(x.clone(), y.clone())];
                    let yz = &self.mul[&(y.clone(), z.clone())];
                    if self.mul[&(xy.clone(), z.clone())] != self.mul[&(x.clone(), yz.clone())] {
                        return Err(Error::InvalidSpec(format!(
                            "associativity fails at ({x}, {y}, {z})"
                        )));
                    }
                }
            }
        }
        for (sym, elt) in &self.generators {
            if !set.contains(elt) {
                return Err(Error::InvalidSpec(format!(
                    "generator {sym} maps to non-element {elt}"
                )));
            }
        }
        // Inverse generators must evaluate to inverse elements.
        for (sym, elt) in &self.generators {
            let inv_sym = invert_symbol(sym);
            if let Some(inv_elt) = self.generators.get(&inv_sym) {
                if self.mul[&(elt.clone(), inv_elt.clone())] != self.identity {
                    return Err(Error::InvalidSpec(format!(
                        "generators {sym} and {inv_sym} are not mutually inverse"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn walk(&self, word: &[Symbol]) -> Result<String> {
        let mut cur = self.identity.clone();
        for sym in word {
            let elt = self
                .generators
                .get(sym)
                .ok_or_else(|| Error::Precondition(format!("unknown generator {sym:?}")))?;
            cur = self.mul[&(cur, elt.clone())].clone();
        }
        Ok(cur)
    }

    /// ℤ/n with generator symbols `b`, `b^-1`.
    pub fn cyclic(n: usize) -> FiniteGroupTable {
        let elements: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let mut mul = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                mul.insert(
                    (elements[i].clone(), elements[j].clone()),
                    elements[(i + j) % n].clone(),
                );
            }
        }
        FiniteGroupTable {
            identity: elements[0].clone(),
            generators: [
                ("b".to_string(), elements[1 % n].clone()),
                ("b^-1".to_string(), elements[(n - 1) % n].clone()),
            ]
            .into_iter()
            .collect(),
            elements,
            mul,
        }
    }
}

/// A brute-force group oracle: evaluates words to a canonical element
/// representation, independent of the automaton constructions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Oracle {
    /// Free group: stack free-reduction.
    Free { generators: Vec<Symbol> },
    /// Free abelian group: exponent-sum vectors.
    FreeAbelian { generators: Vec<Symbol> },
    /// Finite group: table walk.
    Finite { table: FiniteGroupTable },
    /// Direct product over disjoint generator alphabets.
    Product { factors: Vec<Oracle> },
    /// HNN extension ⟨b, t; t b^d t⁻¹ = b^{s·d}⟩ of ℤ, s = ±1: Britton
    /// reduction.
    Britton { d: i64, s: i64 },
    /// BS(1,n) = ⟨b, t; t b t⁻¹ = bⁿ⟩: pinch rewriting.
    BsRewrite { n: i64 },
    /// BS(1,n²) via the exact SL(2, ℤ[1/n]) representation.
    BsMatrix { n: i64 },
    /// Infinite dihedral ⟨a, s; s² = 1, s a s = a⁻¹⟩: normal form a^k s^f.
    Dihedral,
    /// ℤ/n over b, b⁻¹: exponent sum mod n.
    Mod { n: i64 },
}

impl Oracle {
    /// Short identifier for reports.
    pub fn describe(&self) -> String {
        match self {
            Oracle::Free { generators } => format!("free({})", generators.len()),
            Oracle::FreeAbelian { generators } => {
                format!("free-abelian({})", generators.len())
            }
            Oracle::Finite { table } => format!("finite({})", table.elements.len()),
            Oracle::Product { factors } => {
                let parts: Vec<String> = factors.iter().map(|f| f.describe()).collect();
                format!("product({})", parts.join(", "))
            }
            Oracle::Britton { d, s } => format!("britton(d={d}, s={s})"),
            Oracle::BsRewrite { n } => format!("bs-rewrite({n})"),
            Oracle::BsMatrix { n } => format!("bs-matrix({n})"),
            Oracle::Dihedral => "dihedral".to_string(),
            Oracle::Mod { n } => format!("mod({n})"),
        }
    }

    pub fn alphabet(&self) -> Vec<Symbol> {
        match self {
            Oracle::Free { generators } | Oracle::FreeAbelian { generators } => generators
                .iter()
                .flat_map(|g| [g.clone(), invert_symbol(g)])
                .collect(),
            Oracle::Finite { table } => table.generators.keys().cloned().collect(),
            Oracle::Product { factors } => {
                factors.iter().flat_map(|f| f.alphabet()).collect()
            }
            Oracle::Britton { .. } | Oracle::BsRewrite { .. } | Oracle::BsMatrix { .. } => {
                ["b", "b^-1", "t", "t^-1"].map(str::to_owned).to_vec()
            }
            Oracle::Dihedral => ["a", "a^-1", "s", "s^-1"].map(str::to_owned).to_vec(),
            Oracle::Mod { .. } => ["b", "b^-1"].map(str::to_owned).to_vec(),
        }
    }

    /// Canonical representation of the evaluated element, as a display
    /// string; equal strings ⟺ equal group elements.
    pub fn evaluate(&self, word: &[Symbol]) -> Result<String> {
        match self {
            Oracle::Free { .. } => {
                check_alphabet(word, &self.alphabet())?;
                Ok(free_reduce(word).join(" "))
            }
            Oracle::FreeAbelian { generators } => {
                let v = exponent_vector(word, generators)?;
                Ok(format!("{v:?}"))
            }
            Oracle::Finite { table } => table.walk(word),
            Oracle::Product { factors } => {
                let mut parts = Vec::new();
                for f in factors {
                    let sub: BTreeSet<Symbol> = f.alphabet().into_iter().collect();
                    let proj: Word = word
                        .iter()
                        .filter(|s| sub.contains(*s))
                        .cloned()
                        .collect();
                    parts.push(f.evaluate(&proj)?);
                }
                Ok(format!("({})", parts.join(" | ")))
            }
            Oracle::Britton { d, s } => {
                let runs = britton_reduce(word, *d, *s)?;
                Ok(display_runs(&runs))
            }
            Oracle::BsRewrite { n } => {
                let runs = bs_reduce(word, *n)?;
                Ok(display_runs(&runs))
            }
            Oracle::BsMatrix { n } => {
                let m = bs_matrix_eval(word, *n)?;
                Ok(format!("{m}"))
            }
            Oracle::Dihedral => {
                let (k, flip) = dihedral_eval(word)?;
                Ok(format!("a^{k} s^{}", u8::from(flip)))
            }
            Oracle::Mod { n } => {
                check_alphabet(word, &self.alphabet())?;
                let mut sum: i64 = 0;
                for sym in word {
                    sum += if sym == "b" { 1 } else { -1 };
                }
                Ok(sum.rem_euclid(*n).to_string())
            }
        }
    }

    pub fn is_identity(&self, word: &[Symbol]) -> Result<bool> {
        match self {
            Oracle::Free { .. } => {
                check_alphabet(word, &self.alphabet())?;
                Ok(free_reduce(word).is_empty())
            }
            Oracle::FreeAbelian { generators } => {
                Ok(exponent_vector(word, generators)?.iter().all(|&x| x == 0))
            }
            Oracle::Finite { table } => Ok(table.walk(word)? == table.identity),
            Oracle::Product { factors } => {
                // Identity iff every factor projection is the identity.
                for f in factors {
                    let sub: BTreeSet<Symbol> = f.alphabet().into_iter().collect();
                    let proj: Word = word
                        .iter()
                        .filter(|s| sub.contains(*s))
                        .cloned()
                        .collect();
                    if !f.is_identity(&proj)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Oracle::Britton { d, s } => Ok(britton_reduce(word, *d, *s)?.is_empty()),
            Oracle::BsRewrite { n } => Ok(bs_reduce(word, *n)?.is_empty()),
            Oracle::BsMatrix { n } => Ok(bs_matrix_eval(word, *n)?.is_identity()),
            Oracle::Dihedral => Ok(dihedral_eval(word)? == (0, false)),
            Oracle::Mod { .. } => Ok(self.evaluate(word)? == "0"),
        }
    }
}

fn check_alphabet(word: &[Symbol], alphabet: &[Symbol]) -> Result<()> {
    for sym in word {
        if !alphabet.contains(sym) {
            return Err(Error::Precondition(format!("unknown symbol {sym:?}")));
        }
    }
    Ok(())
}

/// Free reduction by stack cancellation.
pub fn free_reduce(word: &[Symbol]) -> Word {
    let mut out: Word = Vec::new();
    for sym in word {
        if out.last().map(|top| invert_symbol(top) == *sym) == Some(true) {
            out.pop();
        } else {
            out.push(sym.clone());
        }
    }
    out
}

fn exponent_vector(word: &[Symbol], generators: &[Symbol]) -> Result<Vec<i64>> {
    let mut v = vec![0i64; generators.len()];
    'next: for sym in word {
        for (i, g) in generators.iter().enumerate() {
            if sym == g {
                v[i] += 1;
                continue 'next;
            }
            if *sym == invert_symbol(g) {
                v[i] -= 1;
                continue 'next;
            }
        }
        return Err(Error::Precondition(format!("unknown symbol {sym:?}")));
    }
    Ok(v)
}

/// Word over {b, t}± as alternating runs (generator, exponent), exponents
/// nonzero except transiently during merging.
type Runs = Vec<(char, i64)>;

fn to_runs(word: &[Symbol]) -> Result<Runs> {
    let mut runs: Runs = Vec::new();
    for sym in word {
        let (gen, delta) = match sym.as_str() {
            "b" => ('b', 1),
            "b^-1" => ('b', -1),
            "t" => ('t', 1),
            "t^-1" => ('t', -1),
            other => {
                return Err(Error::Precondition(format!(
                    "britton alphabet is b,t and inverses; got {other:?}"
                )))
            }
        };
        push_run(&mut runs, gen, delta);
    }
    Ok(runs)
}

fn push_run(runs: &mut Runs, gen: char, delta: i64) {
    if let Some((g, e)) = runs.last_mut() {
        if *g == gen {
            *e += delta;
            if *e == 0 {
                runs.pop();
                // Merging may expose two runs of the same generator.
                if runs.len() >= 2 {
                    let (g2, e2) = runs[runs.len() - 1];
                    let (g1, _) = runs[runs.len() - 2];
                    if g1 == g2 {
                        runs.pop();
                        push_run(runs, g2, e2);
                    }
                }
            }
            return;
        }
    }
    if delta != 0 {
        runs.push((gen, delta));
    }
}

fn display_runs(runs: &Runs) -> String {
    runs.iter()
        .map(|(g, e)| format!("{g}^{e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Britton reduction in ⟨b, t; t b^d t⁻¹ = b^{s·d}⟩ (s = ±1): repeatedly
/// replaces an innermost pinch t^ε b^a t^{−ε} with d | a by b^{s·a}.
/// Identity ⟺ the result is empty.
pub fn britton_reduce(word: &[Symbol], d: i64, s: i64) -> Result<Runs> {
    if d < 1 || (s != 1 && s != -1) {
        return Err(Error::Precondition("britton oracle needs d ≥ 1, s = ±1".into()));
    }
    let mut runs = to_runs(word)?;
    loop {
        let mut changed = false;
        // A pinch is t^ε … t^{-ε} with only a b-run between; with runs
        // merged, the t-runs adjacent to the b-run have the needed signs
        // whenever their exponents straddle zero.
        'scan: for i in 0..runs.len() {
            if runs[i].0 != 't' {
                continue;
            }
            // t^ε t^{-ε} is impossible in merged runs; look for
            // t^{e1} b^{a} t^{e2} with e1, e2 of opposite sign.
            if i + 2 < runs.len() && runs[i + 1].0 == 'b' && runs[i + 2].0 == 't' {
                let (e1, a, e2) = (runs[i].1, runs[i + 1].1, runs[i + 2].1);
                if e1.signum() != e2.signum() && a % d == 0 {
                    // Peel one t off each side: t^ε b^a t^{-ε} → b^{s·a}.
                    let mut next: Runs = runs[..i].to_vec();
                    push_run(&mut next, 't', e1 - e1.signum());
                    push_run(&mut next, 'b', s * a);
                    push_run(&mut next, 't', e2 + e1.signum());
                    for &(g, e) in &runs[i + 3..] {
                        push_run(&mut next, g, e);
                    }
                    runs = next;
                    changed = true;
                    break 'scan;
                }
            }
        }
        if !changed {
            return Ok(runs);
        }
    }
}

/// Pinch rewriting in BS(1,n) = ⟨b, t; t b t⁻¹ = bⁿ⟩: t b^a t⁻¹ → b^{n·a};
/// t⁻¹ b^a t → b^{a/n} when n | a. Identity ⟺ empty result.
pub fn bs_reduce(word: &[Symbol], n: i64) -> Result<Runs> {
    if n < 1 {
        return Err(Error::Precondition("bs oracle needs n ≥ 1".into()));
    }
    let mut runs = to_runs(word)?;
    loop {
        let mut changed = false;
        'scan: for i in 0..runs.len() {
            if runs[i].0 != 't' {
                continue;
            }
            if i + 2 < runs.len() && runs[i + 1].0 == 'b' && runs[i + 2].0 == 't' {
                let (e1, a, e2) = (runs[i].1, runs[i + 1].1, runs[i + 2].1);
                if e1.signum() == e2.signum() {
                    continue;
                }
                let replacement = if e1 < 0 {
                    // t⁻¹ b^a t: needs n | a.
                    if a % n != 0 {
                        continue;
                    }
                    a / n
                } else {
                    match a.checked_mul(n) {
                        Some(v) => v,
                        None => {
                            return Err(Error::Precondition(
                                "bs reduction exponent overflow".into(),
                            ))
                        }
                    }
                };
                let mut next: Runs = runs[..i].to_vec();
                push_run(&mut next, 't', e1 - e1.signum());
                push_run(&mut next, 'b', replacement);
                push_run(&mut next, 't', e2 + e1.signum());
                for &(g, e) in &runs[i + 3..] {
                    push_run(&mut next, g, e);
                }
                runs = next;
                changed = true;
                break 'scan;
            }
        }
        if !changed {
            return Ok(runs);
        }
    }
}

/// True when the reduced word contains no remaining pinch (sanity check on
/// the reducers).
pub fn is_pinch_free(runs: &Runs, d: i64) -> bool {
    for i in 0..runs.len() {
        if runs[i].0 == 't' && i + 2 < runs.len() && runs[i + 1].0 == 'b' && runs[i + 2].0 == 't'
        {
            let (e1, a, e2) = (runs[i].1, runs[i + 1].1, runs[i + 2].1);
            if e1.signum() != e2.signum() && a % d == 0 {
                return false;
            }
        }
    }
    true
}

/// An exact 2×2 rational matrix; no floating point anywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix2 {
    pub entries: [[BigRational; 2]; 2],
}

impl RationalMatrix2 {
    pub fn identity() -> Self {
        let (o, z) = (BigRational::one(), BigRational::zero());
        RationalMatrix2 {
            entries: [[o.clone(), z.clone()], [z, o]],
        }
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        let r = |x: i64| BigRational::from_integer(BigInt::from(x));
        RationalMatrix2 {
            entries: [[r(a), r(b)], [r(c), r(d)]],
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::identity();
        for i in 0..2 {
            for j in 0..2 {
                out.entries[i][j] = &self.entries[i][0] * &other.entries[0][j]
                    + &self.entries[i][1] * &other.entries[1][j];
            }
        }
        out
    }

    pub fn det(&self) -> BigRational {
        &self.entries[0][0] * &self.entries[1][1] - &self.entries[0][1] * &self.entries[1][0]
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        assert!(!det.is_zero(), "singular matrix");
        let e = &self.entries;
        RationalMatrix2 {
            entries: [
                [&e[1][1] / &det, -&e[0][1] / &det],
                [-&e[1][0] / &det, &e[0][0] / &det],
            ],
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }
}

impl std::fmt::Display for RationalMatrix2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let e = &self.entries;
        write!(
            f,
            "[{} {} / {} {}]",
            e[0][0], e[0][1], e[1][0], e[1][1]
        )
    }
}

/// The SL(2, ℤ[1/n]) representation of BS(1, n²): b ↦ (1 1 / 0 1),
/// t ↦ (n 0 / 0 1/n). Exact product over the word.
pub fn bs_matrix_eval(word: &[Symbol], n: i64) -> Result<RationalMatrix2> {
    if n < 2 {
        return Err(Error::Precondition("matrix representation needs n ≥ 2".into()));
    }
    let b = RationalMatrix2::from_i64(1, 1, 0, 1);
    let mut t = RationalMatrix2::from_i64(n, 0, 0, 1);
    t.entries[1][1] = BigRational::new(BigInt::one(), BigInt::from(n));
    let b_inv = b.inverse();
    let t_inv = t.inverse();
    let mut acc = RationalMatrix2::identity();
    for sym in word {
        let m = match sym.as_str() {
            "b" => &b,
            "b^-1" => &b_inv,
            "t" => &t,
            "t^-1" => &t_inv,
            other => {
                return Err(Error::Precondition(format!(
                    "matrix alphabet is b,t and inverses; got {other:?}"
                )))
            }
        };
        acc = acc.mul(m);
    }
    Ok(acc)
}

/// Infinite dihedral evaluation to the normal form a^k s^f.
pub fn dihedral_eval(word: &[Symbol]) -> Result<(i64, bool)> {
    let (mut k, mut flip) = (0i64, false);
    for sym in word {
        match sym.as_str() {
            "a" => k += if flip { -1 } else { 1 },
            "a^-1" => k -= if flip { -1 } else { 1 },
            "s" | "s^-1" => flip = !flip,
            other => {
                return Err(Error::Precondition(format!(
                    "dihedral alphabet is a,s and inverses; got {other:?}"
                )))
            }
        }
    }
    Ok((k, flip))
}

/// Occurrence counts per the fixed alphabet ordering.
pub fn parikh(word: &[Symbol], alphabet: &[Symbol]) -> Result<Vec<u64>> {
    let mut v = vec![0u64; alphabet.len()];
    'next: for sym in word {
        for (i, a) in alphabet.iter().enumerate() {
            if sym == a {
                v[i] += 1;
                continue 'next;
            }
        }
        return Err(Error::Precondition(format!("unknown symbol {sym:?}")));
    }
    Ok(v)
}

/// v₀ + N·v₁ + ⋯ + N·v_m in N^r.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSet {
    pub base: Vec<u64>,
    pub periods: Vec<Vec<u64>>,
}

/// Finite union of linear sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemilinearSet {
    pub components: Vec<LinearSet>,
}

impl SemilinearSet {
    pub fn dimension(&self) -> Option<usize> {
        self.components.first().map(|c| c.base.len())
    }

    pub fn validate(&self) -> Result<()> {
        let Some(r) = self.dimension() else {
            return Ok(());
        };
        for c in &self.components {
            if c.base.len() != r || c.periods.iter().any(|p| p.len() != r) {
                return Err(Error::Precondition("inconsistent dimensions".into()));
            }
        }
        Ok(())
    }

    /// Membership by bounded search: periods are nonnegative, so any
    /// contributing period has a nonzero coordinate and its coefficient is
    /// at most the largest coordinate of v. Zero periods are skipped.
    pub fn member(&self, v: &[u64]) -> Result<bool> {
        self.validate()?;
        match self.dimension() {
            None => Ok(false),
            Some(r) if r != v.len() => Err(Error::Precondition(format!(
                "dimension mismatch: set is N^{r}, vector is N^{}",
                v.len()
            ))),
            Some(_) => Ok(self.components.iter().any(|c| linear_member(c, v))),
        }
    }
}

fn linear_member(c: &LinearSet, v: &[u64]) -> bool {
    fn residual_ok(rem: &[u64], periods: &[&Vec<u64>]) -> bool {
        if rem.iter().all(|&x| x == 0) {
            return true;
        }
        let Some((p, rest)) = periods.split_first() else {
            return false;
        };
        let bound = rem.iter().max().copied().unwrap_or(0);
        'coeff: for k in 0..=bound {
            let mut next = rem.to_vec();
            for (i, &pi) in p.iter().enumerate() {
                let used = k.checked_mul(pi);
                match used {
                    Some(u) if u <= next[i] => next[i] -= u,
                    _ => break 'coeff,
                }
            }
            if residual_ok(&next, rest) {
                return true;
            }
        }
        false
    }
    let mut rem = Vec::with_capacity(v.len());
    for (i, &vi) in v.iter().enumerate() {
        if vi < c.base[i] {
            return false;
        }
        rem.push(vi - c.base[i]);
    }
    let periods: Vec<&Vec<u64>> = c
        .periods
        .iter()
        .filter(|p| p.iter().any(|&x| x > 0))
        .collect();
    residual_ok(&rem, &periods)
}

/// One block of a simple block pattern: `symbol` repeated between `min`
/// and `max` times (unbounded when `max` is `None`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternPiece {
    pub symbol: Symbol,
    pub min: u32,
    pub max: Option<u32>,
}

impl PatternPiece {
    pub fn new(symbol: &str, min: u32, max: Option<u32>) -> Self {
        PatternPiece {
            symbol: symbol.into(),
            min,
            max,
        }
    }
}

/// The §5 filter R = t⁺ b t⁻ b⁻: at least one t, exactly one b, at least
/// one t⁻¹, at least one b⁻¹.
pub fn bs_pattern() -> Vec<PatternPiece> {
    vec![
        PatternPiece::new("t", 1, None),
        PatternPiece::new("b", 1, Some(1)),
        PatternPiece::new("t^-1", 1, None),
        PatternPiece::new("b^-1", 1, None),
    ]
}

fn pattern_words(pieces: &[PatternPiece], max_len: usize) -> Vec<Word> {
    fn go(pieces: &[PatternPiece], budget: usize, prefix: &mut Word, out: &mut Vec<Word>) {
        let Some((piece, rest)) = pieces.split_first() else {
            out.push(prefix.clone());
            return;
        };
        let hi = piece.max.map(|m| m as usize).unwrap_or(budget).min(budget);
        for count in piece.min as usize..=hi {
            let before = prefix.len();
            prefix.extend(std::iter::repeat(piece.symbol.clone()).take(count));
            go(rest, budget - count, prefix, out);
            prefix.truncate(before);
        }
    }
    let mut out = Vec::new();
    let min_total: usize = pieces.iter().map(|p| p.min as usize).sum();
    if min_total <= max_len {
        go(pieces, max_len, &mut Vec::new(), &mut out);
    }
    out.retain(|w| w.len() <= max_len);
    out
}

/// {π(w) : |w| ≤ max_len, w matches the pattern (if any), membership(w)}.
pub fn parikh_image<F: Fn(&[Symbol]) -> bool>(
    membership: F,
    alphabet: &[Symbol],
    pattern: Option<&[PatternPiece]>,
    max_len: usize,
) -> Result<BTreeSet<Vec<u64>>> {
    let words: Vec<Word> = match pattern {
        Some(pieces) => pattern_words(pieces, max_len),
        None => crate::words::enumerate_words(alphabet, max_len),
    };
    let mut out = BTreeSet::new();
    for w in words {
        if membership(&w) {
            out.insert(parikh(&w, alphabet)?);
        }
    }
    Ok(out)
}
