//! Word-problem automaton builders for group families: free, free abelian,
//! finite, direct products, finite extensions, finite quotients, HNN
//! extensions, mapping tori, and doubles.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::analysis::ensure_complete;
use crate::closures::{intersection, union};
use crate::gsm::{inverse_gsm, inverse_gsm_filtered, left_quotient, Gsm};
use crate::machine::{
    FinalVerdict, MachineBuilder, Mode, MultipassAutomaton, Symbol, Word,
};
use crate::oracles::{FiniteGroupTable, Oracle};
use crate::words::{invert_symbol, invert_word};
use crate::{Error, Result};

/// Cap on the length of precomputed φ^m(x) substitution words.
const PHI_WORD_CAP: usize = 10_000;

/// One entry of a coset table: c_i · x = u_{i,x} · c_{j(i,x)} with the
/// rewrite word over the subgroup generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetRule {
    pub coset: usize,
    pub symbol: Symbol,
    pub to: usize,
    pub word: Word,
}

/// Declarative description of a group word problem; both a machine
/// ([`build_wp`]) and — for the basic families — an oracle are derived
/// from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum GroupSpec {
    Free {
        generators: Vec<Symbol>,
    },
    FreeAbelian {
        generators: Vec<Symbol>,
    },
    Finite {
        table: FiniteGroupTable,
    },
    DirectProduct {
        left: Box<GroupSpec>,
        right: Box<GroupSpec>,
    },
    /// G with subgroup H of finite index; cosets are numbered 1..=count
    /// with coset 1 trivial.
    FiniteExtension {
        subgroup: Box<GroupSpec>,
        generators: Vec<Symbol>,
        coset_count: usize,
        rules: Vec<CosetRule>,
    },
    /// G/N for a finite normal-subgroup word set at desk scale.
    FiniteQuotient {
        base: Box<GroupSpec>,
        normal_subgroup_words: Vec<Word>,
    },
    /// ⟨G, t; t s t⁻¹ = φ(s), s ∈ S⟩ described through the finite quotient
    /// K = G/C: ψ: G → K, the induced automorphism φ̄ of K, and J = ψ(S).
    Hnn {
        base: Box<GroupSpec>,
        stable_letter: Symbol,
        phi: BTreeMap<Symbol, Word>,
        phi_order: u32,
        k_table: FiniteGroupTable,
        psi: BTreeMap<Symbol, String>,
        phi_bar: BTreeMap<String, String>,
        j_set: BTreeSet<String>,
    },
    /// Sugar for Hnn with S = G and trivial K.
    MappingTorus {
        base: Box<GroupSpec>,
        stable_letter: Symbol,
        phi: BTreeMap<Symbol, Word>,
        phi_order: u32,
    },
    /// Twisted double of the base along S, embedded in the HNN extension
    /// via g ↦ g, ḡ ↦ t g⁻¹ t⁻¹.
    Double {
        base: Box<GroupSpec>,
        stable_letter: Symbol,
        phi: BTreeMap<Symbol, Word>,
        phi_order: u32,
        k_table: FiniteGroupTable,
        psi: BTreeMap<Symbol, String>,
        phi_bar: BTreeMap<String, String>,
        j_set: BTreeSet<String>,
    },
}

impl GroupSpec {
    pub fn free(rank: usize) -> GroupSpec {
        let names = "abcdefghijklmnopqrstuvwxyz";
        GroupSpec::Free {
            generators: names
                .chars()
                .take(rank)
                .map(|c| c.to_string())
                .collect(),
        }
    }

    pub fn free_abelian(generators: &[&str]) -> GroupSpec {
        GroupSpec::FreeAbelian {
            generators: generators.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// The Klein-bottle group ⟨b, t; t b t⁻¹ = b⁻¹⟩ as the mapping torus
    /// of the inversion of ℤ.
    pub fn klein_bottle() -> GroupSpec {
        GroupSpec::MappingTorus {
            base: Box::new(GroupSpec::free_abelian(&["b"])),
            stable_letter: "t".into(),
            phi: [("b".to_string(), vec!["b^-1".to_string()])]
                .into_iter()
                .collect(),
            phi_order: 2,
        }
    }

    /// ⟨b, t; t b² t⁻¹ = b²⟩: HNN extension of ℤ with associated subgroup
    /// S = 2ℤ, described through K = ℤ/2, ψ(b) = 1̄, J = {0̄}.
    pub fn hnn_z_index2() -> GroupSpec {
        GroupSpec::Hnn {
            base: Box::new(GroupSpec::free_abelian(&["b"])),
            stable_letter: "t".into(),
            phi: [("b".to_string(), vec!["b".to_string()])]
                .into_iter()
                .collect(),
            phi_order: 1,
            k_table: FiniteGroupTable::cyclic(2),
            psi: [("b".to_string(), "1".to_string())].into_iter().collect(),
            phi_bar: [("0".to_string(), "0".to_string()), ("1".to_string(), "1".to_string())]
                .into_iter()
                .collect(),
            j_set: std::iter::once("0".to_string()).collect(),
        }
    }

    /// The infinite dihedral group ⟨a, s; s² = 1, s a s = a⁻¹⟩ as an
    /// index-2 extension of ℤ = ⟨a⟩, with coset representatives {1, s}.
    pub fn infinite_dihedral() -> GroupSpec {
        let w = |s: &[&str]| s.iter().map(|x| x.to_string()).collect::<Word>();
        let rules = vec![
            CosetRule { coset: 1, symbol: "a".into(), to: 1, word: w(&["a"]) },
            CosetRule { coset: 1, symbol: "a^-1".into(), to: 1, word: w(&["a^-1"]) },
            CosetRule { coset: 1, symbol: "s".into(), to: 2, word: w(&[]) },
            CosetRule { coset: 1, symbol: "s^-1".into(), to: 2, word: w(&[]) },
            CosetRule { coset: 2, symbol: "a".into(), to: 2, word: w(&["a^-1"]) },
            CosetRule { coset: 2, symbol: "a^-1".into(), to: 2, word: w(&["a"]) },
            CosetRule { coset: 2, symbol: "s".into(), to: 1, word: w(&[]) },
            CosetRule { coset: 2, symbol: "s^-1".into(), to: 1, word: w(&[]) },
        ];
        GroupSpec::FiniteExtension {
            subgroup: Box::new(GroupSpec::free_abelian(&["a"])),
            generators: vec!["a".into(), "s".into()],
            coset_count: 2,
            rules,
        }
    }

    /// ℤ/3 as a finite quotient of ℤ = ⟨b⟩ by a desk-scale stand-in for
    /// 3ℤ: enough b³ᵏ-words to cover every exponent reachable at the
    /// enumeration length.
    pub fn z_mod3_quotient() -> GroupSpec {
        let pow = |sym: &str, n: usize| vec![sym.to_string(); n];
        GroupSpec::FiniteQuotient {
            base: Box::new(GroupSpec::free_abelian(&["b"])),
            normal_subgroup_words: vec![
                pow("b", 3),
                pow("b^-1", 3),
                pow("b", 6),
                pow("b^-1", 6),
            ],
        }
    }

    /// Twisted double of ℤ along itself via inversion; embeds in the
    /// Klein-bottle group.
    pub fn double_of_z() -> GroupSpec {
        GroupSpec::Double {
            base: Box::new(GroupSpec::free_abelian(&["b"])),
            stable_letter: "t".into(),
            phi: [("b".to_string(), vec!["b^-1".to_string()])]
                .into_iter()
                .collect(),
            phi_order: 2,
            k_table: FiniteGroupTable::cyclic(1),
            psi: [("b".to_string(), "0".to_string())].into_iter().collect(),
            phi_bar: std::iter::once(("0".to_string(), "0".to_string())).collect(),
            j_set: std::iter::once("0".to_string()).collect(),
        }
    }

    /// Base generator names, without inverses.
    pub fn generators(&self) -> Vec<Symbol> {
        match self {
            GroupSpec::Free { generators } | GroupSpec::FreeAbelian { generators } => {
                generators.clone()
            }
            GroupSpec::Finite { table } => table
                .generators
                .keys()
                .filter(|s| !s.ends_with("^-1"))
                .cloned()
                .collect(),
            GroupSpec::DirectProduct { left, right } => {
                let mut g = left.generators();
                g.extend(right.generators());
                g
            }
            GroupSpec::FiniteExtension { generators, .. } => generators.clone(),
            GroupSpec::FiniteQuotient { base, .. } => base.generators(),
            GroupSpec::Hnn {
                base, stable_letter, ..
            }
            | GroupSpec::MappingTorus {
                base, stable_letter, ..
            } => {
                let mut g = base.generators();
                g.push(stable_letter.clone());
                g
            }
            GroupSpec::Double { base, .. } => {
                let mut g = base.generators();
                let barred: Vec<Symbol> = g.iter().map(|x| format!("{x}_bar")).collect();
                g.extend(barred);
                g
            }
        }
    }

    /// The full input alphabet: generators and their formal inverses.
    pub fn alphabet(&self) -> Vec<Symbol> {
        self.generators()
            .iter()
            .flat_map(|g| [g.clone(), invert_symbol(g)])
            .collect()
    }

    /// An independent oracle for the basic families, when one is
    /// derivable from the spec alone.
    pub fn oracle(&self) -> Option<Oracle> {
        match self {
            GroupSpec::Free { generators } => Some(Oracle::Free {
                generators: generators.clone(),
            }),
            GroupSpec::FreeAbelian { generators } => Some(Oracle::FreeAbelian {
                generators: generators.clone(),
            }),
            GroupSpec::Finite { table } => Some(Oracle::Finite {
                table: table.clone(),
            }),
            GroupSpec::DirectProduct { left, right } => Some(Oracle::Product {
                factors: vec![left.oracle()?, right.oracle()?],
            }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GroupSpec::Free { generators } | GroupSpec::FreeAbelian { generators } => {
                validate_generator_names(generators)
            }
            GroupSpec::Finite { table } => {
                table.validate()?;
                for sym in table.generators.keys() {
                    if !table.generators.contains_key(&invert_symbol(sym)) {
                        return Err(Error::InvalidSpec(format!(
                            "finite group generator {sym} lacks its inverse symbol"
                        )));
                    }
                }
                Ok(())
            }
            GroupSpec::DirectProduct { left, right } => {
                left.validate()?;
                right.validate()?;
                let la: BTreeSet<Symbol> = left.alphabet().into_iter().collect();
                let ra: BTreeSet<Symbol> = right.alphabet().into_iter().collect();
                if la.intersection(&ra).next().is_some() {
                    return Err(Error::InvalidSpec(
                        "direct product factors must use disjoint alphabets".into(),
                    ));
                }
                Ok(())
            }
            GroupSpec::FiniteExtension {
                subgroup,
                generators,
                coset_count,
                rules,
            } => {
                subgroup.validate()?;
                validate_generator_names(generators)?;
                if *coset_count == 0 {
                    return Err(Error::InvalidSpec("coset count must be positive".into()));
                }
                let sub_alpha: BTreeSet<Symbol> = subgroup.alphabet().into_iter().collect();
                let mut table: BTreeMap<(usize, Symbol), (usize, Word)> = BTreeMap::new();
                for r in rules {
                    if r.coset == 0 || r.coset > *coset_count || r.to == 0 || r.to > *coset_count
                    {
                        return Err(Error::InvalidSpec(format!(
                            "coset rule ({}, {}) out of range",
                            r.coset, r.symbol
                        )));
                    }
                    for sym in &r.word {
                        if !sub_alpha.contains(sym) {
                            return Err(Error::InvalidSpec(format!(
                                "rewrite word symbol {sym:?} outside the subgroup alphabet"
                            )));
                        }
                    }
                    if table
                        .insert((r.coset, r.symbol.clone()), (r.to, r.word.clone()))
                        .is_some()
                    {
                        return Err(Error::InvalidSpec(format!(
                            "duplicate coset rule ({}, {})",
                            r.coset, r.symbol
                        )));
                    }
                }
                let alphabet: Vec<Symbol> = generators
                    .iter()
                    .flat_map(|g| [g.clone(), invert_symbol(g)])
                    .collect();
                for i in 1..=*coset_count {
                    for x in &alphabet {
                        let Some((j, _)) = table.get(&(i, x.clone())) else {
                            return Err(Error::InvalidSpec(format!(
                                "coset rule missing for ({i}, {x})"
                            )));
                        };
                        // The step table must be consistent with inverses:
                        // j(j(i,x), x⁻¹) = i.
                        let back = table.get(&(*j, invert_symbol(x)));
                        if back.map(|(k, _)| *k) != Some(i) {
                            return Err(Error::InvalidSpec(format!(
                                "coset action of {x} at {i} is not invertible"
                            )));
                        }
                    }
                }
                Ok(())
            }
            GroupSpec::FiniteQuotient {
                base,
                normal_subgroup_words,
            } => {
                base.validate()?;
                let alpha: BTreeSet<Symbol> = base.alphabet().into_iter().collect();
                for w in normal_subgroup_words {
                    for sym in w {
                        if !alpha.contains(sym) {
                            return Err(Error::InvalidSpec(format!(
                                "normal subgroup word symbol {sym:?} outside the base alphabet"
                            )));
                        }
                    }
                }
                Ok(())
            }
            GroupSpec::MappingTorus { .. } => self.clone().into_hnn()?.validate(),
            GroupSpec::Double { .. } => self.clone().into_hnn()?.validate(),
            GroupSpec::Hnn {
                base,
                stable_letter,
                phi,
                phi_order,
                k_table,
                psi,
                phi_bar,
                j_set,
            } => {
                base.validate()?;
                k_table.validate()?;
                if *phi_order == 0 {
                    return Err(Error::InvalidSpec("phi order must be positive".into()));
                }
                let base_alpha: BTreeSet<Symbol> = base.alphabet().into_iter().collect();
                if base_alpha.contains(stable_letter)
                    || base_alpha.contains(&invert_symbol(stable_letter))
                {
                    return Err(Error::InvalidSpec(
                        "stable letter collides with the base alphabet".into(),
                    ));
                }
                for x in base.generators() {
                    let Some(image) = phi.get(&x) else {
                        return Err(Error::InvalidSpec(format!("phi missing on generator {x}")));
                    };
                    for sym in image {
                        if !base_alpha.contains(sym) {
                            return Err(Error::InvalidSpec(format!(
                                "phi({x}) uses symbol {sym:?} outside the base alphabet"
                            )));
                        }
                    }
                    if !psi.contains_key(&x) {
                        return Err(Error::InvalidSpec(format!("psi missing on generator {x}")));
                    }
                }
                let k = KOps::new(k_table)?;
                for elt in psi.values() {
                    k.check(elt)?;
                }
                // J must be a subgroup of K.
                if !j_set.contains(&k.identity) {
                    return Err(Error::InvalidSpec("J does not contain the identity".into()));
                }
                for a in j_set {
                    k.check(a)?;
                    if !j_set.contains(&k.inverse(a)?) {
                        return Err(Error::InvalidSpec("J not closed under inverses".into()));
                    }
                    for b in j_set {
                        if !j_set.contains(&k.mul(a, b)?) {
                            return Err(Error::InvalidSpec("J not closed under products".into()));
                        }
                    }
                }
                // φ̄ must be an automorphism of K fixing J setwise with
                // φ̄^p = id.
                let elems: BTreeSet<&String> = k_table.elements.iter().collect();
                let mut image: BTreeSet<&String> = BTreeSet::new();
                for e in &k_table.elements {
                    let Some(f) = phi_bar.get(e) else {
                        return Err(Error::InvalidSpec(format!("phi_bar missing on {e}")));
                    };
                    k.check(f)?;
                    image.insert(f);
                }
                if image != elems {
                    return Err(Error::InvalidSpec("phi_bar is not a bijection".into()));
                }
                for a in &k_table.elements {
                    for b in &k_table.elements {
                        let lhs = &phi_bar[&k.mul(a, b)?];
                        let rhs = k.mul(&phi_bar[a], &phi_bar[b])?;
                        if *lhs != rhs {
                            return Err(Error::InvalidSpec(
                                "phi_bar is not a homomorphism".into(),
                            ));
                        }
                    }
                }
                let bar_j: BTreeSet<String> =
                    j_set.iter().map(|a| phi_bar[a].clone()).collect();
                if bar_j != *j_set {
                    return Err(Error::InvalidSpec("phi_bar does not fix J setwise".into()));
                }
                for e in &k_table.elements {
                    let mut cur = e.clone();
                    for _ in 0..*phi_order {
                        cur = phi_bar[&cur].clone();
                    }
                    if cur != *e {
                        return Err(Error::InvalidSpec(format!(
                            "phi_bar^{phi_order} is not the identity (moves {e})"
                        )));
                    }
                }
                // ψ(φ(x)) = φ̄(ψ(x)) on generators.
                for x in base.generators() {
                    let lhs = psi_of_word(&k, psi, &phi[&x])?;
                    let rhs = phi_bar[&psi[&x]].clone();
                    if lhs != rhs {
                        return Err(Error::InvalidSpec(format!(
                            "psi(phi({x})) ≠ phi_bar(psi({x}))"
                        )));
                    }
                }
                // φ^p(x) = x in the base group, checked through the base
                // oracle when one is derivable.
                if let Some(oracle) = base.oracle() {
                    for x in base.generators() {
                        let image = phi_power(phi, &x, *phi_order)?;
                        let mut probe = image;
                        probe.extend(invert_word(&[x.clone()]));
                        if !oracle.is_identity(&probe).map_err(|e| {
                            Error::InvalidSpec(format!("phi power check failed: {e}"))
                        })? {
                            return Err(Error::InvalidSpec(format!(
                                "phi^{phi_order}({x}) ≠ {x} in the base group"
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Desugars MappingTorus and Double into the underlying Hnn spec.
    fn into_hnn(self) -> Result<GroupSpec> {
        match self {
            GroupSpec::MappingTorus {
                base,
                stable_letter,
                phi,
                phi_order,
            } => {
                let k_table = FiniteGroupTable::cyclic(1);
                let id = k_table.identity.clone();
                let psi = base
                    .generators()
                    .into_iter()
                    .map(|x| (x, id.clone()))
                    .collect();
                Ok(GroupSpec::Hnn {
                    base,
                    stable_letter,
                    phi,
                    phi_order,
                    psi,
                    phi_bar: std::iter::once((id.clone(), id.clone())).collect(),
                    j_set: std::iter::once(id).collect(),
                    k_table,
                })
            }
            GroupSpec::Double {
                base,
                stable_letter,
                phi,
                phi_order,
                k_table,
                psi,
                phi_bar,
                j_set,
            } => Ok(GroupSpec::Hnn {
                base,
                stable_letter,
                phi,
                phi_order,
                k_table,
                psi,
                phi_bar,
                j_set,
            }),
            other => Ok(other),
        }
    }
}

fn validate_generator_names(generators: &[Symbol]) -> Result<()> {
    if generators.is_empty() {
        return Err(Error::InvalidSpec("at least one generator required".into()));
    }
    let mut seen = BTreeSet::new();
    for g in generators {
        if g.is_empty() || g.ends_with("^-1") {
            return Err(Error::InvalidSpec(format!("bad generator name {g:?}")));
        }
        if !seen.insert(g.clone()) {
            return Err(Error::InvalidSpec(format!("duplicate generator {g:?}")));
        }
    }
    for g in generators {
        if seen.contains(&invert_symbol(g)) {
            return Err(Error::InvalidSpec(format!(
                "generator {g:?} collides with an inverse name"
            )));
        }
    }
    Ok(())
}

/// Finite-group arithmetic helpers over a table.
struct KOps<'a> {
    table: &'a FiniteGroupTable,
    identity: String,
}

impl<'a> KOps<'a> {
    fn new(table: &'a FiniteGroupTable) -> Result<KOps<'a>> {
        Ok(KOps {
            identity: table.identity.clone(),
            table,
        })
    }

    fn check(&self, e: &str) -> Result<()> {
        if self.table.elements.iter().any(|x| x == e) {
            Ok(())
        } else {
            Err(Error::InvalidSpec(format!("{e:?} is not a K element")))
        }
    }

    fn mul(&self, a: &str, b: &str) -> Result<String> {
        self.table
            .mul
            .get(&(a.to_string(), b.to_string()))
            .cloned()
            .ok_or_else(|| Error::InvalidSpec(format!("K product undefined for ({a}, {b})")))
    }

    fn inverse(&self, a: &str) -> Result<String> {
        for b in &self.table.elements {
            if self.mul(a, b)? == self.identity {
                return Ok(b.clone());
            }
        }
        Err(Error::InvalidSpec(format!("{a} has no inverse in K")))
    }
}

/// ψ extended to words over the base alphabet (inverse letters map to
/// inverse elements).
fn psi_of_word(k: &KOps, psi: &BTreeMap<Symbol, String>, word: &[Symbol]) -> Result<String> {
    let mut acc = k.identity.clone();
    for sym in word {
        let elt = match psi.get(sym) {
            Some(e) => e.clone(),
            None => {
                let base = invert_symbol(sym);
                let e = psi.get(&base).ok_or_else(|| {
                    Error::InvalidSpec(format!("psi undefined on {sym:?}"))
                })?;
                k.inverse(e)?
            }
        };
        acc = k.mul(&acc, &elt)?;
    }
    Ok(acc)
}

/// φ applied to a single letter (inverse letters by formal inversion of
/// the generator image).
fn phi_letter(phi: &BTreeMap<Symbol, Word>, sym: &Symbol) -> Result<Word> {
    if let Some(w) = phi.get(sym) {
        return Ok(w.clone());
    }
    let base = invert_symbol(sym);
    match phi.get(&base) {
        Some(w) => Ok(invert_word(w)),
        None => Err(Error::InvalidSpec(format!("phi undefined on {sym:?}"))),
    }
}

/// φ^m(x), freely reduced, with a length cap against pathological φ.
fn phi_power(phi: &BTreeMap<Symbol, Word>, x: &Symbol, m: u32) -> Result<Word> {
    let mut word = vec![x.clone()];
    for _ in 0..m {
        let mut next = Vec::new();
        for sym in &word {
            next.extend(phi_letter(phi, sym)?);
        }
        word = crate::oracles::free_reduce(&next);
        if word.len() > PHI_WORD_CAP {
            return Err(Error::InvalidSpec(format!(
                "phi iterate of {x} exceeds {PHI_WORD_CAP} symbols"
            )));
        }
    }
    Ok(word)
}

/// Builds the word-problem automaton for the spec; deterministic (and
/// complete) wherever the construction permits.
pub fn build_wp(spec: &GroupSpec) -> Result<MultipassAutomaton> {
    spec.validate()?;
    let m = match spec {
        GroupSpec::Free { generators } => build_free(generators),
        GroupSpec::FreeAbelian { generators } => build_free_abelian(generators),
        GroupSpec::Finite { table } => build_finite(table),
        GroupSpec::DirectProduct { left, right } => {
            let lm = build_wp(left)?;
            let rm = build_wp(right)?;
            crate::gsm::interleaved_product(&[lm, rm])?
        }
        GroupSpec::FiniteExtension {
            subgroup,
            generators,
            coset_count,
            rules,
        } => build_finite_extension(subgroup, generators, *coset_count, rules)?,
        GroupSpec::FiniteQuotient {
            base,
            normal_subgroup_words,
        } => {
            let base_machine = build_wp(base)?;
            let k_set: Vec<Word> = normal_subgroup_words.iter().map(|w| invert_word(w)).collect();
            union(&left_quotient(&base_machine, &k_set)?, &base_machine)?
        }
        GroupSpec::Hnn { .. } => build_hnn(spec)?,
        GroupSpec::MappingTorus { .. } => build_hnn(&spec.clone().into_hnn()?)?,
        GroupSpec::Double { .. } => {
            let hnn_spec = spec.clone().into_hnn()?;
            let hnn_machine = build_hnn(&hnn_spec)?;
            let GroupSpec::Double {
                base, stable_letter, ..
            } = spec
            else {
                unreachable!()
            };
            let mut images: BTreeMap<Symbol, Word> = BTreeMap::new();
            for x in base.generators() {
                images.insert(x.clone(), vec![x.clone()]);
                images.insert(
                    format!("{x}_bar"),
                    vec![
                        stable_letter.clone(),
                        invert_symbol(&x),
                        invert_symbol(stable_letter),
                    ],
                );
            }
            wp_pullback(&hnn_machine, &images)?
        }
    };
    if m.is_deterministic() {
        ensure_complete(&m)
    } else {
        Ok(m)
    }
}

/// Free group: the stack performs free reduction; accept at ♯ iff empty.
fn build_free(generators: &[Symbol]) -> MultipassAutomaton {
    let alphabet: Vec<Symbol> = generators
        .iter()
        .flat_map(|g| [g.clone(), invert_symbol(g)])
        .collect();
    let mut b = MachineBuilder::new(1, Mode::Deterministic)
        .initial("q")
        .input_symbols(alphabet.iter().cloned());
    for x in &alphabet {
        b.mid(1, "q", Some(x), None, "q", &[x]);
        for gamma in &alphabet {
            if *gamma == invert_symbol(x) {
                b.mid(1, "q", Some(x), Some(gamma), "q", &[]);
            } else {
                b.mid(1, "q", Some(x), Some(gamma), "q", &[gamma, x]);
            }
        }
    }
    b.end_final("q", None, FinalVerdict::Accept);
    b.totalize_final();
    b.build()
}

/// Free abelian group of rank r: pass j tracks the exponent sum of the
/// j-th generator on the stack as a signed unary counter.
fn build_free_abelian(generators: &[Symbol]) -> MultipassAutomaton {
    let alphabet: Vec<Symbol> = generators
        .iter()
        .flat_map(|g| [g.clone(), invert_symbol(g)])
        .collect();
    let (pos, neg) = ("__pos", "__neg");
    let mut b = MachineBuilder::new(generators.len() as u32, Mode::Deterministic)
        .initial("q")
        .input_symbols(alphabet.iter().cloned())
        .stack_symbols([pos, neg]);
    for (idx, g) in generators.iter().enumerate() {
        let pass = idx as u32 + 1;
        let ginv = invert_symbol(g);
        for x in &alphabet {
            if x == g {
                b.mid(pass, "q", Some(x), None, "q", &[pos]);
                b.mid(pass, "q", Some(x), Some(pos), "q", &[pos, pos]);
                b.mid(pass, "q", Some(x), Some(neg), "q", &[]);
            } else if *x == ginv {
                b.mid(pass, "q", Some(x), None, "q", &[neg]);
                b.mid(pass, "q", Some(x), Some(neg), "q", &[neg, neg]);
                b.mid(pass, "q", Some(x), Some(pos), "q", &[]);
            } else {
                b.mid(pass, "q", Some(x), None, "q", &[]);
                b.mid(pass, "q", Some(x), Some(pos), "q", &[pos]);
                b.mid(pass, "q", Some(x), Some(neg), "q", &[neg]);
            }
        }
        if pass < generators.len() as u32 {
            // A nonzero counter at ♯ means rejection; completion routes
            // the missing nonempty-stack cases to a sink.
            b.end_nonfinal(pass, "q", None, "q");
        }
    }
    b.end_final("q", None, FinalVerdict::Accept);
    b.totalize_final();
    b.build()
}

/// Finite group: stackless table walk; accept iff identity at ♯.
fn build_finite(table: &FiniteGroupTable) -> MultipassAutomaton {
    let alphabet: Vec<Symbol> = table.generators.keys().cloned().collect();
    let mut b = MachineBuilder::new(1, Mode::Deterministic)
        .initial(table.identity.clone())
        .input_symbols(alphabet.iter().cloned());
    for elt in &table.elements {
        b.state(elt.clone());
        for (sym, gen_elt) in &table.generators {
            let target = table.mul[&(elt.clone(), gen_elt.clone())].clone();
            b.mid(1, elt.clone(), Some(sym), None, target, &[]);
        }
    }
    b.end_final(table.identity.clone(), None, FinalVerdict::Accept);
    b.totalize_final();
    b.build()
}

/// Finite extension: the coset gsm (states = cosets, outputs = rewrite
/// words u_{i,x}) composed with the subgroup machine via the filtered
/// inverse-gsm product; accept iff the run ends in the trivial coset and
/// the subgroup machine accepts. Pass count of the subgroup is preserved.
fn build_finite_extension(
    subgroup: &GroupSpec,
    generators: &[Symbol],
    coset_count: usize,
    rules: &[CosetRule],
) -> Result<MultipassAutomaton> {
    let sub_machine = build_wp(subgroup)?;
    let coset_name = |i: usize| format!("c{i}");
    let alphabet: BTreeSet<Symbol> = generators
        .iter()
        .flat_map(|g| [g.clone(), invert_symbol(g)])
        .collect();
    let mut gsm_rules = BTreeMap::new();
    for r in rules {
        gsm_rules.insert(
            (coset_name(r.coset), r.symbol.clone()),
            (r.word.clone(), coset_name(r.to)),
        );
    }
    let gsm = Gsm {
        states: (1..=coset_count).map(coset_name).collect(),
        initial: coset_name(1),
        input_alphabet: alphabet,
        output_alphabet: sub_machine.input_alphabet.clone(),
        rules: gsm_rules,
    };
    let accept: BTreeSet<String> = std::iter::once(coset_name(1)).collect();
    inverse_gsm_filtered(&sub_machine, &gsm, Some(&accept))
}

/// The stack symbol (t^ε, k) of the HNN pass-1 machine.
fn t_symbol(eta: i32, k: &str) -> Symbol {
    format!("T{}|{k}", if eta > 0 { '+' } else { '-' })
}

fn hnn_state(m: u32, k: &str) -> Symbol {
    format!("m{m}|{k}")
}

fn fold_state(m: u32, c: &str) -> Symbol {
    format!("F{m}|{c}")
}

/// The pass-1 t-cancellation machine of the HNN construction: decides
/// whether all t's cancel, testing subgroup membership of each enclosed
/// segment through its ψ-image in K. Accepts iff the stack is empty at ♯.
pub fn hnn_t_machine(spec: &GroupSpec) -> Result<MultipassAutomaton> {
    let spec = spec.clone().into_hnn()?;
    let GroupSpec::Hnn {
        base,
        stable_letter,
        phi_order,
        k_table,
        psi,
        phi_bar,
        j_set,
        ..
    } = &spec
    else {
        return Err(Error::Precondition(
            "hnn_t_machine requires an Hnn, MappingTorus, or Double spec".into(),
        ));
    };
    let p = *phi_order;
    let k = KOps::new(k_table)?;
    let base_alpha: Vec<Symbol> = base.alphabet();
    let t = stable_letter.clone();
    let t_inv = invert_symbol(&t);
    let elems = &k_table.elements;
    let id = k.identity.clone();

    // φ̄^m as explicit maps.
    let mut bar_pows: Vec<BTreeMap<String, String>> = Vec::with_capacity(p as usize);
    let mut cur: BTreeMap<String, String> =
        elems.iter().map(|e| (e.clone(), e.clone())).collect();
    for _ in 0..p {
        bar_pows.push(cur.clone());
        cur = cur
            .into_iter()
            .map(|(e, f)| (e, phi_bar[&f].clone()))
            .collect();
    }

    let mut alphabet: Vec<Symbol> = base_alpha.clone();
    alphabet.push(t.clone());
    alphabet.push(t_inv.clone());

    let mut stack_syms: Vec<Symbol> = Vec::new();
    for e in elems {
        stack_syms.push(t_symbol(1, e));
        stack_syms.push(t_symbol(-1, e));
    }

    let mut b = MachineBuilder::new(1, Mode::Deterministic)
        .initial(hnn_state(0, &id))
        .input_symbols(alphabet.iter().cloned())
        .stack_symbols(stack_syms.iter().map(String::as_str));

    // Transitions of the reading states (m, k′).
    for m in 0..p {
        for kp in elems {
            let state = hnn_state(m, kp);
            // Base letters accumulate k′ · φ̄^m(ψ(x)), leaving the stack
            // alone.
            for x in &base_alpha {
                let raw = psi_of_word(&k, psi, std::slice::from_ref(x))?;
                let twisted = bar_pows[m as usize][&raw].clone();
                let k2 = k.mul(kp, &twisted)?;
                let target = hnn_state(m, &k2);
                b.mid(1, state.clone(), Some(x), None, target.clone(), &[]);
                for gamma in &stack_syms {
                    b.mid(1, state.clone(), Some(x), Some(gamma), target.clone(), &[gamma]);
                }
            }
            // Stable letters.
            for (sym, eta) in [(&t, 1i32), (&t_inv, -1i32)] {
                let m2 = (m as i64 + eta as i64).rem_euclid(p as i64) as u32;
                let fresh = t_symbol(eta, &id);
                b.mid(
                    1,
                    state.clone(),
                    Some(sym),
                    None,
                    hnn_state(m2, &id),
                    &[&fresh],
                );
                for eps in [1i32, -1i32] {
                    for ke in elems {
                        let top = t_symbol(eps, ke);
                        let folded = k.mul(ke, kp)?;
                        if eps == -eta && j_set.contains(&folded) {
                            // Pinch: pop, then fold the accumulated element
                            // into the exposed symbol (or drop it on the
                            // empty stack).
                            b.mid(
                                1,
                                state.clone(),
                                Some(sym),
                                Some(&top),
                                fold_state(m2, &folded),
                                &[],
                            );
                        } else {
                            let rewritten = t_symbol(eps, &folded);
                            b.mid(
                                1,
                                state.clone(),
                                Some(sym),
                                Some(&top),
                                hnn_state(m2, &id),
                                &[&rewritten, &fresh],
                            );
                        }
                    }
                }
            }
        }
    }

    // Fold states: an ε-step merges the pending element into the exposed
    // stack symbol; on the empty stack they behave exactly like (m, 1_K).
    for m in 0..p {
        for c in elems {
            let state = fold_state(m, c);
            for eps in [1i32, -1i32] {
                for ke in elems {
                    let top = t_symbol(eps, ke);
                    let merged = t_symbol(eps, &k.mul(ke, c)?);
                    b.mid(1, state.clone(), None, Some(&top), hnn_state(m, &id), &[&merged]);
                }
            }
            for x in &base_alpha {
                let raw = psi_of_word(&k, psi, std::slice::from_ref(x))?;
                let twisted = bar_pows[m as usize][&raw].clone();
                b.mid(1, state.clone(), Some(x), None, hnn_state(m, &twisted), &[]);
            }
            for (sym, eta) in [(&t, 1i32), (&t_inv, -1i32)] {
                let m2 = (m as i64 + eta as i64).rem_euclid(p as i64) as u32;
                let fresh = t_symbol(eta, &id);
                b.mid(1, state.clone(), Some(sym), None, hnn_state(m2, &id), &[&fresh]);
            }
            b.end_final(state.clone(), None, FinalVerdict::Accept);
        }
    }

    for m in 0..p {
        for kp in elems {
            b.end_final(hnn_state(m, kp), None, FinalVerdict::Accept);
        }
    }
    b.totalize_final();
    let machine = b.build();
    let report = machine.validate();
    if !report.is_valid() {
        return Err(Error::InvalidMachine(format!(
            "hnn t-machine invalid: {:?}",
            report.errors().collect::<Vec<_>>()
        )));
    }
    Ok(machine)
}

/// The φ-substitution gsm of the HNN construction: erases stable letters
/// while tracking the prefix t-exponent m mod p, and maps each base letter
/// x to φ^m(x).
fn hnn_substitution_gsm(spec: &GroupSpec) -> Result<Gsm> {
    let GroupSpec::Hnn {
        base,
        stable_letter,
        phi,
        phi_order,
        ..
    } = spec
    else {
        return Err(Error::Precondition("hnn gsm requires an Hnn spec".into()));
    };
    let p = *phi_order;
    let base_alpha: Vec<Symbol> = base.alphabet();
    let t = stable_letter.clone();
    let t_inv = invert_symbol(&t);
    let state = |m: u32| format!("m{m}");

    let mut rules = BTreeMap::new();
    let mut output_alphabet: BTreeSet<Symbol> = base_alpha.iter().cloned().collect();
    for m in 0..p {
        for x in &base_alpha {
            let image = {
                let mut w = Vec::new();
                // φ^m applied letterwise, then freely reduced.
                let mut cur = vec![x.clone()];
                for _ in 0..m {
                    let mut next = Vec::new();
                    for sym in &cur {
                        next.extend(phi_letter(phi, sym)?);
                    }
                    cur = crate::oracles::free_reduce(&next);
                }
                w.extend(cur);
                w
            };
            output_alphabet.extend(image.iter().cloned());
            rules.insert((state(m), x.clone()), (image, state(m)));
        }
        for (sym, eta) in [(&t, 1i64), (&t_inv, -1i64)] {
            let m2 = (m as i64 + eta).rem_euclid(p as i64) as u32;
            rules.insert((state(m), sym.clone()), (Vec::new(), state(m2)));
        }
    }
    let mut input_alphabet: BTreeSet<Symbol> = base_alpha.into_iter().collect();
    input_alphabet.insert(t);
    input_alphabet.insert(t_inv);
    Ok(Gsm {
        states: (0..p).map(state).collect(),
        initial: state(0),
        input_alphabet,
        output_alphabet,
        rules,
    })
}

/// HNN extension: pass 1 cancels the t's, the remaining passes run the
/// base machine on the φ-substituted word. Pass count = 1 + base passes.
fn build_hnn(spec: &GroupSpec) -> Result<MultipassAutomaton> {
    let GroupSpec::Hnn { base, .. } = spec else {
        return Err(Error::Precondition("build_hnn requires an Hnn spec".into()));
    };
    let t_machine = hnn_t_machine(spec)?;
    let base_machine = build_wp(base)?;
    let gsm = hnn_substitution_gsm(spec)?;
    let substituted = inverse_gsm(&base_machine, &gsm)?;
    intersection(&t_machine, &substituted)
}

/// Pulls the word problem back along a monoid homomorphism given by
/// generator images (inverse letters by formal inversion): the word
/// problem of the re-presented group or embedded subgroup.
pub fn wp_pullback(
    machine: &MultipassAutomaton,
    generator_images: &BTreeMap<Symbol, Word>,
) -> Result<MultipassAutomaton> {
    let mut images = generator_images.clone();
    for (sym, image) in generator_images {
        images
            .entry(invert_symbol(sym))
            .or_insert_with(|| invert_word(image));
    }
    let gsm = Gsm::homomorphism(&images);
    let out = inverse_gsm(machine, &gsm)?;
    if out.is_deterministic() {
        ensure_complete(&out)
    } else {
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::DEFAULT_BUDGET;
    use crate::oracles;
    use crate::words::{enumerate_words, word};

    #[test]
    fn free_group_machine_agrees_with_reduction() {
        let m = build_wp(&GroupSpec::free(2)).unwrap();
        assert!(m.is_deterministic());
        let alphabet: Vec<Symbol> = m.input_alphabet.iter().cloned().collect();
        for w in enumerate_words(&alphabet, 5) {
            assert_eq!(
                m.accepts(&w),
                oracles::free_reduce(&w).is_empty(),
                "disagree on {w:?}"
            );
        }
    }

    #[test]
    fn free_abelian_examples() {
        let m = build_wp(&GroupSpec::free_abelian(&["a", "b"])).unwrap();
        assert_eq!(m.passes, 2);
        assert!(m.accepts(&word("a b a^-1 b^-1")));
        assert!(!m.accepts(&word("a")));
        assert!(m.accepts(&word("b a b a^-1 b^-1 b^-1")));
    }

    #[test]
    fn finite_group_machine() {
        let m = build_wp(&GroupSpec::Finite {
            table: FiniteGroupTable::cyclic(3),
        })
        .unwrap();
        assert!(m.accepts(&word("b b b")));
        assert!(!m.accepts(&word("b b")));
        assert!(m.accepts(&word("b b^-1")));
    }

    #[test]
    fn klein_bottle_machine_matches_britton() {
        let spec = GroupSpec::klein_bottle();
        let m = build_wp(&spec).unwrap();
        assert_eq!(m.passes, 2);
        assert!(m.accepts(&word("t b t^-1 b")));
        assert!(!m.accepts(&word("t b t^-1 b^-1")));
        let alphabet = word("b b^-1 t t^-1");
        for w in enumerate_words(&alphabet, 5) {
            let expected = oracles::britton_reduce(&w, 1, -1).unwrap().is_empty();
            assert_eq!(m.accepts(&w), expected, "disagree on {w:?}");
        }
    }

    #[test]
    fn index2_hnn_matches_britton() {
        let m = build_wp(&GroupSpec::hnn_z_index2()).unwrap();
        assert!(m.accepts(&word("t b b t^-1 b^-1 b^-1")));
        assert!(!m.accepts(&word("t b t^-1 b^-1")));
        let alphabet = word("b b^-1 t t^-1");
        for w in enumerate_words(&alphabet, 5) {
            let expected = oracles::britton_reduce(&w, 2, 1).unwrap().is_empty();
            assert_eq!(m.accepts(&w), expected, "disagree on {w:?}");
        }
    }

    #[test]
    fn hnn_pass1_machine_tracks_t_cancellation() {
        let spec = GroupSpec::klein_bottle().into_hnn().unwrap();
        let t1 = hnn_t_machine(&spec).unwrap();
        let alphabet = word("b b^-1 t t^-1");
        for w in enumerate_words(&alphabet, 5) {
            let reduced = oracles::britton_reduce(&w, 1, -1).unwrap();
            let t_free = reduced.iter().all(|(g, _)| *g != 't');
            assert_eq!(t1.accepts(&w), t_free, "t-cancellation wrong on {w:?}");
        }
    }

    #[test]
    fn dihedral_extension_matches_oracle() {
        let m = build_wp(&GroupSpec::infinite_dihedral()).unwrap();
        assert!(m.accepts(&word("s s")));
        assert!(m.accepts(&word("s a s a")));
        assert!(!m.accepts(&word("a")));
        assert!(!m.accepts(&word("s")));
        let alphabet = word("a a^-1 s s^-1");
        for w in enumerate_words(&alphabet, 5) {
            let expected = oracles::dihedral_eval(&w).unwrap() == (0, false);
            assert_eq!(m.accepts(&w), expected, "disagree on {w:?}");
        }
    }

    #[test]
    fn z_mod3_quotient_matches_modular_arithmetic() {
        let m = build_wp(&GroupSpec::z_mod3_quotient()).unwrap();
        let oracle = Oracle::Mod { n: 3 };
        let alphabet = word("b b^-1");
        for w in enumerate_words(&alphabet, 8) {
            let expected = oracle.is_identity(&w).unwrap();
            assert_eq!(m.accepts(&w), expected, "disagree on {w:?}");
        }
    }

    #[test]
    fn pullback_to_even_subgroup() {
        // y ↦ bb pulls WP(ℤ) back to WP(2ℤ) ≅ WP(ℤ) in y.
        let m = build_wp(&GroupSpec::free_abelian(&["b"])).unwrap();
        let images = std::iter::once(("y".to_string(), word("b b"))).collect();
        let pulled = wp_pullback(&m, &images).unwrap();
        assert!(pulled.accepts(&word("y y^-1")));
        assert!(pulled.accepts(&word("y y y^-1 y^-1")));
        assert!(!pulled.accepts(&word("y")));
    }

    #[test]
    fn double_of_z_embeds_in_klein_bottle() {
        let m = build_wp(&GroupSpec::double_of_z()).unwrap();
        // b̄ = t b⁻¹ t⁻¹ = b in the Klein-bottle group, so b b̄⁻¹ = 1.
        assert!(m.accepts(&word("b b_bar^-1")));
        assert!(m.accepts(&word("b_bar b^-1")));
        assert!(!m.accepts(&word("b b_bar")));
        let alphabet = word("b b^-1 b_bar b_bar^-1");
        let subst = |w: &[Symbol]| -> Word {
            w.iter()
                .flat_map(|s| match s.as_str() {
                    "b_bar" => word("t b^-1 t^-1"),
                    "b_bar^-1" => word("t b t^-1"),
                    other => vec![other.to_string()],
                })
                .collect()
        };
        for w in enumerate_words(&alphabet, 4) {
            let expected = oracles::britton_reduce(&subst(&w), 1, -1)
                .unwrap()
                .is_empty();
            assert_eq!(m.accepts(&w), expected, "disagree on {w:?}");
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(GroupSpec::free(0).validate().is_err());
        let bad = GroupSpec::Hnn {
            base: Box::new(GroupSpec::free_abelian(&["b"])),
            stable_letter: "b".into(),
            phi: [("b".to_string(), vec!["b".to_string()])]
                .into_iter()
                .collect(),
            phi_order: 1,
            k_table: FiniteGroupTable::cyclic(1),
            psi: [("b".to_string(), "0".to_string())].into_iter().collect(),
            phi_bar: std::iter::once(("0".to_string(), "0".to_string())).collect(),
            j_set: std::iter::once("0".to_string()).collect(),
        };
        assert!(bad.validate().is_err(), "stable letter collision accepted");

        let wrong_order = GroupSpec::MappingTorus {
            base: Box::new(GroupSpec::free_abelian(&["b"])),
            stable_letter: "t".into(),
            phi: [("b".to_string(), vec!["b^-1".to_string()])]
                .into_iter()
                .collect(),
            phi_order: 3,
        };
        assert!(wrong_order.validate().is_err(), "phi^3 ≠ id accepted");
    }

    #[test]
    fn hnn_machine_is_deterministic_with_base_passes_plus_one() {
        let m = build_wp(&GroupSpec::klein_bottle()).unwrap();
        assert!(m.is_deterministic());
        assert!(m.validate().is_valid());
        assert_eq!(m.passes, 2);
        let t = m.run(&word("t b t^-1 b"), DEFAULT_BUDGET);
        assert!(t.accepted());
    }
}
