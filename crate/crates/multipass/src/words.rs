//! Word helpers: parsing, formal inversion, and bounded enumeration.

use crate::machine::{Symbol, Word};

/// Parses a whitespace-separated symbol list; multi-character symbols such
/// as `a^-1` are single symbols.
pub fn word(s: &str) -> Word {
    s.split_whitespace().map(str::to_owned).collect()
}

pub fn display(w: &[Symbol]) -> String {
    w.join(" ")
}

/// Formal inverse of one group letter: `x` ↔ `x^-1`.
pub fn invert_symbol(sym: &str) -> Symbol {
    match sym.strip_suffix("^-1") {
        Some(base) => base.to_owned(),
        None => format!("{sym}^-1"),
    }
}

/// Formal inverse of a word: reverse and invert each letter.
pub fn invert_word(w: &[Symbol]) -> Word {
    w.iter().rev().map(|s| invert_symbol(s)).collect()
}

/// All words over `alphabet` of length at most `max_len`, in length-then-
/// lexicographic order. Desk scale only: the count is |Σ|^0 + … + |Σ|^max.
pub fn enumerate_words(alphabet: &[Symbol], max_len: usize) -> Vec<Word> {
    let mut out: Vec<Word> = vec![Vec::new()];
    let mut layer: Vec<Word> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for w in &layer {
            for sym in alphabet {
                let mut v = w.clone();
                v.push(sym.clone());
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
