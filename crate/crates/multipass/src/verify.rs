//! Exhaustive machine-vs-oracle comparison over Σ^{≤n}, with step
//! accounting and the linear-time bound check for complete deterministic
//! machines.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{is_complete, linear_budget, step_bound_params};
use crate::machine::{MultipassAutomaton, Verdict, Word};
use crate::oracles::Oracle;
use crate::words::{display, enumerate_words};
use crate::Result;

#[derive(Debug, Clone, Serialize)]
pub struct Disagreement {
    pub word: String,
    pub machine_verdict: Verdict,
    pub oracle_accepts: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearBoundCheck {
    pub k: u64,
    pub c: u64,
    pub b: u64,
    /// max over checked words of steps_total − k·C·B²·n, against the
    /// allowed slack k·C·B².
    pub max_excess: i64,
    pub allowed_excess: u64,
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub machine_id: String,
    pub oracle_id: String,
    pub max_len: usize,
    pub words_checked: usize,
    pub disagreements: Vec<Disagreement>,
    /// steps_total → number of words.
    pub steps_histogram: BTreeMap<u64, u64>,
    /// Present only for complete deterministic machines.
    pub linear_bound: Option<LinearBoundCheck>,
    /// Words on which the run exceeded the budget (a bound violation for
    /// complete deterministic machines).
    pub budget_exceeded: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.disagreements.is_empty()
            && self.budget_exceeded.is_empty()
            && self
                .linear_bound
                .as_ref()
                .map_or(true, |lb| lb.violations == 0)
    }
}

/// Runs the machine against the oracle on every word of length ≤ max_len
/// over the machine's input alphabet.
pub fn verify(
    machine: &MultipassAutomaton,
    oracle: &Oracle,
    machine_id: &str,
    max_len: usize,
    budget: u64,
) -> Result<VerifyReport> {
    let alphabet: Vec<_> = machine.input_alphabet.iter().cloned().collect();
    let words = enumerate_words(&alphabet, max_len);
    let complete_det = machine.is_deterministic() && is_complete(machine)?;
    let (k, c, b) = if complete_det {
        step_bound_params(machine)?
    } else {
        (0, 0, 0)
    };

    struct Row {
        word: Word,
        verdict: Verdict,
        steps: u64,
    }
    let rows: Vec<Result<Row>> = words
        .par_iter()
        .map(|w| {
            let trace = machine.run(w, budget);
            let _ = oracle.evaluate(w)?;
            Ok(Row {
                word: w.clone(),
                verdict: trace.verdict,
                steps: trace.steps_total,
            })
        })
        .collect();

    let mut disagreements = Vec::new();
    let mut steps_histogram: BTreeMap<u64, u64> = BTreeMap::new();
    let mut budget_exceeded = Vec::new();
    let mut max_excess = i64::MIN;
    let mut violations = 0usize;
    let allowed_excess = k * c * b * b;
    let mut words_checked = 0usize;
    for row in rows {
        let row = row?;
        words_checked += 1;
        let expected = oracle.is_identity(&row.word)?;
        let machine_accepts = row.verdict == Verdict::Accept;
        match row.verdict {
            Verdict::BudgetExceeded => budget_exceeded.push(display(&row.word)),
            _ => {
                if machine_accepts != expected {
                    disagreements.push(Disagreement {
                        word: display(&row.word),
                        machine_verdict: row.verdict,
                        oracle_accepts: expected,
                    });
                }
                *steps_histogram.entry(row.steps).or_default() += 1;
                if complete_det {
                    let n = row.word.len() as u64;
                    let excess = row.steps as i64 - (k * c * b * b * n) as i64;
                    max_excess = max_excess.max(excess);
                    if row.steps > linear_budget(machine, row.word.len())? {
                        violations += 1;
                    }
                }
            }
        }
    }
    let linear_bound = if complete_det {
        Some(LinearBoundCheck {
            k,
            c,
            b,
            max_excess: if max_excess == i64::MIN { 0 } else { max_excess },
            allowed_excess,
            violations,
        })
    } else {
        None
    };
    Ok(VerifyReport {
        machine_id: machine_id.to_string(),
        oracle_id: oracle.describe(),
        max_len,
        words_checked,
        disagreements,
        steps_histogram,
        linear_bound,
        budget_exceeded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closures::complement;
    use crate::groups::{build_wp, GroupSpec};
    use crate::machine::DEFAULT_BUDGET;

    #[test]
    fn z2_machine_has_no_disagreements() {
        let m = build_wp(&GroupSpec::free_abelian(&["a", "b"])).unwrap();
        let oracle = GroupSpec::free_abelian(&["a", "b"]).oracle().unwrap();
        let report = verify(&m, &oracle, "wp-z2", 5, DEFAULT_BUDGET).unwrap();
        assert!(report.ok(), "{:?}", report.disagreements);
        assert_eq!(report.words_checked, 1 + 4 + 16 + 64 + 256 + 1024);
        assert!(report.linear_bound.is_some());
    }

    #[test]
    fn complemented_machine_disagrees_everywhere() {
        let m = build_wp(&GroupSpec::free_abelian(&["a", "b"])).unwrap();
        let c = complement(&m).unwrap();
        let oracle = GroupSpec::free_abelian(&["a", "b"]).oracle().unwrap();
        let report = verify(&c, &oracle, "not-wp-z2", 3, DEFAULT_BUDGET).unwrap();
        assert!(!report.ok());
        assert_eq!(report.disagreements.len(), report.words_checked);
    }
}
