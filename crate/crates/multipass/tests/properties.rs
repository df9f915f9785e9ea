//! Randomized invariants: run determinism, witness replay, serialization
//! round-trips, and oracle algebra.

use proptest::prelude::*;

use multipass::format::{machine_from_json, machine_to_json};
use multipass::groups::{build_wp, GroupSpec};
use multipass::machine::{
    FinalVerdict, MachineBuilder, Mode, MultipassAutomaton, Symbol, Verdict, Word, DEFAULT_BUDGET,
};
use multipass::oracles::{
    self, bs_matrix_eval, britton_reduce, free_reduce, is_pinch_free, parikh, LinearSet,
    RationalMatrix2, SemilinearSet,
};
use multipass::words::invert_word;

fn sym_word(alphabet: &[&str], max_len: usize) -> impl Strategy<Value = Word> {
    let alphabet: Vec<Symbol> = alphabet.iter().map(|s| s.to_string()).collect();
    prop::collection::vec(0..alphabet.len(), 0..=max_len)
        .prop_map(move |ixs| ixs.into_iter().map(|i| alphabet[i].clone()).collect())
}

/// Words ending in `a`, with a genuinely nondeterministic guess of the
/// final letter.
fn ends_in_a_nondet() -> MultipassAutomaton {
    let mut b = MachineBuilder::new(1, Mode::Nondeterministic)
        .initial("s")
        .input_symbols(["a", "b"]);
    b.state("last");
    b.mid(1, "s", Some("a"), None, "s", &[]);
    b.mid(1, "s", Some("a"), None, "last", &[]);
    b.mid(1, "s", Some("b"), None, "s", &[]);
    b.end_final("last", None, FinalVerdict::Accept);
    b.totalize_final();
    b.build()
}

proptest! {
    #[test]
    fn parikh_is_a_homomorphism(u in sym_word(&["a", "b", "c"], 12),
                                v in sym_word(&["a", "b", "c"], 12)) {
        let alpha: Vec<Symbol> = ["a", "b", "c"].map(str::to_owned).to_vec();
        let mut uv = u.clone();
        uv.extend(v.iter().cloned());
        let sum: Vec<u64> = parikh(&u, &alpha).unwrap()
            .iter()
            .zip(parikh(&v, &alpha).unwrap())
            .map(|(x, y)| x + y)
            .collect();
        prop_assert_eq!(parikh(&uv, &alpha).unwrap(), sum);
    }

    #[test]
    fn deterministic_runs_are_reproducible(w in sym_word(&["a", "a^-1", "b", "b^-1"], 10)) {
        let m = build_wp(&GroupSpec::free_abelian(&["a", "b"])).unwrap();
        let t1 = m.run(&w, DEFAULT_BUDGET);
        let t2 = m.run(&w, DEFAULT_BUDGET);
        prop_assert_eq!(t1.verdict, t2.verdict);
        prop_assert_eq!(t1.steps_total, t2.steps_total);
    }

    #[test]
    fn accepted_searches_carry_replayable_witnesses(w in sym_word(&["a", "b"], 10)) {
        let m = ends_in_a_nondet();
        let trace = m.run(&w, DEFAULT_BUDGET);
        let should_accept = w.last().map(String::as_str) == Some("a");
        prop_assert_eq!(trace.verdict == Verdict::Accept, should_accept);
        if trace.verdict == Verdict::Accept {
            prop_assert!(m.replay_witness(&w, trace.witness.as_ref().unwrap()));
        }
    }

    #[test]
    fn serialization_round_trip_preserves_runs(w in sym_word(&["a", "a^-1", "b", "b^-1"], 8)) {
        let m = build_wp(&GroupSpec::free(2)).unwrap();
        let parsed = machine_from_json(&machine_to_json(&m)).unwrap();
        prop_assert_eq!(parsed.run(&w, DEFAULT_BUDGET).verdict,
                        m.run(&w, DEFAULT_BUDGET).verdict);
    }

    #[test]
    fn word_times_inverse_reduces_to_nothing(w in sym_word(&["a", "a^-1", "b", "b^-1"], 12)) {
        let mut p = w.clone();
        p.extend(invert_word(&w));
        prop_assert!(free_reduce(&p).is_empty());
    }

    #[test]
    fn britton_output_has_no_pinch(w in sym_word(&["b", "b^-1", "t", "t^-1"], 12)) {
        let reduced = britton_reduce(&w, 2, 1).unwrap();
        prop_assert!(is_pinch_free(&reduced, 2));
    }

    #[test]
    fn matrix_eval_is_multiplicative(u in sym_word(&["b", "b^-1", "t", "t^-1"], 8),
                                     v in sym_word(&["b", "b^-1", "t", "t^-1"], 8)) {
        let mut uv = u.clone();
        uv.extend(v.iter().cloned());
        let lhs = bs_matrix_eval(&uv, 2).unwrap();
        let rhs = bs_matrix_eval(&u, 2).unwrap().mul(&bs_matrix_eval(&v, 2).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn matrix_inverse_cancels(w in sym_word(&["b", "b^-1", "t", "t^-1"], 8)) {
        let m = bs_matrix_eval(&w, 3).unwrap();
        prop_assert!(m.mul(&m.inverse()).is_identity());
        prop_assert_eq!(bs_matrix_eval(&invert_word(&w), 3).unwrap(), m.inverse());
    }

    #[test]
    fn semilinear_member_matches_naive(x in 0u64..8, y in 0u64..8) {
        let set = SemilinearSet {
            components: vec![
                LinearSet { base: vec![1, 0], periods: vec![vec![1, 1], vec![0, 2]] },
                LinearSet { base: vec![0, 3], periods: vec![vec![2, 0]] },
            ],
        };
        let v = vec![x, y];
        let naive = (0..=16u64).any(|n1| (0..=16u64).any(|n2| {
            (x == 1 + n1 && y == n1 + 2 * n2) || (n2 == 0 && x == 2 * n1 && y == 3)
        }));
        prop_assert_eq!(set.member(&v).unwrap(), naive);
    }

    #[test]
    fn free_group_machine_tracks_reduction(w in sym_word(&["a", "a^-1", "b", "b^-1"], 10)) {
        let m = build_wp(&GroupSpec::free(2)).unwrap();
        prop_assert_eq!(m.accepts(&w), oracles::free_reduce(&w).is_empty());
    }
}

#[test]
fn matrix_identity_is_multiplicative_unit() {
    let id = RationalMatrix2::identity();
    let m = bs_matrix_eval(&["b".to_string(), "t".to_string()], 2).unwrap();
    assert_eq!(id.mul(&m), m);
    assert_eq!(m.mul(&id), m);
}
