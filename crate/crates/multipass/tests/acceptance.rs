//! Acceptance suite: one test (and one printed pass/fail line) per
//! criterion. Run with `--nocapture` to see the lines for passing tests.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use multipass::analysis::{is_complete, linear_budget};
use multipass::closures::{complement, intersection, profile_decomposition, union};
use multipass::groups::{build_wp, hnn_t_machine, GroupSpec};
use multipass::gsm::{gsm_apply, interleaved_product, inverse_gsm, left_quotient, Gsm};
use multipass::machine::{
    FinalVerdict, MachineBuilder, Mode, MultipassAutomaton, Symbol, Word, DEFAULT_BUDGET,
};
use multipass::oracles::{
    britton_reduce, bs_matrix_eval, bs_pattern, parikh_image, FiniteGroupTable, Oracle,
};
use multipass::pda::{onepass_to_pda, pda_to_onepass, PushdownAutomaton};
use multipass::verify::verify;
use multipass::words::{enumerate_words, word};

fn alphabet_of(m: &MultipassAutomaton) -> Vec<Symbol> {
    m.input_alphabet.iter().cloned().collect()
}

fn report(criterion: u32, outcome: Result<String, String>) {
    match outcome {
        Ok(detail) => println!("criterion {criterion}: PASS — {detail}"),
        Err(detail) => {
            println!("criterion {criterion}: FAIL — {detail}");
            panic!("criterion {criterion} failed: {detail}");
        }
    }
}

fn accepted_set(m: &MultipassAutomaton, words: &[Word]) -> Vec<bool> {
    words.par_iter().map(|w| m.accepts(w)).collect()
}

#[test]
fn criterion_01_motivating_example() {
    let start = Instant::now();
    let m = build_wp(&GroupSpec::free_abelian(&["a", "b"])).unwrap();
    let oracle = GroupSpec::free_abelian(&["a", "b"]).oracle().unwrap();
    let r = verify(&m, &oracle, "wp-z2", 8, DEFAULT_BUDGET).unwrap();
    let elapsed = start.elapsed();
    let outcome = if r.words_checked != 87_381 {
        Err(format!("expected 87381 words, checked {}", r.words_checked))
    } else if !r.disagreements.is_empty() {
        Err(format!("{} disagreements", r.disagreements.len()))
    } else if elapsed.as_secs() >= 60 {
        Err(format!("took {elapsed:?}, over one minute"))
    } else {
        Ok(format!("87381 words, 0 disagreements, {elapsed:.2?}"))
    };
    report(1, outcome);
}

fn det_test_machines() -> Vec<(String, MultipassAutomaton)> {
    vec![
        ("wp-z2".into(), build_wp(&GroupSpec::free_abelian(&["a", "b"])).unwrap()),
        ("wp-f2".into(), build_wp(&GroupSpec::free(2)).unwrap()),
        (
            "wp-z3".into(),
            build_wp(&GroupSpec::Finite {
                table: FiniteGroupTable::cyclic(3),
            })
            .unwrap(),
        ),
        ("wp-dihedral".into(), build_wp(&GroupSpec::infinite_dihedral()).unwrap()),
        ("wp-klein".into(), build_wp(&GroupSpec::klein_bottle()).unwrap()),
        ("wp-bs22".into(), build_wp(&GroupSpec::hnn_z_index2()).unwrap()),
    ]
}

#[test]
fn criterion_02_complement() {
    let machines = det_test_machines();
    let mut outcome = Ok(format!("{} machines, exclusive on Σ^≤8", machines.len()));
    'outer: for (name, m) in &machines {
        if !is_complete(m).unwrap() {
            outcome = Err(format!("{name} is not complete"));
            break;
        }
        let c = complement(m).unwrap();
        let words = enumerate_words(&alphabet_of(m), 8);
        let (in_m, in_c) = (accepted_set(m, &words), accepted_set(&c, &words));
        for (i, w) in words.iter().enumerate() {
            if in_m[i] == in_c[i] {
                outcome = Err(format!(
                    "{name}: word {w:?} in {} of M, complement(M)",
                    if in_m[i] { "both" } else { "neither" }
                ));
                break 'outer;
            }
        }
    }
    report(2, outcome);
}

#[test]
fn criterion_03_union_intersection() {
    let wp_z2 = build_wp(&GroupSpec::free_abelian(&["a", "b"])).unwrap();
    let wp_f2 = build_wp(&GroupSpec::free(2)).unwrap();
    let wp_z = build_wp(&GroupSpec::free_abelian(&["b"])).unwrap();
    let pairs: Vec<(String, MultipassAutomaton, MultipassAutomaton)> = vec![
        ("z2/f2".into(), wp_z2.clone(), wp_f2.clone()),
        ("z2/co-z2".into(), wp_z2.clone(), complement(&wp_z2).unwrap()),
        ("f2/co-f2".into(), wp_f2.clone(), complement(&wp_f2).unwrap()),
        (
            "klein/bs22".into(),
            build_wp(&GroupSpec::klein_bottle()).unwrap(),
            build_wp(&GroupSpec::hnn_z_index2()).unwrap(),
        ),
        (
            "z/zmod3".into(),
            wp_z.clone(),
            build_wp(&GroupSpec::z_mod3_quotient()).unwrap(),
        ),
    ];
    let mut outcome = Ok(format!("{} pairs, Σ^≤8, pass counts add", pairs.len()));
    'outer: for (name, a, b) in &pairs {
        let u = union(a, b).unwrap();
        let i = intersection(a, b).unwrap();
        if u.passes != a.passes + b.passes || i.passes != a.passes + b.passes {
            outcome = Err(format!(
                "{name}: pass counts {} and {} instead of {}",
                u.passes,
                i.passes,
                a.passes + b.passes
            ));
            break;
        }
        let words = enumerate_words(&alphabet_of(a), 8);
        let (wa, wb) = (accepted_set(a, &words), accepted_set(b, &words));
        let (wu, wi) = (accepted_set(&u, &words), accepted_set(&i, &words));
        for (ix, w) in words.iter().enumerate() {
            if wu[ix] != (wa[ix] || wb[ix]) {
                outcome = Err(format!("{name}: union wrong on {w:?}"));
                break 'outer;
            }
            if wi[ix] != (wa[ix] && wb[ix]) {
                outcome = Err(format!("{name}: intersection wrong on {w:?}"));
                break 'outer;
            }
        }
    }
    report(3, outcome);
}

/// Nondeterministic 2-pass machine: contains an `a` (pass 1) and a `b`
/// (pass 2); pass 2 guesses when to commit.
fn contains_a_and_b() -> MultipassAutomaton {
    let mut b = MachineBuilder::new(2, Mode::Nondeterministic)
        .initial("s0")
        .input_symbols(["a", "b"]);
    b.mid(1, "s0", Some("a"), None, "s1", &[]);
    b.mid(1, "s0", Some("b"), None, "s0", &[]);
    b.mid(1, "s1", Some("a"), None, "s1", &[]);
    b.mid(1, "s1", Some("b"), None, "s1", &[]);
    b.end_nonfinal(1, "s1", None, "s0");
    b.mid(2, "s0", Some("a"), None, "s0", &[]);
    b.mid(2, "s0", Some("b"), None, "s0", &[]);
    b.mid(2, "s0", Some("b"), None, "sb", &[]);
    b.mid(2, "sb", Some("a"), None, "sb", &[]);
    b.mid(2, "sb", Some("b"), None, "sb", &[]);
    b.end_final("sb", None, FinalVerdict::Accept);
    b.totalize_final();
    b.build()
}

#[test]
fn criterion_04_profile_decomposition() {
    let machines: Vec<(String, MultipassAutomaton)> = vec![
        ("det-2pass".into(), build_wp(&GroupSpec::free_abelian(&["a", "b"])).unwrap()),
        ("nondet-2pass".into(), contains_a_and_b()),
        ("det-3pass".into(), build_wp(&GroupSpec::free_abelian(&["a", "b", "c"])).unwrap()),
    ];
    let mut outcome = Ok(String::new());
    let mut profile_counts = Vec::new();
    'outer: for (name, m) in &machines {
        let decomposition = profile_decomposition(m).unwrap();
        profile_counts.push(decomposition.len());
        let words = enumerate_words(&alphabet_of(m), 6);
        let in_m = accepted_set(m, &words);
        // slice_hits[i][w] = word w lies in every L(M_{i,j}) of profile i.
        let slice_hits: Vec<Vec<bool>> = decomposition
            .par_iter()
            .map(|(_, slices)| {
                let per_slice: Vec<Vec<bool>> =
                    slices.iter().map(|s| accepted_set(s, &words)).collect();
                (0..words.len())
                    .map(|ix| per_slice.iter().all(|hits| hits[ix]))
                    .collect()
            })
            .collect();
        for (ix, w) in words.iter().enumerate() {
            let realized = slice_hits.iter().filter(|hits| hits[ix]).count();
            if (realized > 0) != in_m[ix] {
                outcome = Err(format!(
                    "{name}: decomposition disagrees with L(M) on {w:?}"
                ));
                break 'outer;
            }
            if m.is_deterministic() && in_m[ix] && realized != 1 {
                outcome = Err(format!(
                    "{name}: accepted word {w:?} realizes {realized} profiles"
                ));
                break 'outer;
            }
        }
    }
    if outcome == Ok(String::new()) {
        outcome = Ok(format!(
            "3 machines on Σ^≤6, profile counts {profile_counts:?}"
        ));
    }
    report(4, outcome);
}

fn anbn_pda() -> PushdownAutomaton {
    let mut p = PushdownAutomaton {
        mode: Mode::Nondeterministic,
        states: ["s", "p", "done"].map(str::to_owned).into_iter().collect(),
        initial: "s".into(),
        input_alphabet: ["a", "b"].map(str::to_owned).into_iter().collect(),
        stack_alphabet: ["Z", "A"].map(str::to_owned).into_iter().collect(),
        start_symbol: "Z".into(),
        final_states: std::iter::once("done".to_string()).collect(),
        transitions: Default::default(),
    };
    let mut add = |q: &str, i: Option<&str>, g: &str, to: &str, push: &[&str]| {
        p.transitions
            .entry((q.into(), i.map(str::to_owned), g.into()))
            .or_default()
            .push((to.into(), push.iter().map(|s| s.to_string()).collect()));
    };
    add("s", Some("a"), "Z", "s", &["Z", "A"]);
    add("s", Some("a"), "A", "s", &["A", "A"]);
    add("s", Some("b"), "A", "p", &[]);
    add("p", Some("b"), "A", "p", &[]);
    add("s", None, "Z", "done", &["Z"]);
    add("p", None, "Z", "done", &["Z"]);
    p
}

#[test]
fn criterion_05_pda_bridge() {
    let mut outcome = Ok("aⁿbⁿ and free-group round trips agree on Σ^≤8".to_string());

    let p = anbn_pda();
    let m = pda_to_onepass(&p).unwrap();
    let p2 = onepass_to_pda(&m).unwrap();
    let words = enumerate_words(&["a".into(), "b".into()], 8);
    for w in &words {
        let expected = p.accepts(w, DEFAULT_BUDGET) == Some(true);
        if m.accepts(w) != expected || p2.accepts(w, DEFAULT_BUDGET) != Some(expected) {
            outcome = Err(format!("aⁿbⁿ round trip disagrees on {w:?}"));
            break;
        }
    }

    if outcome.is_ok() {
        let free = build_wp(&GroupSpec::free(2)).unwrap();
        let fp = onepass_to_pda(&free).unwrap();
        let fm = pda_to_onepass(&fp).unwrap();
        let words = enumerate_words(&alphabet_of(&free), 8);
        let in_free = accepted_set(&free, &words);
        let in_fm = accepted_set(&fm, &words);
        let in_fp: Vec<bool> = words
            .par_iter()
            .map(|w| fp.accepts(w, DEFAULT_BUDGET) == Some(true))
            .collect();
        for (ix, w) in words.iter().enumerate() {
            if in_free[ix] != in_fp[ix] || in_free[ix] != in_fm[ix] {
                outcome = Err(format!("free-group round trip disagrees on {w:?}"));
                break;
            }
        }
    }
    report(5, outcome);
}

#[test]
fn criterion_06_transducer_closures() {
    let mut outcome = Ok("invgsm, interleave, lquot match comprehensions".to_string());
    let wp_z = build_wp(&GroupSpec::free_abelian(&["b"])).unwrap();

    // Inverse homomorphism y ↦ b², checked against g(w) ∈ L.
    let images = [
        ("y".to_string(), word("b b")),
        ("y^-1".to_string(), word("b^-1 b^-1")),
    ]
    .into_iter()
    .collect();
    let g = Gsm::homomorphism(&images);
    let inv = inverse_gsm(&wp_z, &g).unwrap();
    for w in enumerate_words(&word("y y^-1"), 8) {
        let expected = wp_z.accepts(&gsm_apply(&g, &w).unwrap());
        if inv.accepts(&w) != expected {
            outcome = Err(format!("inverse homomorphism wrong on {w:?}"));
            break;
        }
    }

    // Inverse projection Σ → {b, b⁻¹}: b-exponent zero, c's free.
    if outcome.is_ok() {
        let big: BTreeSet<Symbol> = word("b b^-1 c c^-1").into_iter().collect();
        let keep: BTreeSet<Symbol> = word("b b^-1").into_iter().collect();
        let proj = Gsm::projection(&big, &keep);
        let inv = inverse_gsm(&wp_z, &proj).unwrap();
        for w in enumerate_words(&word("b b^-1 c c^-1"), 6) {
            let expected = wp_z.accepts(&gsm_apply(&proj, &w).unwrap());
            if inv.accepts(&w) != expected {
                outcome = Err(format!("inverse projection wrong on {w:?}"));
                break;
            }
        }
    }

    // Interleaved product over identical alphabets = intersection.
    if outcome.is_ok() {
        let wp_z2 = build_wp(&GroupSpec::free_abelian(&["a", "b"])).unwrap();
        let wp_f2 = build_wp(&GroupSpec::free(2)).unwrap();
        let inter = interleaved_product(&[wp_z2.clone(), wp_f2.clone()]).unwrap();
        let both = intersection(&wp_z2, &wp_f2).unwrap();
        let words = enumerate_words(&alphabet_of(&wp_z2), 6);
        let (wi, wb) = (accepted_set(&inter, &words), accepted_set(&both, &words));
        for (ix, w) in words.iter().enumerate() {
            if wi[ix] != wb[ix] {
                outcome = Err(format!("interleaved ≠ intersection on {w:?}"));
                break;
            }
        }
    }

    // Left quotient {b, b²}⁻¹ WP(ℤ).
    if outcome.is_ok() {
        let k_set = vec![word("b"), word("b b")];
        let lq = left_quotient(&wp_z, &k_set).unwrap();
        for w in enumerate_words(&word("b b^-1"), 8) {
            let expected = k_set.iter().any(|u| {
                let mut uw = u.clone();
                uw.extend(w.iter().cloned());
                wp_z.accepts(&uw)
            });
            if lq.accepts(&w) != expected {
                outcome = Err(format!("left quotient wrong on {w:?}"));
                break;
            }
        }
    }
    report(6, outcome);
}

#[test]
fn criterion_07_hnn_theorem() {
    let mut outcome = Ok("Klein bottle and ⟨b,t; tb²t⁻¹=b²⟩ match Britton on Σ^≤8".to_string());
    let cases = [
        ("klein", GroupSpec::klein_bottle(), 1i64, -1i64),
        ("bs22", GroupSpec::hnn_z_index2(), 2, 1),
    ];
    'outer: for (name, spec, d, s) in cases {
        let m = build_wp(&spec).unwrap();
        let t1 = hnn_t_machine(&spec).unwrap();
        let words = enumerate_words(&alphabet_of(&m), 8);
        let in_m = accepted_set(&m, &words);
        let in_t1 = accepted_set(&t1, &words);
        for (ix, w) in words.iter().enumerate() {
            let reduced = britton_reduce(w, d, s).unwrap();
            if in_m[ix] != reduced.is_empty() {
                outcome = Err(format!("{name}: machine ≠ Britton on {w:?}"));
                break 'outer;
            }
            let t_free = reduced.iter().all(|(g, _)| *g != 't');
            if in_t1[ix] != t_free {
                outcome = Err(format!("{name}: pass-1 emptiness wrong on {w:?}"));
                break 'outer;
            }
        }
    }
    report(7, outcome);
}

#[test]
fn criterion_08_finite_extension() {
    let m = build_wp(&GroupSpec::infinite_dihedral()).unwrap();
    let words = enumerate_words(&alphabet_of(&m), 8);
    let in_m = accepted_set(&m, &words);
    let mut outcome = Ok("infinite dihedral matches normal-form oracle on Σ^≤8".to_string());
    let oracle = Oracle::Dihedral;
    for (ix, w) in words.iter().enumerate() {
        if in_m[ix] != oracle.is_identity(w).unwrap() {
            outcome = Err(format!("disagrees on {w:?}"));
            break;
        }
    }
    report(8, outcome);
}

#[test]
fn criterion_09_finite_quotient() {
    let m = build_wp(&GroupSpec::z_mod3_quotient()).unwrap();
    let oracle = Oracle::Mod { n: 3 };
    let mut outcome = Ok("ℤ/3 quotient matches modular arithmetic on Σ^≤8".to_string());
    for w in enumerate_words(&word("b b^-1"), 8) {
        if m.accepts(&w) != oracle.is_identity(&w).unwrap() {
            outcome = Err(format!("disagrees on {w:?}"));
            break;
        }
    }
    report(9, outcome);
}

#[test]
fn criterion_10_linear_time_bound() {
    let machines = det_test_machines();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d70);
    let mut outcome = Ok(format!(
        "{} machines within k·C·B²·n + k·C·B² up to n = 64",
        machines.len()
    ));
    'outer: for (name, m) in &machines {
        if !is_complete(m).unwrap() {
            outcome = Err(format!("{name} is not complete"));
            break;
        }
        let alphabet = alphabet_of(m);
        for _ in 0..300 {
            let n = rng.gen_range(0..=64);
            let w: Word = (0..n)
                .map(|_| alphabet[rng.gen_range(0..alphabet.len())].clone())
                .collect();
            let bound = linear_budget(m, w.len()).unwrap();
            let trace = m.run(&w, DEFAULT_BUDGET.max(bound));
            if trace.steps_total > bound {
                outcome = Err(format!(
                    "{name}: {} steps on |w| = {}, bound {bound}",
                    trace.steps_total,
                    w.len()
                ));
                break 'outer;
            }
        }
    }
    report(10, outcome);
}

#[test]
fn criterion_11_representation() {
    let mut outcome = Ok(
        "matrix relation (n ∈ {2,3}), backend agreement Σ^≤8, Parikh image shapes".to_string(),
    );
    for n in [2i64, 3] {
        let lhs = bs_matrix_eval(&word("t b t^-1"), n).unwrap();
        let rhs = bs_matrix_eval(&vec!["b".to_string(); (n * n) as usize], n).unwrap();
        if lhs != rhs {
            outcome = Err(format!("t·b·t⁻¹ ≠ b^{} for n = {n}", n * n));
        }
    }

    if outcome.is_ok() {
        let matrix = Oracle::BsMatrix { n: 2 };
        let rewrite = Oracle::BsRewrite { n: 4 };
        for w in enumerate_words(&word("b b^-1 t t^-1"), 8) {
            if matrix.is_identity(&w).unwrap() != rewrite.is_identity(&w).unwrap() {
                outcome = Err(format!("matrix ≠ rewriting on {w:?}"));
                break;
            }
        }
    }

    if outcome.is_ok() {
        let oracle = Oracle::BsRewrite { n: 4 };
        let member = |w: &[Symbol]| oracle.is_identity(w).unwrap_or(false);
        let alphabet = word("b b^-1 t t^-1");
        let pattern = bs_pattern();
        let at_12 = parikh_image(member, &alphabet, Some(&pattern), 12).unwrap();
        let at_21 = parikh_image(member, &alphabet, Some(&pattern), 21).unwrap();
        let v1 = vec![1u64, 4, 1, 1];
        let v2 = vec![1u64, 16, 2, 2];
        if at_12 != BTreeSet::from([v1.clone()]) {
            outcome = Err(format!("image at 12 is {at_12:?}"));
        } else if at_21 != BTreeSet::from([v1, v2]) {
            outcome = Err(format!("image at 21 is {at_21:?}"));
        }
    }
    report(11, outcome);
}

#[test]
fn criterion_12_negative_controls() {
    let cases: Vec<(String, GroupSpec, Oracle)> = vec![
        ("free2".into(), GroupSpec::free(2), GroupSpec::free(2).oracle().unwrap()),
        (
            "z2".into(),
            GroupSpec::free_abelian(&["a", "b"]),
            GroupSpec::free_abelian(&["a", "b"]).oracle().unwrap(),
        ),
        (
            "z3".into(),
            GroupSpec::Finite {
                table: FiniteGroupTable::cyclic(3),
            },
            Oracle::Finite {
                table: FiniteGroupTable::cyclic(3),
            },
        ),
        ("dihedral".into(), GroupSpec::infinite_dihedral(), Oracle::Dihedral),
        ("klein".into(), GroupSpec::klein_bottle(), Oracle::Britton { d: 1, s: -1 }),
        ("bs22".into(), GroupSpec::hnn_z_index2(), Oracle::Britton { d: 2, s: 1 }),
        ("zmod3".into(), GroupSpec::z_mod3_quotient(), Oracle::Mod { n: 3 }),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x77_70);
    let mut outcome = Ok(format!(
        "{} groups × 100 oracle-verified non-identity words, 0 false accepts",
        cases.len()
    ));
    'outer: for (name, spec, oracle) in &cases {
        let m = build_wp(spec).unwrap();
        let alphabet = alphabet_of(&m);
        let mut checked = 0;
        let mut attempts = 0;
        while checked < 100 {
            attempts += 1;
            if attempts > 100_000 {
                outcome = Err(format!("{name}: could not sample non-identity words"));
                break 'outer;
            }
            let n = rng.gen_range(1..=12);
            let w: Word = (0..n)
                .map(|_| alphabet[rng.gen_range(0..alphabet.len())].clone())
                .collect();
            if oracle.is_identity(&w).unwrap() {
                continue;
            }
            checked += 1;
            if m.accepts(&w) {
                outcome = Err(format!("{name}: false accept on {w:?}"));
                break 'outer;
            }
        }
    }
    report(12, outcome);
}
