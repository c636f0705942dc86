//! Acceptance gate: one test per shipping criterion, each printing a
//! PASS line (run with `--nocapture` to see them). The brute-force
//! simulator in `common` is the independent oracle throughout.

// Index loops here walk parallel structures (answer vectors, permutations).
#![allow(clippy::needless_range_loop)]

mod common;

use std::time::Instant;

use common::*;
use delbench_core::epistemic::{
    initial_state, solve, Announcement, Answer, BoundType, ObservationMatrix, World,
};
use delbench_core::grader::{parse_response, GraderConfig, Score, Verdict};
use delbench_core::harness::{
    majority_baseline, run_eval, write_raw_responses, EvalOptions, RawResponse, ResponderSpec,
};
use delbench_core::instance::{
    attach_ground_truth, enumerate_rung_grid, sample_rung3, GenerationGrid, InstanceRecord, PuzzleInstance, Rung, Rung3Grid,
};
use delbench_core::io::FileMeta;
use delbench_core::narrative::{
    render_prompt, scan_leakage, NamePool, NarrativeContext, SettingsTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use Answer::{No, Unknown, Yes};

fn fixtures() -> (SettingsTable, NamePool) {
    (SettingsTable::builtin(), NamePool::builtin())
}

/// Criterion 1: the two-agent worked example, exactly: round-1 vector
/// (Unknown, Yes), round-2 queried answer No, surviving sizes 4 -> 3 -> 1,
/// solved in under a millisecond.
#[test]
fn criterion_01_two_agent_golden() {
    let obs = ObservationMatrix::full_except_diagonal(2).unwrap();
    let actual = World::from_statuses(&[0, 1]).unwrap();

    let started = Instant::now();
    let initial = initial_state(2, obs.clone(), actual).unwrap();
    let bounded = initial.apply_bound(Announcement::lower(1)).unwrap();
    let (vector, after_round1) = bounded.round_update();
    let answer = after_round1.agent_answer(0);
    let elapsed = started.elapsed();

    assert_eq!(initial.surviving_count(), 4);
    assert_eq!(bounded.surviving_count(), 3);
    assert_eq!(vector, vec![Unknown, Yes]);
    assert_eq!(after_round1.surviving_count(), 1);
    assert_eq!(answer, No);

    let truth = solve(&obs, &actual, Announcement::lower(1), 0, 2).unwrap();
    assert_eq!(truth.answer, No);
    assert_eq!(truth.rounds.len(), 1);
    assert_eq!(truth.rounds[0].answers, vec![Unknown, Yes]);
    assert_eq!(truth.rounds[0].surviving_after, 1);

    assert!(elapsed.as_micros() < 1000, "took {elapsed:?}, budget 1 ms");
    println!(
        "ACCEPTANCE 01 two-agent golden: PASS (vector (Unknown, Yes), final No, \
         sizes 4->3->1, {:.0} us)",
        elapsed.as_micros()
    );
}

/// Criterion 2: classic schedule over every n <= 6, k in [1, n],
/// lower q in [1, k] with full observation: marked agents first answer Yes
/// in round k-q+1 and unmarked agents first answer No in round k-q+2 --
/// in the engine and in the independent brute simulator. Under 5 s.
#[test]
fn criterion_02_classic_schedule_sweep() {
    let started = Instant::now();
    let mut configs = 0;

    for n in 1..=6usize {
        for k in 1..=n {
            for q in 1..=k {
                configs += 1;
                let statuses: Vec<u8> = (0..n).map(|i| (i < k) as u8).collect();
                let max_round = n + 3;

                // Engine rounds.
                let obs = ObservationMatrix::from_rows(&full_obs(n)).unwrap();
                let actual = World::from_statuses(&statuses).unwrap();
                let mut state = initial_state(n, obs, actual)
                    .unwrap()
                    .apply_bound(Announcement::lower(q as u8))
                    .unwrap();
                let mut engine_rounds = Vec::with_capacity(max_round);
                for _ in 0..max_round {
                    engine_rounds.push((0..n).map(|i| state.agent_answer(i)).collect::<Vec<_>>());
                    let (_, next) = state.round_update();
                    state = next;
                }

                // Brute rounds, same shape.
                let mut model =
                    brute_apply_bound(&brute_initial(n, full_obs(n), statuses.clone()), true, q);
                let mut brute_rounds = Vec::with_capacity(max_round);
                for _ in 0..max_round {
                    brute_rounds.push(
                        (0..n)
                            .map(|i| brute_answer(&model, &model.actual.clone(), i))
                            .collect::<Vec<_>>(),
                    );
                    let (_, next) = brute_round(&model);
                    model = next;
                }
                assert_eq!(engine_rounds, brute_rounds, "n={n} k={k} q={q}");

                for agent in 0..n {
                    let target = if statuses[agent] == 1 { Yes } else { No };
                    let expected_round = if statuses[agent] == 1 { k - q + 1 } else { k - q + 2 };
                    let first = engine_rounds
                        .iter()
                        .position(|v| v[agent] == target)
                        .map(|p| p + 1)
                        .unwrap_or_else(|| panic!("n={n} k={k} q={q} agent={agent}: never definite"));
                    assert_eq!(first, expected_round, "n={n} k={k} q={q} agent={agent}");
                    // Once definite, stays definite.
                    for round in first..max_round {
                        assert_eq!(engine_rounds[round][agent], target);
                    }
                }
            }
        }
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5 s");
    println!(
        "ACCEPTANCE 02 classic schedule sweep: PASS ({configs} configurations, \
         engine == brute == closed form, {:.2} s)",
        elapsed.as_secs_f64()
    );
}

/// Criterion 3: randomized invariant suite, 10,000 cases with n <= 8 and
/// random observation matrices (queried diagonal zero): truthfulness,
/// monotone shrinkage, fixpoint stability, answer monotonicity,
/// permutation equivariance, and equivalence-relation laws. Zero
/// violations allowed.
#[test]
fn criterion_03_randomized_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xDE1);
    let cases = 10_000;
    for case in 0..cases {
        let n = rng.random_range(1..=8usize);
        let statuses: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1u8)).collect();
        let k = statuses.iter().filter(|&&s| s == 1).count();
        let mut rows: Vec<Vec<u8>> =
            (0..n).map(|_| (0..n).map(|_| rng.random_range(0..=1u8)).collect()).collect();
        rows[0][0] = 0;
        let lower = rng.random_bool(0.5);
        let q = if lower { rng.random_range(0..=k) } else { rng.random_range(k..=n) };
        let bound = if lower {
            Announcement::lower(q as u8)
        } else {
            Announcement::upper(q as u8)
        };

        let obs = ObservationMatrix::from_rows(&rows).unwrap();
        let actual = World::from_statuses(&statuses).unwrap();

        // Equivalence-relation laws on sampled world triples.
        let sample_world = |rng: &mut ChaCha8Rng| {
            World::new(rng.random_range(0..(1u32 << n)), n).unwrap()
        };
        let (w, v, u) = (sample_world(&mut rng), sample_world(&mut rng), sample_world(&mut rng));
        for agent in 0..n {
            let ind = |a: &World, b: &World| {
                delbench_core::epistemic::indistinguishable(a, b, agent, &obs).unwrap()
            };
            assert!(ind(&w, &w), "case {case}: reflexivity");
            assert_eq!(ind(&w, &v), ind(&v, &w), "case {case}: symmetry");
            if ind(&w, &v) && ind(&v, &u) {
                assert!(ind(&w, &u), "case {case}: transitivity");
            }
        }

        let mut state =
            initial_state(n, obs.clone(), actual).unwrap().apply_bound(bound).unwrap();
        let rounds = (n + 2).min(6);
        let mut last_len = state.surviving_count();
        let mut settled: Vec<Option<Answer>> = vec![None; n];
        let mut saw_fixpoint = false;
        for _ in 0..rounds {
            // Truthfulness.
            assert!(state.surviving_set().contains(actual.bits()), "case {case}: actual pruned");
            // Answer monotonicity.
            for agent in 0..n {
                let answer = state.agent_answer(agent);
                match settled[agent] {
                    Some(before) => {
                        assert_eq!(before, answer, "case {case}: definite answer regressed")
                    }
                    None if answer != Unknown => settled[agent] = Some(answer),
                    None => {}
                }
            }
            let (vector, next) = state.round_update();
            // Monotone shrinkage.
            assert!(next.surviving_count() <= last_len, "case {case}: set grew");
            assert!(
                next.surviving_set().is_subset_of(state.surviving_set()),
                "case {case}: not a refinement"
            );
            // Fixpoint stability: an update that changes nothing repeats
            // itself exactly.
            if !saw_fixpoint && next.surviving_set() == state.surviving_set() {
                saw_fixpoint = true;
                let (vector2, next2) = next.round_update();
                assert_eq!(vector, vector2, "case {case}: fixpoint vector changed");
                assert_eq!(
                    next2.surviving_set(),
                    next.surviving_set(),
                    "case {case}: fixpoint set changed"
                );
            }
            last_len = next.surviving_count();
            state = next;
        }

        // Permutation equivariance under a uniformly random relabeling.
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let mut p_statuses = vec![0u8; n];
        let mut p_rows = vec![vec![0u8; n]; n];
        for i in 0..n {
            p_statuses[perm[i]] = statuses[i];
            for j in 0..n {
                p_rows[perm[i]][perm[j]] = rows[i][j];
            }
        }
        let queried = rng.random_range(0..n);
        let round = rng.random_range(1..=4usize);
        let original = solve(&obs, &actual, bound, queried, round).unwrap();
        let permuted = solve(
            &ObservationMatrix::from_rows(&p_rows).unwrap(),
            &World::from_statuses(&p_statuses).unwrap(),
            bound,
            perm[queried],
            round,
        )
        .unwrap();
        assert_eq!(original.answer, permuted.answer, "case {case}: queried answer moved");
        for (a, b) in original.rounds.iter().zip(&permuted.rounds) {
            assert_eq!(a.surviving_after, b.surviving_after, "case {case}");
            for i in 0..n {
                assert_eq!(a.answers[i], b.answers[perm[i]], "case {case}: vector not permuted");
            }
        }
    }
    println!("ACCEPTANCE 03 randomized invariants: PASS ({cases} cases, zero violations)");
}

/// Criterion 4: 1,000 parameter-identical rung I / rung II pairs have
/// identical ground truths, and the leakage scanner finds zero
/// queried-status assertions across all their prompts.
#[test]
fn criterion_04_narrative_independence() {
    let (settings, pool) = fixtures();
    let grid = GenerationGrid::paper();
    let rung1 = enumerate_rung_grid(&grid, Rung::I, &settings, &pool, 0).unwrap();
    let rung2 = enumerate_rung_grid(&grid, Rung::II, &settings, &pool, 0).unwrap();
    assert!(rung1.len() >= 1000 && rung2.len() >= 1000);

    let (labeled1, _) = attach_ground_truth(&rung1[..1000]).unwrap();
    let (labeled2, _) = attach_ground_truth(&rung2[..1000]).unwrap();

    let ctx = NarrativeContext::default();
    let mut leaks = 0usize;
    for (a, b) in labeled1.iter().zip(&labeled2) {
        assert_eq!(a.instance.k, b.instance.k);
        assert_eq!(a.instance.bound, b.instance.bound);
        assert_eq!(a.instance.round, b.instance.round);
        assert_eq!(a.instance.statuses, b.instance.statuses);
        assert_eq!(
            a.ground_truth, b.ground_truth,
            "{} vs {}: narrative changed the ground truth",
            a.instance.id, b.instance.id
        );
        assert_eq!(a.trace, b.trace);

        for labeled in [a, b] {
            let bundle = render_prompt(&labeled.instance, &labeled.trace, &ctx).unwrap();
            let setting = settings.get(&labeled.instance.setting).unwrap();
            leaks += scan_leakage(
                &bundle.text,
                &labeled.instance.names[labeled.instance.queried],
                setting,
            )
            .len();
        }
    }
    assert_eq!(leaks, 0, "leakage scanner must find nothing");
    println!(
        "ACCEPTANCE 04 narrative independence: PASS (1000 pairs, equal truths, \
         0 leakage hits over 2000 prompts)"
    );
}

/// Criterion 5: generation parity. The default grid enumerates
/// deterministically and consistently; its documented count (1,320) is
/// surfaced against the reference count without asserting reproduction of
/// the original enumeration. The third rung reproduces byte-identical
/// 374-instance sets from a fixed seed, every instance upper-bounded at 2
/// with k <= 2 and a silent queried diagonal.
#[test]
fn criterion_05_generation_parity() {
    let (settings, pool) = fixtures();
    let grid = GenerationGrid::paper();

    let jsonl = |instances: &[PuzzleInstance]| {
        instances
            .iter()
            .map(|i| serde_json::to_string(&InstanceRecord::from(i)).unwrap())
            .collect::<Vec<_>>()
            .join("\n")
    };

    for rung in [Rung::I, Rung::II] {
        let a = enumerate_rung_grid(&grid, rung, &settings, &pool, 0).unwrap();
        let b = enumerate_rung_grid(&grid, rung, &settings, &pool, 0).unwrap();
        assert_eq!(jsonl(&a), jsonl(&b), "rung {rung} enumeration must be deterministic");
        let mut ids: Vec<&str> = a.iter().map(|i| i.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), a.len(), "duplicate ids in rung {rung}");
        // Documented count of the default grid; the reference value is
        // 1,320 and the comparison is reported rather than asserted.
        assert_eq!(a.len(), 1320, "default-grid count changed");
        println!(
            "  rung {rung}: {} instances (reference count: 1320, match: {})",
            a.len(),
            a.len() == 1320
        );
    }

    let rung3_grid = Rung3Grid::paper();
    let a = sample_rung3(374, 20_26, &rung3_grid, &settings, &pool).unwrap();
    let b = sample_rung3(374, 20_26, &rung3_grid, &settings, &pool).unwrap();
    assert_eq!(jsonl(&a), jsonl(&b), "rung III sampling must be byte-identical per seed");
    assert_eq!(a.len(), 374);
    for inst in &a {
        assert_eq!(inst.bound.bound_type, BoundType::Upper);
        assert_eq!(inst.bound.value, 2);
        assert!(inst.k <= 2, "{}: k={} exceeds the announced bound", inst.id, inst.k);
        assert!(!inst.obs.observes(0, 0), "{}: queried agent self-observes", inst.id);
    }
    println!(
        "ACCEPTANCE 05 generation parity: PASS (rungs I/II deterministic at 1320; \
         rung III byte-identical at 374 with upper bound 2)"
    );
}

/// Criterion 6: the majority baseline computed from generated rung I labels
/// matches an independently tallied 20-instance subsample exactly;
/// closeness to the reference 41.7% is reported, not asserted.
#[test]
fn criterion_06_majority_baseline() {
    let (settings, pool) = fixtures();
    let instances = enumerate_rung_grid(&GenerationGrid::paper(), Rung::I, &settings, &pool, 0)
        .unwrap();
    let (labeled, _) = attach_ground_truth(&instances).unwrap();

    // Hand-check the first 20 labels against the brute simulator, tallying
    // by explicit count.
    let subsample = &labeled[..20];
    let (mut yes, mut no, mut unknown) = (0usize, 0usize, 0usize);
    for l in subsample {
        let inst = &l.instance;
        let (brute_label, _) = brute_solve(
            inst.n,
            inst.obs.rows(),
            inst.statuses.statuses(),
            inst.bound.bound_type == BoundType::Lower,
            inst.bound.value as usize,
            inst.queried,
            inst.round,
        );
        assert_eq!(l.ground_truth, brute_label, "{}: solver and brute disagree", inst.id);
        match brute_label {
            Yes => yes += 1,
            No => no += 1,
            Unknown => unknown += 1,
        }
    }
    let hand_majority = yes.max(no).max(unknown);
    let sub_labels: Vec<Answer> = subsample.iter().map(|l| l.ground_truth).collect();
    let sub_baseline = majority_baseline(&sub_labels).unwrap();
    assert_eq!(
        sub_baseline.accuracy,
        hand_majority as f64 / 20.0,
        "subsample baseline must equal the hand tally exactly \
         (hand counts: yes={yes} no={no} unknown={unknown})"
    );

    let labels: Vec<Answer> = labeled.iter().map(|l| l.ground_truth).collect();
    let full = majority_baseline(&labels).unwrap();
    println!(
        "ACCEPTANCE 06 majority baseline: PASS (20-sample tally exact; full rung I \
         majority {:?} at {:.4} vs reference 0.417, reported not asserted)",
        full.label, full.accuracy
    );
}

/// Criterion 7: grader conformance over the post-processing rules:
/// first-non-empty-line selection, trailing period, whitespace, curly and
/// straight apostrophes, empty input, and explanation-on-first-line
/// rejection.
#[test]
fn criterion_07_grader_conformance() {
    let config = GraderConfig::default();
    let cases: &[(&str, Verdict)] = &[
        // First non-empty line selection.
        ("\n\n  \nYes\nexplanation follows", Verdict::Yes),
        ("No\nYes", Verdict::No),
        // Trailing period.
        ("Yes.", Verdict::Yes),
        ("No.", Verdict::No),
        ("I don't know.", Verdict::Unknown),
        ("Yes..", Verdict::Invalid),
        // Whitespace.
        ("   Yes   ", Verdict::Yes),
        ("\tNo\t", Verdict::No),
        // Apostrophe variants.
        ("I don't know", Verdict::Unknown),
        ("I don\u{2019}t know", Verdict::Unknown),
        ("I don\u{2019}t know.", Verdict::Unknown),
        // Empty input.
        ("", Verdict::Invalid),
        ("   \n \t \n", Verdict::Invalid),
        // Explanation on the first line is rejected.
        ("Yes, because the announcement rules it out", Verdict::Invalid),
        ("The answer is Yes", Verdict::Invalid),
        ("I think I don't know", Verdict::Invalid),
        // Unaccepted literals.
        ("Maybe", Verdict::Invalid),
        ("yes", Verdict::Invalid),
        ("NO", Verdict::Invalid),
        ("I dont know", Verdict::Invalid),
    ];
    let mut passed = 0;
    for (raw, expected) in cases {
        let parsed = parse_response(raw, &config);
        assert_eq!(parsed.verdict, *expected, "input {raw:?}");
        passed += 1;
    }
    println!("ACCEPTANCE 07 grader conformance: PASS ({passed}/{} cases)", cases.len());
}

/// Criterion 8: end-to-end oracle closure over every generated rung:
/// render -> respond -> parse -> score gives accuracy 1.000 with zero
/// invalid responses, within 60 seconds at the full ten-agent scale.
#[test]
fn criterion_08_oracle_closure() {
    let started = Instant::now();
    let (settings, pool) = fixtures();
    let mut all = enumerate_rung_grid(&GenerationGrid::paper(), Rung::I, &settings, &pool, 0)
        .unwrap();
    all.extend(enumerate_rung_grid(&GenerationGrid::paper(), Rung::II, &settings, &pool, 0).unwrap());
    all.extend(sample_rung3(374, 0, &Rung3Grid::paper(), &settings, &pool).unwrap());
    let total = all.len();
    assert_eq!(total, 1320 + 1320 + 374);

    let (labeled, _) = attach_ground_truth(&all).unwrap();
    let records = run_eval(&labeled, &ResponderSpec::Oracle, &EvalOptions::default()).unwrap();
    assert_eq!(records.len(), total);

    let correct = records.iter().filter(|r| r.score == Score::Correct).count();
    let invalid = records.iter().filter(|r| r.invalid).count();
    assert_eq!(correct, total, "oracle accuracy must be exactly 1.000");
    assert_eq!(invalid, 0, "oracle must produce zero invalid responses");
    // Every record's verdict equals the stored ground truth.
    for record in &records {
        assert_eq!(record.verdict.as_answer(), Some(record.truth), "{}", record.instance_id);
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}, budget 60 s");
    println!(
        "ACCEPTANCE 08 oracle closure: PASS ({total} instances across three rungs, \
         accuracy 1.000, 0 invalid, {:.1} s)",
        elapsed.as_secs_f64()
    );
}

/// Criterion 9: external-model accuracies, chain-of-thought annotation
/// rates, and proprietary-model behavior are NOT reproducible at desk
/// scale and are not asserted anywhere in this suite. The substitute is
/// the property suites above plus this scripted end-to-end replay against
/// precomputed scores.
#[test]
fn criterion_09_desk_scale_substitute() {
    let (settings, pool) = fixtures();
    let grid = GenerationGrid { n: 4, k_max: 4, j_max: 4, ..GenerationGrid::paper() };
    let instances = enumerate_rung_grid(&grid, Rung::I, &settings, &pool, 0).unwrap();
    let (labeled, _) = attach_ground_truth(&instances).unwrap();

    // Fixture replies with verdicts fixed by the case table, not by the
    // grader under test.
    let case_table: &[(&str, Verdict)] = &[
        ("Yes", Verdict::Yes),
        ("No", Verdict::No),
        ("I don't know", Verdict::Unknown),
        ("I don\u{2019}t know.", Verdict::Unknown),
        ("Probably yes", Verdict::Invalid),
        ("", Verdict::Invalid),
    ];
    let dir = tempfile::tempdir().unwrap();
    let fixture_path = dir.path().join("replies.jsonl");
    let fixtures_jsonl: Vec<RawResponse> = labeled
        .iter()
        .enumerate()
        .map(|(i, l)| RawResponse {
            id: l.instance.id.clone(),
            response: case_table[i % case_table.len()].0.to_string(),
        })
        .collect();
    write_raw_responses(&fixture_path, &FileMeta::new(None, None), &fixtures_jsonl).unwrap();

    // Precompute expected scores from the table and the stored labels.
    let expected: Vec<Score> = labeled
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let verdict = case_table[i % case_table.len()].1;
            match verdict.as_answer() {
                None => Score::Invalid,
                Some(a) if a == l.ground_truth => Score::Correct,
                Some(_) => Score::Incorrect,
            }
        })
        .collect();

    let records = run_eval(
        &labeled,
        &ResponderSpec::Scripted(fixture_path),
        &EvalOptions::default(),
    )
    .unwrap();
    assert_eq!(records.len(), expected.len());
    for (record, want) in records.iter().zip(&expected) {
        assert_eq!(record.score, *want, "{}", record.instance_id);
    }

    println!(
        "ACCEPTANCE 09 desk-scale substitute: PASS (external-model accuracies and \
         chain-of-thought annotation rates are out of scope by design; scripted \
         replay of {} fixture replies matched precomputed scores exactly)",
        records.len()
    );
}
