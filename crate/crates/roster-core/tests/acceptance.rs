//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measurements. Run with
//! `cargo test -p roster-core --test acceptance -- --nocapture`.

use std::fs;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roster_core::acs::{run_acs, AcsParams, StrengthMatrix};
use roster_core::boa::{estimate, run_boa, BoaParams};
use roster_core::generator::{generate, GenSpec};
use roster_core::model::{feasible_sets, load_instance_str, Instance};
use roster_core::oracle::{exact_optimum, exhaustive_rule_strings, OracleLimits};
use roster_core::report::{summarize, Category, RunRecord};
use roster_core::rules::{DecodeParams, RuleString};
use roster_core::schedule::{is_feasible, preference_cost};

fn tiny() -> Instance {
    load_instance_str(include_str!("data/tiny.json")).unwrap()
}

/// Criterion 1: the strength-matrix worked example reproduces all three
/// matrices bit-exactly (initial strength 10, reward 3, strings 1-4-3
/// then 4-2-3, both treated as improvements).
#[test]
fn criterion_1_strength_update_worked_example_is_exact() {
    let started = Instant::now();

    let mut sm = StrengthMatrix::new(3, 10.0, 1.0).unwrap();
    assert_eq!(sm.rows(), vec![[10.0; 4]; 3]);

    sm.update(&RuleString::from_codes(&[1, 4, 3]).unwrap(), true, 3.0)
        .unwrap();
    assert_eq!(
        sm.rows(),
        vec![
            [11.0, 10.0, 10.0, 10.0],
            [10.0, 10.0, 10.0, 11.0],
            [10.0, 10.0, 11.0, 10.0],
        ]
    );

    sm.update(&RuleString::from_codes(&[4, 2, 3]).unwrap(), true, 3.0)
        .unwrap();
    assert_eq!(
        sm.rows(),
        vec![
            [11.0, 10.0, 10.0, 11.0],
            [10.0, 11.0, 10.0, 11.0],
            [10.0, 10.0, 12.0, 10.0],
        ]
    );

    println!(
        "ACCEPTANCE 1 PASS: strength-matrix worked example exact ({:?})",
        started.elapsed()
    );
}

/// Criterion 2: conditional-probability counting matches the frozen
/// three-string example at 1e-12, and every estimated distribution row
/// sums to 1 within 1e-9 across 1000 randomized cases.
#[test]
fn criterion_2_cpt_counting_and_normalization() {
    let selection = vec![
        RuleString::from_codes(&[1, 4, 3]).unwrap(),
        RuleString::from_codes(&[1, 2, 3]).unwrap(),
        RuleString::from_codes(&[4, 2, 3]).unwrap(),
    ];
    let net = estimate(&selection, 0.0).unwrap();

    let expected_root = [2.0 / 3.0, 0.0, 0.0, 1.0 / 3.0];
    for (got, want) in net.root.iter().zip(expected_root) {
        assert!((got - want).abs() <= 1e-12, "root {got} vs {want}");
    }
    // P(rule 2 at position 2 | rule 1 at position 1) = 1/2.
    let got = net.cond[0][0][1];
    assert!((got - 0.5).abs() <= 1e-12, "cond {got} vs 0.5");

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let alphas = [0.0, 0.5, 1.0, 10.0];
    for case in 0..1000usize {
        let n = rng.gen_range(1..=6);
        let count = rng.gen_range(1..=8);
        let selected: Vec<RuleString> = (0..count)
            .map(|_| RuleString::uniform(n, &mut rng))
            .collect();
        let net = estimate(&selected, alphas[case % alphas.len()]).unwrap();
        net.check()
            .unwrap_or_else(|e| panic!("case {case}: {e}"));
    }

    println!("ACCEPTANCE 2 PASS: CPT counting exact, 1000 randomized cases normalized");
}

/// Criterion 3: the exact optimum of the desk-scale instance is 0 over
/// its 27 assignments; BOA (pop 20, 50 iterations) reaches it in at
/// least 18 of 20 seeds and ACS (500 iterations) in at least 15 of 20,
/// all within 5 seconds.
#[test]
fn criterion_3_desk_scale_oracle_equivalence() {
    let started = Instant::now();
    let inst = tiny();

    let sets = feasible_sets(&inst).unwrap();
    let states: usize = sets.iter().map(Vec::len).product();
    assert_eq!(states, 27);

    let (sched, optimum) = exact_optimum(&inst, 200.0, &OracleLimits::default()).unwrap();
    assert_eq!(optimum, 0.0);
    assert_eq!(sched.assignment, vec![1, 2, 3]);

    let mut boa_hits = 0;
    for seed in 0..20u64 {
        let mut params = BoaParams {
            pop_size: 20,
            select_count: 10,
            offspring_count: 10,
            max_iterations: 50,
            seed,
            ..BoaParams::defaults(inst.grades)
        };
        params.decode.seed = seed;
        if run_boa(&inst, &params).unwrap().best_fitness == optimum {
            boa_hits += 1;
        }
    }
    assert!(boa_hits >= 18, "BOA hit the optimum in only {boa_hits}/20 seeds");

    let mut acs_hits = 0;
    for seed in 0..20u64 {
        let mut params = AcsParams {
            max_iterations: 500,
            seed,
            ..AcsParams::defaults(inst.grades)
        };
        params.decode.seed = seed;
        if run_acs(&inst, &params).unwrap().best_fitness == optimum {
            acs_hits += 1;
        }
    }
    assert!(acs_hits >= 15, "ACS hit the optimum in only {acs_hits}/20 seeds");

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "exceeded 5 s: {elapsed:?}");
    println!(
        "ACCEPTANCE 3 PASS: optimum 0 over 27 states; BOA {boa_hits}/20, ACS {acs_hits}/20 ({elapsed:?})"
    );
}

/// Criterion 4: on 20 generated ward-scale instances (30 nurses, 3
/// grades, 126 patterns, tightness 0.9), BOA finds a feasible schedule
/// in every one of 20 seeds within a 10,000-evaluation budget, and no
/// run exceeds 20 seconds.
#[test]
fn criterion_4_feasibility_at_ward_scale() {
    let started = Instant::now();
    let instances: Vec<Instance> = (0..20u64)
        .map(|seed| generate(&GenSpec::new(30, 3, seed)).unwrap().instance)
        .collect();
    for inst in &instances {
        let m = inst.pattern_count();
        assert!((100..160).contains(&m), "expected ~100 patterns, got {m}");
    }

    let outcomes: Mutex<Vec<(usize, u64, bool, Duration)>> = Mutex::new(Vec::new());
    let next: Mutex<usize> = Mutex::new(0);
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(4)
        .min(instances.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().unwrap();
                    let idx = *guard;
                    *guard += 1;
                    idx
                };
                if idx >= instances.len() {
                    break;
                }
                let inst = &instances[idx];
                for seed in 0..20u64 {
                    let run_started = Instant::now();
                    let mut params = BoaParams::defaults(inst.grades);
                    params.eval_budget = 10_000;
                    params.seed = seed;
                    params.decode.seed = seed;
                    let result = run_boa(inst, &params).unwrap();
                    let feasible = is_feasible(inst, &result.best_schedule).unwrap();
                    assert!(result.evaluations <= 10_000);
                    outcomes
                        .lock()
                        .unwrap()
                        .push((idx, seed, feasible, run_started.elapsed()));
                }
            });
        }
    });

    let outcomes = outcomes.into_inner().unwrap();
    assert_eq!(outcomes.len(), 400);
    let infeasible: Vec<_> = outcomes.iter().filter(|(.., f, _)| !f).collect();
    assert!(
        infeasible.is_empty(),
        "{} of 400 runs ended infeasible: {infeasible:?}",
        infeasible.len()
    );
    let slowest = outcomes.iter().map(|(.., d)| *d).max().unwrap();
    assert!(
        slowest < Duration::from_secs(20),
        "slowest run {slowest:?} exceeds the 20 s envelope"
    );

    println!(
        "ACCEPTANCE 4 PASS: 400/400 ward-scale runs feasible within 10k evals; slowest run {slowest:?}, total {:?}",
        started.elapsed()
    );
}

/// Criterion 5: on 200 random instances with up to 4 nurses, the exact
/// optimum bounds the rule-string oracle, which bounds both solvers;
/// decoded schedules always satisfy the one-feasible-pattern-per-nurse
/// constraint; and fitness equals preference cost exactly on feasible
/// schedules.
#[test]
fn criterion_5_dominance_properties() {
    let limits = OracleLimits::default();
    for case in 0..200u64 {
        let nurses = 1 + (case % 4) as u32;
        let day_len = if nurses == 4 { 1 } else { 1 + (case % 2) as u32 };
        let mut spec = GenSpec::new(nurses, 1 + (case % 2) as u32, 1_000 + case);
        spec.day_lengths = vec![day_len];
        spec.night_lengths = vec![1];
        spec.night_fraction = 0.25;
        spec.combined_fraction = 0.25;
        spec.tightness = if case % 2 == 0 { 1.0 } else { 0.6 };
        let inst = generate(&spec).unwrap().instance;
        let sets = feasible_sets(&inst).unwrap();

        let mut decode_params = DecodeParams::for_grades(inst.grades);
        decode_params.seed = case;

        let (_, exact) = exact_optimum(&inst, decode_params.w_demand, &limits).unwrap();
        let (_, reachable) = exhaustive_rule_strings(&inst, &decode_params, &limits).unwrap();
        assert!(exact <= reachable, "case {case}: {exact} > {reachable}");

        let mut boa = BoaParams {
            pop_size: 8,
            select_count: 4,
            offspring_count: 4,
            max_iterations: 5,
            seed: case,
            ..BoaParams::defaults(inst.grades)
        };
        boa.decode = decode_params.clone();
        let mut acs = AcsParams {
            max_iterations: 20,
            seed: case,
            ..AcsParams::defaults(inst.grades)
        };
        acs.decode = decode_params.clone();

        for result in [run_boa(&inst, &boa).unwrap(), run_acs(&inst, &acs).unwrap()] {
            assert!(
                reachable <= result.best_fitness,
                "case {case}: oracle {reachable} > solver {}",
                result.best_fitness
            );
            for (idx, &pattern_id) in result.best_schedule.assignment.iter().enumerate() {
                assert!(sets[idx].contains(&pattern_id), "case {case}: constraint violated");
            }
            let cost = preference_cost(&inst, &result.best_schedule).unwrap();
            let feasible = is_feasible(&inst, &result.best_schedule).unwrap();
            assert!(result.best_fitness >= cost);
            assert_eq!(result.best_fitness == cost, feasible, "case {case}");
        }
    }
    println!("ACCEPTANCE 5 PASS: dominance and structure held on 200 random instances");
}

/// Criterion 6: rerunning any command with identical flags and seeds
/// produces byte-identical CSV (and stdout) output.
#[test]
fn criterion_6_csv_output_is_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let instance_path = dir.path().join("tiny.json");
    fs::write(&instance_path, include_str!("data/tiny.json")).unwrap();
    let bin = env!("CARGO_BIN_EXE_roster");

    let mut csv_paths = Vec::new();
    for algo in ["boa", "acs"] {
        let out = dir.path().join(format!("{algo}.csv"));
        let run = || {
            let output = Command::new(bin)
                .args([
                    "solve",
                    "--algo",
                    algo,
                    "--instance",
                    instance_path.to_str().unwrap(),
                    "--seed",
                    "7",
                    "--runs",
                    "3",
                    "--iters",
                    "25",
                    "--out",
                    out.to_str().unwrap(),
                ])
                .output()
                .unwrap();
            assert!(output.status.success(), "{output:?}");
            (output.stdout, fs::read(&out).unwrap())
        };
        let (stdout_a, csv_a) = run();
        let (stdout_b, csv_b) = run();
        assert_eq!(stdout_a, stdout_b, "{algo}: stdout differs between reruns");
        assert_eq!(csv_a, csv_b, "{algo}: CSV differs between reruns");
        csv_paths.push(out);
    }

    let report = || {
        let output = Command::new(bin)
            .arg("report")
            .arg("--in")
            .args(csv_paths.iter().map(|p| p.to_str().unwrap()))
            .output()
            .unwrap();
        assert!(output.status.success(), "{output:?}");
        output.stdout
    };
    assert_eq!(report(), report(), "report output differs between reruns");

    let generate_file = |path: &std::path::Path| {
        let output = Command::new(bin)
            .args([
                "generate",
                "--nurses",
                "6",
                "--grades",
                "2",
                "--seed",
                "9",
                "--out",
                path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(output.status.success(), "{output:?}");
        fs::read(path).unwrap()
    };
    let g1 = generate_file(&dir.path().join("a.json"));
    let g2 = generate_file(&dir.path().join("b.json"));
    assert_eq!(g1, g2, "generated instances differ between reruns");

    println!("ACCEPTANCE 6 PASS: solve/report/generate outputs byte-identical across reruns");
}

/// Criterion 7: best-ever fitness trajectories are non-increasing for
/// every run of both solvers across a desk-scale suite; the final means
/// are reported side by side (no pass/fail on the comparison itself).
#[test]
fn criterion_7_learning_trajectories_are_monotone() {
    let mut boa_finals = Vec::new();
    let mut acs_finals = Vec::new();

    for inst_seed in 0..10u64 {
        let mut spec = GenSpec::new(8, 2, 400 + inst_seed);
        spec.day_lengths = vec![2, 3];
        spec.night_lengths = vec![2];
        spec.night_fraction = 0.2;
        spec.combined_fraction = 0.2;
        let inst = generate(&spec).unwrap().instance;

        for seed in 0..3u64 {
            let mut boa = BoaParams {
                pop_size: 16,
                select_count: 8,
                offspring_count: 8,
                max_iterations: 40,
                seed,
                ..BoaParams::defaults(inst.grades)
            };
            boa.decode.seed = seed;
            let result = run_boa(&inst, &boa).unwrap();
            for pair in result.history.windows(2) {
                assert!(
                    pair[1].best <= pair[0].best,
                    "BOA best-ever increased on instance {inst_seed}, seed {seed}"
                );
            }
            boa_finals.push(result.best_fitness);

            let mut acs = AcsParams {
                max_iterations: 200,
                seed,
                ..AcsParams::defaults(inst.grades)
            };
            acs.decode.seed = seed;
            let result = run_acs(&inst, &acs).unwrap();
            for pair in result.history.windows(2) {
                assert!(
                    pair[1].best <= pair[0].best,
                    "ACS best-ever increased on instance {inst_seed}, seed {seed}"
                );
            }
            acs_finals.push(result.best_fitness);
        }
    }

    let mean = |values: &[f64]| values.iter().sum::<f64>() / values.len() as f64;
    println!(
        "ACCEPTANCE 7 PASS: all trajectories non-increasing; reported final means over the suite: BOA {:.2} vs ACS {:.2}",
        mean(&boa_finals),
        mean(&acs_finals)
    );
}

/// Criterion 8: synthetic run records at the optimum, optimum+3,
/// optimum+4 and an infeasible run map onto the four categories exactly.
#[test]
fn criterion_8_report_categories_match_definitions() {
    let optimum = 12.0;
    let records = vec![
        RunRecord::new("ward", "boa", 1, optimum, true, Some(optimum), None, 10),
        RunRecord::new("ward", "boa", 2, optimum + 3.0, true, Some(optimum), None, 10),
        RunRecord::new("ward", "boa", 3, optimum + 4.0, true, Some(optimum), None, 10),
        RunRecord::new("ward", "boa", 4, 800.0, false, Some(optimum), None, 10),
    ];
    assert_eq!(records[0].category, Category::Optimal);
    assert_eq!(records[1].category, Category::WithinThree);
    assert_eq!(records[2].category, Category::FeasibleNonOptimal);
    assert_eq!(records[3].category, Category::Infeasible);

    let rows = summarize(&records);
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(
        (row.optimal, row.within_three, row.feasible_non_optimal, row.infeasible),
        (1, 1, 1, 1)
    );

    println!("ACCEPTANCE 8 PASS: category boundaries match the near-optimality definitions");
}
