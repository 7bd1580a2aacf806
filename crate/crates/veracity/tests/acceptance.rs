//! Acceptance suite: one test per release criterion, each printing a
//! single PASS/FAIL line (run with `cargo test --test acceptance -- --nocapture`).

// Ordering checks are written as `!(a < b)` on purpose: the negated form
// also fails when either side is NaN, which a flipped comparison would miss.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::time::Instant;

use veracity::harness::{
    evaluate_bytes, experiment, paired_t_test, simulate, EvalOptions, ExperimentOptions,
};
use veracity::outcome::{combine, CombinerMode};
use veracity::sdt::{a_prime, b_double_prime, OutcomeKind, OutcomeMass};
use veracity::synthesis::{expected_matrix, CasePreset};

fn verdict(name: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("PASS: {name}");
    } else {
        println!("FAIL: {name}");
        for f in &failures {
            println!("  - {f}");
        }
        panic!("{name}: {} check(s) failed", failures.len());
    }
}

fn approx(actual: f64, expected: f64, tol: f64, what: &str, failures: &mut Vec<String>) {
    if (actual - expected).abs() > tol {
        failures.push(format!("{what}: got {actual}, want {expected} +/- {tol}"));
    }
}

#[test]
fn criterion_formula_fidelity() {
    let start = Instant::now();
    let mut failures = Vec::new();

    approx(
        a_prime(0.9, 0.2).unwrap(),
        0.913194,
        1e-6,
        "a_prime(0.9, 0.2)",
        &mut failures,
    );
    approx(
        b_double_prime(0.9, 0.2).unwrap().unwrap(),
        -0.384615,
        1e-6,
        "b_double_prime(0.9, 0.2)",
        &mut failures,
    );

    for i in 0..=100 {
        for j in 0..=100 {
            let h = f64::from(i) / 100.0;
            let f = f64::from(j) / 100.0;
            let a = a_prime(h, f).unwrap();
            if !(0.5..=1.0 + 1e-12).contains(&a) {
                failures.push(format!("a_prime({h}, {f}) = {a} outside [0.5, 1]"));
            }
            let swapped = a_prime(f, h).unwrap();
            if (a - swapped).abs() > 1e-12 {
                failures.push(format!("a_prime asymmetric at ({h}, {f})"));
            }
        }
    }

    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 1.0 {
        failures.push(format!("runtime {elapsed:?} >= 1 s"));
    }
    verdict(
        "formula fidelity (A' and B''D reference values, grid range and symmetry)",
        failures,
    );
}

#[test]
fn criterion_combiner_table() {
    use OutcomeKind::{CorrectRejection as CR, FalseAlarm as FA, Hit as H, Miss as M};
    let start = Instant::now();
    let mut failures = Vec::new();

    let pure = OutcomeMass::pure;
    let split = OutcomeMass::split;
    // The 16 fidelity/attunement conditions with their expected veracity
    // masses: (fidelity, attunement, restrictive, permissive, balanced).
    let fixture: [(
        OutcomeKind,
        OutcomeKind,
        OutcomeMass,
        OutcomeMass,
        OutcomeMass,
    ); 16] = [
        (H, H, pure(H), pure(H), pure(H)),
        (H, M, pure(M), pure(H), split(H, M)),
        (H, FA, pure(FA), pure(H), split(H, FA)),
        (H, CR, split(H, CR), split(H, CR), split(H, CR)),
        (M, H, pure(M), pure(H), split(H, M)),
        (M, M, pure(M), pure(M), pure(M)),
        (M, FA, split(M, FA), split(M, FA), split(M, FA)),
        (M, CR, pure(M), pure(CR), split(CR, M)),
        (FA, H, pure(FA), pure(H), split(H, FA)),
        (FA, M, split(FA, M), split(FA, M), split(FA, M)),
        (FA, FA, pure(FA), pure(FA), pure(FA)),
        (FA, CR, pure(FA), pure(CR), split(CR, FA)),
        (CR, H, split(CR, H), split(CR, H), split(CR, H)),
        (CR, M, pure(M), pure(CR), split(CR, M)),
        (CR, FA, pure(FA), pure(CR), split(CR, FA)),
        (CR, CR, pure(CR), pure(CR), pure(CR)),
    ];

    for (fid, att, restrictive, permissive, balanced) in fixture {
        let expected = [
            (CombinerMode::Restrictive, restrictive),
            (CombinerMode::Permissive, permissive),
            (CombinerMode::Balanced, balanced),
        ];
        for (mode, want) in expected {
            let got = combine(fid, att, mode);
            if got != want {
                failures.push(format!(
                    "combine({fid:?}, {att:?}, {mode}) = {got:?}, want {want:?}"
                ));
            }
        }
    }

    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 1.0 {
        failures.push(format!("runtime {elapsed:?} >= 1 s"));
    }
    verdict("combiner table (48 cells over the 16 conditions)", failures);
}

#[test]
fn criterion_case_ordering_at_desk_scale() {
    let start = Instant::now();
    let mut failures = Vec::new();

    let result = experiment(&ExperimentOptions {
        replicates: 30,
        n_records: 1000,
        base_seed: 2024,
        modes: CombinerMode::ALL.to_vec(),
        like_threshold: 3,
    })
    .expect("experiment runs");

    let mean = |case: usize, mode: &str| -> f64 {
        result.cases[case].veracity[mode]
            .a_prime
            .expect("defined at n=1000")
    };
    for mode in ["restrictive", "permissive"] {
        let a: Vec<f64> = (0..4).map(|c| mean(c, mode)).collect();
        for (lo, hi, label) in [
            (0, 1, "case1 < case2"),
            (0, 2, "case1 < case3"),
            (1, 3, "case2 < case4"),
            (2, 3, "case3 < case4"),
        ] {
            if !(a[lo] < a[hi]) {
                failures.push(format!(
                    "{mode} veracity A' ordering {label} violated: {:.4} vs {:.4}",
                    a[lo], a[hi]
                ));
            }
        }
    }

    let fid: Vec<f64> = (0..4)
        .map(|c| result.cases[c].fidelity.a_prime.expect("defined"))
        .collect();
    let att: Vec<f64> = (0..4)
        .map(|c| result.cases[c].attunement.a_prime.expect("defined"))
        .collect();
    for (hi, lo) in [(1, 0), (1, 2), (3, 0), (3, 2)] {
        if !(fid[hi] > fid[lo]) {
            failures.push(format!(
                "fidelity A' not higher in case{} than case{}: {:.4} vs {:.4}",
                hi + 1,
                lo + 1,
                fid[hi],
                fid[lo]
            ));
        }
    }
    for (hi, lo) in [(2, 0), (2, 1), (3, 0), (3, 1)] {
        if !(att[hi] > att[lo]) {
            failures.push(format!(
                "attunement A' not higher in case{} than case{}: {:.4} vs {:.4}",
                hi + 1,
                lo + 1,
                att[hi],
                att[lo]
            ));
        }
    }

    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 30.0 {
        failures.push(format!("runtime {elapsed:?} >= 30 s"));
    }
    verdict(
        "case ordering at desk scale (experiment, 30 replicates x 1000 records)",
        failures,
    );
}

#[test]
fn criterion_permissive_dominance() {
    let mut failures = Vec::new();
    let opts = EvalOptions::default();

    for preset in CasePreset::ALL {
        for seed in 0..5 {
            let (report, _) =
                simulate(&preset.params(2000, seed), Some(preset), &opts).expect("simulate runs");
            let rate = |mode: &str| {
                let m = &report.veracity[mode].metrics;
                (m.hr, m.far)
            };
            let (hr_r, far_r) = rate("restrictive");
            let (hr_b, far_b) = rate("balanced");
            let (hr_p, far_p) = rate("permissive");
            if let (Some(p), Some(b), Some(r)) = (hr_p, hr_b, hr_r) {
                if !(p >= b && b >= r) {
                    failures.push(format!(
                        "{preset} seed {seed}: HR ordering violated: perm {p:.4}, bal {b:.4}, restr {r:.4}"
                    ));
                }
            }
            if let (Some(p), Some(b), Some(r)) = (far_p, far_b, far_r) {
                if !(p <= b && b <= r) {
                    failures.push(format!(
                        "{preset} seed {seed}: FAR ordering violated: perm {p:.4}, bal {b:.4}, restr {r:.4}"
                    ));
                }
            }
        }
    }

    let result = experiment(&ExperimentOptions {
        replicates: 10,
        n_records: 500,
        base_seed: 7,
        modes: CombinerMode::ALL.to_vec(),
        like_threshold: 3,
    })
    .expect("experiment runs");
    if !(result.t_test.mean_difference > 0.0) {
        failures.push(format!(
            "t-test mean difference (permissive - restrictive) not positive: {} (t = {}, p = {})",
            result.t_test.mean_difference,
            result.t_test.t_statistic,
            result.t_test.p_value_two_sided
        ));
    }
    println!(
        "  (t-test: t = {:.4}, df = {}, p = {:.4}, n = {})",
        result.t_test.t_statistic,
        result.t_test.degrees_of_freedom,
        result.t_test.p_value_two_sided,
        result.t_test.n_pairs
    );
    verdict(
        "permissive dominance (rate orderings and t-test direction)",
        failures,
    );
}

#[test]
fn criterion_oracle_equivalence() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let opts = EvalOptions::default();
    let n = 10_000usize;

    for preset in CasePreset::ALL {
        let expected = expected_matrix(&preset.params(n, 0), &CombinerMode::ALL).unwrap();
        for seed in 200..205 {
            let (report, _) =
                simulate(&preset.params(n, seed), Some(preset), &opts).expect("simulate runs");

            let mut dims: BTreeMap<
                String,
                (
                    &veracity::report::MetricBlock,
                    &veracity::synthesis::ExpectedDimension,
                ),
            > = BTreeMap::new();
            dims.insert("fidelity".into(), (&report.fidelity, &expected.fidelity));
            dims.insert(
                "attunement".into(),
                (&report.attunement, &expected.attunement),
            );
            for mode in CombinerMode::ALL {
                dims.insert(
                    format!("veracity_{mode}"),
                    (&report.veracity[mode.label()], &expected.veracity[&mode]),
                );
            }

            for (name, (block, exp)) in dims {
                let count = block.matrix.record_count as f64;
                let cells = [
                    (block.matrix.hits, OutcomeKind::Hit),
                    (block.matrix.misses, OutcomeKind::Miss),
                    (block.matrix.false_alarms, OutcomeKind::FalseAlarm),
                    (
                        block.matrix.correct_rejections,
                        OutcomeKind::CorrectRejection,
                    ),
                ];
                for (observed, kind) in cells {
                    let proportion = observed / count;
                    let want = exp.mass.component(kind);
                    if (proportion - want).abs() > 0.02 {
                        failures.push(format!(
                            "{preset} seed {seed} {name} {kind:?}: proportion {proportion:.4} vs expected {want:.4}"
                        ));
                    }
                }
                match (block.metrics.a_prime, exp.a_prime) {
                    (Some(got), Some(want)) => {
                        if (got - want).abs() > 0.03 {
                            failures.push(format!(
                                "{preset} seed {seed} {name} A': {got:.4} vs expected {want:.4}"
                            ));
                        }
                    }
                    (got, want) => failures.push(format!(
                        "{preset} seed {seed} {name} A' definedness mismatch: {got:?} vs {want:?}"
                    )),
                }
                // All presets use q0 = 1 - q1 per dimension, so expected
                // Fidelity/Attunement bias is 0. Fused veracity rates can sit
                // near 0/1 (e.g. permissive case4 at 0.99/0.01), where B''D is
                // too sample-sensitive for a fixed tolerance, so the zero-bias
                // check applies to the base dimensions only.
                if name == "fidelity" || name == "attunement" {
                    if let Some(b) = block.metrics.b_double_prime {
                        if b.abs() >= 0.1 {
                            failures
                                .push(format!("{preset} seed {seed} {name} B''D: |{b:.4}| >= 0.1"));
                        }
                    }
                }
            }
        }
    }

    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 60.0 {
        failures.push(format!("runtime {elapsed:?} >= 60 s"));
    }
    verdict(
        "oracle equivalence (empirical vs closed-form, 4 presets x 5 seeds x 10k)",
        failures,
    );
}

#[test]
fn criterion_t_test_contract() {
    let mut failures = Vec::new();
    // pairs with differences [1, 2, 3]
    let pairs = [(1.0, 0.0), (3.0, 1.0), (5.0, 2.0)];
    let result = paired_t_test(&pairs).expect("valid input");
    approx(
        result.t_statistic,
        3.4641,
        1e-4,
        "t statistic",
        &mut failures,
    );
    if result.degrees_of_freedom != 2 {
        failures.push(format!("df = {}, want 2", result.degrees_of_freedom));
    }
    approx(
        result.p_value_two_sided,
        0.0742,
        5e-4,
        "two-sided p",
        &mut failures,
    );
    verdict("t-test unit contract (differences [1,2,3])", failures);
}

#[test]
fn criterion_pipeline_identity() {
    let mut failures = Vec::new();
    let opts = EvalOptions::default();
    let preset = CasePreset::Case3;
    let params = preset.params(400, 99);
    let (simulated, dataset) = simulate(&params, Some(preset), &opts).expect("simulate runs");

    // Persist and re-evaluate through the file-ingestion path.
    let dir = tempfile::tempdir().expect("tempdir");
    let items_path = dir.path().join("items.tsv");
    let ratings_path = dir.path().join("ratings.tsv");
    let explanations_path = dir.path().join("explanations.jsonl");
    std::fs::write(&items_path, dataset.items_tsv()).unwrap();
    std::fs::write(&ratings_path, dataset.ratings_tsv()).unwrap();
    std::fs::write(&explanations_path, dataset.explanations_jsonl()).unwrap();

    let evaluated = evaluate_bytes(
        &std::fs::read(&items_path).unwrap(),
        &std::fs::read(&ratings_path).unwrap(),
        &std::fs::read(&explanations_path).unwrap(),
        ["items.tsv", "ratings.tsv", "explanations.jsonl"],
        &opts,
    )
    .expect("evaluate runs");

    // The generator params block exists only on the simulate side; every
    // other field must match exactly, digests included.
    let mut sim_json = serde_json::to_value(&simulated).unwrap();
    let mut eval_json = serde_json::to_value(&evaluated).unwrap();
    sim_json.as_object_mut().unwrap().remove("params");
    eval_json.as_object_mut().unwrap().remove("params");
    // evaluate has no seed provenance
    sim_json["inputs"].as_object_mut().unwrap().remove("seed");
    eval_json["inputs"].as_object_mut().unwrap().remove("seed");
    if sim_json != eval_json {
        failures.push("evaluate(persisted dataset) != simulate report".into());
    }
    verdict(
        "pipeline identity (persisted synthetic dataset re-evaluates identically)",
        failures,
    );
}

mod cli_determinism {
    use super::verdict;
    use std::process::Command;

    fn run(args: &[&str]) -> (Vec<u8>, i32) {
        let output = Command::new(env!("CARGO_BIN_EXE_veracity"))
            .args(args)
            .env("VERACITY_SEED", "31")
            .output()
            .expect("binary runs");
        (output.stdout, output.status.code().unwrap_or(-1))
    }

    #[test]
    fn criterion_determinism() {
        let mut failures = Vec::new();

        let dir = tempfile::tempdir().unwrap();
        let dataset = dir.path().join("data");
        let dataset_str = dataset.to_str().unwrap().to_string();

        // simulate twice (also persisting the dataset for evaluate/classify)
        let sim_args = [
            "simulate".to_string(),
            "--preset".into(),
            "case2".into(),
            "--records".into(),
            "300".into(),
            "--dataset-dir".into(),
            dataset_str.clone(),
        ];
        let sim_args: Vec<&str> = sim_args.iter().map(String::as_str).collect();
        let (sim_a, code) = run(&sim_args);
        assert_eq!(code, 0);
        let (sim_b, _) = run(&sim_args);
        if sim_a != sim_b {
            failures.push("simulate output differs across identical runs".into());
        }

        let items = dataset.join("items.tsv");
        let ratings = dataset.join("ratings.tsv");
        let explanations = dataset.join("explanations.jsonl");
        for (subcommand, format) in [
            ("evaluate", "json"),
            ("evaluate", "csv"),
            ("classify", "json"),
            ("classify", "csv"),
        ] {
            let args = [
                subcommand,
                "--items",
                items.to_str().unwrap(),
                "--ratings",
                ratings.to_str().unwrap(),
                "--explanations",
                explanations.to_str().unwrap(),
                "--format",
                format,
            ];
            let (a, code) = run(&args);
            assert_eq!(code, 0, "{subcommand} --format {format} failed");
            let (b, _) = run(&args);
            if a != b {
                failures.push(format!("{subcommand} --format {format} output differs"));
            }
        }

        for format in ["json", "csv"] {
            let args = [
                "experiment",
                "--replicates",
                "3",
                "--records",
                "100",
                "--format",
                format,
            ];
            let (a, code) = run(&args);
            assert_eq!(code, 0);
            let (b, _) = run(&args);
            if a != b {
                failures.push(format!("experiment --format {format} output differs"));
            }
        }

        verdict(
            "determinism (byte-identical CLI outputs across reruns)",
            failures,
        );
    }
}
