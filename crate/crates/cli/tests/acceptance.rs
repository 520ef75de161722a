//! Acceptance suite: every verification criterion at its stated tolerance,
//! one pass/fail line per criterion.
//!
//! Criteria 1-11 drive the library directly (the suite outcome is computed
//! once and shared across the per-criterion tests); criterion 12 exercises
//! the installed binary with different worker counts and compares output
//! bytes.

use std::sync::OnceLock;

use horolab::suite::{run_suite, SuiteOutcome};

fn shared_outcome() -> &'static SuiteOutcome {
    static OUTCOME: OnceLock<SuiteOutcome> = OnceLock::new();
    OUTCOME.get_or_init(|| run_suite(None).expect("suite runs"))
}

fn assert_criterion(index: usize) {
    let c = shared_outcome()
        .criteria
        .iter()
        .find(|c| c.index == index)
        .expect("criterion present");
    println!("{}", c.summary_line());
    for r in &c.reports {
        println!("    {}", r.summary_line());
        for (name, (value, tol)) in &r.residuals {
            println!("        {name}: {value:.3e} (tol {tol:.3e})");
        }
    }
    assert!(c.passed(), "{}", c.summary_line());
}

macro_rules! criterion_test {
    ($name:ident, $index:expr) => {
        #[test]
        fn $name() {
            assert_criterion($index);
        }
    };
}

criterion_test!(criterion_01_space_form_exactness, 1);
criterion_test!(criterion_02_rank_one_symmetric_model, 2);
criterion_test!(criterion_03_identity_suite, 3);
criterion_test!(criterion_04_bound_suite, 4);
criterion_test!(criterion_05_variation_formula, 5);
criterion_test!(criterion_06_lipschitz_estimate, 6);
criterion_test!(criterion_07_det_d_flow_invariance, 7);
criterion_test!(criterion_08_volume_suite, 8);
criterion_test!(criterion_09_hyperbolicity_suite, 9);
criterion_test!(criterion_10_equivalence_narrative, 10);
criterion_test!(criterion_11_bounded_asymptote_suite, 11);

#[test]
fn criterion_12_determinism_across_worker_counts() {
    // the in-process probe first
    assert_criterion(12);

    // then the real thing: the suite binary twice with different thread
    // counts; every CSV it emits must be byte-identical
    let bin = env!("CARGO_BIN_EXE_horolab");
    let dir1 = tempfile::tempdir().unwrap();
    let dir8 = tempfile::tempdir().unwrap();
    for (threads, dir) in [("1", dir1.path()), ("8", dir8.path())] {
        let status = std::process::Command::new(bin)
            .args([
                "suite",
                "paper-verification",
                "--threads",
                threads,
                "--format",
                "csv",
                "--out",
            ])
            .arg(dir)
            .status()
            .expect("binary runs");
        assert!(status.success(), "suite failed with --threads {threads}");
    }
    let mut names: Vec<String> = std::fs::read_dir(dir1.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    assert!(!names.is_empty(), "suite produced no CSV output");
    for name in &names {
        let a = std::fs::read(dir1.path().join(name)).unwrap();
        let b = std::fs::read(dir8.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between worker counts");
    }
    println!("PASS criterion 12: determinism ({} CSV files identical)", names.len());
}
