//! Golden-file cases shared by the `golden` and `acceptance` targets.
//!
//! Each case runs one command line in-process and renders exit code, stdout,
//! stderr and any written file into a single text block. `{out}` in an
//! argument is replaced by a path inside a fresh temporary directory, and that
//! directory is printed as `<tmp>` so the blocks do not depend on the machine.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use lagform_cli::run_command;

pub const CASES: &[(&str, &[&str])] = &[
    ("check_dz1dz2dz3", &["check", "tests/fixtures/dz1dz2dz3.form"]),
    ("check_almost_geometric", &["check", "tests/fixtures/almost_geometric.form"]),
    ("check_sample", &["check", "tests/fixtures/sample.form"]),
    ("check_outside", &["check", "tests/fixtures/outside.form"]),
    ("check_conjugate", &["check", "tests/fixtures/conjugate.form"]),
    ("check_dz1dz2", &["check", "tests/fixtures/dz1dz2.form"]),
    ("check_mixed", &["check", "tests/fixtures/mixed.form"]),
    ("check_dz1", &["check", "tests/fixtures/dz1.form"]),
    ("check_dzbar1", &["check", "tests/fixtures/dzbar1.form"]),
    ("check_hex_torus", &["check", "tests/fixtures/hex_torus.form"]),
    ("check_seeded", &["check", "tests/fixtures/sample.form", "--seed", "9", "--restarts", "8"]),
    ("check_tol", &["--tol", "1e-3", "check", "tests/fixtures/dz1dz2dz3.form"]),
    ("check_omega", &["check", "tests/fixtures/omega.form"]),
    ("check_unsorted", &["check", "tests/fixtures/unsorted.form"]),
    ("check_malformed", &["check", "tests/fixtures/malformed.form"]),
    ("check_missing_file", &["check", "tests/fixtures/no_such.form"]),
    ("invariants_dz1dz2", &["invariants", "tests/fixtures/dz1dz2.form"]),
    ("invariants_mixed", &["invariants", "tests/fixtures/mixed.form"]),
    ("invariants_sample", &["invariants", "tests/fixtures/sample.form"]),
    ("invariants_almost_geometric", &["invariants", "tests/fixtures/almost_geometric.form"]),
    ("invariants_dz1", &["invariants", "tests/fixtures/dz1.form"]),
    ("normal_form_sample", &["normal-form", "tests/fixtures/sample.form"]),
    ("normal_form_dz1dz2", &["normal-form", "tests/fixtures/dz1dz2.form"]),
    ("normal_form_mixed", &["normal-form", "tests/fixtures/mixed.form"]),
    ("normal_form_outside", &["normal-form", "tests/fixtures/outside.form"]),
    ("reduce_almost_geometric", &["reduce", "tests/fixtures/almost_geometric.form", "--vector", "1,0,0,0,0,0"]),
    ("reduce_to_file", &["reduce", "tests/fixtures/dz1dz2dz3.form", "--vector", "0,0,-1,0,0,2", "--out", "{out}/reduced.form"]),
    ("reduce_wrong_length", &["reduce", "tests/fixtures/dz1dz2dz3.form", "--vector", "1,0"]),
    ("product_dz1_dz1", &["product", "tests/fixtures/dz1.form", "tests/fixtures/dz1.form"]),
    ("product_to_file", &["product", "tests/fixtures/dz1.form", "tests/fixtures/dz1dz2.form", "--out", "{out}/p.form"]),
    ("systole_square_torus", &["systole", "tests/fixtures/square_torus.form"]),
    ("systole_hex_torus", &["systole", "tests/fixtures/hex_torus.form"]),
    ("systole_divisors", &["systole", "tests/fixtures/torus_divisors.form"]),
    ("systole_dz1dz2_seeded", &["systole", "tests/fixtures/dz1dz2.form", "--height", "3", "--seed", "5"]),
    ("systole_outside", &["systole", "tests/fixtures/outside.form", "--height", "1"]),
    ("volume_hex_torus", &["volume", "tests/fixtures/hex_torus.form"]),
    ("volume_divisors", &["volume", "tests/fixtures/torus_divisors.form"]),
    ("volume_dz1dz2dz3", &["volume", "tests/fixtures/dz1dz2dz3.form"]),
    ("experiment_n1", &["systolic-experiment", "--n", "1", "--samples", "3", "--seed", "3"]),
    ("experiment_n2_to_file", &["systolic-experiment", "--n", "2", "--samples", "3", "--seed", "11", "--out", "{out}/sys.csv"]),
    ("experiment_bad_n", &["systolic-experiment", "--n", "4", "--samples", "1", "--seed", "0"]),
    ("shift_check_sample", &["shift-check", "tests/fixtures/sample.form"]),
    ("shift_check_almost_geometric", &["shift-check", "tests/fixtures/almost_geometric.form"]),
    ("shift_check_dz1dz2", &["shift-check", "tests/fixtures/dz1dz2.form"]),
    ("sample_geometric", &["sample", "--count", "3", "--seed", "1"]),
    ("sample_ag", &["sample", "--count", "3", "--seed", "2", "--strategy", "ag"]),
    ("sample_perturbed_to_file", &["sample", "--count", "4", "--seed", "3", "--strategy", "perturbed", "--out", "{out}/s.csv"]),
    ("sample_bad_strategy", &["sample", "--count", "1", "--seed", "0", "--strategy", "haar"]),
    ("usage_no_args", &[]),
    ("usage_unknown_subcommand", &["frob"]),
    ("usage_missing_file", &["check"]),
    ("usage_missing_seed", &["sample", "--count", "2"]),
    ("usage_experiment_missing_seed", &["systolic-experiment", "--n", "1", "--samples", "1"]),
    ("usage_bad_number", &["systole", "tests/fixtures/square_torus.form", "--height", "x"]),
    ("help", &["--help"]),
];

/// Makes the relative fixture paths resolve regardless of how the test
/// binary was started.
pub fn enter_crate_dir() {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).expect("crate directory exists");
}

/// Runs one case and renders the golden text block.
pub fn render(args: &[&str]) -> String {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let tmp_str = tmp.path().display().to_string();
    let argv: Vec<String> = std::iter::once("lagform".to_string())
        .chain(args.iter().map(|a| a.replace("{out}", &tmp_str)))
        .collect();
    let r = run_command(&argv);
    let mut s = format!("$ lagform {}\nexit: {}\n", args.join(" "), r.code);
    s.push_str("--- stdout\n");
    s.push_str(&r.stdout);
    s.push_str("--- stderr\n");
    s.push_str(&r.stderr);
    if let Some(p) = &r.csv_path {
        s.push_str(&format!("--- file {}\n", p.display()));
        s.push_str(&std::fs::read_to_string(p).expect("written file is readable"));
    }
    s.replace(&tmp_str, "<tmp>")
}

pub fn golden_path(name: &str) -> PathBuf {
    Path::new("tests/golden").join(format!("{name}.golden"))
}

/// Compares every case against its stored block. With `UPDATE_GOLDEN=1`
/// the blocks are rewritten instead. Returns the names that differ.
pub fn check_all() -> Vec<String> {
    enter_crate_dir();
    let update = std::env::var("UPDATE_GOLDEN").is_ok_and(|v| v == "1");
    let mut bad = Vec::new();
    for (name, args) in CASES {
        let got = render(args);
        let path = golden_path(name);
        if update {
            std::fs::write(&path, &got).expect("golden directory is writable");
            continue;
        }
        match std::fs::read_to_string(&path) {
            Ok(want) if want == got => {}
            Ok(want) => {
                eprintln!("golden mismatch for {name}\n--- want\n{want}--- got\n{got}");
                bad.push(name.to_string());
            }
            Err(_) => {
                eprintln!("missing golden file {} (rerun with UPDATE_GOLDEN=1)", path.display());
                bad.push(name.to_string());
            }
        }
    }
    bad
}

/// Runs every case twice and returns the names whose renderings differ.
pub fn nondeterministic() -> Vec<String> {
    enter_crate_dir();
    CASES
        .iter()
        .filter(|(_, args)| render(args) != render(args))
        .map(|(name, _)| name.to_string())
        .collect()
}
