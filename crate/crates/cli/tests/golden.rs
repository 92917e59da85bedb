mod common;

use lagform::flow;
use lagform::torus::{self, SystoleConfig};
use lagform::uspace::{self, MembershipConfig};
use lagform_cli::{run_command, FormFile};

fn run(args: &[&str]) -> lagform_cli::CommandResult {
    common::enter_crate_dir();
    run_command(std::iter::once("lagform").chain(args.iter().copied()))
}

fn field(stdout: &str, key: &str) -> String {
    let prefix = format!("{key}: ");
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no `{key}` in\n{stdout}"))
        .to_string()
}

fn number(stdout: &str, key: &str) -> f64 {
    field(stdout, key).parse().expect("decimal")
}

fn load(path: &str) -> (FormFile, lagform::ExteriorForm) {
    common::enter_crate_dir();
    let ff = FormFile::read(path.as_ref()).unwrap();
    let form = ff.form().unwrap();
    (ff, form)
}

#[test]
fn golden_files_match() {
    let bad = common::check_all();
    assert!(bad.is_empty(), "golden mismatches: {bad:?}");
}

#[test]
fn outputs_are_deterministic() {
    let bad = common::nondeterministic();
    assert!(bad.is_empty(), "nondeterministic cases: {bad:?}");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).code, 2);
    assert_eq!(run(&["frob"]).code, 2);
    assert_eq!(run(&["sample", "--count", "2"]).code, 2);
    assert_eq!(run(&["--help"]).code, 0);
    for (file, tag) in [("unsorted", "parse"), ("malformed", "parse"), ("omega", "not_primitive"), ("no_such", "io")] {
        let r = run(&["check", &format!("tests/fixtures/{file}.form")]);
        assert_eq!(r.code, 1, "{file}");
        assert!(r.stderr.starts_with(&format!("error[{tag}]")), "{file}: {}", r.stderr);
        assert!(r.stdout.is_empty());
    }
    let r = run(&["normal-form", "tests/fixtures/mixed.form"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.starts_with("error[non_member]"), "{}", r.stderr);
}

#[test]
fn documented_examples() {
    let r = run(&["check", "tests/fixtures/dz1dz2dz3.form"]);
    assert_eq!(field(&r.stdout, "summary"), "member, U^+, geometric");

    let r = run(&["shift-check", "tests/fixtures/sample.form"]);
    assert!((number(&r.stdout, "delta_f") - 8.317766166719).abs() < 1e-9);
    assert_eq!(field(&r.stdout, "within_tolerance"), "true");

    let r = run(&["systole", "tests/fixtures/square_torus.form"]);
    assert_eq!(r.stdout.lines().next(), Some("sys = 1 (certified), witness (1,0)"));
}

#[test]
fn numbers_match_library_calls() {
    let (_, f) = load("tests/fixtures/sample.form");
    let r = run(&["check", "tests/fixtures/sample.form"]);
    let lib = uspace::is_member_with(&f, &MembershipConfig { classify: true, ..Default::default() }).unwrap();
    assert_eq!(number(&r.stdout, "margin"), lib.margin);
    assert_eq!(number(&r.stdout, "lgr_minimum"), lib.lgr_minimum.unwrap());

    let r = run(&["shift-check", "tests/fixtures/sample.form"]);
    assert_eq!(number(&r.stdout, "delta_f"), flow::shift_check(&f).unwrap());
    assert_eq!(number(&r.stdout, "f"), flow::f_invariant(&f).unwrap());

    let r = run(&["invariants", "tests/fixtures/sample.form"]);
    assert_eq!(number(&r.stdout, "d_re"), uspace::q_invariants(&f.re()).unwrap().d);
    assert_eq!(number(&r.stdout, "d_im"), uspace::q_invariants(&f.im()).unwrap().d);

    let r = run(&["normal-form", "tests/fixtures/sample.form"]);
    let nf = uspace::normal_form_u3(&f).unwrap();
    let lambda: Vec<f64> = field(&r.stdout, "lambda").split(", ").map(|x| x.parse().unwrap()).collect();
    assert_eq!(lambda, nf.lambda.to_vec());

    let (ff, f) = load("tests/fixtures/hex_torus.form");
    let t = ff.torus().unwrap();
    let r = run(&["volume", "tests/fixtures/hex_torus.form"]);
    assert_eq!(number(&r.stdout, "volume"), torus::torus_volume(&f, &t).unwrap());
    let r = run(&["systole", "tests/fixtures/hex_torus.form", "--seed", "4"]);
    let lib = torus::systole_with(&f, &t, &SystoleConfig { seed: 4, ..Default::default() }).unwrap();
    let first = r.stdout.lines().next().unwrap();
    let sys: f64 = first.strip_prefix("sys = ").unwrap().split(' ').next().unwrap().parse().unwrap();
    assert_eq!(sys, lib.sys);
    assert_eq!(number(&r.stdout, "radius"), lib.radius);

    let (_, f) = load("tests/fixtures/dz1dz2.form");
    let r = run(&["invariants", "tests/fixtures/dz1dz2.form"]);
    assert_eq!(number(&r.stdout, "s_aa"), uspace::s_matrix(&f).unwrap().aa);

    let r = run(&["systolic-experiment", "--n", "1", "--samples", "4", "--seed", "8"]);
    let lib = torus::systolic_experiment(1, 4, 8).unwrap();
    assert_eq!(number(&r.stdout, "max_ratio_geometric"), lib.max_ratio_geometric);
    assert_eq!(number(&r.stdout, "max_ratio_almost_geometric"), lib.max_ratio_almost_geometric);
    let mut csv = Vec::new();
    lib.write_csv(&mut csv).unwrap();
    assert!(r.stdout.ends_with(std::str::from_utf8(&csv).unwrap()));

    let r = run(&["sample", "--count", "3", "--seed", "6", "--strategy", "perturbed"]);
    let lib = flow::sample_members(3, 6, flow::Strategy::Perturbed).unwrap();
    assert_eq!(number(&r.stdout, "acceptance_rate"), lib.acceptance_rate());
    let mut csv = Vec::new();
    lib.write_csv(&mut csv).unwrap();
    assert!(r.stdout.ends_with(std::str::from_utf8(&csv).unwrap()));
}

#[test]
fn product_and_reduce_files_parse_back() {
    let (_, a) = load("tests/fixtures/dz1.form");
    let (_, b) = load("tests/fixtures/dz1dz2.form");
    let r = run(&["product", "tests/fixtures/dz1.form", "tests/fixtures/dz1dz2.form"]);
    assert_eq!(FormFile::parse(&r.stdout).unwrap().form().unwrap(), uspace::product(&a, &b).unwrap());

    let (_, f) = load("tests/fixtures/almost_geometric.form");
    let r = run(&["reduce", "tests/fixtures/almost_geometric.form", "--vector", "1,0,0,0,0,0"]);
    let lib = uspace::reduce_along_vector(&f, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    assert_eq!(FormFile::parse(&r.stdout).unwrap().form().unwrap(), lib);
}
