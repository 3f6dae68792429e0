use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ficoder::codec::check_linear_map;
use ficoder::{EncodingMap, MapLinearity, Matrix};
use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn run_with(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ficoder"));
    cmd.current_dir(root())
        .args(args)
        .env_remove("FICODER_THREADS");
    if let Some(t) = threads {
        cmd.env("FICODER_THREADS", t);
    }
    cmd.output().unwrap()
}

fn run(args: &[&str]) -> Output {
    run_with(args, None)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = run(&all);
    (
        serde_json::from_slice(&o.stdout).unwrap(),
        o.status.code().unwrap(),
    )
}

fn field<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(": "))
}

fn fixture(name: &str) -> String {
    format!("fixtures/{name}")
}

fn read_matrix(path: &Path) -> Matrix {
    Matrix::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn synthesize_table5_gives_the_shifted_parity_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table5.code");
    let o = run(&[
        "synthesize",
        "--instance",
        &fixture("table5.json"),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(
        field(&text, "closed_form"),
        Some("x1 + x4, x2 + x4, x3 + x4")
    );
    assert_eq!(field(&text, "length"), Some("3"));
    assert_eq!(field(&text, "perfect"), Some("true"));
    assert_eq!(field(&text, "verified"), Some("true"));

    // Same classes and codewords as the printed assignment, in any line order.
    let lines = |s: &str| {
        let mut v: Vec<String> = s
            .lines()
            .filter(|l| l.contains("->"))
            .map(str::to_owned)
            .collect();
        v.sort();
        v
    };
    let written = std::fs::read_to_string(&out).unwrap();
    let printed = std::fs::read_to_string(root().join("fixtures/table5.code")).unwrap();
    assert_eq!(lines(&written), lines(&printed));
    let o = run(&[
        "verify",
        "--instance",
        &fixture("table5.json"),
        "--assignment",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bounds_table4_over_f3_is_tight() {
    let (v, code) = json(&["bounds", "--instance", &fixture("table4_f3.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["l_opt"], 2);
    assert_eq!(v["mu"], 2);
    assert_eq!(v["perfect"], true);
}

#[test]
fn repetition_concatenation_on_table7_survives_one_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rep.code");
    let out = out.to_str().unwrap();
    let inst = fixture("table7.json");
    let (v, code) = json(&[
        "ecc-concat",
        "--instance",
        &inst,
        "--outer",
        "repetition",
        "--delta",
        "1",
        "--output",
        out,
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["length"], 3);
    assert_eq!(v["passed"], true);
    let (v, code) = json(&[
        "simulate",
        "--instance",
        &inst,
        "--assignment",
        out,
        "--delta",
        "1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["passed"], true);
    assert_eq!(v["failures"], 0);
    assert_eq!(v["trials"], 64);
}

#[test]
fn bounds_report_for_table2() {
    let (v, code) = json(&["bounds", "--instance", &fixture("table2.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["bounds"]["chi"], 4);
    assert_eq!(v["l_opt"], 2);
    assert_eq!(v["mu"], 2);
    assert_eq!(v["perfect"], true);
}

#[test]
fn failing_verify_reports_a_witness_triple() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("dropped.mat");
    // The table5 code without its third transmission.
    std::fs::write(&m, "2 4 2\n1 0\n0 1\n0 0\n1 1\n").unwrap();
    let (v, code) = json(&[
        "verify",
        "--instance",
        &fixture("table5.json"),
        "--matrix",
        m.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["passed"], false);
    let w = &v["witness"];
    let receiver = w["receiver"].as_u64().unwrap();
    assert!((1..=5).contains(&receiver));
    assert_ne!(w["x"], w["x_prime"]);
    assert_eq!(w["x"].as_str().unwrap().len(), 4);
}

#[test]
fn exit_codes() {
    let o = run(&["validate", "--instance", &fixture("table2.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "warnings"), Some(""));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"q\": 4}").unwrap();
    assert_eq!(
        run(&["validate", "--instance", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["validate", "--instance", "fixtures/missing.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["bounds"]).status.code(), Some(2));
    assert_eq!(
        run(&[
            "bounds",
            "--instance",
            &fixture("table2.json"),
            "--budget",
            "0"
        ])
        .status
        .code(),
        Some(2)
    );
    let o = run(&[
        "color",
        "--instance",
        &fixture("table1.json"),
        "--n",
        "2",
        "--budget",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(field(&stdout(&o), "length_certified"), Some("false"));
    let o = run(&[
        "bounds",
        "--instance",
        &fixture("table4_f2.json"),
        "--vertex-budget",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ecc_verify_names_a_confusing_receiver() {
    let inst = fixture("table7.json");
    let (v, code) = json(&[
        "ecc-verify",
        "--instance",
        &inst,
        "--matrix",
        &fixture("ex9_m0.mat"),
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["min_distance"], 1);
    assert!(v["witness"]["receiver"].is_u64());
    let (v, code) = json(&[
        "ecc-verify",
        "--instance",
        &inst,
        "--matrix",
        &fixture("ex9_m1.mat"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["min_distance"], 3);
    let o = run(&[
        "simulate",
        "--instance",
        &inst,
        "--matrix",
        &fixture("ex9_m0.mat"),
        "--pattern",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

/// Every code and matrix fixture, with the instance (and block length) it belongs to.
const CODES: &[(&str, &str, Option<&str>)] = &[
    ("table1.json", "table1_scalar.mat", None),
    ("table1.json", "table1_vector.mat", Some("2")),
    ("table2.json", "table2_left.code", None),
    ("table2.json", "table2_right.code", None),
    ("table4_f2.json", "table4_f2.code", None),
    ("table4_f2.json", "table4_f2_nonlinear.code", None),
    ("table4_f2.json", "table4_f2sq.code", Some("2")),
    ("table4_f3.json", "table4_f3.code", None),
    ("table5.json", "table5.code", None),
    ("table6_case1.json", "table6_case1.code", None),
    ("table6_case2.json", "table6_case2.code", None),
    ("table6_case3.json", "table6_case3.code", None),
    ("table7.json", "ex9_m0.mat", None),
    ("table7.json", "ex9_m1.mat", None),
    ("table4_f2.json", "ex10_f2_m0.mat", None),
    ("table4_f3.json", "ex10_f3_m0.mat", None),
    ("table4_f2.json", "ex10_f2sq_m0.mat", Some("2")),
];

#[test]
fn every_code_fixture_verifies() {
    for &(inst, code, n) in CODES {
        let flag = if code.ends_with(".mat") {
            "--matrix"
        } else {
            "--assignment"
        };
        let (inst, code_path) = (fixture(inst), fixture(code));
        let mut args = vec!["verify", "--instance", &inst, flag, &code_path];
        if let Some(n) = n {
            args.extend(["--n", n]);
        }
        let (v, status) = json(&args);
        assert_eq!(
            (status, &v["passed"]),
            (0, &Value::Bool(true)),
            "{code}: {v}"
        );
    }
}

#[test]
fn every_instance_fixture_validates() {
    let mut seen = 0;
    for entry in std::fs::read_dir(root().join("fixtures")).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let (v, status) = json(&["validate", "--instance", path.to_str().unwrap()]);
            assert_eq!(
                (status, &v["valid"]),
                (0, &Value::Bool(true)),
                "{}",
                path.display()
            );
            seen += 1;
        }
    }
    assert_eq!(seen, 10);
}

#[test]
fn concatenated_matrices_match_the_generator_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    for (inst, m0, g, outer, n) in [
        (
            "table4_f2.json",
            "ex10_f2_m0.mat",
            "ex10_f2_g.mat",
            "shortened633",
            None,
        ),
        (
            "table4_f3.json",
            "ex10_f3_m0.mat",
            "ex10_f3_g.mat",
            "mds423",
            None,
        ),
        (
            "table4_f2.json",
            "ex10_f2sq_m0.mat",
            "ex10_f2sq_g.mat",
            "hamming74",
            Some("2"),
        ),
    ] {
        let out = dir.path().join(format!("{outer}.code"));
        let (inst, m0_path) = (fixture(inst), fixture(m0));
        let mut args = vec![
            "ecc-concat",
            "--instance",
            &inst,
            "--matrix",
            &m0_path,
            "--outer",
            outer,
        ];
        args.extend(["--output", out.to_str().unwrap()]);
        if let Some(n) = n {
            args.extend(["--n", n]);
        }
        let (v, status) = json(&args);
        assert_eq!(
            (status, &v["passed"]),
            (0, &Value::Bool(true)),
            "{outer}: {v}"
        );
        let written = std::fs::read_to_string(&out).unwrap();
        let m1 = Matrix::parse(written.split_once("matrix\n").unwrap().1).unwrap();
        let m0 = read_matrix(&root().join("fixtures").join(m0));
        let g = read_matrix(&root().join("fixtures").join(g));
        assert_eq!(m1, m0.mul(&g).unwrap(), "{outer}");
        assert!(matches!(
            check_linear_map(&EncodingMap::from_matrix(&m1).unwrap()),
            MapLinearity::Linear(_)
        ));
    }
}

/// Commands whose text output is pinned in `fixtures/golden`.
const GOLDEN: &[(&str, &[&str])] = &[
    (
        "validate_table2",
        &["validate", "--instance", "fixtures/table2.json"],
    ),
    (
        "graph_table3",
        &["graph", "--instance", "fixtures/table3.json"],
    ),
    (
        "color_table4_f3",
        &["color", "--instance", "fixtures/table4_f3.json"],
    ),
    (
        "bounds_table1",
        &[
            "bounds",
            "--instance",
            "fixtures/table1.json",
            "--format",
            "json",
        ],
    ),
    (
        "bounds_table2",
        &[
            "bounds",
            "--instance",
            "fixtures/table2.json",
            "--format",
            "json",
        ],
    ),
    (
        "bounds_table7",
        &[
            "bounds",
            "--instance",
            "fixtures/table7.json",
            "--format",
            "json",
        ],
    ),
    (
        "synthesize_table2",
        &["synthesize", "--instance", "fixtures/table2.json"],
    ),
    (
        "synthesize_table5",
        &["synthesize", "--instance", "fixtures/table5.json"],
    ),
    (
        "synthesize_table6_case3",
        &["synthesize", "--instance", "fixtures/table6_case3.json"],
    ),
    (
        "synthesize_table4_f2_lifted",
        &[
            "synthesize",
            "--instance",
            "fixtures/table4_f2.json",
            "--n",
            "2",
        ],
    ),
    (
        "verify_table4_f3",
        &[
            "verify",
            "--instance",
            "fixtures/table4_f3.json",
            "--assignment",
            "fixtures/table4_f3.code",
        ],
    ),
    (
        "ecc_verify_table7_m1",
        &[
            "ecc-verify",
            "--instance",
            "fixtures/table7.json",
            "--matrix",
            "fixtures/ex9_m1.mat",
        ],
    ),
    (
        "ecc_concat_table7_repetition",
        &[
            "ecc-concat",
            "--instance",
            "fixtures/table7.json",
            "--outer",
            "repetition",
            "--delta",
            "1",
        ],
    ),
    (
        "simulate_table7_m1",
        &[
            "simulate",
            "--instance",
            "fixtures/table7.json",
            "--matrix",
            "fixtures/ex9_m1.mat",
        ],
    ),
];

#[test]
fn golden_outputs() {
    let bless = std::env::var_os("FICODER_BLESS").is_some();
    for (name, args) in GOLDEN {
        let o = run(args);
        assert!(
            matches!(o.status.code(), Some(0 | 1)),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let path = root().join("fixtures/golden").join(format!("{name}.txt"));
        if bless {
            std::fs::write(&path, &o.stdout).unwrap();
        } else {
            let expected = std::fs::read_to_string(&path)
                .unwrap_or_else(|_| panic!("missing {}", path.display()));
            assert_eq!(stdout(&o), expected, "{name}");
        }
    }
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["graph", "--instance", "fixtures/table1.json", "--n", "2"],
        &[
            "color",
            "--instance",
            "fixtures/table1.json",
            "--n",
            "2",
            "--budget",
            "20000",
        ],
        &["synthesize", "--instance", "fixtures/table4_f3.json"],
        &[
            "bounds",
            "--instance",
            "fixtures/table6_case3.json",
            "--format",
            "json",
        ],
        &[
            "simulate",
            "--instance",
            "fixtures/table7.json",
            "--matrix",
            "fixtures/ex9_m0.mat",
        ],
    ];
    for args in cases {
        let runs: Vec<Output> = ["1", "4", "4"]
            .iter()
            .map(|t| run_with(args, Some(t)))
            .collect();
        for o in &runs[1..] {
            assert_eq!(o.stdout, runs[0].stdout, "{args:?}");
            assert_eq!(o.status.code(), runs[0].status.code(), "{args:?}");
        }
    }
    let dots: Vec<Vec<u8>> = ["1", "4"]
        .iter()
        .map(|t| {
            let p = dir.path().join(format!("g{t}.dot"));
            let o = run_with(
                &[
                    "graph",
                    "--instance",
                    "fixtures/table4_f3.json",
                    "--dot",
                    p.to_str().unwrap(),
                ],
                Some(t),
            );
            assert_eq!(o.status.code(), Some(0));
            std::fs::read(p).unwrap()
        })
        .collect();
    assert_eq!(dots[0], dots[1]);
}
