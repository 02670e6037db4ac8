use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(n: usize) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../fixtures/example{n}.json"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn mixtopo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixtopo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim_end().to_string()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("error JSON on stderr")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_example1_summary_and_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let o = mixtopo(&["analyze", s(&fixture(1)), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "3 modes, 2 saddles");
    let v = read_json(&out);
    assert_eq!(v["report"]["mode_count"], 3);
    assert_eq!(v["report"]["bands"]["pair"], serde_json::json!([1, 2]));
    assert_eq!(v["verification"]["all_passed"], true);
    let cp = &v["report"]["critical_points"][0];
    for key in ["alpha", "x", "elevation", "kind", "neg_eigs"] {
        assert!(!cp[key].is_null(), "missing {key}");
    }
}

#[test]
fn pi_bands_for_example1() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("bands.json");
    let o = mixtopo(&["pi", s(&fixture(1)), "--pair", "1", "2", "--bands", s(&out)]);
    assert!(o.status.success());
    let v = read_json(&out);
    let modes: Vec<u64> = v["bands"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["modes"].as_u64().unwrap())
        .collect();
    assert_eq!(modes, [1, 2, 3, 2, 1]);
    let bp: Vec<f64> = v["breakpoints"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b.as_f64().unwrap())
        .collect();
    for (got, want) in bp.iter().zip([0.0268797, 0.2564454, 0.7435546, 0.9731203]) {
        assert!((got - want).abs() < 1e-6, "{bp:?}");
    }
    assert_eq!(v["crossings"].as_array().unwrap().len(), 5);
}

#[test]
fn missing_model_exits_2() {
    let o = mixtopo(&["analyze", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "IoError");
}

#[test]
fn invalid_model_exits_2() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(
        &p,
        r#"{"dim": 1, "weights": [1.0], "components": [{"mean": [0.0], "cov": [[-1.0]]}]}"#,
    )
    .unwrap();
    let o = mixtopo(&["validate", s(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "NotPositiveDefinite");
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(mixtopo(&["analyze"]).status.code(), Some(1));
    assert_eq!(mixtopo(&["frobnicate"]).status.code(), Some(1));
    let o = mixtopo(&["pi", s(&fixture(3))]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"], "UsageError");
}

#[test]
fn out_of_range_pair_exits_2() {
    let o = mixtopo(&["pi", s(&fixture(3)), "--pair", "1", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn degenerate_fit_exits_3() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("flat.csv");
    fs::write(&p, "1,2\n1,2\n1,2\n1,2\n").unwrap();
    let o = mixtopo(&["fit", s(&p), "--k", "1", "--no-header"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "DegenerateFit");
}

#[test]
fn repeat_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let run = |tag: &str| -> Vec<Vec<u8>> {
        let p = |name: &str| dir.path().join(format!("{tag}-{name}"));
        let jobs: Vec<Vec<String>> = vec![
            vec![
                "analyze".into(),
                s(&fixture(4)).into(),
                "--resolution".into(),
                "120".into(),
                "--out".into(),
                s(&p("a.json")).into(),
            ],
            vec![
                "pi".into(),
                s(&fixture(1)).into(),
                "--csv".into(),
                s(&p("pi.csv")).into(),
                "--bands".into(),
                s(&p("b.json")).into(),
            ],
            vec![
                "elevation".into(),
                s(&fixture(2)).into(),
                "--samples".into(),
                "500".into(),
                "--csv".into(),
                s(&p("e.csv")).into(),
            ],
            vec![
                "curvature".into(),
                s(&fixture(1)).into(),
                "--csv".into(),
                s(&p("c.csv")).into(),
                "--out".into(),
                s(&p("c.json")).into(),
            ],
            vec![
                "contour".into(),
                s(&fixture(3)).into(),
                "--resolution".into(),
                "60".into(),
                "--csv".into(),
                s(&p("t.csv")).into(),
            ],
            vec![
                "linkage".into(),
                s(&fixture(4)).into(),
                "--out".into(),
                s(&p("l.json")).into(),
                "--dot".into(),
                s(&p("l.dot")).into(),
            ],
            vec![
                "fit".into(),
                s(&data("iris.csv")).into(),
                "--k".into(),
                "3".into(),
                "--seeds".into(),
                "5".into(),
                "--out".into(),
                s(&p("fit.json")).into(),
            ],
        ];
        for args in jobs {
            let argv: Vec<&str> = args.iter().map(String::as_str).collect();
            let o = mixtopo(&argv);
            assert!(o.status.success(), "{argv:?}: {}", String::from_utf8_lossy(&o.stderr));
        }
        [
            "a.json", "pi.csv", "b.json", "e.csv", "c.csv", "c.json", "t.csv", "l.json", "l.dot", "fit.json",
        ]
        .iter()
        .map(|n| fs::read(p(n)).unwrap())
        .collect()
    };
    assert_eq!(run("first"), run("second"));
}

#[test]
fn csv_outputs_are_canonical() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("pi.csv");
    assert!(mixtopo(&["pi", s(&fixture(1)), "--samples", "10", "--csv", s(&p)])
        .status
        .success());
    let text = fs::read_to_string(&p).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.starts_with("alpha,pi\n0,0\n"));
    assert!(text.ends_with("1,1\n"));
}

#[test]
fn linkage_dot_for_example4() {
    let dir = TempDir::new().unwrap();
    let dot = dir.path().join("l.dot");
    let o = mixtopo(&["linkage", s(&fixture(4)), "--dot", s(&dot)]);
    assert!(o.status.success());
    assert_eq!(
        fs::read_to_string(&dot).unwrap(),
        "graph linkage {\n  1;\n  2;\n  3;\n}\n"
    );
    assert_eq!(stdout(&o), "3 components, 0 edges, 3 supercomponents: {1} {2} {3}");
    let bad = mixtopo(&["linkage", s(&fixture(4)), "--tau", "1.5"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn fitted_model_round_trips() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("iris.json");
    let o = mixtopo(&[
        "fit",
        s(&data("iris.csv")),
        "--k",
        "2",
        "--seeds",
        "3",
        "--out",
        s(&model),
    ]);
    assert!(o.status.success());
    let o = mixtopo(&["validate", s(&model)]);
    assert_eq!(stdout(&o), "valid: 2 components in dimension 4");
}

#[test]
fn oracle_agrees_on_example1() {
    let o = mixtopo(&["oracle", s(&fixture(1))]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("oracle 3 modes, topography 3 modes"));
    assert!(stdout(&o).ends_with("agree"));
}

#[test]
fn example2_verifies_at_default_resolution() {
    let o = mixtopo(&["analyze", s(&fixture(2))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o), "4 modes, 3 saddles");
    let o = mixtopo(&["oracle", s(&fixture(2))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("oracle 4 modes, topography 4 modes"));
}

#[test]
fn svg_outputs_are_well_formed() {
    let dir = TempDir::new().unwrap();
    let e = dir.path().join("e.svg");
    let t = dir.path().join("t.svg");
    assert!(
        mixtopo(&["elevation", s(&fixture(1)), "--x", "arclength", "--svg", s(&e)])
            .status
            .success()
    );
    assert!(
        mixtopo(&["contour", s(&fixture(3)), "--resolution", "50", "--svg", s(&t)])
            .status
            .success()
    );
    for p in [e, t] {
        let text = fs::read_to_string(p).unwrap();
        assert!(text.starts_with("<svg ") && text.ends_with("</svg>\n"));
    }
}

#[test]
fn help_documents_defaults() {
    let help = |cmd: &str| stdout(&mixtopo(&[cmd, "--help"]));
    assert!(help("analyze").contains("[default: 400]"));
    assert!(help("analyze").contains("[default: 0]"));
    for cmd in ["elevation", "pi", "curvature"] {
        assert!(help(cmd).contains("[default: 4096]"), "{cmd}");
    }
    assert!(help("contour").contains("[default: 400]"));
    assert!(help("linkage").contains("No default"));
    assert!(help("fit").contains("[default: 50]"));
    assert!(help("oracle").contains("[default: 2001, 401, 201"));
}
