use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn kadets(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kadets"))
        .args(args)
        .env_remove("KADETS_SEED")
        .output()
        .expect("spawn kadets")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kadets-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad stdout ({e}): {}", String::from_utf8_lossy(&out.stderr)))
}

fn write_fixture(name: &str, file: &str) -> PathBuf {
    let p = scratch(file);
    let out = kadets(&["fixture", name, "--out", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    p
}

#[test]
fn slabs_reach_equality() {
    let p = write_fixture("slabs", "slabs.json");
    let out = kadets(&["inradius", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert!(v["result"]["margin"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn malformed_input_is_exit_2() {
    let p = scratch("broken.json");
    std::fs::write(&p, "{\"dimension\": 2, \"body\": ").unwrap();
    assert_eq!(
        kadets(&["inradius", p.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let missing = scratch("does-not-exist.json");
    assert_eq!(
        kadets(&["inradius", missing.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn generated_voronoi_instance_passes() {
    let p = scratch("voronoi.json");
    let out = kadets(&[
        "gen",
        "--kind",
        "voronoi",
        "--seed",
        "7",
        "--k",
        "5",
        "--d",
        "3",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = kadets(&["inradius", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["cells"].as_array().unwrap().len(), 5);
}

#[test]
fn extend_square_split_writes_svg_and_instance() {
    let p = write_fixture("square-split", "split.json");
    let svg = scratch("split.svg");
    let ext = scratch("split-ext.json");
    let out = kadets(&[
        "extend2d",
        p.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
        "--extended",
        ext.to_str().unwrap(),
        "--samples",
        "2000",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["result"]["cells"], 2);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<?xml") && text.contains("<polygon"));
    // The extended file is itself a valid instance over the whole plane.
    let again = kadets(&["inradius", ext.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
}

#[test]
fn extend_pinwheel_has_five_cells() {
    let p = write_fixture("pinwheel", "pinwheel.json");
    let out = kadets(&["extend2d", p.to_str().unwrap(), "--samples", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["cells"], 5);
}

#[test]
fn overlapping_cells_are_a_contract_failure() {
    let p = write_fixture("square-split", "overlap.json");
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    // Push the left cell's right edge past the right cell's left edge.
    v["partition"]["payload"]["cells"][0][0]["bound"] = 0.7.into();
    v["partition"]["payload"]["cells"][1][0]["bound"] = (-0.3).into();
    std::fs::write(&p, serde_json::to_string(&v).unwrap()).unwrap();
    let out = kadets(&["extend2d", p.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn verify_batches_pass() {
    for (kind, d) in [
        ("affine", "3"),
        ("voronoi", "2"),
        ("hierarchical", "2"),
        ("extended2d", "2"),
        ("fixture", "2"),
    ] {
        let out = kadets(&[
            "verify",
            "--kind",
            kind,
            "--seeds",
            "0..4",
            "--k",
            "4",
            "--d",
            d,
            "--samples",
            "1000",
            "--jobs",
            "2",
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{kind}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert_eq!(json(&out)["passed"], true);
    }
}

#[test]
fn bad_seed_range_is_rejected() {
    let out = kadets(&["verify", "--kind", "affine", "--seeds", "5..2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sphere_lemmas_pass() {
    for lemma in ["star", "eps", "iso", "kadets"] {
        let out = kadets(&[
            "sphere",
            "--lemma",
            lemma,
            "--samples",
            "20000",
            "--seed",
            "3",
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{lemma}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert_eq!(json(&out)["passed"], true);
    }
}

#[test]
fn hyperbolic_large_disk_has_a_cover() {
    let svg = scratch("hyp.svg");
    let out = kadets(&[
        "hyperbolic",
        "--rho",
        "5",
        "--grid",
        "6",
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["found"], true);
    assert!(v["result"]["best"]["margin"].as_f64().unwrap() > 0.2);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<path").count(), 2);
    assert_eq!(text.matches("<circle").count(), 3);
    assert_eq!(text.matches("stroke-dasharray").count(), 2);
}

#[test]
fn hyperbolic_small_disk_has_no_cover() {
    let out = kadets(&["hyperbolic", "--rho", "0.1", "--grid", "4"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["found"], false);
}

#[test]
fn reports_are_deterministic() {
    let runs = [
        vec![
            "sphere",
            "--lemma",
            "star",
            "--samples",
            "50000",
            "--seed",
            "9",
        ],
        vec![
            "verify", "--kind", "voronoi", "--seeds", "0..3", "--k", "4", "--jobs", "3",
        ],
        vec!["gen", "--kind", "hierarchical", "--seed", "2", "--k", "6"],
    ];
    for args in &runs {
        let a = kadets(args);
        let b = kadets(args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn seed_env_is_honoured() {
    let run = |env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_kadets"));
        c.args(["gen", "--kind", "affine", "--k", "3"]);
        match env {
            Some(s) => c.env("KADETS_SEED", s),
            None => c.env_remove("KADETS_SEED"),
        };
        c.output().unwrap().stdout
    };
    let explicit = kadets(&["gen", "--kind", "affine", "--k", "3", "--seed", "42"]).stdout;
    assert_eq!(run(Some("42")), explicit);
    assert_ne!(run(None), explicit);
}

#[test]
fn unmet_margin_is_exit_1() {
    // A negative tolerance demands a positive margin; the quadrants only give 1.
    let p = write_fixture("quadrants", "quadrants.json");
    let ok = kadets(&["inradius", p.to_str().unwrap(), "--tol=-0.5"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = kadets(&["inradius", p.to_str().unwrap(), "--tol=-1.5"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["passed"], false);
}
