use std::path::Path;
use std::process::{Command, Output};

use lipembed::dump::DUMP_SCHEMA;
use lipembed::format::read_field;
use lipembed::render::count_cells;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipembed")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn out_dir(d: &Path, name: &str) -> String {
    d.join(name).display().to_string()
}

fn jsonl(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn audit_params_prints_ten_rows() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["audit-params", "--profile", "reference", "--out", &out_dir(d.path(), "a")]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows = text.lines().filter(|l| l.contains("satisfied") || l.contains("violated") || l.contains("inconclusive")).filter(|l| !l.starts_with("overall")).count();
    assert_eq!(rows, 10);
    let recs = jsonl(&d.path().join("a/audit.jsonl"));
    assert_eq!(recs.len(), 10);
    assert!(recs.iter().all(|r| r["schema"] == "lipembed-report/1" && r["table"] == "audit"));
    assert_eq!(recs.iter().filter(|r| r["verdict"] == "violated").count(), 3);
    let csv = std::fs::read_to_string(d.path().join("a/audit.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn build_twice_gives_identical_dumps() {
    let d = tempfile::tempdir().unwrap();
    for name in ["b1", "b2"] {
        let o = run(&["build", "--seed", "11", "--depth", "1", "--window", "0,0,3,3", "--out", &out_dir(d.path(), name)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(d.path().join("b1/hierarchy.jsonl")).unwrap();
    let b = std::fs::read(d.path().join("b2/hierarchy.jsonl")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let recs = jsonl(&d.path().join("b1/hierarchy.jsonl"));
    assert_eq!(recs[0]["schema"], DUMP_SCHEMA);
    assert_eq!(recs[0]["depth"], 1);
    // Manifests agree on the config hash; the recorded output directory differs.
    let m1: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("b1/build.manifest.json")).unwrap()).unwrap();
    let m2: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("b2/build.manifest.json")).unwrap()).unwrap();
    assert_eq!(m1["config_hash"], m2["config_hash"]);
    assert_eq!(m1["seed"], 11);
    assert_eq!(m1["outputs"][0]["path"], "hierarchy.jsonl");
    assert_eq!(m1["outputs"][0]["sha256"], lipembed::manifest::sha256_hex(&a));
}

#[test]
fn render_cell_count_matches_dump() {
    let d = tempfile::tempdir().unwrap();
    let dir = out_dir(d.path(), "r");
    for cmd in ["build", "render"] {
        let o = run(&[cmd, "--seed", "4", "--window", "0,0,4,3", "--out", &dir]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    // A second render in the same directory would need a different manifest.
    let o = run(&["render", "--seed", "4", "--window", "0,0,4,3", "--level", "0", "--depth", "1", "--out", &dir]);
    assert_eq!(code(&o), 2);
    let o = run(&["render", "--seed", "4", "--window", "0,0,4,3", "--level", "0", "--depth", "1", "--out", &out_dir(d.path(), "r0")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let recs = jsonl(&d.path().join("r/hierarchy.jsonl"));
    for (j, sub) in [(0u64, "r0"), (1, "r")] {
        let svg = std::fs::read_to_string(d.path().join(sub).join(format!("level{j}.svg"))).unwrap();
        assert!(svg.starts_with("<?xml") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<svg").count(), 1);
        let dumped = recs.iter().filter(|r| r["kind"] == "cell" && r["level"] == j).count();
        assert_eq!(count_cells(&svg), dumped, "level {j}");
        if j == 1 {
            assert_eq!(dumped, 12);
            assert!(svg.contains(r#"class="curve""#));
        }
    }
}

#[test]
fn sample_writes_a_readable_field() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["sample", "--family", "X", "--cells", "13x7", "--seed", "3", "--out", &out_dir(d.path(), "s")]);
    assert_eq!(code(&o), 0);
    let bytes = std::fs::read(d.path().join("s/field-X.lpf")).unwrap();
    let f = read_field(&mut std::io::Cursor::new(bytes)).unwrap();
    assert_eq!((f.width, f.height, f.seed), (13, 7, 3));
    assert_eq!(f, lipembed_core::fields::sample_field(3, lipembed_core::Family::X, lipembed_core::Point::new(0, 0), 13, 7, u64::MAX).unwrap());
}

#[test]
fn reports_do_not_depend_on_workers() {
    let d = tempfile::tempdir().unwrap();
    for w in ["1", "3"] {
        let o = run(&["reports", "--seed", "2", "--windows", "6", "--cells", "24x24", "--workers", w, "--out", &out_dir(d.path(), w)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["tail.csv", "tail.jsonl", "size.csv", "size.jsonl", "good.csv", "good.jsonl"] {
        assert_eq!(std::fs::read(d.path().join("1").join(f)).unwrap(), std::fs::read(d.path().join("3").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn oracle_instances_round_trip_through_files() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["oracle", "--random", "4", "--mode", "count", "--m", "2", "--seed", "8", "--out", &out_dir(d.path(), "o")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = jsonl(&d.path().join("o/results.jsonl"));
    assert_eq!(first.len(), 4);
    let inst = out_dir(d.path(), "o/instances/00002.inst");
    let o = run(&["oracle", "--instance", &inst, "--out", &out_dir(d.path(), "p")]);
    assert_eq!(code(&o), 0);
    let again = jsonl(&d.path().join("p/results.jsonl"));
    assert_eq!(again[0]["count"], first[2]["count"]);
    assert_eq!(again[0]["exists"], first[2]["exists"]);
}

#[test]
fn estimate_s_reports_an_exact_comparison() {
    let d = tempfile::tempdir().unwrap();
    let o = run(&["estimate-s", "--seed", "2", "--cells", "100x100", "--trials", "400", "--witnesses", "1", "--out", &out_dir(d.path(), "e")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rec = &jsonl(&d.path().join("e/estimate.jsonl"))[0];
    assert_eq!(rec["trials"], 400);
    assert!(rec["ci_low"].as_f64().unwrap() <= rec["estimate"].as_f64().unwrap());
    assert!(rec["exact"].is_string());
    let w = &jsonl(&d.path().join("e/witnesses.jsonl"))[0];
    assert_eq!(w["kind"], "witness");
    assert!(!w["sites"].as_array().unwrap().is_empty());
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let dir = out_dir(d.path(), "x");
    // config
    assert_eq!(code(&run(&["build", "--nonsense"])), 1);
    assert_eq!(code(&run(&["build", "--profile", "nowhere.profile", "--out", &dir])), 1);
    assert_eq!(code(&run(&["build", "--depth", "7", "--out", &dir])), 1);
    assert_eq!(code(&run(&["audit-params", "--param", "alpha=zero", "--out", &dir])), 1);
    // precondition
    assert_eq!(code(&run(&["estimate-s", "--cells", "3x3", "--out", &dir])), 2);
    assert_eq!(code(&run(&["estimate-s", "--cells", "50x50", "--component", "0", "--trials", "0", "--out", &dir])), 2);
    // cap
    assert_eq!(code(&run(&["sample", "--cells", "3000x3000", "--param", "field_cap=1000000", "--out", &dir])), 3);
    assert_eq!(code(&run(&["oracle", "--random", "1", "--x-size", "5x5", "--out", &dir])), 3);
    assert_eq!(code(&run(&["audit-params", "--out", &dir])), 0);
}

#[test]
fn artifacts_are_never_replaced() {
    let d = tempfile::tempdir().unwrap();
    let dir = out_dir(d.path(), "n");
    assert_eq!(code(&run(&["sample", "--seed", "1", "--cells", "8x8", "--out", &dir])), 0);
    let before = std::fs::read(d.path().join("n/field-Y.lpf")).unwrap();
    // The same run again writes identical bytes; a different seed would change them.
    assert_eq!(code(&run(&["sample", "--seed", "1", "--cells", "8x8", "--out", &dir])), 0);
    assert_eq!(code(&run(&["sample", "--seed", "2", "--cells", "8x8", "--out", &dir])), 2);
    assert_eq!(std::fs::read(d.path().join("n/field-Y.lpf")).unwrap(), before);
}

#[test]
fn config_file_and_flags() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.conf");
    std::fs::write(&cfg, "profile = toy\nseed = 5\ncells = 6x6\nfamily = X\n").unwrap();
    let dir = out_dir(d.path(), "c");
    let o = run(&["sample", "--config", cfg.to_str().unwrap(), "--seed", "6", "--out", &dir]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let f = read_field(&mut std::io::Cursor::new(std::fs::read(d.path().join("c/field-X.lpf")).unwrap())).unwrap();
    assert_eq!((f.seed, f.width), (6, 6));
}
