use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aak_core::io::{read_matrix_csv, read_report};

const BIN: &str = env!("CARGO_BIN_EXE_aak");

fn aak(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("AAK_THREADS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn square(dir: &Path) -> PathBuf {
    write(dir, "square.csv", "x,y\n0,0\n1,0\n1,1\n0,1\n")
}

fn identity(dir: &Path, q: usize) -> PathBuf {
    let rows: Vec<String> = (0..q).map(|i| (0..q).map(|j| if i == j { "1" } else { "0" }).collect::<Vec<_>>().join(",")).collect();
    write(dir, &format!("i{q}.csv"), &(rows.join("\n") + "\n"))
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn help_exits_zero_and_lists_flags() {
    assert_eq!(code(&aak(&["--help"])), 0);
    let cases: [(&str, &[&str]); 5] = [
        ("factorize", &["--input", "--k", "--seed", "--init", "--max-iters", "--tol", "--out-prefix"]),
        ("sivm", &["--input", "--k", "--seed", "--out-prefix"]),
        ("bounds", &["--q", "--k", "--partition", "--format"]),
        ("demo", &["--shape", "--n", "--k-range", "--seed", "--svg", "--csv-prefix"]),
        ("verify", &["--qmax", "--trials", "--seed"]),
    ];
    for (cmd, flags) in cases {
        let o = aak(&[cmd, "--help"]);
        assert_eq!(code(&o), 0, "{cmd}");
        let text = stdout(&o);
        for f in flags {
            assert!(text.contains(f), "{cmd} --help lacks {f}");
        }
    }
    assert!(!stdout(&aak(&["verify", "--help"])).contains("self-test-break"));
}

#[test]
fn unknown_flags_and_subcommands_exit_one() {
    let o = aak(&["bounds", "--q", "3", "--k", "1", "--bogus"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(code(&aak(&["frobnicate"])), 1);
    assert_eq!(code(&aak(&[])), 1);
    assert_eq!(code(&aak(&["bounds", "--q", "three", "--k", "1"])), 1);
}

#[test]
fn factorize_square() {
    let dir = tempfile::tempdir().unwrap();
    let input = square(dir.path());
    let prefix = dir.path().join("k4");
    let o = aak(&["factorize", "--input", p(&input), "--k", "4", "--out-prefix", p(&prefix)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("rss = ") && stdout(&o).contains("iterations = "));
    let report = read_report(dir.path().join("k4.report.json")).unwrap();
    assert!(report.rss < 1e-6);
    assert_eq!((report.n_points, report.dimension, report.command.as_str()), (4, 2, "factorize"));
    assert!(report.timings_ms.is_empty());
    let b = read_matrix_csv(dir.path().join("k4.B.csv")).unwrap();
    let a = read_matrix_csv(dir.path().join("k4.A.csv")).unwrap();
    let z = read_matrix_csv(dir.path().join("k4.Z.csv")).unwrap();
    // B and A are stored as is (rows of the file are matrix rows), which the
    // point-per-row reader returns transposed.
    assert_eq!((b.nrows(), b.ncols()), (4, 4));
    assert_eq!((a.nrows(), a.ncols()), (4, 4));
    assert_eq!((z.nrows(), z.ncols()), (2, 4));

    let prefix = dir.path().join("k2");
    let o = aak(&["factorize", "--input", p(&input), "--k", "2", "--out-prefix", p(&prefix), "--init", "uniform", "--timings"]);
    assert_eq!(code(&o), 0);
    let report = read_report(dir.path().join("k2.report.json")).unwrap();
    assert!(report.rss > 1e-3, "{}", report.rss);
    assert!(report.timings_ms.contains_key("fit"));
}

#[test]
fn factorize_validation_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = square(dir.path());
    let prefix = dir.path().join("x");
    for k in ["0", "5"] {
        let o = aak(&["factorize", "--input", p(&input), "--k", k, "--out-prefix", p(&prefix)]);
        assert_eq!(code(&o), 1, "k = {k}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(code(&aak(&["factorize", "--input", p(&input), "--k", "2", "--tol", "-1", "--out-prefix", p(&prefix)])), 1);
    assert_eq!(code(&aak(&["factorize", "--input", p(&input), "--k", "2", "--init", "magic", "--out-prefix", p(&prefix)])), 1);
    let missing = dir.path().join("missing.csv");
    assert_eq!(code(&aak(&["factorize", "--input", p(&missing), "--k", "2", "--out-prefix", p(&prefix)])), 2);
    let bad = write(dir.path(), "bad.csv", "1,2\n3,oops\n");
    assert_eq!(code(&aak(&["factorize", "--input", p(&bad), "--k", "1", "--out-prefix", p(&prefix)])), 1);
    let ragged = write(dir.path(), "ragged.csv", "1,2\n3\n");
    assert_eq!(code(&aak(&["factorize", "--input", p(&ragged), "--k", "1", "--out-prefix", p(&prefix)])), 1);
    let nowhere = dir.path().join("no/such/dir/x");
    assert_eq!(code(&aak(&["factorize", "--input", p(&input), "--k", "2", "--out-prefix", p(&nowhere)])), 2);
}

#[test]
fn factorize_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let pts: String = (0..30).map(|i| {
        let t = i as f64 * 0.7;
        format!("{},{},{}\n", t.cos(), (1.3 * t).sin(), (0.4 * t).cos() * 0.5)
    }).collect();
    let input = write(dir.path(), "pts.csv", &pts);
    for init in ["sivm", "random", "uniform"] {
        let run = |tag: &str| {
            let prefix = dir.path().join(format!("{init}{tag}"));
            let o = aak(&["factorize", "--input", p(&input), "--k", "3", "--seed", "11", "--init", init, "--out-prefix", p(&prefix)]);
            assert_eq!(code(&o), 0);
            let files: Vec<Vec<u8>> = [".B.csv", ".A.csv", ".Z.csv", ".report.json"]
                .iter()
                .map(|s| std::fs::read(format!("{}{s}", prefix.display())).unwrap())
                .collect();
            (o.stdout, files)
        };
        assert_eq!(run("a"), run("b"), "init {init}");
    }
}

#[test]
fn sivm_on_identity_data() {
    let dir = tempfile::tempdir().unwrap();
    let input = identity(dir.path(), 6);
    let prefix = dir.path().join("i6");
    let o = aak(&["sivm", "--input", p(&input), "--k", "3", "--out-prefix", p(&prefix)]);
    assert_eq!(code(&o), 0);
    let report = read_report(dir.path().join("i6.report.json")).unwrap();
    assert!((report.rss - 4.0).abs() < 1e-6, "{}", report.rss);
    let sel = report.selected_indices.unwrap();
    assert_eq!(sel.len(), 3);
    assert_eq!(report.command, "sivm");

    let o = aak(&["sivm", "--input", p(&input), "--k", "6", "--out-prefix", p(&prefix)]);
    assert_eq!(code(&o), 0);
    assert!(read_report(dir.path().join("i6.report.json")).unwrap().rss < 1e-12);

    let missing = dir.path().join("nope.csv");
    assert_eq!(code(&aak(&["sivm", "--input", p(&missing), "--k", "2", "--out-prefix", p(&prefix)])), 2);
    assert_eq!(code(&aak(&["sivm", "--input", p(&input), "--k", "0", "--out-prefix", p(&prefix)])), 1);
}

#[test]
fn bounds_values() {
    let o = aak(&["bounds", "--q", "20", "--k", "5"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["worst"].as_f64(), Some(40.0));
    assert_eq!(v["sivm"].as_f64(), Some(18.0));
    assert_eq!(v["partition"].as_f64(), Some(15.0));
    assert!((v["ratio"].as_f64().unwrap() - 5.0 / 6.0).abs() < 1e-15);
    assert!(v["centroid"].is_null());
    let certs = v["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 2);
    for c in certs {
        assert_eq!(c["pass"].as_bool(), Some(true));
        for key in ["q", "k", "kind", "predicted_error", "measured_error", "abs_gap"] {
            assert!(c.get(key).is_some(), "certificate lacks {key}");
        }
    }

    let v = json(&aak(&["bounds", "--q", "3", "--k", "1"]));
    assert_eq!(v["centroid"].as_f64(), Some(2.0));

    let o = aak(&["bounds", "--q", "8", "--k", "3", "--partition", "5,2,1"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let part = &v["certificates"][1];
    assert_eq!(part["partition"], serde_json::json!([5, 2, 1]));
    assert!((part["measured_error"].as_f64().unwrap() - 5.0).abs() < 1e-12);

    let table = stdout(&aak(&["bounds", "--q", "20", "--k", "5", "--format", "table"]));
    assert!(table.lines().any(|l| l.starts_with("worst") && l.trim_end().ends_with("40")));
    assert!(table.contains("PASS"));

    assert_eq!(code(&aak(&["bounds", "--q", "3", "--k", "0"])), 1);
    assert_eq!(code(&aak(&["bounds", "--q", "3", "--k", "4"])), 1);
    assert_eq!(code(&aak(&["bounds", "--q", "8", "--k", "3", "--partition", "4,3"])), 1);
    assert_eq!(code(&aak(&["bounds", "--q", "8", "--k", "2", "--partition", "4,3"])), 1);
}

#[test]
fn demo_square_recovers_the_hull() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("sq.svg");
    let prefix = dir.path().join("sq");
    let o = aak(&["demo", "--shape", "square", "--n", "50", "--k-range", "4..4", "--svg", p(&svg), "--csv-prefix", p(&prefix)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0]["hausdorff_to_data_hull"].as_f64().unwrap() < 1e-2);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") || text.starts_with("<?xml"));
    assert_eq!(text.matches("class=\"hull\"").count(), 2);
    assert_eq!(read_matrix_csv(dir.path().join("sq.points.csv")).unwrap().ncols(), 50);
    assert_eq!(read_matrix_csv(dir.path().join("sq.k4.Z.csv")).unwrap().ncols(), 4);
}

#[test]
fn demo_ring_improves_with_k_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let svg = dir.path().join(name);
        let o = aak(&["demo", "--shape", "ring", "--n", "60", "--k-range", "3..6", "--seed", "4", "--svg", p(&svg)]);
        assert_eq!(code(&o), 0);
        (o.stdout, std::fs::read(&svg).unwrap())
    };
    let first = run("a.svg");
    assert_eq!(first, run("b.svg"));
    let v: serde_json::Value = serde_json::from_slice(&first.0).unwrap();
    let rss: Vec<f64> = v["rows"].as_array().unwrap().iter().map(|r| r["rss"].as_f64().unwrap()).collect();
    assert_eq!(rss.len(), 4);
    assert!(rss.windows(2).all(|w| w[1] < w[0]), "{rss:?}");
    assert_eq!(v["rss_non_increasing"].as_bool(), Some(true));
}

#[test]
fn demo_validation() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("x.svg");
    assert_eq!(code(&aak(&["demo", "--n", "5", "--k-range", "3..10", "--svg", p(&svg)])), 1);
    assert_eq!(code(&aak(&["demo", "--n", "20", "--k-range", "5..3", "--svg", p(&svg)])), 1);
    assert_eq!(code(&aak(&["demo", "--n", "20", "--k-range", "three", "--svg", p(&svg)])), 1);
    assert_eq!(code(&aak(&["demo", "--shape", "torus", "--svg", p(&svg)])), 1);
}

#[test]
fn verify_passes_and_detects_faults() {
    let o = aak(&["verify"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);
    assert!(!text.contains("FAIL"));

    assert_eq!(code(&aak(&["verify", "--qmax", "2"])), 0);

    let o = aak(&["verify", "--self-test-break"]);
    assert_eq!(code(&o), 3);
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("FAIL")).count(), 1);
    assert!(text.lines().any(|l| l.starts_with("FAIL identity_certificates")));

    assert_eq!(code(&aak(&["verify", "--qmax", "1"])), 1);
    assert_eq!(code(&aak(&["verify", "--trials", "0"])), 1);
}

#[test]
fn verify_report_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let o = aak(&["verify", "--seed", seed, "--qmax", "12", "--trials", "200", "--report", p(&path)]);
        assert_eq!(code(&o), 0);
        (o.stdout, std::fs::read(&path).unwrap())
    };
    let a = run("a.json", "3");
    assert_eq!(a, run("b.json", "3"));
    let v: serde_json::Value = serde_json::from_slice(&a.1).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 6);
    assert!(v["certificates"].as_array().unwrap().iter().all(|c| c["pass"].as_bool() == Some(true)));
}

#[test]
fn thread_count_from_environment() {
    let run = |threads: &str| Command::new(BIN).args(["verify", "--qmax", "6", "--trials", "50"]).env("AAK_THREADS", threads).output().unwrap();
    let one = run("1");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, run("3").stdout);
    assert_eq!(code(&run("0")), 1);
    assert_eq!(code(&run("many")), 1);
}
