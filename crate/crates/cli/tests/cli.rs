use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use balkit::iofmt;
use balkit::metrics;
use balkit::system::random_stable;
use balkit::{StateSpace, TransferFunction};
use nalgebra::DMatrix;
use num_complex::Complex64;
use tempfile::TempDir;

fn balkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_balkit"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Exit code and parsed stderr error line of a failing run.
fn failure(out: &Output) -> (i32, serde_json::Value) {
    let code = out.status.code().expect("exited normally");
    assert_ne!(code, 0);
    let err = String::from_utf8_lossy(&out.stderr);
    let last = err.lines().last().expect("an error line");
    (code, serde_json::from_str(last).expect("error line is JSON"))
}

fn s1() -> StateSpace {
    let one = |x: f64| DMatrix::from_element(1, 1, x);
    StateSpace::dense(None, one(-1.0), one(1.0), one(1.0), None).unwrap()
}

fn s2() -> StateSpace {
    StateSpace::dense(
        None,
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -10.0])),
        DMatrix::from_element(2, 1, 1.0),
        DMatrix::from_element(1, 2, 1.0),
        None,
    )
    .unwrap()
}

fn save(dir: &TempDir, name: &str, sys: &StateSpace) -> PathBuf {
    let path = dir.path().join(format!("{name}.json"));
    iofmt::save_system(&path, sys).unwrap();
    path
}

#[test]
fn spa_of_full_order_reproduces_s1() {
    let dir = TempDir::new().unwrap();
    save(&dir, "s1", &s1());
    ok(&balkit(dir.path(), &["reduce", "--method", "spa", "--order", "1", "--system", "s1.json", "--out", "rom.json", "--report", "rep.json"]));
    let rom = iofmt::load_rom(&dir.path().join("rom.json")).unwrap();
    for s in [Complex64::new(0.0, 0.0), Complex64::new(0.3, 2.0), Complex64::new(0.0, 50.0)] {
        let h = rom.eval(s).unwrap()[(0, 0)];
        assert!((h - (s + 1.0).inv()).norm() <= 1e-12);
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    assert_eq!(report["r"], 1);
    assert!((report["hankel_singular_values"][0].as_f64().unwrap() - 0.5).abs() <= 1e-14);
}

#[test]
fn order_beyond_state_dimension_fails() {
    let dir = TempDir::new().unwrap();
    save(&dir, "sys", &random_stable(3, 1, 1, 11).unwrap());
    let out = balkit(dir.path(), &["reduce", "--method", "spa", "--order", "5", "--system", "sys.json", "--out", "rom.json"]);
    let (code, err) = failure(&out);
    assert_eq!(code, 3);
    assert_eq!(err["class"], "numerical");
    assert!(!dir.path().join("rom.json").exists());
}

#[test]
fn quadspa_from_samples_recovers_s1() {
    let dir = TempDir::new().unwrap();
    save(&dir, "s1", &s1());
    ok(&balkit(dir.path(), &["sample", "--system", "s1.json", "--nodes", "0.1:10:10", "--out", "h.csv"]));
    ok(&balkit(dir.path(), &["reduce", "--method", "quadspa", "--samples", "h.csv", "--order", "1", "--out", "rom.json"]));
    let rom = iofmt::load_rom(&dir.path().join("rom.json")).unwrap();
    let grid = metrics::log_grid(1e-3, 1e3, 200).unwrap();
    assert!(metrics::max_deviation(&s1(), &rom, &grid).unwrap() <= 1e-8);
}

#[test]
fn quadspa_refuses_samples_without_dc_gain() {
    let dir = TempDir::new().unwrap();
    save(&dir, "s1", &s1());
    ok(&balkit(dir.path(), &["sample", "--system", "s1.json", "--nodes", "0.1:10:10", "--bare", "--out", "h.csv"]));
    let out = balkit(dir.path(), &["reduce", "--method", "quadspa", "--samples", "h.csv", "--order", "1", "--out", "rom.json"]);
    let (code, err) = failure(&out);
    assert_eq!(code, 2);
    assert_eq!(err["error"], "missing_data");
}

#[test]
fn realified_quadbt_matches_the_complex_model() {
    let dir = TempDir::new().unwrap();
    let sys = random_stable(6, 1, 2, 21).unwrap();
    save(&dir, "sys", &sys);
    let common = ["--method", "quadbt", "--order", "4", "--system", "sys.json", "--nodes", "1e-2:1e2:60"];
    ok(&balkit(dir.path(), &[&["reduce"], &common[..], &["--out", "c.json"]].concat()));
    ok(&balkit(dir.path(), &[&["reduce"], &common[..], &["--realify", "--out", "r.json"]].concat()));
    let c = iofmt::load_rom(&dir.path().join("c.json")).unwrap();
    let r = iofmt::load_rom(&dir.path().join("r.json")).unwrap();
    assert!(matches!(c, iofmt::AnyRom::Complex(_)));
    assert!(matches!(r, iofmt::AnyRom::Real(_)));
    let grid = metrics::log_grid(1e-2, 1e2, 100).unwrap();
    let scale = metrics::hinf_grid(&c, 1e-2, 1e2, 100, false).unwrap();
    assert!(metrics::max_deviation(&c, &r, &grid).unwrap() <= 1e-10 * scale);
}

#[test]
fn compare_writes_one_row_per_node() {
    let dir = TempDir::new().unwrap();
    save(&dir, "s1", &s1());
    ok(&balkit(dir.path(), &["reduce", "--method", "bt", "--order", "1", "--system", "s1.json", "--out", "exact.json"]));
    let out = balkit(dir.path(), &["compare", "--system", "s1.json", "exact.json", "--grid", "1e-2:1e2:37", "--out", "cmp.csv"]);
    ok(&out);
    let text = std::fs::read_to_string(dir.path().join("cmp.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("omega,fom,err_exact"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 37);
    assert!(rows.iter().all(|r| r[2] <= 1e-12));
    assert!(String::from_utf8_lossy(&out.stdout).contains("exact"));
}

#[test]
fn spa_beats_bt_at_low_frequency() {
    let dir = TempDir::new().unwrap();
    save(&dir, "s2", &s2());
    for m in ["bt", "spa"] {
        ok(&balkit(dir.path(), &["reduce", "--method", m, "--order", "1", "--system", "s2.json", "--out", &format!("{m}.json")]));
    }
    ok(&balkit(dir.path(), &["compare", "--system", "s2.json", "bt.json", "spa.json", "--grid", "1e-4:1e2:20", "--out", "cmp.csv"]));
    let text = std::fs::read_to_string(dir.path().join("cmp.csv")).unwrap();
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[0], 1e-4);
    assert!(first[3] <= first[2], "spa {} against bt {}", first[3], first[2]);
}

#[test]
fn compare_rejects_mismatched_dimensions() {
    let dir = TempDir::new().unwrap();
    save(&dir, "s1", &s1());
    save(&dir, "wide", &random_stable(4, 2, 1, 5).unwrap());
    ok(&balkit(dir.path(), &["reduce", "--method", "bt", "--order", "2", "--system", "wide.json", "--out", "wide_rom.json"]));
    let out = balkit(dir.path(), &["compare", "--system", "s1.json", "wide_rom.json", "--out", "cmp.csv"]);
    let (code, err) = failure(&out);
    assert_eq!(code, 2);
    assert_eq!(err["error"], "dimension");
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    let (code, err) = failure(&balkit(dir.path(), &["reduce", "--method", "bt"]));
    assert_eq!((code, err["class"].as_str()), (2, Some("usage")));
    let (code, err) = failure(&balkit(dir.path(), &["reduce", "--method", "bt", "--order", "1", "--system", "missing.json", "--out", "r.json"]));
    assert_eq!((code, err["class"].as_str()), (4, Some("io")));
    std::fs::write(dir.path().join("bad.json"), "{\"A\": 3}").unwrap();
    let (code, _) = failure(&balkit(dir.path(), &["reduce", "--method", "bt", "--order", "1", "--system", "bad.json", "--out", "r.json"]));
    assert_eq!(code, 4);
    let (code, err) = failure(&balkit(dir.path(), &["bench", "paper-tables"]));
    assert_eq!((code, err["error"].as_str()), (2, Some("missing_data")));
    let out = balkit(dir.path(), &["--help"]);
    ok(&out);
}

#[test]
fn thread_count_does_not_change_the_result() {
    let dir = TempDir::new().unwrap();
    save(&dir, "sys", &random_stable(12, 2, 2, 3).unwrap());
    let args = |out: &str| {
        vec!["reduce", "--method", "quadspa", "--order", "4", "--system", "sys.json", "--nodes", "1e-2:1e2:40", "--realify", "--out"]
            .into_iter()
            .map(String::from)
            .chain([out.to_string()])
            .collect::<Vec<_>>()
    };
    let run = |threads: &str, out: &str| {
        Command::new(env!("CARGO_BIN_EXE_balkit"))
            .current_dir(dir.path())
            .env("BALKIT_THREADS", threads)
            .args(args(out))
            .output()
            .unwrap()
    };
    ok(&run("1", "one.json"));
    ok(&run("4", "four.json"));
    let a = std::fs::read_to_string(dir.path().join("one.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("four.json")).unwrap();
    assert_eq!(a, b);
    let (code, _) = failure(&run("0", "zero.json"));
    assert_eq!(code, 2);
}

#[test]
fn benches_write_tables() {
    let dir = TempDir::new().unwrap();
    ok(&balkit(dir.path(), &["bench", "heat-scaling", "--sizes", "40,80", "--order", "4", "--out", "heat.csv"]));
    let text = std::fs::read_to_string(dir.path().join("heat.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    for line in text.lines().skip(1) {
        let dev: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(dev <= 1e-8, "{line}");
    }
    ok(&balkit(dir.path(), &["bench", "quad-convergence", "--n", "8", "--order", "3", "--np", "10,20", "--out", "quad.csv"]));
    let text = std::fs::read_to_string(dir.path().join("quad.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("np,quadbt_dev,quadspa_dev"));
    assert_eq!(text.lines().count(), 3);
}
