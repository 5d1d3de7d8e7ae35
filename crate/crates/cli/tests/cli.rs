use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_parasketch"));
    cmd.args(args).env("RUST_LOG", "warn").env_remove("PARASKETCH_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(value).unwrap()).unwrap();
    p
}

fn small_synthetic(methods: &[&str]) -> Value {
    json!({
        "model": { "kind": "synthetic", "n": 24, "seed": 3 },
        "methods": methods,
        "ranks": [2, 4, 6],
        "oversampling": 4,
        "grid": { "points": 21 },
        "trials": 4,
        "base_seed": 7,
        "output_dir": "out"
    })
}

fn csv_rows(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    (
        header,
        lines.map(|l| l.split(',').map(str::to_string).collect()).collect(),
    )
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&run(&[], &[])), 1);
    assert_eq!(code(&run(&["approx"], &[])), 1);
    assert_eq!(code(&run(&["frobnicate", "--config", "x.json"], &[])), 1);
    assert_eq!(code(&run(&["--help"], &[])), 0);

    let missing = run(&["approx", "--config", "/nonexistent/config.json"], &[]);
    assert_eq!(code(&missing), 1);
    assert!(stderr(&missing).contains("cannot read config"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"model": {"kind": "synthetic", "n": 10}, "ranks": [2], "colour": 1}"#,
    )
    .unwrap();
    let out = run(&["approx", "--config", bad.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("colour"), "{}", stderr(&out));

    let cfg = write_config(dir.path(), "c.json", &small_synthetic(&["hmt"]));
    let threads = run(
        &["approx", "--config", cfg.to_str().unwrap()],
        &[("PARASKETCH_THREADS", "many")],
    );
    assert_eq!(code(&threads), 1);
}

#[test]
fn approx_writes_sweep_csv_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sweep.json",
        &small_synthetic(&["hmt", "gn", "svd-baseline", "independent-drm"]),
    );
    let out = run(&["approx", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let out_dir = dir.path().join("out");
    for method in ["hmt", "gn", "svd-baseline", "independent-drm"] {
        let (header, rows) = csv_rows(&out_dir.join(format!("approx_{method}.csv")));
        assert_eq!(header, "rank,mean_l2,min_l2,max_l2,best_l2");
        assert_eq!(rows.len(), 3);
        for (row, rank) in rows.iter().zip([2, 4, 6]) {
            assert_eq!(row[0], rank.to_string());
            let v: Vec<f64> = row[1..].iter().map(|x| x.parse().unwrap()).collect();
            assert!(v[1] <= v[0] && v[0] <= v[2], "{row:?}");
            // No method beats the truncated SVD at the same sketch size.
            assert!(v[1] >= v[3] * (1.0 - 1e-10), "{method} {row:?}");
        }
        assert!(out_dir.join(format!("approx_{method}.gp")).is_file());
    }

    // The baseline is exactly its own best column.
    let (_, rows) = csv_rows(&out_dir.join("approx_svd-baseline.csv"));
    for row in rows {
        assert_eq!(row[1], row[4]);
        assert_eq!(row[2], row[4]);
        assert_eq!(row[3], row[4]);
    }
}

#[test]
fn approx_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &small_synthetic(&["hmt", "gn"]));
    let cfg = cfg.to_str().unwrap();
    let read = |m: &str| fs::read(dir.path().join("out").join(format!("approx_{m}.csv"))).unwrap();

    assert_eq!(code(&run(&["approx", "--config", cfg, "--threads", "1"], &[])), 0);
    let (hmt1, gn1) = (read("hmt"), read("gn"));
    assert_eq!(
        code(&run(&["approx", "--config", cfg], &[("PARASKETCH_THREADS", "3")])),
        0
    );
    assert_eq!(read("hmt"), hmt1);
    assert_eq!(read("gn"), gn1);

    assert_eq!(code(&run(&["approx", "--config", cfg, "--seed", "8"], &[])), 0);
    assert_ne!(read("hmt"), hmt1);
}

#[test]
fn approx_rejects_oversized_sketch_and_small_rank() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_synthetic(&["hmt"]);
    c["ranks"] = json!([22]);
    let cfg = write_config(dir.path(), "big.json", &c);
    let out = run(&["approx", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(!dir.path().join("out").exists());

    c["ranks"] = json!([1]);
    let cfg = write_config(dir.path(), "small.json", &c);
    let out = run(&["approx", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("r >= 2"), "{}", stderr(&out));
}

#[test]
fn affine_methods_need_an_affine_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &small_synthetic(&["hmt-affine"]));
    let out = run(&["approx", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("affine model"));

    let out = run(&["bench", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 1);
}

#[test]
fn verify_reports_hypothesis_violation_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small_synthetic(&["hmt"]);
    c["oversampling"] = json!(3);
    let cfg = write_config(dir.path(), "c.json", &c);
    let out = run(&["verify", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("oversampling p >= 4"), "{}", stderr(&out));
    assert!(!dir.path().join("out").exists());

    c["oversampling"] = json!(4);
    c["methods"] = json!(["gn"]);
    c["second_oversampling"] = json!(2);
    let cfg = write_config(dir.path(), "c.json", &c);
    let out = run(&["verify", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("l >= 4"), "{}", stderr(&out));

    c["methods"] = json!(["svd-baseline"]);
    let cfg = write_config(dir.path(), "c.json", &c);
    assert_eq!(code(&run(&["verify", "--config", cfg.to_str().unwrap()], &[])), 1);
}

fn write_matrix(path: &Path, rows: &[Vec<f64>]) {
    let text: String = rows
        .iter()
        .map(|r| r.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    fs::write(path, text).unwrap();
}

#[test]
fn verify_passes_on_exact_rank_model() {
    let dir = tempfile::tempdir().unwrap();
    // Two rank-1 terms, so A(t) has rank at most 2 < r.
    let (m, n) = (16, 12);
    let u: Vec<f64> = (0..m).map(|i| ((i * 7 % 5) as f64 - 2.0) / 3.0).collect();
    let v: Vec<f64> = (0..n).map(|j| ((j * 3 % 7) as f64 - 3.0) / 4.0).collect();
    let w: Vec<f64> = (0..n).map(|j| (j as f64 * 0.4).sin()).collect();
    let outer =
        |a: &[f64], b: &[f64]| -> Vec<Vec<f64>> { a.iter().map(|x| b.iter().map(|y| x * y).collect()).collect() };
    write_matrix(&dir.path().join("a0.csv"), &outer(&u, &v));
    write_matrix(
        &dir.path().join("a1.csv"),
        &outer(&v[..n].iter().chain(&u[..m - n]).copied().collect::<Vec<_>>(), &w),
    );
    let c = json!({
        "model": {
            "kind": "affine-file",
            "domain": [0.0, 1.0],
            "terms": [ { "phi": "1", "matrix": "a0.csv" }, { "phi": "t", "matrix": "a1.csv" } ]
        },
        "methods": ["hmt", "hmt-affine", "gn"],
        "ranks": [3],
        "oversampling": 4,
        "second_oversampling": 4,
        "grid": { "points": 11 },
        "verify": { "expectation_trials": 30, "tail_trials": 100, "sup": { "gamma": 2.0, "u": 3.0, "k_subintervals": 2 } },
        "output_dir": "out"
    });
    let cfg = write_config(dir.path(), "c.json", &c);
    let out = run(&["verify", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(
        code(&out),
        0,
        "{}\n{}",
        stderr(&out),
        String::from_utf8_lossy(&out.stdout)
    );

    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/verify.json")).unwrap()).unwrap();
    assert_eq!(summary["all_pass"], json!(true));
    let verdicts = summary["verdicts"].as_array().unwrap();
    // expectation + 2 tails per method, plus sup-tail for the two HMT variants
    assert_eq!(verdicts.len(), 3 * 3 + 2);
    for v in verdicts {
        assert_eq!(v["pass"], json!(true));
        for key in ["name", "kind", "statistic", "bound", "ratio", "margin", "n_trials"] {
            assert!(v.get(key).is_some(), "{key} missing in {v}");
        }
    }
    let (header, rows) = csv_rows(&dir.path().join("out/trials_hmt_r3.csv"));
    assert_eq!(header, "trial,l2_error,sup_error");
    assert_eq!(rows.len(), 100);
}

fn bench_config(points: usize, assert_timing: bool) -> Value {
    json!({
        "model": { "kind": "random-affine", "k": 2, "m": 60, "n": 50, "seed": 4 },
        "ranks": [4, 6],
        "oversampling": 4,
        "grid": { "points": points },
        "bench": { "assert_timing": assert_timing },
        "output_dir": "out"
    })
}

#[test]
fn bench_writes_timing_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &bench_config(40, true));
    let out = run(
        &["bench", "--config", cfg.to_str().unwrap(), "--skip-timing-asserts"],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(&dir.path().join("out/bench.csv"));
    assert_eq!(header, "method,phase,seconds,k,q,rank");
    assert_eq!(rows.len(), 2 * 2 * 3);
    for row in &rows {
        assert!(["hmt", "gn"].contains(&row[0].as_str()));
        assert!(["offline", "online", "direct"].contains(&row[1].as_str()));
        assert!(row[2].parse::<f64>().unwrap() >= 0.0);
        assert_eq!((row[3].as_str(), row[4].as_str()), ("2", "40"));
    }

    // A single evaluation point: reported, never asserted.
    let cfg = write_config(dir.path(), "c.json", &bench_config(1, true));
    let out = run(&["bench", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (_, rows) = csv_rows(&dir.path().join("out/bench.csv"));
    assert!(rows.iter().all(|r| r[4] == "1"));
}
