use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn sgp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgp"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .env_remove("SGP_OUTPUT_DIR")
        .output()
        .expect("run sgp")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sgp(dir, args);
    assert!(
        out.status.success(),
        "sgp {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json_line(s: &str) -> Value {
    serde_json::from_str(s.lines().last().unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| {
            l.chars()
                .next()
                .is_some_and(|c| c.is_ascii_digit() || c == '-')
        })
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn dp_cluster_count_pmf_for_three_units() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &["partition", "kn-pmf", "--dp", "--alpha", "1", "--n", "3"],
    );
    let rows = csv_rows(&d.path().join("kn_pmf.csv"));
    let want = [1.0 / 3.0, 0.5, 1.0 / 6.0];
    assert_eq!(rows.len(), 3);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r[0], (i + 1) as f64);
        assert!((r[1] - want[i]).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn sgp_pmf_mean_at_reference_size() {
    let d = TempDir::new().unwrap();
    for (a, b, m) in [
        ("5", "1", "100"),
        ("0.6", "0.2", "149"),
        ("6", "0.3", "100"),
    ] {
        ok(
            d.path(),
            &[
                "partition",
                "kn-pmf",
                "--a",
                a,
                "--b",
                b,
                "--m",
                m,
                "--n",
                m,
            ],
        );
        let rows = csv_rows(&d.path().join("kn_pmf.csv"));
        let mean: f64 = rows.iter().map(|r| r[0] * r[1]).sum();
        let loc = a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap();
        assert!((mean - loc).abs() < 1e-6, "Sg({a},{b},{m}): {mean}");
    }
}

#[test]
fn elicit_prints_prior() {
    let d = TempDir::new().unwrap();
    let s = ok(
        d.path(),
        &["sg", "elicit", "--ek", "3", "--b", "0.2", "--n", "149"],
    );
    assert_eq!(s.lines().next().unwrap(), "Sg(0.6, 0.2, 149)");
    let v = json_line(&s);
    assert!((v["a"].as_f64().unwrap() - 0.6).abs() < 1e-15);
    assert_eq!(v["m"], 149);
}

#[test]
fn sampler_acceptance_rate() {
    let d = TempDir::new().unwrap();
    let s = ok(
        d.path(),
        &[
            "sg", "sample", "--a", "2", "--b", "0.2", "--m", "100", "--count", "100000", "--seed",
            "11",
        ],
    );
    let v = json_line(&s);
    let rate = v["acceptance_rate"].as_f64().unwrap();
    let theory = v["theoretical_acceptance"].as_f64().unwrap();
    assert!((theory - 0.756).abs() < 0.001, "{theory}");
    assert!((rate - 0.756).abs() < 0.005, "{rate}");
    let draws = csv_rows(&d.path().join("samples.csv"));
    assert_eq!(draws.len(), 100_000);
    assert!(draws.iter().all(|r| r.len() == 1 && r[0] > 0.0));
}

#[test]
fn pdf_grid_integrates_to_one() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &["sg", "pdf", "--a", "5", "--b", "1", "--m", "100"],
    );
    let rows = csv_rows(&d.path().join("pdf.csv"));
    let integral: f64 = rows
        .windows(2)
        .map(|w| 0.5 * (w[1][0] - w[0][0]) * (w[0][1] + w[1][1]))
        .sum();
    assert!((integral - 1.0).abs() < 1e-4, "{integral}");
}

#[test]
fn limit_distance_shrinks() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &[
            "partition",
            "limits",
            "--a",
            "5",
            "--b",
            "1",
            "--m",
            "10000",
        ],
    );
    let rows = csv_rows(&d.path().join("limits_tv.csv"));
    let at = |m: f64| rows.iter().find(|r| r[0] == m).unwrap().clone();
    assert!(at(10_000.0)[1] < at(100.0)[1]);
    assert!(at(10_000.0)[2] < at(100.0)[2]);
}

#[test]
fn moments_report_infinity() {
    let d = TempDir::new().unwrap();
    let v = json_line(&ok(
        d.path(),
        &["sg", "moments", "--a", "0.6", "--b", "0.2", "--m", "4"],
    ));
    assert_eq!(v["mean"]["infinite"], true);
    assert!(v["mean"]["value"].is_null());
    // mb − a = 1 puts the first moment on the boundary.
    let v = json_line(&ok(
        d.path(),
        &["sg", "moments", "--a", "1", "--b", "0.4", "--m", "5"],
    ));
    assert_eq!(v["mean"]["boundary"], true);
    let v = json_line(&ok(
        d.path(),
        &["sg", "moments", "--a", "2", "--b", "0.2", "--m", "100"],
    ));
    assert!(v["mean"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    let code = |args: &[&str]| sgp(d.path(), args).status.code().unwrap();
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["sg", "pdf", "--a", "1"]), 1);
    assert_eq!(
        code(&["sg", "sample", "--a", "1", "--b", "2", "--m", "10"]),
        1
    );
    assert_eq!(
        code(&[
            "fit-mixture",
            "--data",
            "/nonexistent/data.csv",
            "--prior",
            "fixed:1"
        ]),
        1
    );
    assert_eq!(
        code(&["sg", "moments", "--a", "1e8", "--b", "1e7", "--m", "11"]),
        2
    );

    let out = sgp(
        d.path(),
        &["sg", "pdf", "--a", "30", "--b", "2", "--m", "10"],
    );
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1 < a/b < m"), "{err}");
}

#[test]
fn conjugacy_mismatch_is_rejected() {
    let d = TempDir::new().unwrap();
    ok(
        d.path(),
        &["simulate", "mixture", "--n", "40", "--seed", "2"],
    );
    let data = d.path().join("data.csv");
    let data = data.to_str().unwrap();
    let out = sgp(
        d.path(),
        &["fit-mixture", "--data", data, "--prior", "sg:0.73,0.1,100"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("m = 100, n = 40"));
    let m: Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("manifest.json")).unwrap()).unwrap();
    assert!(m["status"].as_str().unwrap().starts_with("error"));
}

#[test]
fn output_dir_from_environment() {
    let d = TempDir::new().unwrap();
    let target = d.path().join("nested/out");
    let out = Command::new(env!("CARGO_BIN_EXE_sgp"))
        .args(["partition", "kn-pmf", "--dp", "--alpha", "2", "--n", "10"])
        .env("SGP_OUTPUT_DIR", &target)
        .current_dir(d.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(target.join("kn_pmf.csv").exists());
    assert!(target.join("manifest.json").exists());
    assert!(!d.path().join("kn_pmf.csv").exists());
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn mixture_reruns_are_byte_identical() {
    let d = TempDir::new().unwrap();
    let (a, b, c, r) = (
        d.path().join("a"),
        d.path().join("b"),
        d.path().join("c"),
        d.path().join("r"),
    );
    ok(
        d.path(),
        &["simulate", "mixture", "--n", "120", "--seed", "7"],
    );
    let data = d.path().join("data.csv");
    let args = [
        "fit-mixture",
        "--data",
        data.to_str().unwrap(),
        "--prior",
        "sg:0.73,0.1",
        "--iterations",
        "300",
        "--burn-in",
        "100",
        "--chains",
        "2",
        "--seed",
        "5",
    ];
    ok(&a, &args);
    ok(&b, &args);
    ok(&r, &["replay", a.join("manifest.json").to_str().unwrap()]);
    for name in [
        "trace_chain0.csv",
        "trace_chain1.csv",
        "coclustering.csv",
        "kn_histogram.csv",
        "summary.json",
    ] {
        assert_eq!(read(&a, name), read(&b, name), "{name}");
        assert_eq!(read(&a, name), read(&r, name), "{name}");
    }
    let mut other = args.to_vec();
    *other.last_mut().unwrap() = "6";
    ok(&c, &other);
    assert_ne!(read(&a, "trace_chain0.csv"), read(&c, "trace_chain0.csv"));

    let summary: Value = serde_json::from_slice(&read(&a, "summary.json")).unwrap();
    assert_eq!(summary["n"], 120);
    assert_eq!(summary["prior"]["m"], 120);
    let trace = csv_rows(&a.join("trace_chain0.csv"));
    assert_eq!(trace.len(), 200);
    assert_eq!(trace[0][0], 101.0);
}

#[test]
fn network_pipeline_and_edge_lists() {
    let d = TempDir::new().unwrap();
    let sim = d.path().join("sim");
    ok(&sim, &["simulate", "networks", "--n", "40", "--seed", "7"]);
    let nets: Vec<String> = (1..=6)
        .map(|s| {
            sim.join(format!("network_{s}.csv"))
                .to_str()
                .unwrap()
                .to_string()
        })
        .collect();

    // The first network again, as a 1-based edge list.
    let dense = csv_rows(&sim.join("network_1.csv"));
    let mut edges = String::new();
    for (i, row) in dense.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if j > i && v == 1.0 {
                edges.push_str(&format!("{} {}\n", i + 1, j + 1));
            }
        }
    }
    let edge_file = d.path().join("edges.txt");
    fs::write(&edge_file, edges).unwrap();

    let run = |dir: &Path, first: &str| {
        let mut args = vec![
            "fit-sbm".to_string(),
            "--prior".into(),
            "independent:6,0.3".into(),
            "--truth".into(),
            sim.join("truth.csv").to_str().unwrap().into(),
            "--iterations".into(),
            "150".into(),
            "--burn-in".into(),
            "50".into(),
            "--nodes".into(),
            "40".into(),
        ];
        for (s, n) in nets.iter().enumerate() {
            args.push("--network".into());
            args.push(if s == 0 { first.to_string() } else { n.clone() });
        }
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        ok(dir, &args);
    };
    let (x, y) = (d.path().join("x"), d.path().join("y"));
    run(&x, &nets[0]);
    run(&y, edge_file.to_str().unwrap());
    assert_eq!(read(&x, "trace_chain0.csv"), read(&y, "trace_chain0.csv"));

    let summary: Value = serde_json::from_slice(&read(&x, "summary.json")).unwrap();
    let networks = summary["networks"].as_array().unwrap();
    assert_eq!(networks.len(), 6);
    for n in networks {
        let ari = n["point_estimate_ari"].as_f64().unwrap();
        assert!((-1.0..=1.0).contains(&ari));
    }
    // The cleanest network is recovered almost exactly.
    assert!(networks[0]["mean_ari"].as_f64().unwrap() > 0.9);
    let points = fs::read_to_string(x.join("point_estimates.csv")).unwrap();
    assert_eq!(points.lines().count(), 6);
    let hist = csv_rows(&x.join("kn_histograms.csv"));
    for s in 1..=6 {
        let total: f64 = hist.iter().map(|r| r[s]).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    let out = sgp(
        d.path(),
        &[
            "fit-sbm",
            "--network",
            &nets[0],
            "--prior",
            "pooled:6,0.3,100",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}
