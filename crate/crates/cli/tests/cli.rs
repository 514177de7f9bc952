use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distrisk"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str], out: &Path) -> Output {
    let o = run(args, out);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn generators_four_state_table() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["generators", "-c", &config("four_state.json")], dir.path());
    let table = rows(&dir.path().join("generators.csv"));
    let amp = |l: usize| 1.2f64.powi(4 - l as i32) * 0.8f64.powi(l as i32 - 1);
    let measures: Vec<&str> = table.iter().map(|r| &r[0]).collect();
    assert_eq!(measures, ["Q(1,3)", "Q(1,4)", "Q(2,3)", "Q(2,4)"]);
    for r in &table {
        let (l1, l2): (usize, usize) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        let q = (1.02 - amp(l2)) / (amp(l1) - amp(l2));
        let oracle = (q * (100.0 * amp(l1) - 100.0).max(0.0)
            + (1.0 - q) * (100.0 * amp(l2) - 100.0).max(0.0))
            / 1.02;
        assert!((num(&r[2 + l1]) - q).abs() < 1e-12);
        assert!((num(&r[7]) - oracle).abs() < 1e-9, "{}", &r[0]);
    }
    let lattice = json(&dir.path().join("lattice.json"));
    assert_eq!(lattice["generators"].as_array().unwrap().len(), 4);
}

#[test]
fn binomial_lattice_has_one_generator() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        &[
            "generators", "--u", "1.2", "--d", "0.8", "-L", "2", "--rate", "0.02", "--spot",
            "100", "--steps", "1", "--strike", "100",
        ],
        dir.path(),
    );
    assert_eq!(rows(&dir.path().join("generators.csv")).len(), 1);
}

#[test]
fn arbitrage_violation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["generators", "-c", &config("four_state.json"), "--rate", "0.9"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1+R"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"lattice": {"u": "high"}}"#).unwrap();
    let o = run(&["bounds", "-c", bad.to_str().unwrap()], &dir.path().join("o1"));
    assert_eq!(o.status.code(), Some(2));

    let o = run(
        &["memm", "-c", &config("four_state.json"), "--returns-file", "r.csv"],
        &dir.path().join("o2"),
    );
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["memm", "--rate", "0.02"], &dir.path().join("o3"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn memm_trinomial() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["memm", "-c", &config("trinomial.json")], dir.path());
    let r = json(&dir.path().join("memm.json"));
    let q: Vec<f64> = r["q_tilde"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    for (got, want) in q.iter().zip([0.3161, 0.3974, 0.2866]) {
        assert!((got - want).abs() < 1e-3);
    }
    assert!((r["relative_entropy"].as_f64().unwrap() - 0.000735).abs() < 1e-6);
}

#[test]
fn memm_pentanomial_matches_published_measure() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["memm", "-c", &config("pentanomial.json")], dir.path());
    let r = json(&dir.path().join("memm.json"));
    let q: Vec<f64> = r["q_tilde"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let mut want = [0.0, 0.0877, 0.4860, 0.2440, 0.1637];
    want[0] = 1.0 - want[1..].iter().sum::<f64>();
    for (got, w) in q.iter().zip(want) {
        assert!((got - w).abs() < 0.002, "{got} vs {w}");
    }
}

#[test]
fn memm_of_risk_neutral_p_is_p() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(
        &["memm", "-c", &config("trinomial.json"), "--probs", "0.3,0.4375,0.2625"],
        dir.path(),
    );
    let r = json(&dir.path().join("memm.json"));
    for (got, want) in r["q_tilde"].as_array().unwrap().iter().zip([0.3, 0.4375, 0.2625]) {
        assert!((got.as_f64().unwrap() - want).abs() < 1e-10);
    }
    assert!(r["relative_entropy"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn bounds_pentanomial_table() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["bounds", "-c", &config("pentanomial.json")], dir.path());
    let table = rows(&dir.path().join("bounds.csv"));
    assert_eq!(table.len(), 4);
    let want = [
        [3.1245, 1.9847, 7.3789, 2.5387, 1.3990, 6.7932],
        [4.6914, 2.9518, 8.9309, 3.1079, 1.3684, 7.3474],
        [5.9427, 3.8658, 10.6681, 3.4090, 1.3321, 8.1344],
        [7.0503, 4.8386, 12.4926, 3.6117, 1.3999, 9.0539],
    ];
    for (r, w) in table.iter().zip(want) {
        let got = [num(&r[1]), num(&r[2]), num(&r[4]), num(&r[6]), num(&r[7]), num(&r[8])];
        for (g, x) in got.iter().zip(w) {
            assert!((g - x).abs() < 0.02, "row {}: {g} vs {x}", &r[0]);
        }
    }
    assert_eq!(&table[0][3], "Q(3,4)");
    assert_eq!(&table[0][5], "Q(1,5)");
    assert!((num(&table[0][9]) - 0.5858).abs() < 1e-3);
}

#[test]
fn zero_strike_call_is_the_underlying() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["bounds", "-c", &config("four_state.json"), "--strike", "0"], dir.path());
    for r in rows(&dir.path().join("bounds.csv")) {
        for col in [1, 2, 4] {
            assert!((num(&r[col]) - 100.0).abs() < 1e-9);
        }
    }
}

#[test]
fn sample_four_state_ball() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["sample", "-c", &config("four_state.json")], dir.path());
    let s = json(&dir.path().join("summary.json"));
    let ball = &s["ball"];
    assert!((ball["min"].as_f64().unwrap() - 10.6699).abs() < 0.5);
    assert!((ball["max"].as_f64().unwrap() - 15.2084).abs() < 0.5);
    assert_eq!(s["prices"]["within_analytical_bounds"], Value::Bool(true));
    let samples = rows(&dir.path().join("samples.csv"));
    assert_eq!(samples.len(), 10_000);
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["seed"], 20221110);
    for a in manifest["artifacts"].as_array().unwrap() {
        assert!(dir.path().join(a.as_str().unwrap()).exists());
    }
}

#[test]
fn sample_pentanomial_ball_one_year() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["sample", "-c", &config("pentanomial.json"), "--maturity", "1"], dir.path());
    let ball = &json(&dir.path().join("summary.json"))["ball"];
    assert!((ball["min"].as_f64().unwrap() - 2.5973).abs() < 0.5);
    assert!((ball["max"].as_f64().unwrap() - 4.2224).abs() < 0.5);
}

#[test]
fn sample_stays_inside_bounds_command() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["-c", &config("pentanomial.json"), "--samples", "2000"];
    run_ok(&[&["sample"], &args[..]].concat(), &dir.path().join("s"));
    run_ok(&[&["bounds"], &args[..]].concat(), &dir.path().join("b"));
    let s = json(&dir.path().join("s/summary.json"));
    let last = rows(&dir.path().join("b/bounds.csv")).pop().unwrap();
    assert!(s["prices"]["min"].as_f64().unwrap() >= num(&last[2]) - 1e-9);
    assert!(s["prices"]["max"].as_f64().unwrap() <= num(&last[4]) + 1e-9);
}

#[test]
fn zero_samples_is_an_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_ok(&["sample", "-c", &config("four_state.json"), "--samples", "0"], dir.path());
    assert!(String::from_utf8_lossy(&o.stderr).contains("sample_count is 0"));
    assert_eq!(json(&dir.path().join("summary.json"))["count"], 0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        run_ok(
            &["sample", "-c", &config("four_state.json"), "--samples", "500"],
            &dir.path().join(sub),
        );
    }
    for f in ["samples.csv", "summary.json", "manifest.json", "entropy_histogram.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

#[test]
fn calibrate_from_moments() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["calibrate", "-c", &config("calibrate.json")], dir.path());
    let c = json(&dir.path().join("calibration.json"));
    let amps = c["amplitudes"].as_array().unwrap();
    for (a, w) in amps.iter().zip([2.3817, 1.6667, 1.1664, 0.8162, 0.5712]) {
        assert!((a.as_f64().unwrap() - w).abs() < 0.01);
    }
}

#[test]
fn calibrate_from_price_file() {
    let dir = tempfile::tempdir().unwrap();
    let prices = dir.path().join("prices.csv");
    let mut text = String::from("date,adjusted_close\n");
    let mut level = 20.0f64;
    for i in 0..400 {
        // deterministic, mildly skewed returns
        let r = 0.01 * ((i * 7919 % 23) as f64 / 11.0 - 1.0) + 0.002 * ((i % 5) as f64 - 2.0).powi(3);
        level *= f64::exp(r);
        text.push_str(&format!("2020-01-{i},{level}\n"));
    }
    std::fs::write(&prices, text).unwrap();
    run_ok(
        &[
            "calibrate", "--returns-file", prices.to_str().unwrap(), "--periods-per-year", "252",
        ],
        &dir.path().join("out"),
    );
    let c = json(&dir.path().join("out/calibration.json"));
    let p: f64 = c["probs"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).sum();
    assert!((p - 1.0).abs() < 1e-12);

    let o = run(
        &["calibrate", "--returns-file", "/nonexistent/prices.csv"],
        &dir.path().join("missing"),
    );
    assert_eq!(o.status.code(), Some(2));
}
