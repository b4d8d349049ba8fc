//! End-to-end tests of the `tamratio` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tamratio(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tamratio"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json_out(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("stdout is JSON")
}

fn row_line(out: &str) -> &str {
    out.lines().last().expect("report has a row line")
}

/// Exact rational from `p/q` text as a reduced (num, den) pair.
fn frac(s: &str) -> (i128, i128) {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.parse().unwrap(), d.parse().unwrap()),
        None => (s.parse().unwrap(), 1),
    };
    let g = gcd(n, d);
    (n / g, d / g)
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

#[test]
fn family_info_odd_torsion_row() {
    let o = tamratio(&["family-info", "--family", "z5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        row_line(&stdout(&o)),
        "(u+, u-, v+, v-, mu, sigma^2, rho(1)) = (1, 2, 1/2, 2, -3/2, 5/2, 2/5)"
    );
}

#[test]
fn family_info_large_isogeny_row() {
    let o = tamratio(&["family-info", "--family", "iso7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = row_line(&stdout(&o)).to_string();
    let vals: Vec<&str> = line.split(" = ").nth(1).unwrap().trim_matches(['(', ')']).split(", ").collect();
    assert_eq!(vals[4], "0", "mu");
    assert_eq!(vals[5], "1", "sigma^2");
    assert_eq!(vals[6], "18/7", "rho(1)");
}

#[test]
fn family_info_json_matches_text() {
    let o = tamratio(&["family-info", "--family", "z5", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_out(&o);
    assert_eq!(v["family"]["name"], "z5");
    assert_eq!(v["constants"]["mu"], "-3/2");
    assert_eq!(v["constants"]["rho_1"], "2/5");
    assert_eq!(v["family"]["excluded_primes"], serde_json::json!([2, 3, 5]));
}

#[test]
fn unknown_family_is_a_usage_error() {
    let o = tamratio(&["family-info", "--family", "nope"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nope"));
    let o = tamratio(&["experiment", "--family", "nope", "--kind", "average"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_arguments_are_usage_errors() {
    assert_eq!(code(&tamratio(&["experiment", "--family", "z4", "--kind", "bogus"])), 2);
    assert_eq!(code(&tamratio(&["experiment", "--family", "z4", "--kind", "average", "--N", "ten"])), 2);
    assert_eq!(code(&tamratio(&["--v-branch", "other", "verify-tables"])), 2);
    assert_eq!(code(&tamratio(&["frobnicate"])), 2);
}

#[test]
fn verify_tables_reports_the_single_default_mismatch() {
    let o = tamratio(&["verify-tables"]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    let bad: Vec<&str> = out.lines().filter(|l| l.contains("MISMATCH")).collect();
    assert_eq!(bad.len(), 1, "{out}");
    assert!(bad[0].starts_with("iso13"));
    assert!(bad[0].contains("mu: expected 1/2, computed -1/2"));
    assert_eq!(out.lines().filter(|l| l.ends_with(" ok")).count(), 9);
}

#[test]
fn verify_tables_single_family_passes() {
    let o = tamratio(&["verify-tables", "--family", "z5"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn half_u_branch_flags_first_full_two_torsion_row() {
    let o = tamratio(&["--v-branch", "half-u", "verify-tables"]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(
        out.lines()
            .any(|l| l.starts_with("z2xz2-1") && l.contains("v_plus2: expected 1, computed 1/2")),
        "{out}"
    );
    // Rows 2 and 3 already carry 1/2 and are unaffected.
    assert!(out.lines().any(|l| l.starts_with("z2xz2-2") && l.ends_with(" ok")));
}

#[test]
fn corrupted_registry_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("families.json");
    let text = include_str!("../../core/data/families.json");
    let mut doc: Value = serde_json::from_str(text).unwrap();
    let fams = doc["families"].as_array_mut().unwrap();
    let z5 = fams.iter_mut().find(|f| f["name"] == "z5").unwrap();
    z5["g"][0] = Value::String("55".into());
    fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let p = path.to_str().unwrap();
    let o = tamratio(&["--registry", p, "verify-tables", "--family", "z5"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL validation"), "{}", stdout(&o));
    let o = tamratio(&["--registry", p, "family-info", "--family", "z5"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn unchanged_registry_file_reproduces_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("families.json");
    fs::write(&path, include_str!("../../core/data/families.json")).unwrap();
    let o = tamratio(&["--registry", path.to_str().unwrap(), "family-info", "--family", "z5"]);
    assert_eq!(code(&o), 0);
    assert!(row_line(&stdout(&o)).ends_with("(1, 2, 1/2, 2, -3/2, 5/2, 2/5)"));
}

#[test]
fn io_failures_exit_three() {
    assert_eq!(code(&tamratio(&["--registry", "/nonexistent/families.json", "verify-tables"])), 3);
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let o = tamratio(&[
        "experiment", "--family", "z4", "--kind", "average", "--N", "1e6", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
}

/// Recomputes `Σ 2^{k·s} / n` exactly from the per-curve CSV.
fn average_from_csv(csv: &str, k: u32) -> (i128, i128, usize) {
    let lines: Vec<&str> = csv.lines().collect();
    let header: Vec<&str> = lines[0].split(',').collect();
    let col = header.iter().position(|h| *h == "exponent_sum").unwrap();
    let sums: Vec<i64> = lines[1..].iter().map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    let min = sums.iter().copied().min().unwrap().min(0);
    let shift = (-min) as u32 * k;
    // Σ 2^{k s} = Σ 2^{k s + shift} / 2^{shift}.
    let num: i128 = sums.iter().map(|&s| 1i128 << (s * k as i64 + shift as i64) as u32).sum();
    let den = (1i128 << shift) * sums.len() as i128;
    let g = gcd(num, den);
    (num / g, den / g, sums.len())
}

#[test]
fn average_experiment_matches_its_curve_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = tamratio(&[
        "experiment", "--family", "z4", "--kind", "average", "--N", "1e8", "--k", "1,2", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_out(&o);
    let avgs = v["averages"].as_array().unwrap();
    assert_eq!(avgs.len(), 2);
    let csv = fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    for a in avgs {
        let k = a["k"].as_u64().unwrap() as u32;
        let (n, d, count) = average_from_csv(&csv, k);
        assert_eq!(a["curve_count"].as_u64().unwrap() as usize, count);
        assert_eq!(frac(a["average"].as_str().unwrap()), (n, d), "k = {k}");
        assert!((a["average_f64"].as_f64().unwrap() - n as f64 / d as f64).abs() < 1e-12);
    }
    assert_eq!(avgs[0]["rho_k"], "1");
    let saved: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(saved, v);
}

#[test]
fn density_experiment_is_near_uniform_mod_five() {
    let o = tamratio(&["experiment", "--family", "z3", "--kind", "density", "--q", "5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_out(&o);
    let classes = v["classes"].as_array().unwrap();
    assert_eq!(classes.len(), 6);
    let mut total_hits = 0;
    for c in classes {
        let r = &c["report"];
        assert!((r["predicted"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-12);
        let ratio = c["ratio"].as_f64().unwrap();
        assert!((ratio - 1.0).abs() < 0.1, "{}: {ratio}", c["class"]);
        total_hits += r["observed_count"].as_u64().unwrap();
    }
    // The six classes partition the points coprime to 5.
    assert_eq!(total_hits, classes[0]["report"]["total_count"].as_u64().unwrap());
}

#[test]
fn density_experiment_single_class() {
    let o = tamratio(&["experiment", "--family", "z2", "--kind", "density", "--q", "5", "--class", "affine:1:2", "--N", "1e8"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_out(&o);
    let c = &v["classes"][0];
    assert_eq!(c["class"], "(1,2) mod 5");
    assert!(c["relative_error"].as_f64().unwrap() < 0.15);
    assert_eq!(code(&tamratio(&["experiment", "--family", "z2", "--kind", "density", "--class", "1-2"])), 2);
}

#[test]
fn tail_experiment_counts_consistently() {
    let o = tamratio(&["experiment", "--family", "z4", "--kind", "tail", "--N", "1e10", "--A", "0,1/2,1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json_out(&o);
    let t = v["tails"].as_array().unwrap();
    let counts: Vec<u64> = t.iter().map(|x| x["count"].as_u64().unwrap()).collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
    assert_eq!(t[2]["a"], "1");
}

fn files_of(dir: &Path) -> (String, String) {
    (
        fs::read_to_string(dir.join("summary.json")).unwrap(),
        fs::read_to_string(dir.join("curves.csv")).unwrap(),
    )
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let one = tempfile::tempdir().unwrap();
    let four = tempfile::tempdir().unwrap();
    for (threads, dir) in [("1", &one), ("4", &four)] {
        let o = tamratio(&[
            "--threads", threads, "experiment", "--family", "z2", "--kind", "distribution", "--N", "1e8", "--p-cut",
            "100", "--out", dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(files_of(one.path()), files_of(four.path()));
}

#[test]
fn distribution_needs_enough_curves() {
    let o = tamratio(&["experiment", "--family", "z5", "--kind", "distribution", "--N", "1e6"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("curves"));
}

#[test]
fn volume_depends_only_on_seed() {
    let run = |seed: &str, threads: &str| {
        let o = tamratio(&[
            "--threads", threads, "--seed", seed, "experiment", "--family", "z3", "--kind", "volume", "--samples",
            "100000",
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        json_out(&o)
    };
    let a = run("7", "1");
    assert_eq!(a, run("7", "3"));
    assert_ne!(a["volume"], run("8", "1")["volume"]);
    assert!(a["half_width"].as_f64().unwrap() > 0.0);
}

#[test]
fn unused_seed_is_logged() {
    let o = tamratio(&["--seed", "5", "experiment", "--family", "z4", "--kind", "average", "--N", "1e6"]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("seed 5 unused"));
}
