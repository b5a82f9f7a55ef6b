use std::collections::BTreeMap;
use std::process::Command;

use poussin::{Dd, EnvelopeFn};
use poussin_cli::{exit, run, Output};

fn poussin(args: &[&str]) -> Output {
    run(std::iter::once("poussin").chain(args.iter().copied()))
}

fn field(out: &Output, key: &str) -> String {
    let v: serde_json::Value = serde_json::from_str(&out.stdout).expect("json output");
    match &v[key] {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[test]
fn derive_examples() {
    let out = poussin(&[
        "derive",
        "--source",
        "Schoenfeld",
        "--ctilde",
        "0.25",
        "--format",
        "json",
    ]);
    assert_eq!(out.code, exit::HOLDS);
    assert_eq!(field(&out, "tilde_a_10"), "0.3510691792");
    assert!(field(&out, "tilde_a").starts_with("0.3510691792202"));

    let out = poussin(&[
        "derive", "--a", "5", "--b", "0", "--c", "1", "--x0", "2", "--ctilde", "0.5", "--format",
        "json",
    ]);
    assert_eq!(field(&out, "tilde_a_10"), "5.0");
    assert_eq!(field(&out, "ln_x_peak"), "null");

    let out = poussin(&[
        "derive",
        "--source",
        "Johnston-Yang exp(10^6)",
        "--ctilde",
        "1",
        "--format",
        "json",
    ]);
    let a: f64 = field(&out, "tilde_a").parse().unwrap();
    assert!((a.round() - 1642333.0).abs() <= 1.0);
}

#[test]
fn derive_reports_peak_exponent() {
    let out = poussin(&[
        "derive", "--a", "1", "--b", "1/4", "--c", "0.75", "--ctilde", "1/4", "--format", "json",
    ]);
    assert_eq!(field(&out, "ln_x_peak"), "1.0");
}

#[test]
fn derive_usage_errors() {
    for args in [
        &["derive", "--source", "Schoenfeld", "--ctilde", "0.5"][..],
        &["derive", "--source", "Nobody", "--ctilde", "0.1"],
        &["derive", "--a", "1", "--ctilde", "0.1"],
        &["derive", "--a", "-1", "--c", "1", "--ctilde", "0.1"],
        &["derive", "--source", "Schoenfeld", "--ctilde", "zero"],
        &["derive", "--source", "Schoenfeld"],
        &["frobnicate"],
    ] {
        let out = poussin(args);
        assert_eq!(out.code, exit::USAGE, "{args:?}");
        assert!(out.stdout.is_empty() && !out.stderr.is_empty());
    }
    assert_eq!(poussin(&["--help"]).code, 0);
    assert!(poussin(&["--version"]).stdout.contains("poussin"));
}

fn csv_rows(text: &str) -> Vec<BTreeMap<String, String>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| {
            headers
                .iter()
                .map(str::to_owned)
                .zip(r.unwrap().iter().map(str::to_owned))
                .collect()
        })
        .collect()
}

#[test]
fn table_iii_csv() {
    let out = poussin(&["tables", "--which", "III", "--format", "csv"]);
    assert_eq!(out.code, 0);
    assert_eq!(
        out.stdout.lines().next().unwrap(),
        "source,ctilde,tilde_a_recomputed,tilde_a_paper,delta,x_star_recomputed,x_star_paper"
    );
    let rows = csv_rows(&out.stdout);
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert_eq!(r["x_star_recomputed"], r["x_star_paper"]);
        let re: f64 = r["tilde_a_recomputed"].parse().unwrap();
        let paper: f64 = r["tilde_a_paper"].parse().unwrap();
        if r["tilde_a_paper"].contains('.') {
            assert!((re - paper).abs() <= 5e-10 * paper, "{}", r["source"]);
        } else {
            assert!((re.round() - paper).abs() <= 1.0);
        }
    }
    assert_eq!(rows[0]["tilde_a_recomputed"], "0.3510691792");
}

#[test]
fn table_iv_csv() {
    let out = poussin(&["tables", "--which", "IV", "--format", "csv"]);
    let rows = csv_rows(&out.stdout);
    assert_eq!(rows.len(), 19);
    assert_eq!(rows[0]["x_star_paper"], "exp(3000)");
    assert!(rows.iter().all(|r| r["x_star_recomputed"].is_empty()));
    assert_eq!(poussin(&["tables", "--which", "iv"]).code, 0);
    assert_eq!(poussin(&["tables", "--which", "V"]).code, exit::USAGE);
}

/// CSV cells re-parse to the values the JSON rendering carries.
#[test]
fn csv_round_trips_against_json() {
    for which in ["III", "IV"] {
        let csv_out = poussin(&["tables", "--which", which, "--format", "csv"]);
        let json_out = poussin(&["tables", "--which", which, "--format", "json"]);
        let json: Vec<serde_json::Map<String, serde_json::Value>> =
            serde_json::from_str(&json_out.stdout).unwrap();
        let rows = csv_rows(&csv_out.stdout);
        assert_eq!(rows.len(), json.len());
        for (r, j) in rows.iter().zip(&json) {
            assert_eq!(r.len(), j.len());
            for (k, cell) in r {
                match &j[k] {
                    serde_json::Value::Null => assert!(cell.is_empty()),
                    serde_json::Value::String(s) => assert_eq!(s, cell),
                    serde_json::Value::Number(n) => {
                        assert_eq!(cell.parse::<f64>().unwrap(), n.as_f64().unwrap(), "{k}")
                    }
                    other => panic!("unexpected {other}"),
                }
            }
        }
    }
}

#[test]
fn verify_exit_codes() {
    let holds = poussin(&[
        "verify",
        "--tilde-a",
        "1",
        "--tilde-c",
        "0.25",
        "--from",
        "2",
        "--to",
        "101",
    ]);
    assert_eq!(holds.code, exit::HOLDS, "{}", holds.stderr);
    assert!(holds.stdout.starts_with("status        Holds"));

    let fails = poussin(&[
        "verify",
        "--tilde-a",
        "0.5",
        "--tilde-c",
        "0.3333333333",
        "--from",
        "40",
        "--to",
        "41",
        "--format",
        "json",
    ]);
    assert_eq!(fails.code, exit::FAILS);
    let w: f64 = field(&fails, "witness_x").parse().unwrap();
    assert!((40.0..41.0).contains(&w));

    let empty = poussin(&[
        "verify",
        "--tilde-a",
        "1",
        "--tilde-c",
        "0.25",
        "--from",
        "2",
        "--to",
        "1",
    ]);
    assert_eq!(empty.code, exit::USAGE);

    let beyond = poussin(&[
        "verify",
        "--tilde-a",
        "1",
        "--tilde-c",
        "0.25",
        "--from",
        "2",
        "--to",
        "2000",
        "--sieve-limit",
        "1000",
    ]);
    assert_eq!(beyond.code, exit::RANGE);

    let mixed = poussin(&[
        "verify",
        "--tilde-a",
        "1",
        "--source",
        "Schoenfeld",
        "--from",
        "101",
        "--to",
        "200",
    ]);
    assert_eq!(mixed.code, exit::USAGE);
}

#[test]
fn verify_generalized_envelope() {
    let out = poussin(&[
        "verify", "--source", "Trudgian", "--from", "149", "--to", "1e5",
    ]);
    assert_eq!(out.code, exit::HOLDS, "{}", out.stderr);
    let out = poussin(&[
        "verify",
        "--source",
        "Schoenfeld",
        "--a",
        "1e-7",
        "--from",
        "101",
        "--to",
        "200",
    ]);
    assert_eq!(out.code, exit::FAILS);
}

/// A prefactor chosen so that `x − θ(x) = g(x)` at the right end of the
/// range is a tie that no precision can settle.
#[test]
fn exact_touch_is_inconclusive() {
    let x = Dd::from_f64(34.0);
    let theta = poussin::theta::extended_theta(34.0).unwrap();
    let shape = EnvelopeFn::poussin(Dd::ONE, "0.25".parse().unwrap()).unwrap();
    let tilde_a = (x - theta) / shape.eval_dd(x);
    let a = tilde_a.to_sig_string(32);
    let out = poussin(&[
        "verify",
        "--tilde-a",
        &a,
        "--tilde-c",
        "0.25",
        "--from",
        "33.5",
        "--to",
        "34",
        "--format",
        "json",
    ]);
    assert_eq!(out.code, exit::INCONCLUSIVE, "{}", out.stdout);
    assert_eq!(field(&out, "status"), "Inconclusive");
}

#[test]
fn xstar_examples() {
    for (a, c, x0, want) in [
        ("0.3510691792", "0.25", "101", "59"),
        ("1", "0.3333333333", "149", "3"),
        ("0.5", "0.25", "101", "29"),
    ] {
        let out = poussin(&[
            "xstar",
            "--tilde-a",
            a,
            "--tilde-c",
            c,
            "--x0",
            x0,
            "--format",
            "json",
        ]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        assert_eq!(field(&out, "x_star"), want);
        assert!(field(&out, "provenance").contains("parent bound"));
    }
}

#[test]
fn min_prefactor_examples() {
    for (from, to, cap) in [
        ("29", "149", 0.5),
        ("2", "149", 1.0),
        ("59", "101", 0.3510691792),
    ] {
        let out = poussin(&[
            "min-prefactor",
            "--tilde-c",
            "0.25",
            "--from",
            from,
            "--to",
            to,
            "--format",
            "json",
        ]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let v: f64 = field(&out, "tilde_a_min").parse().unwrap();
        assert!(v <= cap, "[{from}, {to}]: {v}");
    }
}

#[test]
fn output_is_identical_across_thread_counts_and_cache() {
    let cache = tempfile::tempdir().unwrap();
    let cache_dir = cache.path().to_str().unwrap();
    let commands: [&[&str]; 4] = [
        &["tables", "--which", "III", "--format", "csv"],
        &[
            "verify",
            "--source",
            "Schoenfeld",
            "--from",
            "101",
            "--to",
            "3e5",
            "--format",
            "json",
        ],
        &[
            "xstar",
            "--tilde-a",
            "0.5",
            "--tilde-c",
            "1/3",
            "--x0",
            "149",
        ],
        &[
            "min-prefactor",
            "--tilde-c",
            "0.25",
            "--from",
            "29",
            "--to",
            "1000",
            "--format",
            "csv",
        ],
    ];
    for cmd in commands {
        let base = poussin(cmd);
        assert_eq!(base.code, 0, "{cmd:?}: {}", base.stderr);
        for extra in [
            &["--threads", "1"][..],
            &["--threads", "3"],
            &["--precision-policy", "fast", "--threads", "2"],
            &["--cache-dir", cache_dir, "--sieve-limit", "400000"],
            &[
                "--cache-dir",
                cache_dir,
                "--sieve-limit",
                "400000",
                "--threads",
                "1",
            ],
        ] {
            let mut args = cmd.to_vec();
            args.extend_from_slice(extra);
            assert_eq!(poussin(&args), base, "{args:?}");
        }
    }
    assert!(cache.path().join("theta-400000.thet").exists());
}

#[test]
fn rigorous_policy_reaches_the_same_verdicts() {
    let out = poussin(&[
        "xstar",
        "--tilde-a",
        "0.2748124978",
        "--tilde-c",
        "0.25",
        "--x0",
        "149",
        "--precision-policy",
        "rigorous",
        "--format",
        "json",
    ]);
    assert_eq!(field(&out, "x_star"), "101");
    let out = poussin(&[
        "verify",
        "--tilde-a",
        "0.5",
        "--tilde-c",
        "0.25",
        "--from",
        "28",
        "--to",
        "29",
        "--precision-policy",
        "rigorous",
    ]);
    assert_eq!(out.code, exit::FAILS);
}

#[test]
fn binary_exit_status_and_streams() {
    let bin = env!("CARGO_BIN_EXE_poussin");
    let out = Command::new(bin)
        .args([
            "verify",
            "--tilde-a",
            "0.5",
            "--tilde-c",
            "0.25",
            "--from",
            "28",
            "--to",
            "29",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(exit::FAILS));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Fails"));

    let out = Command::new(bin)
        .args([
            "verify",
            "--tilde-a",
            "1",
            "--tilde-c",
            "0.25",
            "--from",
            "2",
            "--to",
            "101",
        ])
        .env("POUSSIN_CACHE_DIR", "/dev/null/cache")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(exit::IO));
    assert!(!out.stderr.is_empty());
}
