// Command-line behaviour: summaries, exit codes, files and determinism.

use std::process::Command;

use pirlab::cli::{self, EXIT_DECODE, EXIT_FAIL, EXIT_OK, EXIT_SEARCH, EXIT_USAGE};

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_env(args: &[&str], env_seed: Option<&str>) -> Out {
    let mut argv = vec!["pirlab".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = cli::run(&argv, env_seed.map(String::from), &mut o, &mut e);
    Out { code, stdout: String::from_utf8(o).unwrap(), stderr: String::from_utf8(e).unwrap() }
}

fn run(args: &[&str]) -> Out {
    run_env(args, None)
}

fn json(o: &Out) -> serde_json::Value {
    serde_json::from_str(&o.stdout).unwrap()
}

#[test]
fn run_summaries() {
    let o = run(&["run", "ctrex-2422", "--theta", "1", "--seed", "7"]);
    assert_eq!((o.code, o.stdout.as_str()), (EXIT_OK, "rate=3/5 download=20 ok\n"));
    let o = run(&["run", "tab-2322", "--theta", "2", "--seed", "1"]);
    assert_eq!((o.code, o.stdout.as_str()), (EXIT_OK, "rate=6/11 download=11 ok\n"));
}

#[test]
fn run_decode_failure_exits_2() {
    let o = run(&["run", "disjoint-2423", "--seed", "1"]);
    assert_eq!(o.code, EXIT_DECODE);
    assert!(o.stdout.starts_with("rate=4/7 download=21 decode-failure"));
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        &["run", "no-such-scheme"][..],
        &["run", "ctrex-2422", "--theta", "3"],
        &["run", "ctrex-2422", "--p", "100"],
        &["verify", "ctrex-2422", "--suite", "bogus"],
        &["verify", "ctrex-2422", "--collude", "0,1"],
        &["search", "--kind", "combiner", "--scheme", "ctrex-2422", "--tries", "0"],
        &["search", "--kind", "pmatrix", "--n", "4"],
        &["capacity", "--kind", "nonsense"],
        &["frobnicate"],
    ] {
        let o = run(args);
        assert_eq!(o.code, EXIT_USAGE, "{args:?}: {}", o.stderr);
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(run_env(&["run", "ctrex-2422"], Some("abc")).code, EXIT_USAGE);
}

#[test]
fn help_exits_zero() {
    let o = run(&["--help"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("verify"));
}

#[test]
fn run_writes_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let o = run(&["run", "ex2-restricted", "--theta", "2", "--seed", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK);
    let t = pirlab::transcript::load_transcript(&path).unwrap();
    assert_eq!((t.theta, t.seed, t.counts.download), (2, Some(3), 7));
}

#[test]
fn env_seed_is_the_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    run_env(&["run", "ctrex-2422", "--out", a.to_str().unwrap()], Some("41"));
    run(&["run", "ctrex-2422", "--seed", "41", "--out", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn verify_dimensions_report() {
    let o = run(&["verify", "ctrex-2422", "--suite", "dimensions", "--repeats", "10"]);
    assert_eq!(o.code, EXIT_OK);
    let v = json(&o);
    assert_eq!(v["command"], "verify");
    assert_eq!(v["results"][0]["interference"]["expected"], 8);
    assert_eq!(v["results"][0]["desired"]["expected"], 12);
    assert_eq!(v["pass"], true);
}

#[test]
fn verify_table_all_includes_alignment_cases() {
    let o = run(&["verify", "tab-2432", "--suite", "all", "--trials", "20"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v = json(&o);
    let dims = v["results"].as_array().unwrap().iter().find(|r| r["check"] == "dimensions").unwrap();
    assert_eq!(dims["alignment_cases"].as_array().unwrap().len(), 16);
    let pr = v["results"].as_array().unwrap().iter().find(|r| r["check"] == "privacy").unwrap();
    assert_eq!(pr["mode"], "exhaustive");
}

#[test]
fn verify_cyclic_nonadjacent_rejects() {
    let o = run(&["verify", "cyclic-2422", "--suite", "privacy", "--collude", "1,3", "--samples", "10000"]);
    assert_eq!(o.code, EXIT_FAIL);
    let v = json(&o);
    assert_eq!(v["results"][0]["sets"][0]["set"], serde_json::json!([1, 3]));
    assert_eq!(v["results"][0]["sets"][0]["consistent"], false);
}

#[test]
fn exhaustive_on_matrix_scheme_is_not_enumerable() {
    let o = run(&["verify", "ctrex-2422", "--suite", "privacy", "--exhaustive"]);
    assert_eq!(o.code, EXIT_FAIL);
    assert!(o.stderr.contains("enumerable"));
}

#[test]
fn search_combiner_certificate() {
    let o = run(&["search", "--kind", "combiner", "--scheme", "ctrex-2422", "--p", "349", "--seed", "2"]);
    assert_eq!(o.code, EXIT_OK);
    let cert = &json(&o)["results"][0]["certificate"];
    assert_eq!(cert["realizations"], "1296");
    assert_eq!(cert["failures"], "0");
}

#[test]
fn search_pmatrix_ranks() {
    let o = run(&["search", "--kind", "pmatrix", "--n", "4", "--t", "3", "--p", "101", "--seed", "1"]);
    assert_eq!(o.code, EXIT_OK);
    let v = json(&o);
    let ranks = v["results"][0]["certificate"]["subset_ranks"].as_array().unwrap();
    assert_eq!(ranks.len(), 4);
    assert!(ranks.iter().all(|r| r["rank"] == 3));
}

#[test]
fn search_exhausted_exits_3() {
    let o = run(&["search", "--kind", "combiner", "--scheme", "ctrex-2422", "--p", "2", "--tries", "4"]);
    assert_eq!(o.code, EXIT_SEARCH);
}

#[test]
fn capacity_tables() {
    let o = run(&["capacity", "--kind", "bound2422", "--kmax", "3"]);
    assert_eq!(o.code, EXIT_OK);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines[0], "kind,K,N,T,Kc,value,decimal");
    let values: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(5).unwrap()).collect();
    assert_eq!(values, vec!["1", "8/13", "192/389"]);

    let o = run(&["capacity", "--kind", "table-four-cases"]);
    let values: Vec<&str> = o.stdout.lines().skip(1).map(|l| l.split(',').nth(5).unwrap()).collect();
    assert_eq!(values, vec!["6/11", "4/7", "4/7", "4/7"]);

    let o = run(&["capacity", "--kind", "theorem3", "--n", "4", "--t", "3"]);
    assert_eq!(o.stdout.lines().nth(1).unwrap().split(',').nth(5).unwrap(), "12/23");
}

#[test]
fn audit_report() {
    let o = run(&["audit", "ctrex-2422", "--seed", "1"]);
    assert_eq!(o.code, EXIT_OK);
    let r = &json(&o)["results"][0];
    assert_eq!((r["d"].as_u64(), r["epsilon_L"].as_i64(), r["alpha_d"].as_u64()), (Some(3), Some(0), Some(1)));
    assert_eq!(r["tight"], true);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_pirlab");
    let st = Command::new(bin).args(["run", "ctrex-2422", "--seed", "7"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&st.stdout), "rate=3/5 download=20 ok\n");
    let st = Command::new(bin).args(["run", "nope"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_USAGE));
    let st = Command::new(bin).args(["run", "disjoint-2423"]).env("PIRLAB_SEED", "9").output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_DECODE));
}
