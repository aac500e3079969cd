use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chaoslab_core::bohr::BohrCertificate;
use chaoslab_core::chain::ProximalOutcome;
use chaoslab_core::horseshoe::CodingMap;
use chaoslab_core::{BiInfSeq, PseudoOrbit, TorusPoint};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_chaoslab"));
    c.env_remove("CHAOSLAB_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn usage_exit_codes() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["bogus"])), 1);
    assert_eq!(code(&run(&["certify-bohr", "--n-max", "abc"])), 1);
    assert_eq!(code(&run(&["certify-bohr", "--system", "nosuch"])), 1);
    assert_eq!(code(&run(&["certify-bohr", "--seq", "zigzag"])), 1);
    let o = run(&["systems"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = v["result"].as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    for n in ["fullshift2", "golden-mean", "cat"] {
        assert!(names.contains(&n));
    }
}

#[test]
fn systems_lists_user_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(&dir, "sft.json");
    std::fs::write(&f, r#"{"name": "no-00", "alphabet": 2, "transitions": [[0,1],[1,1]]}"#).unwrap();
    let o = run(&["systems", "--file", s(&f)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("no-00"));
}

#[test]
fn certify_then_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cert = path(&dir, "cert.json");
    let csv = path(&dir, "sums.csv");
    let o = run(&[
        "certify-bohr", "--system", "fullshift2", "--seq", "constant_one", "--n-max", "1000", "--out", s(&cert),
        "--csv", s(&csv),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = read(&cert);
    assert!(v["tool_version"].as_str().unwrap().starts_with("chaoslab"));
    assert_eq!(v["parameters"]["args"]["certify-bohr"]["n_max"], 1000);
    let parsed: BohrCertificate<BiInfSeq> = serde_json::from_value(v).unwrap();
    assert_eq!(parsed.partial_sums.len(), 1000);
    assert!(parsed.partial_sums.iter().all(|r| r.weighted == r.checkpoint && r.checkpoint == r.n as f64));
    let lines = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(lines.lines().next(), Some("n,weighted,checkpoint"));
    assert_eq!(lines.lines().count(), 1001);

    let report = path(&dir, "report.json");
    let o = run(&["check-cert", s(&cert), "--out", s(&report)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read(&report)["result"]["ok"], true);
}

#[test]
fn corrupted_certificate_is_rejected_with_row() {
    let dir = tempfile::tempdir().unwrap();
    let cert = path(&dir, "cert.json");
    assert_eq!(
        code(&run(&["certify-bohr", "--seq", "bernoulli:p=0.5,seed=7", "--n-max", "200", "--out", s(&cert)])),
        0
    );
    let mut v = read(&cert);
    let w = v["partial_sums"][57]["weighted"].as_f64().unwrap();
    v["partial_sums"][57]["weighted"] = (w + 1.0).into();
    let bad = path(&dir, "bad.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    let o = run(&["check-cert", s(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("first failing n = 58"), "{}", stderr(&o));

    let junk = path(&dir, "junk.json");
    std::fs::write(&junk, "{ not json").unwrap();
    assert_eq!(code(&run(&["check-cert", s(&junk)])), 1);
    std::fs::write(&junk, r#"{"system": {"kind": "sft"}}"#).unwrap();
    assert_eq!(code(&run(&["check-cert", s(&junk)])), 1);
    assert_eq!(code(&run(&["check-cert", s(&path(&dir, "missing.json"))])), 1);
}

#[test]
fn sparse_sequence_is_a_negative_result() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(&dir, "cert.json");
    let o = run(&["certify-bohr", "--seq", "sparse_squares", "--n-max", "100000", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("limsup"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn toral_certificate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cert = path(&dir, "cat.json");
    let o = run(&["certify-bohr", "--system", "cat", "--seq", "bernoulli:p=0.5", "--n-max", "300", "--out", s(&cert)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = read(&cert);
    // Missing seed comes from --seed, default 0.
    assert_eq!(v["sequence"]["seed"], 0);
    let parsed: BohrCertificate<TorusPoint> = serde_json::from_value(v).unwrap();
    assert!(parsed.shadow_orbit.is_some());
    assert_eq!(code(&run(&["check-cert", s(&cert)])), 0);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["certify-bohr", "--seq", "bernoulli:p=0.3", "--n-max", "500"],
        vec!["shadow", "--system", "cat", "--delta", "1e-6", "--length", "300"],
        vec!["shadow", "--system", "golden-mean", "--delta", "1/16", "--length", "100"],
        vec!["chain-graph", "--system", "cat", "--resolution", "1/16", "--delta", "1e-2"],
        vec!["horseshoe", "--system", "golden-mean", "--window", "2"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outs = Vec::new();
        for threads in [None, Some("1"), None] {
            // Same path each time: the parameter echo includes it.
            let out = path(&dir, &format!("{i}.json"));
            let mut c = bin();
            c.args(args).args(["--seed", "11", "--out", s(&out)]);
            if let Some(t) = threads {
                c.env("CHAOSLAB_THREADS", t);
            }
            let o = c.output().unwrap();
            assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
            outs.push(std::fs::read(&out).unwrap());
        }
        assert!(outs.windows(2).all(|w| w[0] == w[1]), "{args:?} not deterministic");
    }
    // A different seed changes random inputs.
    let out = path(&dir, "seeded.json");
    let mut bases = Vec::new();
    for seed in ["1", "2"] {
        let o = run(&["shadow", "--system", "cat", "--delta", "1e-6", "--length", "50", "--seed", seed, "--out", s(&out)]);
        assert_eq!(code(&o), 0);
        bases.push(read(&out)["result"]["base"].clone());
    }
    assert_ne!(bases[0], bases[1]);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = bin().env("CHAOSLAB_THREADS", "zero").arg("systems").output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn shadow_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(&dir, "sh.json");
    let csv = path(&dir, "sh.csv");
    let o = run(&[
        "shadow", "--system", "cat", "--delta", "1e-6", "--length", "400", "--out", s(&out), "--csv", s(&csv),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = read(&out);
    assert_eq!(v["result"]["verified"], true);
    let po: PseudoOrbit<TorusPoint> = serde_json::from_value(v["result"]["pseudo_orbit"].clone()).unwrap();
    assert_eq!(po.len(), 400);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 401);
    // The emitted file is accepted as input.
    let again = path(&dir, "again.json");
    let o = run(&["shadow", "--system", "cat", "--input", s(&out), "--out", s(&again)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(read(&again)["result"]["base"], v["result"]["base"]);
    // Wrong system is refused.
    assert_eq!(code(&run(&["shadow", "--system", "golden-mean", "--input", s(&out)])), 1);
    // Non-dyadic δ for a shift is a parameter error.
    assert_eq!(code(&run(&["shadow", "--system", "fullshift2", "--delta", "0.1"])), 1);
}

#[test]
fn chain_graph_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(&dir, "g.json");
    let csv = path(&dir, "g.csv");
    let o = run(&[
        "chain-graph", "--system", "two-fixed", "--resolution", "3", "--delta", "2^-4", "--out", s(&out), "--csv",
        s(&csv),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = read(&out);
    let comps = v["result"]["components"].as_array().unwrap();
    assert_eq!(comps.iter().filter(|c| c["recurrent"] == true).count(), 2);
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("box_id,center_x,center_y,scc_id\n"));
    assert_eq!(code(&run(&["chain-graph", "--system", "cat", "--resolution", "1/0", "--delta", "1e-3"])), 1);
}

#[test]
fn proximal_found_and_not_found() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(&dir, "p.json");
    let o = run(&["proximal", "--system", "golden-mean", "--deltas", "1/4,1/8", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let outcome: ProximalOutcome<BiInfSeq> = serde_json::from_value(read(&out)["result"].clone()).unwrap();
    assert!(outcome.witness().is_some());

    let o = run(&["proximal", "--system", "two-fixed", "--deltas", "1/8", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert_eq!(read(&out)["result"]["result"], "none_found");
}

#[test]
fn horseshoe_chains_into_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(&dir, "h.json");
    let cert = path(&dir, "c.json");
    let o = run(&[
        "horseshoe", "--system", "golden-mean", "--window", "2", "--out", s(&out), "--emit-bohr", s(&cert), "--n-max",
        "300",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = read(&out);
    let map: CodingMap<BiInfSeq> = serde_json::from_value(v["result"]["coding_map"].clone()).unwrap();
    assert_eq!(map.entries.len(), 32);
    assert!(map.checks.all_passed());
    assert!(v["result"]["theorem1_input"].is_object());
    assert_eq!(v["result"]["hypotheses"]["verdicts"].as_array().unwrap().len(), 4);
    assert_eq!(code(&run(&["check-cert", s(&cert)])), 0);

    // Budget below 2^(2W+1) is refused as an error, not a negative result.
    assert_eq!(code(&run(&["horseshoe", "--system", "golden-mean", "--window", "4", "--budget", "100"])), 1);
}
