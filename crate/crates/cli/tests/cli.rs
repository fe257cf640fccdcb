use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const WORKED: &str = r#"{
  "outer_degree": 1,
  "networks": [
    {"id": "paris", "node_count": 3, "inner_degree": 1, "link": "its", "mother": true},
    {"id": "tokyo", "node_count": 3, "inner_degree": 1, "link": "classical"},
    {"id": "geneva", "node_count": 3, "inner_degree": 1, "link": "classical"}
  ]
}"#;

fn multiss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multiss")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace { dir: tempfile::tempdir().unwrap() };
        ws.write("topo.json", WORKED.as_bytes());
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }

    fn write(&self, name: &str, bytes: &[u8]) {
        fs::write(self.path(name), bytes).unwrap();
    }

    fn deal(&self, secret: &[u8]) -> Output {
        self.write("secret.bin", secret);
        let out = multiss(&[
            "deal",
            "--topology",
            &self.p("topo.json"),
            "--secret",
            &self.p("secret.bin"),
            "--out",
            &self.p("shares"),
            "--seed",
            "5",
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        out
    }

    fn reconstruct(&self, shares: &[String]) -> Output {
        let mut args = vec!["reconstruct".to_string(), "--topology".into(), self.p("topo.json"), "--shares".into()];
        args.extend(shares.iter().cloned());
        args.extend(["--out".into(), self.p("back.bin")]);
        multiss(&args.iter().map(String::as_str).collect::<Vec<_>>())
    }

    fn refresh(&self, seed: &str) -> Output {
        multiss(&["refresh", "--topology", &self.p("topo.json"), "--shares", &self.p("shares"), "--seed", seed])
    }

    fn share(&self, network: &str, index: u64) -> String {
        self.p(&format!("shares/{network}-{index}.share.json"))
    }

    fn manifest(&self) -> Value {
        serde_json::from_slice(&fs::read(self.path("shares/manifest.json")).unwrap()).unwrap()
    }
}

fn share_count(dir: &Path) -> usize {
    fs::read_dir(dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".share.json"))
        .count()
}

#[test]
fn deal_writes_one_file_per_node_and_a_manifest() {
    let ws = Workspace::new();
    ws.deal(b"sixteen byte key");
    assert_eq!(share_count(&ws.path("shares")), 9);
    let m = ws.manifest();
    assert_eq!(m["epoch"], 0);
    assert_eq!(m["chunk_count"], 2);
    assert_eq!(m["topology_digest"].as_str().unwrap().len(), 64);

    let share: Value = serde_json::from_slice(&fs::read(ws.share("tokyo", 2)).unwrap()).unwrap();
    assert_eq!(share["format_version"], 1);
    assert_eq!(share["modulus"], "7fffffffffffffffffffffffffffffff");
    assert_eq!(share["network_id"], "tokyo");
    assert_eq!(share["node_index"], 2);
    assert_eq!(share["values"].as_array().unwrap().len(), 2);
}

#[test]
fn full_round_trip_and_empty_secret() {
    let ws = Workspace::new();
    ws.deal(b"");
    let out = ws.reconstruct(&[ws.p("shares")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read(ws.path("back.bin")).unwrap(), b"");

    let secret: Vec<u8> = (0..=255u8).cycle().take(1000).collect();
    ws.deal(&secret);
    assert_eq!(code(&ws.reconstruct(&[ws.p("shares")])), 0);
    assert_eq!(fs::read(ws.path("back.bin")).unwrap(), secret);
}

#[test]
fn quorum_exact_subset_and_missing_mother() {
    let ws = Workspace::new();
    ws.deal(b"worked example");
    let exact = [ws.share("paris", 1), ws.share("paris", 2), ws.share("tokyo", 1), ws.share("tokyo", 3)];
    let out = ws.reconstruct(&exact);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read(ws.path("back.bin")).unwrap(), b"worked example");

    let daughters: Vec<String> = (1..=3).flat_map(|i| [ws.share("tokyo", i), ws.share("geneva", i)]).collect();
    let out = ws.reconstruct(&daughters);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("missing mother"), "{}", stderr(&out));

    let out = ws.reconstruct(&[ws.share("paris", 1), ws.share("paris", 2), ws.share("tokyo", 1)]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("mother quorum 2/2 met; daughter quorums 0/1 met"), "{}", stderr(&out));
}

#[test]
fn refresh_advances_epochs_and_preserves_the_secret() {
    let ws = Workspace::new();
    ws.deal(b"refresh me");
    let before = fs::read(ws.share("geneva", 2)).unwrap();
    assert_eq!(code(&ws.refresh("1")), 0);
    assert_ne!(fs::read(ws.share("geneva", 2)).unwrap(), before);
    assert_eq!(code(&ws.refresh("2")), 0);
    assert_eq!(ws.manifest()["epoch"], 2);
    let share: Value = serde_json::from_slice(&fs::read(ws.share("paris", 3)).unwrap()).unwrap();
    assert_eq!(share["epoch"], 2);
    assert_eq!(code(&ws.reconstruct(&[ws.p("shares")])), 0);
    assert_eq!(fs::read(ws.path("back.bin")).unwrap(), b"refresh me");
    // no temporary files left behind
    assert!(fs::read_dir(ws.path("shares")).unwrap().all(|e| !e
        .unwrap()
        .file_name()
        .to_string_lossy()
        .ends_with(".tmp")));
}

#[test]
fn partial_refresh_flags_stale_nodes() {
    let ws = Workspace::new();
    ws.deal(b"partial");
    let parked = ws.path("parked.json");
    fs::rename(ws.share("tokyo", 2), &parked).unwrap();
    let out = ws.refresh("3");
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("stale: tokyo#2"));
    let m = ws.manifest();
    assert_eq!(m["stale"], serde_json::json!([{"network": "tokyo", "index": 2}]));

    // the stale file comes back: listed in the manifest, so it is skipped
    fs::rename(&parked, ws.share("tokyo", 2)).unwrap();
    let out = ws.reconstruct(&[ws.p("shares")]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read(ws.path("back.bin")).unwrap(), b"partial");
    assert_eq!(code(&ws.refresh("4")), 0);
    assert_eq!(code(&ws.reconstruct(&[ws.p("shares")])), 0);
}

#[test]
fn mixed_epochs_are_rejected() {
    let ws = Workspace::new();
    ws.deal(b"mixing");
    let old = fs::read(ws.share("geneva", 1)).unwrap();
    assert_eq!(code(&ws.refresh("7")), 0);
    ws.write("shares/geneva-1.share.json", &old);

    let out = ws.reconstruct(&[ws.p("shares")]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("epoch mismatch"), "{}", stderr(&out));
    let out = ws.refresh("8");
    assert_eq!(code(&out), 3);
}

#[test]
fn input_errors_exit_2() {
    let ws = Workspace::new();
    let out = multiss(&["deal", "--topology", &ws.p("topo.json"), "--secret", &ws.p("nope"), "--out", &ws.p("s")]);
    assert_eq!(code(&out), 2);

    ws.write("bad.json", br#"{"outer_degree": 2, "networks": []}"#);
    ws.write("secret.bin", b"x");
    let out = multiss(&["deal", "--topology", &ws.p("bad.json"), "--secret", &ws.p("secret.bin"), "--out", &ws.p("s")]);
    assert_eq!(code(&out), 2);

    ws.deal(b"versions");
    let path = ws.share("paris", 1);
    let text = fs::read_to_string(&path).unwrap().replace("\"format_version\": 1", "\"format_version\": 2");
    fs::write(&path, text).unwrap();
    let out = ws.reconstruct(&[ws.p("shares")]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("format_version 2"));
}

#[test]
fn usage_errors_exit_64() {
    let out = multiss(&["deal", "--secret", "s", "--out", "o"]);
    assert_eq!(code(&out), 64);
    assert_eq!(code(&multiss(&["frobnicate"])), 64);
    assert_eq!(code(&multiss(&["--help"])), 0);
}

#[test]
fn thresholds_report() {
    let ws = Workspace::new();
    let out = multiss(&["thresholds", "--topology", &ws.p("topo.json")]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("paper:  t_networks=2 t_nodes=4 t_fail=2 (t_f0=2, t_f1=2)"), "{}", stdout(&out));
    assert!(!stdout(&out).contains("oracle"));

    let out = multiss(&["thresholds", "--topology", &ws.p("topo.json"), "--oracle"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("oracle: t_networks=2 t_nodes=4 t_fail=2 (t_f0=2, t_f1=4)"), "{text}");
    let discrepancies: Vec<&str> = text.lines().filter(|l| l.starts_with("DISCREPANCY")).collect();
    assert_eq!(discrepancies, vec!["DISCREPANCY t_f1: paper formula 2, exhaustive oracle 4"]);

    ws.write(
        "l2.json",
        br#"{"outer_degree": 1, "networks": [
            {"id": "m", "node_count": 2, "inner_degree": 1, "link": "its", "mother": true},
            {"id": "d", "node_count": 2, "inner_degree": 1, "link": "classical"}]}"#,
    );
    let out = multiss(&["thresholds", "--topology", &ws.p("l2.json")]);
    assert!(stdout(&out).contains("t_networks=2"));

    ws.write(
        "big.json",
        br#"{"outer_degree": 1, "networks": [
            {"id": "m", "node_count": 11, "inner_degree": 1, "link": "its", "mother": true},
            {"id": "d", "node_count": 10, "inner_degree": 1, "link": "classical"}]}"#,
    );
    assert_eq!(code(&multiss(&["thresholds", "--topology", &ws.p("big.json")])), 0);
    let out = multiss(&["thresholds", "--topology", &ws.p("big.json"), "--oracle"]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("20"), "{}", stderr(&out));
}

fn scenario(events: &str) -> String {
    format!(r#"{{"topology": {WORKED}, "secret": "the archive", "events": {events}}}"#)
}

#[test]
fn simulate_verdicts_and_determinism() {
    let ws = Workspace::new();
    ws.write(
        "hndl.json",
        scenario(r#"[{"type": "deal"}, {"type": "hndl_decrypt_classical"}, {"type": "attempt_reconstruct", "actor": "adversary"}]"#)
            .as_bytes(),
    );
    let out = multiss(&["simulate", "--scenario", &ws.p("hndl.json"), "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("adversary verdict: NoInformation"));
    let report: Value = serde_json::from_slice(&fs::read(ws.path("hndl.report.json")).unwrap()).unwrap();
    assert_eq!(report["adversary"]["verdict"], "NoInformation");
    assert_eq!(report["owner"]["available"], true);

    ws.write(
        "both.json",
        scenario(
            r#"[{"type": "deal"}, {"type": "hndl_decrypt_classical"}, {"type": "compromise_network", "network": "paris"},
                {"type": "attempt_reconstruct", "actor": "adversary"}]"#,
        )
        .as_bytes(),
    );
    let out = multiss(&["simulate", "--scenario", &ws.p("both.json"), "--seed", "3"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("adversary verdict: Reconstructs"));
    let first = fs::read(ws.path("both.report.json")).unwrap();
    multiss(&["simulate", "--scenario", &ws.p("both.json"), "--seed", "3"]);
    assert_eq!(fs::read(ws.path("both.report.json")).unwrap(), first);
    let report: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(report["adversary"]["recovered_secret"], true);
}

#[test]
fn simulate_errors_and_state() {
    let ws = Workspace::new();
    ws.write("bad.json", scenario(r#"[{"type": "refresh"}]"#).as_bytes());
    assert_eq!(code(&multiss(&["simulate", "--scenario", &ws.p("bad.json"), "--seed", "1"])), 2);
    ws.write("junk.json", b"{");
    assert_eq!(code(&multiss(&["simulate", "--scenario", &ws.p("junk.json"), "--seed", "1"])), 2);
    assert_eq!(code(&multiss(&["simulate", "--scenario", &ws.p("junk.json")])), 64);

    // two runs against one state file equal one run of both halves
    ws.write(
        "a.json",
        scenario(r#"[{"type": "deal"}, {"type": "compromise_node", "network": "paris", "node": 1}]"#).as_bytes(),
    );
    ws.write(
        "b.json",
        scenario(r#"[{"type": "refresh"}, {"type": "hndl_decrypt_classical"}, {"type": "attempt_reconstruct", "actor": "adversary"}]"#)
            .as_bytes(),
    );
    ws.write(
        "ab.json",
        scenario(
            r#"[{"type": "deal"}, {"type": "compromise_node", "network": "paris", "node": 1}, {"type": "refresh"},
                {"type": "hndl_decrypt_classical"}, {"type": "attempt_reconstruct", "actor": "adversary"}]"#,
        )
        .as_bytes(),
    );
    let state = ws.p("sim.mss");
    assert_eq!(code(&multiss(&["simulate", "--scenario", &ws.p("a.json"), "--seed", "9", "--state", &state])), 0);
    assert_eq!(&fs::read(&state).unwrap()[..4], b"MSS1");
    assert_eq!(code(&multiss(&["simulate", "--scenario", &ws.p("b.json"), "--seed", "9", "--state", &state])), 0);
    assert_eq!(code(&multiss(&["simulate", "--scenario", &ws.p("ab.json"), "--seed", "9"])), 0);
    assert_eq!(fs::read(ws.path("b.report.json")).unwrap(), fs::read(ws.path("ab.report.json")).unwrap());

    fs::write(&state, b"MSS1\0").unwrap();
    let out = multiss(&["simulate", "--scenario", &ws.p("b.json"), "--seed", "9", "--state", &state]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("truncated"));
}
