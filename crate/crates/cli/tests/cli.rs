use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fedrec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fedrec"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = fedrec(dir, args);
    assert!(
        out.status.success(),
        "fedrec {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn small_world(dir: &Path) {
    ok(
        dir,
        &[
            "synth",
            "--users",
            "100",
            "--communities",
            "4",
            "--changed-users",
            "15",
            "--seed",
            "1",
            "--out-dir",
            "w",
        ],
    );
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let dir = d.path();
    assert_eq!(code(&fedrec(dir, &["no-such-command"])), 1);
    assert_eq!(code(&fedrec(dir, &["synth", "--users", "many"])), 1);
    assert_eq!(code(&fedrec(dir, &["synth", "--model", "ring"])), 1);
    assert_eq!(code(&fedrec(dir, &["synth", "--users", "5"])), 1);
    assert_eq!(code(&fedrec(dir, &["stats", "--graph", "missing.tsv"])), 2);
    fs::write(dir.join("bad.tsv"), "a\tb\tc\n").unwrap();
    assert_eq!(code(&fedrec(dir, &["stats", "--graph", "bad.tsv"])), 2);
    small_world(dir);
    let out = fedrec(
        dir,
        &["recommend", "--graph", "w/t1.tsv", "--system", "hits"],
    );
    assert_eq!(code(&out), 1);
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("cf:following") && msg.contains("ppr"), "{msg}");
    // the start user lives on a blocked instance
    let out = fedrec(
        dir,
        &[
            "sample",
            "--world",
            "w/t2.tsv",
            "--start",
            "user0@inst0",
            "--fail",
            "inst0=instance_blocked",
        ],
    );
    assert_eq!(code(&out), 3);
    assert_eq!(code(&fedrec(dir, &["--help"])), 0);
}

#[test]
fn config_file_with_flag_override() {
    let d = tempfile::tempdir().unwrap();
    let dir = d.path();
    fs::write(
        dir.join("run.toml"),
        "users = 50\nchanged_users = 10\nseed = 9\nout_dir = \"from_file\"\n",
    )
    .unwrap();
    let echo = ok(
        dir,
        &[
            "synth",
            "--config",
            "run.toml",
            "--seed",
            "10",
            "--print-config",
        ],
    );
    assert!(echo.contains("users = 50"), "{echo}");
    assert!(echo.contains("seed = 10"), "{echo}");
    assert!(!dir.join("from_file").exists());
    fs::write(dir.join("typo.toml"), "userz = 50\n").unwrap();
    assert_eq!(code(&fedrec(dir, &["synth", "--config", "typo.toml"])), 1);
    ok(dir, &["synth", "--config", "run.toml"]);
    let m = json(&dir.join("from_file/synth_manifest.json"));
    assert_eq!(m["resolved_config"]["users"], 50);
    assert!(m["ground_truth"]["t2_edges"].as_u64() >= m["ground_truth"]["t1_edges"].as_u64());
}

#[test]
fn sample_manifest_and_failure_plan() {
    let d = tempfile::tempdir().unwrap();
    let dir = d.path();
    small_world(dir);
    ok(
        dir,
        &[
            "sample",
            "--world",
            "w/t2.tsv",
            "--start",
            "user0@inst0",
            "--iterations",
            "500",
            "--fail",
            "inst1=instance_blocked",
            "--out-dir",
            "s",
        ],
    );
    let m = json(&dir.join("s/sample_manifest.json"));
    assert_eq!(m["iterations"], 500);
    let visited = m["visited"].as_array().unwrap();
    assert!(!visited.is_empty());
    assert!(visited
        .iter()
        .all(|k| !k.as_str().unwrap().ends_with("@inst1")));
    assert_eq!(
        m["resolved_config"]["failure_plan"]["inst1"],
        "instance_blocked"
    );
    let stats = ok(
        dir,
        &[
            "stats",
            "--graph",
            "s/sample.tsv",
            "--visited",
            "s/sample_manifest.json",
            "--out",
            "s/stats.txt",
        ],
    );
    assert!(stats.contains("NCC"));
    let kv = fs::read_to_string(dir.join("s/stats.txt")).unwrap();
    assert!(kv.contains(&format!("visited={}", visited.len())), "{kv}");
}

#[test]
fn recommend_records() {
    let d = tempfile::tempdir().unwrap();
    let dir = d.path();
    fs::write(dir.join("g.tsv"), "a\tb\nb\tc\nc\ta\nd\ta\n").unwrap();
    ok(
        dir,
        &[
            "recommend",
            "--graph",
            "g.tsv",
            "--system",
            "cf:followers",
            "--target",
            "d",
            "--out",
            "cf.jsonl",
        ],
    );
    let rec: serde_json::Value =
        serde_json::from_str(fs::read_to_string(dir.join("cf.jsonl")).unwrap().trim()).unwrap();
    assert_eq!(rec["flags"]["unprofiled"], true);
    assert_eq!(rec["entries"].as_array().unwrap().len(), 0);
    assert_eq!(rec["k"], 100);
    ok(
        dir,
        &[
            "recommend",
            "--graph",
            "g.tsv",
            "--system",
            "ppr",
            "--damping",
            "0.5",
            "--out",
            "ppr.jsonl",
        ],
    );
    let text = fs::read_to_string(dir.join("ppr.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 4);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["system"], "ppr");
    assert_eq!(first["config"]["params"]["damping"], 0.5);
}

#[test]
fn evaluate_single_system_and_rankings() {
    let d = tempfile::tempdir().unwrap();
    let dir = d.path();
    small_world(dir);
    let table = ok(
        dir,
        &[
            "evaluate",
            "--train",
            "w/t1.tsv",
            "--truth",
            "w/t2.tsv",
            "--systems",
            "ppr",
            "--out-dir",
            "e",
        ],
    );
    assert!(!table.contains('▲') && !table.contains('◦'), "{table}");
    let report = json(&dir.join("e/report.json"));
    assert_eq!(report["n_targets"], 15);
    assert!(report["systems"][0]["significance"]
        .as_array()
        .unwrap()
        .is_empty());
    let csv = fs::read_to_string(dir.join("e/curve.csv")).unwrap();
    assert_eq!(csv.lines().count(), 101);
    ok(
        dir,
        &["report", "--curve", "e/curve.csv", "--out", "e/plot.svg"],
    );
    assert!(fs::read_to_string(dir.join("e/plot.svg"))
        .unwrap()
        .starts_with("<svg"));

    ok(
        dir,
        &[
            "evaluate",
            "--train",
            "w/t1.tsv",
            "--truth",
            "w/t2.tsv",
            "--out-dir",
            "five",
        ],
    );
    let table = fs::read_to_string(dir.join("five/table.txt")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert!(rows[0].contains("MAP") && rows[0].contains("s@10"));
    for (row, name) in rows[1..6].iter().zip([
        "random",
        "cf:following",
        "cf:followers",
        "cf:combined",
        "ppr",
    ]) {
        assert!(row.starts_with(name), "{row}");
    }

    ok(
        dir,
        &[
            "recommend",
            "--graph",
            "w/t1.tsv",
            "--system",
            "random",
            "--out",
            "r.jsonl",
        ],
    );
    ok(
        dir,
        &[
            "recommend",
            "--graph",
            "w/t1.tsv",
            "--system",
            "ppr",
            "--out",
            "p.jsonl",
        ],
    );
    ok(
        dir,
        &[
            "evaluate",
            "--train",
            "w/t1.tsv",
            "--truth",
            "w/t2.tsv",
            "--rankings",
            "r.jsonl",
            "--rankings",
            "p.jsonl",
            "--out-dir",
            "f",
        ],
    );
    let from_files = json(&dir.join("f/report.json"));
    let live = json(&dir.join("five/report.json"));
    assert_eq!(from_files["systems"][1]["map"], live["systems"][4]["map"]);

    // drop one target from the ppr file
    let text = fs::read_to_string(dir.join("p.jsonl")).unwrap();
    let short: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
    fs::write(dir.join("p_short.jsonl"), short).unwrap();
    let out = fedrec(
        dir,
        &[
            "evaluate",
            "--train",
            "w/t1.tsv",
            "--truth",
            "w/t2.tsv",
            "--rankings",
            "r.jsonl",
            "--rankings",
            "p_short.jsonl",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("target sets differ"));
}

#[test]
fn interleave_verdicts() {
    let d = tempfile::tempdir().unwrap();
    let dir = d.path();
    fs::write(dir.join("a.txt"), "x1\nx2\nx3\n").unwrap();
    fs::write(dir.join("b.txt"), "x2\nx3\nx4\n").unwrap();
    let tie: serde_json::Value =
        serde_json::from_str(&ok(dir, &["interleave", "--a", "a.txt", "--b", "b.txt"])).unwrap();
    assert_eq!(tie["verdict"], "tie");
    let v: serde_json::Value = serde_json::from_str(&ok(
        dir,
        &[
            "interleave",
            "--a",
            "a.txt",
            "--b",
            "b.txt",
            "--first",
            "A",
            "--clicks",
            "x4",
        ],
    ))
    .unwrap();
    assert_eq!(v["verdict"], "b_wins");
    assert_eq!(v["k"], 3);
    let shown: Vec<&str> = v["shown"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["key"].as_str().unwrap())
        .collect();
    assert_eq!(shown, ["x1", "x2", "x3", "x4"]);
    let out = fedrec(
        dir,
        &[
            "interleave",
            "--a",
            "a.txt",
            "--b",
            "b.txt",
            "--clicks",
            "zz",
        ],
    );
    assert_eq!(code(&out), 2);
}
