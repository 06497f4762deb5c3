use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semcomplete"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn complete_running_example() {
    let out = ok(&["complete", "--domain", "bonds", "--prefix", "bullet bonds mat"]);
    let first: Vec<&str> = out.lines().next().unwrap().split('\t').collect();
    assert_eq!(
        first,
        [
            "bullet bonds maturing in 2020",
            "AND(MATURITY_DATE=ExactDate(-1,-1,2020), MATURITY_TYPE=BULLET)",
            "MATURITY_DATE",
            "HIGH",
            "atomic",
        ]
    );
}

#[test]
fn complete_json_and_k() {
    let out = ok(&["complete", "--domain", "news", "--prefix", "a", "--k", "2", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["prefix"], "a");
    assert_eq!(v["completions"].as_array().unwrap().len(), 2);
}

#[test]
fn bad_usage_fails() {
    assert!(!run(&["frobnicate"]).status.success());
    assert!(!run(&["complete"]).status.success());
    let o = run(&["complete", "--domain", "no-such-domain", "--prefix", "a"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
    let o = run(&["complete", "--prefix", "a", "--budget-ms", "0"]);
    assert!(!o.status.success());
}

#[test]
fn synth_is_reproducible() {
    let a = ok(&["synth", "--n", "1000", "--seed", "7"]);
    let b = ok(&["synth", "--n", "1000", "--seed", "7"]);
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1000);
    assert_ne!(a, ok(&["synth", "--n", "1000", "--seed", "8"]));
    for line in a.lines() {
        assert_eq!(line.split('\t').count(), 3, "{line}");
    }
}

#[test]
fn snapshots_round_trip_through_complete() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.tsv");
    let mpc = dir.path().join("mpc.bin");
    let atoms = dir.path().join("atoms.bin");
    let news = ["--domain", "news"];
    let with = |args: &[&str]| ok(&[&args[..1], &news[..], &args[1..]].concat());
    with(&["synth", "--n", "20", "--seed", "3", "--out", s(&log)]);
    assert!(with(&["build-index", "--log", s(&log), "--out", s(&mpc)]).contains("distinct queries"));
    let phrases = dir.path().join("phrases.tsv");
    // "green energy" is not in the grammar's phrase lexicon, so it is built but never verified.
    std::fs::write(&phrases, "cloud computing\t4\ngreen energy\t9\n").unwrap();
    let built = with(&["build-atom-model", "--log", s(&log), "--out", s(&atoms), "--phrases", s(&phrases), "--dump"]);
    assert!(built.contains("\"green energy\" :="), "{built}");
    let snap =
        |prefix: &str| with(&["complete", "--prefix", prefix, "--mpc-snapshot", s(&mpc), "--atom-snapshot", s(&atoms)]);
    assert!(snap("cloud com").starts_with("cloud computing\tKEYWORDS CONTAINS \"cloud computing\"\t"));
    assert_eq!(with(&["complete", "--prefix", "cloud com", "--log", s(&log)]), "");
    assert_eq!(snap("green en"), "");

    let plain = with(&["complete", "--prefix", "a", "--log", s(&log)]);
    assert!(!plain.is_empty());
    assert_eq!(
        snap("a").lines().filter(|l| !l.contains("cloud computing")).collect::<Vec<_>>(),
        plain.lines().collect::<Vec<_>>()
    );
}

#[test]
fn config_file_drives_complete() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("service.toml");
    std::fs::write(&cfg, "domain = \"news\"\n[coordinator]\nd = 3\n").unwrap();
    let out = ok(&["complete", "--config", s(&cfg), "--prefix", "a"]);
    assert_eq!(out.lines().count(), 3);
    let out = ok(&["complete", "--config", s(&cfg), "--domain", "bonds", "--prefix", "bullet bonds mat"]);
    assert!(out.starts_with("bullet bonds maturing in 2020\t"));
}

#[test]
fn timeshift_moves_dates() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.tsv");
    std::fs::write(
        &log,
        "bonds maturing in the last 3 months\t2022-05-01\t2\nibm bonds maturing on march 3, 2020\t2019-05-31\t1\n",
    )
    .unwrap();
    let out = ok(&["timeshift", "--log", s(&log), "--now", "2022-05-31"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| l.split('\t').nth(1) == Some("2022-05-31")), "{out}");
    assert!(lines[0].starts_with("bonds maturing in the last 3 months\t"), "{out}");
    assert!(lines[1].starts_with("ibm bonds maturing on march 3, 2023\t"), "{out}");
    let shifted = dir.path().join("shifted.tsv");
    ok(&["timeshift", "--log", s(&log), "--now", "2022-05-31", "--out", s(&shifted)]);
    assert_eq!(std::fs::read_to_string(&shifted).unwrap(), out);
    assert!(!run(&["timeshift", "--log", s(&log), "--now", "May 2022"]).status.success());
}

#[test]
fn eval_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.tsv");
    let test = dir.path().join("test.tsv");
    let report = dir.path().join("report.json");
    ok(&["synth", "--n", "200", "--seed", "1", "--out", s(&train)]);
    ok(&["synth", "--n", "20", "--seed", "2", "--out", s(&test)]);
    let table =
        ok(&["eval", "--train", s(&train), "--test", s(&test), "--predicates", "STR,pstr,SEM", "--out", s(&report)]);
    assert!(table.contains("MRR"), "{table}");
    assert!(table.contains("P99"), "{table}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["queries"], 20);
    let stdout_json: serde_json::Value =
        serde_json::from_str(&ok(&["eval", "--train", s(&train), "--test", s(&test), "--predicates", "SEM", "--json"]))
            .unwrap();
    assert_eq!(stdout_json["queries"], 20);
    let o = run(&["eval", "--train", s(&train), "--test", s(&test), "--predicates", "FUZZY"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown predicate `FUZZY`"));
}

#[test]
fn bench_over_prefix_file() {
    let dir = tempfile::tempdir().unwrap();
    let prefixes = dir.path().join("prefixes.txt");
    std::fs::write(&prefixes, "ibm b\nbullet bonds mat\n\nmarket cap > 2\n").unwrap();
    let out = ok(&["bench", "--prefixes", s(&prefixes)]);
    let header: Vec<&str> = out.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(header, ["mean", "P90", "P95", "P99", "n"]);
    assert!(out.lines().nth(1).unwrap().trim_end().ends_with(" 3"), "{out}");
    let v: serde_json::Value = serde_json::from_str(&ok(&["bench", "--n", "20", "--json"])).unwrap();
    assert_eq!(v["n"], 20);
    std::fs::write(&prefixes, "\n").unwrap();
    assert!(!run(&["bench", "--prefixes", s(&prefixes)]).status.success());
}

/// Kills the server when the test ends, pass or fail.
struct Server(std::process::Child);

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[test]
fn serve_and_bench_end_to_end() {
    let mut child = bin()
        .args(["-v", "serve", "--bind", "127.0.0.1:0"])
        .env_remove("SEMCOMPLETE_BIND")
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let stderr = child.stderr.take().unwrap();
    let server = Server(child);
    let addr = BufReader::new(stderr)
        .lines()
        .map_while(Result::ok)
        .find_map(|l| l.split("listening on ").nth(1).map(|a| a.trim().to_string()))
        .expect("server did not start");
    let url = format!("http://{addr}");
    let out = ok(&["bench", "--n", "10", "--json", "--url", &url]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["n"], 10);
    drop(server);
}
