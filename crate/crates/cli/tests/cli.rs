use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pagecast"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn build_reproduces_shipped_model() {
    let site = data("demo_site.txt");
    let conf = data("demo.conf");
    let built = stdout(&["build", "--graph", p(&site), "--config", p(&conf)]);
    assert_eq!(built, std::fs::read_to_string(data("demo_model.csv")).unwrap());
    let dumped = stdout(&["dump", "--model", p(&data("demo_model.csv"))]);
    assert_eq!(dumped, built);
}

#[test]
fn micro_site_model_and_prediction() {
    let out = scratch("micro_model.csv");
    stdout(&["build", "--graph", p(&data("micro_site.txt")), "--out", p(&out)]);
    let table = stdout(&["dump", "--model", p(&out), "--table"]);
    assert!(table.lines().count() == 7, "{table}");

    let json: serde_json::Value =
        serde_json::from_str(&stdout(&["predict", "--model", p(&out), "--url", "S", "--window", "2"])).unwrap();
    assert_eq!(json["source"], "S");
    assert_eq!(json["window"], serde_json::json!(["b", "a"]));
    assert_eq!(json["candidates"][0]["class_match"], true);
}

#[test]
fn rank_lists_every_page() {
    let csv = stdout(&["rank", "--graph", p(&data("micro_site.txt"))]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("url,score,ordinal"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().any(|r| r.starts_with("c,") && r.ends_with(",6")));
}

#[test]
fn replay_matches_golden_reports() {
    let model = data("demo_model.csv");
    let trace = data("demo_trace.csv");
    let conf = data("demo.conf");
    let mut totals = Vec::new();
    for (w, golden) in [("2", "demo_report_w2.csv"), ("3", "demo_report_w3.csv")] {
        let got = stdout(&["replay", "--model", p(&model), "--trace", p(&trace), "--window", w, "--config", p(&conf)]);
        assert_eq!(got, std::fs::read_to_string(data(golden)).unwrap(), "window {w}");
        let total: Vec<String> = got.lines().nth(1).unwrap().split(',').map(str::to_string).collect();
        assert_eq!(total[4], "*");
        totals.push(total[3].parse::<f64>().unwrap());
    }
    assert!(totals[1] > totals[0], "{totals:?}");
}

#[test]
fn replay_several_windows_shares_one_header() {
    let got = stdout(&[
        "replay",
        "--model",
        p(&data("demo_model.csv")),
        "--trace",
        p(&data("demo_trace.csv")),
        "--window",
        "0",
        "--window",
        "2",
    ]);
    assert_eq!(got.matches("window,requests").count(), 1);
    assert!(got.lines().any(|l| l == "0,570,0,0.0000,*"));
    assert!(got.lines().any(|l| l.starts_with("2,570,") && l.ends_with(",*")));
}

#[test]
fn gen_commands_are_seeded() {
    let a = stdout(&["gen-site", "--sections", "3", "--pages", "4", "--seed", "5"]);
    assert_eq!(a, stdout(&["gen-site", "--sections", "3", "--pages", "4", "--seed", "5"]));
    let site = scratch("small_site.txt");
    std::fs::write(&site, &a).unwrap();
    let args = ["gen-trace", "--graph", p(&site), "--sessions", "4", "--length", "5", "--seed", "9"];
    let t = stdout(&args);
    assert_eq!(t, stdout(&args));
    assert_eq!(t.lines().count(), 21);
    assert_eq!(t.lines().next(), Some("tick,session_id,url"));
}

#[test]
fn exit_codes() {
    let model = p(&data("demo_model.csv")).to_string();
    let out = run(&["predict", "--model", &model, "--url", "/nowhere"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown page /nowhere"));

    let bad = scratch("bad_site.txt");
    std::fs::write(&bad, "a -> b\n@dominant a\n").unwrap();
    let out = run(&["build", "--graph", p(&bad)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown page b"));

    assert_eq!(run(&["dump", "--model", "/no/such/file"]).status.code(), Some(3));
    assert_eq!(run(&["predict", "--model", &model]).status.code(), Some(2));
}

#[test]
fn serve_answers_like_the_cli() {
    let model = data("demo_model.csv");
    let snapshot = scratch("served_snapshot.csv");
    let mut child = bin()
        .args(["serve", "--model", p(&model), "--addr", "127.0.0.1:0", "--snapshot-out", p(&snapshot)])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut err = BufReader::new(child.stderr.take().unwrap());
    let mut banner = String::new();
    err.read_line(&mut banner).unwrap();
    let addr = banner.trim().rsplit(' ').next().unwrap().to_string();

    let stream = TcpStream::connect(&addr).unwrap();
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut w = stream;
    let mut ask = |line: &str| -> serde_json::Value {
        writeln!(w, "{line}").unwrap();
        let mut resp = String::new();
        reader.read_line(&mut resp).unwrap();
        serde_json::from_str(&resp).unwrap()
    };

    let cli: serde_json::Value =
        serde_json::from_str(&stdout(&["predict", "--model", p(&model), "--url", "/s3/p7.html", "--window", "3"]))
            .unwrap();
    let served = ask(r#"{"kind":"predict","url":"/s3/p7.html","window":3}"#);
    assert_eq!(served["window"], cli["window"]);

    let unknown = ask(r#"{"kind":"observe","url":"/nowhere","session":"s1"}"#);
    assert!(unknown["error"].as_str().unwrap().contains("unknown page"));
    assert_eq!(ask(r#"{"kind":"observe","url":"/s3/p7.html","session":"s1"}"#)["ok"], true);
    assert!(ask(r#"{"kind":"bogus"}"#)["error"].is_string());
    assert_eq!(ask(r#"{"kind":"shutdown"}"#)["ok"], true);

    assert!(child.wait().unwrap().success());
    let snap = std::fs::read_to_string(&snapshot).unwrap();
    assert!(snap.contains("tick=1"), "{}", snap.lines().next().unwrap());
}
