use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_proxnet");

fn proxnet(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn p(dir: &Path, rel: &str) -> String {
    dir.join(rel).display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), stderr(&o));
    o
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

const ROSTER: &str = "participant,app_id,badge_id,platform\n\
alice,aa01,bb01,platform_A\n\
bob,aa02,bb02,platform_B\n\
carol,aa03,bb03,platform_A\n";

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

/// Two office days of hand-made logs on a one-hour grid.
fn fixture(dir: &Path) {
    write(dir, "roster.csv", ROSTER);
    write(
        dir,
        "grid.json",
        r#"{"start_date":"2015-08-17","end_date":"2015-08-18","days_of_week":["Mon","Tue"],
            "daily_start":"09:00:00","daily_end":"10:00:00","timezone":"Australia/Sydney","bin_seconds":300}"#,
    );
    let mut app = String::from("ts,source,kind,scanner,observed\n");
    let mut badge = app.clone();
    // 09:00 Sydney is 23:00 UTC the day before.
    for (day, utc_date) in [(0, "2015-08-16"), (1, "2015-08-17")] {
        for bin in 0..12 {
            let ts = format!("{utc_date}T23:{:02}:10Z", bin * 5);
            for s in ["aa01", "aa02", "aa03"] {
                if s != "aa02" || bin % 4 == 0 {
                    app.push_str(&format!("{ts},app,scan,{s},\n"));
                }
            }
            if bin < 6 + day {
                app.push_str(&format!("{ts},app,detect,aa01,aa03\n"));
                badge.push_str(&format!("{ts},badge,detect,bb03,bb01\n"));
            }
            if bin % 4 == 0 {
                app.push_str(&format!("{ts},app,detect,aa02,aa01\n"));
            }
            if bin == 3 {
                badge.push_str(&format!("{ts},badge,detect,bb02,bb03\n"));
            }
        }
    }
    write(dir, "app.csv", &app);
    write(dir, "badge.csv", &badge);
    write(dir, "survey.csv", "respondent,nominee1,nominee2\nalice,Carol C,\nbob,alice,\n");
    write(dir, "names.csv", "name,participant\nCarol C,carol\n");
}

fn ingest(dir: &Path) {
    ok(proxnet(&[
        "ingest", "--grid", &p(dir, "grid.json"), "--roster", &p(dir, "roster.csv"),
        "--app", &p(dir, "app.csv"), "--badge", &p(dir, "badge.csv"), "--out", &p(dir, "store"),
    ]));
}

#[test]
fn full_command_chain_on_hand_made_logs() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    fixture(d);
    ingest(d);
    let activity = fs::read_to_string(d.join("store/activity.csv")).unwrap();
    assert!(activity.starts_with("participant,source,device,active_bins,active_fraction\n"));
    assert!(activity.contains("alice,app,aa01,24,1.0"));
    // bob's badge is seen once per day
    assert!(activity.contains("bob,badge,bb02,2,"));

    for source in ["app", "badge"] {
        ok(proxnet(&["estimate", "--store", &p(d, "store"), "--source", source, "--out", &p(d, "est")]));
    }
    let app = fs::read_to_string(d.join("est/app_weights.csv")).unwrap();
    // alice-carol detected in 13 of 24 bins, alice-bob in 6
    assert_eq!(
        app,
        "alice,bob,carol\n0.000000,0.250000,0.541667\n0.250000,0.000000,0.000000\n0.541667,0.000000,0.000000\n"
    );

    ok(proxnet(&[
        "compare", "--a", &p(d, "est/app_weights.csv"), "--b", &p(d, "est/badge_weights.csv"),
        "--survey", &p(d, "survey.csv"), "--names", &p(d, "names.csv"), "--store", &p(d, "store"),
        "--seed", "4", "--out", &p(d, "cmp"),
    ]));
    let stats = json(d.join("cmp/stats.json"));
    assert_eq!(stats["participants"], 3);
    assert_eq!(stats["survey"]["edges"], 2);
    assert_eq!(stats["edge_match"]["edges"], 2);
    assert_eq!(stats["edge_match"]["a_vs_survey"]["matched"], 2);
    assert_eq!(stats["mantel"]["exact"], true);
    let table = &stats["contingency"]["table"];
    // 72 dyad-bins; app sees 19, badge sees 15, 13 shared
    assert_eq!((table["a"].as_u64(), table["b"].as_u64()), (Some(13), Some(6)));
    assert_eq!((table["c"].as_u64(), table["d"].as_u64()), (Some(2), Some(51)));

    ok(proxnet(&[
        "backbone", "--matrix", &p(d, "est/app_weights.csv"), "--survey", &p(d, "survey.csv"),
        "--names", &p(d, "names.csv"), "--out", &p(d, "bb"),
    ]));
    let edges = fs::read_to_string(d.join("bb/backbone.csv")).unwrap();
    assert_eq!(edges.lines().count(), 3);
    assert!(fs::read_to_string(d.join("bb/backbone.graphml")).unwrap().contains("edgedefault=\"undirected\""));
    assert!(d.join("bb/survey.graphml").exists());

    ok(proxnet(&[
        "curve", "--store", &p(d, "store"), "--samples", "2,6,24", "--repeats", "20",
        "--reference", &format!("badge={}", p(d, "est/badge_weights.csv")),
        "--survey-reference", &format!("survey={}", p(d, "survey.csv")), "--names", &p(d, "names.csv"),
        "--seed", "1", "--out", &p(d, "curve"),
    ]));
    let curve = fs::read_to_string(d.join("curve/curve.csv")).unwrap();
    let mut lines = curve.lines();
    assert_eq!(lines.next(), Some("S,roster_n,repeats,badge_mean,badge_lo,badge_hi,survey_mean,survey_lo,survey_hi"));
    // only alice and carol scan 24 times
    assert!(lines.last().unwrap().starts_with("24,2,20,,,"));

    for cmd in ["ingest", "estimate", "compare", "backbone", "curve"] {
        let dir = match cmd {
            "ingest" => "store",
            "estimate" => "est",
            "compare" => "cmp",
            "backbone" => "bb",
            _ => "curve",
        };
        let prov = json(d.join(dir).join(format!("{cmd}.provenance.json")));
        assert_eq!(prov["command"], cmd);
        assert!(!prov["inputs"].as_object().unwrap().is_empty());
        assert!(!prov["outputs"].as_object().unwrap().is_empty());
    }
}

#[test]
fn exit_codes_by_error_class() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    fixture(d);
    ingest(d);
    ok(proxnet(&["estimate", "--store", &p(d, "store"), "--source", "app", "--out", &p(d, "est")]));
    let m = p(d, "est/app_weights.csv");

    // config: randomized command without a seed, bad grid, bad density
    let o = proxnet(&["compare", "--a", &m, "--b", &m, "--out", &p(d, "x")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed"));
    write(d, "bad_grid.json", r#"{"start_date":"2015-08-17","end_date":"2015-08-17","days_of_week":["Mon"],"daily_start":"09:00:00","daily_end":"09:07:00","timezone":"Australia/Sydney","bin_seconds":300}"#);
    let o = proxnet(&["ingest", "--grid", &p(d, "bad_grid.json"), "--roster", &p(d, "roster.csv"), "--out", &p(d, "x")]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(proxnet(&["backbone", "--matrix", &m, "--density", "1.5", "--out", &p(d, "x")]).status.code(), Some(2));
    assert_eq!(proxnet(&["estimate", "--store", &p(d, "store"), "--source", "wifi"]).status.code(), Some(2));

    // parse: malformed row reports its line
    let mut bad = fs::read_to_string(d.join("app.csv")).unwrap();
    bad.push_str("not-a-time,app,scan,aa01,\n");
    let lines = bad.lines().count();
    write(d, "bad.csv", &bad);
    let o = proxnet(&["ingest", "--roster", &p(d, "roster.csv"), "--app", &p(d, "bad.csv"), "--out", &p(d, "x")]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains(&format!("bad.csv:{lines}:")), "{}", stderr(&o));
    // lenient mode keeps going and reports the row
    ok(proxnet(&["ingest", "--lenient", "--grid", &p(d, "grid.json"), "--roster", &p(d, "roster.csv"), "--app", &p(d, "bad.csv"), "--out", &p(d, "lenient")]));
    let report = json(d.join("lenient/ingest_report.json"));
    assert_eq!(report[0]["rejections"][0]["line"], lines as u64);

    // statistics: more edges than the matrix has, zero-margin contingency
    let o = proxnet(&["backbone", "--matrix", &m, "--density", "1.0", "--out", &p(d, "x")]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("insufficient edges"));
    write(d, "empty_badge.csv", "ts,source,kind,scanner,observed\n");
    ok(proxnet(&["ingest", "--grid", &p(d, "grid.json"), "--roster", &p(d, "roster.csv"), "--app", &p(d, "app.csv"), "--badge", &p(d, "empty_badge.csv"), "--out", &p(d, "s2")]));
    let o = proxnet(&["compare", "--a", &m, "--b", &m, "--store", &p(d, "s2"), "--seed", "1", "--out", &p(d, "x")]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("zero margin"));

    // io: missing input
    let o = proxnet(&["backbone", "--matrix", &p(d, "missing.csv"), "--density", "0.5", "--out", &p(d, "x")]);
    assert_eq!(o.status.code(), Some(1));

    // help and version succeed
    assert_eq!(proxnet(&["--help"]).status.code(), Some(0));
    assert_eq!(proxnet(&["--version"]).status.code(), Some(0));
}

#[test]
fn empty_inputs_give_empty_outputs() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    write(d, "roster.csv", "participant,app_id,badge_id,platform\n");
    write(d, "app.csv", "ts,source,kind,scanner,observed\n");
    write(d, "app.jsonl", "");
    ok(proxnet(&["ingest", "--roster", &p(d, "roster.csv"), "--app", &p(d, "app.csv"), "--out", &p(d, "s")]));
    assert_eq!(fs::read_to_string(d.join("s/app_events.csv")).unwrap(), "ts,source,kind,scanner,observed\n");
    assert_eq!(
        fs::read_to_string(d.join("s/activity.csv")).unwrap(),
        "participant,source,device,active_bins,active_fraction\n"
    );
    ok(proxnet(&["ingest", "--roster", &p(d, "roster.csv"), "--app", &p(d, "app.jsonl"), "--out", &p(d, "s2")]));
    // a network needs participants
    let o = proxnet(&["estimate", "--store", &p(d, "s"), "--source", "app", "--out", &p(d, "e")]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("empty roster"));
}

#[test]
fn reruns_are_byte_identical() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    let run = || {
        ok(proxnet(&["simulate", "--seed", "9", "--out", &p(d, "sim")]));
        ok(proxnet(&["ingest", "--roster", &p(d, "sim/roster.csv"), "--app", &p(d, "sim/app_log.csv"), "--badge", &p(d, "sim/badge_log.csv"), "--out", &p(d, "store")]));
        ok(proxnet(&["estimate", "--store", &p(d, "store"), "--source", "app", "--out", &p(d, "est")]));
        ok(proxnet(&["compare", "--a", &p(d, "est/app_weights.csv"), "--b", &p(d, "sim/truth.csv"), "--permutations", "500", "--bootstrap", "100", "--seed", "3", "--out", &p(d, "cmp")]));
        ["sim/app_log.csv", "sim/truth.csv", "sim/simulate.provenance.json", "store/app_events.csv", "store/activity.csv", "est/app_weights.csv", "cmp/stats.json", "cmp/compare.provenance.json"]
            .map(|f| fs::read(d.join(f)).unwrap())
    };
    assert_eq!(run(), run());
    // another seed changes the randomized outputs
    ok(proxnet(&["compare", "--a", &p(d, "est/app_weights.csv"), "--b", &p(d, "sim/truth.csv"), "--permutations", "500", "--bootstrap", "100", "--seed", "4", "--out", &p(d, "cmp2")]));
    assert_ne!(
        json(d.join("cmp/stats.json"))["mantel"]["ci_low"],
        json(d.join("cmp2/stats.json"))["mantel"]["ci_low"]
    );
}

#[test]
fn simulate_accepts_a_config_file() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    ok(proxnet(&["simulate", "--preset", "noiseless", "--participants", "4", "--seed", "2", "--out", &p(d, "a")]));
    let mut cfg = json(d.join("a/sim_config.json"));
    cfg["q_det"] = 0.5.into();
    write(d, "cfg.json", &cfg.to_string());
    ok(proxnet(&["simulate", "--config", &p(d, "cfg.json"), "--seed", "2", "--out", &p(d, "b")]));
    assert_eq!(json(d.join("b/sim_config.json"))["q_det"], 0.5);
    assert_eq!(fs::read(d.join("a/truth.csv")).unwrap(), fs::read(d.join("b/truth.csv")).unwrap());
    cfg["q_det"] = 2.0.into();
    write(d, "bad.json", &cfg.to_string());
    assert_eq!(proxnet(&["simulate", "--config", &p(d, "bad.json"), "--seed", "2", "--out", &p(d, "c")]).status.code(), Some(2));
}
