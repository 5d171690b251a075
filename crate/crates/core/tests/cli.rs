use std::fs;
use std::process::{Command, Output};

use cyclored::app::{CensusReportFile, DensityReportFile};

fn cyclored(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclored")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn census_small_limit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = cyclored(&["census", "--a", "2", "--b", "3", "--limit", "100", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let file: CensusReportFile = serde_json::from_str(&text).unwrap();
    assert_eq!(file.schema_version, 1);
    assert_eq!(file.report.total_primes, 25);
    assert_eq!(file.report.good_primes, 22);
    assert!(file.expected.is_none());
    assert_eq!(cyclored::app::to_json_pretty(&file), text);
}

#[test]
fn census_usage_errors() {
    assert_eq!(cyclored(&["census", "--a", "2", "--b", "3", "--limit", "1"]).status.code(), Some(2));
    assert_eq!(cyclored(&["census", "--a", "2"]).status.code(), Some(2));
    assert_eq!(cyclored(&["census", "--label", "nope"]).status.code(), Some(2));
    assert_eq!(cyclored(&["census", "--a", "0", "--b", "0"]).status.code(), Some(2));
    assert_eq!(cyclored(&["bogus"]).status.code(), Some(2));
}

#[test]
fn census_registry_gate() {
    let o = cyclored(&["census", "--label", "serre-ex1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("51105 of 78498"));
}

#[test]
fn census_csv_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.jsonl");
    let primes = dir.path().join("p.csv");
    let running = dir.path().join("run.csv");
    let args = [
        "census",
        "--label",
        "serre-ex3",
        "--limit",
        "50000",
        "--checkpoint",
        ck.to_str().unwrap(),
        "--primes-csv",
        primes.to_str().unwrap(),
        "--running-csv",
        running.to_str().unwrap(),
    ];
    let first = cyclored(&args);
    assert_eq!(first.status.code(), Some(0));
    let again = cyclored(&args);
    assert_eq!(again.status.code(), Some(0));
    let strip_time = |s: String| s.split(" (").next().unwrap().to_string();
    assert_eq!(strip_time(stdout(&first)), strip_time(stdout(&again)));
    let rows = fs::read_to_string(&primes).unwrap();
    assert!(rows.starts_with("p,status,obstructions\n"));
    assert!(fs::read_to_string(&running).unwrap().starts_with("x,total,cyclic,fraction\n"));
    fs::write(&ck, "garbage\n{}\n").unwrap();
    assert_eq!(cyclored(&args).status.code(), Some(4));
}

#[test]
fn density_labels() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.json");
    let o = cyclored(&["density", "--label", "serre-ex5", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("delta  [0.6115973"));
    let file: DensityReportFile = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file.alpha, "65996/65995");
    assert_eq!(file.matches_expected, Some(true));

    let o = cyclored(&["density", "--label", "serre-ex3"]);
    assert!(stdout(&o).contains("delta  [0.4155335"));
    assert!(stdout(&o).contains("alpha  615596/615595"));
}

#[test]
fn density_profiles() {
    let o = cyclored(&["density"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("delta  [0.8137519"));

    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("p.json");
    fs::write(&profile, r#"{"degrees": {"3": 2}, "charsum": [2, 19]}"#).unwrap();
    let o = cyclored(&["density", "--profile", profile.to_str().unwrap()]);
    assert!(stdout(&o).contains("alpha  615596/615595"));
    let o = cyclored(&["density", "--profile", profile.to_str().unwrap(), "--alpha", "1/2", "--charsum"]);
    assert!(stdout(&o).contains("alpha  1/2"), "{}", String::from_utf8_lossy(&o.stderr));

    fs::write(&profile, r#"{"degrees": {"3": 5}}"#).unwrap();
    assert_eq!(cyclored(&["density", "--profile", profile.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&profile, "{").unwrap();
    assert_eq!(cyclored(&["density", "--profile", profile.to_str().unwrap()]).status.code(), Some(2));

    let o = cyclored(&["density", "--profile", profile.to_str().unwrap(), "--label", "serre-ex1"]);
    assert_eq!(o.status.code(), Some(2));

    fs::write(&profile, r#"{"degrees": {"2": 1}}"#).unwrap();
    let o = cyclored(&["density", "--profile", profile.to_str().unwrap()]);
    assert!(stdout(&o).contains("class  Trivial"));
}

#[test]
fn entangle_group_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.json");
    fs::write(
        &file,
        r#"{"moduli": [7, 11, 13],
            "generators": [[[-1,0,0,-1],[1,0,0,1],[1,0,0,1]],
                           [[1,0,0,1],[-1,0,0,-1],[1,0,0,1]],
                           [[1,0,0,1],[1,0,0,1],[-1,0,0,-1]]],
            "construction": {"norm_one": {"elements": [[-1,0,0,-1],[-1,0,0,-1],[-1,0,0,-1]]}}}"#,
    )
    .unwrap();
    let o = cyclored(&["entangle", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["order"], "4");
    assert_eq!(summary["delta_exact"], "0");
    assert_eq!(summary["naive"], "1/8");

    fs::write(&file, r#"{"moduli": [3], "full_product": true}"#).unwrap();
    let summary: serde_json::Value = serde_json::from_slice(&cyclored(&["entangle", file.to_str().unwrap()]).stdout).unwrap();
    assert_eq!(summary["order"], "48");
    assert_eq!(summary["delta_exact"], "47/48");

    assert_eq!(cyclored(&["entangle", dir.path().join("none.json").to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn galois_and_constants() {
    let o = cyclored(&["galois", "--label", "serre-ex4", "--ell", "3,7"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("[Q(E[2]):Q] = 6"));
    assert!(s.contains("l = 7: surjective"));
    assert!(s.contains("l = 3: fingerprint only"));
    let o = cyclored(&["galois", "--a", "-13392", "--b", "-1080432", "--ell", "5"]);
    assert!(stdout(&o).contains("l = 5: inconclusive"));

    let o = cyclored(&["constants", "--truncation", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("A_inf in [0.81375"));
}

#[test]
fn ingest_fixtures() {
    let o = cyclored(&["ingest", "serre-ex1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(r#""degrees":{"2":3}"#));

    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cyclored"))
        .args(["ingest", "serre-ex5"])
        .env("CYCLORED_FIXTURES", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
    fs::write(
        dir.path().join("serre-ex5.json"),
        r#"{"a": -13392, "b": -1080432, "nonmax_primes": [5], "modell_images": ["5.120.0.1"]}"#,
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cyclored"))
        .args(["ingest", "serre-ex5"])
        .env("CYCLORED_FIXTURES", dir.path())
        .output()
        .unwrap();
    assert!(stdout(&o).contains(r#""degrees":{"5":4}"#));
}
