use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_mhcs");

fn mhcs(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--dir")
        .arg(dir)
        .args(args)
        .env_remove("MHCS_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn setup(dir: &Path) {
    let o = mhcs(dir, &["--seed", "11", "setup", "--level", "128"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

fn register_and_sign(dir: &Path, id: &str, t: u64) {
    assert_eq!(code(&mhcs(dir, &["register", "--id", id])), 0);
    let msg = dir.join(format!("{id}.msg"));
    std::fs::write(&msg, format!("heart rate of {id}: 72")).unwrap();
    let o = mhcs(
        dir,
        &[
            "sign",
            "--id",
            id,
            "--message",
            msg.to_str().unwrap(),
            "--time",
            &t.to_string(),
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn setup_files_reparse_and_refuse_overwrite() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    setup(dir);
    for f in [
        "suite.json",
        "ms.public.json",
        "ms.secret.json",
        "dc.public.json",
        "dc.secret.json",
    ] {
        let v: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.join(f)).unwrap()).unwrap();
        assert_eq!(v["backend"], "bls12-381", "{f}");
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let mode = std::fs::metadata(dir.join("ms.secret.json"))
            .unwrap()
            .permissions()
            .mode();
        assert_eq!(mode & 0o777, 0o600);
    }
    let before = std::fs::read(dir.join("ms.secret.json")).unwrap();
    let o = mhcs(dir, &["setup"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--force"));
    assert_eq!(std::fs::read(dir.join("ms.secret.json")).unwrap(), before);
    assert_eq!(code(&mhcs(dir, &["setup", "--force"])), 0);
    assert_ne!(std::fs::read(dir.join("ms.secret.json")).unwrap(), before);
}

#[test]
fn unsupported_level_is_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mhcs(tmp.path(), &["setup", "--level", "256"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported security level 256"));
    assert!(!tmp.path().join("suite.json").exists());
}

#[test]
fn bad_flags_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&mhcs(tmp.path(), &["sign", "--id"])), 2);
    assert_eq!(code(&mhcs(tmp.path(), &["frobnicate"])), 2);
}

#[test]
fn missing_artifact_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mhcs(tmp.path(), &["register", "--id", "x"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing artifact"));
}

#[test]
fn happy_path_five_participants() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    setup(dir);
    let start = 1_700_000_000u64;
    for i in 1..=5 {
        register_and_sign(dir, &format!("p{i}"), start + i);
    }
    let o = mhcs(
        dir,
        &[
            "submit",
            "--slot",
            "7",
            "--start",
            &start.to_string(),
            "--duration",
            "60",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(stdout(&o).matches("\"accepted\"").count(), 5);
    assert_eq!(
        std::fs::read_to_string(dir.join("outbox.jsonl")).unwrap(),
        ""
    );

    let agg: Value =
        serde_json::from_str(&stdout(&mhcs(dir, &["aggregate", "--slot", "7"]))).unwrap();
    assert_eq!(agg["n"], 5);

    let o = mhcs(dir, &["batch-verify", "--slot", "7"]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["verified"], true);
    assert_eq!(report["n"], 5);
    assert!(dir.join("slots/7.report.json").exists());

    // DC state holds no identity strings
    let slot = std::fs::read_to_string(dir.join("slots/7.json")).unwrap();
    for i in 1..=5 {
        assert!(!slot.contains(&hex_of(&format!("p{i}"))));
    }
    let slot: Value = serde_json::from_str(&slot).unwrap();
    let index = slot["accepted"][2]["index_v"].as_str().unwrap();
    let o = mhcs(dir, &["trace", "--index", index]);
    assert_eq!(code(&o), 0);
    let traced: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(traced["id"], "p3");
}

fn hex_of(s: &str) -> String {
    s.bytes().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn duplicate_registration_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    setup(tmp.path());
    assert_eq!(code(&mhcs(tmp.path(), &["register", "--id", "dup"])), 0);
    let o = mhcs(tmp.path(), &["register", "--id", "dup"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("already been issued"));
}

#[test]
fn time_outside_slot_is_stale() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    setup(dir);
    register_and_sign(dir, "early", 100);
    register_and_sign(dir, "ontime", 6010);
    register_and_sign(dir, "edge", 6060);
    // slot 100 with the default 60 s duration is [6000, 6060)
    let o = mhcs(dir, &["submit", "--slot", "100"]);
    assert_eq!(code(&o), 1);
    let lines: Vec<Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines[0]["reason"], "stale-timestamp");
    assert_eq!(lines[1]["status"], "accepted");
    assert_eq!(lines[2]["reason"], "stale-timestamp");
    let o = mhcs(dir, &["batch-verify", "--slot", "100"]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["rejected_submissions"].as_array().unwrap().len(), 2);
}

#[test]
fn replayed_submission_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    setup(dir);
    register_and_sign(dir, "r", 6001);
    let copy = dir.join("copy.jsonl");
    std::fs::copy(dir.join("outbox.jsonl"), &copy).unwrap();
    assert_eq!(code(&mhcs(dir, &["submit", "--slot", "100"])), 0);
    let o = mhcs(
        dir,
        &["submit", "--slot", "100", "--input", copy.to_str().unwrap()],
    );
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("replay"));
}

#[test]
fn simulate_tamper_m3_exits_1_and_names_rejection() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mhcs(
        tmp.path(),
        &[
            "--seed",
            "5",
            "simulate",
            "--participants",
            "5",
            "--tamper",
            "m:3",
        ],
    );
    assert_eq!(code(&o), 1);
    let out: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rejected = out["report"]["rejected_submissions"].as_array().unwrap();
    assert_eq!(rejected.len(), 1);
    assert_eq!(rejected[0]["seq"], 2);
    assert_eq!(rejected[0]["reason"], "hash_mismatch");
    assert!(String::from_utf8_lossy(&o.stderr).contains("hash-mismatch"));

    let o = mhcs(
        tmp.path(),
        &["--seed", "5", "simulate", "--participants", "5"],
    );
    assert_eq!(code(&o), 0);
    let out: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(out["success"], true);
    assert_eq!(out["traced"][4]["id"], "participant-5");
}

#[test]
fn simulate_from_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("scenario.json");
    std::fs::write(
        &cfg,
        r#"{"n_participants": 4, "slot_duration_s": 30, "tamper": {"index": 2, "field": "u"}, "seed": 3}"#,
    )
    .unwrap();
    let o = mhcs(tmp.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let out: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(out["report"]["verified"], false);
    assert_eq!(out["report"]["offending"], serde_json::json!([1]));
}

#[test]
fn bench_csv_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let run = |tag: &str, workers: &str| {
        let csv = dir.join(format!("{tag}.csv"));
        let json = dir.join(format!("{tag}.json"));
        let o = mhcs(
            dir,
            &[
                "--seed",
                "42",
                "bench",
                "--participants",
                "1,10,100",
                "--workers",
                workers,
                "--no-timings",
                "--csv",
                csv.to_str().unwrap(),
                "--json",
                json.to_str().unwrap(),
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (
            std::fs::read_to_string(csv).unwrap(),
            std::fs::read_to_string(json).unwrap(),
        )
    };
    let (csv, json_a) = run("a", "2");
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let row100: Vec<&str> = csv
        .lines()
        .find(|l| l.starts_with("100,"))
        .unwrap()
        .split(',')
        .collect();
    assert_eq!(row100[col("pairings_aggregate_verify")], "2");
    assert_eq!(row100[col("pairings_batch_verify")], "2");
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let n: u64 = f[0].parse().unwrap();
        assert_eq!(f[col("storage_batch_paper")], (160 * n + 1184).to_string());
        assert_eq!(f[col("storage_unbatched_paper")], (1344 * n).to_string());
    }
    let (_, json_b) = run("b", "2");
    assert_eq!(json_a, json_b);
}
