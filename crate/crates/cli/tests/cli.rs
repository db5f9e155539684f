use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dsme_lora::report::{parse_trace, CDF_HEADER, TRACE_HEADER};
use dsme_lora::sim::summarize;
use dsme_lora::Micros;

const CONFIG: &str = "\
# stressed CFP, shortened
mode = cfp
sensors = 15
tx_interval_mean_s = 5
duration_s = 600
warmup_s = 60
seed = 7
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dsme-lora"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.conf");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_writes_three_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), CONFIG);
    let out = tmp.path().join("out");
    let o = run(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with(TRACE_HEADER));
    let records = parse_trace(&trace).unwrap();
    assert!(!records.is_empty());

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let s = summarize(&records, Micros::from_secs(60), None);
    assert_eq!(json["generated"], s.generated);
    assert_eq!(json["delivered"], s.delivered);
    assert_eq!(
        json["generated"].as_u64().unwrap(),
        ["delivered", "drop_queue", "drop_channel_access", "drop_retry", "in_flight"]
            .iter()
            .map(|k| json[*k].as_u64().unwrap())
            .sum::<u64>()
    );
    assert_eq!(json["t_qo"], 62914.6);

    let cdf = fs::read_to_string(out.join("ttc_cdf.csv")).unwrap();
    let lines: Vec<&str> = cdf.lines().collect();
    assert_eq!(lines[0], CDF_HEADER);
    assert_eq!(lines.len() as u64 - 1, s.delivered);
    assert!(lines.last().unwrap().ends_with(",1"));
}

#[test]
fn outputs_are_byte_identical_across_invocations() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), CONFIG);
    let files = ["trace.csv", "summary.json", "ttc_cdf.csv"];
    let mut seen = vec![];
    for (name, seed) in [("a", "7"), ("b", "7"), ("c", "8")] {
        let out = tmp.path().join(name);
        let set = format!("seed={seed}");
        let o = run(&["run", "--config", &cfg, "--set", &set, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        seen.push(files.map(|f| fs::read(out.join(f)).unwrap()));
    }
    assert_eq!(seen[0], seen[1]);
    assert_ne!(seen[0][0], seen[2][0]);
}

#[test]
fn overrides_apply_without_a_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = run(&[
        "run",
        "--set",
        "mode=cap",
        "--set",
        "sensors=2",
        "--set",
        "tx_interval_mean_s=20",
        "--set",
        "duration_s=120",
        "--set",
        "trace_file=t.csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("t.csv").exists());
    assert!(!out.join("trace.csv").exists());
}

#[test]
fn capacity_exceeded_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), CONFIG);
    let o = run(&["run", "--config", &cfg, "--set", "sensors=38", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("CapacityExceeded: 114 > 112"), "{}", stderr(&o));
}

#[test]
fn slot_too_short_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), CONFIG);
    let o = run(&[
        "run",
        "--config",
        &cfg,
        "--set",
        "coding_rate=4",
        "--set",
        "payload_bytes=200",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("SlotTooShort"));
}

#[test]
fn unknown_key_exits_1_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &format!("{CONFIG}snr_model = awgn\n"));
    let o = run(&["run", "--config", &cfg, "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("snr_model"));

    let o = run(&["run", "--config", &cfg, "--set", "sensors=abc"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_invocations_exit_1() {
    assert_eq!(run(&["run", "--config", "/nonexistent/run.conf"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["run", "--set", "mode"]).status.code(), Some(1));
    assert_eq!(run(&["run", "--set", "mode=cap"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_over_sensors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), CONFIG);
    let out = tmp.path().join("sweep");
    let o = run(&["sweep", "--config", &cfg, "--axis", "sensors", "--values", "5,10,15", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for n in [5, 10, 15] {
        assert!(out.join(format!("sensors={n}")).join("trace.csv").exists());
    }
    let agg = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    let lines: Vec<&str> = agg.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("sensors,generated,delivered"));
    for (line, n) in lines[1..].iter().zip(["5", "10", "15"]) {
        let f: Vec<u64> = line.split(',').take(7).map(|x| x.parse().unwrap()).collect();
        assert_eq!(f[0].to_string(), n);
        assert_eq!(f[1], f[2] + f[3] + f[4] + f[5] + f[6], "{line}");
    }
}

#[test]
fn sweep_over_seed_range() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "mode = cap\nsensors = 3\ntx_interval_mean_s = 10\nduration_s = 60\n");
    let out = tmp.path().join("seeds");
    let o = run(&["sweep", "--config", &cfg, "--axis", "seed", "--values", "1..10", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(out.join("aggregate.csv")).unwrap().lines().count(), 11);
}

#[test]
fn sweep_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), CONFIG);
    let o = run(&["sweep", "--config", &cfg, "--axis", "sensors", "--values", "", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["sweep", "--config", &cfg, "--axis", "mode", "--values", "cap", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["sweep", "--config", &cfg, "--axis", "sensors", "--values", "5,38", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn heap_subcommand() {
    let o = run(&["heap", "6", "3", "25x5"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "slots=636 packets=585 total=1221");
    let o = run(&["heap", "0", "0"]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "slots=0 packets=0 total=0");
    let o = run(&["heap", "1", "1"]);
    assert!(String::from_utf8_lossy(&o.stdout).trim().ends_with("total=168"));
    assert_eq!(run(&["heap", "-1", "3"]).status.code(), Some(1));
    assert_eq!(run(&["heap", "6", "3", "-25"]).status.code(), Some(1));
}
