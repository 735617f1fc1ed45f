use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn xifv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xifv")).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn rates_table_has_header_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rates.csv");
    let o = xifv(&["rates", "--xi", "uniform_l:2", "--n", "3", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("quantity,b,k,signature,value,stderr"));
    assert!(csv.contains("0.75000000000000000"));
    let last = csv.lines().last().unwrap();
    assert!(last.starts_with("# manifest: rates.csv.manifest.json config_sha256="), "{last}");
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("rates.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "rates");
    assert_eq!(manifest["outputs"][0], "rates.csv");
    assert_eq!(manifest["config"]["xi"], "uniform_l:2");
    assert!(last.ends_with(manifest["config_sha256"].as_str().unwrap()));
}

#[test]
fn reruns_are_byte_identical_for_any_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for jobs in ["1", "3", "1"] {
        let out = dir.path().join("c.csv");
        let o = xifv(&["--jobs", jobs, "coalescent", "--xi", "pd:1", "--n", "6", "--replicates", "200", "--method", "poisson", "--seed", "9", "--out", path_str(&out)]);
        assert_eq!(o.status.code(), Some(0));
        bodies.push((fs::read(&out).unwrap(), fs::read(dir.path().join("c.csv.manifest.json")).unwrap()));
    }
    assert_eq!(bodies[0], bodies[1]);
    assert_eq!(bodies[0], bodies[2]);
}

#[test]
fn config_file_sets_flags_and_later_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"command": "rates", "xi": "kingman", "n": 4}"#).unwrap();
    let a = xifv(&["--config", path_str(&cfg)]);
    assert_eq!(a.status.code(), Some(0));
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("lambda,2,1,(2),1.0000000000000000"), "{text}");
    assert!(text.lines().last().unwrap().starts_with("# manifest: none (stdout)"));
    let b = xifv(&["--config", path_str(&cfg), "--n", "2"]);
    assert_eq!(b.status.code(), Some(0));
    assert!(!String::from_utf8(b.stdout).unwrap().contains("lambda,4,"));
}

#[test]
fn exit_codes() {
    assert_eq!(xifv(&["rates", "--xi", "pd", "--n", "3"]).status.code(), Some(2));
    assert_eq!(xifv(&["rates", "--xi", "uniform_l:0", "--n", "3"]).status.code(), Some(2));
    assert_eq!(xifv(&["bottleneck", "--beta", "1"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("r.csv");
    assert_eq!(xifv(&["rates", "--xi", "kingman", "--n", "3", "--out", path_str(&out)]).status.code(), Some(1));
}

#[test]
fn check_commands_print_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("m.json");
    let o = xifv(&["duality", "--check", "moment", "--xi", "uniform_l:2", "--n", "2", "--paths", "10000", "--seed", "3", "--out", path_str(&report)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("pass z="));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], true);

    let o = xifv(&["lookdown", "--xi", "uniform_l:3", "--levels", "12", "--replicates", "5", "--coupled", "--mutation", "flip:0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().next().unwrap().starts_with("replicate,seed,level,type"));
    assert!(text.contains("pass"), "{text}");

    let o = xifv(&["bottleneck", "--schedule", "0.5:1", "--replicates", "10000", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout).unwrap().contains("pass pair survival"));
}
