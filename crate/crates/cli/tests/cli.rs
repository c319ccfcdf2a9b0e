//! Binary-level tests of the `arw` command-line interface.

use std::process::Command;

fn arw() -> Command {
    Command::new(env!("CARGO_BIN_EXE_arw"))
}

fn stdout_of(cmd: &mut Command) -> String {
    let out = cmd.output().expect("run arw");
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn lattice_json_fields() {
    let text = stdout_of(arw().args(["lattice", "--dim", "2", "--n", "25", "--json"]));
    let v: serde_json::Value = serde_json::from_str(&text).expect("strict JSON");
    assert_eq!(v["count"], 12);
    assert_eq!(v["dim"], 2);
    assert!((v["mu4"].as_f64().unwrap() + 0.2288).abs() < 1e-12);
    assert!(v["mu4"].is_number(), "numbers must not be strings");
    // empty set is a valid result
    let empty = stdout_of(arw().args(["lattice", "--dim", "2", "--n", "3", "--json"]));
    let v: serde_json::Value = serde_json::from_str(&empty).unwrap();
    assert_eq!(v["count"], 0);
    assert!(v["mu4"].is_null());
}

#[test]
fn resonance_output() {
    let text = stdout_of(arw().args(["resonance", "--u1", "0"]));
    assert_eq!(text.trim(), "-2 0 2");
    let one = stdout_of(arw().args(["resonance", "--u1", "1", "--json"]));
    let v: serde_json::Value = serde_json::from_str(&one).unwrap();
    let levels: Vec<f64> = v["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(levels.len(), 4);
    assert!((levels[3] - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn theory_table_doubly_static_f_is_one() {
    let text = stdout_of(arw().args([
        "theory", "table", "--eta", "0", "--i4", "0.375", "--i4p", "0", "--json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((v["f"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn unknown_subcommand_exits_nonzero() {
    let out = arw().arg("frobnicate").output().unwrap();
    assert!(!out.status.success());
    let bad = arw()
        .args(["curve", "audit", "--spec", "blob:r=1"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let dir1 = std::env::temp_dir().join("arw_sim_t1");
    let dir8 = std::env::temp_dir().join("arw_sim_t8");
    for (dir, threads) in [(&dir1, "1"), (&dir8, "8")] {
        let _ = std::fs::remove_dir_all(dir);
        let out = arw()
            .env("ARW_THREADS", threads)
            .args([
                "simulate",
                "--n",
                "25",
                "--mode",
                "chaos",
                "--samples",
                "300",
                "--levels",
                "0,1,2",
                "--curve",
                "circle:r=0.2",
                "--seed",
                "42",
                "--out",
                dir.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir1.join("ensemble.csv")).unwrap();
    let b = std::fs::read(dir8.join("ensemble.csv")).unwrap();
    assert_eq!(a, b, "CSV bytes must not depend on the worker count");
    // manifest exists and carries the seed
    let manifest = std::fs::read_to_string(dir1.join("manifest.txt")).unwrap();
    assert!(manifest.contains("master_seed=42"));
    // report consumes the run directory
    let report = stdout_of(arw().args([
        "report",
        "--in",
        dir1.to_str().unwrap(),
        "--format",
        "csv",
    ]));
    assert!(report.starts_with("quantity,"));
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = std::env::temp_dir().join("arw_sim_cfg");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "n=25\nmode=chaos\nsamples=50\nseed=7\nlevels=0,1\n").unwrap();
    // flag --samples wins over the config value
    let out = arw()
        .args([
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--samples",
            "20",
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("out/ensemble.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21); // header + 20 rows
}

#[test]
fn surface_audit_json() {
    let text = stdout_of(arw().args([
        "surface",
        "audit",
        "--spec",
        "sphere:r=0.2,cx=0.5,cy=0.5,cz=0.5",
        "--kmax",
        "4",
        "--resolution",
        "64",
        "--json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((v["I2"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-3);
    assert_eq!(v["classification"], "DoublyStatic");
}
