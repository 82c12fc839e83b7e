use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lv-lab"))
}

fn tmp(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("lv_lab_cli_{name}_{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    d
}

#[test]
fn speeds_manifest() {
    let out = tmp("speeds");
    let st = bin().args(["speeds", "--out"]).arg(&out).status().unwrap();
    assert!(st.success());
    let m = fs::read_to_string(out.join("manifest.txt")).unwrap();
    let get = |k: &str| -> f64 {
        m.lines()
            .find_map(|l| l.strip_prefix(&format!("{k} = ")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((get("c_v") - 5.2).abs() < 1e-12);
    assert!((get("tau_c") - 0.5).abs() < 1e-12);
    assert!((get("mu") - 0.54).abs() < 1e-12);
    assert!(out.join("speeds.csv").exists());
}

#[test]
fn spectrum_real_axis() {
    let out = tmp("spectrum");
    let st = bin().args(["spectrum", "--out"]).arg(&out).status().unwrap();
    assert!(st.success());
    let m = fs::read_to_string(out.join("manifest.txt")).unwrap();
    let line = m.lines().find(|l| l.starts_with("real_axis")).unwrap();
    assert!(line.contains("Omega2 from 0; boundary at 0.5; Omega3 from 0.505; boundary at 1; Omega1 from 1.005"));
    assert!(out.join("spectrum.csv").exists() && out.join("polar.csv").exists());
}

#[test]
fn degenerate_config_fails() {
    let out = tmp("bad");
    fs::create_dir_all(&out).unwrap();
    let cfg = out.join("bad.toml");
    fs::write(&cfg, "params.a = 1.0\n").unwrap();
    let o = bin().args(["speeds", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("DegenerateRegime"));
}

#[test]
fn unknown_key_rejected() {
    let out = tmp("unknown");
    fs::create_dir_all(&out).unwrap();
    let cfg = out.join("c.toml");
    fs::write(&cfg, "params.z = 1.0\n").unwrap();
    let o = bin().args(["wave", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert!(!o.status.success());
}

#[test]
fn deterministic_outputs_and_worker_override() {
    let a = tmp("det_a");
    let b = tmp("det_b");
    assert!(bin().args(["wave", "--workers", "1", "--out"]).arg(&a).status().unwrap().success());
    assert!(bin()
        .args(["wave", "--workers", "1", "--out"])
        .arg(&b)
        .env("LV_LAB_WORKERS", "2")
        .status()
        .unwrap()
        .success());
    assert_eq!(fs::read(a.join("wave.csv")).unwrap(), fs::read(b.join("wave.csv")).unwrap());
    assert_eq!(fs::read(a.join("manifest.txt")).unwrap(), fs::read(b.join("manifest.txt")).unwrap());
}

#[test]
fn quick_verify_passes() {
    let out = tmp("verify");
    let o = bin().args(["verify", "--suite", "quick", "--seed", "42", "--out"]).arg(&out).output().unwrap();
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);
    assert!(out.join("acceptance.csv").exists());
}
