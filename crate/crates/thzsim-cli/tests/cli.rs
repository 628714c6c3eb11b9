//! CLI behavior: exit codes, schema rejection, overrides, artifacts.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_thzsim")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("thzsim-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tmp_dir("schema");
    let cfg = write_config(
        &dir,
        "bad.json",
        r#"{"mode": "qd_stats", "preset": {"name": "corridor"}, "seed_count": 5, "typo_field": 1}"#,
    );
    let status = Command::new(bin())
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    assert!(!dir.join("out").join("manifest.json").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn subcommand_mode_mismatch_is_a_config_error() {
    let dir = tmp_dir("mismatch");
    let cfg = write_config(
        &dir,
        "stats.json",
        r#"{"mode": "qd_stats", "preset": {"name": "corridor"}, "seed_count": 5}"#,
    );
    let status = Command::new(bin())
        .args(["mimo-cap", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn set_overrides_reach_the_run() {
    let dir = tmp_dir("override");
    let cfg = write_config(
        &dir,
        "gen.json",
        r#"{"mode": "qd_gen", "preset": {"name": "corridor"}, "seed_start": 0, "seed_count": 1}"#,
    );
    let out = dir.join("out");
    let status = Command::new(bin())
        .args(["qd-gen", "--config"])
        .arg(&cfg)
        .args(["--set", "seed_count=3", "--set", "seed_start=7"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for seed in 7..10 {
        assert!(out.join(format!("cir_{seed:06}.csv")).exists());
        assert!(out.join(format!("cir_{seed:06}.json")).exists());
    }
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(v["artifacts"].as_array().unwrap().len(), 6);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn validate_subcommand_passes_and_writes_report() {
    let dir = tmp_dir("validate");
    let out = dir.join("out");
    let output = Command::new(bin())
        .arg("validate")
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stdout)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("validation.json")).unwrap())
            .unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn hbs_doppler_phantom_roundtrip() {
    let dir = tmp_dir("hbs");
    // short, coarse run to keep the test quick
    let cfg = write_config(
        &dir,
        "walk.json",
        r#"{
            "mode": "hbs_doppler",
            "frames": {
                "type": "phantom",
                "start": [1.6, -0.6, 0.0],
                "velocity": [0.0, 1.0, 0.0],
                "duration_s": 1.2,
                "frame_rate_hz": 20.0
            },
            "tx": [0.0, 0.0, 1.5],
            "rx": [3.5, 0.0, 1.5],
            "model": "human_shaped",
            "pitch_m": 0.02,
            "fs_hz": 4000.0,
            "f_hz": 3e11,
            "stft_window": 512,
            "stft_hop": 256
        }"#,
    );
    let out = dir.join("out");
    let status = Command::new(bin())
        .args(["hbs-doppler", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let fading = std::fs::read_to_string(out.join("fading.csv")).unwrap();
    assert!(fading.lines().count() > 4000);
    assert!(fading.starts_with("t_s,re,im,gain_db,lit_flag"));
    // the walk crosses the link: both lit and shadowed samples appear
    assert!(fading.lines().any(|l| l.ends_with(",0")));
    assert!(fading.lines().any(|l| l.ends_with(",1")));
    let spec = std::fs::read_to_string(out.join("spectrogram.csv")).unwrap();
    assert!(spec.starts_with("freq_hz,"));
    assert_eq!(spec.lines().count(), 513);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn frames_csv_source_works() {
    let dir = tmp_dir("frames");
    // two-frame rigid slab sliding across the link
    let mut csv = String::from("t_s,point_id,x,y,z\n");
    for (t, dy) in [(0.0, -0.6f64), (1.0, 0.6)] {
        let mut id = 0;
        let mut y = -0.2f64;
        while y <= 0.2 {
            let mut z = 0.4;
            while z <= 2.0 {
                csv.push_str(&format!("{t},{id},1.75,{},{z}\n", y + dy));
                id += 1;
                z += 0.04;
            }
            y += 0.04;
        }
    }
    let frames_path = dir.join("frames.csv");
    std::fs::write(&frames_path, csv).unwrap();
    let cfg = write_config(
        &dir,
        "run.json",
        &format!(
            r#"{{
                "mode": "hbs_run",
                "frames": {{ "type": "csv", "path": {:?} }},
                "tx": [0.0, 0.0, 1.5],
                "rx": [3.5, 0.0, 1.5],
                "model": "rectangular",
                "pitch_m": 0.02,
                "fs_hz": 2000.0,
                "f_hz": 3e11
            }}"#,
            frames_path.to_str().unwrap()
        ),
    );
    let out = dir.join("out");
    let status = Command::new(bin())
        .args(["hbs-run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("fading.csv").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn env_var_supplies_the_default_output_dir() {
    let dir = tmp_dir("envout");
    let cfg = write_config(
        &dir,
        "gen.json",
        r#"{"mode": "qd_gen", "preset": {"name": "corridor"}, "seed_start": 0, "seed_count": 1}"#,
    );
    let out = dir.join("from_env");
    let status = Command::new(bin())
        .args(["qd-gen", "--config"])
        .arg(&cfg)
        .env("THZSIM_OUT", &out)
        .current_dir(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("manifest.json").exists());
    let _ = std::fs::remove_dir_all(&dir);
}
