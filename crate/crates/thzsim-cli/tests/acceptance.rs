//! CLI acceptance: criterion 10, byte-identical artifacts for
//! identical config + seed. Criteria 1-9 live in the library crate's
//! test target of the same name.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_thzsim")
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        if entry.file_type().unwrap().is_file() {
            out.insert(
                entry.file_name().to_string_lossy().into_owned(),
                std::fs::read(entry.path()).unwrap(),
            );
        }
    }
    out
}

#[test]
fn acceptance_10_byte_identical_reruns() {
    let tmp = std::env::temp_dir().join(format!("thzsim-acc10-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&tmp);
    std::fs::create_dir_all(&tmp).unwrap();

    let config = tmp.join("scenario.json");
    std::fs::write(
        &config,
        r#"{
            "mode": "qd_stats",
            "preset": { "name": "conference_medium" },
            "seed_count": 300,
            "bin_width_ns": 1.0,
            "floor_db": -30.0
        }"#,
    )
    .unwrap();

    let mut runs = Vec::new();
    for (i, jobs) in ["1", "4"].iter().enumerate() {
        let out = tmp.join(format!("run{i}"));
        let status = Command::new(bin())
            .args(["qd-stats", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--jobs", jobs])
            .status()
            .unwrap();
        assert!(status.success());
        runs.push(read_dir_bytes(&out));
    }

    let identical = runs[0] == runs[1];
    let names: Vec<&String> = runs[0].keys().collect();
    println!(
        "acceptance 10 byte-identical artifacts: {} ({} artifacts compared across reruns with different thread counts: {:?})",
        if identical { "PASS" } else { "FAIL" },
        runs[0].len(),
        names
    );
    assert!(identical, "artifacts differ between identical runs");
    assert!(runs[0].contains_key("manifest.json"));

    let _ = std::fs::remove_dir_all(&tmp);
}
