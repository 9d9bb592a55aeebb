//! End-to-end CLI tests: verbs, exit codes, artifact conformance, and
//! determinism across thread counts.

use std::path::Path;
use std::process::Command;

fn ctxrec() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ctxrec"))
}

fn small_config(out_dir: &Path) -> String {
    format!(
        r#"{{
        "dataset": {{"synthetic": {{"n_users": 30, "n_pois": 120, "n_checkins": 1200,
                     "n_categories": 6, "homophily": 0.4}}}},
        "filter": {{"min_user_checkins": 3, "min_poi_visitors": 1}},
        "models": ["M", "M-(G)", "M-(GT)"],
        "seeds": [7],
        "test_negatives": 80,
        "hyper": {{"pfm": {{"k": 5, "sigma": [2,2,2,2,2], "rho": [0.5,0.5,0.5,0.5,0.5],
                   "iterations": 30}}}},
        "output_dir": "{}"
    }}"#,
        out_dir.display()
    )
}

#[test]
fn validate_accepts_good_and_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    std::fs::write(&good, small_config(&dir.path().join("out"))).unwrap();
    let status = ctxrec().args(["validate", "--config"]).arg(&good).status().unwrap();
    assert!(status.success());

    // Categorical model over a category-less dataset: validation error, exit 1.
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        small_config(&dir.path().join("out"))
            .replace("\"n_categories\": 6", "\"n_categories\": 0")
            .replace(r#""M-(GT)""#, r#""M-(C)""#),
    )
    .unwrap();
    let output = ctxrec().args(["validate", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("categorical"), "stderr: {stderr}");

    // Malformed JSON is a validation error too.
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{not json").unwrap();
    let output = ctxrec().args(["validate", "--config"]).arg(&broken).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn run_emits_conformant_artifacts_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = dir.path().join("config.json");
    std::fs::write(&config, small_config(&out)).unwrap();

    let status = ctxrec().args(["run", "--config"]).arg(&config).status().unwrap();
    assert!(status.success());

    // Grid arithmetic: 3 models × 3 metrics × 2 K values = 18 result rows.
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 18, "header plus 18 rows");

    // Every emitted CSV parses under a strict RFC-4180 reader with a
    // consistent field count.
    for name in [
        "results.csv",
        "per_user.csv",
        "significance.csv",
        "bucketed_report.csv",
        "behavior_profiles.csv",
    ] {
        let path = out.join(name);
        let mut reader = csv::ReaderBuilder::new()
            .flexible(false)
            .from_path(&path)
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        let mut rows = 0;
        for record in reader.records() {
            record.unwrap_or_else(|e| panic!("{name}: {e}"));
            rows += 1;
        }
        assert!(rows > 0, "{name} has no data rows");
    }

    // The manifest round-trips the config.
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let embedded = serde_json::to_string(&manifest["config"]).unwrap();
    let reparsed = ctxrec_harness::ExperimentConfig::from_json(&embedded).unwrap();
    let original = ctxrec_harness::ExperimentConfig::from_json(&small_config(&out)).unwrap();
    assert_eq!(reparsed, original);

    // Rerun into a second directory: results.csv identical byte for byte,
    // regardless of worker count.
    let out2 = dir.path().join("out2");
    let config2 = dir.path().join("config2.json");
    std::fs::write(&config2, small_config(&out2)).unwrap();
    let status = ctxrec()
        .env("CTXREC_THREADS", "1")
        .args(["run", "--config"])
        .arg(&config2)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        std::fs::read(out.join("results.csv")).unwrap(),
        std::fs::read(out2.join("results.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(out.join("per_user.csv")).unwrap(),
        std::fs::read(out2.join("per_user.csv")).unwrap()
    );

    // `report --in` regenerates the derived artifacts from per_user.csv.
    let before = std::fs::read(out.join("cd_report.txt")).unwrap();
    std::fs::remove_file(out.join("cd_report.txt")).unwrap();
    let status = ctxrec().args(["report", "--in"]).arg(&out).status().unwrap();
    assert!(status.success());
    let after = std::fs::read(out.join("cd_report.txt")).unwrap();
    assert_eq!(before, after, "replayed cd_report.txt differs");
}

#[test]
fn synth_round_trips_through_the_loader() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, small_config(&dir.path().join("unused"))).unwrap();
    let data_dir = dir.path().join("data");

    let status = ctxrec()
        .args(["synth", "--config"])
        .arg(&config)
        .args(["--out"])
        .arg(&data_dir)
        .status()
        .unwrap();
    assert!(status.success());

    let (dataset, stats) = ctxrec_core::data::load_dataset(
        &data_dir.join("checkins.tsv"),
        &data_dir.join("pois.tsv"),
        &data_dir.join("social.tsv"),
        Some(&data_dir.join("categories.tsv")),
    )
    .unwrap();
    assert_eq!(dataset.n_users(), 30);
    assert_eq!(dataset.n_pois(), 120);
    assert!(dataset.has_categories());
    assert_eq!(stats.social_edges_dropped, 0);
    assert!(data_dir.join("index_map.tsv").exists());

    // index_map covers every user and POI once.
    let index_map = std::fs::read_to_string(data_dir.join("index_map.tsv")).unwrap();
    let users = index_map.lines().filter(|l| l.starts_with("user\t")).count();
    let pois = index_map.lines().filter(|l| l.starts_with("poi\t")).count();
    assert_eq!(users, 30);
    assert_eq!(pois, 120);
}

#[test]
fn run_on_file_dataset_emits_index_map() {
    let dir = tempfile::tempdir().unwrap();
    // Generate a dataset, then run an experiment straight off the files.
    let synth_config = dir.path().join("synth.json");
    std::fs::write(&synth_config, small_config(&dir.path().join("unused"))).unwrap();
    let data_dir = dir.path().join("data");
    assert!(ctxrec()
        .args(["synth", "--config"])
        .arg(&synth_config)
        .args(["--out"])
        .arg(&data_dir)
        .status()
        .unwrap()
        .success());

    let out = dir.path().join("out");
    let run_config = dir.path().join("run.json");
    std::fs::write(
        &run_config,
        format!(
            r#"{{
            "dataset": {{"files": {{
                "checkins": "{0}/checkins.tsv",
                "pois": "{0}/pois.tsv",
                "social": "{0}/social.tsv",
                "categories": "{0}/categories.tsv"}}}},
            "filter": {{"min_user_checkins": 3, "min_poi_visitors": 1}},
            "models": ["M", "GeoSoCa-(GSC)"],
            "seeds": [3],
            "test_negatives": 50,
            "hyper": {{"pfm": {{"k": 4, "sigma": [2,2,2,2], "rho": [0.5,0.5,0.5,0.5],
                       "iterations": 25}}}},
            "output_dir": "{1}"
        }}"#,
            data_dir.display(),
            out.display()
        ),
    )
    .unwrap();
    let status = ctxrec().args(["run", "--config"]).arg(&run_config).status().unwrap();
    assert!(status.success());
    assert!(out.join("index_map.tsv").exists());
    assert!(out.join("results.csv").exists());
}
