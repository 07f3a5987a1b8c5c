use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn platewise(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_platewise"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = platewise(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Data lines of a report, without the `# ` header block.
fn data_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[test]
fn usage_and_io_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(platewise(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(platewise(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(platewise(dir.path(), &["prep"]).status.code(), Some(1));

    let out = platewise(dir.path(), &["prep", "--manifest", "no/such/manifest.json"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("no/such/manifest.json"), "{msg}");
    assert_eq!(msg.trim_end().lines().count(), 1, "{msg}");

    std::fs::write(dir.path().join("bad.toml"), "sed = 1\n").unwrap();
    let out = platewise(dir.path(), &["--config", "bad.toml", "synth"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn prep_keeps_exactly_the_clean_frames() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), "[synth.sessions]\ndefect_rate = 1.0\n").unwrap();
    ok(dir.path(), &["--config", "cfg.toml", "--seed", "4", "synth", "--kind", "sessions", "--n", "2", "--out", "s"]);
    for session in ["session000", "session001"] {
        let manifest = format!("s/sessions/{session}/manifest.json");
        let out_dir = format!("p_{session}");
        ok(
            dir.path(),
            &[
                "prep", "--manifest", &manifest, "--np-threshold-frac", "0.01", "--edge-width-frac", "0.03",
                "--edge-overlap", "50", "--out", &out_dir,
            ],
        );
        let report: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(&out_dir).join("prep_report.json")).unwrap())
                .unwrap();
        let truth: Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(format!("s/sessions/{session}/truth.json"))).unwrap(),
        )
        .unwrap();
        let mut expected: Vec<u64> = truth["frames"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|f| f["defect"] == "none")
            .map(|f| f["frame_index"].as_u64().unwrap())
            .collect();
        expected.sort();
        let kept: Vec<u64> = report["report"]["kept"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
        assert_eq!(kept, expected);
        assert_eq!(report["report"]["dropped_no_container"].as_array().unwrap().len(), 1);
        assert_eq!(report["report"]["dropped_incomplete"].as_array().unwrap().len(), 1);

        let filtered: Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join(&out_dir).join("manifest.kept.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(filtered["frames"].as_array().unwrap().len(), expected.len());
        // The filtered manifest is itself a loadable session.
        ok(dir.path(), &["prep", "--manifest", &format!("{out_dir}/manifest.kept.json"), "--out", "again"]);
    }
}

#[test]
fn train_eval_emits_every_combination_plus_baseline() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--seed", "7", "synth", "--n", "90", "--out", "d"]);
    ok(
        dir.path(),
        &[
            "train-eval", "--features", "d/features.csv", "--models", "rf,et,mlp,gb,dt,svr,ensemble", "--subsets",
            "frr,frr-ft,full", "--k", "3", "--epsilon", "50", "--seed", "7", "--format", "csv,md,json", "--out", "t",
        ],
    );
    let lines = data_lines(&dir.path().join("t/table2.csv"));
    assert_eq!(lines[0], "Features,Number of features,Classifier,MAE (g),MAE SD (g),RMSE (g),RMSE SD (g),Accuracy (%)");
    assert_eq!(lines.len(), 1 + 21 + 1);
    assert!(lines.last().unwrap().contains("Baseline"));
    for l in &lines[1..] {
        let acc: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.0..=100.0).contains(&acc), "{l}");
    }
    let md = std::fs::read_to_string(dir.path().join("t/table2.md")).unwrap();
    assert!(md.contains("| FRR-FT | 16 | RF+ET+MLP_Ensemble |"));
    let json: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("t/table2.json")).unwrap()).unwrap();
    assert_eq!(json["header"]["seed"], 7);
    assert_eq!(json["report"].as_array().unwrap().len(), 22);
}

#[test]
fn malformed_feature_table_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--n", "20", "--out", "d"]);
    let text = std::fs::read_to_string(dir.path().join("d/features.csv")).unwrap();
    // Corrupt the weight of the second data row (line 6: three header lines, column names, row 1).
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let l = &mut lines[5];
    let cut = l.rfind(',').unwrap();
    l.truncate(cut);
    l.push_str(",heavy");
    std::fs::write(dir.path().join("bad.csv"), lines.join("\n") + "\n").unwrap();
    let out = platewise(dir.path(), &["train-eval", "--features", "bad.csv", "--models", "dt", "--subsets", "frr"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 6"), "{}", stderr(&out));
}

#[test]
fn flags_override_config_over_defaults() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), "seed = 5\n[synth.view_angle]\nn_samples = 30\n").unwrap();
    ok(dir.path(), &["synth", "--kind", "view-angle", "--out", "a"]);
    ok(dir.path(), &["--config", "cfg.toml", "synth", "--kind", "view-angle", "--out", "b"]);
    ok(dir.path(), &["--config", "cfg.toml", "--seed", "9", "synth", "--kind", "view-angle", "--n", "24", "--out", "c"]);
    let rows = |d: &str| data_lines(&dir.path().join(d).join("view_angle.csv")).len() - 1;
    assert_eq!(rows("a"), 400);
    assert_eq!(rows("b"), 30);
    assert_eq!(rows("c"), 24);
    let header = |d: &str| std::fs::read_to_string(dir.path().join(d).join("view_angle.csv")).unwrap();
    assert!(header("a").contains("# seed: 0\n"));
    assert!(header("b").contains("# seed: 5\n"));
    assert!(header("c").contains("# seed: 9\n"));
}

#[test]
fn consumed_report_with_truthful_manual_estimates() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["--seed", "2", "synth", "--n", "400", "--noise", "0", "--out", "d"]);
    ok(dir.path(), &["--seed", "2", "synth", "--kind", "sessions", "--n", "4", "--out", "s"]);
    ok(
        dir.path(),
        &["train-eval", "--features", "d/features.csv", "--models", "rf", "--subsets", "full", "--k", "3", "--save-models", "m", "--out", "t"],
    );
    ok(
        dir.path(),
        &[
            "report-consumed", "--sessions-dir", "s/sessions", "--model", "m/rf_full.json", "--awr", "s/awr_true.json",
            "--manual", "s/consumed_truth.csv", "--out", "r",
        ],
    );
    let lines = data_lines(&dir.path().join("r/table3.csv"));
    assert_eq!(lines[0], "Method,AIM,Manual,eButton,Manual,Both,Manual");
    assert!(lines[1].starts_with("Mean (%),"));
    assert!(lines[2].starts_with("S.D (%),"));
    for row in &lines[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 7);
        for manual in [cells[2], cells[4], cells[6]] {
            assert_eq!(manual, "0.00");
        }
    }
    let detail = data_lines(&dir.path().join("r/consumed_detail.csv"));
    assert!(detail.len() > 4);

    // A missing model file is an IO error.
    let out = platewise(dir.path(), &["report-consumed", "--sessions-dir", "s/sessions", "--model", "m/none.json"]);
    assert_eq!(out.status.code(), Some(1));
}
