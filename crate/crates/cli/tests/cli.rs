//! End-to-end command-line pipeline tests against the built binary.

use std::path::Path;
use std::process::{Command, Output};

fn sdon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_bytes(path: impl AsRef<Path>) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn gen_bar_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let out_arg = out.to_str().unwrap();
        assert_ok(&sdon(&[
            "gen-bar", "--cases", "4", "--seed", "7", "--snapshots", "12", "--out", out_arg,
        ]));
    }
    assert_eq!(read_bytes(a.join("fields.bin")), read_bytes(b.join("fields.bin")));
    assert_eq!(read_bytes(a.join("loads.bin")), read_bytes(b.join("loads.bin")));
    assert_eq!(read_bytes(a.join("coords.bin")), read_bytes(b.join("coords.bin")));
    assert!(a.join("run_record.json").exists());
}

#[test]
fn gen_cavity_writes_container_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        assert_ok(&sdon(&[
            "gen-cavity",
            "--cases",
            "2",
            "--seed",
            "5",
            "--grid",
            "9x7",
            "--steps",
            "20",
            "--snapshots",
            "4",
            "--dt",
            "1e-3",
            "--out",
            out.to_str().unwrap(),
        ]));
    }
    assert_eq!(read_bytes(a.join("fields.bin")), read_bytes(b.join("fields.bin")));
    let diag = std::fs::read_to_string(a.join("diagnostics.csv")).unwrap();
    assert!(diag.starts_with("case,step,cfl,divergence_norm,poisson_residual"));
    // 2 cases x 4 snapshots + header
    assert_eq!(diag.lines().count(), 9);
}

fn tiny_bar_dataset(dir: &Path) -> std::path::PathBuf {
    let data = dir.join("data");
    assert_ok(&sdon(&[
        "gen-bar", "--cases", "8", "--seed", "3", "--snapshots", "10",
        "--out", data.to_str().unwrap(),
    ]));
    data
}

fn write_train_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("train.toml");
    std::fs::write(
        &path,
        "[train]\nepochs = 60\nbatch_size = 4\nlr = 2e-3\nseed = 1\n\n[model]\nhd = 4\nbranch_hidden = [8, 4, 4, 8]\n",
    )
    .unwrap();
    path
}

#[test]
fn train_epochs_zero_is_initialization() {
    let dir = tempfile::tempdir().unwrap();
    let data = tiny_bar_dataset(dir.path());
    let cfg = write_train_config(dir.path());
    let a = dir.path().join("m_a");
    let b = dir.path().join("m_b");
    for out in [&a, &b] {
        assert_ok(&sdon(&[
            "train",
            "--data",
            data.to_str().unwrap(),
            "--config",
            cfg.to_str().unwrap(),
            "--epochs",
            "0",
            "--out",
            out.to_str().unwrap(),
        ]));
    }
    // same seed, zero steps: the checkpoint is exactly the initialization
    assert_eq!(read_bytes(a.join("params.bin")), read_bytes(b.join("params.bin")));
    let curve = std::fs::read_to_string(a.join("loss_curve.csv")).unwrap();
    assert_eq!(curve.trim(), "epoch,loss");
}

#[test]
fn train_eval_infer_invert_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = tiny_bar_dataset(dir.path());
    let cfg = write_train_config(dir.path());
    let model = dir.path().join("model");
    assert_ok(&sdon(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
    ]));
    assert!(model.join("manifest.json").exists());
    assert!(model.join("loss_curve.csv").exists());

    let report = dir.path().join("report");
    let out = sdon(&[
        "eval",
        "--data",
        data.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
        "--subset",
        "test",
        "--split-seed",
        "1",
    ]);
    assert_ok(&out);
    let report_json = std::fs::read_to_string(report.join("report.json")).unwrap();
    assert!(report_json.contains("rel_l2_pct"));
    assert!(report.join("time_averaged.csv").exists());
    assert!(report.join("case_averaged.csv").exists());

    // infer at the model's own sample times
    let load_csv = dir.path().join("load.csv");
    let mut text = String::from("t,value\n0,0\n");
    for k in 1..=10 {
        text.push_str(&format!("{},{}\n", k as f64 * 0.1, (k as f64 * 0.4).sin()));
    }
    std::fs::write(&load_csv, text).unwrap();
    let coords_csv = dir.path().join("coords.csv");
    std::fs::write(&coords_csv, "node,x,y\n0,0.5,0.5\n").unwrap();
    let infer_out = dir.path().join("infer");
    assert_ok(&sdon(&[
        "infer",
        "--model",
        model.to_str().unwrap(),
        "--load-csv",
        load_csv.to_str().unwrap(),
        "--coords-csv",
        coords_csv.to_str().unwrap(),
        "--out",
        infer_out.to_str().unwrap(),
    ]));
    let fields = std::fs::read_to_string(infer_out.join("fields.csv")).unwrap();
    // header + N*S*C rows = 1 + 1*10*2
    assert_eq!(fields.lines().count(), 21);

    // invert against a synthetic target: 25 generations write 25 rows
    let target_csv = dir.path().join("target.csv");
    let mut text = String::from("t,sigma\n");
    for k in 1..=10 {
        text.push_str(&format!("{},{}\n", k as f64 * 0.1, 100.0 + 10.0 * k as f64));
    }
    std::fs::write(&target_csv, text).unwrap();
    let invert_out = dir.path().join("invert");
    assert_ok(&sdon(&[
        "invert",
        "--model",
        model.to_str().unwrap(),
        "--target-csv",
        target_csv.to_str().unwrap(),
        "--generations",
        "25",
        "--population",
        "12",
        "--parents",
        "4",
        "--seed",
        "9",
        "--out",
        invert_out.to_str().unwrap(),
    ]));
    let history = std::fs::read_to_string(invert_out.join("ga_history.csv")).unwrap();
    assert_eq!(history.lines().count(), 26, "{history}");
    let comparison = std::fs::read_to_string(invert_out.join("comparison.csv")).unwrap();
    assert!(comparison.starts_with("t,identified_load,reference_load,identified_stress,reference_stress"));
    assert_eq!(comparison.lines().count(), 11);
    // best fitness never decreases down the history column
    let mut best_col: Vec<f64> = Vec::new();
    for line in history.lines().skip(1) {
        best_col.push(line.split(',').nth(1).unwrap().parse().unwrap());
    }
    assert!(best_col.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn export_import_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let data = tiny_bar_dataset(dir.path());
    let fields_csv = dir.path().join("io").join("fields.csv");
    std::fs::create_dir_all(dir.path().join("io")).unwrap();
    assert_ok(&sdon(&[
        "export",
        "--data",
        data.to_str().unwrap(),
        "--out",
        fields_csv.to_str().unwrap(),
    ]));

    // coords.csv + loads.csv from the original container
    let container = sdon::io::read_dataset(&data).unwrap();
    let mut coords_text = String::from("node,x,y\n");
    for (node, pair) in container.coords.chunks_exact(2).enumerate() {
        coords_text.push_str(&format!("{node},{},{}\n", pair[0], pair[1]));
    }
    std::fs::write(dir.path().join("io").join("coords.csv"), coords_text).unwrap();
    let mut loads_text = String::from("case,step,value\n");
    for case in 0..container.manifest.n_cases {
        for (step, v) in container.case_load(case).iter().enumerate() {
            loads_text.push_str(&format!("{case},{step},{v}\n"));
        }
    }
    std::fs::write(dir.path().join("io").join("loads.csv"), loads_text).unwrap();

    let imported = dir.path().join("imported");
    assert_ok(&sdon(&[
        "import",
        "--dir",
        dir.path().join("io").to_str().unwrap(),
        "--components",
        "vonMises,eqps",
        "--t-total",
        "1.0",
        "--out",
        imported.to_str().unwrap(),
    ]));
    let back = sdon::io::read_dataset(&imported).unwrap();
    assert_eq!(back.fields, container.fields);
    assert_eq!(back.loads, container.loads);
}

#[test]
fn exit_codes() {
    // usage error from clap
    let out = sdon(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));

    // data validation: missing dataset directory
    let dir = tempfile::tempdir().unwrap();
    let out = sdon(&[
        "eval",
        "--data",
        dir.path().join("nope").to_str().unwrap(),
        "--model",
        dir.path().join("nope2").to_str().unwrap(),
        "--report",
        dir.path().join("r").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));

    // numerical failure: unstable cavity configuration diverges
    let out = sdon(&[
        "gen-cavity",
        "--cases",
        "1",
        "--seed",
        "1",
        "--grid",
        "9x7",
        "--steps",
        "200",
        "--snapshots",
        "4",
        "--dt",
        "0.5",
        "--out",
        dir.path().join("boom").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}
