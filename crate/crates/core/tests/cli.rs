use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use deepradar::lstm::{init_model, save_checkpoint};

fn deepradar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deepradar"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("DEEPRADAR_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(deepradar(&["--help"]).status.code(), Some(0));
    assert_eq!(deepradar(&["--version"]).status.code(), Some(0));
    assert_eq!(deepradar(&[]).status.code(), Some(2));
    assert_eq!(deepradar(&["train", "--bogus"]).status.code(), Some(2));
    assert_eq!(deepradar(&["inspect", "--preset", "smoke", "--threads", "0"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_deepradar"))
        .args(["inspect", "--preset", "smoke"])
        .env("DEEPRADAR_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn inspect_reports_full_scale() {
    let o = deepradar(&["inspect", "--preset", "full"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("lstm_parameters: 330240"), "{out}");
    assert!(out.contains("head_parameters: 2967"), "{out}");
    assert!(out.contains("train 469200 val 156400 test 156400 (all 782000)"), "{out}");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.drlm");
    save_checkpoint(&init_model::<f32>(23, 2, &[128; 3], 0).unwrap(), &path).unwrap();
    let out = stdout(&deepradar(&["inspect", "--model", s(&path)]));
    assert!(out.contains("lstm_parameters: 330240"), "{out}");
    assert!(out.contains("total_parameters: 333207"), "{out}");
}

#[test]
fn flags_override_config_file_over_preset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "hidden = 32\nlayers = 2\n").unwrap();
    let out = stdout(&deepradar(&["inspect", "--preset", "smoke"]));
    assert!(out.contains("layers: 1 x 16"), "{out}");
    let out = stdout(&deepradar(&["inspect", "--preset", "smoke", "--config", s(&cfg)]));
    assert!(out.contains("layers: 2 x 32"), "{out}");
    let out = stdout(&deepradar(&["inspect", "--preset", "smoke", "--config", s(&cfg), "--hidden", "8"]));
    assert!(out.contains("layers: 2 x 8"), "{out}");
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "hiden = 32\n").unwrap();
    let o = deepradar(&["inspect", "--preset", "smoke", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hiden"));
    assert_eq!(deepradar(&["inspect", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(deepradar(&["inspect", "--preset", "smoke", "--input-domain", "freq"]).status.code(), Some(3));
}

#[test]
fn missing_data_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = deepradar(&["train", "--preset", "smoke", "--data", s(dir.path()), "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn pipeline_and_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.cfg");
    fs::write(&cfg, "train_per_cell = 4\nval_per_cell = 2\ntest_per_cell = 2\nepochs = 2\nbatch_size = 4\n").unwrap();
    let data = dir.path().join("data");
    let base = ["--preset", "smoke", "--config", s(&cfg), "--threads", "1"];
    let run = |cmd: &str, extra: &[&str]| deepradar(&[&[cmd][..], &base, extra].concat());

    assert_eq!(run("gen", &["--out", s(&data)]).status.code(), Some(0));
    let out = stdout(&deepradar(&["inspect", "--data", s(&data)]));
    assert!(out.contains("train.bin: 24 records, 3 classes, length 1024"), "{out}");

    let model_dir = dir.path().join("run");
    assert_eq!(run("train", &["--data", s(&data), "--out", s(&model_dir)]).status.code(), Some(0));
    let history = fs::read_to_string(model_dir.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 3);
    assert!(history.starts_with("epoch,train_loss,val_accuracy,lr"));

    let report = dir.path().join("report");
    let model = model_dir.join("model.drlm");
    let o = run("eval", &["--model", s(&model), "--data", s(&data), "--out", s(&report)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("sensitivity"));
    for f in ["curves.csv", "sensitivity.csv", "confusion.csv", "accuracy_overall.svg", "confusion_10dB.svg"] {
        assert!(report.join(f).exists(), "missing {f}");
    }
    let o = run("eval", &["--model", s(&model), "--data", s(&data), "--split", "holdout", "--out", s(&report)]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(
        "train",
        &["--data", s(&data), "--out", s(&dir.path().join("blown")), "--lr-max", "1e38", "--clip-norm", "none"],
    );
    assert_eq!(o.status.code(), Some(5), "{}", String::from_utf8_lossy(&o.stderr));
}
