mod common;

use std::path::Path;
use std::process::Command;

use common::*;
use exit_core::datagen::Field;
use exit_core::model::Model;
use exit_core::tensor::Tensor;

const SMALL: &str = r#"
[world]
n_users = 300
n_items = 80
exposures = 4000

[train]
epochs = 2
batch_size = 128

[model]
expert_hidden = [16, 8]
tower_hidden = [8]
ssn_compressed_width = 8
ssn_hidden = [16]

[sim]
requests = 50
"#;

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_exit-cdr"))
}

fn setup(dir: &Path) -> std::path::PathBuf {
    let cfg = dir.join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    cfg
}

fn run(cfg: &Path, out: &Path, args: &[&str]) -> (i32, String, String) {
    let o = exe()
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap();
    (
        o.status.code().unwrap(),
        String::from_utf8(o.stdout).unwrap(),
        String::from_utf8(o.stderr).unwrap(),
    )
}

#[test]
fn gen_data_then_train_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path());
    let out = dir.path().join("run");

    let (code, stdout, _) = run(&cfg, &out, &["gen-data"]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("split\trecords\tusers\titems\ttarget_purchases"));
    assert!(out.join("data/train.csv").exists());
    assert!(out.join("config.resolved.toml").exists());

    let (code, stdout, _) = run(&cfg, &out, &["train"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("auc:"));
    assert!(out.join("model.ckpt").exists());
    assert!(out.join("data/gci.txt").exists());
    let ledger = std::fs::read_to_string(out.join("results.tsv")).unwrap();
    assert_eq!(ledger.lines().count(), 2);

    let (code, eval, _) = run(&cfg, &out, &["eval"]);
    assert_eq!(code, 0);
    let auc = |s: &str| s.lines().find(|l| l.starts_with("auc:")).unwrap().to_string();
    assert_eq!(auc(&eval), auc(&stdout));
}

#[test]
fn no_joint_loss_reports_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.toml");
    std::fs::write(&cfg, format!("{SMALL}\n[train.convergence]\npatience = 3\nmin_rel_improvement = 0.01\n")).unwrap();
    let out = dir.path().join("run");
    assert_eq!(run(&cfg, &out, &["gen-data"]).0, 0);
    let (code, stdout, _) = run(&cfg, &out, &["train", "--variant", "no_joint_loss", "--epochs", "8"]);
    assert_eq!(code, 4, "{stdout}");
    assert!(stdout.contains("not converged"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[train]\nlambda2 = -1\n").unwrap();
    let (code, _, stderr) = run(&bad, dir.path(), &["gen-data"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("lambda"), "{stderr}");

    std::fs::write(&bad, "[trian]\n").unwrap();
    assert_eq!(run(&bad, dir.path(), &["gen-data"]).0, 2);

    let cfg = setup(dir.path());
    assert_eq!(run(&cfg, dir.path(), &["train", "--variant", "nope"]).0, 2);
}

#[test]
fn missing_logs_exit_3_with_hint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path());
    let (code, _, stderr) = run(&cfg, &dir.path().join("empty"), &["train"]);
    assert_eq!(code, 3);
    assert!(stderr.contains("gen-data"), "{stderr}");
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// A model whose three heads output fixed probabilities for every input.
fn fixed_model(pt: f64, ps: f64, ptr: f64) -> Model {
    let mut m = Model::new(tiny_model_config(), tiny_vocab(), 1).unwrap();
    for (head, p) in [("tower.target.out", pt), ("tower.source.out", ps), ("ssn.out", ptr)] {
        let w = format!("{head}.w");
        let shape = m.params().by_name(&w).unwrap().shape().to_vec();
        let id = m.params().id(&w).unwrap();
        m.params_mut().set(id, Tensor::zeros(&shape)).unwrap();
        let id = m.params().id(&format!("{head}.b")).unwrap();
        m.params_mut().set(id, Tensor::vector(vec![logit(p)]).unwrap()).unwrap();
    }
    m
}

fn examples_csv(dir: &Path) -> std::path::PathBuf {
    let header: Vec<&str> = Field::ALL.iter().map(|f| f.name()).chain(["label"]).collect();
    let mut text = header.join(",") + "\n";
    text += &(vec!["1"; Field::ALL.len()].join(",") + ",grilled_fish\n");
    text += &(vec!["2"; Field::ALL.len()].join(",") + ",cold_medicine\n");
    let path = dir.join("examples.csv");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn explain_reproduces_worked_rows() {
    let dir = tempfile::tempdir().unwrap();
    let examples = examples_csv(dir.path());
    for (pt, ps, ptr, whole) in [(0.047, 0.798, 0.792, "0.679"), (0.076, 0.562, 0.048, "0.103")] {
        let ckpt = dir.path().join("fixed.ckpt");
        fixed_model(pt, ps, ptr).save(&ckpt).unwrap();
        let o = exe()
            .args(["explain", "--checkpoint"])
            .arg(&ckpt)
            .arg("--examples")
            .arg(&examples)
            .args(["--k", "1"])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        let text = String::from_utf8(o.stdout).unwrap();
        let first: Vec<&str> = text.lines().nth(1).unwrap().split('\t').collect();
        assert_eq!(first[0], "grilled_fish");
        assert_eq!(first[1], format!("{pt:.3}"));
        assert_eq!(first[4], whole);
        assert_eq!(first[7], "Y");
        let second: Vec<&str> = text.lines().nth(2).unwrap().split('\t').collect();
        assert_eq!(second[7], "N");
    }
}

#[test]
fn malformed_examples_exit_5() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("m.ckpt");
    fixed_model(0.1, 0.2, 0.3).save(&ckpt).unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "user_id,item_id\n1,2\n").unwrap();
    let o = exe()
        .args(["explain", "--checkpoint"])
        .arg(&ckpt)
        .arg("--examples")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing column"));
}
