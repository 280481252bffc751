use std::path::Path;
use std::process::Command;

fn bspbn(args: &[&str]) -> std::process::Output {
    bspbn_in(Path::new("."), args)
}

fn bspbn_in(cwd: &Path, args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_bspbn"))
        .current_dir(cwd)
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "bspbn {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn sample_learn_evaluate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("spbn3.csv");
    let truth = dir.path().join("truth.json");
    bspbn(&["sample-synthetic", "--id", "3", "--n", "600", "--seed", "5", "--out", p(&data), "--network", p(&truth)]);

    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"model": "bspbn-linear", "grid_size": 30, "repeats": 2}"#).unwrap();
    let base = dir.path().join("out/run");
    let source = p(&data).to_string();
    bspbn(&[
        "learn", "--config", p(&config), "--source", &source, "--n-train", "400", "--n-test", "200", "--patience",
        "1", "--seed", "9", "--out", p(&base),
    ]);
    let csv = std::fs::read_to_string(base.with_extension("csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines[0],
        "repeat,seed,model,M,n_train,hmd,shd,thmd,test_loglik,rmse,rmae_pct,hc_seconds,test_seconds,hc_ratio,test_ratio"
    );
    assert!(lines[1].contains(",bspbn-linear,30,400,,,,"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["grid_size"], 30);
    assert_eq!(summary["config"]["n_train"], 400);

    let network = dir.path().join("out/run.r0.network.json");
    let rows = dir.path().join("rows.csv");
    let out = bspbn(&[
        "evaluate", "--network", p(&network), "--data", p(&data), "--truth", p(&truth), "--out", p(&rows),
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("rows=600 total_loglik="), "{text}");
    assert!(text.contains("shd="), "{text}");
    assert_eq!(std::fs::read_to_string(&rows).unwrap().lines().count(), 601);
}

#[test]
fn identical_runs_write_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for name in ["a", "b"] {
        let cwd = dir.path().join(name);
        std::fs::create_dir(&cwd).unwrap();
        let base = cwd.join("run");
        bspbn_in(&cwd, &[
            "learn", "--source", "synthetic:4", "--model", "bspbn-fkde-simple", "--grid-size", "25", "--n-train",
            "300", "--n-test", "100", "--repeats", "1", "--patience", "1", "--max-parents", "1", "--folds", "3",
            "--seed", "3", "--out", "run",
        ]);
        files.push((
            std::fs::read(base.with_extension("csv")).unwrap(),
            std::fs::read(base.with_extension("json")).unwrap(),
            std::fs::read(cwd.join("run.r0.network.json")).unwrap(),
        ));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn sweep_grid_stacks_rows_per_grid_size() {
    let out = bspbn(&[
        "sweep-grid", "--source", "synthetic:3", "--grid-sizes", "10,20", "--n-train", "200", "--n-test", "50",
        "--repeats", "2", "--patience", "0",
    ]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let ms: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(ms, ["10", "10", "20", "20"]);
}

#[test]
fn guard_violation_fails_fast() {
    let out = Command::new(env!("CARGO_BIN_EXE_bspbn"))
        .args(["learn", "--model", "bspbn-fkde-simple", "--max-parents", "5"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("fkde dimensionality"));
}
