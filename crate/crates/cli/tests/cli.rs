use std::path::Path;
use std::process::{Command, Output};

fn auglasso(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_auglasso"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn gen(dir: &Path) {
    ok(&auglasso(
        &["gen", "--n", "150", "--p", "12", "--s", "3", "--o", "10", "--seed", "4", "--out", "data.csv"],
        dir,
    ));
}

#[test]
fn gen_then_fit_with_each_solver() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path());
    assert!(dir.path().join("data.json").exists());
    let header = std::fs::read_to_string(dir.path().join("data.csv")).unwrap();
    assert!(header.starts_with("x1,x2,"));

    let mut betas = Vec::new();
    for alg in ["cd", "prox"] {
        let out = ok(&auglasso(
            &["fit", "--data", "data.csv", "--meta", "data.json", "--lambda-rule", "experiment", "--algorithm", alg],
            dir.path(),
        ));
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["converged"], true);
        assert_eq!(v["lambda_rule"], "experiment");
        assert!(v["err_l2"].as_f64().unwrap() < 2.0);
        let beta: Vec<f64> = serde_json::from_value(v["beta_hat"].clone()).unwrap();
        assert_eq!(beta.len(), 12);
        betas.push(beta);
    }
    let gap = betas[0].iter().zip(&betas[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-5, "{gap}");
}

#[test]
fn fit_without_truth_needs_counts_for_experiment_rule() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path());
    let out = auglasso(&["fit", "--data", "data.csv", "--lambda-rule", "experiment"], dir.path());
    assert!(!out.status.success());
    ok(&auglasso(&["fit", "--data", "data.csv", "--lambda-rule", "fixed:0.2,0.3", "--out", "fit.json"], dir.path()));
    assert!(dir.path().join("fit.json").exists());
}

#[test]
fn bad_lambda_rule_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    gen(dir.path());
    let out = auglasso(&["fit", "--data", "data.csv", "--lambda-rule", "ridge"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown lambda rule"));
}

#[test]
fn certify_reports_each_property() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<String> = (0..120)
        .map(|i| (0..4).map(|j| format!("{}", ((i * 7 + j * 13) % 11) as f64 - 5.0)).collect::<Vec<_>>().join(","))
        .collect();
    std::fs::write(dir.path().join("x.csv"), rows.join("\n")).unwrap();

    let out = ok(&auglasso(&["certify", "--matrix", "x.csv", "--samples", "50"], dir.path()));
    let all: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    let props: Vec<&str> = all.iter().map(|r| r["property"].as_str().unwrap()).collect();
    assert_eq!(props, ["tp", "ip", "atp", "re"]);
    assert!(all.iter().take(3).all(|r| r["certified"] == false));

    let out = ok(&auglasso(
        &["certify", "--matrix", "x.csv", "--property", "tp", "--constants", "explicit:a1=50,a2=0", "--sigma", "ar1:0.3"],
        dir.path(),
    ));
    let tp: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(tp["n_violations"].as_u64().unwrap() > 0);
    assert!(tp["worst_witness"]["v"].is_array());

    let out = auglasso(&["certify", "--matrix", "x.csv", "--property", "ip", "--constants", "explicit:a1=1,a2=0"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn bench_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("grid.toml"),
        "n = 80\np = 10\ns_values = [2]\no_values = [0, 4, 8, 12]\nrepetitions = 5\n\n[covariance]\nkind = \"ar1\"\nrho = 0.4\n",
    )
    .unwrap();
    ok(&auglasso(&["bench", "--config", "grid.toml", "--out", "out", "--reps", "2", "--threads", "2", "--quiet"], dir.path()));
    let csv = std::fs::read_to_string(dir.path().join("out/records.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,p,s,o,eps,rep,seed,lambda_s,lambda_o,err_mahalanobis,err_l2,err_l1,theta_err_l2,support_f1,kkt_residual,sweeps,converged,runtime_ms"
    );
    assert_eq!(lines.count(), 4 * 2);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cells"].as_array().unwrap().len(), 4);
    assert!(summary["notes"][0].as_str().unwrap().contains("theorem3"));
    let fits: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/linefits.json")).unwrap()).unwrap();
    assert_eq!(fits[0]["s"], 2);
}

#[test]
fn bench_rejects_invalid_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "n = 50\np = 10\no_values = [60]\n").unwrap();
    let out = auglasso(&["bench", "--config", "bad.toml", "--out", "out"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds n"));
}
