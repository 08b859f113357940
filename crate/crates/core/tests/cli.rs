use std::fs;

use coded_matmul::cli::run;
use coded_matmul::encoder::{mm_supports, EncodingPlan};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("coded-matmul").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn plan_file_matches_supports() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    let p = path.to_str().unwrap();
    let (code, _, err) = call(&["plan", "--mode", "mm", "--n", "20", "--ka", "4", "--kb", "4", "--s", "4", "--seed", "7", "-o", p]);
    assert_eq!(code, 0, "{err}");
    let plan: EncodingPlan = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let expected = mm_supports(20, 4, 4, 4, 2, 2).unwrap();
    for (i, (t, s)) in expected.into_iter().enumerate() {
        assert_eq!(plan.supports_a[i], t);
        assert_eq!(plan.supports_b[i], s);
    }
    assert_eq!(plan.seed, 7);

    let (code, out, _) = call(&["verify", "--plan", p, "--exhaustive"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("4845 subsets, 0 failing"));
}

#[test]
fn verify_flags_broken_plan() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    let p = path.to_str().unwrap();
    assert_eq!(call(&["plan", "--ka", "4", "--s", "2", "-o", p]).0, 0);
    let mut plan: EncodingPlan = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    plan.supports_a[4] = vec![0, 1];
    plan.supports_a[5] = vec![0, 1];
    plan.coeffs_a[5] = plan.coeffs_a[4].clone();
    fs::write(&path, serde_json::to_string(&plan).unwrap()).unwrap();
    let (code, out, _) = call(&["verify", "--plan", p, "--exhaustive"]);
    assert_eq!(code, 2, "{out}");
    assert!(out.contains("FAIL"));
}

#[test]
fn reference_weight_cases() {
    let (code, out, _) = call(&["compare-weights", "--cases", "reference"]);
    assert_eq!(code, 0);
    for triple in ["(7,10,7)", "(8,9,7)", "(12,15,12)", "(2,3,2)", "(3,4,3)", "(4,6,4)"] {
        assert!(out.contains(triple), "missing {triple} in\n{out}");
    }
    let (code, json, _) = call(&["compare-weights", "--cases", "reference", "--json"]);
    assert_eq!(code, 0);
    let rows: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 7);
    let (code, out, _) = call(&["compare-weights", "--n", "30", "--s", "9"]);
    assert_eq!(code, 0);
    assert!(out.contains("(7,10,7)"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(call(&["nope"]).0, 1);
    assert_eq!(call(&["plan", "--ka", "4", "--s", "2", "--n", "9"]).0, 1);
    assert_eq!(call(&["plan", "--ka", "4", "--s", "5"]).0, 1);
    assert_eq!(call(&["plan", "--mode", "mm", "--ka", "5", "--kb", "4", "--s", "2"]).0, 1);
    assert_eq!(call(&["compare-weights"]).0, 1);
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("compare-weights"));
}

#[test]
fn bad_matrix_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let bad = dir.path().join("bad.mtx");
    fs::write(&bad, "%%MatrixMarket matrix array real general\n2 2\n").unwrap();
    let zero = dir.path().join("zero.mtx");
    fs::write(&zero, "%%MatrixMarket matrix coordinate real general\n4 4 1\n1 1 0\n").unwrap();
    assert_eq!(call(&["plan", "--ka", "2", "--s", "1", "-o", plan.to_str().unwrap()]).0, 0);
    for f in [&bad, &zero] {
        let (code, _, err) = call(&["encode", "--plan", plan.to_str().unwrap(), "--a", f.to_str().unwrap()]);
        assert_eq!(code, 1);
        assert!(err.contains("line"), "{err}");
    }
}

#[test]
fn encode_writes_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let out_dir = dir.path().join("blocks");
    assert_eq!(call(&["plan", "--mode", "mm", "--ka", "3", "--kb", "3", "--s", "3", "-o", plan.to_str().unwrap()]).0, 0);
    let (code, out, err) = call(&[
        "encode", "--plan", plan.to_str().unwrap(), "--rows", "50", "--cols-a", "12", "--cols-b", "9",
        "--density", "0.1", "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let summary: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(summary["files"].as_array().unwrap().len(), 24);
    let block = coded_matmul::mtx::load(&out_dir.join("worker000_a.mtx")).unwrap();
    assert_eq!((block.rows(), block.cols()), (50, 4));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let (code, _, err) = call(&[
            "simulate", "--ka", "9", "--s", "3", "--rows", "120", "--cols-a", "45", "--runs", "3",
            "-o", path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        runs.push(fs::read(&path).unwrap());
    }
    assert_eq!(runs[0], runs[1]);
    let text = String::from_utf8(runs[0].clone()).unwrap();
    assert!(text.starts_with(
        "scheme,n,k_a,k_b,s,omega_a,omega_b,coded_nnz_mean,flops_mean,tx_nnz_mean,finish_time,decode_ok,rel_err,kappa_subset"
    ));
    assert_eq!(text.lines().count(), 1 + 3 * 4);

    let k1 = call(&["kappa", "--ka", "9", "--s", "3", "--trials", "3", "--seed", "4"]);
    let k2 = call(&["kappa", "--ka", "9", "--s", "3", "--trials", "3", "--seed", "4"]);
    assert_eq!(k1.0, 0);
    assert_eq!(k1.1, k2.1);
    let report: serde_json::Value = serde_json::from_str(&k1.1).unwrap();
    assert_eq!(report["evaluated"], 220);
    assert_eq!(report["trial_kappas"].as_array().unwrap().len(), 3);
}

#[test]
fn sampled_kappa_and_mm_simulation() {
    let (code, out, err) = call(&["kappa", "--mode", "mm", "--ka", "4", "--kb", "4", "--s", "4", "--samples", "100"]);
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["evaluated"], 100);
    assert_eq!(report["mode"]["kind"], "sampled");

    let (code, out, err) = call(&[
        "simulate", "--mode", "mm", "--ka", "4", "--kb", "4", "--s", "4", "--rows", "60", "--cols-a", "16",
        "--cols-b", "16", "--density", "0.1", "--schemes", "proposed,cyclic", "--slow", "0,1,2,3",
    ]);
    assert_eq!(code, 0, "{err}");
    for line in out.lines().skip(1) {
        assert!(line.contains(",true,"), "{line}");
    }
}
