use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sbp_core::data::write_libsvm;
use sbp_core::{generate, SyntheticKind, SyntheticSpec};

fn sbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_blobs(dir: &Path, name: &str, n: usize, seed: u64) -> PathBuf {
    let d = generate(&SyntheticSpec {
        kind: SyntheticKind::TwoGaussians {
            separation: 3.0,
            noise_rate: 0.0,
        },
        n,
        dimension: 2,
        seed,
    })
    .unwrap();
    let p = dir.join(name);
    let mut buf = Vec::new();
    write_libsvm(&d, &mut buf).unwrap();
    fs::write(&p, buf).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_writes_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let train = write_blobs(dir.path(), "train.txt", 60, 1);
    let test = write_blobs(dir.path(), "test.txt", 40, 2);
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = sbp(&[
            "train", s(&train), "--solver", "sbp", "--kernel", "gaussian:1", "--nu", "0.05",
            "--iters", "200", "--seed", "3", "--test", s(&test), "--out", s(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let stdout = String::from_utf8(o.stdout).unwrap();
        assert!(stdout.contains("kernel_evals=12060"), "{stdout}");
        outputs.push((
            fs::read(out.join("model.txt")).unwrap(),
            fs::read(out.join("run.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert!(csv.starts_with(
        "iteration,train_kernel_evals,eval_kernel_evals,empirical_hinge,test_zero_one,wall_clock_ns\n"
    ));
}

#[test]
fn every_solver_trains() {
    let dir = tempfile::tempdir().unwrap();
    let train = write_blobs(dir.path(), "train.txt", 40, 4);
    for (solver, extra) in [
        ("pegasos", ["--lambda", "0.025"]),
        ("sdca", ["--lambda", "0.025"]),
        ("perceptron", ["--passes", "2"]),
    ] {
        let out = dir.path().join(solver);
        let mut args = vec!["train", s(&train), "--solver", solver, "--kernel", "linear", "--iters", "100"];
        args.extend(extra);
        args.extend(["--out", s(&out)]);
        let o = sbp(&args);
        assert!(o.status.success(), "{solver}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join("model.txt").exists());
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let train = write_blobs(dir.path(), "train.txt", 20, 5);

    // Usage: missing --nu, unknown flag, bad kernel spec.
    assert_eq!(sbp(&["train", s(&train), "--solver", "sbp"]).status.code(), Some(2));
    assert_eq!(sbp(&["train", s(&train), "--frobnicate"]).status.code(), Some(2));
    assert_eq!(sbp(&["train", s(&train), "--kernel", "poly:3", "--nu", "0"]).status.code(), Some(2));

    // Data: missing file, malformed file.
    let missing = dir.path().join("nope.txt");
    assert_eq!(sbp(&["train", s(&missing), "--nu", "0"]).status.code(), Some(3));
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1 3:abc\n").unwrap();
    let o = sbp(&["train", s(&bad), "--nu", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    // Solver: no positive margin is achievable.
    let clash = dir.path().join("clash.txt");
    fs::write(&clash, "+1 1:1\n-1 1:1\n").unwrap();
    let out = dir.path().join("clash-out");
    let o = sbp(&["train", s(&clash), "--kernel", "linear", "--nu", "0", "--iters", "20", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bench_plan_produces_run_and_aggregate_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.txt");
    fs::write(
        &plan,
        "synthetic = two_gaussians\nn = 60\nnoise_rate = 0.05\ntest_size = 30\n\
         kernel = gaussian:1\nsolvers = sbp, pegasos\nrepeat = 3\nseed = 10\n\
         lambda = 0.02\nnu = auto\niterations = 120\nout = results\n",
    )
    .unwrap();
    let o = sbp(&["bench", s(&plan)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let res = dir.path().join("results");
    let mut names: Vec<String> = fs::read_dir(&res)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "aggregate.csv",
            "pegasos_seed10.csv",
            "pegasos_seed11.csv",
            "pegasos_seed12.csv",
            "sbp_seed10.csv",
            "sbp_seed11.csv",
            "sbp_seed12.csv"
        ]
    );
    let agg = fs::read_to_string(res.join("aggregate.csv")).unwrap();
    assert!(agg.contains("\npegasos,") && agg.contains("\nsbp,"));

    let again = dir.path().join("again");
    assert!(sbp(&["bench", s(&plan), "--out", s(&again)]).status.success());
    for n in &names {
        assert_eq!(fs::read(res.join(n)).unwrap(), fs::read(again.join(n)).unwrap(), "{n}");
    }
}

#[test]
fn calibrate_and_fourier() {
    let dir = tempfile::tempdir().unwrap();
    let train = write_blobs(dir.path(), "train.txt", 40, 6);
    let test = write_blobs(dir.path(), "test.txt", 20, 7);
    let o = sbp(&["calibrate-nu", s(&train), "--kernel", "gaussian:1", "--lambda", "0.025"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("nu="));

    let o = sbp(&[
        "fourier", s(&train), "--test", s(&test), "--kernel", "gaussian:1", "--k-list", "1,2,4",
        "--lambda", "0.025", "--iters", "200",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    let costs: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(costs, ["40", "80", "160"]);

    let o = sbp(&[
        "fourier", s(&train), "--test", s(&test), "--kernel", "linear", "--k-list", "2", "--lambda", "0.1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
