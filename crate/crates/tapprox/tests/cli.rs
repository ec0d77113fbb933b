use std::path::Path;
use std::process::{Command, Output};

use nalgebra::DMatrix;
use tapprox::commands::{self, bench_rows, bsta_report, flrta_report, flrta_wins, BstaArgs, FlrtaArgs};
use tapprox::gen::generate;
use tapprox::io::{format_tensor, parse_matrix, parse_tensor};
use tapprox_core::DenseTensor3;

fn tapprox(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tapprox"))
        .args(args)
        .current_dir(dir)
        .env_remove("TAPPROX_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn kv<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no key {key} in\n{text}"))
}

fn rank_one(u: &[f64], v: &[f64], w: &[f64]) -> DenseTensor3 {
    DenseTensor3::from_fn([u.len(), v.len(), w.len()], |i, j, k| u[i] * v[j] * w[k])
}

#[test]
fn info_examples() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("z.t3"), format_tensor(&DenseTensor3::zeros([2, 2, 2]))).unwrap();
    let out = stdout(&tapprox(&["info", "z.t3"], dir.path()));
    assert_eq!(kv(&out, "multilinear_rank"), "0,0,0");
    assert_eq!(kv(&out, "hs_norm"), "0.0");

    let r1 = rank_one(&[1.0, -2.0, 0.5], &[3.0, 1.0], &[1.0, 1.0, 2.0, -1.0]);
    let out = commands::info(&r1, false).unwrap().stdout;
    assert_eq!(kv(&out, "multilinear_rank"), "1,1,1");
    assert_eq!(kv(&out, "dims"), "3,2,4");

    let g = generate([3, 4, 5], [3, 4, 5], 0.0, 7).unwrap();
    let json: serde_json::Value = serde_json::from_str(&commands::info(&g, true).unwrap().stdout).unwrap();
    assert_eq!(json["multilinear_rank"], serde_json::json!([3, 4, 5]));
}

#[test]
fn gen_examples() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    stdout(&tapprox(&["gen", "6,5,4", "2,3,2", "--seed", "4", "-o", "a.t3"], p));
    stdout(&tapprox(&["gen", "6,5,4", "2,3,2", "--seed", "4", "-o", "b.t3"], p));
    let a = std::fs::read(p.join("a.t3")).unwrap();
    assert_eq!(a, std::fs::read(p.join("b.t3")).unwrap());
    let info = stdout(&tapprox(&["info", "a.t3"], p));
    assert_eq!(kv(&info, "multilinear_rank"), "2,3,2");

    let noisy = parse_tensor(&stdout(&tapprox(&["gen", "6,5,4", "2,3,2", "--noise", "0.1"], p))).unwrap();
    assert_eq!(noisy.multilinear_rank(), [6, 5, 4]);
}

#[test]
fn seed_env_overrides_default_only() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_tapprox"));
        cmd.args(["gen", "3,3,3", "2,2,2"]).args(extra).current_dir(dir.path());
        match env {
            Some(s) => cmd.env("TAPPROX_SEED", s),
            None => cmd.env_remove("TAPPROX_SEED"),
        };
        stdout(&cmd.output().unwrap())
    };
    let default = run(None, &[]);
    assert_eq!(default, run(None, &["--seed", &commands::DEFAULT_SEED.to_string()]));
    let env = run(Some("99"), &[]);
    assert_ne!(default, env);
    assert_eq!(env, run(None, &["--seed", "99"]));
    assert_eq!(run(Some("99"), &["--seed", "5"]), run(None, &["--seed", "5"]));
}

#[test]
fn errors_exit_nonzero_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("bad.t3"), "t3 1 1 2\n1.0\noops\n").unwrap();
    std::fs::write(p.join("ok.t3"), "t3 2 2 2\n1 2 3 4 5 6 7 8\n").unwrap();
    for args in [
        vec!["info", "bad.t3"],
        vec!["info", "missing.t3"],
        vec!["bsta", "ok.t3", "3", "1", "1"],
        vec!["bsta", "ok.t3", "1", "1", "1", "--max-sweeps", "0"],
        vec!["flrta", "ok.t3", "1", "1", "1", "--trials", "0"],
        vec!["gen", "2,2,2", "3,1,1"],
    ] {
        let out = tapprox(&args, p);
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("tapprox: "));
    }
    let err = String::from_utf8(tapprox(&["info", "bad.t3"], p).stderr).unwrap();
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn bsta_command_examples() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    stdout(&tapprox(&["gen", "6,6,5", "2,2,2", "-o", "t.t3"], p));
    let out = stdout(&tapprox(&["bsta", "t.t3", "2", "2", "2", "-o", "res"], p));
    assert!(kv(&out, "rel_error").parse::<f64>().unwrap() <= 1e-8);
    assert_eq!(kv(&out, "converged"), "true");
    assert_eq!(std::fs::read_to_string(p.join("res.report.txt")).unwrap(), out);
    let x = parse_matrix(&std::fs::read_to_string(p.join("res.x.mat")).unwrap()).unwrap();
    assert_eq!((x.rows(), x.cols()), (6, 2));
    let core = parse_tensor(&std::fs::read_to_string(p.join("res.core.t3")).unwrap()).unwrap();
    assert_eq!(core.dims(), [2, 2, 2]);

    let t = generate([4, 3, 5], [4, 3, 5], 0.0, 2).unwrap();
    let (rep, _) = bsta_report(&t, &BstaArgs::new([4, 3, 5])).unwrap();
    assert!(rep.error <= 1e-12 * rep.norm);

    let t = generate([7, 5, 1], [5, 5, 1], 0.0, 3).unwrap();
    let slice = DMatrix::from_fn(7, 5, |i, j| t.get(i, j, 0));
    let mut sv: Vec<f64> = slice.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    for k in 1..=4 {
        let (rep, _) = bsta_report(&t, &BstaArgs::new([k, k, 1])).unwrap();
        let tail = sv[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
        assert!((rep.error - tail).abs() <= 1e-9 * tail);
    }
}

#[test]
fn flrta_command_examples() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    stdout(&tapprox(&["gen", "7,8,6", "2,3,2", "-o", "t.t3"], p));
    let a = stdout(&tapprox(&["flrta", "t.t3", "2", "3", "2", "--seed", "3", "-o", "f"], p));
    assert!(kv(&a, "rel_error").parse::<f64>().unwrap() <= 1e-7);
    assert_eq!(a, stdout(&tapprox(&["flrta", "t.t3", "2", "3", "2", "--seed", "3"], p)));
    for name in ["f.c1.mat", "f.c2.mat", "f.c3.mat", "f.core.t3", "f.report.txt"] {
        assert!(p.join(name).exists(), "{name}");
    }

    let r1 = rank_one(&[1.0, 2.0, -1.5, 0.5], &[2.0, 1.0, -1.0], &[1.0, 3.0]);
    let (rep, _, warnings) = flrta_report(&r1, &FlrtaArgs::new([1, 1, 1])).unwrap();
    assert!(rep.error <= 1e-14 * rep.norm);
    assert!(warnings.is_empty());

    let (rep, _, warnings) = flrta_report(&DenseTensor3::zeros([3, 3, 3]), &FlrtaArgs::new([2, 2, 2])).unwrap();
    assert_eq!(rep.error, 0.0);
    assert!(rep.flrta.unwrap().singular_selection);
    assert_eq!(warnings.len(), 1);
}

#[test]
fn bench_examples() {
    let zero = DenseTensor3::zeros([3, 3, 3]);
    let (rows, _) = bench_rows(&zero, &[[1, 1, 1], [2, 2, 2], [3, 3, 3]], 1, false).unwrap();
    assert!(rows.iter().all(|r| r.rel_error == 0.0));

    let full = generate([4, 4, 4], [4, 4, 4], 0.0, 5).unwrap();
    let (rows, _) = bench_rows(&full, &[[4, 4, 4]], 1, false).unwrap();
    assert!(rows.iter().all(|r| r.rel_error <= 1e-10), "{rows:?}");

    let ranks: Vec<[usize; 3]> = (1..=5).map(|k| [k, k, k]).collect();
    for seed in 0..4 {
        let t = generate([7, 7, 7], [3, 3, 3], 0.05, seed).unwrap();
        let (rows, _) = bench_rows(&t, &ranks, seed, false).unwrap();
        assert!(flrta_wins(&rows).is_empty(), "{rows:?}");
        let bsta: Vec<f64> = rows
            .iter()
            .filter(|r| r.method == "bsta")
            .map(|r| r.rel_error)
            .collect();
        assert!(bsta.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{bsta:?}");
    }

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("t.t3"), format_tensor(&full)).unwrap();
    let table = stdout(&tapprox(&["bench", "t.t3", "1,1,1", "2,2,2"], dir.path()));
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("method"));
    assert!(lines[1..].iter().all(|l| l.ends_with('-')));
}
