use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_v2x-chest"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("v2x-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

const SMALL: &[&str] = &["simulate", "--frames", "1", "--snr", "10,20", "--estimators", "ls,wi-fp-als"];

#[test]
fn one_frame_smoke_run_emits_csv() {
    let o = run(SMALL);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "estimator,scenario,snr_db,nmse_db,ber,frames,ci95,ops_muldiv,ops_sumsub,tdr_gain_pct,phi_us"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[3].starts_with("wi-fp-als,VTV-SDWW-500,10,"));
}

#[test]
fn same_seed_same_bytes() {
    let dir = scratch("seed");
    let mut outs = Vec::new();
    for (n, workers) in ["1", "3"].iter().enumerate() {
        let path = dir.join(format!("{n}.csv"));
        let mut args = SMALL.to_vec();
        args.extend(["--seed", "9", "--workers", workers, "--out", path.to_str().unwrap()]);
        assert!(run(&args).status.success());
        outs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    let mut args = SMALL.to_vec();
    args.extend(["--seed", "10"]);
    assert_ne!(stdout(&run(&args)).into_bytes(), outs[0]);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn config_file_and_flag_overrides() {
    let dir = scratch("cfg");
    let cfg = dir.join("exp.toml");
    std::fs::write(&cfg, "scenario = \"VTV-UC\"\nframes = 1\nsnr = [5]\nestimators = [\"wi-lp\"]\n").unwrap();
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--snr", "15"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("wi-lp,VTV-UC,15,"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn failures_exit_nonzero_with_one_line() {
    let dir = scratch("bad");
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "frames = 1\nwhat = 3\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["simulate", "--config", cfg.to_str().unwrap()],
        vec!["simulate", "--config", "/nonexistent/exp.toml"],
        vec!["simulate", "--estimators", "magic"],
        vec!["simulate", "--frames", "0"],
        vec!["export-dataset"],
    ];
    for args in cases {
        let o = run(&args);
        assert!(!o.status.success(), "{args:?} succeeded");
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error:"));
    }
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn tdr_and_complexity_tables() {
    let o = run(&["tdr"]);
    assert!(o.status.success());
    let t = stdout(&o);
    assert!(t.contains("1,FP,7.25,800"));
    assert!(t.contains("3,LP,7.58,272"));

    let o = run(&["complexity", "-P", "2"]);
    assert!(o.status.success());
    let t = stdout(&o);
    assert!(t.contains("fp-sls,20696,10296,30992"));
    assert!(t.contains("lmmse-offline,fp-als,"));
}

#[test]
fn export_then_eval() {
    let dir = scratch("export");
    let cfg = dir.join("exp.toml");
    std::fs::write(&cfg, "symbols = 20\n[export]\ntrain = 2\ntest = 2\nsnr = 25\n").unwrap();
    let data = dir.join("data");
    let o = run(&["export-dataset", "--config", cfg.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["train.wice", "test.wice", "train.meta.csv", "test.meta.csv"] {
        assert!(data.join(f).exists(), "{f}");
    }
    let test = data.join("test.wice");
    let o = run(&[
        "eval-predictions",
        "--config",
        cfg.to_str().unwrap(),
        "--dataset",
        test.to_str().unwrap(),
        "--predictions",
        test.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows[0].starts_with("wi-fp-als,VTV-SDWW-500,25,"));
    assert!(rows[1].starts_with("wi-fp-als-cnn,VTV-SDWW-500,25,"));
    std::fs::remove_dir_all(dir).ok();
}
