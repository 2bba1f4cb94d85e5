use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn nshard(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nshard"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("RUST_BACKTRACE")
        .output()
        .expect("spawn nshard")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn build_theory_mode_small_horizon() {
    let dir = TempDir::new().unwrap();
    let o = nshard(&["build", "--mode", "theory", "--T", "1", "--gamma", "1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("k=4 N=5"), "{}", stderr(&o));
    assert_eq!(files(dir.path()), ["config.toml", "instance.kv", "profile.csv", "slices.csv"]);
    assert!(read(dir.path(), "instance.kv").contains("sigma = "));
    assert!(read(dir.path(), "config.toml").contains("mode = \"theory\""));
    let profile = read(dir.path(), "profile.csv");
    assert!(profile.starts_with("x,value,lo_slope,hi_slope\n"));
    assert!(profile.lines().count() > 1001);
    assert_eq!(read(dir.path(), "slices.csv").lines().count(), 1 + 10 * 401);
}

#[test]
fn build_desk_mode_records_mu() {
    let dir = TempDir::new().unwrap();
    let o = nshard(&["build", "--mode", "desk", "--k", "6", "--rho", "1e-8", "--d", "10"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let kv = read(dir.path(), "instance.kv");
    assert!(kv.contains("\nmu = "));
    assert!(kv.contains("# mu ~ 1.01010101010101"));
    assert!(kv.contains("\nd = 10\n"));
    assert_eq!(kv.lines().filter(|l| l.starts_with("w.")).count(), 10);
}

#[test]
fn missing_output_directory_is_an_error() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope");
    for cmd in ["build", "run", "check", "mc"] {
        let o = nshard(&[cmd], &missing);
        assert!(!o.status.success(), "{cmd} succeeded");
        assert!(stderr(&o).contains("does not exist"), "{}", stderr(&o));
    }
    assert!(!missing.exists());
    assert!(files(dir.path()).is_empty());
}

#[test]
fn depth_beyond_precision_cap_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = nshard(&["build", "--precision", "single"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--precision extended"));
    assert!(files(dir.path()).is_empty());
}

#[test]
fn check_passes_and_mutation_fails() {
    let good = TempDir::new().unwrap();
    let o = nshard(&["check"], good.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = read(good.path(), "report.csv");
    assert!(csv.starts_with("name,property,passed,measured,bound,tolerance,samples\n"));
    assert!(!csv.contains(",false,"));
    assert_eq!(read(good.path(), "report.jsonl").lines().count(), csv.lines().count() - 1);

    let bad = TempDir::new().unwrap();
    let o = nshard(&["check", "--mutate"], bad.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("FAIL profile_convexity/double"));
    let csv = read(bad.path(), "report.csv");
    assert!(csv.lines().any(|l| l.starts_with("profile_convexity/double,") && l.contains(",false,")));
}

#[test]
fn run_writes_one_summary_row_per_iterate() {
    let dir = TempDir::new().unwrap();
    let o = nshard(&["run", "--algo", "pgd", "--d", "10", "--T", "30"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = read(dir.path(), "summary.csv");
    let mut lines = summary.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..5], ["t", "f", "grad_norm", "z", "f_ge_1"]);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 30);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), header.len());
        assert_eq!(row[0], (i + 1).to_string());
        let f: f64 = row[1].parse().unwrap();
        assert_eq!(row[4], (f >= 1.0).to_string());
    }
    assert_eq!(read(dir.path(), "trajectory.jsonl").lines().count(), 30);
    let run = read(dir.path(), "run.json");
    assert!(run.contains("\"far_from_stationary\""));
    assert!(run.contains("\"z_final\""));
}

#[test]
fn unknown_algorithm_is_an_error() {
    let dir = TempDir::new().unwrap();
    let o = nshard(&["run", "--algo", "newton"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("newton"));
    assert!(files(dir.path()).is_empty());
}

#[test]
fn mc_warns_about_vacuous_bounds() {
    let dir = TempDir::new().unwrap();
    let o = nshard(&["mc", "--runs", "100"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("vacuous"));
    let csv = read(dir.path(), "mc.csv");
    assert!(csv.starts_with("quantity,successes,trials,estimate,wilson_lo,wilson_hi,bound,vacuous,passed\n"));
    assert!(csv.lines().any(|l| l.starts_with("reach_k,") && l.contains(",true,true")));
    let kinds: Vec<&str> = read(dir.path(), "mc.jsonl")
        .lines()
        .map(|l| if l.contains("\"kind\":\"hitting\"") { "hitting" } else { "concentration" })
        .collect();
    assert_eq!(kinds, ["hitting", "concentration"]);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("in.toml");
    fs::write(&cfg, "mode = \"desk\"\nk = 3\nrho = 1e-3\nd = 4\nT = 5\n").unwrap();
    let out = dir.path().join("out");
    fs::create_dir(&out).unwrap();
    let o = nshard(&["run", "--config", cfg.to_str().unwrap(), "--T", "7"], &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let saved = read(&out, "config.toml");
    assert!(saved.contains("T = 7"));
    assert!(saved.contains("k = 3"));
    assert_eq!(read(&out, "summary.csv").lines().count(), 1 + 7);
}

#[test]
fn seed_replay_is_bit_identical() {
    let cases: [&[&str]; 4] = [
        &["build", "--seed", "9"],
        &["check", "--seed", "9"],
        &["run", "--seed", "9", "--algo", "sd"],
        &["mc", "--seed", "9", "--runs", "100", "--T", "10"],
    ];
    for args in cases {
        let a = TempDir::new().unwrap();
        let b = TempDir::new().unwrap();
        assert!(nshard(args, a.path()).status.success());
        assert!(nshard(args, b.path()).status.success());
        let names = files(a.path());
        assert_eq!(names, files(b.path()));
        // The saved config records the output directory, which differs.
        let strip = |dir: &Path, name: &str| -> Vec<u8> {
            let bytes = fs::read(dir.join(name)).unwrap();
            if name != "config.toml" {
                return bytes;
            }
            String::from_utf8(bytes).unwrap().lines().filter(|l| !l.starts_with("out = ")).collect::<String>().into_bytes()
        };
        for name in &names {
            assert_eq!(strip(a.path(), name), strip(b.path(), name), "{args:?} {name}");
        }
    }
}
