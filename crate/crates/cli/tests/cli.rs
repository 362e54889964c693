use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn mparray(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mparray")).args(args).output().unwrap()
}

fn compile(extra: &[&str]) -> Output {
    let data = data();
    let mut args = vec!["compile", "--circuits", data.to_str().unwrap()];
    args.extend_from_slice(extra);
    mparray(&args)
}

#[test]
fn pairwise_rows_cover_every_pair() {
    let out = compile(&["--mode", "pairwise", "--grid", "5x5", "--deterministic"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[0].starts_with("C_map,C_space,Depth_map,Depth_space,status"));
    // Four circuits give six unordered pairs.
    assert_eq!(rows.len(), 1 + 6);
    assert!(rows[1..].iter().all(|r| r.contains(",ok,")));
}

#[test]
fn deterministic_reports_are_byte_identical() {
    let dir = scratch("deterministic");
    let run = |name: &str| {
        let path = dir.join(name);
        let out = compile(&["--mode", "grouped", "--grid", "5x5", "--deterministic", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        (fs::read(&path).unwrap(), fs::read(path.with_extension("json")).unwrap())
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn config_file_sets_the_experiment_and_flags_override_it() {
    let dir = scratch("config");
    let config = dir.join("experiment.toml");
    fs::write(
        &config,
        format!(
            "mode = \"multi\"\ncircuits = [\"{}\"]\narrays = 2\njobs = 2\nwmax = 4\ngrid = \"5x5\"\ndeterministic = true\n",
            data().display()
        ),
    )
    .unwrap();
    let out = mparray(&["compile", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("QPU,order,circuit"));
    assert_eq!(csv.lines().filter(|l| l.contains(",total,")).count(), 2);

    let out = mparray(&["compile", "--config", config.to_str().unwrap(), "--mode", "pairwise"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("C_map"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = scratch("errors");
    assert_eq!(mparray(&["compile", "--grid", "5x5", "--circuits", "x.qasm"]).status.code(), Some(1));
    assert_eq!(compile(&["--mode", "pairwise", "--grid", "five"]).status.code(), Some(1));
    assert_eq!(compile(&["--mode", "pairwise", "--grid", "5x5", "--time-limit", "0"]).status.code(), Some(1));
    assert_eq!(compile(&["--mode", "multi", "--grid", "5x5"]).status.code(), Some(1));
    let missing = dir.join("missing.qasm");
    let out = mparray(&["compile", "--mode", "grouped", "--grid", "5x5", "--circuits", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.qasm"));
    let config = dir.join("bad.toml");
    fs::write(&config, "mode = \"grouped\"\ncircuits = []\ngrid = \"2x2\"\nbogus = 1\n").unwrap();
    assert_eq!(mparray(&["compile", "--config", config.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(mparray(&["--help"]).status.code(), Some(0));
}

#[test]
fn circuit_too_big_for_grid_is_an_error_row() {
    let dir = scratch("too-big");
    fs::write(dir.join("big.json"), "[[0, 1], [2, 3], [4, 5], [6, 7], [8, 9]]").unwrap();
    fs::write(dir.join("small.json"), "[[0, 1]]").unwrap();
    let out = mparray(&["compile", "--mode", "pairwise", "--grid", "2x2", "--circuits", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",error,"), "{csv}");
}
