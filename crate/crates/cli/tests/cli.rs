use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_curtainlab"));
    c.env_remove("CURTAINLAB_OUT");
    c
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn dist_plane() {
    let o = run(&["dist", "--space", "plane", "--p", "0,0", "--q", "3,4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim(), "5.0");
}

#[test]
fn missing_scenario_is_validation_failure() {
    let o = run(&["run", "missing.scn"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.scn");
    std::fs::write(&f, "[space]\nkind = \"tripod\"\nparams = { legs = 3 }\n[experiment]\nname = \"injectivity\"\n").unwrap();
    let o = run(&["run", f.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("space.params.legs"), "{err}");

    std::fs::write(&f, "[space]\nkind = \"plane\"\n[experiment]\nname = \"nope\"\n").unwrap();
    let o = run(&["run", f.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("experiment.name"));
}

#[test]
fn strip_table_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", scenario("example51.scn").to_str().unwrap(), "--check", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let (h, rows) = read_csv(&dir.path().join("example51/results.csv"));
    assert!(dir.path().join("example51/plot.svg").exists());
    let (k, i, l, obs, pred) = (col(&h, "kind"), col(&h, "i"), col(&h, "L"), col(&h, "observed"), col(&h, "predicted"));
    let chains: Vec<&Vec<String>> = rows.iter().filter(|r| r[k] == "chain").collect();
    assert_eq!(chains.len(), 48);
    for r in chains {
        let (i, l): (usize, usize) = (r[i].parse().unwrap(), r[l].parse().unwrap());
        assert_eq!(r[pred].parse::<usize>().unwrap(), (2 * l).min(2 * i));
        assert!(r[obs].parse::<usize>().unwrap().abs_diff((2 * l).min(2 * i)) <= 1);
    }
    for s in ["seed", "pool_id", "version"] {
        col(&h, s);
    }
}

#[test]
fn tree_delta_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", scenario("deltascan_tree.scn").to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (h, rows) = read_csv(&dir.path().join("deltascan_tree/results.csv"));
    let d = col(&h, "delta_or_thinness");
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[d].parse::<f64>().unwrap() < 1e-9));
}

#[test]
fn check_violation_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let f = scenario("deltascan_plane.scn");
    let out = dir.path().to_str().unwrap();
    let o = run(&["run", f.to_str().unwrap(), "--check", "--out-dir", out, "--set", "experiment.params.max_delta=1.0"]);
    assert_eq!(code(&o), 3);
    // Without --check the same run succeeds.
    let o = run(&["run", f.to_str().unwrap(), "--out-dir", out, "--set", "experiment.params.max_delta=1.0"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn env_overrides_scenario_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["run", scenario("gridscan_h2.scn").to_str().unwrap()]).env("CURTAINLAB_OUT", dir.path()).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("gridscan_h2/results.csv").exists());
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let f = scenario("injectivity_tripod.scn");
    for d in [&a, &b] {
        assert_eq!(code(&run(&["run", f.to_str().unwrap(), "--out-dir", d.path().to_str().unwrap()])), 0);
    }
    let x = std::fs::read(a.path().join("injectivity_tripod/results.csv")).unwrap();
    let y = std::fs::read(b.path().join("injectivity_tripod/results.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn seed_is_stamped() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", scenario("deltascan_plane.scn").to_str().unwrap(), "--seed", "18446744073709551615", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (h, rows) = read_csv(&dir.path().join("deltascan_plane/results.csv"));
    let s = col(&h, "seed");
    assert!(rows.iter().all(|r| r[s] == "18446744073709551615"));
}

#[test]
fn kchain_const_spacing() {
    let o = run(&["kchain", "--space", "h2", "--kappa", "const:1", "--D", "2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let ts: Vec<f64> = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("i,")).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(ts.len() >= 3);
    for w in ts.windows(2) {
        assert!((w[1] - w[0] - 20.0).abs() < 1e-9, "{ts:?}");
    }
}

#[test]
fn dhat_prints_bounds() {
    let o = run(&["dhat", "--space", "strip", "--lmax", "64"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let v: Vec<f64> = text.split_whitespace().map(|x| x.parse().unwrap()).collect();
    assert_eq!(v.len(), 2);
    assert!(v[0] <= v[1]);
}

#[test]
fn subcommand_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gridscan", "--space", "tripod", "--param", "expect=\"thin\"", "--check", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("gridscan/results.csv").exists());
    assert!(dir.path().join("gridscan/plot.svg").exists());
}

#[test]
fn kchain_records_written() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", scenario("kchain_h2.scn").to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rec = std::fs::read_to_string(dir.path().join("kchain_h2/kappa_chain.txt")).unwrap();
    assert!(rec.starts_with("# kappa=") && rec.contains("pool="), "{rec}");
    assert_eq!(rec.lines().nth(1), Some("i,t_i,witness,target"));
}
