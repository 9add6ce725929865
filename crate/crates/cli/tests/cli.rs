use std::path::Path;
use std::process::{Command, Output};

use moqd_core::{snapshot, Activation, Feature, FitnessVector, Genotype, MlpLayout, MoArchive, Origin, Solution};
use moqd_core::tessellation::Tessellation;

const TINY: &str = r#"
algorithm = "mome-p2c"
iterations = 2
snapshot_every = 1

[archive]
cells = 8
cvt_samples = 500
cvt_iterations = 5

[networks]
policy_hidden = [4]
critic_hidden = [8]

[training]
replay_buffer_size = 2000
critic_batch_size = 8
critic_training_steps = 2
pg_training_steps = 1
pg_batch_size = 4
"#;

fn moqd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moqd")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_archive(path: &Path, fitnesses: &[[f64; 2]]) {
    let t = Tessellation::from_centroids(vec![vec![0.25], vec![0.75]]).unwrap();
    let mut archive = MoArchive::new(t, 10).unwrap();
    let layout = MlpLayout::new(1, vec![], 1, Activation::Tanh).unwrap();
    for (i, f) in fitnesses.iter().enumerate() {
        archive
            .insert(Solution {
                genotype: Genotype::new(vec![i as f64, 0.0], &layout).unwrap(),
                fitness: FitnessVector::new(f.to_vec()).unwrap(),
                feature: Feature::new(vec![if i % 2 == 0 { 0.1 } else { 0.9 }]).unwrap(),
                origin: Origin::Ga,
                pref: None,
            })
            .unwrap();
    }
    snapshot::save(&archive, path).unwrap();
}

#[test]
fn run_is_reproducible_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(&cfg, TINY).unwrap();
    let mut csvs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = moqd(&["run", cfg.to_str().unwrap(), "--seed", "3", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(stdout(&o).trim(), out.to_str().unwrap());
        csvs.push(std::fs::read(out.join("metrics.csv")).unwrap());
        let resolved = std::fs::read_to_string(out.join("config.toml")).unwrap();
        assert!(resolved.contains("seed = 3"));
        assert!(out.join("archive_000001.snap").exists() && out.join("archive_final.snap").exists());
    }
    assert_eq!(csvs[0], csvs[1]);

    let out = dir.path().join("c");
    let o = moqd(&["run", cfg.to_str().unwrap(), "--iterations", "0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(out.join("metrics.csv")).unwrap().lines().count(), 2);
}

#[test]
fn metrics_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("a.snap");
    write_archive(&snap, &[[1.0, 3.0], [3.0, 1.0], [2.0, 2.0]]);
    let o = moqd(&["metrics", snap.to_str().unwrap(), "--ref", "0,0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    // cell 0 holds (1,3) and (2,2) for 5, cell 1 holds (3,1) for 3
    assert_eq!(row[0], "8");
    assert_eq!(row[2], "6");
    assert_eq!(row[4], "4");
    assert_eq!(row[5], "1");

    let empty = dir.path().join("empty.snap");
    write_archive(&empty, &[]);
    let o = moqd(&["metrics", empty.to_str().unwrap(), "--ref", "-1,-1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().nth(1).unwrap(), "0,0,0,0,,0");

    let o = moqd(&["metrics", snap.to_str().unwrap(), "--ref", "0,0,0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn normalize_uses_union_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.snap");
    let b = dir.path().join("b.snap");
    write_archive(&a, &[[0.0, 10.0], [2.0, 4.0]]);
    write_archive(&b, &[[5.0, 1.0]]);
    let o = moqd(&["normalize", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "min,0,1");
    assert_eq!(lines[1], "max,5,10");
    assert_eq!(lines.len(), 5);
}

#[test]
fn inspect_prints_a_front() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("a.snap");
    write_archive(&snap, &[[1.0, 3.0], [3.0, 1.0], [2.0, 2.0]]);
    let o = moqd(&["inspect", snap.to_str().unwrap(), "--cell", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("cell 0 centroid 0.25"));
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("1,3\t0.1\tga\t-"));

    let o = moqd(&["inspect", snap.to_str().unwrap(), "--cell", "9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.snap");

    let o = moqd(&["metrics", missing.to_str().unwrap(), "--ref", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).lines().count(), 1);

    let o = moqd(&["run", "cfg.toml", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).lines().count(), 1);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "algorithm = \"pga-me\"").unwrap();
    let o = moqd(&["run", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("pga-me"));

    let corrupt = dir.path().join("corrupt.snap");
    std::fs::write(&corrupt, "moqd-archive 1\ncells two\n").unwrap();
    let o = moqd(&["inspect", corrupt.to_str().unwrap(), "--cell", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"));

    assert!(moqd(&["--help"]).status.success());
}
