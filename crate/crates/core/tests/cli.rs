use std::path::Path;
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use degnn::bench::parse_results_csv;
use degnn::data::write_geomgcn_format;
use degnn::selftest::synthetic;

fn bench(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bench"))
        .args(args)
        .current_dir(cwd)
        .env_remove("DEGNN_DATA_DIR")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn planted(dir: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ds = synthetic::planted_partition_dataset(50, 0.15, 0.03, &mut rng);
    write_geomgcn_format(&ds, &dir.join("data/planted")).unwrap();
}

#[test]
fn run_writes_csv_table_and_logs() {
    let tmp = tempfile::tempdir().unwrap();
    planted(tmp.path());
    let o = bench(
        &["run", "--dataset", "planted", "--model", "M1", "--de", "spd", "--seeds", "2", "--epochs", "5", "--out", "out"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out");
    let rows = parse_results_csv(&std::fs::read_to_string(out.join("results.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].model, "M1-SPD");
    assert_eq!(rows[0].seeds, 2);
    assert!(out.join("results.txt").is_file());
    assert!(out.join("run-0.log").is_file() && out.join("run-1.log").is_file());
    assert!(String::from_utf8_lossy(&o.stdout).contains("M1-SPD"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    planted(tmp.path());
    std::fs::write(
        tmp.path().join("exp.conf"),
        "# quick run\ndataset = planted\nmodel = M5\nseeds = 3\nepochs = 4\nout = from-file\n",
    )
    .unwrap();
    let o = bench(&["run", "--config", "exp.conf", "--seeds", "1"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(tmp.path().join("from-file/results.csv")).unwrap();
    assert_eq!(parse_results_csv(&csv).unwrap()[0].seeds, 1);

    std::fs::write(tmp.path().join("bad.conf"), "datset = planted\n").unwrap();
    let o = bench(&["run", "--config", "bad.conf"], tmp.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("datset"));
}

#[test]
fn bad_invocations_fail_with_a_message() {
    let tmp = tempfile::tempdir().unwrap();
    planted(tmp.path());
    for (args, needle) in [
        (&["run", "--dataset", "planted", "--model", "M1"][..], "M1"),
        (&["run", "--dataset", "planted", "--model", "M9"][..], "M9"),
        (&["run", "--dataset", "missing", "--model", "M5"][..], "missing"),
    ] {
        let o = bench(args, tmp.path());
        assert!(!o.status.success(), "{args:?} succeeded");
        assert!(stderr(&o).contains(needle), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn stats_prints_a_row_and_reports_missing_datasets() {
    let tmp = tempfile::tempdir().unwrap();
    planted(tmp.path());
    let o = bench(&["stats", "--dataset", "planted"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let row = stdout.lines().nth(1).unwrap();
    assert!(row.starts_with("planted\t50\t"), "{row}");

    let o = bench(&["stats", "--dataset", "planted,cora"], tmp.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("cora"));
}

#[test]
fn convert_json_then_load() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("toy.json"),
        r#"{"features": [[1,0],[0,1],[1,1],[0,0]], "labels": ["a","b","a","b"], "edges": [[0,1],[1,2],[2,3]]}"#,
    )
    .unwrap();
    let o = bench(&["convert", "--format", "json", "--nodes", "toy.json", "--name", "toy", "--out", "data"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = bench(&["stats", "--dataset", "toy"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("toy\t4\t3\t2\t2\t0.00"));
}

#[test]
fn selftest_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bench(&["selftest"], tmp.path());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 6, "{stdout}");
}
