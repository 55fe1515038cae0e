use std::process::{Command, Output};

use bundle_degrees::report::Record;

fn run(args: &[&str]) -> (Output, Vec<Record>) {
    let out = Command::new(env!("CARGO_BIN_EXE_bundle-degrees"))
        .args(args)
        .output()
        .unwrap();
    let records = String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| Record::parse(l).unwrap())
        .collect();
    (out, records)
}

#[test]
fn degree_of_the_identity() {
    let (out, recs) = run(&[
        "degree",
        "--map",
        "id_su3",
        "--starts",
        "200",
        "--targets",
        "2",
    ]);
    assert!(out.status.success());
    assert_eq!(recs[0].get("degree"), Some("1"));
    assert_eq!(recs[0].get("seed"), Some("1"));
    assert_eq!(recs[0].get("num_starts"), Some("200"));
}

#[test]
fn mc_on_a_cross_manifold_map_fails() {
    let (out, recs) = run(&[
        "degree",
        "--map",
        "ftilde",
        "--engine",
        "mc",
        "--samples",
        "100",
    ]);
    assert!(!out.status.success());
    assert!(recs[0].get("error").is_some());
}

#[test]
fn unknown_map_fails() {
    let (out, _) = run(&["degree", "--map", "nope"]);
    assert!(!out.status.success());
}

#[test]
fn oracle_queries() {
    let (out, recs) = run(&[
        "oracle", "--source", "su3", "--target", "su3", "--degree", "6",
    ]);
    assert!(out.status.success());
    assert_eq!(recs[0].get("admissible"), Some("false"));

    let (_, recs) = run(&[
        "oracle", "--source", "s3xs5", "--target", "su3", "--degree", "8",
    ]);
    let k: i64 = recs[0].get("kappa").unwrap().parse().unwrap();
    let l: i64 = recs[0].get("lambda").unwrap().parse().unwrap();
    assert_eq!(k * l, 8);
    assert_eq!(l % 2, 0);

    let (out, recs) = run(&["oracle", "--set", "--source", "su3", "--target", "s3xs5"]);
    assert!(out.status.success());
    assert_eq!(recs[0].get("set"), Some("2Z"));
    assert_eq!(recs[0].get("range_verified"), Some("true"));

    let (_, recs) = run(&[
        "oracle", "--source", "su3", "--target", "su3", "--degree", "-9",
    ]);
    assert_eq!(recs[0].get("admissible"), Some("true"));
}

#[test]
fn selftest_passes_and_catches_a_corrupted_entry() {
    let (out, recs) = run(&["selftest", "--trials", "500"]);
    assert!(out.status.success());
    assert!(recs.iter().all(Record::passed));

    let (out, recs) = run(&["selftest", "--trials", "500", "--inject-fault", "g-entry"]);
    assert!(!out.status.success());
    let g = recs
        .iter()
        .find(|r| r.get("property") == Some("g_well_defined"))
        .unwrap();
    assert!(!g.passed());
}

#[test]
fn verify_theorem_subset_and_out_file() {
    let dir = std::env::temp_dir().join(format!("bd-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.txt");
    let (out, recs) = run(&[
        "verify-theorem",
        "--only",
        "9,10",
        "--range",
        "100",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[2].get("overall"), Some("pass"));
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, String::from_utf8(out.stdout).unwrap());
    std::fs::remove_dir_all(&dir).unwrap();
}
