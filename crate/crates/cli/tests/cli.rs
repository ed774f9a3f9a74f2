use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn pbd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbd")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn construct_reports_route_and_bound() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("p88.json");
    let o = pbd(&["construct", "pbd", "--v", "88", "--out", path_str(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("v=88 route=inflate_heavy flat_bound=94 verified=true"));
    let v = pbd(&["verify", path_str(&out)]);
    assert!(v.status.success());
    assert!(stdout(&v).contains("passed: true"));
}

#[test]
fn impossible_orders_exit_3() {
    for v in ["2", "6", "8"] {
        let o = pbd(&["construct", "pbd", "--v", v]);
        assert_eq!(o.status.code(), Some(3), "v={v}");
    }
}

#[test]
fn construction_is_byte_deterministic() {
    let a = pbd(&["construct", "pbd", "--v", "150"]);
    let b = pbd(&["construct", "pbd", "--v", "150"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn geometry_flats_and_dimension() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("pg32.json");
    assert!(pbd(&["construct", "geometry", "--pg", "3", "2", "--out", path_str(&file)]).status.success());
    let f = pbd(&["flats", path_str(&file), "--exhaustive"]);
    assert!(stdout(&f).contains("max_flat: 7"), "{}", stdout(&f));
    let sampled = pbd(&["flats", path_str(&file), "--samples", "200", "--seed", "5", "--json"]);
    let again = pbd(&["flats", path_str(&file), "--samples", "200", "--seed", "5", "--json"]);
    assert_eq!(sampled.stdout, again.stdout);
    let d = pbd(&["dimension", path_str(&file)]);
    assert_eq!(stdout(&d).trim(), "3");
}

#[test]
fn verify_failures_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"format_version": 1, "kind": "pbd", "v": 4, "meta": {}, "blocks": [[0,1,2],[0,1,3]]}"#,
    )
    .unwrap();
    let o = pbd(&["verify", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stdout(&o).contains("passed: false"));

    let garbled = dir.path().join("garbled.json");
    std::fs::write(&garbled, "{\"format_version\": 1,\n  \"kind\": ").unwrap();
    let o = pbd(&["verify", path_str(&garbled)]);
    assert_eq!(o.status.code(), Some(6));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let missing = dir.path().join("nope.json");
    assert_eq!(pbd(&["verify", path_str(&missing)]).status.code(), Some(7));
    assert_eq!(pbd(&["construct", "pbd"]).status.code(), Some(2));
    assert_eq!(pbd(&["flats", path_str(&bad)]).status.code(), Some(2));
}

#[test]
fn batch_reports_every_order() {
    let o = pbd(&["batch", "--from", "1", "--to", "500"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 500);
    assert_eq!(lines.iter().filter(|l| l.ends_with("verified=true")).count(), 497);
    let none: Vec<&str> = lines.iter().copied().filter(|l| l.contains("no_design_exists")).collect();
    assert_eq!(none, ["v=2 error=no_design_exists", "v=6 error=no_design_exists", "v=8 error=no_design_exists"]);
    assert!(lines[0].starts_with("v=1 "));
    assert!(lines[499].starts_with("v=500 route="));
}

#[test]
fn catalog_override_is_used() {
    let dir = TempDir::new().unwrap();
    let bundle = dir.path().join("catalog.json");
    assert!(pbd(&["catalog", "export", "--out", path_str(&bundle)]).status.success());
    let with = pbd(&["--catalog", path_str(&bundle), "construct", "pbd", "--v", "101"]);
    let without = pbd(&["construct", "pbd", "--v", "101"]);
    assert!(with.status.success());
    assert_eq!(with.stdout, without.stdout);

    std::fs::write(&bundle, "[]").unwrap();
    let empty = pbd(&["--catalog", path_str(&bundle), "construct", "pbd", "--v", "101"]);
    assert_eq!(empty.status.code(), Some(4), "{}", stderr(&empty));
    assert!(stderr(&empty).contains("not in catalog"));
}

#[test]
fn latin_and_cycles() {
    let dir = TempDir::new().unwrap();
    let sq = dir.path().join("sq21.txt");
    assert!(pbd(&["latin", "--v", "21", "--out", path_str(&sq)]).status.success());
    let text = std::fs::read_to_string(&sq).unwrap();
    assert_eq!(text.lines().next(), Some("21"));
    let o = pbd(&["cycles", path_str(&sq), "--exhaustive"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let max: usize = stdout(&o).lines().next().unwrap().trim_start_matches("max_cycle: ").parse().unwrap();
    assert!(max <= 2 * (21 - 3));
    assert!(max >= 4);

    let design = dir.path().join("p21.json");
    assert!(pbd(&["construct", "pbd", "--v", "21", "--out", path_str(&design)]).status.success());
    let from_design = pbd(&["cycles", path_str(&design), "--exhaustive"]);
    assert_eq!(from_design.stdout, o.stdout);
}
