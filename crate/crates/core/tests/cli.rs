use std::collections::BTreeMap;
use std::process::{Command, Output};

use lambdaext::chart::ChartDocument;

fn lx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lambdaext")).args(args).env_remove("LAMBDAEXT_CACHE").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn rho_values_and_domain() {
    for (n, r) in [("2", "2"), ("4", "4"), ("8", "8"), ("16", "9"), ("64", "12")] {
        let o = lx(&["rho", n]);
        assert!(o.status.success());
        assert_eq!(stdout(&o).trim(), r);
    }
    assert_eq!(lx(&["rho", "1"]).status.code(), Some(2));
    assert_eq!(lx(&["rho"]).status.code(), Some(2));
}

#[test]
fn sphere_grid_matches_bundled_chart() {
    let o = lx(&["--format", "json", "ext", "sphere", "--stems", "0..17", "--smax", "10", "--lines", ""]);
    assert!(o.status.success());
    let doc = ChartDocument::from_json(&stdout(&o)).unwrap();
    let fig = lambdaext::verify::figure("sphere").unwrap();
    for stem in 0..=17 {
        for s in 0..=10 {
            assert_eq!(doc.dims().get(&(stem, s)).copied().unwrap_or(0), fig.expected(stem, s), "stem {} s {}", stem, s);
        }
    }
    let origin = lx(&["--format", "json", "ext", "sphere", "--stems", "0..0", "--smax", "0"]);
    assert_eq!(ChartDocument::from_json(&stdout(&origin)).unwrap().dots.len(), 1);
}

#[test]
fn formats_carry_the_same_dots() {
    let args = |f: &'static str| vec!["--format", f, "ext", "file:M2.mod", "--stems", "0..6", "--smax", "4"];
    let json = ChartDocument::from_json(&stdout(&lx(&args("json")))).unwrap();
    let svg = stdout(&lx(&args("svg")));
    let text = stdout(&lx(&args("text")));
    assert_eq!(svg.matches("<circle ").count(), json.dots.len());
    let mut from_text: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    for line in text.lines().skip_while(|l| *l != "dots").skip(1).take_while(|l| l.starts_with(' ')) {
        let inner = line.split('(').nth(1).unwrap().split(')').next().unwrap();
        let (a, b) = inner.split_once(", ").unwrap();
        *from_text.entry((a.parse().unwrap(), b.parse().unwrap())).or_insert(0) += 1;
    }
    assert_eq!(from_text, json.dims());
    assert_eq!(json.dims()[&(1, 0)], 1);
    assert_eq!(svg, stdout(&lx(&args("svg"))));
}

#[test]
fn cache_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let stats = stdout(&lx(&["--cache-dir", d, "cache", "stats"]));
    assert!(stats.starts_with("0 entries"), "{}", stats);
    assert!(lx(&["--cache-dir", d, "ext", "S0", "--stems", "0..5", "--smax", "3"]).status.success());
    let stats = stdout(&lx(&["--cache-dir", d, "cache", "stats"]));
    assert!(stats.starts_with("24 entries"), "{}", stats);
    assert!(lx(&["--cache-dir", d, "cache", "verify", "--sample", "24"]).status.success());
    let rec = std::fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path().join("1_2.json");
    let text = std::fs::read_to_string(&rec).unwrap().replace("\"dim\": 1", "\"dim\": 0");
    std::fs::write(&rec, text).unwrap();
    let o = lx(&["--cache-dir", d, "cache", "verify"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cache corrupt"));
    assert_eq!(lx(&["--cache-dir", d, "ext", "S0", "--stems", "0..5", "--smax", "3"]).status.code(), Some(1));
    assert!(stdout(&lx(&["--cache-dir", d, "cache", "clear"])).contains("24"));
}

#[test]
fn exit_codes() {
    assert_eq!(lx(&["--max-basis", "10", "ext", "S0", "--stems", "20", "--smax", "5"]).status.code(), Some(3));
    assert_eq!(lx(&["ext", "Q(1,2)"]).status.code(), Some(2));
    assert_eq!(lx(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lx(&["--format", "svg", "rho", "4"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.lx");
    std::fs::write(&bad, "module S0\nIsCycle l1\nIsBoundary l3\n").unwrap();
    let o = lx(&["verify", "script", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    std::fs::write(&bad, "IsCycle (l1\n").unwrap();
    assert_eq!(lx(&["verify", "script", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_and_module_commands() {
    let script = concat!(env!("CARGO_MANIFEST_DIR"), "/data/scripts/relations.lx");
    assert!(lx(&["verify", "script", script]).status.success());
    assert!(lx(&["verify", "figure", "p18_15"]).status.success());
    let o = lx(&["module", "check", "Pt62", "--stems", "0..12", "--smax", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("d^2 = 0"));
    let o = lx(&["transfer", "--stems", "1..5", "--smax", "3", "--require-onto"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = lx(&["ss", "P(1,4)", "--stems", "1..4", "--smax", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("d1: \u{113}2 -> \u{113}1 h0"));
}
