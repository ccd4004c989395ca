use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_daac");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], seed: &str) -> Output {
    Command::new(BIN)
        .args(args)
        .env("DAAC_SEED", seed)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(o: &Output) -> BTreeSet<String> {
    stdout(o).lines().map(str::to_string).collect()
}

fn kv(o: &Output, key: &str) -> String {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}\t")).map(str::to_string))
        .unwrap_or_else(|| panic!("no {key} row"))
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn golden(dir: &Path) -> (String, String) {
    let d = p(dir, "d.txt");
    let t = p(dir, "t.txt");
    fs::write(&d, "ab\nb\nbab\nbac\ndb\ndd\n").unwrap();
    fs::write(&t, "abacdd\n").unwrap();
    (d, t)
}

#[test]
fn build_then_match_golden() {
    let dir = tempfile::tempdir().unwrap();
    let (d, t) = golden(dir.path());
    let a = p(dir.path(), "a.daac");
    let out = run(&[
        "build", "--dict", &d, "--scheme", "bytewise", "--format", "compact", "--layout", "packed",
        "--vacant", "skip-forward", "--L", "16", "--order", "lex-dfs", "--out", &a,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(kv(&out, "num_states"), "10");

    let m = run(&["match", "--archive", &a, "--text", &t]);
    assert_eq!(m.status.code(), Some(0));
    let want: BTreeSet<String> = ["0\t0\t2", "1\t1\t2", "3\t1\t4", "5\t4\t6"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    assert_eq!(rows(&m), want);
    let n = run(&["naive", "--dict", &d, "--text", &t]);
    assert_eq!(rows(&n), want);

    let c = run(&["match", "--archive", &a, "--text", &t, "--count"]);
    assert_eq!(kv(&c, "occurrences"), "4");
    let visited: u64 = kv(&c, "visited").parse().unwrap();
    let units: u64 = kv(&c, "units_consumed").parse().unwrap();
    assert!(visited <= 2 * units);
}

#[test]
fn empty_text_gives_no_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (d, _) = golden(dir.path());
    let a = p(dir.path(), "a.daac");
    let e = p(dir.path(), "empty.txt");
    fs::write(&e, "").unwrap();
    assert!(run(&["build", "--dict", &d, "--out", &a]).status.success());
    let m = run(&["match", "--archive", &a, "--text", &e]);
    assert_eq!(m.status.code(), Some(0));
    assert!(m.stdout.is_empty());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (d, t) = golden(dir.path());
    let bad_combo = run(&["build", "--dict", &d, "--scheme", "charwise", "--format", "compact"]);
    assert_eq!(bad_combo.status.code(), Some(1));
    assert_eq!(run(&["build", "--dict", &d, "--order", "zigzag"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let missing = p(dir.path(), "missing.txt");
    assert_eq!(run(&["build", "--dict", &missing]).status.code(), Some(2));
    let crlf = p(dir.path(), "crlf.txt");
    fs::write(&crlf, "ab\r\nb\r\n").unwrap();
    assert_eq!(run(&["build", "--dict", &crlf]).status.code(), Some(2));

    let junk = p(dir.path(), "junk.daac");
    fs::write(&junk, b"not an archive").unwrap();
    assert_eq!(run(&["match", "--archive", &junk, "--text", &t]).status.code(), Some(2));

    let a = p(dir.path(), "c.daac");
    assert!(run(&["build", "--dict", &d, "--scheme", "charwise", "--format", "basic", "--out", &a])
        .status
        .success());
    let bad_utf8 = p(dir.path(), "bad.txt");
    fs::write(&bad_utf8, b"ab\xFFab").unwrap();
    assert_eq!(run(&["match", "--archive", &a, "--text", &bad_utf8]).status.code(), Some(2));
}

#[test]
fn stats_are_recomputed_from_the_archive() {
    let dir = tempfile::tempdir().unwrap();
    let (d, _) = golden(dir.path());
    for format in ["basic", "compact"] {
        let a = p(dir.path(), "s.daac");
        let built = run(&["build", "--dict", &d, "--format", format, "--out", &a]);
        let stats = run(&["stats", "--archive", &a]);
        assert!(stats.status.success());
        for key in ["num_states", "array_len", "vacant_proportion", "avg_verifications", "mem_total"] {
            assert_eq!(kv(&built, key), kv(&stats, key), "{key}");
        }
        let s: f64 = kv(&stats, "num_states").parse().unwrap();
        let n: f64 = kv(&stats, "array_len").parse().unwrap();
        let v: f64 = kv(&stats, "vacant_proportion").parse().unwrap();
        assert!((v - (1.0 - s / n)).abs() < 1e-6);
    }
}

#[test]
fn gen_corpus_is_seeded_and_bench_agrees_across_cells() {
    let dir = tempfile::tempdir().unwrap();
    let d = p(dir.path(), "z.txt");
    let c = p(dir.path(), "zc.txt");
    let gen = |seed| {
        let o = run_env(
            &["gen-corpus", "--kind", "zipf-cjk", "--patterns", "300", "--lines", "40",
              "--dict-out", &d, "--corpus-out", &c],
            seed,
        );
        assert!(o.status.success());
        (fs::read(&d).unwrap(), fs::read(&c).unwrap())
    };
    let first = gen("7");
    assert_eq!(first, gen("7"));
    assert_ne!(first, gen("8"));

    let out = run(&[
        "bench", "--dict", &d, "--corpus", &c, "--format", "basic,compact", "--vacant",
        "chain,skip-forward,skip-dense", "--scheme", "bytewise,charwise", "--runs", "1",
        "--threads", "3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split('\t').collect();
    let col = |name| header.iter().position(|h| *h == name).unwrap();
    let cells: Vec<Vec<&str>> = lines.map(|l| l.split('\t').collect()).collect();
    // 3 bytewise basic/compact pairs plus 3 charwise basic cells.
    assert_eq!(cells.len(), 9);
    let occ: BTreeSet<&str> = cells.iter().map(|c| c[col("occurrences")]).collect();
    assert_eq!(occ.len(), 1);
    for c in &cells {
        if c[col("format")] == "basic" {
            assert_eq!(c[col("state_mem_ratio")], "1.000000");
        }
    }
}
