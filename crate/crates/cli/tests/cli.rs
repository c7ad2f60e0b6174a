use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use lzdict::dictionary::permutation_from_bytes;
use lzdict::FIGURE_STRINGS;
use tempfile::TempDir;

fn lzdict() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lzdict"));
    cmd.env_remove("LZDICT_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    lzdict().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = lzdict()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    _dir: TempDir,
    corpus: PathBuf,
    dict: PathBuf,
}

fn figure_dict(extra: &[&str]) -> Fixture {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("fig.txt");
    std::fs::write(&corpus, FIGURE_STRINGS.join("\n") + "\n").unwrap();
    let dict = dir.path().join("fig.lzd");
    let mut args = vec!["build", path_str(&corpus), "-o", path_str(&dict)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    Fixture { _dir: dir, corpus, dict }
}

#[test]
fn build_reports_phrase_counts() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("fig.txt");
    std::fs::write(&corpus, FIGURE_STRINGS.join("\n")).unwrap();
    let dict = dir.path().join("fig.lzd");
    let o = run(&["build", path_str(&corpus), "-o", path_str(&dict)]);
    assert!(o.status.success());
    let text = stdout(&o);
    let phrases = text.lines().find(|l| l.starts_with("#Phrases")).unwrap();
    assert_eq!(phrases.split_whitespace().collect::<Vec<_>>(), ["#Phrases", "12", "9"]);
    assert!(text.contains("store") && text.contains("index") && text.contains("total"));

    let perm = permutation_from_bytes(&std::fs::read(dir.path().join("fig.lzd.perm")).unwrap()).unwrap();
    assert_eq!(perm, (0..8).collect::<Vec<_>>());
}

#[test]
fn build_csv_has_header_and_row() {
    let f = figure_dict(&[]);
    let o = run(&["build", path_str(&f.corpus), "-o", path_str(&f.dict), "--csv"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(header.len(), row.len());
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("phrases_before"), "12");
    assert_eq!(col("phrases_after"), "9");
}

#[test]
fn figure_queries() {
    let f = figure_dict(&[]);
    let d = path_str(&f.dict);
    assert_eq!(stdout(&run(&["access", d, "6"])), "bacbacba\n");
    assert_eq!(stdout(&run(&["lookup", d, "bcbaa"])), "-1\n");
    assert_eq!(stdout(&run(&["lookup", d, "abc", "ab"])), "2\n-1\n");
}

#[test]
fn lookup_of_every_input_line_is_a_permutation() {
    for extra in [&["--variant", "combined"][..], &["--mode", "fc"], &["--variant", "omitfirst"]] {
        let f = figure_dict(extra);
        let o = run_stdin(&["lookup", path_str(&f.dict)], &std::fs::read(&f.corpus).unwrap());
        assert!(o.status.success());
        let mut ids: Vec<usize> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
        ids.sort_unstable();
        assert_eq!(ids, (0..8).collect::<Vec<_>>());
    }
}

#[test]
fn malformed_ids_get_a_marker_and_exit_zero() {
    let f = figure_dict(&[]);
    let o = run_stdin(&["access", path_str(&f.dict)], b"0\nnope\n-3\n8\n7\n");
    assert!(o.status.success());
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(lines[0], "aba");
    assert!(lines[1].starts_with("error:"));
    assert_eq!(lines[2], "-1");
    assert_eq!(lines[3], "-1");
    assert_eq!(lines[4], "bca");
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "").unwrap();
    let out = dir.path().join("x.lzd");
    let o = run(&["build", path_str(&empty), "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());

    let f = figure_dict(&[]);
    let o = run(&["build", path_str(&f.corpus), "-o", path_str(&out), "--mode", "fc", "--variant", "base"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["build", path_str(&f.corpus), "-o", path_str(&out), "--bucket-size", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn io_and_data_errors() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.lzd");
    assert_eq!(run(&["access", path_str(&missing), "0"]).status.code(), Some(2));

    let f = figure_dict(&[]);
    let mut bytes = std::fs::read(&f.dict).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x10;
    let bad = dir.path().join("bad.lzd");
    std::fs::write(&bad, &bytes).unwrap();
    let o = run(&["lookup", path_str(&bad), "aba"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("checksum"));
}

#[test]
fn len_prefixed_handles_newlines() {
    let dir = TempDir::new().unwrap();
    let strings: [&[u8]; 3] = [b"a\nb", b"\x00\xff", b"plain"];
    let mut data = Vec::new();
    for s in strings {
        data.extend_from_slice(&(s.len() as u32).to_le_bytes());
        data.extend_from_slice(s);
    }
    let corpus = dir.path().join("c.bin");
    std::fs::write(&corpus, &data).unwrap();
    let dict = dir.path().join("c.lzd");
    let o = run(&["build", path_str(&corpus), "-o", path_str(&dict), "--format", "len-prefixed"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = run_stdin(&["lookup", path_str(&dict), "--format", "len-prefixed"], &data);
    let mut ids: Vec<i64> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
    ids.sort_unstable();
    assert_eq!(ids, [0, 1, 2]);

    // "\0\xff" < "a\nb" < "plain", so ID 1 holds the newline.
    let o = run(&["access", path_str(&dict), "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("error:") && stdout(&o).contains("len-prefixed"));
    let o = run(&["access", path_str(&dict), "1", "5", "--format", "len-prefixed"]);
    let mut want = 3u32.to_le_bytes().to_vec();
    want.extend_from_slice(b"a\nb");
    want.extend_from_slice(&u32::MAX.to_le_bytes());
    assert_eq!(o.stdout, want);

    // A truncated record is a data error.
    let o = run(&["build", path_str(&corpus), "-o", path_str(&dict), "--format", "len-prefixed"]);
    assert!(o.status.success());
    std::fs::write(&corpus, &data[..data.len() - 1]).unwrap();
    let o = run(&["build", path_str(&corpus), "-o", path_str(&dict), "--format", "len-prefixed"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn stats_in_both_formats() {
    let f = figure_dict(&["--variant", "lensort"]);
    let o = run(&["stats", path_str(&f.dict)]);
    assert!(stdout(&o).contains("lensort"));
    let o = run(&["stats", path_str(&f.dict), "--csv"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("lzt-fc,lensort,8,43,9,"));
}

#[test]
fn bench_reports_columns_and_is_reproducible() {
    let f = figure_dict(&[]);
    let (d, c) = (path_str(&f.dict), path_str(&f.corpus));
    let o = run(&["bench", d, c, "--queries", "500", "--csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let header = text.lines().next().unwrap();
    for col in ["constr_s", "cmpr_pct", "access_us", "lookup_us"] {
        assert!(header.contains(col));
    }
    let digest = |o: &Output| stdout(o).lines().nth(1).unwrap().rsplit(',').next().unwrap().to_string();
    let again = run(&["bench", d, c, "--queries", "500", "--csv"]);
    assert_eq!(digest(&o), digest(&again));
    let other = run(&["bench", d, c, "--queries", "500", "--csv", "--seed", "7"]);
    assert_ne!(digest(&o), digest(&other));
    let env = lzdict().args(["bench", d, c, "--queries", "500", "--csv", "--seed", "7"]).env("LZDICT_SEED", "42").output().unwrap();
    assert_eq!(digest(&o), digest(&env));

    let o = run(&["bench", d, c, "--queries", "0"]);
    assert!(o.status.success());
    let row = stdout(&o).lines().last().unwrap().to_string();
    assert_eq!(row.split_whitespace().filter(|&t| t == "-").count(), 2);
}

#[test]
fn bench_rejects_foreign_corpus() {
    let f = figure_dict(&[]);
    let dir = TempDir::new().unwrap();
    let other = dir.path().join("o.txt");
    std::fs::write(&other, "x\ny\n").unwrap();
    let o = run(&["bench", path_str(&f.dict), path_str(&other), "--queries", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn gen_synth_is_deterministic_and_builds() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.txt");
    let args = ["gen-synth", "--scale", "0.004", "--seed", "5", "-o"];
    assert!(lzdict().args(args).arg(&a).status().unwrap().success());
    let first = std::fs::read(&a).unwrap();
    assert!(lzdict().args(args).arg(&a).status().unwrap().success());
    assert_eq!(first, std::fs::read(&a).unwrap());

    let lines: Vec<&[u8]> = first.strip_suffix(b"\n").unwrap().split(|&b| b == b'\n').collect();
    assert!(lines.iter().all(|l| l.len() == 38));
    let sorted = run(&["gen-synth", "--scale", "0.004", "--seed", "5", "--sorted"]);
    let mut want = lines.clone();
    want.sort();
    let got: Vec<&[u8]> = sorted.stdout.strip_suffix(b"\n").unwrap().split(|&b| b == b'\n').collect();
    assert_eq!(got, want);

    let dict = dir.path().join("a.lzd");
    let o = run(&["build", path_str(&a), "-o", path_str(&dict), "--variant", "combined"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("% orig"));

    assert_eq!(run(&["gen-synth", "--scale", "-1"]).status.code(), Some(1));
}

#[test]
fn selftest_passes_and_names_checks() {
    let o = run(&["selftest"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 8);
    assert!(text.contains("golden"));

    let o = run(&["selftest", "--inject-fault"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("FAIL"));
}
