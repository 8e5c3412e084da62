use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use daghl::io::{decode_labels, encode_labels};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_daghl"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn daghl")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn chain_seq_and_strict_indexes_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "chain.el", "0 1\n1 2\n");
    let (a, b) = (dir.path().join("a.idx"), dir.path().join("b.idx"));
    let o = run(&["build", "-i", p(&g), "-o", p(&a), "--mode", "seq"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("total_entries=8"));
    let o = run(&["build", "-i", p(&g), "-o", p(&b), "--mode", "par-strict", "--batch-size", "512"]);
    assert!(o.status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    assert_eq!(stdout(&run(&["query", "-l", p(&a), "0", "2"])), "1\n");
    assert_eq!(stdout(&run(&["query", "-l", p(&a), "2", "0"])), "0\n");
    let o = run(&["query", "-l", p(&a), "5", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("out of range"));
}

#[test]
fn report_keys_present() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.el", "0 1\n0 1\n1 1\n1 2\n");
    let idx = dir.path().join("g.idx");
    let o = run(&["build", "-i", p(&g), "-o", p(&idx), "--threads", "2", "--batch-size", "64"]);
    let text = stdout(&o);
    for key in ["mode=par-strict", "k=64", "threads=2", "order_ms=", "sweep_ms=", "search_ms=", "merge_ms=", "dropped_duplicates=1", "dropped_self_loops=1"] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
}

#[test]
fn cycle_requires_condense() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "cyc.el", "0 1\n1 0\n1 2\n");
    let idx = dir.path().join("c.idx");
    let o = run(&["build", "-i", p(&g), "-o", p(&idx)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cycle through vertex"));

    let o = run(&["build", "-i", p(&g), "-o", p(&idx), "--condense"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("n=2"));
    let o = run(&["verify", "-g", p(&g), "-l", p(&idx), "--condense", "--minimality"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn bad_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "bad.el", "0 x\n");
    let idx = dir.path().join("x.idx");
    assert_eq!(run(&["build", "-i", p(&g), "-o", p(&idx)]).status.code(), Some(2));
    assert_eq!(run(&["build", "-i", "/nonexistent", "-o", p(&idx)]).status.code(), Some(2));
    let g = write(dir.path(), "ok.el", "0 1\n");
    assert_eq!(run(&["build", "-i", p(&g), "-o", p(&idx), "--batch-size", "100"]).status.code(), Some(2));
    assert_eq!(run(&["build", "-i", p(&g), "-o", p(&idx), "--strict-fraction", "2"]).status.code(), Some(2));
    assert_eq!(run(&["build", "-i", p(&g), "-o", p(&idx), "--order", "weird"]).status.code(), Some(2));
}

#[test]
fn dimacs_and_order_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.gr", "c test\np sp 3 2\na 1 2 7\na 2 3 1\n");
    let order = write(dir.path(), "order.txt", "2\n1\n0\n");
    let idx = dir.path().join("g.idx");
    let o = run(&["build", "-i", p(&g), "--format", "dimacs", "-o", p(&idx), "--order", &format!("file:{}", p(&order))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let labels = decode_labels(&fs::read(&idx).unwrap()).unwrap();
    assert_eq!(labels.order().as_slice(), &[2, 1, 0]);
    assert_eq!(run(&["verify", "-g", p(&g), "--format", "dimacs", "-l", p(&idx), "--minimality"]).status.code(), Some(0));
}

#[test]
fn query_pairs_and_stdin_stream() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "chain.el", "0 1\n1 2\n");
    let idx = dir.path().join("c.idx");
    assert!(run(&["build", "-i", p(&g), "-o", p(&idx)]).status.success());

    let pairs = write(dir.path(), "pairs.txt", "0 2\n2 0\n# comment\n1 1\n");
    assert_eq!(stdout(&run(&["query", "-l", p(&idx), "--pairs", p(&pairs)])), "1\n0\n1\n");

    // Each answer must arrive before the next line is written.
    let mut child = bin()
        .args(["query", "-l", p(&idx), "--stdin"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut input = child.stdin.take().unwrap();
    let mut output = BufReader::new(child.stdout.take().unwrap());
    let mut line = String::new();
    for (q, want) in [("0 2", "1"), ("2 0", "0"), ("0 1", "1")] {
        writeln!(input, "{q}").unwrap();
        input.flush().unwrap();
        line.clear();
        output.read_line(&mut line).unwrap();
        assert_eq!(line.trim(), want);
    }
    writeln!(input, "7 0").unwrap();
    drop(input);
    assert_eq!(child.wait().unwrap().code(), Some(2));
}

#[test]
fn verify_detects_corrupted_rank() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.el");
    assert!(run(&["gen", "--type", "random", "--n", "60", "--m", "180", "--seed", "5", "-o", p(&g)]).status.success());
    let idx = dir.path().join("g.idx");
    assert!(run(&["build", "-i", p(&g), "-o", p(&idx), "--mode", "seq"]).status.success());
    let o = run(&["verify", "-g", p(&g), "-l", p(&idx), "--minimality"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("status=ok"));

    // Change one stored rank to another valid value while keeping the array sorted.
    let mut labels = decode_labels(&fs::read(&idx).unwrap()).unwrap();
    let n = labels.num_vertices() as u32;
    let mut bytes = encode_labels(&labels);
    let (v, pos) = (0..n)
        .find_map(|v| {
            let arr = labels.l_in(v);
            (0..arr.len()).find(|&i| {
                let next = if i + 1 < arr.len() { arr[i + 1] } else { n };
                arr[i] + 1 < next && arr[i] != labels.order().rank(v)
            }).map(|i| (v, i))
        })
        .expect("an entry with a free successor rank");
    // Locate the byte offset of l_in[v][pos].
    let mut off = 8 + 4 + 4 + 4 * n as usize;
    for u in 0..v {
        off += 4 * (2 + labels.l_out(u).len() + labels.l_in(u).len());
    }
    off += 4 * (1 + labels.l_out(v).len()) + 4 + 4 * pos;
    let bumped = labels.l_in(v)[pos] + 1;
    bytes[off..off + 4].copy_from_slice(&bumped.to_le_bytes());
    labels = decode_labels(&bytes).expect("still a well-formed index");
    assert_eq!(labels.l_in(v)[pos], bumped);
    fs::write(&idx, &bytes).unwrap();

    let o = run(&["verify", "-g", p(&g), "-l", p(&idx)]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("mismatch "), "{text}");

    // Truncated index is an I/O error, not a verification failure.
    fs::write(&idx, &bytes[..bytes.len() - 1]).unwrap();
    assert_eq!(run(&["verify", "-g", p(&g), "-l", p(&idx)]).status.code(), Some(2));
}

#[test]
fn relaxed_minimality_reports_removable() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "chain.el", "0 1\n1 2\n");
    let idx = dir.path().join("r.idx");
    let o = run(&["build", "-i", p(&g), "-o", p(&idx), "--mode", "par-relaxed", "--strict-fraction", "0", "--batch-size", "64"]);
    assert!(o.status.success());
    assert_eq!(run(&["verify", "-g", p(&g), "-l", p(&idx)]).status.code(), Some(0));
    let o = run(&["verify", "-g", p(&g), "-l", p(&idx), "--minimality"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let removable: usize = text.lines().find_map(|l| l.strip_prefix("removable=")).unwrap().parse().unwrap();
    assert!(removable > 0, "{text}");
}

#[test]
fn verify_large_graph_needs_sample() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("big.el");
    assert!(run(&["gen", "--type", "layered", "--layers", "30", "--width", "100", "--epv", "2", "--seed", "1", "-o", p(&g)]).status.success());
    let idx = dir.path().join("big.idx");
    assert!(run(&["build", "-i", p(&g), "-o", p(&idx), "--batch-size", "128"]).status.success());
    assert_eq!(run(&["verify", "-g", p(&g), "-l", p(&idx)]).status.code(), Some(2));
    let o = run(&["verify", "-g", p(&g), "-l", p(&idx), "--sample", "0.05", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn gen_is_deterministic() {
    let a = run(&["gen", "--type", "random", "--n", "5", "--m", "10", "--seed", "7"]);
    let b = run(&["gen", "--type", "random", "--n", "5", "--m", "10", "--seed", "7"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 11);
    assert_eq!(run(&["gen", "--type", "random", "--n", "5", "--m", "11"]).status.code(), Some(2));
    let o = run(&["gen", "--type", "layered", "--layers", "2", "--width", "2", "--epv", "2"]);
    assert_eq!(stdout(&o).lines().skip(1).count(), 4);
    assert_eq!(run(&["gen", "--type", "layered", "--layers", "0", "--width", "2", "--epv", "2"]).status.code(), Some(2));
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split(' ').find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('='))).unwrap()
}

#[test]
fn bench_grid() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.el");
    assert!(run(&["gen", "--type", "random", "--n", "1000", "--m", "3000", "--seed", "2", "-o", p(&g)]).status.success());
    let o = run(&[
        "bench", "-i", p(&g), "--modes", "seq,par-strict,par-relaxed", "--batch-sizes", "64",
        "--threads", "1", "--repeats", "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(field(lines[0], "mode"), "seq");
    assert_eq!(field(lines[0], "total_entries"), field(lines[1], "total_entries"));
    assert_eq!(field(lines[1], "redundancy"), "1.000000");
    assert!(field(lines[2], "redundancy").parse::<f64>().unwrap() >= 1.0);
    assert!(lines.iter().all(|l| field(l, "repeats") == "3"));
}
