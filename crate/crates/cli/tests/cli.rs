use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn emlfr(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emlfr"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn edge_lines(text: &str) -> Vec<(u64, u64)> {
    text.lines()
        .map(|l| {
            let (a, b) = l.split_once('\t').expect("tab separated");
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

#[test]
fn hh_realizes_degree_file() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("d.txt"), "1\n1\n2\n2\n3\n3\n").unwrap();
    let out = emlfr(&["hh", "-i", "d.txt"], dir.path());
    ok(&out);
    let edges = edge_lines(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(edges.len(), 6);
    let mut deg = [0u64; 6];
    for (a, b) in &edges {
        assert!(a < b);
        deg[*a as usize] += 1;
        deg[*b as usize] += 1;
    }
    assert_eq!(deg, [1, 1, 2, 2, 3, 3]);
    assert!(edges.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn hh_strict_rejects_non_graphical() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("d.txt"), "3\n3\n").unwrap();
    assert_eq!(emlfr(&["hh", "-i", "d.txt", "--strict"], dir.path()).status.code(), Some(2));
    let out = emlfr(&["hh", "-i", "d.txt"], dir.path());
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not graphical"));
    fs::write(dir.path().join("u.txt"), "2\n1\n1\n").unwrap();
    assert_eq!(emlfr(&["hh", "-i", "u.txt"], dir.path()).status.code(), Some(2));
}

#[test]
fn lfr_rejects_mixing_outside_unit_interval() {
    let dir = TempDir::new().unwrap();
    let out = emlfr(&["lfr", "--n", "1000", "--mu", "1.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn zero_swaps_echo_the_input() {
    let dir = TempDir::new().unwrap();
    let text = "0\t1\n0\t2\n1\t3\n2\t3\n";
    fs::write(dir.path().join("g.txt"), text).unwrap();
    let out = emlfr(&["es", "-i", "g.txt", "--swaps-factor", "0"], dir.path());
    ok(&out);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), text);
}

#[test]
fn swaps_preserve_degrees_and_dump_trace() {
    let dir = TempDir::new().unwrap();
    let mut text = String::new();
    for i in 0..30u64 {
        text.push_str(&format!("{}\t{}\n", i, i + 1));
    }
    fs::write(dir.path().join("g.txt"), &text).unwrap();
    let out = emlfr(
        &["es", "-i", "g.txt", "--swaps-factor", "5", "--run-size", "7", "--seed", "3", "--dump-swaps", "s.txt"],
        dir.path(),
    );
    ok(&out);
    let edges = edge_lines(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(edges.len(), 30);
    assert_eq!(fs::read_to_string(dir.path().join("s.txt")).unwrap().lines().count(), 150);
    let mut before = [0u32; 31];
    let mut after = [0u32; 31];
    for i in 0..30 {
        before[i] += 1;
        before[i + 1] += 1;
    }
    for (a, b) in edges {
        after[a as usize] += 1;
        after[b as usize] += 1;
    }
    assert_eq!(before, after);
}

#[test]
fn binary_roundtrip_through_es() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("d.txt"), "1\n1\n2\n2\n3\n3\n").unwrap();
    ok(&emlfr(&["hh", "-i", "d.txt", "--format", "text", "-o", "g.txt"], dir.path()));
    // degrees in binary, realized in binary, echoed in binary
    ok(&emlfr(&["degrees", "--n", "200", "--min", "1", "--max", "20", "--seed", "5", "--format", "bin", "-o", "d.bin"], dir.path()));
    ok(&emlfr(&["hh", "-i", "d.bin", "--format", "bin", "-o", "g.bin"], dir.path()));
    let g = fs::read(dir.path().join("g.bin")).unwrap();
    assert_eq!(&g[..4], b"EMGR");
    ok(&emlfr(&["es", "-i", "g.bin", "--format", "bin", "--swaps-factor", "0", "-o", "h.bin"], dir.path()));
    assert_eq!(fs::read(dir.path().join("h.bin")).unwrap(), g);
    fs::write(dir.path().join("bad.bin"), b"EMGX\x01\x00").unwrap();
    assert_eq!(emlfr(&["es", "-i", "bad.bin", "--format", "bin"], dir.path()).status.code(), Some(2));
}

#[test]
fn lfr_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let args = |out: &'static str, comm: &'static str, audit: &'static str| {
        vec![
            "lfr", "--n", "600", "--dmin", "5", "--dmax", "40", "--smin", "40", "--smax", "120", "--mu", "0.3",
            "--overlap-nodes", "100", "--nu", "2", "--seed", "9", "-o", out, "--communities", comm, "--audit", audit,
        ]
    };
    ok(&emlfr(&args("a.txt", "ca.txt", "aa.json"), dir.path()));
    ok(&emlfr(&args("b.txt", "cb.txt", "ab.json"), dir.path()));
    let read = |f: &str| fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.txt"), read("b.txt"));
    assert_eq!(read("ca.txt"), read("cb.txt"));
    assert_eq!(read("aa.json"), read("ab.json"));
    let audit = String::from_utf8(read("aa.json")).unwrap();
    assert!(audit.trim_end().starts_with('{') && audit.trim_end().ends_with('}'));
    assert!(audit.contains("\"dropped_duplicates\""));
    assert_eq!(String::from_utf8(read("ca.txt")).unwrap().lines().count(), 700);

    let out = emlfr(&["metrics", "-i", "a.txt", "--communities", "ca.txt"], dir.path());
    ok(&out);
    let text = String::from_utf8(out.stdout).unwrap();
    let mixing: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("mixing\t"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mixing - 0.3).abs() < 0.05, "{mixing}");
}

#[test]
fn cm_with_and_without_repair() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("d.txt"), "1\n1\n2\n2\n2\n4\n").unwrap();
    let out = emlfr(&["cm", "-i", "d.txt", "--seed", "4"], dir.path());
    ok(&out);
    assert_eq!(edge_lines(&String::from_utf8(out.stdout).unwrap()).len(), 6);
    assert!(String::from_utf8_lossy(&out.stderr).contains("self_loops"));
    let out = emlfr(&["cm", "-i", "d.txt", "--seed", "4", "--repair"], dir.path());
    ok(&out);
    let edges = edge_lines(&String::from_utf8(out.stdout).unwrap());
    assert!(edges.iter().all(|(a, b)| a < b));
    assert!(edges.windows(2).all(|w| w[0] < w[1]));

    fs::write(dir.path().join("bad.txt"), "3\n3\n").unwrap();
    let out = emlfr(&["cm", "-i", "bad.txt", "--repair"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("defects remain"));
}

#[test]
fn ca_assigns_every_membership() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("s.txt"), "3\n3\n2\n").unwrap();
    fs::write(dir.path().join("c.txt"), "1\n2\n0\n1\n2\n1\n").unwrap();
    fs::write(dir.path().join("k.txt"), "1\n1\n1\n1\n1\n3\n").unwrap();
    let out = emlfr(&["ca", "--sizes", "s.txt", "--constraints", "c.txt", "--memberships", "k.txt"], dir.path());
    ok(&out);
    let lines = edge_lines(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(lines.len(), 8);
    assert_eq!(lines.iter().filter(|(v, _)| *v == 5).count(), 3);
    // nodes needing two neighbours cannot sit in the community of size 2
    assert!(lines.iter().all(|&(v, c)| !(c == 2 && (v == 1 || v == 4))));

    fs::write(dir.path().join("c.txt"), "5\n0\n0\n0\n0\n0\n").unwrap();
    let out = emlfr(&["ca", "--sizes", "s.txt", "--constraints", "c.txt"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn metrics_and_converge() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("k4.txt"), "0\t1\n0\t2\n0\t3\n1\t2\n1\t3\n2\t3\n").unwrap();
    let out = emlfr(&["metrics", "-i", "k4.txt"], dir.path());
    ok(&out);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("triangles\t4\n"));
    assert!(text.contains("assortativity\tundefined\n"));
    assert!(text.contains("clustering\t1\n"));

    ok(&emlfr(&["degrees", "--n", "300", "--min", "1", "--max", "30", "--seed", "2", "-o", "d.txt"], dir.path()));
    let d: u64 = fs::read_to_string(dir.path().join("d.txt"))
        .unwrap()
        .lines()
        .map(|l| l.parse::<u64>().unwrap())
        .sum();
    if d % 2 == 1 {
        let mut text = fs::read_to_string(dir.path().join("d.txt")).unwrap();
        text.insert_str(0, "1\n");
        fs::write(dir.path().join("d.txt"), text).unwrap();
    }
    let out = emlfr(
        &["converge", "-i", "d.txt", "--ensemble", "10", "--max-multiple", "3", "--jobs", "2", "--seed", "1"],
        dir.path(),
    );
    ok(&out);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("metric,snapshot_swaps_per_m,mean,stddev,S"));
    assert_eq!(csv.lines().count(), 1 + 3 * 4);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",10")));
}

#[test]
fn bad_memory_budget_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = emlfr(&["--memory-budget", "lots", "metrics"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
