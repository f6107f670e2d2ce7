use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ringpoints::cliquegraph::build_full;
use ringpoints::geometry::{is_integral, Point};
use ringpoints_cli::cache::{Cache, ResultRecord};

fn bin(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ringpoints"))
        .arg("--cache")
        .arg(cache)
        .args(args)
        .output()
        .expect("run ringpoints")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn record(n: u32, value: u64, exact: bool) -> ResultRecord {
    ResultRecord {
        n,
        m: 2,
        mode: "I".into(),
        value,
        exact,
        witness: Some(vec![vec![0, 0], vec![1, 2]]),
        elapsed_ms: 5,
        variant: "orbit-family".into(),
        version: "0.1.0".into(),
    }
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let mut cache = Cache::open(&path).unwrap();
    assert!(cache.is_empty());
    cache.insert(record(9, 27, true));
    cache.insert(record(11, 10, false));
    cache.save().unwrap();

    let back = Cache::open(&path).unwrap();
    assert_eq!(back.len(), 2);
    assert_eq!(back.get(9, 2, "I"), Some(&record(9, 27, true)));
    assert_eq!(back.get(11, 2, "I"), Some(&record(11, 10, false)));

    // a second writer merges instead of clobbering
    let mut other = Cache::open(dir.path().join("c.json")).unwrap();
    let mut fresh = Cache::open(&path).unwrap();
    fresh.insert(record(13, 13, true));
    fresh.save().unwrap();
    other.insert(record(11, 11, true));
    other.save().unwrap();
    let merged = Cache::open(&path).unwrap();
    assert_eq!(merged.len(), 3);
    assert_eq!(merged.get(11, 2, "I").unwrap().value, 11);
    assert!(!dir.path().read_dir().unwrap().any(|e| e.unwrap().file_name().to_string_lossy().contains(".tmp")));
}

#[test]
fn cache_corruption_is_detected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let mut cache = Cache::open(&path).unwrap();
    cache.insert(record(9, 27, true));
    cache.save().unwrap();
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, text.replace("27", "28")).unwrap();
    assert!(Cache::open(&path).is_err());

    let out = bin(&path, &["value", "--n", "9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checksum"));
}

#[test]
fn value_uses_and_fills_cache() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let out = bin(&path, &["value", "--n", "9", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "27");
    let cache = Cache::open(&path).unwrap();
    let rec = cache.get(9, 2, "I").unwrap();
    assert!(rec.exact);
    assert_eq!(rec.witness.as_ref().unwrap().len(), 27);

    let again = bin(&path, &["value", "--n", "9", "--m", "2"]);
    assert!(String::from_utf8_lossy(&again.stderr).contains("cached"));
}

#[test]
fn json_schema_is_stable() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin(&dir.path().join("c.json"), &["value", "--n", "5", "--m", "2", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    let mut want = vec!["n", "m", "mode", "value", "exact", "witness", "elapsed_ms", "variant", "version"];
    want.sort_unstable();
    let mut got = keys.clone();
    got.sort_unstable();
    assert_eq!(got, want);
    assert_eq!(v["value"], 5);
    assert_eq!(v["mode"], "I");
    assert_eq!(v["exact"], true);
    let rec: ResultRecord = serde_json::from_value(v).unwrap();
    assert_eq!(rec.witness.unwrap().len(), 5);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.json");
    assert_eq!(bin(&cache, &["value", "--n", "1", "--m", "5"]).status.code(), Some(0));
    assert_eq!(bin(&cache, &["value", "--n", "0"]).status.code(), Some(1));
    assert_eq!(bin(&cache, &["value", "--n", "7", "--m", "3", "--mode", "semi-general"]).status.code(), Some(1));
    assert_eq!(bin(&cache, &["nonsense"]).status.code(), Some(1));
    assert_eq!(bin(&cache, &["--help"]).status.code(), Some(0));
    let slow = bin(&cache, &["--no-cache", "value", "--n", "11", "--m", "4", "--budget", "0.2"]);
    assert_eq!(slow.status.code(), Some(2));
    assert!(stdout(&slow).starts_with(">= "));
}

#[test]
fn position_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.json");
    let levels = dir.path().join("levels");
    let out = bin(
        &cache,
        &["value", "--n", "18", "--mode", "semi-general", "--dump-levels", levels.to_str().unwrap()],
    );
    assert_eq!(stdout(&out).trim(), "10");
    let top = fs::read_to_string(levels.join("n18-semi-general-r10.txt")).unwrap();
    let line = top.lines().next().unwrap();
    let fields: Vec<&str> = line.split('\t').collect();
    assert_eq!(fields[0], "10");
    assert_eq!(fields[1].split(' ').count(), 45);
    assert_eq!(fields[2].split(' ').count(), 10);
    assert!(!levels.join("n18-semi-general-r11.txt").exists());

    let out = bin(&cache, &["value", "--n", "13", "--mode", "general"]);
    assert_eq!(stdout(&out).trim(), "5");
}

#[test]
fn tables_small() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.json");
    let out = bin(&cache, &["table", "--which", "2", "--max-n", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.ends_with("\tok")).count(), 20);
    assert!(text.contains("diffs: 0, incomplete: 0"));

    let out = bin(&cache, &["table", "--which", "3", "--max-n", "13"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let got: Vec<String> = stdout(&out).lines().skip(1).take(13).map(|l| l.split('\t').nth(3).unwrap().to_string()).collect();
    assert_eq!(got, ["1", "4", "2", "4", "4", "4", "3", "4", "4", "6", "4", "4", "5"]);

    let out = bin(&cache, &["table", "--which", "1", "--max-n", "5", "--max-m", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.ends_with("\tok")).count(), 6);
}

/// Minimal DIMACS reader: vertex count and edge list (0-based).
fn parse_dimacs(text: &str) -> (usize, Vec<(usize, usize)>) {
    let mut v = 0;
    let mut declared = 0;
    let mut edges = Vec::new();
    for line in text.lines() {
        let f: Vec<&str> = line.split_whitespace().collect();
        match f.first() {
            Some(&"p") => {
                assert_eq!(f[1], "edge");
                v = f[2].parse().unwrap();
                declared = f[3].parse().unwrap();
            }
            Some(&"e") => {
                let (i, j): (usize, usize) = (f[1].parse().unwrap(), f[2].parse().unwrap());
                assert!(1 <= i && i < j && j <= v, "bad edge line {line}");
                edges.push((i - 1, j - 1));
            }
            _ => {}
        }
    }
    assert_eq!(edges.len(), declared);
    (v, edges)
}

fn degree_multiset(v: usize, edges: &[(usize, usize)]) -> BTreeMap<usize, usize> {
    let mut deg = vec![0; v];
    for &(i, j) in edges {
        deg[i] += 1;
        deg[j] += 1;
    }
    let mut hist = BTreeMap::new();
    for d in deg {
        *hist.entry(d).or_insert(0) += 1;
    }
    hist
}

#[test]
fn dimacs_reimport() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.json");
    for (n, m, variant) in [(3u32, 2usize, "full"), (2, 2, "full"), (1, 2, "full"), (5, 2, "rooted"), (3, 3, "hamming"), (8, 2, "even")] {
        let out = dir.path().join(format!("g{n}-{m}-{variant}.dimacs"));
        let o = bin(
            &cache,
            &["export-dimacs", "--n", &n.to_string(), "--m", &m.to_string(), "--variant", variant, "--out", out.to_str().unwrap()],
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let (v, edges) = parse_dimacs(&fs::read_to_string(&out).unwrap());
        let map = fs::read_to_string(format!("{}.map", out.display())).unwrap();
        assert_eq!(map.lines().filter(|l| !l.starts_with('#')).count(), v);

        if variant == "full" {
            let g = build_full(n, m).unwrap();
            assert_eq!(v, g.vertex_count());
            assert_eq!(degree_multiset(v, &edges), degree_multiset(v, &g.edges().collect::<Vec<_>>()));
            // recount from the sidecar coordinates
            let pts: Vec<Point> = map
                .lines()
                .filter(|l| !l.starts_with('#'))
                .map(|l| {
                    let c: Vec<i64> = l.split('\t').nth(1).unwrap().split(' ').map(|x| x.parse().unwrap()).collect();
                    Point::new(&c, n).unwrap()
                })
                .collect();
            let mut count = 0;
            for i in 0..v {
                for j in i + 1..v {
                    count += is_integral(&pts[i], &pts[j], n).unwrap() as usize;
                }
            }
            assert_eq!(edges.len(), count);
        }
        match (n, variant) {
            (2, "full") => assert_eq!((v, edges.len()), (4, 6)),
            (1, _) => assert_eq!((v, edges.len()), (1, 0)),
            (3, "full") => assert_eq!(v, 9),
            _ => {}
        }
    }
}

#[test]
fn verify_and_construct() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.json");
    let out = bin(&cache, &["verify", "--conjecture", "--max-n", "30"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().filter(|l| l.starts_with("PASS")).count(), 29);

    let out = bin(&cache, &["construct", "--n", "12", "--lemma", "1"]);
    assert!(stdout(&out).starts_with("24 points"));
    let out = bin(&cache, &["construct", "--n", "13", "--lemma", "ilig", "--grid"]);
    assert!(stdout(&out).starts_with("13 points"));
    assert_eq!(stdout(&out).matches('#').count(), 13);
    assert_eq!(bin(&cache, &["construct", "--n", "7", "--lemma", "2"]).status.code(), Some(1));
    assert_eq!(bin(&cache, &["verify"]).status.code(), Some(1));
}

#[test]
fn verify_theorems_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("c.json");
    let out = bin(&cache, &["verify", "--theorems", "--seed", "7", "--samples", "2000"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("I(8,3) = Some(64) < I(2,3) I(4,3) = Some(128)"));
    assert!(!text.contains("FAIL"));
}
