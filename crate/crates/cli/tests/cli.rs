use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use agm_cli::exit;
use agm_core::io::read_curve;
use tempfile::TempDir;

fn agm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ingest(dir: &Path, edges: &str, comms: &str, name: &str) -> PathBuf {
    let e = write(dir, &format!("{name}.edges"), edges);
    let c = write(dir, &format!("{name}.comms"), comms);
    let out = dir.join(name);
    let r = agm(&["ingest", s(&e), s(&c), "--out", s(&out)]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    out
}

/// Node 0 sits in the overlap of A = {0..5} and B = {0,1,2,6,7}.
const OVERLAP_EDGES: &str = "0 1\n0 2\n0 3\n0 4\n0 5\n0 6\n0 7\n1 2\n3 4\n4 5\n";
const OVERLAP_COMMS: &str = "0 1 2 3 4 5\n0 1 2 6 7\n";

#[test]
fn ingest_prints_summary() {
    let t = TempDir::new().unwrap();
    let e = write(t.path(), "e.txt", "10 20\n20 30\n30 10\n");
    let c = write(t.path(), "c.txt", "10 20 30\n");
    let r = agm(&["ingest", s(&e), s(&c), "--out", s(&t.path().join("ds"))]);
    assert_eq!(code(&r), 0);
    assert_eq!(stdout(&r), "N\t3\nE\t3\nC\t1\nS\t3\nA\t1\n");
    for f in ["edges.txt", "communities.txt", "id_map.tsv"] {
        assert!(t.path().join("ds").join(f).exists(), "{f}");
    }
}

#[test]
fn ingest_splits_disconnected_communities() {
    let t = TempDir::new().unwrap();
    let e = write(t.path(), "e.txt", "1 2\n3 4\n2 5\n");
    let c = write(t.path(), "c.txt", "1 2 3 4\n2 5 9\n");
    let r = agm(&["ingest", s(&e), s(&c), "--out", s(&t.path().join("ds"))]);
    assert_eq!(code(&r), 0);
    // {1,2,3,4} splits into {1,2} and {3,4}; 9 is not a node.
    assert!(stdout(&r).contains("C\t3\n"), "{}", stdout(&r));
}

#[test]
fn malformed_line_is_a_parse_error_with_line_number() {
    let t = TempDir::new().unwrap();
    let e = write(t.path(), "e.txt", "1 2\n# note\n2 x\n");
    let c = write(t.path(), "c.txt", "1 2\n");
    let r = agm(&["ingest", s(&e), s(&c), "--out", s(&t.path().join("ds"))]);
    assert_eq!(code(&r), exit::PARSE);
    assert!(stderr(&r).contains("line 3"), "{}", stderr(&r));
}

#[test]
fn missing_input_is_an_io_error() {
    let t = TempDir::new().unwrap();
    let r = agm(&["ingest", "/nonexistent/e", "/nonexistent/c", "--out", s(t.path())]);
    assert_eq!(code(&r), exit::IO);
    let r = agm(&["fit", "/nonexistent/ds", "--out", s(&t.path().join("f"))]);
    assert_eq!(code(&r), exit::IO);
}

#[test]
fn usage_errors() {
    let t = TempDir::new().unwrap();
    let ds = ingest(t.path(), "1 2\n2 3\n1 3\n", "1 2 3\n", "tri");
    let out = t.path().join("g");
    assert_eq!(code(&agm(&["generate", s(&ds), "--out", s(&out)])), exit::USAGE);
    let r = agm(&["generate", s(&ds), "--out", s(&out), "--beta", "1.5", "--seed", "1"]);
    assert_eq!(code(&r), exit::USAGE);
    let r = agm(&["stats", s(&ds), "--out", s(&out), "--properties", "Nope"]);
    assert_eq!(code(&r), exit::USAGE);
    assert_eq!(code(&agm(&["frobnicate"])), exit::USAGE);
}

#[test]
fn fit_complete_clique_reports_boundary() {
    let t = TempDir::new().unwrap();
    let ds = ingest(t.path(), "1 2\n2 3\n1 3\n1 4\n2 4\n3 4\n", "1 2 3 4\n", "k4");
    let rep = t.path().join("fit.tsv");
    let r = agm(&["fit", s(&ds), "--out", s(&rep)]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let text = fs::read_to_string(&rep).unwrap();
    assert!(text.contains("converged\ttrue"));
    assert!(text.contains("boundary_count\t1"));
    assert!(text.lines().any(|l| l == format!("0\t1\t{}\t1", agm_core::fit::X_MAX)), "{text}");
}

#[test]
fn fit_uncovered_edge_is_infeasible() {
    let t = TempDir::new().unwrap();
    let ds = ingest(t.path(), "1 2\n2 3\n1 3\n3 40\n", "1 2 3\n", "unc");
    let r = agm(&["fit", s(&ds), "--out", s(&t.path().join("f"))]);
    assert_eq!(code(&r), exit::INFEASIBLE);
    assert!(stderr(&r).contains("(3, 40)"), "{}", stderr(&r));
    let r = agm(&["fit", s(&ds), "--out", s(&t.path().join("f")), "--fit-epsilon"]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
}

#[test]
fn fit_iteration_limit_is_non_convergence() {
    let t = TempDir::new().unwrap();
    let ds = ingest(t.path(), OVERLAP_EDGES, OVERLAP_COMMS, "ov");
    let rep = t.path().join("fit.tsv");
    let r = agm(&["fit", s(&ds), "--out", s(&rep), "--max-iter", "1"]);
    assert_eq!(code(&r), exit::NOT_CONVERGED);
    assert!(fs::read_to_string(&rep).unwrap().contains("converged\tfalse"));
}

#[test]
fn generate_p_one_gives_clique_and_is_deterministic() {
    let t = TempDir::new().unwrap();
    let comms = write(t.path(), "c.txt", "5 6 7 8 9\n");
    let params = write(t.path(), "p.tsv", "epsilon\t0\n0\t1\t0\t1\n");
    let a = t.path().join("a");
    let r = agm(&["generate", s(&comms), "--params", s(&params), "--seed", "4", "--out", s(&a)]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    assert!(stdout(&r).contains("E\t10\n"));

    let ds = ingest(t.path(), OVERLAP_EDGES, OVERLAP_COMMS, "ov");
    let mut outputs = Vec::new();
    for name in ["x", "y"] {
        let out = t.path().join(name);
        let r = agm(&[
            "generate", s(&ds), "--beta", "0.4", "--scale", "0.9", "--seed", "11", "--out", s(&out),
        ]);
        assert_eq!(code(&r), 0, "{}", stderr(&r));
        outputs.push(out);
    }
    for f in ["edges.txt", "communities.txt", "id_map.tsv", "seed.txt"] {
        assert_eq!(
            fs::read(outputs[0].join(f)).unwrap(),
            fs::read(outputs[1].join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn stats_triangle_degree() {
    let t = TempDir::new().unwrap();
    let ds = ingest(t.path(), "1 2\n2 3\n1 3\n", "1 2 3\n", "tri");
    let out = t.path().join("st");
    let r = agm(&["stats", s(&ds), "--out", s(&out), "--properties", "Deg", "--seed", "0"]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let curve = read_curve(fs::File::open(out.join("deg.tsv")).map(std::io::BufReader::new).unwrap()).unwrap();
    assert_eq!(curve.points, vec![(2.0, 3.0)]);
    let index = fs::read_to_string(out.join("index.tsv")).unwrap();
    assert!(index.contains("Deg\tok\tdeg.tsv"));
    assert!(!index.contains("CCF"));
}

#[test]
fn stats_overlap_files_present_and_absent_without_overlap() {
    let t = TempDir::new().unwrap();
    let ds = ingest(t.path(), OVERLAP_EDGES, OVERLAP_COMMS, "ov");
    let out = t.path().join("st");
    let r = agm(&["stats", s(&ds), "--out", s(&out), "--min-bin-samples", "1", "--seed", "0"]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    for f in ["oo.tsv", "aabb.tsv", "ab.tsv", "sizeccdf.tsv", "membershipccdf.tsv", "index.tsv"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let ds = ingest(t.path(), "1 2\n2 3\n1 3\n4 5\n5 6\n4 6\n", "1 2 3\n4 5 6\n", "disjoint");
    let out = t.path().join("st2");
    let r = agm(&["stats", s(&ds), "--out", s(&out), "--min-bin-samples", "1", "--seed", "0"]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let index = fs::read_to_string(out.join("index.tsv")).unwrap();
    for label in ["PC", "OO", "AB"] {
        assert!(index.contains(&format!("{label}\tabsent")), "{label}: {index}");
        assert!(!out.join(format!("{}.tsv", label.to_lowercase())).exists());
    }
}

#[test]
fn compare_self_is_zero_and_respects_selection() {
    let t = TempDir::new().unwrap();
    let ds = ingest(t.path(), OVERLAP_EDGES, OVERLAP_COMMS, "ov");
    let out = t.path().join("cmp");
    let r = agm(&["compare", s(&ds), s(&ds), "--out", s(&out), "--seed", "2"]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let kv = fs::read_to_string(out.join("ks.tsv")).unwrap();
    let present: Vec<f64> = kv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .filter_map(|l| l.split('\t').nth(1)?.parse().ok())
        .collect();
    assert!(!present.is_empty());
    assert!(present.iter().all(|&v| v == 0.0), "{kv}");

    let r = agm(&["compare", s(&ds), s(&ds), "--out", s(&out), "--properties", "Deg,Hop", "--seed", "2"]);
    assert_eq!(code(&r), 0);
    let kv = fs::read_to_string(out.join("ks.tsv")).unwrap();
    let keys: Vec<&str> = kv.lines().filter(|l| !l.starts_with('#')).map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(keys, ["synthetic.Deg", "synthetic.Hop"]);
}

fn bench_config(dir: &Path, extra: &str) -> PathBuf {
    let e = write(dir, "e.txt", OVERLAP_EDGES);
    let c = write(dir, "c.txt", OVERLAP_COMMS);
    write(
        dir,
        "run.cfg",
        &format!(
            "# pipeline\nseed = 5\nedges = {}\ncommunities = {}\nout = {}\nmin_bin_samples = 1\n{extra}",
            s(&e),
            s(&c),
            s(&dir.join("runs"))
        ),
    )
}

#[test]
fn bench_writes_manifest_and_all_stages() {
    let t = TempDir::new().unwrap();
    let cfg = bench_config(t.path(), "");
    let r = agm(&["bench", s(&cfg)]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let dir = PathBuf::from(stdout(&r).lines().next().unwrap().strip_prefix("run\t").unwrap());
    assert!(dir.file_name().unwrap().to_str().unwrap().starts_with("run-"));
    for f in [
        "manifest.tsv",
        "config.txt",
        "fit.tsv",
        "real/edges.txt",
        "synthetic/edges.txt",
        "stats/real/index.tsv",
        "stats/synthetic/deg.tsv",
        "compare/table.txt",
        "compare/ks.tsv",
    ] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let manifest = fs::read_to_string(dir.join("manifest.tsv")).unwrap();
    assert!(manifest.contains("seed\t5\n"));
    assert!(manifest.contains(&format!("agm-core\t{}", agm_core::VERSION)));
    let hash = manifest.lines().find_map(|l| l.strip_prefix("config_sha256\t")).unwrap();
    assert_eq!(hash.len(), 64);

    // The resolved config reproduces the run.
    let again = agm(&["bench", s(&dir.join("config.txt"))]);
    assert_eq!(code(&again), 0, "{}", stderr(&again));
}

#[test]
fn bench_flags_override_config() {
    let t = TempDir::new().unwrap();
    let cfg = bench_config(t.path(), "");
    let r = agm(&["bench", s(&cfg), "--seed", "9", "--properties", "Deg"]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let dir = PathBuf::from(stdout(&r).lines().next().unwrap().strip_prefix("run\t").unwrap());
    let resolved = fs::read_to_string(dir.join("config.txt")).unwrap();
    assert!(resolved.contains("seed = 9\n") && resolved.contains("properties = Deg\n"), "{resolved}");
}

#[test]
fn bench_config_errors() {
    let t = TempDir::new().unwrap();
    let cfg = write(t.path(), "a.cfg", "seed = 1\nedges = e\nout = o\n");
    let r = agm(&["bench", s(&cfg)]);
    assert_eq!(code(&r), exit::USAGE);
    assert!(stderr(&r).contains("communities"), "{}", stderr(&r));

    let cfg = write(t.path(), "b.cfg", "seed = 1\ncolour = red\n");
    let r = agm(&["bench", s(&cfg)]);
    assert_eq!(code(&r), exit::USAGE);
    assert!(stderr(&r).contains("colour"));

    let cfg = bench_config(t.path(), "");
    fs::write(t.path().join("e.txt"), "1 2\n2 zz\n").unwrap();
    let r = agm(&["bench", s(&cfg)]);
    assert_eq!(code(&r), exit::PARSE);
    assert!(stderr(&r).contains("stage ingest"), "{}", stderr(&r));
}
