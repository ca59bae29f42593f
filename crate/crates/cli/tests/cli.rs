use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use corolla_cli::run;

const VOCAB: &str = "# kinship nodes\nperson:Bob\nperson:Alice\nperson:Mary\n";
const REGISTRY: &str = "kin:ParentOf <-> kin:ChildOf = 0.4\nkin:HusbandOf <-> kin:WifeOf = 1.0\n";
const TRIPLES: &str = "\
person:Bob kin:ParentOf person:Alice .
person:Alice kin:ChildOf person:Bob .
person:Bob kin:HusbandOf person:Mary .
person:Mary kin:WifeOf person:Bob .
";

struct Output {
    code: i32,
    out: String,
    err: String,
}

fn corolla(args: &[&str]) -> Output {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("corolla").chain(args.iter().copied()), &mut out, &mut err);
    Output { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

struct Corpus {
    dir: tempfile::TempDir,
}

impl Corpus {
    fn new(triples: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("vocab.txt"), VOCAB).unwrap();
        fs::write(dir.path().join("registry.txt"), REGISTRY).unwrap();
        fs::write(dir.path().join("triples.nt"), triples).unwrap();
        Corpus { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn file_args(&self) -> Vec<String> {
        ["vocab", "registry", "triples"]
            .into_iter()
            .zip(["vocab.txt", "registry.txt", "triples.nt"])
            .flat_map(|(flag, file)| [format!("--{flag}"), self.path(file).display().to_string()])
            .collect()
    }

    fn run(&self, args: &[&str]) -> Output {
        let mut all = self.file_args();
        all.extend(args.iter().map(|s| s.to_string()));
        corolla(&all.iter().map(String::as_str).collect::<Vec<_>>())
    }
}

fn store_arg(dir: &Path) -> String {
    dir.display().to_string()
}

#[test]
fn validate_kinship_corpus() {
    let c = Corpus::new(TRIPLES);
    let o = c.run(&["validate"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert_eq!(o.out, "graph valid: 3 nodes, 2 edges\n");
    assert!(o.err.is_empty());
}

#[test]
fn ingest_writes_a_snapshot_usable_by_other_commands() {
    let c = Corpus::new(TRIPLES);
    let snap = store_arg(&c.path("snap"));
    let o = c.run(&["--store", &snap, "ingest"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(o.out.starts_with("ingested 3 nodes, 2 edges, 4 half-edges"));
    for file in ["FORMAT", "vocabulary.txt", "registry.txt", "triples.nt", "entropy.tsv"] {
        assert!(c.path("snap").join(file).is_file(), "{file}");
    }
    let o = corolla(&["--store", &snap, "validate"]);
    assert_eq!((o.code, o.out.as_str()), (0, "graph valid: 3 nodes, 2 edges\n"));

    let o = corolla(&["--store", &snap, "query", "person:Alice"]);
    assert_eq!(o.code, 0);
    assert!(o.out.contains("kin:ChildOf [-0.2] -> person:Bob"), "{}", o.out);
    let o = corolla(&["--store", &snap, "query", "person:Eve"]);
    assert_eq!(o.code, 1);
    assert!(o.out.is_empty() && o.err.contains("person:Eve"));
}

#[test]
fn entropy_of_a_point_four_predicate() {
    let c = Corpus::new(TRIPLES);
    // triples are numbered in (s, p, o) order: t1 HusbandOf, t2 ParentOf
    let o = c.run(&["entropy", "--triple", "t2", "--base", "2"]);
    assert_eq!(o.code, 0, "{}", o.err);
    let value: f64 = o.out.trim().parse().unwrap();
    assert!((value - 0.4).abs() <= 1e-6);
    assert_eq!(o.out, "0.400000\n");
    assert_eq!(c.run(&["entropy", "--triple", "t1"]).out, "1.000000\n");
    assert_eq!(c.run(&["entropy", "--node-vocab", "--base", "3"]).out, "1.000000\n");
    let o = c.run(&["entropy", "--node-vocab"]);
    assert!((o.out.trim().parse::<f64>().unwrap() - 3f64.log2()).abs() <= 1e-6);
}

#[test]
fn measure_is_seeded() {
    let c = Corpus::new(TRIPLES);
    let a = c.run(&["measure", "t1", "--shots", "100000", "--seed", "42"]);
    let b = c.run(&["measure", "t1", "--shots", "100000", "--seed", "42"]);
    assert_eq!(a.code, 0, "{}", a.err);
    assert_eq!(a.out, b.out);
    let v: serde_json::Value = serde_json::from_str(&a.out).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["shots"], 100000);
    let counts = v["counts"].as_object().unwrap();
    assert_eq!(counts.values().map(|n| n.as_u64().unwrap()).sum::<u64>(), 100_000);
    let other = c.run(&["measure", "t1", "--shots", "100000", "--seed", "43"]);
    assert_ne!(a.out, other.out);
}

#[test]
fn entangle_reports_the_joint_state() {
    let c = Corpus::new(TRIPLES);
    let o = c.run(&["entangle", "t2"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(o.out.contains("t2: person:Bob kin:ParentOf person:Alice ."));
    assert!(o.out.contains("converse: person:Alice kin:ChildOf person:Bob ."));
    assert!(o.out.contains("entanglement_entropy: 0.400000"));
    assert!(o.out.contains("|person:Bob>|person:Alice>"));
    assert_eq!(c.run(&["entangle", "t9"]).code, 1);
    assert_eq!(c.run(&["entangle", "x"]).code, 2);
}

#[test]
fn export_roundtrip() {
    let c = Corpus::new(TRIPLES);
    let path = c.path("edges.jsonl");
    let o = c.run(&["export", "--jsonl", &path.display().to_string()]);
    assert_eq!(o.code, 0, "{}", o.err);
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert_eq!(c.run(&["export", "--jsonl", "-"]).out, text);
}

#[test]
fn bind_hex_vectors() {
    assert_eq!(corolla(&["bind", "--xor", "f0a5", "0fa5"]).out, "ff00\n");
    let o = corolla(&["bind", "--tensor", "--matrix", "--bits", "2", "8", "4"]);
    // a = 10, b = 01 in bits: rows are sign(a_i) * sign(b_j)
    assert_eq!(o.out, "-+\n+-\n");
    assert_eq!(corolla(&["bind", "--tensor", "a5", "a5"]).out.trim().len(), 2);
    let o = corolla(&["bind", "--xor", "f0", "0f0"]);
    assert_eq!(o.code, 1);
    assert_eq!(corolla(&["bind", "--xor", "zz", "00"]).code, 2);
    assert_eq!(corolla(&["bind", "f0", "0f"]).code, 2);
}

#[test]
fn round_to_vocabulary() {
    let c = Corpus::new(TRIPLES);
    let vocab = c.path("vocab.txt").display().to_string();
    let o = corolla(&["round", "--vector", "0.1,0.9,-0.2", "--vocab", &vocab]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(o.out.starts_with("person:Alice\t"));
    let o = corolla(&["round", "--vector", "0,0,1i", "--vocab", &vocab]);
    assert_eq!(o.out, "person:Mary\t1.000000\n");
    assert_eq!(corolla(&["round", "--vector", "1,0", "--vocab", &vocab]).code, 1);
    assert_eq!(corolla(&["round", "--vector", "1,0"]).code, 2);
}

#[test]
fn failures_and_usage_errors() {
    let backward_only = Corpus::new("person:Alice kin:ChildOf person:Bob .\n");
    let o = backward_only.run(&["validate"]);
    assert_eq!(o.code, 1);
    assert!(o.out.is_empty());
    assert!(o.err.contains("line 1"), "{}", o.err);

    let malformed = Corpus::new("person:Bob kin:ParentOf person:Alice .\nBob ParentOf Alice .\n");
    let o = malformed.run(&["ingest"]);
    assert_eq!(o.code, 1);
    assert!(o.err.contains("line 2, column 1"), "{}", o.err);

    assert_eq!(corolla(&[]).code, 2);
    assert_eq!(corolla(&["frobnicate"]).code, 2);
    assert_eq!(corolla(&["validate"]).code, 2);
    assert_eq!(corolla(&["--vocab", "v.txt", "validate"]).code, 2);
    assert_eq!(corolla(&["ingest"]).code, 2);
    let c = Corpus::new(TRIPLES);
    assert_eq!(c.run(&["measure", "t1", "--shots", "10"]).code, 2);
    assert_eq!(c.run(&["entropy"]).code, 2);
    assert_eq!(c.run(&["entropy", "--triple", "t1", "--base", "1"]).code, 2);
    let o = corolla(&["--help"]);
    assert_eq!(o.code, 0);
    assert!(o.out.contains("measure"));
}

#[test]
fn binary_exit_codes_and_streams() {
    let c = Corpus::new(TRIPLES);
    let bin = env!("CARGO_BIN_EXE_corolla");
    let ok = Command::new(bin).args(c.file_args()).arg("validate").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout), "graph valid: 3 nodes, 2 edges\n");
    let usage = Command::new(bin).arg("measure").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    assert!(usage.stdout.is_empty() && !usage.stderr.is_empty());
}
