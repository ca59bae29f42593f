//! Triple files, ingestion into corolla graphs, JSONL export and on-disk
//! snapshots.
//!
//! Triples use an N-Triples-like line syntax:
//!
//! ```text
//! # comment
//! person:Bob kin:ParentOf person:Alice .
//! ```
//!
//! Every token is namespaced (`ns:Value`). A statement using a backward
//! predicate name is accepted only when its converse forward statement is
//! also present, in which case the two are folded into a single edge.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corolla::{Corolla, ConverseRegistry, CorollaGraph, Direction, GraphError, Statement, TripleId};
use crate::entangle::{self, EntangleError};
use crate::qusym::{QusymError, Vocabulary};

pub const SNAPSHOT_FORMAT: &str = "corolla-store v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    MalformedToken,
    MissingTerminator,
}

/// Rejected triple line; line and column are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind:?}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("triples: {0}")]
    Parse(#[from] ParseError),
    #[error("vocabulary: {0}")]
    Vocabulary(#[from] QusymError),
    #[error("registry: {0}")]
    Registry(GraphError),
    #[error("line {line}: unknown predicate {name:?}")]
    UnknownPredicate { line: usize, name: String },
    #[error("line {line}: unknown node symbol {symbol:?}")]
    UnknownNodeSymbol { line: usize, symbol: String },
    #[error("line {line}: backward predicate {predicate:?} in predicate position without its forward statement")]
    BackwardPredicateInSubjectPosition { line: usize, predicate: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Entangle(#[from] EntangleError),
    #[error("ingested graph failed validation:\n{0}")]
    InvalidGraph(String),
    #[error("jsonl line {line}: {message}")]
    Jsonl { line: usize, message: String },
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

pub type Result<T> = std::result::Result<T, StoreError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_owned(), source }
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn is_token_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == ':'
}

/// `[A-Za-z][A-Za-z0-9_]*:[A-Za-z0-9_]+`
pub fn is_namespaced_token(token: &str) -> bool {
    let Some((ns, value)) = token.split_once(':') else {
        return false;
    };
    let mut ns_chars = ns.chars();
    ns_chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && ns_chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !value.is_empty()
        && value.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses one line. Blank and `#` comment lines yield `Ok(None)`.
pub fn parse_triple_line(line: &str, line_no: usize) -> std::result::Result<Option<Statement>, ParseError> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let trimmed = line.trim_start();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let chars: Vec<char> = line.chars().collect();
    let err = |column: usize, kind, message: String| ParseError { line: line_no, column: column + 1, kind, message };
    let mut pos = 0;
    let skip_ws = |pos: &mut usize| {
        while *pos < chars.len() && chars[*pos].is_whitespace() {
            *pos += 1;
        }
    };

    let mut tokens: Vec<String> = Vec::with_capacity(3);
    for role in ["subject", "predicate", "object"] {
        let before = pos;
        skip_ws(&mut pos);
        if role != "subject" && pos == before {
            let found = chars.get(pos).map_or("end of line".to_owned(), |c| format!("{c:?}"));
            return Err(err(pos, ParseErrorKind::MalformedToken, format!("expected whitespace before {role}, found {found}")));
        }
        let start = pos;
        while pos < chars.len() && !chars[pos].is_whitespace() && chars[pos] != '.' {
            pos += 1;
        }
        let token: String = chars[start..pos].iter().collect();
        if token.is_empty() {
            let found = chars.get(pos).map_or("end of line".to_owned(), |c| format!("{c:?}"));
            return Err(err(start, ParseErrorKind::MalformedToken, format!("expected {role}, found {found}")));
        }
        if !is_namespaced_token(&token) {
            let column = token.chars().position(|c| !is_token_char(c)).map_or(start, |i| start + i);
            return Err(err(column, ParseErrorKind::MalformedToken, format!("{role} {token:?} is not of the form ns:Value")));
        }
        tokens.push(token);
    }
    skip_ws(&mut pos);
    if pos >= chars.len() {
        return Err(err(pos, ParseErrorKind::MissingTerminator, "expected '.'".into()));
    }
    if chars[pos] != '.' {
        return Err(err(pos, ParseErrorKind::MalformedToken, format!("unexpected {:?} after object", chars[pos])));
    }
    pos += 1;
    skip_ws(&mut pos);
    if pos < chars.len() {
        return Err(err(pos, ParseErrorKind::MalformedToken, "unexpected content after '.'".into()));
    }
    let mut it = tokens.into_iter();
    let (s, p, o) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    Ok(Some(Statement { subject: s, predicate: p, object: o }))
}

/// Parsed statements with their 1-based source lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleDocument {
    pub lines: Vec<(Statement, usize)>,
}

impl TripleDocument {
    /// Fails on the first rejected line.
    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        let mut lines = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if let Some(s) = parse_triple_line(line, i + 1)? {
                lines.push((s, i + 1));
            }
        }
        Ok(TripleDocument { lines })
    }

    /// Keeps every accepted line and collects every rejection.
    pub fn parse_lenient(text: &str) -> (Self, Vec<ParseError>) {
        let mut doc = TripleDocument::default();
        let mut errors = Vec::new();
        for (i, line) in text.lines().enumerate() {
            match parse_triple_line(line, i + 1) {
                Ok(Some(s)) => doc.lines.push((s, i + 1)),
                Ok(None) => {}
                Err(e) => errors.push(e),
            }
        }
        (doc, errors)
    }

    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.lines.iter().map(|(s, _)| s)
    }

    /// One `s p o .` line per statement, LF terminated, in document order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for s in self.statements() {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }
}

/// Result of [`ingest`].
#[derive(Debug, Clone)]
pub struct Ingested {
    pub graph: CorollaGraph,
    /// Repeated forward statements dropped.
    pub duplicates: usize,
    /// Backward statements folded into their forward edge.
    pub folded: usize,
}

/// Builds a validated graph from vocabulary, registry and triple texts.
/// Every vocabulary symbol becomes a node; triple ids follow the
/// lexicographic `(s, p, o)` order of the forward statements.
pub fn ingest_str(vocabulary: &str, registry: &str, triples: &str) -> Result<Ingested> {
    let vocabulary = Vocabulary::parse(vocabulary)?;
    let registry = ConverseRegistry::parse(registry).map_err(StoreError::Registry)?;
    let doc = TripleDocument::parse(triples)?;
    build_graph(Arc::new(vocabulary), registry, &doc)
}

pub fn ingest(vocabulary: &Path, registry: &Path, triples: &Path) -> Result<Ingested> {
    ingest_str(&read_file(vocabulary)?, &read_file(registry)?, &read_file(triples)?)
}

pub fn build_graph(vocabulary: Arc<Vocabulary>, registry: ConverseRegistry, doc: &TripleDocument) -> Result<Ingested> {
    let mut forward: Vec<Statement> = Vec::new();
    let mut backward: Vec<(Statement, usize, String)> = Vec::new();
    for (st, line) in &doc.lines {
        let line = *line;
        let p = registry
            .resolve(&st.predicate)
            .ok_or_else(|| StoreError::UnknownPredicate { line, name: st.predicate.clone() })?;
        for symbol in [&st.subject, &st.object] {
            if !vocabulary.contains(symbol) {
                return Err(StoreError::UnknownNodeSymbol { line, symbol: symbol.clone() });
            }
        }
        match p.direction {
            Direction::Forward => forward.push(st.clone()),
            Direction::Backward => {
                let pair = registry.pair(p.pair);
                let converse = Statement::new(st.object.clone(), pair.forward.clone(), st.subject.clone());
                backward.push((converse, line, st.predicate.clone()));
            }
        }
    }
    let total_forward = forward.len();
    let unique: BTreeSet<Statement> = forward.into_iter().collect();
    for (converse, line, predicate) in &backward {
        if !unique.contains(converse) {
            return Err(StoreError::BackwardPredicateInSubjectPosition { line: *line, predicate: predicate.clone() });
        }
    }

    let mut graph = CorollaGraph::new(Arc::clone(&vocabulary), registry);
    for symbol in vocabulary.symbols() {
        graph.add_node(symbol)?;
    }
    for st in &unique {
        graph.add_triple(&st.subject, &st.predicate, &st.object)?;
    }
    let report = graph.validate_graph();
    if !report.is_valid() {
        return Err(StoreError::InvalidGraph(report.to_string()));
    }
    Ok(Ingested { graph, duplicates: total_forward - unique.len(), folded: backward.len() })
}

/// Forward statements of a graph in triple-id order.
pub fn canonical_document(graph: &CorollaGraph) -> TripleDocument {
    let mut statements: Vec<Statement> = graph.triple_ids().map(|t| graph.triple(t).expect("valid id")).collect();
    statements.sort();
    TripleDocument { lines: statements.into_iter().enumerate().map(|(i, s)| (s, i + 1)).collect() }
}

/// One owned corolla of a node as listed by [`query_node`].
#[derive(Debug, Clone)]
pub struct NodeEntry {
    pub corolla: Corolla,
    pub partner: Option<Corolla>,
    pub triple: Option<TripleId>,
    /// Stored orientation `(s, forward, o)`.
    pub forward: Option<Statement>,
    /// `(o, backward, s)`.
    pub converse: Option<Statement>,
}

#[derive(Debug, Clone)]
pub struct NodeReport {
    pub symbol: String,
    pub entries: Vec<NodeEntry>,
}

impl fmt::Display for NodeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {} corolla(s)", self.symbol, self.entries.len())?;
        for e in &self.entries {
            let partner = e.partner.as_ref().map_or("(unpaired)", |p| p.node.symbol.as_str());
            write!(f, "  {} [{:+}] -> {}", e.corolla.predicate.name, e.corolla.half_weight(), partner)?;
            if let (Some(t), Some(fw), Some(cv)) = (e.triple, &e.forward, &e.converse) {
                write!(f, "  {t}: {fw} | {cv}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Owned corollas of `symbol`, their partners, and both readings of each triple.
pub fn query_node(graph: &CorollaGraph, symbol: &str) -> Result<NodeReport> {
    let corollas = graph.corollas_of(symbol)?;
    let mut triple_of = HashMap::new();
    for t in graph.triple_ids() {
        let (l, r) = graph.triple_half_edges(t)?;
        triple_of.insert(l, t);
        triple_of.insert(r, t);
    }
    let mut entries = Vec::with_capacity(corollas.len());
    for c in corollas {
        let partner = graph.partner(c.id)?.map(|p| graph.corolla(p)).transpose()?;
        let triple = triple_of.get(&c.id).copied();
        let (forward, converse) = match triple {
            Some(t) => (Some(graph.triple(t)?), Some(graph.converse_of(t)?)),
            None => (None, None),
        };
        entries.push(NodeEntry { corolla: c, partner, triple, forward, converse });
    }
    Ok(NodeReport { symbol: symbol.to_owned(), entries })
}

/// One exported edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub s: String,
    pub p: String,
    pub o: String,
    pub converse_p: String,
    pub total_weight: f64,
    pub target_entropy: f64,
}

/// One record per triple; `target_entropy` is the entropy in bits its joint state is synthesized to.
pub fn edge_records(graph: &CorollaGraph) -> Result<Vec<EdgeRecord>> {
    let mut records = Vec::with_capacity(graph.triple_count());
    for t in graph.triple_ids() {
        let st = graph.triple(t)?;
        let joint = entangle::synthesize_joint_state(graph, t, None)?;
        let converse_p = graph
            .registry()
            .converse_name(&st.predicate)
            .expect("stored predicates are registered")
            .to_owned();
        records.push(EdgeRecord {
            s: st.subject,
            p: st.predicate,
            o: st.object,
            converse_p,
            total_weight: graph.total_weight(t)?,
            target_entropy: joint.target_entropy,
        });
    }
    records.sort_by(|a, b| (&a.s, &a.p, &a.o).cmp(&(&b.s, &b.p, &b.o)));
    Ok(records)
}

/// Writes one JSON object per edge in `(s, p, o)` order; returns the count.
pub fn write_jsonl<W: Write>(graph: &CorollaGraph, mut out: W) -> Result<usize> {
    let records = edge_records(graph)?;
    let mut buf = String::new();
    for r in &records {
        buf.push_str(&serde_json::to_string(r).expect("records serialize"));
        buf.push('\n');
    }
    out.write_all(buf.as_bytes()).map_err(io_err(Path::new("<output>")))?;
    Ok(records.len())
}

pub fn export_jsonl(graph: &CorollaGraph, path: &Path) -> Result<usize> {
    let mut buf = Vec::new();
    let n = write_jsonl(graph, &mut buf)?;
    fs::write(path, buf).map_err(io_err(path))?;
    Ok(n)
}

/// Rebuilds a graph from a JSONL export. Predicate pairs are registered in
/// order of first appearance; conflicting weights for one pair are rejected.
pub fn import_jsonl(text: &str, vocabulary: Arc<Vocabulary>) -> Result<CorollaGraph> {
    let mut registry = ConverseRegistry::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: EdgeRecord =
            serde_json::from_str(raw).map_err(|e| StoreError::Jsonl { line, message: e.to_string() })?;
        match registry.resolve(&rec.p) {
            Some(p) => {
                let pair = registry.pair(p.pair);
                if p.direction != Direction::Forward || pair.backward != rec.converse_p || pair.total_weight != rec.total_weight {
                    return Err(StoreError::Jsonl {
                        line,
                        message: format!("predicate {:?} conflicts with an earlier record", rec.p),
                    });
                }
            }
            None => {
                registry
                    .register(&rec.p, &rec.converse_p, rec.total_weight)
                    .map_err(|e| StoreError::Jsonl { line, message: e.to_string() })?;
            }
        }
        lines.push((Statement::new(rec.s, rec.p, rec.o), line));
    }
    Ok(build_graph(vocabulary, registry, &TripleDocument { lines })?.graph)
}

/// Directory snapshot: format tag, vocabulary, registry, canonical triples
/// and per-triple entropy annotations, all plain text.
#[derive(Debug, Clone)]
pub struct Store {
    pub graph: CorollaGraph,
}

impl Store {
    pub const FORMAT_FILE: &'static str = "FORMAT";
    pub const VOCABULARY_FILE: &'static str = "vocabulary.txt";
    pub const REGISTRY_FILE: &'static str = "registry.txt";
    pub const TRIPLES_FILE: &'static str = "triples.nt";
    pub const ENTROPY_FILE: &'static str = "entropy.tsv";

    pub fn new(graph: CorollaGraph) -> Self {
        Store { graph }
    }

    /// File name and contents of every snapshot file.
    pub fn render(&self) -> Result<Vec<(&'static str, String)>> {
        let g = &self.graph;
        let mut entropy = String::from("# triple\tsubject\tpredicate\tobject\ttotal_weight\ttarget_entropy\n");
        for t in g.triple_ids() {
            let st = g.triple(t)?;
            let joint = entangle::synthesize_joint_state(g, t, None)?;
            entropy.push_str(&format!(
                "{t}\t{}\t{}\t{}\t{}\t{:.6}\n",
                st.subject,
                st.predicate,
                st.object,
                g.total_weight(t)?,
                entangle::measure_entanglement(&joint)
            ));
        }
        Ok(vec![
            (Self::FORMAT_FILE, format!("{SNAPSHOT_FORMAT}\n")),
            (Self::VOCABULARY_FILE, g.vocabulary().to_file_string()),
            (Self::REGISTRY_FILE, g.registry().to_file_string()),
            (Self::TRIPLES_FILE, canonical_document(g).serialize()),
            (Self::ENTROPY_FILE, entropy),
        ])
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for (name, contents) in self.render()? {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(io_err(&path))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let format = read_file(&dir.join(Self::FORMAT_FILE))?;
        if format.trim() != SNAPSHOT_FORMAT {
            return Err(StoreError::Snapshot(format!("unsupported format {:?}", format.trim())));
        }
        let ingested = ingest(
            &dir.join(Self::VOCABULARY_FILE),
            &dir.join(Self::REGISTRY_FILE),
            &dir.join(Self::TRIPLES_FILE),
        )?;
        Ok(Store { graph: ingested.graph })
    }
}
