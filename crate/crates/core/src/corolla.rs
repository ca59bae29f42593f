//! Corolla graphs: nodes owning signed half-edge predicates, paired into
//! semantic triples by a half-edge involution.
//!
//! Each converse predicate pair (`kin:ParentOf <-> kin:ChildOf`) is registered
//! once with a total entanglement weight `p`. The forward name carries `+p/2`,
//! the backward name `-p/2`. Half-weights are stored symbolically as a sign
//! plus a reference to the registered pair, so the two halves of an edge
//! cancel exactly rather than up to round-off.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::qusym::{is_valid_symbol, Vocabulary};

/// Tolerance on `|+w| + |-w| = p` for half-edges carrying explicit weights.
pub const MODULUS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("predicate {0:?} is already registered")]
    AlreadyRegistered(String),
    #[error("total weight {0} is outside [0, 1]")]
    WeightOutOfRange(f64),
    #[error("predicate {0:?} cannot be its own converse")]
    SelfConverse(String),
    #[error("invalid predicate name {0:?}")]
    InvalidName(String),
    #[error("unknown node symbol {0:?}")]
    UnknownNodeSymbol(String),
    #[error("node {0:?} is not in the graph")]
    UnknownNode(String),
    #[error("unknown predicate {0:?}")]
    UnknownPredicate(String),
    #[error("unknown half-edge {0}")]
    UnknownHalfEdge(HalfEdgeId),
    #[error("unknown triple {0}")]
    UnknownTriple(TripleId),
    #[error("cannot join a corolla with itself ({0})")]
    SelfJoin(HalfEdgeId),
    #[error("{left:?} and {right:?} are not converses of each other")]
    NotConverse { left: String, right: String },
    #[error("already paired: {0}")]
    AlreadyPaired(String),
    #[error("left corolla must carry the forward predicate, got {0:?}")]
    WrongOrientation(String),
    #[error("registry line {line}: {message}")]
    RegistryParse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, GraphError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Index of a registered converse pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairId(usize);

impl PairId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversePair {
    pub forward: String,
    pub backward: String,
    /// `p`, in bits.
    pub total_weight: f64,
}

impl ConversePair {
    pub fn name(&self, direction: Direction) -> &str {
        match direction {
            Direction::Forward => &self.forward,
            Direction::Backward => &self.backward,
        }
    }
}

/// A predicate name resolved against the registry.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedPredicate {
    pub name: String,
    pub direction: Direction,
    pub pair: PairId,
    pub total_weight: f64,
}

impl DirectedPredicate {
    /// `+p/2` for forward names, `-p/2` for backward names.
    pub fn half_weight(&self) -> f64 {
        self.direction.sign() * self.total_weight / 2.0
    }
}

/// Bijection between forward and backward predicate names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConverseRegistry {
    pairs: Vec<ConversePair>,
    names: HashMap<String, (PairId, Direction)>,
}

impl ConverseRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, forward: &str, backward: &str, total_weight: f64) -> Result<PairId> {
        for name in [forward, backward] {
            if !is_valid_symbol(name) {
                return Err(GraphError::InvalidName(name.to_owned()));
            }
        }
        if forward == backward {
            return Err(GraphError::SelfConverse(forward.to_owned()));
        }
        for name in [forward, backward] {
            if self.names.contains_key(name) {
                return Err(GraphError::AlreadyRegistered(name.to_owned()));
            }
        }
        if !(0.0..=1.0).contains(&total_weight) {
            return Err(GraphError::WeightOutOfRange(total_weight));
        }
        let id = PairId(self.pairs.len());
        self.pairs.push(ConversePair {
            forward: forward.to_owned(),
            backward: backward.to_owned(),
            total_weight,
        });
        self.names.insert(forward.to_owned(), (id, Direction::Forward));
        self.names.insert(backward.to_owned(), (id, Direction::Backward));
        Ok(id)
    }

    pub fn resolve(&self, name: &str) -> Option<DirectedPredicate> {
        let &(pair, direction) = self.names.get(name)?;
        Some(DirectedPredicate {
            name: name.to_owned(),
            direction,
            pair,
            total_weight: self.pairs[pair.0].total_weight,
        })
    }

    pub fn pair(&self, id: PairId) -> &ConversePair {
        &self.pairs[id.0]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (PairId, &ConversePair)> {
        self.pairs.iter().enumerate().map(|(i, p)| (PairId(i), p))
    }

    /// Number of registered converse pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The other name of `name`'s pair.
    pub fn converse_name(&self, name: &str) -> Option<&str> {
        let &(pair, direction) = self.names.get(name)?;
        Some(self.pairs[pair.0].name(direction.flip()))
    }

    /// Parses `forward <-> backward = p` lines; `#` comments and blank lines skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut reg = ConverseRegistry::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| GraphError::RegistryParse { line: line_no, message };
            let (names, weight) = line
                .split_once('=')
                .ok_or_else(|| err("expected `forward <-> backward = p`".into()))?;
            let (forward, backward) = names
                .split_once("<->")
                .ok_or_else(|| err("missing `<->`".into()))?;
            let weight: f64 = weight
                .trim()
                .parse()
                .map_err(|e| err(format!("bad weight {:?}: {e}", weight.trim())))?;
            reg.register(forward.trim(), backward.trim(), weight).map_err(|e| err(e.to_string()))?;
        }
        Ok(reg)
    }

    /// Canonical file form in registration order.
    pub fn to_file_string(&self) -> String {
        self.pairs
            .iter()
            .map(|p| format!("{} <-> {} = {}\n", p.forward, p.backward, p.total_weight))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfEdgeId(usize);

impl HalfEdgeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for HalfEdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0)
    }
}

/// Triple identifier, displayed 1-based as `t1`, `t2`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TripleId(usize);

impl TripleId {
    pub fn index(self) -> usize {
        self.0
    }

    pub fn from_index(index: usize) -> Self {
        TripleId(index)
    }
}

impl fmt::Display for TripleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0 + 1)
    }
}

impl std::str::FromStr for TripleId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let n: usize = s
            .strip_prefix('t')
            .unwrap_or(s)
            .parse()
            .map_err(|_| format!("invalid triple id {s:?}"))?;
        if n == 0 {
            return Err(format!("triple ids start at t1, got {s:?}"));
        }
        Ok(TripleId(n - 1))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeRef {
    pub symbol: String,
    /// Basis index in the node vocabulary.
    pub index: usize,
}

/// A node together with one owned directed predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct Corolla {
    pub id: HalfEdgeId,
    pub node: NodeRef,
    pub predicate: DirectedPredicate,
}

impl Corolla {
    pub fn half_weight(&self) -> f64 {
        self.predicate.half_weight()
    }
}

/// `(subject, predicate, object)` by name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Statement {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl Statement {
    pub fn new(subject: impl Into<String>, predicate: impl Into<String>, object: impl Into<String>) -> Self {
        Statement { subject: subject.into(), predicate: predicate.into(), object: object.into() }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum HalfWeight {
    Symbolic,
    Explicit(f64),
}

#[derive(Debug, Clone)]
struct HalfEdge {
    node: usize,
    pair: PairId,
    direction: Direction,
    weight: HalfWeight,
}

/// Half-edge graph whose involution pairs converse corollas into triples.
#[derive(Debug, Clone)]
pub struct CorollaGraph {
    vocabulary: Arc<Vocabulary>,
    registry: ConverseRegistry,
    in_graph: Vec<bool>,
    node_count: usize,
    half_edges: Vec<HalfEdge>,
    involution: Vec<Option<HalfEdgeId>>,
    by_node: Vec<Vec<HalfEdgeId>>,
    /// `(forward, backward)` half-edge per triple.
    triples: Vec<(HalfEdgeId, HalfEdgeId)>,
    triple_index: HashMap<(usize, PairId, usize), TripleId>,
}

impl CorollaGraph {
    pub fn new(vocabulary: Arc<Vocabulary>, registry: ConverseRegistry) -> Self {
        let d = vocabulary.d();
        CorollaGraph {
            vocabulary,
            registry,
            in_graph: vec![false; d],
            node_count: 0,
            half_edges: Vec::new(),
            involution: Vec::new(),
            by_node: vec![Vec::new(); d],
            triples: Vec::new(),
            triple_index: HashMap::new(),
        }
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocabulary
    }

    pub fn registry(&self) -> &ConverseRegistry {
        &self.registry
    }

    pub fn register_converse(&mut self, forward: &str, backward: &str, total_weight: f64) -> Result<PairId> {
        self.registry.register(forward, backward, total_weight)
    }

    fn node_index(&self, symbol: &str) -> Result<usize> {
        self.vocabulary
            .index_of(symbol)
            .ok_or_else(|| GraphError::UnknownNodeSymbol(symbol.to_owned()))
    }

    fn node_ref(&self, index: usize) -> NodeRef {
        NodeRef { symbol: self.vocabulary.symbol(index).expect("in range").to_owned(), index }
    }

    /// Adds a vocabulary symbol to the node set; idempotent.
    pub fn add_node(&mut self, symbol: &str) -> Result<NodeRef> {
        let idx = self.node_index(symbol)?;
        if !self.in_graph[idx] {
            self.in_graph[idx] = true;
            self.node_count += 1;
        }
        Ok(self.node_ref(idx))
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeRef> + '_ {
        (0..self.in_graph.len()).filter(|&i| self.in_graph[i]).map(|i| self.node_ref(i))
    }

    pub fn half_edge_count(&self) -> usize {
        self.half_edges.len()
    }

    pub fn half_edge_ids(&self) -> impl Iterator<Item = HalfEdgeId> {
        (0..self.half_edges.len()).map(HalfEdgeId)
    }

    pub fn paired_half_edge_count(&self) -> usize {
        self.involution.iter().filter(|p| p.is_some()).count()
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn triple_ids(&self) -> impl Iterator<Item = TripleId> {
        (0..self.triples.len()).map(TripleId)
    }

    /// Creates a new unpaired half-edge owned by `node`.
    pub fn make_corolla(&mut self, node: &str, predicate: &str) -> Result<Corolla> {
        let idx = self.node_index(node)?;
        let resolved = self
            .registry
            .resolve(predicate)
            .ok_or_else(|| GraphError::UnknownPredicate(predicate.to_owned()))?;
        self.add_node(node)?;
        let id = HalfEdgeId(self.half_edges.len());
        self.half_edges.push(HalfEdge {
            node: idx,
            pair: resolved.pair,
            direction: resolved.direction,
            weight: HalfWeight::Symbolic,
        });
        self.involution.push(None);
        self.by_node[idx].push(id);
        Ok(Corolla { id, node: self.node_ref(idx), predicate: resolved })
    }

    fn half_edge(&self, id: HalfEdgeId) -> Result<&HalfEdge> {
        self.half_edges.get(id.0).ok_or(GraphError::UnknownHalfEdge(id))
    }

    pub fn corolla(&self, id: HalfEdgeId) -> Result<Corolla> {
        let h = self.half_edge(id)?;
        let pair = self.registry.pair(h.pair);
        let name = pair.name(h.direction).to_owned();
        let total_weight = pair.total_weight;
        Ok(Corolla {
            id,
            node: self.node_ref(h.node),
            predicate: DirectedPredicate { name, direction: h.direction, pair: h.pair, total_weight },
        })
    }

    /// Signed half-weight as stored, symbolic or explicit.
    pub fn half_weight(&self, id: HalfEdgeId) -> Result<f64> {
        let h = self.half_edge(id)?;
        Ok(match h.weight {
            HalfWeight::Symbolic => h.direction.sign() * self.registry.pair(h.pair).total_weight / 2.0,
            HalfWeight::Explicit(w) => w,
        })
    }

    /// Replaces a half-edge's symbolic weight with an explicit value, e.g.
    /// one imported from a measurement. Such edges are checked numerically
    /// by [`validate_graph`](Self::validate_graph).
    pub fn override_half_weight(&mut self, id: HalfEdgeId, value: f64) -> Result<()> {
        self.half_edges
            .get_mut(id.0)
            .ok_or(GraphError::UnknownHalfEdge(id))?
            .weight = HalfWeight::Explicit(value);
        Ok(())
    }

    /// The involution `I`; `None` for unpaired half-edges.
    pub fn partner(&self, id: HalfEdgeId) -> Result<Option<HalfEdgeId>> {
        self.half_edge(id)?;
        Ok(self.involution[id.0])
    }

    /// Pairs a forward corolla with its converse, forming a triple.
    pub fn join(&mut self, left: HalfEdgeId, right: HalfEdgeId) -> Result<TripleId> {
        if left == right {
            return Err(GraphError::SelfJoin(left));
        }
        let l = self.half_edge(left)?.clone();
        let r = self.half_edge(right)?.clone();
        for id in [left, right] {
            if let Some(p) = self.involution[id.0] {
                return Err(GraphError::AlreadyPaired(format!("{id} is paired with {p}")));
            }
        }
        if l.pair != r.pair || l.direction == r.direction {
            let name = |h: &HalfEdge| self.registry.pair(h.pair).name(h.direction).to_owned();
            return Err(GraphError::NotConverse { left: name(&l), right: name(&r) });
        }
        if l.direction != Direction::Forward {
            return Err(GraphError::WrongOrientation(self.registry.pair(l.pair).backward.clone()));
        }
        let key = (l.node, l.pair, r.node);
        if let Some(t) = self.triple_index.get(&key) {
            let s = self.triple(*t)?;
            return Err(GraphError::AlreadyPaired(format!("triple `{s}` already exists as {t}")));
        }
        let id = TripleId(self.triples.len());
        self.involution[left.0] = Some(right);
        self.involution[right.0] = Some(left);
        self.triples.push((left, right));
        self.triple_index.insert(key, id);
        Ok(id)
    }

    /// Creates both corollas of `(subject, forward, object)` and joins them.
    pub fn add_triple(&mut self, subject: &str, forward: &str, object: &str) -> Result<TripleId> {
        let resolved = self
            .registry
            .resolve(forward)
            .ok_or_else(|| GraphError::UnknownPredicate(forward.to_owned()))?;
        if resolved.direction != Direction::Forward {
            return Err(GraphError::WrongOrientation(forward.to_owned()));
        }
        let s = self.node_index(subject)?;
        let o = self.node_index(object)?;
        if let Some(t) = self.triple_index.get(&(s, resolved.pair, o)) {
            return Err(GraphError::AlreadyPaired(format!(
                "triple `{subject} {forward} {object} .` already exists as {t}"
            )));
        }
        let backward = self.registry.pair(resolved.pair).backward.clone();
        let left = self.make_corolla(subject, forward)?;
        let right = self.make_corolla(object, &backward)?;
        self.join(left.id, right.id)
    }

    /// The two half-edges of a triple, forward side first.
    pub fn triple_half_edges(&self, id: TripleId) -> Result<(HalfEdgeId, HalfEdgeId)> {
        self.triples.get(id.0).copied().ok_or(GraphError::UnknownTriple(id))
    }

    /// Stored orientation: subject owns the forward (positive) half-edge.
    pub fn triple(&self, id: TripleId) -> Result<Statement> {
        let (l, r) = self.triple_half_edges(id)?;
        let lh = &self.half_edges[l.0];
        let rh = &self.half_edges[r.0];
        Ok(Statement {
            subject: self.node_ref(lh.node).symbol,
            predicate: self.registry.pair(lh.pair).forward.clone(),
            object: self.node_ref(rh.node).symbol,
        })
    }

    pub fn total_weight(&self, id: TripleId) -> Result<f64> {
        let (l, _) = self.triple_half_edges(id)?;
        Ok(self.registry.pair(self.half_edges[l.0].pair).total_weight)
    }

    pub fn find_triple(&self, statement: &Statement) -> Option<TripleId> {
        let s = self.vocabulary.index_of(&statement.subject)?;
        let o = self.vocabulary.index_of(&statement.object)?;
        let p = self.registry.resolve(&statement.predicate)?;
        let key = match p.direction {
            Direction::Forward => (s, p.pair, o),
            Direction::Backward => (o, p.pair, s),
        };
        self.triple_index.get(&key).copied()
    }

    /// `(o, backward, s)` for a stored `(s, forward, o)`.
    pub fn converse_of(&self, id: TripleId) -> Result<Statement> {
        self.converse_statement(&self.triple(id)?)
    }

    /// Swaps subject and object and replaces the predicate by its converse name.
    pub fn converse_statement(&self, statement: &Statement) -> Result<Statement> {
        let converse = self
            .registry
            .converse_name(&statement.predicate)
            .ok_or_else(|| GraphError::UnknownPredicate(statement.predicate.clone()))?;
        Ok(Statement {
            subject: statement.object.clone(),
            predicate: converse.to_owned(),
            object: statement.subject.clone(),
        })
    }

    /// Every half-edge owned by `node`, paired or not.
    pub fn corollas_of(&self, node: &str) -> Result<Vec<Corolla>> {
        let idx = self.node_index(node)?;
        if !self.in_graph[idx] {
            return Err(GraphError::UnknownNode(node.to_owned()));
        }
        self.by_node[idx].iter().map(|&h| self.corolla(h)).collect()
    }

    /// Checks pairing, involution and weight-conservation laws.
    pub fn validate_graph(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for (i, partner) in self.involution.iter().enumerate() {
            let f = HalfEdgeId(i);
            match *partner {
                None => report.unpaired.push(f),
                Some(g) if g == f => report.involution.push(InvolutionViolation::FixedPoint(f)),
                Some(g) => match self.involution.get(g.0).copied().flatten() {
                    Some(back) if back == f => {}
                    other => report.involution.push(InvolutionViolation::NotSelfInverse { half_edge: f, image: g, back: other }),
                },
            }
        }
        for (t, &(l, r)) in self.triples.iter().enumerate() {
            let id = TripleId(t);
            let lh = &self.half_edges[l.0];
            let rh = &self.half_edges[r.0];
            let total = self.registry.pair(lh.pair).total_weight;
            if total == 0.0 {
                report.inert.push(id);
            }
            if lh.weight == HalfWeight::Symbolic && rh.weight == HalfWeight::Symbolic && lh.pair == rh.pair {
                // +p/2 and -p/2 of one registered p cancel by construction
                continue;
            }
            let wl = self.half_weight(l).expect("valid id");
            let wr = self.half_weight(r).expect("valid id");
            if wl + wr != 0.0 {
                report.weights.push(WeightViolation::NonZeroSum { triple: id, sum: wl + wr });
            }
            let modulus = wl.abs() + wr.abs();
            if (modulus - total).abs() > MODULUS_TOLERANCE {
                report.weights.push(WeightViolation::ModulusMismatch { triple: id, modulus, expected: total });
            }
        }
        report
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InvolutionViolation {
    FixedPoint(HalfEdgeId),
    NotSelfInverse { half_edge: HalfEdgeId, image: HalfEdgeId, back: Option<HalfEdgeId> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightViolation {
    NonZeroSum { triple: TripleId, sum: f64 },
    ModulusMismatch { triple: TripleId, modulus: f64, expected: f64 },
}

/// Problems found by [`CorollaGraph::validate_graph`].
///
/// `inert` lists edges whose predicate pair has weight 0; they are reported
/// but do not make the graph invalid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub unpaired: Vec<HalfEdgeId>,
    pub involution: Vec<InvolutionViolation>,
    pub weights: Vec<WeightViolation>,
    pub inert: Vec<TripleId>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.unpaired.is_empty() && self.involution.is_empty() && self.weights.is_empty()
    }

    pub fn issue_count(&self) -> usize {
        self.unpaired.len() + self.involution.len() + self.weights.len()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for h in &self.unpaired {
            writeln!(f, "unpaired half-edge {h}")?;
        }
        for v in &self.involution {
            match v {
                InvolutionViolation::FixedPoint(h) => writeln!(f, "involution fixes {h}")?,
                InvolutionViolation::NotSelfInverse { half_edge, image, back } => {
                    let back = back.map_or("nothing".to_owned(), |b| b.to_string());
                    writeln!(f, "involution not self-inverse: {half_edge} -> {image} -> {back}")?
                }
            }
        }
        for w in &self.weights {
            match w {
                WeightViolation::NonZeroSum { triple, sum } => {
                    writeln!(f, "{triple}: half-weights sum to {sum}, expected 0")?
                }
                WeightViolation::ModulusMismatch { triple, modulus, expected } => {
                    writeln!(f, "{triple}: half-weight moduli sum to {modulus}, registered {expected}")?
                }
            }
        }
        for t in &self.inert {
            writeln!(f, "warning: {t} is semantically inert (weight 0)")?;
        }
        Ok(())
    }
}
