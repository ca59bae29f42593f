//! Quantum symbols over finite vocabularies.
//!
//! A [`Vocabulary`] one-hot maps each of its `d` symbols onto a basis vector
//! of a `d`-dimensional Hilbert space; a [`Qusym`] is a state in that space.
//! Also hosts grammar-closure validation and the horizontal/vertical string
//! entropy calculators.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::qla::{DensityMatrix, LogBase, QlaError, StateVector, NORM_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QusymError {
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("duplicate symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("invalid symbol {0:?}: symbols are non-empty and contain no whitespace")]
    InvalidSymbol(String),
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("weights sum to {sum}, expected 1")]
    ProbabilityMismatch { sum: f64 },
    #[error("weight for {symbol:?} is negative or not finite: {weight}")]
    InvalidWeight { symbol: String, weight: f64 },
    #[error("string length must be at least 1")]
    InvalidLength,
    #[error("encoding base must be at least 2, got {0}")]
    InvalidBase(u32),
    #[error("empty {0} axis")]
    EmptyAxis(&'static str),
    #[error(transparent)]
    Qla(#[from] QlaError),
}

pub type Result<T> = std::result::Result<T, QusymError>;

/// Non-empty and whitespace free.
pub fn is_valid_symbol(symbol: &str) -> bool {
    !symbol.is_empty() && !symbol.chars().any(char::is_whitespace)
}

/// Ordered set of distinct symbols; position `i` is basis vector `|i⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut entries = Vec::new();
        let mut index = HashMap::new();
        for symbol in symbols {
            let symbol = symbol.into();
            if !is_valid_symbol(&symbol) {
                return Err(QusymError::InvalidSymbol(symbol));
            }
            if index.contains_key(&symbol) {
                return Err(QusymError::DuplicateSymbol(symbol));
            }
            index.insert(symbol.clone(), entries.len());
            entries.push(symbol);
        }
        if entries.is_empty() {
            return Err(QusymError::EmptyVocabulary);
        }
        Ok(Vocabulary { entries, index })
    }

    /// Parses the vocabulary file format: one symbol per line, `#` comment
    /// lines and blank lines skipped. Symbols are numbered in order of appearance.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    /// Canonical file form, LF terminated.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for symbol in &self.entries {
            out.push_str(symbol);
            out.push('\n');
        }
        out
    }

    pub fn d(&self) -> usize {
        self.entries.len()
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, index: usize) -> Option<&str> {
        self.entries.get(index).map(String::as_str)
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.index.contains_key(symbol)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    /// Base-`d` logarithm, or `None` for the degenerate single-symbol space.
    pub fn entropy_base(&self) -> Option<LogBase> {
        LogBase::dimension(self.d()).ok()
    }
}

/// Builds a vocabulary whose `i`-th symbol maps to basis vector `|i⟩`.
pub fn vocabulary_from_symbols<S: AsRef<str>>(symbols: &[S]) -> Result<Vocabulary> {
    Vocabulary::new(symbols.iter().map(|s| s.as_ref().to_owned()))
}

/// A state over the basis spanned by a vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Qusym {
    vocabulary: Arc<Vocabulary>,
    state: StateVector,
}

impl Qusym {
    pub fn new(vocabulary: Arc<Vocabulary>, state: StateVector) -> Result<Self> {
        if state.dim() != vocabulary.d() {
            return Err(QlaError::DimensionMismatch { expected: vocabulary.d(), actual: state.dim() }.into());
        }
        Ok(Qusym { vocabulary, state })
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocabulary
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    /// The symbol this qusym is a pure basis state of, if it is one.
    pub fn decode(&self) -> Option<&str> {
        let probs = self.state.probabilities();
        let (idx, p) = probs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
        if (p - 1.0).abs() <= NORM_TOLERANCE {
            self.vocabulary.symbol(idx)
        } else {
            None
        }
    }
}

/// One-hot encoding of `symbol`.
pub fn encode_symbol(voc: &Arc<Vocabulary>, symbol: &str) -> Result<Qusym> {
    let idx = voc
        .index_of(symbol)
        .ok_or_else(|| QusymError::UnknownSymbol(symbol.to_owned()))?;
    let state = StateVector::basis(voc.d(), idx)?;
    Ok(Qusym { vocabulary: Arc::clone(voc), state })
}

/// Diagonal density matrix of a probabilistic choice of symbols.
/// Symbols absent from `weights` get probability zero.
pub fn qusym_ensemble<I, S>(voc: &Vocabulary, weights: I) -> Result<DensityMatrix>
where
    I: IntoIterator<Item = (S, f64)>,
    S: AsRef<str>,
{
    let mut diag = vec![0.0; voc.d()];
    for (symbol, w) in weights {
        let symbol = symbol.as_ref();
        let idx = voc
            .index_of(symbol)
            .ok_or_else(|| QusymError::UnknownSymbol(symbol.to_owned()))?;
        if !w.is_finite() || w < 0.0 {
            return Err(QusymError::InvalidWeight { symbol: symbol.to_owned(), weight: w });
        }
        diag[idx] += w;
    }
    let sum: f64 = diag.iter().sum();
    if (sum - 1.0).abs() > NORM_TOLERANCE {
        return Err(QusymError::ProbabilityMismatch { sum });
    }
    let d = voc.d();
    let m = DMatrix::from_fn(d, d, |i, j| if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    Ok(DensityMatrix::from_matrix(m)?)
}

/// Information content of all strings of a given length over a given base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StringEntropy {
    pub length: u32,
    pub base: u32,
    /// `length · log2(base)`.
    pub bits: f64,
    /// `base^length`, or `None` when it does not fit in a `u128`.
    pub string_count: Option<u128>,
}

impl StringEntropy {
    pub fn overflowed(&self) -> bool {
        self.string_count.is_none()
    }
}

pub fn string_entropy(length: u32, base: u32) -> Result<StringEntropy> {
    if length == 0 {
        return Err(QusymError::InvalidLength);
    }
    if base < 2 {
        return Err(QusymError::InvalidBase(base));
    }
    Ok(StringEntropy {
        length,
        base,
        bits: f64::from(length) * f64::from(base).log2(),
        string_count: u128::from(base).checked_pow(length),
    })
}

/// Cross product of `lengths × bases`, length-major.
pub fn scaling_table(lengths: &[u32], bases: &[u32]) -> Result<Vec<StringEntropy>> {
    if lengths.is_empty() {
        return Err(QusymError::EmptyAxis("length"));
    }
    if bases.is_empty() {
        return Err(QusymError::EmptyAxis("base"));
    }
    lengths
        .iter()
        .flat_map(|&l| bases.iter().map(move |&b| string_entropy(l, b)))
        .collect()
}

type RuleFn = dyn Fn(&[&str]) -> bool + Send + Sync;

/// Named closure rule over the tokenized candidate.
#[derive(Clone)]
pub struct Rule {
    name: String,
    check: Arc<RuleFn>,
}

impl Rule {
    pub fn new(name: impl Into<String>, check: impl Fn(&[&str]) -> bool + Send + Sync + 'static) -> Self {
        Rule { name: name.into(), check: Arc::new(check) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Rule").field("name", &self.name).finish_non_exhaustive()
    }
}

/// Symbol set plus closure rules; accepts exactly the strings over the
/// symbol set that satisfy every rule.
#[derive(Debug, Clone, Default)]
pub struct Grammar {
    symbols: BTreeSet<String>,
    rules: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    /// No symbol of the grammar matches at byte offset `position`.
    UnknownSymbol { position: usize, found: String },
    RuleFailed { rule: String },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::UnknownSymbol { position, found } => {
                write!(f, "symbol {found:?} at offset {position} is not in the grammar")
            }
            Rejection::RuleFailed { rule } => write!(f, "rule {rule:?} failed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validation {
    Accept { tokens: Vec<String> },
    Reject(Rejection),
}

impl Validation {
    pub fn is_accept(&self) -> bool {
        matches!(self, Validation::Accept { .. })
    }
}

impl Grammar {
    pub fn new<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut set = BTreeSet::new();
        for s in symbols {
            let s = s.into();
            if !is_valid_symbol(&s) {
                return Err(QusymError::InvalidSymbol(s));
            }
            set.insert(s);
        }
        Ok(Grammar { symbols: set, rules: Vec::new() })
    }

    pub fn from_vocabulary(voc: &Vocabulary) -> Self {
        Grammar { symbols: voc.symbols().map(str::to_owned).collect(), rules: Vec::new() }
    }

    pub fn with_rule(mut self, rule: Rule) -> Self {
        self.rules.push(rule);
        self
    }

    pub fn symbols(&self) -> &BTreeSet<String> {
        &self.symbols
    }

    /// Splits `candidate` into grammar symbols. Whitespace separates tokens
    /// and is otherwise ignored; within a run, any segmentation is accepted,
    /// preferring longer symbols first.
    fn tokenize<'a>(&self, candidate: &'a str) -> std::result::Result<Vec<&'a str>, Rejection> {
        let mut tokens = Vec::new();
        let mut offset = 0;
        for chunk in candidate.split(char::is_whitespace) {
            let chunk_start = offset;
            offset += chunk.len() + 1;
            if chunk.is_empty() {
                continue;
            }
            // back[i] = start of the last token ending at byte i
            let n = chunk.len();
            let mut back: Vec<Option<usize>> = vec![None; n + 1];
            back[0] = Some(0);
            let mut furthest = 0;
            for i in 0..n {
                if back[i].is_none() || !chunk.is_char_boundary(i) {
                    continue;
                }
                furthest = furthest.max(i);
                for sym in &self.symbols {
                    if chunk[i..].starts_with(sym.as_str()) {
                        let end = i + sym.len();
                        if back[end].is_none() || back[end].is_some_and(|s| s > i) {
                            back[end] = Some(i);
                        }
                    }
                }
            }
            if back[n].is_none() {
                let found = chunk[furthest..].chars().next().map(String::from).unwrap_or_default();
                return Err(Rejection::UnknownSymbol { position: chunk_start + furthest, found });
            }
            let mut pieces = Vec::new();
            let mut end = n;
            while end > 0 {
                let start = back[end].expect("reachable");
                pieces.push(&chunk[start..end]);
                end = start;
            }
            pieces.reverse();
            tokens.extend(pieces);
        }
        Ok(tokens)
    }

    pub fn validate(&self, candidate: &str) -> Validation {
        let tokens = match self.tokenize(candidate) {
            Ok(t) => t,
            Err(r) => return Validation::Reject(r),
        };
        for rule in &self.rules {
            if !(rule.check)(&tokens) {
                return Validation::Reject(Rejection::RuleFailed { rule: rule.name.clone() });
            }
        }
        Validation::Accept { tokens: tokens.into_iter().map(str::to_owned).collect() }
    }
}

pub fn validate_string(grammar: &Grammar, candidate: &str) -> Validation {
    grammar.validate(candidate)
}
