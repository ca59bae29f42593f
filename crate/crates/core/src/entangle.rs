//! Physical-layer simulation of joined corollas.
//!
//! A triple's predicate weight `p` (bits) is realized as a bipartite state
//! `√λ |iL⟩⊗|iR⟩ + √(1−λ) |jL⟩⊗|jR⟩` whose entanglement entropy is `p`,
//! where `λ ∈ [0, 1/2]` solves `H2(λ) = p`. Two Schmidt terms cap the
//! reachable entropy at one bit, the Bell-state ceiling.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corolla::{CorollaGraph, GraphError, TripleId};
use crate::qla::{self, LogBase, QlaError, StateVector};
use crate::qusym::Vocabulary;

/// Bisection stops once the bracket on `λ` is narrower than this.
pub const BISECTION_TOLERANCE: f64 = 1e-10;
const MAX_BISECTION_STEPS: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntangleError {
    #[error("target entropy {0} is outside [0, 1] bits")]
    WeightOutOfRange(f64),
    #[error("basis choice {0:?} repeats an index on one side")]
    DegenerateBasis(BasisChoice),
    #[error("basis index {index} out of range for dimension {dim}")]
    BasisOutOfRange { index: usize, dim: usize },
    #[error("unknown triple pattern {0:?}")]
    UnknownPattern(String),
    #[error("triple pattern {0:?} declared twice")]
    DuplicatePattern(String),
    #[error("unknown Bell state label {0:?}")]
    UnknownBellLabel(String),
    #[error("shot count must be at least 1")]
    InvalidShots,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Qla(#[from] QlaError),
}

pub type Result<T> = std::result::Result<T, EntangleError>;

/// Binary entropy `H2(λ)` in bits.
pub fn binary_entropy(lambda: f64) -> f64 {
    qla::shannon_entropy([lambda, 1.0 - lambda], LogBase::BITS)
}

/// Smallest `λ ∈ [0, 1/2]` with `H2(λ) = p`, by bisection.
pub fn invert_binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(EntangleError::WeightOutOfRange(p));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= BISECTION_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Support of the two Schmidt terms: `(iL, jL)` on the left factor and
/// `(iR, jR)` on the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisChoice {
    pub left: (usize, usize),
    pub right: (usize, usize),
}

impl BasisChoice {
    pub const QUBIT: BasisChoice = BasisChoice { left: (0, 1), right: (0, 1) };

    fn check(&self, dims: (usize, usize)) -> Result<()> {
        if self.left.0 == self.left.1 || self.right.0 == self.right.1 {
            return Err(EntangleError::DegenerateBasis(*self));
        }
        for (index, dim) in [
            (self.left.0, dims.0),
            (self.left.1, dims.0),
            (self.right.0, dims.1),
            (self.right.1, dims.1),
        ] {
            if index >= dim {
                return Err(EntangleError::BasisOutOfRange { index, dim });
            }
        }
        Ok(())
    }
}

/// `√λ |iL⟩⊗|iR⟩ + √(1−λ) |jL⟩⊗|jR⟩` with `H2(λ) = p`. Returns the state and `λ`.
pub fn two_term_state(p: f64, dims: (usize, usize), basis: BasisChoice) -> Result<(StateVector, f64)> {
    let lambda = invert_binary_entropy(p)?;
    basis.check(dims)?;
    let (da, db) = dims;
    let mut amps = vec![Complex64::new(0.0, 0.0); da * db];
    amps[basis.left.0 * db + basis.right.0] += Complex64::new(lambda.sqrt(), 0.0);
    amps[basis.left.1 * db + basis.right.1] += Complex64::new((1.0 - lambda).sqrt(), 0.0);
    Ok((StateVector::new(amps)?, lambda))
}

/// Bipartite state realizing one triple's predicate weight.
///
/// The state is held on its support: `local` is the two-qubit state over
/// `{iL, jL} ⊗ {iR, jR}`, local index 0 standing for the `i` vector and 1 for
/// the `j` vector. The embedding into the full `dA × dB` space is an isometry
/// on each factor, so Schmidt coefficients and outcome statistics agree.
#[derive(Debug, Clone)]
pub struct JointState {
    pub local: StateVector,
    pub dims: (usize, usize),
    pub left: Arc<Vocabulary>,
    pub right: Arc<Vocabulary>,
    /// Bits.
    pub target_entropy: f64,
    pub lambda: f64,
    pub basis: BasisChoice,
    pub triple: TripleId,
}

/// Default support: the subject and object basis vectors on both sides, so
/// the dominant Schmidt term is `|s⟩⊗|o⟩`. Falls back to `(0, 1)` for
/// self-loops.
pub fn default_basis(graph: &CorollaGraph, triple: TripleId) -> Result<BasisChoice> {
    let (l, r) = graph.triple_half_edges(triple)?;
    let s = graph.corolla(l)?.node.index;
    let o = graph.corolla(r)?.node.index;
    Ok(if s != o { BasisChoice { left: (o, s), right: (s, o) } } else { BasisChoice::QUBIT })
}

/// Synthesizes the joint state of a stored triple; `basis` defaults to
/// [`default_basis`].
pub fn synthesize_joint_state(
    graph: &CorollaGraph,
    triple: TripleId,
    basis: Option<BasisChoice>,
) -> Result<JointState> {
    let p = graph.total_weight(triple)?;
    let basis = match basis {
        Some(b) => b,
        None => default_basis(graph, triple)?,
    };
    let voc = Arc::clone(graph.vocabulary());
    let dims = (voc.d(), voc.d());
    basis.check(dims)?;
    let (local, lambda) = two_term_state(p, (2, 2), BasisChoice::QUBIT)?;
    Ok(JointState {
        local,
        dims,
        left: Arc::clone(&voc),
        right: voc,
        target_entropy: p,
        lambda,
        basis,
        triple,
    })
}

impl JointState {
    /// Full-space index of local outcome `k` (`0..4`).
    pub fn outcome_index(&self, k: usize) -> usize {
        let pick = |pair: (usize, usize), bit: usize| if bit == 0 { pair.0 } else { pair.1 };
        pick(self.basis.left, k / 2) * self.dims.1 + pick(self.basis.right, k % 2)
    }

    /// The state in the full `dA × dB` space.
    pub fn full_state(&self) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dims.0 * self.dims.1];
        for (k, a) in self.local.amplitudes().iter().enumerate() {
            amps[self.outcome_index(k)] += a;
        }
        StateVector::new(amps).expect("embedding preserves the norm")
    }

    /// `(left symbol, right symbol)` of a full-space outcome index.
    pub fn outcome_symbols(&self, index: usize) -> (&str, &str) {
        let l = self.left.symbol(index / self.dims.1).expect("index in range");
        let r = self.right.symbol(index % self.dims.1).expect("index in range");
        (l, r)
    }
}

/// Entanglement entropy of a joint state, in bits.
pub fn measure_entanglement(joint: &JointState) -> f64 {
    measure_entanglement_in(joint, LogBase::BITS)
}

pub fn measure_entanglement_in(joint: &JointState, base: LogBase) -> f64 {
    qla::entanglement_entropy(&joint.local, (2, 2), base).expect("local state is two-qubit")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [BellLabel::PhiPlus, BellLabel::PhiMinus, BellLabel::PsiPlus, BellLabel::PsiMinus];
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellLabel::PhiPlus => "Phi+",
            BellLabel::PhiMinus => "Phi-",
            BellLabel::PsiPlus => "Psi+",
            BellLabel::PsiMinus => "Psi-",
        })
    }
}

impl FromStr for BellLabel {
    type Err = EntangleError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Phi+" | "Φ+" => Ok(BellLabel::PhiPlus),
            "Phi-" | "Φ-" | "Φ−" => Ok(BellLabel::PhiMinus),
            "Psi+" | "Ψ+" => Ok(BellLabel::PsiPlus),
            "Psi-" | "Ψ-" | "Ψ−" => Ok(BellLabel::PsiMinus),
            _ => Err(EntangleError::UnknownBellLabel(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellState {
    pub label: BellLabel,
    pub state: StateVector,
}

impl BellState {
    pub fn new(label: BellLabel) -> Self {
        let amps: [f64; 4] = match label {
            BellLabel::PhiPlus => [1.0, 0.0, 0.0, 1.0],
            BellLabel::PhiMinus => [1.0, 0.0, 0.0, -1.0],
            BellLabel::PsiPlus => [0.0, 1.0, 1.0, 0.0],
            BellLabel::PsiMinus => [0.0, 1.0, -1.0, 0.0],
        };
        let state = StateVector::from_real(&amps).expect("non-zero");
        BellState { label, state }
    }
}

/// `Φ±` and `Ψ±`, in that order.
pub fn bell_states() -> [BellState; 4] {
    BellLabel::ALL.map(BellState::new)
}

/// Assignment of triple metapattern tags to Bell states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternConfig {
    entries: Vec<(String, BellLabel)>,
}

impl PatternConfig {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, BellLabel)>,
        S: Into<String>,
    {
        let mut out: Vec<(String, BellLabel)> = Vec::new();
        for (tag, label) in entries {
            let tag = tag.into();
            if out.iter().any(|(t, _)| *t == tag) {
                return Err(EntangleError::DuplicatePattern(tag));
            }
            out.push((tag, label));
        }
        Ok(PatternConfig { entries: out })
    }

    /// Parses `tag = label` lines, e.g. `1 = Phi+`; `#` comments skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (tag, label) = line
                .split_once('=')
                .ok_or_else(|| EntangleError::UnknownBellLabel(line.to_owned()))?;
            entries.push((tag.trim().to_owned(), label.trim().parse()?));
        }
        Self::new(entries)
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(t, _)| t.as_str())
    }
}

impl Default for PatternConfig {
    /// Tags `1`..`4` in declaration order onto `Φ+, Φ−, Ψ+, Ψ−`.
    fn default() -> Self {
        PatternConfig {
            entries: BellLabel::ALL
                .iter()
                .enumerate()
                .map(|(i, &l)| ((i + 1).to_string(), l))
                .collect(),
        }
    }
}

pub fn map_triple_pattern(pattern: &str, config: &PatternConfig) -> Result<BellState> {
    config
        .entries
        .iter()
        .find(|(t, _)| t == pattern)
        .map(|&(_, label)| BellState::new(label))
        .ok_or_else(|| EntangleError::UnknownPattern(pattern.to_owned()))
}

/// Outcome counts of repeated computational-basis measurements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub seed: u64,
    pub shots: u64,
    /// Basis index to number of shots; outcomes never observed are absent.
    pub counts: BTreeMap<usize, u64>,
}

impl MeasurementRecord {
    pub fn count(&self, outcome: usize) -> u64 {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    pub fn frequency(&self, outcome: usize) -> f64 {
        self.count(outcome) as f64 / self.shots as f64
    }
}

fn sample_counts(probs: &[f64], shots: u64, seed: u64) -> Result<BTreeMap<usize, u64>> {
    if shots == 0 {
        return Err(EntangleError::InvalidShots);
    }
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let last = probs.iter().rposition(|&p| p > 0.0).expect("normalized state");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let k = cumulative.partition_point(|&c| c <= u).min(last);
        counts[k] += 1;
    }
    Ok(counts.into_iter().enumerate().filter(|&(_, c)| c > 0).collect())
}

/// Samples `shots` independent projective measurements. The generator is
/// ChaCha8 seeded from `seed` alone, so equal seeds give equal records.
pub fn measure(state: &StateVector, shots: u64, seed: u64) -> Result<MeasurementRecord> {
    let counts = sample_counts(&state.probabilities(), shots, seed)?;
    Ok(MeasurementRecord { seed, shots, counts })
}

/// Measures a joint state in the full product basis. Sampling runs on the
/// local support; outcome indices refer to the full `dA × dB` space.
pub fn measure_joint(joint: &JointState, shots: u64, seed: u64) -> Result<MeasurementRecord> {
    let local = sample_counts(&joint.local.probabilities(), shots, seed)?;
    let mut counts = BTreeMap::new();
    for (k, c) in local {
        *counts.entry(joint.outcome_index(k)).or_insert(0) += c;
    }
    Ok(MeasurementRecord { seed, shots, counts })
}

/// Rounds a noisy amplitude vector onto the nearest vocabulary basis state.
/// Returns the winning symbol and its fidelity; ties go to the lowest index.
pub fn tessellate_round<'v>(noisy: &[Complex64], voc: &'v Vocabulary) -> Result<(&'v str, f64)> {
    if noisy.len() != voc.d() {
        return Err(QlaError::DimensionMismatch { expected: voc.d(), actual: noisy.len() }.into());
    }
    let state = StateVector::new(noisy.to_vec())?;
    let mut best = (0, f64::NEG_INFINITY);
    for (i, p) in state.probabilities().into_iter().enumerate() {
        if p > best.1 {
            best = (i, p);
        }
    }
    Ok((voc.symbol(best.0).expect("index in range"), best.1))
}
