//! Quantum-corolla knowledge representation.
//!
//! Finite symbol vocabularies are encoded as qusym states (qudits of any
//! dimension `d ≥ 1`). A semantic triple `(s, p, o)` is a pair of corollas,
//! each a node owning one directed predicate, joined by a half-edge
//! involution. The predicate pair carries an entanglement weight in bits that
//! is realized physically as the entanglement entropy of a bipartite state.
//!
//! - [`qla`]: state vectors, density matrices, partial trace, Schmidt
//!   decomposition and entropies in any logarithm base.
//! - [`qusym`]: vocabularies, one-hot encoding, ensembles, grammar checks and
//!   string-entropy scaling.
//! - [`corolla`]: converse registry, corollas, involution and triples.
//! - [`entangle`]: joint-state synthesis, Bell states, sampling and
//!   tessellated rounding.
//! - [`vsa`]: XOR and tensor binding over binary hypervectors.
//! - [`store`]: file formats, ingestion, JSONL export and snapshots.

#![forbid(unsafe_code)]

pub mod corolla;
pub mod entangle;
pub mod qla;
pub mod qusym;
pub mod store;
pub mod vsa;

pub use num_complex::Complex64;
