//! Complex linear-algebra substrate.
//!
//! State vectors, density matrices, tensor products, partial traces, Schmidt
//! decomposition and entropy functionals with a configurable logarithm base.
//! All values are immutable once built; every operation is a pure function.
//!
//! Tensor products use row-major ordering: the left factor is the most
//! significant digit, so `|i⟩ ⊗ |j⟩` lives at flattened index `i * d_b + j`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

/// Tolerance on `Σ|α|² = 1` for state vectors.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Tolerance on Hermiticity and unit trace of density matrices.
pub const MATRIX_TOLERANCE: f64 = 1e-12;
/// Eigenvalues down to this negative value are treated as round-off and clamped to zero.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Schmidt coefficients at or below this value are dropped from the decomposition.
const SCHMIDT_CUTOFF: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QlaError {
    #[error("state vector is empty")]
    EmptyVector,
    #[error("state vector has zero norm")]
    ZeroVector,
    #[error("amplitude {index} is not finite")]
    NonFinite { index: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("probabilities sum to {sum}, expected 1")]
    ProbabilityMismatch { sum: f64 },
    #[error("probability {0} is negative")]
    NegativeProbability(f64),
    #[error("ensemble is empty")]
    EmptyEnsemble,
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    InvalidTrace(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("logarithm base must be finite and greater than 1, got {0}")]
    InvalidBase(f64),
}

pub type Result<T> = std::result::Result<T, QlaError>;

/// Logarithm base used by the entropy functionals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBase(f64);

impl LogBase {
    /// Bits.
    pub const BITS: LogBase = LogBase(2.0);
    /// Nats.
    pub const NATS: LogBase = LogBase(std::f64::consts::E);

    pub fn new(base: f64) -> Result<Self> {
        if base.is_finite() && base > 1.0 {
            Ok(LogBase(base))
        } else {
            Err(QlaError::InvalidBase(base))
        }
    }

    /// Base equal to a Hilbert-space dimension, so that a maximally mixed
    /// state of that dimension carries exactly one unit of entropy.
    pub fn dimension(d: usize) -> Result<Self> {
        Self::new(d as f64)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn log(self, x: f64) -> f64 {
        if self.0 == 2.0 {
            x.log2()
        } else {
            x.ln() / self.0.ln()
        }
    }
}

impl Default for LogBase {
    fn default() -> Self {
        LogBase::BITS
    }
}

/// `−Σ p log p` with `0 log 0 = 0`.
pub fn shannon_entropy<I: IntoIterator<Item = f64>>(probabilities: I, base: LogBase) -> f64 {
    let s: f64 = probabilities
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| p * base.log(p))
        .sum();
    // -0.0 for pure distributions
    (-s).max(0.0)
}

/// A normalized pure state in a `dim`-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Normalizes `amplitudes` by their Euclidean norm.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(QlaError::EmptyVector);
        }
        if let Some(index) = amplitudes.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QlaError::NonFinite { index });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QlaError::ZeroVector);
        }
        Ok(StateVector {
            amplitudes: amplitudes.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(QlaError::EmptyVector);
        }
        if index >= dim {
            return Err(QlaError::DimensionMismatch { expected: dim, actual: index + 1 });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Outcome probabilities `|α_i|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`; insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Equality up to global phase.
    pub fn approx_eq(&self, other: &StateVector) -> bool {
        self.fidelity(other).map(|f| f >= 1.0 - NORM_TOLERANCE).unwrap_or(false)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if a.im == 0.0 {
                write!(f, "{:.6}", a.re)?;
            } else {
                write!(f, "{:.6}{:+.6}i", a.re, a.im)?;
            }
        }
        write!(f, "]")
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(QlaError::DimensionMismatch { expected, actual })
    }
}

/// Normalizes the given amplitudes into a state vector.
pub fn make_state(amplitudes: &[Complex64]) -> Result<StateVector> {
    StateVector::new(amplitudes.to_vec())
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &StateVector, b: &StateVector) -> StateVector {
    let amplitudes = a
        .amplitudes
        .iter()
        .flat_map(|x| b.amplitudes.iter().map(move |y| x * y))
        .collect();
    StateVector { amplitudes }
}

/// Which factor of a bipartite system to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates all density-matrix invariants.
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(QlaError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(QlaError::EmptyVector);
        }
        let deviation = (&entries - entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if deviation > MATRIX_TOLERANCE {
            return Err(QlaError::NotHermitian(deviation));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > MATRIX_TOLERANCE || trace.im.abs() > MATRIX_TOLERANCE {
            return Err(QlaError::InvalidTrace(trace.re));
        }
        let rho = DensityMatrix { entries };
        let min = rho.raw_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOLERANCE {
            return Err(QlaError::NotPositive(min));
        }
        Ok(rho)
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(QlaError::EmptyVector);
        }
        let w = Complex64::new(1.0 / dim as f64, 0.0);
        Ok(DensityMatrix { entries: DMatrix::from_diagonal_element(dim, dim, w) })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `U ρ U†` for a unitary `U`. The caller is responsible for unitarity.
    pub fn conjugate_by(&self, unitary: &DMatrix<Complex64>) -> Result<Self> {
        check_dim(self.dim(), unitary.nrows())?;
        let rotated = unitary * &self.entries * unitary.adjoint();
        // re-symmetrize so round-off does not accumulate into a non-Hermitian result
        let entries = (&rotated + rotated.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(DensityMatrix { entries })
    }

    fn raw_eigenvalues(&self) -> Vec<f64> {
        self.entries.clone().symmetric_eigenvalues().iter().copied().collect()
    }

    /// Eigenvalues in non-increasing order, with round-off negatives clamped to 0.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self
            .raw_eigenvalues()
            .into_iter()
            .map(|v| if (-PSD_TOLERANCE..0.0).contains(&v) { 0.0 } else { v })
            .collect();
        values.sort_by(|a, b| b.total_cmp(a));
        values
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }
}

/// Rank-one projector `|ψ⟩⟨ψ|`.
pub fn outer(state: &StateVector) -> DensityMatrix {
    let d = state.dim();
    let a = &state.amplitudes;
    DensityMatrix { entries: DMatrix::from_fn(d, d, |i, j| a[i] * a[j].conj()) }
}

/// `Σ p_k |ψ_k⟩⟨ψ_k|`.
pub fn mix(ensemble: &[(f64, StateVector)]) -> Result<DensityMatrix> {
    let Some((_, first)) = ensemble.first() else {
        return Err(QlaError::EmptyEnsemble);
    };
    let d = first.dim();
    let mut sum = 0.0;
    for (p, s) in ensemble {
        if *p < 0.0 || !p.is_finite() {
            return Err(QlaError::NegativeProbability(*p));
        }
        check_dim(d, s.dim())?;
        sum += p;
    }
    if (sum - 1.0).abs() > NORM_TOLERANCE {
        return Err(QlaError::ProbabilityMismatch { sum });
    }
    if let [(_, only)] = ensemble {
        return Ok(outer(only));
    }
    let mut entries = DMatrix::zeros(d, d);
    for (p, s) in ensemble {
        let a = &s.amplitudes;
        for i in 0..d {
            for j in 0..d {
                entries[(i, j)] += a[i] * a[j].conj() * *p;
            }
        }
    }
    Ok(DensityMatrix { entries })
}

/// Reduced density matrix of one factor of a `d_a × d_b` system.
pub fn partial_trace(rho: &DensityMatrix, dims: (usize, usize), keep: Subsystem) -> Result<DensityMatrix> {
    let (da, db) = dims;
    check_dim(da * db, rho.dim())?;
    let m = &rho.entries;
    let entries = match keep {
        Subsystem::A => DMatrix::from_fn(da, da, |i, k| (0..db).map(|j| m[(i * db + j, k * db + j)]).sum()),
        Subsystem::B => DMatrix::from_fn(db, db, |j, l| (0..da).map(|i| m[(i * db + j, i * db + l)]).sum()),
    };
    Ok(DensityMatrix { entries })
}

/// `Σ λ_i |μ_i⟩_A ⊗ |v_i⟩_B` with non-increasing `λ_i > 0`.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_basis: Vec<StateVector>,
    pub right_basis: Vec<StateVector>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn reconstruct(&self) -> StateVector {
        let da = self.left_basis[0].dim();
        let db = self.right_basis[0].dim();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); da * db];
        for ((lambda, mu), v) in self.coefficients.iter().zip(&self.left_basis).zip(&self.right_basis) {
            for (i, x) in mu.amplitudes.iter().enumerate() {
                for (j, y) in v.amplitudes.iter().enumerate() {
                    amplitudes[i * db + j] += x * y * *lambda;
                }
            }
        }
        StateVector { amplitudes }
    }

    /// `−Σ λ_i² log λ_i²`.
    pub fn entropy(&self, base: LogBase) -> f64 {
        shannon_entropy(self.coefficients.iter().map(|c| c * c), base)
    }
}

/// Schmidt decomposition via the singular values of the `d_a × d_b`
/// reshaped amplitude matrix.
pub fn schmidt(state: &StateVector, dims: (usize, usize)) -> Result<SchmidtDecomposition> {
    let (da, db) = dims;
    check_dim(da * db, state.dim())?;
    let m = DMatrix::from_fn(da, db, |i, j| state.amplitudes[i * db + j]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut coefficients = Vec::new();
    let mut left_basis = Vec::new();
    let mut right_basis = Vec::new();
    for k in order {
        let lambda = svd.singular_values[k];
        if lambda <= SCHMIDT_CUTOFF {
            continue;
        }
        coefficients.push(lambda);
        left_basis.push(StateVector { amplitudes: u.column(k).iter().copied().collect() });
        right_basis.push(StateVector { amplitudes: v_t.row(k).iter().copied().collect() });
    }
    Ok(SchmidtDecomposition { coefficients, left_basis, right_basis })
}

/// `S = −Σ λ log λ` over the eigenvalues of `rho`.
pub fn von_neumann_entropy(rho: &DensityMatrix, base: LogBase) -> f64 {
    shannon_entropy(rho.eigenvalues(), base)
}

/// Entropy of entanglement of a bipartite pure state, from its Schmidt coefficients.
pub fn entanglement_entropy(state: &StateVector, dims: (usize, usize), base: LogBase) -> Result<f64> {
    Ok(schmidt(state, dims)?.entropy(base))
}
