//! Binary vector symbolic architecture.
//!
//! XOR binding keeps dimension `n` and is exactly invertible. Tensor binding
//! maps bits to bipolar values (`0 ↦ −1`, `1 ↦ +1`) and forms the `n × n`
//! outer product; [`compress_outer`] folds it back to `n` bits by circular
//! convolution (anti-diagonal sums) followed by sign thresholding.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VsaError {
    #[error("hypervector dimension must be at least 1")]
    ZeroDimension,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid hex digit {0:?}")]
    InvalidHex(char),
    #[error("hex string has {digits} digits, too few for {n} bits")]
    HexTooShort { digits: usize, n: usize },
    #[error("cannot bundle an empty set of vectors")]
    EmptyBundle,
}

pub type Result<T> = std::result::Result<T, VsaError>;

/// Fixed-length bit vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HyperVector {
    words: Vec<u64>,
    n: usize,
}

impl HyperVector {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(VsaError::ZeroDimension);
        }
        Ok(HyperVector { words: vec![0; n.div_ceil(64)], n })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut v = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.n, "bit {i} out of range for dimension {}", self.n);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.n, "bit {i} out of range for dimension {}", self.n);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n).map(|i| self.get(i))
    }

    /// `+1` for a set bit, `−1` otherwise.
    pub fn bipolar(&self, i: usize) -> i8 {
        if self.get(i) {
            1
        } else {
            -1
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn complement(&self) -> Self {
        let mut out = HyperVector { words: self.words.iter().map(|w| !w).collect(), n: self.n };
        out.clear_padding();
        out
    }

    fn clear_padding(&mut self) {
        let rem = self.n % 64;
        if rem != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << rem) - 1;
        }
    }

    pub fn hamming(&self, other: &HyperVector) -> Result<usize> {
        check_dims(self, other)?;
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum())
    }

    /// Hex encoding, four bits per digit, bit 0 as the most significant bit
    /// of the first digit. Trailing bits of a partial digit are zero.
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.n.div_ceil(4));
        for chunk in 0..self.n.div_ceil(4) {
            let mut nibble = 0u32;
            for k in 0..4 {
                let i = chunk * 4 + k;
                nibble <<= 1;
                if i < self.n && self.get(i) {
                    nibble |= 1;
                }
            }
            out.push(char::from_digit(nibble, 16).expect("nibble < 16"));
        }
        out
    }

    /// Inverse of [`to_hex`](Self::to_hex) with `n = 4 × digits`.
    pub fn from_hex(hex: &str) -> Result<Self> {
        Self::from_hex_bits(hex, hex.trim().chars().count() * 4)
    }

    /// Decodes the first `n` bits of a hex string.
    pub fn from_hex_bits(hex: &str, n: usize) -> Result<Self> {
        let hex = hex.trim();
        let digits = hex.chars().count();
        if digits * 4 < n {
            return Err(VsaError::HexTooShort { digits, n });
        }
        let mut v = Self::zeros(n)?;
        for (chunk, c) in hex.chars().enumerate() {
            let nibble = c.to_digit(16).ok_or(VsaError::InvalidHex(c))?;
            for k in 0..4 {
                let i = chunk * 4 + k;
                if i < n && nibble >> (3 - k) & 1 == 1 {
                    v.set(i, true);
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Debug for HyperVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HyperVector({}; {})", self.n, self.to_hex())
    }
}

impl fmt::Display for HyperVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

fn check_dims(a: &HyperVector, b: &HyperVector) -> Result<()> {
    if a.n == b.n {
        Ok(())
    } else {
        Err(VsaError::DimensionMismatch(a.n, b.n))
    }
}

/// I.i.d. uniform bits from a ChaCha8 generator seeded with `seed`.
pub fn random_hypervector(n: usize, seed: u64) -> Result<HyperVector> {
    let mut v = HyperVector::zeros(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for w in &mut v.words {
        *w = rng.random();
    }
    v.clear_padding();
    Ok(v)
}

/// Elementwise XOR; commutative, associative, self-inverse.
pub fn bind_xor(a: &HyperVector, b: &HyperVector) -> Result<HyperVector> {
    check_dims(a, b)?;
    Ok(HyperVector { words: a.words.iter().zip(&b.words).map(|(x, y)| x ^ y).collect(), n: a.n })
}

/// Recovers `b` from `a` and `a ⊕ b`.
pub fn unbind_xor(a: &HyperVector, bound: &HyperVector) -> Result<HyperVector> {
    bind_xor(a, bound)
}

/// `n × n` matrix of bipolar products, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OuterProduct {
    entries: Vec<i8>,
    n: usize,
}

impl OuterProduct {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.n + j]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// `entries[i][j] = bipolar(a[i]) · bipolar(b[j])`.
pub fn bind_tensor(a: &HyperVector, b: &HyperVector) -> Result<OuterProduct> {
    check_dims(a, b)?;
    let n = a.n;
    let bb: Vec<i8> = (0..n).map(|j| b.bipolar(j)).collect();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        let ai = a.bipolar(i);
        entries.extend(bb.iter().map(|&bj| ai * bj));
    }
    Ok(OuterProduct { entries, n })
}

/// Bit `k` is set iff `Σ_{i+j ≡ k (mod n)} entries[i][j] > 0`; zero sums give 0.
pub fn compress_outer(op: &OuterProduct) -> HyperVector {
    let n = op.n;
    let mut sums = vec![0i64; n];
    for i in 0..n {
        let row = &op.entries[i * n..(i + 1) * n];
        for (j, &e) in row.iter().enumerate() {
            let k = if i + j >= n { i + j - n } else { i + j };
            sums[k] += i64::from(e);
        }
    }
    let mut out = HyperVector::zeros(n).expect("outer products are non-empty");
    for (k, s) in sums.into_iter().enumerate() {
        if s > 0 {
            out.set(k, true);
        }
    }
    out
}

/// Fraction of agreeing positions.
pub fn similarity(a: &HyperVector, b: &HyperVector) -> Result<f64> {
    Ok(1.0 - a.hamming(b)? as f64 / a.n as f64)
}

/// Bitwise majority vote; ties resolve to 0. Not part of the core algebra,
/// provided for superposing several bound pairs.
pub fn bundle(vectors: &[HyperVector]) -> Result<HyperVector> {
    let first = vectors.first().ok_or(VsaError::EmptyBundle)?;
    for v in vectors {
        check_dims(first, v)?;
    }
    let mut out = HyperVector::zeros(first.n)?;
    for i in 0..first.n {
        let ones = vectors.iter().filter(|v| v.get(i)).count();
        if 2 * ones > vectors.len() {
            out.set(i, true);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_is_seeded() {
        let a = random_hypervector(1024, 7).unwrap();
        assert_eq!(a, random_hypervector(1024, 7).unwrap());
        assert_ne!(a, random_hypervector(1024, 8).unwrap());
        let w = a.count_ones();
        assert!((412..=612).contains(&w), "weight {w}");
        assert_eq!(random_hypervector(0, 1), Err(VsaError::ZeroDimension));
        // padding bits stay clear
        let b = random_hypervector(70, 1).unwrap();
        assert!(b.count_ones() <= 70);
        assert_eq!(b.complement().count_ones(), 70 - b.count_ones());
    }

    #[test]
    fn xor_identities() {
        let a = random_hypervector(256, 1).unwrap();
        let b = random_hypervector(256, 2).unwrap();
        let zero = HyperVector::zeros(256).unwrap();
        assert_eq!(bind_xor(&a, &a).unwrap(), zero);
        assert_eq!(bind_xor(&a, &zero).unwrap(), a);
        assert_eq!(bind_xor(&a, &b).unwrap(), bind_xor(&b, &a).unwrap());
        assert_eq!(unbind_xor(&a, &bind_xor(&a, &b).unwrap()).unwrap(), b);
        assert_eq!(unbind_xor(&a, &a).unwrap(), zero);
        let c = random_hypervector(128, 3).unwrap();
        assert_eq!(bind_xor(&a, &c), Err(VsaError::DimensionMismatch(256, 128)));
    }

    #[test]
    fn tensor_binding() {
        let a = random_hypervector(4, 11).unwrap();
        let op = bind_tensor(&a, &a).unwrap();
        assert_eq!(op.len(), 16);
        assert!(op.is_symmetric());

        let a = HyperVector::from_bits(&[true, false, true, true]).unwrap();
        let b = HyperVector::from_bits(&[false, false, true, false]).unwrap();
        let ab = bind_tensor(&a, &b).unwrap();
        let ba = bind_tensor(&b, &a).unwrap();
        assert_ne!(ab, ba);
        assert_eq!(ab.get(0, 2), 1);
        assert_eq!(ab.get(1, 0), 1);
        assert_eq!(ab.get(0, 0), -1);
    }

    #[test]
    fn compress_dimensions_and_determinism() {
        for n in [4, 64, 1024] {
            let a = random_hypervector(n, 5).unwrap();
            let b = random_hypervector(n, 6).unwrap();
            let op = bind_tensor(&a, &b).unwrap();
            let c = compress_outer(&op);
            assert_eq!(c.dim(), n);
            assert_eq!(c, compress_outer(&op));
        }
    }

    #[test]
    fn compress_small_by_hand() {
        // bipolar a = (+1, -1, +1), b = (+1, +1, -1)
        // k=0: a0b0 + a1b2 + a2b1 = 1 + 1 + 1 = 3
        // k=1: a0b1 + a1b0 + a2b2 = 1 - 1 - 1 = -1
        // k=2: a0b2 + a1b1 + a2b0 = -1 - 1 + 1 = -1
        let a = HyperVector::from_bits(&[true, false, true]).unwrap();
        let b = HyperVector::from_bits(&[true, true, false]).unwrap();
        let c = compress_outer(&bind_tensor(&a, &b).unwrap());
        assert_eq!(c.bits().collect::<Vec<_>>(), [true, false, false]);
    }

    #[test]
    fn compress_ties_go_to_zero() {
        // bipolar a = (+1, -1), b = (+1, +1): k=0 -> 1 - 1 = 0, k=1 -> 1 - 1 = 0
        let a = HyperVector::from_bits(&[true, false]).unwrap();
        let b = HyperVector::from_bits(&[true, true]).unwrap();
        let c = compress_outer(&bind_tensor(&a, &b).unwrap());
        assert_eq!(c.count_ones(), 0);
    }

    #[test]
    fn similarity_bounds() {
        let a = random_hypervector(512, 9).unwrap();
        assert_eq!(similarity(&a, &a).unwrap(), 1.0);
        assert_eq!(similarity(&a, &a.complement()).unwrap(), 0.0);
    }

    #[test]
    fn hex_encoding() {
        let v = HyperVector::from_bits(&[true, false, false, false, false, false, false, true]).unwrap();
        assert_eq!(v.to_hex(), "81");
        assert_eq!(HyperVector::from_hex("81").unwrap(), v);
        let odd = HyperVector::from_bits(&[true, true, true, true, true, true]).unwrap();
        assert_eq!(odd.to_hex(), "fc");
        assert_eq!(HyperVector::from_hex_bits("fc", 6).unwrap(), odd);
        assert_eq!(HyperVector::from_hex("zz"), Err(VsaError::InvalidHex('z')));
        assert_eq!(HyperVector::from_hex_bits("f", 8), Err(VsaError::HexTooShort { digits: 1, n: 8 }));
        assert_eq!(HyperVector::from_hex(""), Err(VsaError::ZeroDimension));
    }

    #[test]
    fn bundling_majority() {
        let a = HyperVector::from_bits(&[true, true, false, false]).unwrap();
        let b = HyperVector::from_bits(&[true, false, true, false]).unwrap();
        let c = HyperVector::from_bits(&[true, false, false, true]).unwrap();
        assert_eq!(bundle(&[a.clone(), b, c]).unwrap().bits().collect::<Vec<_>>(), [true, false, false, false]);
        assert_eq!(bundle(&[]), Err(VsaError::EmptyBundle));
        assert_eq!(bundle(std::slice::from_ref(&a)).unwrap(), a);
    }
}
