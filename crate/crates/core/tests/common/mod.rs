#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use corolla_core::corolla::{ConverseRegistry, CorollaGraph};
use corolla_core::qla::StateVector;
use corolla_core::qusym::Vocabulary;
use corolla_core::Complex64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_state(rng: &mut impl Rng, dim: usize) -> StateVector {
    loop {
        let amps: Vec<Complex64> = (0..dim).map(|_| random_complex(rng)).collect();
        if let Ok(s) = StateVector::new(amps) {
            return s;
        }
    }
}

/// Unitary factor of the QR decomposition of a random complex matrix.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| random_complex(rng));
    m.qr().q()
}

pub const KINSHIP_VOCAB: &str = "person:Bob\nperson:Alice\nperson:Mary\n";
pub const KINSHIP_REGISTRY: &str = "kin:ParentOf <-> kin:ChildOf = 0.4\nkin:HusbandOf <-> kin:WifeOf = 1.0\n";
pub const KINSHIP_TRIPLES: &str = "\
# Bob is the father of Alice; Bob and Mary are married.
person:Bob kin:ParentOf person:Alice .
person:Alice kin:ChildOf person:Bob .
person:Bob kin:HusbandOf person:Mary .
person:Mary kin:WifeOf person:Bob .
";

/// `triples` distinct random forward triples over `nodes` nodes and
/// `pairs` registered predicate pairs with random weights.
pub fn random_graph(seed: u64, nodes: usize, pairs: usize, triples: usize) -> CorollaGraph {
    let mut rng = rng(seed);
    let voc = Vocabulary::new((0..nodes).map(|i| format!("n:N{i}"))).unwrap();
    let mut reg = ConverseRegistry::new();
    for k in 0..pairs {
        let w = if k == 0 { 0.4 } else { rng.random_range(0.0..=1.0) };
        reg.register(&format!("r:F{k}"), &format!("r:B{k}"), w).unwrap();
    }
    let mut g = CorollaGraph::new(Arc::new(voc), reg);
    let mut seen = BTreeSet::new();
    while seen.len() < triples {
        let s = rng.random_range(0..nodes);
        let o = rng.random_range(0..nodes);
        let p = rng.random_range(0..pairs);
        if seen.insert((s, p, o)) {
            g.add_triple(&format!("n:N{s}"), &format!("r:F{p}"), &format!("n:N{o}")).unwrap();
        }
    }
    g
}
