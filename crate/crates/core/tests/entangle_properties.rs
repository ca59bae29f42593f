mod common;

use std::sync::Arc;

use corolla_core::entangle::{
    bell_states, binary_entropy, invert_binary_entropy, measure, measure_entanglement, synthesize_joint_state,
    tessellate_round, two_term_state, BasisChoice,
};
use corolla_core::corolla::{ConverseRegistry, CorollaGraph};
use corolla_core::qla::{entanglement_entropy, outer, partial_trace, LogBase, StateVector, Subsystem};
use corolla_core::qusym::Vocabulary;
use corolla_core::Complex64;
use rand::Rng;

use common::{random_state, rng};

/// Independent root finder for `H2(λ) = p` on (0, 1/2]: Illinois-modified
/// regula falsi, using natural logarithms.
fn regula_falsi_lambda(p: f64) -> f64 {
    let h = |l: f64| -(l * l.ln() + (1.0 - l) * (1.0 - l).ln()) / std::f64::consts::LN_2 - p;
    let (mut a, mut b) = (1e-300, 0.5);
    let (mut fa, mut fb) = (h(a), h(b));
    let mut side = 0;
    for _ in 0..500 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = h(c);
        if fc.abs() < 1e-15 || (b - a).abs() < 1e-16 {
            return c;
        }
        if fc * fb > 0.0 {
            b = c;
            fb = fc;
            if side == -1 {
                fa /= 2.0;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb /= 2.0;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

#[test]
fn lambda_for_point_four_matches_oracle() {
    let oracle = regula_falsi_lambda(0.4);
    // frozen from the oracle above (and an external Brent solve)
    assert!((oracle - 0.079_382_600_480_649).abs() < 1e-12);
    let lambda = invert_binary_entropy(0.4).unwrap();
    assert!((lambda - oracle).abs() < 1e-10);
    assert!((binary_entropy(lambda) - 0.4).abs() < 1e-9);
}

#[test]
fn lambda_matches_oracle_across_range() {
    for k in 1..100 {
        let p = k as f64 / 100.0;
        let lambda = invert_binary_entropy(p).unwrap();
        assert!((lambda - regula_falsi_lambda(p)).abs() < 1e-10, "p = {p}");
        assert!((0.0..=0.5).contains(&lambda));
    }
}

#[test]
fn synthesis_roundtrip_on_grid() {
    for k in 0..=10 {
        let p = k as f64 / 10.0;
        let (state, _) = two_term_state(p, (2, 2), BasisChoice::QUBIT).unwrap();
        let e = entanglement_entropy(&state, (2, 2), LogBase::BITS).unwrap();
        assert!((e - p).abs() <= 1e-6, "p = {p}: {e}");

        let (state, _) = two_term_state(p, (5, 3), BasisChoice { left: (4, 1), right: (2, 0) }).unwrap();
        let e = entanglement_entropy(&state, (5, 3), LogBase::BITS).unwrap();
        assert!((e - p).abs() <= 1e-6, "p = {p}: {e}");
    }
}

#[test]
fn graph_synthesis_roundtrip() {
    let voc = Vocabulary::new((0..6).map(|i| format!("n:N{i}"))).unwrap();
    let mut reg = ConverseRegistry::new();
    for k in 0..=10 {
        reg.register(&format!("r:F{k}"), &format!("r:B{k}"), k as f64 / 10.0).unwrap();
    }
    let mut g = CorollaGraph::new(Arc::new(voc), reg);
    for k in 0..=10 {
        let t = g.add_triple(&format!("n:N{}", k % 6), &format!("r:F{k}"), &format!("n:N{}", (k + 1) % 6)).unwrap();
        let joint = synthesize_joint_state(&g, t, None).unwrap();
        assert!((measure_entanglement(&joint) - k as f64 / 10.0).abs() <= 1e-6);
        let full = entanglement_entropy(&joint.full_state(), joint.dims, LogBase::BITS).unwrap();
        assert!((full - joint.target_entropy).abs() <= 1e-6);
    }
    // self-loop falls back to the (0, 1) support
    let t = g.add_triple("n:N3", "r:F5", "n:N3").unwrap();
    let joint = synthesize_joint_state(&g, t, None).unwrap();
    assert_eq!(joint.basis, BasisChoice::QUBIT);
    assert!((measure_entanglement(&joint) - 0.5).abs() <= 1e-6);
}

#[test]
fn maximal_synthesis_reduces_to_two_outcome_mixture() {
    let basis = BasisChoice { left: (3, 1), right: (0, 2) };
    let (state, _) = two_term_state(1.0, (4, 3), basis).unwrap();
    let rho = outer(&state);
    for (keep, support) in [(Subsystem::A, [3, 1]), (Subsystem::B, [0, 2])] {
        let reduced = partial_trace(&rho, (4, 3), keep).unwrap();
        let ev = reduced.eigenvalues();
        assert!((ev[0] - 0.5).abs() < 1e-9 && (ev[1] - 0.5).abs() < 1e-9);
        assert!(ev[2..].iter().all(|v| v.abs() < 1e-9));
        for i in support {
            assert!((reduced.get(i, i).re - 0.5).abs() < 1e-9);
        }
    }
}

#[test]
fn bell_states_are_orthonormal_and_maximal() {
    let bells = bell_states();
    for (i, a) in bells.iter().enumerate() {
        let e = entanglement_entropy(&a.state, (2, 2), LogBase::BITS).unwrap();
        assert!((e - 1.0).abs() < 1e-9);
        for (j, b) in bells.iter().enumerate() {
            let f = a.state.fidelity(&b.state).unwrap();
            if i == j {
                assert!((f - 1.0).abs() < 1e-12);
            } else {
                assert!(f.abs() < 1e-12);
            }
        }
    }
}

#[test]
fn measurement_frequencies_converge() {
    let mut r = rng(31);
    for trial in 0..1000 {
        let s = random_state(&mut r, 4);
        let seed = r.random();
        let rec = measure(&s, 100_000, seed).unwrap();
        assert_eq!(rec.counts.values().sum::<u64>(), 100_000);
        for (i, p) in s.probabilities().into_iter().enumerate() {
            let f = rec.frequency(i);
            assert!((f - p).abs() <= 0.01, "trial {trial}, outcome {i}: {f} vs {p}");
        }
    }
}

#[test]
fn measurement_is_seed_deterministic() {
    let mut r = rng(32);
    for _ in 0..50 {
        let s = random_state(&mut r, 7);
        let seed = r.random();
        assert_eq!(measure(&s, 5000, seed).unwrap(), measure(&s, 5000, seed).unwrap());
    }
}

#[test]
fn tessellation_is_idempotent() {
    let mut r = rng(33);
    for d in [2usize, 3, 8, 30] {
        let voc = Vocabulary::new((0..d).map(|i| format!("v:S{i}"))).unwrap();
        for _ in 0..200 {
            let noisy: Vec<Complex64> = random_state(&mut r, d).amplitudes().to_vec();
            let (sym, f) = tessellate_round(&noisy, &voc).unwrap();
            assert!(f >= 1.0 / d as f64 - 1e-12);
            let idx = voc.index_of(sym).unwrap();
            let basis = StateVector::basis(d, idx).unwrap();
            let (again, f2) = tessellate_round(basis.amplitudes(), &voc).unwrap();
            assert_eq!(again, sym);
            assert_eq!(f2, 1.0);
        }
        for i in 0..d {
            let basis = StateVector::basis(d, i).unwrap();
            let (sym, f) = tessellate_round(basis.amplitudes(), &voc).unwrap();
            assert_eq!((voc.index_of(sym), f), (Some(i), 1.0));
        }
    }
}
