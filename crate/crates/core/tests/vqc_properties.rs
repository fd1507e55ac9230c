use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnvqc_core::data::{Label, LabeledDataset};
use tnvqc_core::qsim::Statevector;
use tnvqc_core::vqc::{
    self, gradient, gradient_adjoint, mse_loss, predict, predict_reference, GradientMethod,
    TargetMapping, VqcCircuit, VqcParams, VqcTrainConfig,
};

fn random_state(n: usize, seed: u64) -> Statevector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps: Vec<Complex64> = (0..1 << n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    Statevector::from_amplitudes(amps).unwrap()
}

fn random_batch(n: usize, size: usize, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..size)
        .map(|_| (0..n).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let labels = (0..size)
        .map(|_| if rng.random_bool(0.5) { Label::Positive } else { Label::Negative })
        .collect();
    LabeledDataset::from_rows(&rows, labels).unwrap()
}

fn random_params(n: usize, l: usize, seed: u64) -> VqcParams {
    VqcParams::random(n, l, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gates_preserve_norm(n in 1usize..6, seed in any::<u64>(), theta in -10.0f64..10.0) {
        let s = random_state(n, seed);
        let q = (seed as usize) % n;
        let r = s.clone().apply_ry(q, theta).unwrap();
        prop_assert!((r.norm_sqr() - 1.0).abs() <= 1e-12);
        if n > 1 {
            let t = (q + 1) % n;
            let c = s.apply_cnot(q, t).unwrap();
            prop_assert!((c.norm_sqr() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn rotation_leaves_other_marginals_alone(n in 2usize..6, seed in any::<u64>(), theta in -10.0f64..10.0) {
        let s = random_state(n, seed);
        let j = (seed as usize) % n;
        let r = s.clone().apply_ry(j, theta).unwrap();
        for q in (0..n).filter(|&q| q != j) {
            prop_assert!((s.prob_one(q).unwrap() - r.prob_one(q).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn gates_are_linear(n in 2usize..5, seed in any::<u64>(), theta in -4.0f64..4.0, mix in 0.1f64..0.9) {
        let a = random_state(n, seed);
        let b = random_state(n, seed ^ 1);
        let (ca, cb) = (Complex64::new(mix, 0.3), Complex64::new(1.0 - mix, -0.2));
        let combo: Vec<Complex64> = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| ca * x + cb * y).collect();
        let norm = combo.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let psi = Statevector::from_amplitudes(combo.iter().map(|v| v / norm).collect()).unwrap();
        let apply = |s: Statevector| s.apply_ry(0, theta).unwrap().apply_cnot(0, n - 1).unwrap();
        let (ga, gb, gpsi) = (apply(a), apply(b), apply(psi));
        for i in 0..1 << n {
            let expected = (ca * ga.amplitudes()[i] + cb * gb.amplitudes()[i]) / norm;
            prop_assert!((gpsi.amplitudes()[i] - expected).norm() <= 1e-12);
        }
    }

    #[test]
    fn light_cone_prediction_matches_full_simulation(n in 1usize..9, l in 0usize..4, seed in any::<u64>()) {
        let p = random_params(n, l, seed);
        let x: Vec<f64> = {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
            (0..n).map(|_| rng.random_range(0.0..1.0)).collect()
        };
        let fast = predict(&x, &p).unwrap();
        let full = predict_reference(&x, &p).unwrap();
        prop_assert!((fast - full).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&fast));
        let circuit = VqcCircuit::new(n, l);
        prop_assert!(circuit.simulated_qubits() <= n.min((2 * l).max(1)));
    }

    #[test]
    fn angles_are_two_pi_periodic(n in 1usize..5, l in 0usize..3, seed in any::<u64>()) {
        let p = random_params(n, l, seed);
        let x = vec![0.37; n];
        let j = (seed as usize) % p.num_params();
        let mut shifted = p.clone();
        shifted.angles_mut()[j] += TAU;
        prop_assert!((predict(&x, &p).unwrap() - predict(&x, &shifted).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn parameter_shift_matches_finite_differences(
        n in 1usize..5,
        l in 0usize..3,
        seed in any::<u64>(),
        sign in any::<bool>(),
    ) {
        let mapping = if sign { TargetMapping::Sign } else { TargetMapping::Probability };
        let p = random_params(n, l, seed);
        let batch = random_batch(n, 4, seed ^ 8);
        let g = gradient(&batch, &p, mapping).unwrap();
        let ga = gradient_adjoint(&batch, &p, mapping).unwrap();
        let h = 1e-5;
        let scale = g.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-3);
        for j in 0..p.num_params() {
            let mut plus = p.clone();
            plus.angles_mut()[j] += h;
            let mut minus = p.clone();
            minus.angles_mut()[j] -= h;
            let fd = (mse_loss(&batch, &plus, mapping).unwrap() - mse_loss(&batch, &minus, mapping).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[j]).abs() / scale <= 1e-4, "slot {}: fd {} shift {}", j, fd, g[j]);
            prop_assert!((ga[j] - g[j]).abs() <= 1e-10 * (1.0 + g[j].abs()));
        }
    }
}

#[test]
fn circuit_matches_hand_simulation() {
    // N = 2, L = 1: Ry(pi) on the first qubit, then CNOT 1 -> 2.
    let p = VqcParams::new(2, 1, vec![std::f64::consts::PI, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let s = vqc::apply_ansatz(vqc::encode(&[0.0, 0.0]).unwrap(), &p).unwrap();
    assert!((s.amplitudes()[3].re - 1.0).abs() < 1e-12);
    assert!((predict(&[0.0, 0.0], &p).unwrap() - 1.0).abs() < 1e-12);
}

fn threshold_toy() -> LabeledDataset {
    let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 + 0.5) / 40.0]).collect();
    let labels = rows
        .iter()
        .map(|r| if r[0] < 0.5 { Label::Negative } else { Label::Positive })
        .collect();
    LabeledDataset::from_rows(&rows, labels).unwrap()
}

#[test]
fn learns_a_single_qubit_threshold() {
    let cfg = VqcTrainConfig {
        num_layers: 1,
        epochs: 50,
        seed: 2,
        ..VqcTrainConfig::default()
    };
    let fit = vqc::fit(&threshold_toy(), &cfg).unwrap();
    assert_eq!(fit.history.last().unwrap().train_accuracy, 1.0);
}

#[test]
fn training_is_deterministic() {
    let ds = random_batch(4, 70, 11);
    let cfg = VqcTrainConfig {
        num_layers: 2,
        epochs: 4,
        seed: 12,
        ..VqcTrainConfig::default()
    };
    let a = vqc::fit(&ds, &cfg).unwrap();
    let b = vqc::fit(&ds, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.history.len(), 4);
    assert!((a.history[1].learning_rate - 0.095).abs() < 1e-15);
}

#[test]
fn gradient_methods_train_identically() {
    let ds = random_batch(3, 40, 21);
    let base = VqcTrainConfig {
        num_layers: 1,
        epochs: 3,
        seed: 22,
        ..VqcTrainConfig::default()
    };
    let adjoint = vqc::fit(&ds, &base).unwrap();
    let shift = vqc::fit(
        &ds,
        &VqcTrainConfig {
            gradient: GradientMethod::ParameterShift,
            ..base
        },
    )
    .unwrap();
    for (a, b) in adjoint.params.angles().iter().zip(shift.params.angles()) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn rejects_bad_configs() {
    let ds = random_batch(2, 5, 31);
    let bad = [
        VqcTrainConfig { decay: 0.0, ..VqcTrainConfig::default() },
        VqcTrainConfig { decay: 1.5, ..VqcTrainConfig::default() },
        VqcTrainConfig { threshold: 1.0, ..VqcTrainConfig::default() },
        VqcTrainConfig { batch_size: 0, ..VqcTrainConfig::default() },
    ];
    for cfg in bad {
        assert!(vqc::fit(&ds, &cfg).is_err());
    }
}
