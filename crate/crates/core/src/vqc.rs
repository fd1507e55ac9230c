//! Variational quantum classifier: angle encoding, a layered Ry/CNOT ansatz
//! and a first-qubit readout trained with Adam.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use log::{debug, warn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Label, LabeledDataset};
use crate::optim::{Adam, AdamConfig};
use crate::qsim::{backward_light_cone, real, Gate, LightCone, Statevector, MAX_QUBITS};
use crate::{fmt_f64, Error, Result};

/// Number of trainable angles for `n` qubits and `l` layers.
pub fn count_params(n: usize, l: usize) -> usize {
    n * (2 * l + 1)
}

/// Angles of the ansatz. Layer 0 holds one rotation per qubit; each later
/// layer holds the rotations after its odd-control CNOTs followed by those
/// after its even-control CNOTs.
#[derive(Debug, Clone, PartialEq)]
pub struct VqcParams {
    num_qubits: usize,
    num_layers: usize,
    angles: Vec<f64>,
}

impl VqcParams {
    pub fn new(num_qubits: usize, num_layers: usize, angles: Vec<f64>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::invalid(format!("unsupported qubit count {num_qubits}")));
        }
        let expected = count_params(num_qubits, num_layers);
        if angles.len() != expected {
            return Err(Error::invalid(format!(
                "expected {expected} angles, got {}",
                angles.len()
            )));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("angles must be finite"));
        }
        Ok(VqcParams {
            num_qubits,
            num_layers,
            angles,
        })
    }

    pub fn zeros(num_qubits: usize, num_layers: usize) -> Result<Self> {
        VqcParams::new(
            num_qubits,
            num_layers,
            vec![0.0; count_params(num_qubits, num_layers)],
        )
    }

    /// Angles drawn uniformly from `[0, 2pi)`.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, num_layers: usize, rng: &mut R) -> Result<Self> {
        let angles = (0..count_params(num_qubits, num_layers))
            .map(|_| rng.random_range(0.0..TAU))
            .collect();
        VqcParams::new(num_qubits, num_layers, angles)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angles_mut(&mut self) -> &mut [f64] {
        &mut self.angles
    }

    pub fn num_params(&self) -> usize {
        self.angles.len()
    }

    pub fn to_text(&self, threshold: f64) -> String {
        let mut out = format!(
            "tnvqc-vqc 1\nnum_qubits {}\nnum_layers {}\nthreshold {}\nangles {}\n",
            self.num_qubits,
            self.num_layers,
            fmt_f64(threshold),
            self.angles.len()
        );
        for a in &self.angles {
            out.push_str(&fmt_f64(*a));
            out.push('\n');
        }
        out
    }

    /// Inverse of [`VqcParams::to_text`]; returns the parameters and threshold.
    pub fn from_text(text: &str) -> Result<(Self, f64)> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::invalid(format!("missing {what}")))
        };
        if next("header")?.trim() != "tnvqc-vqc 1" {
            return Err(Error::invalid("not a version 1 VQC parameter file"));
        }
        let n: usize = parse_field(next("num_qubits")?, "num_qubits")?;
        let l: usize = parse_field(next("num_layers")?, "num_layers")?;
        let threshold: f64 = parse_field(next("threshold")?, "threshold")?;
        let count: usize = parse_field(next("angles")?, "angles")?;
        let mut angles = Vec::with_capacity(count);
        for _ in 0..count {
            let line = next("angle")?;
            angles.push(
                line.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad angle {line:?}")))?,
            );
        }
        Ok((VqcParams::new(n, l, angles)?, threshold))
    }
}

pub(crate) fn parse_field<T: core::str::FromStr>(line: &str, key: &str) -> Result<T> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(Error::invalid(format!("expected `{key}` line, got {line:?}")));
    }
    parts
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| Error::invalid(format!("bad value on `{key}` line")))
}

/// Ansatz gate list for `n` qubits and `l` layers; `slot` indexes
/// [`VqcParams::angles`].
pub fn ansatz_gates(n: usize, l: usize) -> Vec<Gate> {
    let mut gates: Vec<Gate> = (0..n).map(|q| Gate::Ry { qubit: q, slot: q }).collect();
    for layer in 0..l {
        let base = n + 2 * n * layer;
        // Odd 1-based controls are even 0-based indices.
        for first in [0usize, 1] {
            for c in (first..n.saturating_sub(1)).step_by(2) {
                gates.push(Gate::Cnot {
                    control: c,
                    target: c + 1,
                });
            }
            let offset = base + first * n;
            gates.extend((0..n).map(|q| Gate::Ry {
                qubit: q,
                slot: offset + q,
            }));
        }
    }
    gates
}

/// How a probability is compared with a +/-1 label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetMapping {
    /// `(P - t)^2` with `t = 0` for -1 and `t = 1` for +1.
    #[default]
    Probability,
    /// `(2P - 1 - y)^2`.
    Sign,
}

impl TargetMapping {
    fn loss(self, p: f64, label: Label) -> f64 {
        let r = self.residual(p, label);
        r * r
    }

    fn residual(self, p: f64, label: Label) -> f64 {
        match self {
            TargetMapping::Probability => p - target(label),
            TargetMapping::Sign => 2.0 * p - 1.0 - label.sign(),
        }
    }

    /// d loss / d p.
    fn slope(self, p: f64, label: Label) -> f64 {
        match self {
            TargetMapping::Probability => 2.0 * self.residual(p, label),
            TargetMapping::Sign => 4.0 * self.residual(p, label),
        }
    }
}

fn target(label: Label) -> f64 {
    match label {
        Label::Negative => 0.0,
        Label::Positive => 1.0,
    }
}

fn check_sample(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::invalid(format!(
            "sample has {} features, circuit has {n} qubits",
            x.len()
        )));
    }
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        warn!("encoding features outside [0, 1]");
    }
    Ok(())
}

/// Qubit `k` rotated from |0> by `pi * x_k`.
pub fn encode(x: &[f64]) -> Result<Statevector> {
    let mut s = Statevector::new_zero_state(x.len())?;
    check_sample(x, x.len())?;
    for (q, &v) in x.iter().enumerate() {
        s = s.apply_ry(q, PI * v)?;
    }
    Ok(s)
}

pub fn apply_ansatz(s: Statevector, p: &VqcParams) -> Result<Statevector> {
    if s.num_qubits() != p.num_qubits {
        return Err(Error::invalid("state and parameters disagree on qubit count"));
    }
    let mut s = s;
    for g in ansatz_gates(p.num_qubits, p.num_layers) {
        s = match g {
            Gate::Ry { qubit, slot } => s.apply_ry(qubit, p.angles[slot])?,
            Gate::Cnot { control, target } => s.apply_cnot(control, target)?,
        };
    }
    Ok(s)
}

/// Full complex simulation of every qubit. Slow; kept as a reference.
pub fn predict_reference(x: &[f64], p: &VqcParams) -> Result<f64> {
    check_sample(x, p.num_qubits)?;
    Ok(apply_ansatz(encode(x)?, p)?.prob_first_qubit_one())
}

/// The circuit restricted to the backward light cone of the first qubit,
/// simulated with real amplitudes.
#[derive(Debug, Clone)]
pub struct VqcCircuit {
    num_qubits: usize,
    num_layers: usize,
    cone: LightCone,
}

impl VqcCircuit {
    pub fn new(num_qubits: usize, num_layers: usize) -> Self {
        let gates = ansatz_gates(num_qubits, num_layers);
        VqcCircuit {
            num_qubits,
            num_layers,
            cone: backward_light_cone(num_qubits, &gates, 0),
        }
    }

    pub fn for_params(p: &VqcParams) -> Self {
        VqcCircuit::new(p.num_qubits, p.num_layers)
    }

    /// Number of qubits actually simulated.
    pub fn simulated_qubits(&self) -> usize {
        self.cone.qubits.len()
    }

    fn check(&self, p: &VqcParams) -> Result<()> {
        if p.num_qubits != self.num_qubits || p.num_layers != self.num_layers {
            return Err(Error::invalid("parameters do not match circuit shape"));
        }
        Ok(())
    }

    fn final_state(&self, x: &[f64], angles: &[f64]) -> Vec<f64> {
        let half: Vec<f64> = self.cone.qubits.iter().map(|&q| FRAC_PI_2 * x[q]).collect();
        let mut psi = real::product_state(&half);
        real::run(&mut psi, half.len(), &self.cone.gates, angles);
        psi
    }

    fn prob(&self, x: &[f64], angles: &[f64]) -> f64 {
        real::prob_first_one(&self.final_state(x, angles))
    }

    pub fn predict(&self, x: &[f64], p: &VqcParams) -> Result<f64> {
        self.check(p)?;
        check_sample(x, self.num_qubits)?;
        Ok(self.prob(x, &p.angles))
    }

    /// Adds `weight * dP/dtheta` into `grad` and returns `P`.
    fn accumulate_adjoint(&self, x: &[f64], angles: &[f64], grad: &mut [f64], slope: impl FnOnce(f64) -> f64) -> f64 {
        let n = self.cone.qubits.len();
        let mut psi = self.final_state(x, angles);
        let p = real::prob_first_one(&psi);
        let weight = slope(p);
        if weight == 0.0 {
            return p;
        }
        // dP/dtheta = 2 <Pi psi | dU psi_prev>, Pi projecting onto qubit 0 = 1.
        let mut lam = psi.clone();
        let half = lam.len() / 2;
        lam[..half].iter_mut().for_each(|v| *v = 0.0);
        for g in self.cone.gates.iter().rev() {
            match *g {
                Gate::Ry { qubit, slot } => {
                    let inner = real::ry_adjoint_step(&mut lam, &mut psi, n, qubit, angles[slot]);
                    grad[slot] += weight * 2.0 * inner;
                }
                Gate::Cnot { control, target } => {
                    real::cnot(&mut psi, n, control, target);
                    real::cnot(&mut lam, n, control, target);
                }
            }
        }
        p
    }
}

pub fn predict(x: &[f64], p: &VqcParams) -> Result<f64> {
    VqcCircuit::for_params(p).predict(x, p)
}

/// `+1` when the first-qubit probability reaches `threshold`.
pub fn classify(x: &[f64], p: &VqcParams, threshold: f64) -> Result<Label> {
    Ok(label_for(predict(x, p)?, threshold))
}

pub fn label_for(prob: f64, threshold: f64) -> Label {
    if prob >= threshold {
        Label::Positive
    } else {
        Label::Negative
    }
}

fn check_batch(ds: &LabeledDataset, p: &VqcParams) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    if ds.num_features() != p.num_qubits {
        return Err(Error::invalid(format!(
            "batch has {} features, circuit has {} qubits",
            ds.num_features(),
            p.num_qubits
        )));
    }
    Ok(())
}

pub fn mse_loss(batch: &LabeledDataset, p: &VqcParams, mapping: TargetMapping) -> Result<f64> {
    check_batch(batch, p)?;
    let circuit = VqcCircuit::for_params(p);
    let total: f64 = (0..batch.len())
        .map(|i| mapping.loss(circuit.prob(batch.sample(i), &p.angles), batch.labels()[i]))
        .sum();
    Ok(total / batch.len() as f64)
}

/// Loss gradient by the parameter-shift rule,
/// `dP/dtheta = (P(theta + pi/2) - P(theta - pi/2)) / 2`.
pub fn gradient(batch: &LabeledDataset, p: &VqcParams, mapping: TargetMapping) -> Result<Vec<f64>> {
    check_batch(batch, p)?;
    let circuit = VqcCircuit::for_params(p);
    let scale = 1.0 / batch.len() as f64;
    let mut grad = vec![0.0; p.num_params()];
    let mut shifted = p.angles.clone();
    for i in 0..batch.len() {
        let x = batch.sample(i);
        let label = batch.labels()[i];
        let slope = mapping.slope(circuit.prob(x, &p.angles), label);
        for j in 0..shifted.len() {
            let a = p.angles[j];
            shifted[j] = a + FRAC_PI_2;
            let plus = circuit.prob(x, &shifted);
            shifted[j] = a - FRAC_PI_2;
            let minus = circuit.prob(x, &shifted);
            shifted[j] = a;
            grad[j] += scale * slope * 0.5 * (plus - minus);
        }
    }
    Ok(grad)
}

/// Same gradient as [`gradient`] by reverse-mode (adjoint) simulation, at
/// the cost of roughly three circuit evaluations per sample.
pub fn gradient_adjoint(batch: &LabeledDataset, p: &VqcParams, mapping: TargetMapping) -> Result<Vec<f64>> {
    check_batch(batch, p)?;
    let circuit = VqcCircuit::for_params(p);
    let idx: Vec<usize> = (0..batch.len()).collect();
    let mut grad = vec![0.0; p.num_params()];
    loss_and_grad(&circuit, batch, &idx, &p.angles, mapping, &mut grad);
    Ok(grad)
}

/// Mean loss over `idx`; writes the mean gradient into `grad`.
fn loss_and_grad(
    circuit: &VqcCircuit,
    ds: &LabeledDataset,
    idx: &[usize],
    angles: &[f64],
    mapping: TargetMapping,
    grad: &mut [f64],
) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let scale = 1.0 / idx.len() as f64;
    let mut loss = 0.0;
    for &i in idx {
        let label = ds.labels()[i];
        let p = circuit.accumulate_adjoint(ds.sample(i), angles, grad, |p| scale * mapping.slope(p, label));
        loss += mapping.loss(p, label);
    }
    loss * scale
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMethod {
    #[default]
    Adjoint,
    ParameterShift,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqcTrainConfig {
    pub num_layers: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub decay: f64,
    pub seed: u64,
    pub threshold: f64,
    pub adam: AdamConfig,
    pub mapping: TargetMapping,
    pub gradient: GradientMethod,
}

impl Default for VqcTrainConfig {
    fn default() -> Self {
        VqcTrainConfig {
            num_layers: 1,
            epochs: 60,
            batch_size: 32,
            lr0: 0.1,
            decay: 0.95,
            seed: 0,
            threshold: 0.5,
            adam: AdamConfig::default(),
            mapping: TargetMapping::Probability,
            gradient: GradientMethod::Adjoint,
        }
    }
}

impl VqcTrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::invalid("decay must lie in (0, 1]"));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::invalid("threshold must lie in (0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqcEpoch {
    pub epoch: usize,
    pub learning_rate: f64,
    /// Mean of the mini-batch losses seen during the epoch.
    pub running_loss: f64,
    /// Loss and accuracy on the full training set after the epoch.
    pub train_loss: f64,
    pub train_accuracy: f64,
    /// Norm of the last mini-batch gradient.
    pub grad_norm: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqcFit {
    pub params: VqcParams,
    pub history: Vec<VqcEpoch>,
}

/// Loss and accuracy of `p` on a whole dataset.
pub fn evaluate(
    circuit: &VqcCircuit,
    ds: &LabeledDataset,
    p: &VqcParams,
    threshold: f64,
    mapping: TargetMapping,
) -> (f64, f64) {
    let mut loss = 0.0;
    let mut hits = 0usize;
    for i in 0..ds.len() {
        let prob = circuit.prob(ds.sample(i), &p.angles);
        let label = ds.labels()[i];
        loss += mapping.loss(prob, label);
        if label_for(prob, threshold) == label {
            hits += 1;
        }
    }
    let n = ds.len().max(1) as f64;
    (loss / n, hits as f64 / n)
}

pub fn fit(train: &LabeledDataset, cfg: &VqcTrainConfig) -> Result<VqcFit> {
    fit_with_validation(train, None, cfg)
}

/// Mini-batch Adam on the MSE with learning rate `lr0 * decay^epoch`.
pub fn fit_with_validation(
    train: &LabeledDataset,
    val: Option<&LabeledDataset>,
    cfg: &VqcTrainConfig,
) -> Result<VqcFit> {
    cfg.validate()?;
    let n = train.num_features();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = VqcParams::random(n, cfg.num_layers, &mut rng)?;
    check_batch(train, &params)?;
    if let Some(v) = val {
        if v.num_features() != n {
            return Err(Error::invalid("validation set has a different feature count"));
        }
    }
    let out_of_range = train
        .features()
        .as_slice()
        .iter()
        .filter(|v| !(0.0..=1.0).contains(*v))
        .count();
    if out_of_range > 0 {
        warn!("{out_of_range} training features lie outside [0, 1]");
    }

    let circuit = VqcCircuit::for_params(&params);
    debug!(
        "vqc: {n} qubits, {} layers, simulating {} qubits",
        cfg.num_layers,
        circuit.simulated_qubits()
    );
    let mut adam = Adam::new(params.num_params(), cfg.adam);
    let mut grad = vec![0.0; params.num_params()];
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut lr = cfg.lr0;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let loss = match cfg.gradient {
                GradientMethod::Adjoint => {
                    loss_and_grad(&circuit, train, batch, &params.angles, cfg.mapping, &mut grad)
                }
                GradientMethod::ParameterShift => {
                    let sub = train.select(batch);
                    grad = gradient(&sub, &params, cfg.mapping)?;
                    mse_loss(&sub, &params, cfg.mapping)?
                }
            };
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::Diverged { epoch, loss });
            }
            loss_sum += loss;
            batches += 1;
            adam.step(&mut params.angles, &grad, lr);
        }
        let (train_loss, train_accuracy) = evaluate(&circuit, train, &params, cfg.threshold, cfg.mapping);
        if !train_loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                loss: train_loss,
            });
        }
        let (val_loss, val_accuracy) = match val {
            Some(v) if !v.is_empty() => {
                let (l, a) = evaluate(&circuit, v, &params, cfg.threshold, cfg.mapping);
                (Some(l), Some(a))
            }
            _ => (None, None),
        };
        let grad_norm = libm::sqrt(grad.iter().map(|g| g * g).sum());
        history.push(VqcEpoch {
            epoch,
            learning_rate: lr,
            running_loss: loss_sum / batches as f64,
            train_loss,
            train_accuracy,
            grad_norm,
            val_loss,
            val_accuracy,
        });
        lr *= cfg.decay;
    }
    Ok(VqcFit { params, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_1_SQRT_2;
    use num_complex::Complex64;

    fn single(x: f64, label: Label) -> LabeledDataset {
        LabeledDataset::from_rows(&[vec![x]], vec![label]).unwrap()
    }

    #[test]
    fn encode_examples() {
        let s = encode(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        let s = encode(&[1.0, 1.0]).unwrap();
        assert!((s.amplitudes()[3].re - 1.0).abs() < 1e-12);
        let s = encode(&[0.5]).unwrap();
        for a in s.amplitudes() {
            assert!((a.re - FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn ansatz_examples() {
        let p = VqcParams::zeros(3, 1).unwrap();
        let s = apply_ansatz(encode(&[0.0; 3]).unwrap(), &p).unwrap();
        assert!((s.amplitudes()[0].re - 1.0).abs() < 1e-12);

        let p = VqcParams::new(2, 1, vec![PI, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let s = apply_ansatz(encode(&[0.0, 0.0]).unwrap(), &p).unwrap();
        assert!((s.amplitudes()[3].re - 1.0).abs() < 1e-12);

        assert_eq!(count_params(5, 2), 25);
        let gates = ansatz_gates(5, 2);
        let slots = gates.iter().filter(|g| matches!(g, Gate::Ry { .. })).count();
        assert_eq!(slots, 25);
        assert!(apply_ansatz(encode(&[0.0; 2]).unwrap(), &VqcParams::zeros(3, 1).unwrap()).is_err());
    }

    #[test]
    fn cnot_chain_layout() {
        let cnots: Vec<(usize, usize)> = ansatz_gates(5, 1)
            .into_iter()
            .filter_map(|g| match g {
                Gate::Cnot { control, target } => Some((control, target)),
                _ => None,
            })
            .collect();
        assert_eq!(cnots, vec![(0, 1), (2, 3), (1, 2), (3, 4)]);
    }

    #[test]
    fn count_params_examples() {
        assert_eq!(count_params(5, 2), 25);
        assert_eq!(count_params(16, 1), 48);
        assert_eq!(count_params(2, 0), 2);
    }

    #[test]
    fn predict_examples() {
        let p = VqcParams::zeros(1, 0).unwrap();
        assert_eq!(predict(&[0.0], &p).unwrap(), 0.0);
        assert!((predict(&[1.0], &p).unwrap() - 1.0).abs() < 1e-12);
        assert!((predict(&[0.5], &p).unwrap() - 0.5).abs() < 1e-12);
        assert!(predict(&[0.5, 0.1], &p).is_err());
    }

    #[test]
    fn classify_boundary() {
        assert_eq!(label_for(0.49, 0.5), Label::Negative);
        assert_eq!(label_for(0.5, 0.5), Label::Positive);
        assert_eq!(label_for(0.9, 0.5), Label::Positive);
        let p = VqcParams::zeros(1, 0).unwrap();
        assert_eq!(classify(&[0.6], &p, 0.5).unwrap(), Label::Positive);
        assert_eq!(classify(&[0.4], &p, 0.5).unwrap(), Label::Negative);
    }

    #[test]
    fn loss_examples() {
        let p = VqcParams::zeros(1, 0).unwrap();
        let m = TargetMapping::Probability;
        assert_eq!(mse_loss(&single(0.0, Label::Negative), &p, m).unwrap(), 0.0);
        assert!((mse_loss(&single(0.5, Label::Positive), &p, m).unwrap() - 0.25).abs() < 1e-12);
        let empty = LabeledDataset::from_rows(&[], vec![]).unwrap();
        assert!(mse_loss(&empty, &p, m).is_err());
        // Sign mapping: 2 * 0.5 - 1 = 0 against +1.
        let s = mse_loss(&single(0.5, Label::Positive), &p, TargetMapping::Sign).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_angle_gradient_matches_closed_form() {
        for &(x, theta, label) in &[(0.3, 0.7, Label::Positive), (0.8, -1.2, Label::Negative)] {
            let p = VqcParams::new(1, 0, vec![theta]).unwrap();
            let t = target(label);
            let phi: f64 = PI * x + theta;
            let prob = libm::sin(phi / 2.0).powi(2);
            // d/dtheta sin^2(phi/2) = sin(phi) / 2.
            let expected = 2.0 * (prob - t) * 0.5 * libm::sin(phi);
            let ds = single(x, label);
            let g = gradient(&ds, &p, TargetMapping::Probability).unwrap();
            let ga = gradient_adjoint(&ds, &p, TargetMapping::Probability).unwrap();
            assert!((g[0] - expected).abs() < 1e-8);
            assert!((ga[0] - expected).abs() < 1e-8);
        }
    }

    #[test]
    fn gradient_vanishes_at_perfect_fit() {
        let p = VqcParams::zeros(1, 0).unwrap();
        let ds = LabeledDataset::from_rows(&[vec![0.0], vec![1.0]], vec![Label::Negative, Label::Positive]).unwrap();
        for m in [TargetMapping::Probability, TargetMapping::Sign] {
            let g = gradient(&ds, &p, m).unwrap();
            assert!(g.iter().all(|v| v.abs() <= 1e-10));
        }
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = VqcParams::random(3, 2, &mut rng).unwrap();
        let (q, t) = VqcParams::from_text(&p.to_text(0.5)).unwrap();
        assert_eq!(p, q);
        assert_eq!(t, 0.5);
        assert!(VqcParams::from_text("junk").is_err());
    }

    #[test]
    fn zero_epochs_returns_initial_angles() {
        let ds = LabeledDataset::from_rows(&[vec![0.1, 0.2]], vec![Label::Positive]).unwrap();
        let cfg = VqcTrainConfig {
            epochs: 0,
            seed: 9,
            ..VqcTrainConfig::default()
        };
        let fit = fit(&ds, &cfg).unwrap();
        let init = VqcParams::random(2, 1, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(fit.params, init);
        assert!(fit.history.is_empty());
    }
}
