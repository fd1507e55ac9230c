//! Dense statevector simulation restricted to Ry and CNOT gates.
//!
//! Qubits are indexed from 0 and qubit 0 is the most significant bit of the
//! basis index, so the "first" qubit of a register is `0`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use libm::{cos, sin};
use num_complex::Complex64;

use crate::{Error, Result};

pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    pub fn new_zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "qubit count {n} outside 1..={MAX_QUBITS}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector {
            num_qubits: n,
            amplitudes,
        })
    }

    /// Accepts any amplitude vector of length `2^n` with unit norm.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() || len > 1 << MAX_QUBITS {
            return Err(Error::invalid(format!("{len} is not a valid register size")));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("state norm {norm} is not 1")));
        }
        Ok(Statevector {
            num_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.num_qubits {
            return Err(Error::invalid(format!(
                "qubit {qubit} out of range for {} qubits",
                self.num_qubits
            )));
        }
        Ok(qubit_mask(self.num_qubits, qubit))
    }

    /// Rotation `[[cos t/2, -sin t/2], [sin t/2, cos t/2]]` on `qubit`.
    pub fn apply_ry(mut self, qubit: usize, theta: f64) -> Result<Self> {
        let mask = self.mask(qubit)?;
        let (c, s) = (cos(0.5 * theta), sin(0.5 * theta));
        for_each_pair(self.amplitudes.len(), mask, |i0, i1| {
            let a0 = self.amplitudes[i0];
            let a1 = self.amplitudes[i1];
            self.amplitudes[i0] = a0 * c - a1 * s;
            self.amplitudes[i1] = a0 * s + a1 * c;
        });
        Ok(self)
    }

    pub fn apply_cnot(mut self, control: usize, target: usize) -> Result<Self> {
        let cm = self.mask(control)?;
        let tm = self.mask(target)?;
        if control == target {
            return Err(Error::invalid("CNOT control equals target"));
        }
        for i in 0..self.amplitudes.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
        Ok(self)
    }

    /// Probability that `qubit` reads 1.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        let mask = self.mask(qubit)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    pub fn prob_first_qubit_one(&self) -> f64 {
        let half = self.amplitudes.len() / 2;
        self.amplitudes[half..].iter().map(|a| a.norm_sqr()).sum()
    }
}

fn qubit_mask(num_qubits: usize, qubit: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

/// Calls `f(i0, i1)` for every index pair differing only in `mask`.
#[inline]
fn for_each_pair(len: usize, mask: usize, mut f: impl FnMut(usize, usize)) {
    let mut base = 0;
    while base < len {
        for i0 in base..base + mask {
            f(i0, i0 | mask);
        }
        base += 2 * mask;
    }
}

/// Gate of a parameterised Ry/CNOT circuit. `slot` tells the caller which
/// angle drives the rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    Ry { qubit: usize, slot: usize },
    Cnot { control: usize, target: usize },
}

/// Part of a circuit that can influence the measured qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LightCone {
    /// Original indices of the retained qubits, ascending. Position in this
    /// list is the qubit's index in `gates`.
    pub qubits: Vec<usize>,
    pub gates: Vec<Gate>,
}

/// Drops every gate that cannot affect the statistics of `measured` on a
/// product input state, then relabels the surviving qubits.
pub fn backward_light_cone(num_qubits: usize, gates: &[Gate], measured: usize) -> LightCone {
    let mut inside = vec![false; num_qubits];
    inside[measured] = true;
    let mut kept = Vec::new();
    for gate in gates.iter().rev() {
        match *gate {
            Gate::Ry { qubit, .. } => {
                if inside[qubit] {
                    kept.push(*gate);
                }
            }
            Gate::Cnot { control, target } => {
                if inside[control] || inside[target] {
                    inside[control] = true;
                    inside[target] = true;
                    kept.push(*gate);
                }
            }
        }
    }
    kept.reverse();
    let qubits: Vec<usize> = (0..num_qubits).filter(|&q| inside[q]).collect();
    let mut relabel = vec![usize::MAX; num_qubits];
    for (new, &old) in qubits.iter().enumerate() {
        relabel[old] = new;
    }
    let gates = kept
        .into_iter()
        .map(|g| match g {
            Gate::Ry { qubit, slot } => Gate::Ry {
                qubit: relabel[qubit],
                slot,
            },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: relabel[control],
                target: relabel[target],
            },
        })
        .collect();
    LightCone { qubits, gates }
}

/// Real-amplitude kernels. Ry and CNOT keep a real state real, so circuits
/// built only from them can be simulated at half the cost of the complex path.
pub mod real {
    use super::{qubit_mask, Gate};
    use alloc::vec;
    use alloc::vec::Vec;
    use libm::{cos, sin};

    /// Tensor product of single-qubit states `(cos a_k, sin a_k)`.
    pub fn product_state(half_angles: &[f64]) -> Vec<f64> {
        let mut amps = vec![1.0];
        for &a in half_angles {
            let (c, s) = (cos(a), sin(a));
            let mut next = Vec::with_capacity(amps.len() * 2);
            for &v in &amps {
                next.push(v * c);
                next.push(v * s);
            }
            amps = next;
        }
        amps
    }

    #[inline]
    pub fn ry(amps: &mut [f64], num_qubits: usize, qubit: usize, c: f64, s: f64) {
        let mask = qubit_mask(num_qubits, qubit);
        for block in amps.chunks_exact_mut(2 * mask) {
            let (lo, hi) = block.split_at_mut(mask);
            for (a0, a1) in lo.iter_mut().zip(hi) {
                let (x, y) = (*a0, *a1);
                *a0 = c * x - s * y;
                *a1 = s * x + c * y;
            }
        }
    }

    #[inline]
    pub fn cnot(amps: &mut [f64], num_qubits: usize, control: usize, target: usize) {
        let cm = qubit_mask(num_qubits, control);
        let tm = qubit_mask(num_qubits, target);
        if tm < cm {
            for block in amps.chunks_exact_mut(2 * cm) {
                for pair in block[cm..].chunks_exact_mut(2 * tm) {
                    let (a, b) = pair.split_at_mut(tm);
                    a.swap_with_slice(b);
                }
            }
        } else {
            for block in amps.chunks_exact_mut(2 * tm) {
                let (lo, hi) = block.split_at_mut(tm);
                for (a, b) in lo.chunks_exact_mut(2 * cm).zip(hi.chunks_exact_mut(2 * cm)) {
                    a[cm..].swap_with_slice(&mut b[cm..]);
                }
            }
        }
    }

    /// Applies `gates` in order, each rotation by `angles[slot]`.
    pub fn run(amps: &mut [f64], num_qubits: usize, gates: &[Gate], angles: &[f64]) {
        for g in gates {
            apply(amps, num_qubits, g, angles, false);
        }
    }

    /// Applies one gate, or its inverse.
    #[inline]
    pub fn apply(amps: &mut [f64], num_qubits: usize, gate: &Gate, angles: &[f64], inverse: bool) {
        match *gate {
            Gate::Ry { qubit, slot } => {
                let t = 0.5 * angles[slot];
                let s = if inverse { -sin(t) } else { sin(t) };
                ry(amps, num_qubits, qubit, cos(t), s);
            }
            Gate::Cnot { control, target } => cnot(amps, num_qubits, control, target),
        }
    }

    /// `<lam| dRy(theta)/dtheta |psi>` for a rotation on `qubit`.
    pub fn ry_derivative_inner(
        lam: &[f64],
        psi: &[f64],
        num_qubits: usize,
        qubit: usize,
        theta: f64,
    ) -> f64 {
        let (c, s) = (0.5 * cos(0.5 * theta), 0.5 * sin(0.5 * theta));
        let mask = qubit_mask(num_qubits, qubit);
        let mut acc = 0.0;
        for (lb, pb) in lam.chunks_exact(2 * mask).zip(psi.chunks_exact(2 * mask)) {
            let (l0, l1) = lb.split_at(mask);
            let (p0, p1) = pb.split_at(mask);
            for (((&x0, &x1), &a0), &a1) in l0.iter().zip(l1).zip(p0).zip(p1) {
                acc += x0 * (-s * a0 - c * a1) + x1 * (c * a0 - s * a1);
            }
        }
        acc
    }

    /// One backward step of the adjoint sweep over `Ry(theta)` on `qubit`:
    /// undoes the rotation on `psi` and `lam` and returns
    /// `<lam| dRy(theta)/dtheta |psi>` taken between the two undo steps.
    pub fn ry_adjoint_step(
        lam: &mut [f64],
        psi: &mut [f64],
        num_qubits: usize,
        qubit: usize,
        theta: f64,
    ) -> f64 {
        let (c, s) = (cos(0.5 * theta), sin(0.5 * theta));
        let mask = qubit_mask(num_qubits, qubit);
        let mut acc = 0.0;
        for (lb, pb) in lam.chunks_exact_mut(2 * mask).zip(psi.chunks_exact_mut(2 * mask)) {
            let (l0, l1) = lb.split_at_mut(mask);
            let (p0, p1) = pb.split_at_mut(mask);
            for (((x0, x1), a0), a1) in l0.iter_mut().zip(l1).zip(p0).zip(p1) {
                let (u, v) = (c * *a0 + s * *a1, c * *a1 - s * *a0);
                *a0 = u;
                *a1 = v;
                acc += *x0 * (-s * u - c * v) + *x1 * (c * u - s * v);
                let (y0, y1) = (*x0, *x1);
                *x0 = c * y0 + s * y1;
                *x1 = c * y1 - s * y0;
            }
        }
        0.5 * acc
    }

    pub fn prob_first_one(amps: &[f64]) -> f64 {
        amps[amps.len() / 2..].iter().map(|a| a * a).sum()
    }
}
