//! Geometry of the manifold of fixed TT-rank tensors: tangent-space
//! projection, the step-and-round retraction, and plain Riemannian gradient
//! descent steps.
//!
//! A point `W` is kept in two canonical forms, left-orthogonal cores
//! `U_1..U_{d-1}` (with `W = U_1 .. U_{d-1} U_d`) and right-orthogonal cores
//! `V_2..V_d`. A tangent vector is stored as one delta core per mode,
//!
//! ```text
//! dW = sum_k U_1 .. U_{k-1} dG_k V_{k+1} .. V_d
//! ```
//!
//! with the gauge `U_kᵀ dG_k = 0` (left unfoldings) for every `k < d`. The
//! gauge makes the representation unique and the terms mutually orthogonal,
//! so the Frobenius inner product of two tangent vectors at the same point is
//! the sum of the core-wise inner products.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;
use rand::Rng;

use crate::linalg::Matrix;
use crate::tt::{contract_step, Direction, TtCore, TtTensor};
use crate::{Error, Result};

/// The manifold of tensors with the given mode sizes and TT-rank `rank`.
/// Bonds near the ends cannot exceed the product of the modes on either
/// side, so the effective bond rank is `min(rank, prod_left, prod_right)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifoldSpec {
    shape: Vec<usize>,
    rank: usize,
}

impl ManifoldSpec {
    pub fn new(shape: Vec<usize>, rank: usize) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::invalid("manifold shape must be non-empty and positive"));
        }
        if rank == 0 {
            return Err(Error::invalid("manifold rank must be at least 1"));
        }
        Ok(ManifoldSpec { shape, rank })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Interior bond ranks `r_1..r_{d-1}`.
    pub fn bond_ranks(&self) -> Vec<usize> {
        let d = self.shape.len();
        (1..d)
            .map(|k| {
                let left = saturating_product(&self.shape[..k]);
                let right = saturating_product(&self.shape[k..]);
                self.rank.min(left).min(right)
            })
            .collect()
    }

    /// Random point with i.i.d. normal cores, rescaled to unit Frobenius norm.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> TtTensor {
        let t = TtTensor::random(&self.shape, &self.bond_ranks(), rng)
            .expect("manifold spec was validated");
        let norm = t.norm();
        if norm > 0.0 {
            t.scale(1.0 / norm)
        } else {
            t
        }
    }

    pub fn contains(&self, t: &TtTensor) -> bool {
        let ranks = t.ranks();
        t.shape() == self.shape && ranks[1..ranks.len() - 1] == self.bond_ranks()[..]
    }
}

fn saturating_product(dims: &[usize]) -> usize {
    dims.iter().fold(1usize, |acc, &n| acc.saturating_mul(n))
}

/// Left- and right-orthogonal frames of a manifold point.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    left: Vec<TtCore>,
    right: Vec<TtCore>,
}

impl TangentFrame {
    /// Canonicalises `w`. Numerically redundant bond dimensions are removed
    /// first so that both frames carry the same (minimal) ranks.
    pub fn at(w: &TtTensor) -> Self {
        // Rounding sweeps left to right, leaving all but the last core
        // left-orthogonal.
        let left_form = w.round(w.max_rank());
        let right_form = left_form.orthogonalize(Direction::Right);
        debug_assert_eq!(left_form.ranks(), right_form.ranks());
        TangentFrame {
            left: left_form.into_cores(),
            right: right_form.into_cores(),
        }
    }

    pub fn order(&self) -> usize {
        self.left.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.left.iter().map(TtCore::mode).collect()
    }

    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.left.iter().map(TtCore::left_rank).collect();
        r.push(1);
        r
    }

    pub fn left_cores(&self) -> &[TtCore] {
        &self.left
    }

    pub fn right_cores(&self) -> &[TtCore] {
        &self.right
    }

    pub fn base_point(&self) -> TtTensor {
        TtTensor::from_cores(self.left.clone()).expect("frame cores are consistent")
    }

    /// Orthogonal projection of an arbitrary TT onto the tangent space.
    pub fn project(self: &Arc<Self>, z: &TtTensor) -> Result<TtTangentVector> {
        if z.shape() != self.shape() {
            return Err(Error::invalid("projection: shape mismatch"));
        }
        let d = self.order();
        let zc = z.cores();

        // right[k] contracts modes k..d of z against V: (r^Z_k x r^W_k).
        let mut right = vec![Matrix::zeros(0, 0); d + 1];
        right[d] = Matrix::from_vec(1, 1, vec![1.0]);
        for k in (0..d).rev() {
            right[k] = contract_step_right(&right[k + 1], &zc[k], &self.right[k]);
        }

        let mut deltas = Vec::with_capacity(d);
        let mut left = Matrix::from_vec(1, 1, vec![1.0]);
        for k in 0..d {
            let u = &self.left[k];
            let zk = &zc[k];
            let q = &right[k + 1];
            let mut delta = TtCore::zeros(u.left_rank(), u.mode(), u.right_rank());
            // delta(a, i, b) = sum_{a', b'} left[a, a'] z(a', i, b') q[b', b]
            let mut tmp = vec![0.0; u.right_rank()];
            for a in 0..u.left_rank() {
                for i in 0..u.mode() {
                    tmp.iter_mut().for_each(|t| *t = 0.0);
                    for ap in 0..zk.left_rank() {
                        let l = left[(a, ap)];
                        if l == 0.0 {
                            continue;
                        }
                        for bp in 0..zk.right_rank() {
                            let lz = l * zk.get(ap, i, bp);
                            if lz == 0.0 {
                                continue;
                            }
                            for (t, &qv) in tmp.iter_mut().zip(q.row(bp)) {
                                *t += lz * qv;
                            }
                        }
                    }
                    for (b, &t) in tmp.iter().enumerate() {
                        delta.set(a, i, b, t);
                    }
                }
            }
            deltas.push(delta);
            if k + 1 < d {
                left = contract_step(&left, u, zk);
            }
        }
        self.gauge(&mut deltas);
        Ok(TtTangentVector {
            frame: Arc::clone(self),
            deltas,
        })
    }

    /// Projection of `sum_s coeffs[s] * X_s` where every `X_s` is rank one
    /// with mode-`k` factor `i -> factor(s, k, i)`. Linear in the number of
    /// summands and never forms the (high-rank) sum.
    pub fn project_rank1_sum<F>(self: &Arc<Self>, coeffs: &[f64], factor: F) -> TtTangentVector
    where
        F: Fn(usize, usize, usize) -> f64,
    {
        let d = self.order();
        let ranks = self.ranks();
        let mut deltas: Vec<TtCore> = self
            .left
            .iter()
            .map(|u| TtCore::zeros(u.left_rank(), u.mode(), u.right_rank()))
            .collect();

        let mut right_vecs: Vec<Vec<f64>> = ranks.iter().map(|&r| vec![0.0; r]).collect();
        let mut left_vec = Vec::new();
        let mut next_left = Vec::new();

        for (s, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            right_vecs[d][0] = 1.0;
            for k in (0..d).rev() {
                let v = &self.right[k];
                let (done, todo) = right_vecs.split_at_mut(k + 1);
                let out = &mut done[k];
                let q = &todo[0];
                out.iter_mut().for_each(|x| *x = 0.0);
                for (a, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for i in 0..v.mode() {
                        let f = factor(s, k, i);
                        if f == 0.0 {
                            continue;
                        }
                        let off = (a * v.mode() + i) * v.right_rank();
                        let row = &v.data()[off..off + v.right_rank()];
                        acc += f * crate::linalg::dot(row, q);
                    }
                    *o = acc;
                }
            }

            left_vec.clear();
            left_vec.push(1.0);
            for k in 0..d {
                let u = &self.left[k];
                let q = &right_vecs[k + 1];
                let delta = &mut deltas[k];
                for i in 0..u.mode() {
                    let f = c * factor(s, k, i);
                    if f == 0.0 {
                        continue;
                    }
                    for (a, &la) in left_vec.iter().enumerate() {
                        let w = f * la;
                        if w == 0.0 {
                            continue;
                        }
                        let off = (a * u.mode() + i) * u.right_rank();
                        let row = &mut delta.data_mut()[off..off + u.right_rank()];
                        for (x, &qb) in row.iter_mut().zip(q) {
                            *x += w * qb;
                        }
                    }
                }
                if k + 1 < d {
                    next_left.clear();
                    next_left.resize(u.right_rank(), 0.0);
                    for i in 0..u.mode() {
                        let f = factor(s, k, i);
                        if f == 0.0 {
                            continue;
                        }
                        for (a, &la) in left_vec.iter().enumerate() {
                            let w = f * la;
                            let off = (a * u.mode() + i) * u.right_rank();
                            for (nl, &g) in next_left
                                .iter_mut()
                                .zip(&u.data()[off..off + u.right_rank()])
                            {
                                *nl += w * g;
                            }
                        }
                    }
                    core::mem::swap(&mut left_vec, &mut next_left);
                }
            }
        }
        self.gauge(&mut deltas);
        TtTangentVector {
            frame: Arc::clone(self),
            deltas,
        }
    }

    /// The point itself as a tangent vector at itself.
    pub fn base_as_tangent(self: &Arc<Self>) -> TtTangentVector {
        let d = self.order();
        let mut deltas: Vec<TtCore> = self
            .left
            .iter()
            .map(|u| TtCore::zeros(u.left_rank(), u.mode(), u.right_rank()))
            .collect();
        deltas[d - 1] = self.left[d - 1].clone();
        TtTangentVector {
            frame: Arc::clone(self),
            deltas,
        }
    }

    /// Builds a tangent vector from arbitrary delta cores, enforcing the gauge.
    pub fn tangent_from_deltas(self: &Arc<Self>, mut deltas: Vec<TtCore>) -> Result<TtTangentVector> {
        if deltas.len() != self.order()
            || deltas.iter().zip(&self.left).any(|(a, u)| {
                (a.left_rank(), a.mode(), a.right_rank()) != (u.left_rank(), u.mode(), u.right_rank())
            })
        {
            return Err(Error::invalid("delta cores do not match the frame"));
        }
        self.gauge(&mut deltas);
        Ok(TtTangentVector {
            frame: Arc::clone(self),
            deltas,
        })
    }

    /// `dG_k <- (I - U_k U_kᵀ) dG_k` on left unfoldings, for `k < d`.
    fn gauge(&self, deltas: &mut [TtCore]) {
        let d = self.order();
        for k in 0..d.saturating_sub(1) {
            let u = self.left[k].left_unfolding();
            let mut g = deltas[k].left_unfolding();
            let coeff = u.t_matmul(&g);
            let correction = u.matmul(&coeff);
            for (x, c) in g.as_mut_slice().iter_mut().zip(correction.as_slice()) {
                *x -= c;
            }
            let (left, mode) = (deltas[k].left_rank(), deltas[k].mode());
            deltas[k] = TtCore::from_left_unfolding(g, left, mode);
        }
    }
}

/// `out[b, a] = sum_{i, b', a'} z(b, i, b') q[b', a'] v(a, i, a')`.
fn contract_step_right(q: &Matrix, z: &TtCore, v: &TtCore) -> Matrix {
    let mut out = Matrix::zeros(z.left_rank(), v.left_rank());
    let mut y = vec![0.0; v.right_rank()];
    for b in 0..z.left_rank() {
        for i in 0..z.mode() {
            // y[a'] = sum_b' z(b, i, b') q[b', a']
            y.iter_mut().for_each(|x| *x = 0.0);
            for bp in 0..z.right_rank() {
                let zv = z.get(b, i, bp);
                if zv == 0.0 {
                    continue;
                }
                for (yv, &qv) in y.iter_mut().zip(q.row(bp)) {
                    *yv += zv * qv;
                }
            }
            for a in 0..v.left_rank() {
                let off = (a * v.mode() + i) * v.right_rank();
                out[(b, a)] += crate::linalg::dot(&v.data()[off..off + v.right_rank()], &y);
            }
        }
    }
    out
}

/// Element of the tangent space at the frame's base point.
#[derive(Debug, Clone)]
pub struct TtTangentVector {
    frame: Arc<TangentFrame>,
    deltas: Vec<TtCore>,
}

impl TtTangentVector {
    pub fn frame(&self) -> &Arc<TangentFrame> {
        &self.frame
    }

    pub fn deltas(&self) -> &[TtCore] {
        &self.deltas
    }

    pub fn scale(&self, c: f64) -> TtTangentVector {
        let mut out = self.clone();
        out.deltas.iter_mut().for_each(|g| g.scale(c));
        out
    }

    /// `self + c * other`; both must live at the same frame.
    pub fn axpy(&self, c: f64, other: &TtTangentVector) -> Result<TtTangentVector> {
        if !Arc::ptr_eq(&self.frame, &other.frame) {
            return Err(Error::invalid("tangent vectors belong to different frames"));
        }
        let mut out = self.clone();
        for (a, b) in out.deltas.iter_mut().zip(&other.deltas) {
            a.axpy(c, b);
        }
        Ok(out)
    }

    pub fn inner(&self, other: &TtTangentVector) -> Result<f64> {
        if !Arc::ptr_eq(&self.frame, &other.frame) {
            return Err(Error::invalid("tangent vectors belong to different frames"));
        }
        Ok(self.deltas.iter().zip(&other.deltas).map(|(a, b)| a.dot(b)).sum())
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.deltas.iter().map(|g| g.dot(g)).sum::<f64>().max(0.0))
    }

    /// Largest entry of `U_kᵀ dG_k` over `k < d`.
    pub fn gauge_violation(&self) -> f64 {
        let d = self.deltas.len();
        (0..d.saturating_sub(1))
            .map(|k| {
                let u = self.frame.left[k].left_unfolding();
                let g = self.deltas[k].left_unfolding();
                u.t_matmul(&g)
                    .as_slice()
                    .iter()
                    .fold(0.0f64, |m, x| m.max(x.abs()))
            })
            .fold(0.0, f64::max)
    }

    /// Explicit TT with interior ranks at most twice the frame's.
    pub fn to_tt(&self) -> TtTensor {
        tangent_cores_to_tt(&self.frame, &self.deltas)
    }
}

/// Assembles `sum_k U_<k dG_k V_>k` as a TT with block cores
/// `[dG_1 U_1]`, `[[V_k, 0], [dG_k, U_k]]`, `[[V_d], [dG_d]]`.
fn tangent_cores_to_tt(frame: &TangentFrame, deltas: &[TtCore]) -> TtTensor {
    let d = deltas.len();
    if d == 1 {
        return TtTensor::from_cores(vec![deltas[0].clone()]).expect("single core");
    }
    let mut cores = Vec::with_capacity(d);
    for k in 0..d {
        let (u, v, g) = (&frame.left[k], &frame.right[k], &deltas[k]);
        let n = u.mode();
        let (rl, rr) = (u.left_rank(), u.right_rank());
        let core = if k == 0 {
            let mut c = TtCore::zeros(1, n, 2 * rr);
            for i in 0..n {
                for b in 0..rr {
                    c.set(0, i, b, g.get(0, i, b));
                    c.set(0, i, rr + b, u.get(0, i, b));
                }
            }
            c
        } else if k == d - 1 {
            let mut c = TtCore::zeros(2 * rl, n, 1);
            for i in 0..n {
                for a in 0..rl {
                    c.set(a, i, 0, v.get(a, i, 0));
                    c.set(rl + a, i, 0, g.get(a, i, 0));
                }
            }
            c
        } else {
            let mut c = TtCore::zeros(2 * rl, n, 2 * rr);
            for i in 0..n {
                for a in 0..rl {
                    for b in 0..rr {
                        c.set(a, i, b, v.get(a, i, b));
                        c.set(rl + a, i, b, g.get(a, i, b));
                        c.set(rl + a, i, rr + b, u.get(a, i, b));
                    }
                }
            }
            c
        };
        cores.push(core);
    }
    TtTensor::from_cores(cores).expect("block cores are consistent")
}

/// Projects `z` onto the tangent space of the fixed-rank manifold at `w`.
pub fn project_to_tangent(w: &TtTensor, z: &TtTensor) -> Result<TtTangentVector> {
    if w.shape() != z.shape() {
        return Err(Error::invalid("projection: shape mismatch"));
    }
    Arc::new(TangentFrame::at(w)).project(z)
}

/// `w - alpha * p` (interior ranks at most 2r), rounded back to the bond
/// ranks of `w`.
pub fn retract(w: &TtTensor, p: &TtTangentVector, alpha: f64) -> Result<TtTensor> {
    let frame = p.frame();
    if w.shape() != frame.shape() {
        return Err(Error::invalid("retraction: tangent vector is based elsewhere"));
    }
    let d = frame.order();
    let mut deltas: Vec<TtCore> = p.deltas.iter().map(|g| {
        let mut g = g.clone();
        g.scale(-alpha);
        g
    }).collect();
    deltas[d - 1].axpy(1.0, &frame.left[d - 1]);
    let stepped = tangent_cores_to_tt(frame, &deltas);
    let ranks = w.ranks();
    Ok(stepped.round_to_ranks(&ranks[1..d]))
}

/// One Riemannian gradient-descent step: project, then retract.
pub fn riemannian_step(w: &TtTensor, euclid_grad: &TtTensor, alpha: f64) -> Result<TtTensor> {
    let p = project_to_tangent(w, euclid_grad)?;
    retract(w, &p, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tt::DenseTensor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn point(shape: &[usize], rank: usize, seed: u64) -> TtTensor {
        ManifoldSpec::new(shape.to_vec(), rank)
            .unwrap()
            .random_point(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    fn random_tt(shape: &[usize], ranks: &[usize], seed: u64) -> TtTensor {
        TtTensor::random(shape, ranks, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    fn dist(a: &TtTensor, b: &TtTensor) -> f64 {
        a.to_dense().distance(&b.to_dense())
    }

    #[test]
    fn bond_ranks_are_capped_by_mode_products() {
        let spec = ManifoldSpec::new(vec![2; 6], 6).unwrap();
        assert_eq!(spec.bond_ranks(), vec![2, 4, 6, 4, 2]);
        let spec = ManifoldSpec::new(vec![2; 2], 6).unwrap();
        assert_eq!(spec.bond_ranks(), vec![2]);
        assert!(ManifoldSpec::new(vec![2, 2], 0).is_err());
    }

    #[test]
    fn point_is_tangent_to_itself() {
        let w = point(&[2, 2, 2, 2], 2, 1);
        let p = project_to_tangent(&w, &w).unwrap();
        assert!(dist(&p.to_tt(), &w) < 1e-10);
        assert!(p.gauge_violation() < 1e-10);
    }

    #[test]
    fn projection_is_idempotent_and_contracting() {
        let w = point(&[2, 3, 2, 2], 2, 2);
        let z = random_tt(&[2, 3, 2, 2], &[3, 2, 2], 3);
        let p = project_to_tangent(&w, &z).unwrap();
        let pp = project_to_tangent(&w, &p.to_tt()).unwrap();
        assert!(dist(&p.to_tt(), &pp.to_tt()) <= 1e-9 * z.norm());
        assert!(p.norm() <= z.norm() + 1e-10);
        assert!((p.norm() - p.to_tt().norm()).abs() < 1e-10);
        let interior = p.to_tt().ranks();
        assert!(interior.iter().zip(w.ranks()).all(|(a, b)| *a <= 2 * b));
    }

    #[test]
    fn rank1_sum_projection_matches_generic_path() {
        let w = point(&[2, 2, 2, 2, 2], 3, 4);
        let frame = Arc::new(TangentFrame::at(&w));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let factors: Vec<Vec<Vec<f64>>> = (0..7)
            .map(|_| (0..5).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect())
            .collect();
        let coeffs: Vec<f64> = (0..7).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fast = frame.project_rank1_sum(&coeffs, |s, k, i| factors[s][k][i]);
        let mut z = TtTensor::zeros(&[2; 5]).unwrap();
        for (c, f) in coeffs.iter().zip(&factors) {
            z = z.add(&TtTensor::rank_one(f).unwrap().scale(*c)).unwrap();
        }
        let slow = frame.project(&z).unwrap();
        assert!(dist(&fast.to_tt(), &slow.to_tt()) < 1e-10);
    }

    #[test]
    fn retraction_examples() {
        let w = point(&[2, 2, 2, 2], 2, 6);
        let z = random_tt(&[2, 2, 2, 2], &[2, 2, 2], 7);
        let p = project_to_tangent(&w, &z).unwrap();
        let near = retract(&w, &p, 1e-9).unwrap();
        assert!(dist(&near, &w) <= 1e-7 * p.norm());
        let zero = p.scale(0.0);
        assert!(dist(&retract(&w, &zero, 0.3).unwrap(), &w) < 1e-12);
        let moved = retract(&w, &p, 0.1).unwrap();
        assert!(moved.ranks().iter().all(|&r| r <= 2));
    }

    #[test]
    fn retraction_without_rounding_is_exact_step() {
        // Full-rank manifold on (2,2,2): bond ranks (2,2) cannot be exceeded,
        // so rounding never truncates.
        let w = point(&[2, 2, 2], 4, 8);
        assert_eq!(w.ranks(), vec![1, 2, 2, 1]);
        let z = random_tt(&[2, 2, 2], &[2, 2], 9);
        let p = project_to_tangent(&w, &z).unwrap();
        let out = retract(&w, &p, 0.7).unwrap();
        let expected = w.sub(&p.to_tt().scale(0.7)).unwrap();
        assert!(dist(&out, &expected) < 1e-10);
    }

    #[test]
    fn zero_gradient_step_is_identity() {
        let w = point(&[2, 2, 2], 1, 10);
        let g = TtTensor::zeros(&[2, 2, 2]).unwrap();
        assert!(dist(&riemannian_step(&w, &g, 0.5).unwrap(), &w) < 1e-12);
    }

    #[test]
    fn rank_one_projection_matches_dense_tangent_basis() {
        // d = 3, r = 1: tangent space spanned by the derivatives of the
        // rank-one parameterisation; compare against least squares.
        let w = point(&[2, 2, 2], 1, 11);
        let z = random_tt(&[2, 2, 2], &[2, 2], 12);
        let projected = project_to_tangent(&w, &z).unwrap().to_tt().to_dense();
        let dense_oracle = dense_tangent_projection(&w, &z.to_dense());
        for (a, b) in projected.data().iter().zip(&dense_oracle) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    /// Orthogonal projection of `z` onto span{d W / d core entries}, via
    /// Gram-Schmidt on the dense generators.
    fn dense_tangent_projection(w: &TtTensor, z: &DenseTensor) -> Vec<f64> {
        let mut generators: Vec<Vec<f64>> = Vec::new();
        for k in 0..w.order() {
            for e in 0..w.core(k).num_params() {
                let mut cores = w.cores().to_vec();
                cores[k].data_mut().iter_mut().for_each(|x| *x = 0.0);
                cores[k].data_mut()[e] = 1.0;
                generators.push(TtTensor::from_cores(cores).unwrap().to_dense().data().to_vec());
            }
        }
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for mut g in generators {
            for _ in 0..2 {
                for b in &basis {
                    let c: f64 = g.iter().zip(b).map(|(x, y)| x * y).sum();
                    g.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let n = sqrt(g.iter().map(|x| x * x).sum());
            if n > 1e-8 {
                basis.push(g.iter().map(|x| x / n).collect());
            }
        }
        let mut out = vec![0.0; z.data().len()];
        for b in &basis {
            let c: f64 = z.data().iter().zip(b).map(|(x, y)| x * y).sum();
            out.iter_mut().zip(b).for_each(|(o, y)| *o += c * y);
        }
        out
    }
}
