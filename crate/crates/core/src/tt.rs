//! Dense tensors and the tensor-train (TT / MPS) format.
//!
//! A TT of order d stores cores `G_k` of shape `(r_{k-1}, n_k, r_k)` with
//! `r_0 = r_d = 1`; entry `(i_1, .., i_d)` is the 1x1 matrix product
//! `G_1(i_1) G_2(i_2) .. G_d(i_d)`. Cores are row-major with the mode index in
//! the middle, so the left unfolding `(r_{k-1} n_k) x r_k` and the right
//! unfolding `r_{k-1} x (n_k r_k)` are both plain reinterpretations of the
//! core buffer.

use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{qr, svd, Matrix, Qr, Svd, SVD_ZERO_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::invalid("tensor needs at least one mode"));
        }
        if shape.contains(&0) {
            return Err(Error::invalid("tensor mode dimensions must be positive"));
        }
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(Error::invalid(alloc::format!(
                "shape {shape:?} needs {len} entries, got {}",
                data.len()
            )));
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len: usize = shape.iter().product();
        let mut idx = vec![0; shape.len()];
        let mut data = Vec::with_capacity(len);
        for flat in 0..len {
            unravel(flat, &shape, &mut idx);
            data.push(f(&idx));
        }
        DenseTensor::new(shape, data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[ravel(idx, &self.shape)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn dot(&self, other: &DenseTensor) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::invalid("dense dot: shape mismatch"));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &DenseTensor) -> f64 {
        assert_eq!(self.shape, other.shape);
        sqrt(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
        )
    }
}

/// Row-major multi-index to flat offset (last index fastest).
pub fn ravel(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

pub fn unravel(mut flat: usize, shape: &[usize], idx: &mut [usize]) {
    for k in (0..shape.len()).rev() {
        idx[k] = flat % shape[k];
        flat /= shape[k];
    }
}

/// One TT core of shape `(left, mode, right)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TtCore {
    left: usize,
    mode: usize,
    right: usize,
    data: Vec<f64>,
}

impl TtCore {
    pub fn new(left: usize, mode: usize, right: usize, data: Vec<f64>) -> Result<Self> {
        if left == 0 || mode == 0 || right == 0 {
            return Err(Error::invalid("core dimensions must be positive"));
        }
        if data.len() != left * mode * right {
            return Err(Error::invalid("core data length mismatch"));
        }
        Ok(TtCore {
            left,
            mode,
            right,
            data,
        })
    }

    pub fn zeros(left: usize, mode: usize, right: usize) -> Self {
        TtCore {
            left,
            mode,
            right,
            data: vec![0.0; left * mode * right],
        }
    }

    pub(crate) fn from_left_unfolding(m: Matrix, left: usize, mode: usize) -> Self {
        debug_assert_eq!(m.rows(), left * mode);
        let right = m.cols();
        TtCore {
            left,
            mode,
            right,
            data: m.into_vec(),
        }
    }

    pub(crate) fn from_right_unfolding(m: Matrix, mode: usize, right: usize) -> Self {
        debug_assert_eq!(m.cols(), mode * right);
        let left = m.rows();
        TtCore {
            left,
            mode,
            right,
            data: m.into_vec(),
        }
    }

    pub fn left_rank(&self) -> usize {
        self.left
    }

    pub fn mode(&self) -> usize {
        self.mode
    }

    pub fn right_rank(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, b: usize) -> f64 {
        self.data[(a * self.mode + i) * self.right + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, i: usize, b: usize, value: f64) {
        self.data[(a * self.mode + i) * self.right + b] = value;
    }

    /// The matrix `G(i)` of shape `left x right`.
    pub fn slice(&self, i: usize) -> Matrix {
        let mut m = Matrix::zeros(self.left, self.right);
        for a in 0..self.left {
            for b in 0..self.right {
                m[(a, b)] = self.get(a, i, b);
            }
        }
        m
    }

    pub fn left_unfolding(&self) -> Matrix {
        Matrix::from_vec(self.left * self.mode, self.right, self.data.clone())
    }

    pub fn right_unfolding(&self) -> Matrix {
        Matrix::from_vec(self.left, self.mode * self.right, self.data.clone())
    }

    pub fn num_params(&self) -> usize {
        self.data.len()
    }

    pub(crate) fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|x| *x *= c);
    }

    pub(crate) fn axpy(&mut self, c: f64, other: &TtCore) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += c * y;
        }
    }

    pub(crate) fn dot(&self, other: &TtCore) -> f64 {
        crate::linalg::dot(&self.data, &other.data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Every core except the last has orthonormal columns in its left unfolding.
    Left,
    /// Every core except the first has orthonormal rows in its right unfolding.
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TtTensor {
    cores: Vec<TtCore>,
}

impl TtTensor {
    pub fn from_cores(cores: Vec<TtCore>) -> Result<Self> {
        let (first, last) = match (cores.first(), cores.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::invalid("a tensor train needs at least one core")),
        };
        if first.left != 1 || last.right != 1 {
            return Err(Error::invalid("boundary ranks must be 1"));
        }
        for (k, w) in cores.windows(2).enumerate() {
            if w[0].right != w[1].left {
                return Err(Error::invalid(alloc::format!(
                    "rank mismatch between cores {k} and {}",
                    k + 1
                )));
            }
        }
        Ok(TtTensor { cores })
    }

    /// Rank-1 all-zero tensor.
    pub fn zeros(shape: &[usize]) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::invalid("degenerate shape"));
        }
        Ok(TtTensor {
            cores: shape.iter().map(|&n| TtCore::zeros(1, n, 1)).collect(),
        })
    }

    /// Outer product of the given vectors.
    pub fn rank_one(factors: &[Vec<f64>]) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|f| f.is_empty()) {
            return Err(Error::invalid("rank-one factors must be non-empty"));
        }
        let cores = factors
            .iter()
            .map(|f| TtCore::new(1, f.len(), 1, f.clone()))
            .collect::<Result<_>>()?;
        TtTensor::from_cores(cores)
    }

    /// Cores with i.i.d. standard normal entries and the given interior ranks
    /// (`interior_ranks.len() == shape.len() - 1`).
    pub fn random<R: Rng + ?Sized>(
        shape: &[usize],
        interior_ranks: &[usize],
        rng: &mut R,
    ) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::invalid("degenerate shape"));
        }
        if interior_ranks.len() + 1 != shape.len() || interior_ranks.contains(&0) {
            return Err(Error::invalid("need d-1 positive interior ranks"));
        }
        let mut ranks = Vec::with_capacity(shape.len() + 1);
        ranks.push(1);
        ranks.extend_from_slice(interior_ranks);
        ranks.push(1);
        let cores = shape
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let len = ranks[k] * n * ranks[k + 1];
                let data = (0..len).map(|_| rng.sample(StandardNormal)).collect();
                TtCore::new(ranks[k], n, ranks[k + 1], data)
            })
            .collect::<Result<_>>()?;
        TtTensor::from_cores(cores)
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.mode).collect()
    }

    /// Bond ranks `(r_0, .., r_d)`.
    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.cores.iter().map(|c| c.left).collect();
        r.push(1);
        r
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    pub fn cores(&self) -> &[TtCore] {
        &self.cores
    }

    pub fn core(&self, k: usize) -> &TtCore {
        &self.cores[k]
    }

    pub fn into_cores(self) -> Vec<TtCore> {
        self.cores
    }

    /// Number of stored core entries.
    pub fn num_params(&self) -> usize {
        self.cores.iter().map(TtCore::num_params).sum()
    }

    pub fn entry(&self, idx: &[usize]) -> f64 {
        assert_eq!(idx.len(), self.order());
        let mut v = vec![1.0];
        for (core, &i) in self.cores.iter().zip(idx) {
            let mut next = vec![0.0; core.right];
            for (a, &va) in v.iter().enumerate() {
                for (b, nb) in next.iter_mut().enumerate() {
                    *nb += va * core.get(a, i, b);
                }
            }
            v = next;
        }
        v[0]
    }

    /// TT-SVD: sequential truncated SVDs of the unfoldings. Each bond keeps
    /// at most `max_rank` singular values; with `eps > 0` the relative
    /// Frobenius error is additionally bounded by `eps`. When both bind,
    /// `max_rank` wins.
    pub fn from_dense(t: &DenseTensor, max_rank: usize, eps: f64) -> Result<Self> {
        if max_rank == 0 {
            return Err(Error::invalid("max_rank must be at least 1"));
        }
        if !(eps >= 0.0) {
            return Err(Error::invalid("eps must be nonnegative"));
        }
        let d = t.shape.len();
        let delta = per_bond_threshold(eps, d, t.frobenius_norm());
        let mut cores = Vec::with_capacity(d);
        let mut rest: usize = t.shape.iter().product();
        let mut left_rank = 1;
        let mut carry = t.data.clone();
        for k in 0..d.saturating_sub(1) {
            let n = t.shape[k];
            rest /= n;
            let m = Matrix::from_vec(left_rank * n, rest, carry);
            let decomposition = svd(&m);
            let r = choose_rank(&decomposition.singular_values, max_rank, delta);
            let Svd {
                u,
                singular_values,
                vt,
            } = decomposition;
            cores.push(TtCore::from_left_unfolding(
                u.truncate_cols(r),
                left_rank,
                n,
            ));
            let mut sv = vt.truncate_rows(r);
            sv.scale_rows(&singular_values[..r]);
            carry = sv.into_vec();
            left_rank = r;
        }
        cores.push(TtCore::new(left_rank, t.shape[d - 1], 1, carry)?);
        TtTensor::from_cores(cores)
    }

    pub fn to_dense(&self) -> DenseTensor {
        let mut acc = Matrix::from_vec(1, 1, vec![1.0]);
        for core in &self.cores {
            let mut next = Matrix::zeros(acc.rows() * core.mode, core.right);
            for p in 0..acc.rows() {
                for i in 0..core.mode {
                    let out = next.row_mut(p * core.mode + i);
                    for (a, &x) in acc.row(p).iter().enumerate() {
                        if x == 0.0 {
                            continue;
                        }
                        let off = (a * core.mode + i) * core.right;
                        for (o, &g) in out.iter_mut().zip(&core.data[off..off + core.right]) {
                            *o += x * g;
                        }
                    }
                }
            }
            acc = next;
        }
        DenseTensor {
            shape: self.shape(),
            data: acc.into_vec(),
        }
    }

    /// Sum over all indices of `self[i] * other[i]`, by left-to-right core
    /// contraction. Ranks may differ; mode sizes must match.
    pub fn dot(&self, other: &TtTensor) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(Error::invalid("tt dot: shape mismatch"));
        }
        let mut m = Matrix::from_vec(1, 1, vec![1.0]);
        for (a, b) in self.cores.iter().zip(&other.cores) {
            m = contract_step(&m, a, b);
        }
        Ok(m[(0, 0)])
    }

    pub fn norm(&self) -> f64 {
        let sq = self.dot(self).unwrap_or(0.0);
        if sq > 0.0 {
            sqrt(sq)
        } else {
            0.0
        }
    }

    pub fn scale(&self, c: f64) -> TtTensor {
        let mut out = self.clone();
        out.cores[0].scale(c);
        out
    }

    /// Elementwise sum; interior ranks add.
    pub fn add(&self, other: &TtTensor) -> Result<TtTensor> {
        if self.shape() != other.shape() {
            return Err(Error::invalid("tt add: shape mismatch"));
        }
        let d = self.order();
        if d == 1 {
            let mut out = self.clone();
            out.cores[0].axpy(1.0, &other.cores[0]);
            return Ok(out);
        }
        let cores = self
            .cores
            .iter()
            .zip(&other.cores)
            .enumerate()
            .map(|(k, (a, b))| {
                let n = a.mode;
                let left = if k == 0 { 1 } else { a.left + b.left };
                let right = if k == d - 1 { 1 } else { a.right + b.right };
                let mut c = TtCore::zeros(left, n, right);
                let (a_row, b_row) = if k == 0 { (0, 0) } else { (0, a.left) };
                let (a_col, b_col) = if k == d - 1 { (0, 0) } else { (0, a.right) };
                for i in 0..n {
                    for x in 0..a.left {
                        for y in 0..a.right {
                            c.set(a_row + x, i, a_col + y, a.get(x, i, y));
                        }
                    }
                    for x in 0..b.left {
                        for y in 0..b.right {
                            c.set(b_row + x, i, b_col + y, b.get(x, i, y));
                        }
                    }
                }
                c
            })
            .collect();
        TtTensor::from_cores(cores)
    }

    pub fn sub(&self, other: &TtTensor) -> Result<TtTensor> {
        self.add(&other.scale(-1.0))
    }

    /// Canonical form by a sweep of QR factorisations. QR factors carry a
    /// nonnegative diagonal, so repeating the sweep leaves the cores fixed.
    /// Bond ranks may shrink where an unfolding has fewer rows than columns.
    pub fn orthogonalize(&self, direction: Direction) -> TtTensor {
        let mut cores = self.cores.clone();
        let d = cores.len();
        match direction {
            Direction::Left => {
                for k in 0..d.saturating_sub(1) {
                    let (left, mode) = (cores[k].left, cores[k].mode);
                    let Qr { q, r } = qr(&cores[k].left_unfolding());
                    cores[k] = TtCore::from_left_unfolding(q, left, mode);
                    let next = &cores[k + 1];
                    let (mode1, right1) = (next.mode, next.right);
                    let merged = r.matmul(&next.right_unfolding());
                    cores[k + 1] = TtCore::from_right_unfolding(merged, mode1, right1);
                }
            }
            Direction::Right => {
                for k in (1..d).rev() {
                    let (mode, right) = (cores[k].mode, cores[k].right);
                    let Qr { q, r } = qr(&cores[k].right_unfolding().transpose());
                    cores[k] = TtCore::from_right_unfolding(q.transpose(), mode, right);
                    let prev = &cores[k - 1];
                    let (left0, mode0) = (prev.left, prev.mode);
                    let merged = prev.left_unfolding().matmul(&r.transpose());
                    cores[k - 1] = TtCore::from_left_unfolding(merged, left0, mode0);
                }
            }
        }
        TtTensor { cores }
    }

    /// Recompresses to interior ranks at most `target_rank` by
    /// orthogonalisation followed by truncated SVDs (quasi-optimal).
    pub fn round(&self, target_rank: usize) -> TtTensor {
        self.round_with(|_| target_rank.max(1), 0.0)
    }

    /// As [`round`](Self::round) but also truncates so that the relative
    /// Frobenius error stays within `eps`.
    pub fn round_eps(&self, target_rank: usize, eps: f64) -> TtTensor {
        self.round_with(|_| target_rank.max(1), eps.max(0.0))
    }

    /// Rounds with a separate cap for each interior bond (`caps[k]` bounds
    /// `r_{k+1}`).
    pub fn round_to_ranks(&self, caps: &[usize]) -> TtTensor {
        debug_assert_eq!(caps.len() + 1, self.order());
        self.round_with(|k| caps[k].max(1), 0.0)
    }

    fn round_with(&self, cap: impl Fn(usize) -> usize, eps: f64) -> TtTensor {
        let mut t = self.orthogonalize(Direction::Right);
        let d = t.order();
        let delta = per_bond_threshold(eps, d, t.cores[0].left_unfolding().frobenius_norm());
        for k in 0..d.saturating_sub(1) {
            let (left, mode) = (t.cores[k].left, t.cores[k].mode);
            let decomposition = svd(&t.cores[k].left_unfolding());
            let r = choose_rank(&decomposition.singular_values, cap(k), delta);
            let Svd {
                u,
                singular_values,
                vt,
            } = decomposition;
            t.cores[k] = TtCore::from_left_unfolding(u.truncate_cols(r), left, mode);
            let mut sv = vt.truncate_rows(r);
            sv.scale_rows(&singular_values[..r]);
            let next = &t.cores[k + 1];
            let (mode1, right1) = (next.mode, next.right);
            let merged = sv.matmul(&next.right_unfolding());
            t.cores[k + 1] = TtCore::from_right_unfolding(merged, mode1, right1);
        }
        t
    }
}

/// One step of the left-to-right contraction used by `dot`:
/// `M'[a', b'] = sum_{a, b, i} M[a, b] A(a, i, a') B(b, i, b')`.
pub(crate) fn contract_step(m: &Matrix, a: &TtCore, b: &TtCore) -> Matrix {
    debug_assert_eq!(m.rows(), a.left);
    debug_assert_eq!(m.cols(), b.left);
    let mut out = Matrix::zeros(a.right, b.right);
    let mut y = vec![0.0; b.right];
    for i in 0..a.mode {
        for x in 0..a.left {
            y.iter_mut().for_each(|v| *v = 0.0);
            for (bb, &mv) in m.row(x).iter().enumerate() {
                if mv == 0.0 {
                    continue;
                }
                let off = (bb * b.mode + i) * b.right;
                for (yv, &bv) in y.iter_mut().zip(&b.data[off..off + b.right]) {
                    *yv += mv * bv;
                }
            }
            let off = (x * a.mode + i) * a.right;
            for (ap, &av) in a.data[off..off + a.right].iter().enumerate() {
                if av == 0.0 {
                    continue;
                }
                for (o, &yv) in out.row_mut(ap).iter_mut().zip(&y) {
                    *o += av * yv;
                }
            }
        }
    }
    out
}

fn per_bond_threshold(eps: f64, d: usize, norm: f64) -> f64 {
    if eps > 0.0 && d > 1 {
        eps / sqrt((d - 1) as f64) * norm
    } else {
        0.0
    }
}

/// Rank kept at one bond: drop numerically zero singular values, then
/// anything whose tail energy fits under `delta`, then apply the cap.
fn choose_rank(s: &[f64], cap: usize, delta: f64) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    let mut r = s
        .iter()
        .take_while(|&&x| x > SVD_ZERO_TOL * smax)
        .count()
        .max(1);
    if delta > 0.0 {
        let mut tail = 0.0;
        let mut keep = s.len();
        while keep > 1 {
            let next = tail + s[keep - 1] * s[keep - 1];
            if next > delta * delta {
                break;
            }
            tail = next;
            keep -= 1;
        }
        r = r.min(keep);
    }
    r.min(cap).max(1)
}
