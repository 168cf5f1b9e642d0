//! Tensor-train representation and its exact multilinear algebra.
//!
//! An order-d tensor is stored as a chain of 3-way cores; core ν has shape
//! (r_{ν−1}, M_ν, r_ν) with r_0 = r_d = 1, and the element at a multi-index is
//! the product of the corresponding core slices (matrix product state). The
//! exact operations here (scale, add, Hadamard, inner product) never round;
//! rank control is the caller's job via [`TTTensor::round`].

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Rounding parameters for the SVD-based recompression `T_ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationConfig {
    /// Relative Frobenius tolerance.
    pub epsilon: f64,
    /// Optional hard cap on every rank.
    pub max_rank: Option<usize>,
}

impl TruncationConfig {
    pub fn new(epsilon: f64) -> Self {
        TruncationConfig { epsilon, max_rank: None }
    }

    pub fn with_max_rank(epsilon: f64, max_rank: usize) -> Self {
        TruncationConfig { epsilon, max_rank: Some(max_rank) }
    }
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig { epsilon: 1e-9, max_rank: None }
    }
}

/// What a rounding pass actually achieved.
#[derive(Debug, Clone, Copy)]
pub struct RoundReport {
    /// Upper bound on ‖w − round(w)‖_F / ‖w‖_F from the discarded singular values.
    pub achieved_rel_error: f64,
    /// True when the rank cap forced discarding beyond the epsilon budget.
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TTTensor<T> {
    cores: Vec<Array3<T>>,
}

impl<T: Scalar> TTTensor<T> {
    /// Build from cores, validating the rank chain and boundary ranks.
    pub fn from_cores(cores: Vec<Array3<T>>) -> Result<Self> {
        if cores.is_empty() {
            return Err(Error::EmptyInput("core list"));
        }
        if cores[0].shape()[0] != 1 || cores[cores.len() - 1].shape()[2] != 1 {
            return Err(Error::InvalidConfig("boundary ranks must be 1".into()));
        }
        for k in 0..cores.len() {
            if cores[k].shape()[1] == 0 {
                return Err(Error::ZeroLengthFactor(k));
            }
            if k + 1 < cores.len() && cores[k].shape()[2] != cores[k + 1].shape()[0] {
                return Err(Error::InvalidConfig(format!(
                    "rank chain broken between cores {} and {}",
                    k,
                    k + 1
                )));
            }
        }
        Ok(TTTensor { cores })
    }

    /// Rank-one tensor from per-dimension factors; element = Π_ν factors[ν][i_ν].
    pub fn from_rank_one_factors(factors: &[Vec<T>]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyInput("factor list"));
        }
        let mut cores = Vec::with_capacity(factors.len());
        for (k, f) in factors.iter().enumerate() {
            if f.is_empty() {
                return Err(Error::ZeroLengthFactor(k));
            }
            let mut core = Array3::from_elem((1, f.len(), 1), T::zero());
            for (i, &x) in f.iter().enumerate() {
                core[(0, i, 0)] = x;
            }
            cores.push(core);
        }
        Ok(TTTensor { cores })
    }

    /// The Hadamard unit: all entries one, all ranks one.
    pub fn ones(modes: &[usize]) -> Self {
        let factors: Vec<Vec<T>> = modes.iter().map(|&m| vec![T::one(); m]).collect();
        Self::from_rank_one_factors(&factors).expect("modes must be non-empty")
    }

    /// The zero tensor with all ranks one.
    pub fn zeros(modes: &[usize]) -> Self {
        let factors: Vec<Vec<T>> = modes.iter().map(|&m| vec![T::zero(); m]).collect();
        Self::from_rank_one_factors(&factors).expect("modes must be non-empty")
    }

    /// Tensor with element Σ_ν f_ν(i_ν) from per-dimension vectors; interior
    /// ranks are exactly 2 (1 for d = 1).
    pub fn from_univariate_sum(factors: &[Vec<T>]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyInput("factor list"));
        }
        let d = factors.len();
        if d == 1 {
            return Self::from_rank_one_factors(factors);
        }
        let mut cores = Vec::with_capacity(d);
        for (k, f) in factors.iter().enumerate() {
            if f.is_empty() {
                return Err(Error::ZeroLengthFactor(k));
            }
            let m = f.len();
            let core = if k == 0 {
                let mut c = Array3::from_elem((1, m, 2), T::zero());
                for (i, &x) in f.iter().enumerate() {
                    c[(0, i, 0)] = x;
                    c[(0, i, 1)] = T::one();
                }
                c
            } else if k == d - 1 {
                let mut c = Array3::from_elem((2, m, 1), T::zero());
                for (i, &x) in f.iter().enumerate() {
                    c[(0, i, 0)] = T::one();
                    c[(1, i, 0)] = x;
                }
                c
            } else {
                let mut c = Array3::from_elem((2, m, 2), T::zero());
                for (i, &x) in f.iter().enumerate() {
                    c[(0, i, 0)] = T::one();
                    c[(1, i, 0)] = x;
                    c[(1, i, 1)] = T::one();
                }
                c
            };
            cores.push(core);
        }
        Ok(TTTensor { cores })
    }

    /// TT-SVD of a full tensor: successive thin SVDs of the unfoldings with
    /// the same per-core error budget as [`TTTensor::round`].
    pub fn from_dense(dense: &crate::dense::DenseTensor<T>, cfg: &TruncationConfig) -> Result<Self> {
        let modes = dense.modes().to_vec();
        let d = modes.len();
        if d == 0 {
            return Err(Error::EmptyInput("modes"));
        }
        let norm = dense.frobenius_norm();
        if d == 1 || norm == 0.0 {
            let mut core = Array3::from_elem((1, modes[0], 1), T::zero());
            if d == 1 {
                for i in 0..modes[0] {
                    core[(0, i, 0)] = dense.data()[i];
                }
                return Ok(TTTensor { cores: vec![core] });
            }
            return Ok(Self::zeros(&modes));
        }
        let delta_sq = {
            let delta = cfg.epsilon * norm / ((d - 1) as f64).sqrt();
            delta * delta
        };
        let mut cores = Vec::with_capacity(d);
        let mut rest: Vec<T> = dense.data().to_vec();
        let mut r_left = 1usize;
        for (k, &m) in modes.iter().enumerate().take(d - 1) {
            let cols = rest.len() / (r_left * m);
            let mat = Array2::from_shape_fn((r_left * m, cols), |(i, j)| rest[i * cols + j]);
            let (u, s, v) = T::thin_svd(&mat);
            let mut keep = s.len();
            let mut tail = 0.0f64;
            while keep > 1 {
                let t = tail + s[keep - 1] * s[keep - 1];
                if t > delta_sq {
                    break;
                }
                tail = t;
                keep -= 1;
            }
            if let Some(cap) = cfg.max_rank {
                keep = keep.min(cap).max(1);
            }
            let u_trunc = u.slice(ndarray::s![.., ..keep]).to_owned();
            cores.push(Self::fold_left(&u_trunc, r_left, m));
            // rest ← diag(s)·V^H restricted to the kept block
            let mut next = vec![T::zero(); keep * cols];
            for a in 0..keep {
                for j in 0..cols {
                    next[a * cols + j] = v[(j, a)].conj().scale(s[a]);
                }
            }
            rest = next;
            r_left = keep;
        }
        let m_last = modes[d - 1];
        let mut last = Array3::from_elem((r_left, m_last, 1), T::zero());
        for a in 0..r_left {
            for i in 0..m_last {
                last[(a, i, 0)] = rest[a * m_last + i];
            }
        }
        cores.push(last);
        TTTensor { cores }.validate_self()
    }

    fn validate_self(self) -> Result<Self> {
        Self::from_cores(self.cores)
    }

    /// Random tensor with the given interior ranks, entries drawn from `gen`.
    pub fn random_with(
        modes: &[usize],
        interior_ranks: &[usize],
        mut gen: impl FnMut() -> T,
    ) -> Result<Self> {
        let d = modes.len();
        if d == 0 {
            return Err(Error::EmptyInput("modes"));
        }
        if interior_ranks.len() != d.saturating_sub(1) {
            return Err(Error::InvalidConfig(format!(
                "expected {} interior ranks, got {}",
                d - 1,
                interior_ranks.len()
            )));
        }
        let mut ranks = Vec::with_capacity(d + 1);
        ranks.push(1);
        ranks.extend_from_slice(interior_ranks);
        ranks.push(1);
        let cores = (0..d)
            .map(|k| {
                Array3::from_shape_fn((ranks[k], modes[k], ranks[k + 1]), |_| gen())
            })
            .collect();
        Self::from_cores(cores)
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn modes(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.shape()[1]).collect()
    }

    /// The full rank vector (r_0, …, r_d) with r_0 = r_d = 1.
    pub fn ranks(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.cores.iter().map(|c| c.shape()[0]).collect();
        r.push(1);
        r
    }

    pub fn max_rank(&self) -> usize {
        self.ranks().into_iter().max().unwrap_or(1)
    }

    pub fn cores(&self) -> &[Array3<T>] {
        &self.cores
    }

    pub fn param_count(&self) -> usize {
        self.cores.iter().map(|c| c.len()).sum()
    }

    fn check_modes(&self, other: &Self) -> Result<()> {
        if self.modes() != other.modes() {
            return Err(Error::ModeMismatch(self.modes(), other.modes()));
        }
        Ok(())
    }

    /// Evaluate one element as the product of core slices.
    pub fn element(&self, idx: &[usize]) -> Result<T> {
        let modes = self.modes();
        if idx.len() != modes.len() || idx.iter().zip(&modes).any(|(&i, &m)| i >= m) {
            return Err(Error::IndexOutOfRange { index: idx.to_vec(), modes });
        }
        let mut vec: Vec<T> = {
            let c = &self.cores[0];
            (0..c.shape()[2]).map(|b| c[(0, idx[0], b)]).collect()
        };
        for (k, core) in self.cores.iter().enumerate().skip(1) {
            let (r0, _, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
            let mut next = vec![T::zero(); r1];
            for b in 0..r1 {
                let mut s = T::zero();
                for a in 0..r0 {
                    s += vec[a] * core[(a, idx[k], b)];
                }
                next[b] = s;
            }
            vec = next;
        }
        Ok(vec[0])
    }

    /// Multiply by a scalar, distributing |α|^{1/d} over all cores and the
    /// sign (phase) over the first one.
    pub fn scale(&self, alpha: T) -> Self {
        let d = self.cores.len();
        let magnitude = alpha.abs();
        let mut cores = self.cores.clone();
        if magnitude == 0.0 {
            for c in &mut cores {
                c.mapv_inplace(|_| T::zero());
            }
            return TTTensor { cores };
        }
        let root = magnitude.powf(1.0 / d as f64);
        let phase = alpha.scale(1.0 / magnitude);
        for (k, c) in cores.iter_mut().enumerate() {
            if k == 0 {
                c.mapv_inplace(|x| x * phase.scale(root));
            } else {
                c.mapv_inplace(|x| x.scale(root));
            }
        }
        TTTensor { cores }
    }

    pub fn scale_real(&self, alpha: f64) -> Self {
        self.scale(T::from_f64(alpha))
    }

    /// Element-wise sum; interior cores become block diagonal, so interior
    /// ranks add. No rounding.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        let d = self.cores.len();
        if d == 1 {
            let m = self.cores[0].shape()[1];
            let mut core = Array3::from_elem((1, m, 1), T::zero());
            for i in 0..m {
                core[(0, i, 0)] = self.cores[0][(0, i, 0)] + other.cores[0][(0, i, 0)];
            }
            return Ok(TTTensor { cores: vec![core] });
        }
        let mut cores = Vec::with_capacity(d);
        for k in 0..d {
            let u = &self.cores[k];
            let v = &other.cores[k];
            let m = u.shape()[1];
            let (u0, u1) = (u.shape()[0], u.shape()[2]);
            let (v0, v1) = (v.shape()[0], v.shape()[2]);
            let core = if k == 0 {
                let mut c = Array3::from_elem((1, m, u1 + v1), T::zero());
                for i in 0..m {
                    for b in 0..u1 {
                        c[(0, i, b)] = u[(0, i, b)];
                    }
                    for b in 0..v1 {
                        c[(0, i, u1 + b)] = v[(0, i, b)];
                    }
                }
                c
            } else if k == d - 1 {
                let mut c = Array3::from_elem((u0 + v0, m, 1), T::zero());
                for i in 0..m {
                    for a in 0..u0 {
                        c[(a, i, 0)] = u[(a, i, 0)];
                    }
                    for a in 0..v0 {
                        c[(u0 + a, i, 0)] = v[(a, i, 0)];
                    }
                }
                c
            } else {
                let mut c = Array3::from_elem((u0 + v0, m, u1 + v1), T::zero());
                for i in 0..m {
                    for a in 0..u0 {
                        for b in 0..u1 {
                            c[(a, i, b)] = u[(a, i, b)];
                        }
                    }
                    for a in 0..v0 {
                        for b in 0..v1 {
                            c[(u0 + a, i, u1 + b)] = v[(a, i, b)];
                        }
                    }
                }
                c
            };
            cores.push(core);
        }
        Ok(TTTensor { cores })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale_real(-1.0))
    }

    /// Element-wise product; each new core slice is the Kronecker product of
    /// the input slices, so interior ranks multiply. No rounding.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        let mut cores = Vec::with_capacity(self.cores.len());
        for (u, v) in self.cores.iter().zip(&other.cores) {
            let m = u.shape()[1];
            let (u0, u1) = (u.shape()[0], u.shape()[2]);
            let (v0, v1) = (v.shape()[0], v.shape()[2]);
            let mut c = Array3::from_elem((u0 * v0, m, u1 * v1), T::zero());
            for i in 0..m {
                for a1 in 0..u0 {
                    for a2 in 0..v0 {
                        for b1 in 0..u1 {
                            for b2 in 0..v1 {
                                c[(a1 * v0 + a2, i, b1 * v1 + b2)] =
                                    u[(a1, i, b1)] * v[(a2, i, b2)];
                            }
                        }
                    }
                }
            }
            cores.push(c);
        }
        Ok(TTTensor { cores })
    }

    /// ⟨u, v⟩ = Σ u[idx]·conj(v[idx]), computed by sweeping accumulated
    /// r_u×r_v Gram matrices rather than the naive sum over all entries.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_modes(other)?;
        // g[a][b] accumulates the contraction of the first k cores.
        let mut g = vec![T::one()];
        let mut ru = 1usize;
        let mut rv = 1usize;
        for (u, v) in self.cores.iter().zip(&other.cores) {
            let m = u.shape()[1];
            let (u1, v1) = (u.shape()[2], v.shape()[2]);
            // h[b][i][a'] = Σ_a g[a][b] · u[a,i,a']
            let mut h = vec![T::zero(); rv * m * u1];
            for b in 0..rv {
                for i in 0..m {
                    for ap in 0..u1 {
                        let mut s = T::zero();
                        for a in 0..ru {
                            s += g[a * rv + b] * u[(a, i, ap)];
                        }
                        h[(b * m + i) * u1 + ap] = s;
                    }
                }
            }
            // g'[a'][b'] = Σ_{b,i} h[b][i][a'] · conj(v[b,i,b'])
            let mut g2 = vec![T::zero(); u1 * v1];
            for b in 0..rv {
                for i in 0..m {
                    for bp in 0..v1 {
                        let vc = v[(b, i, bp)].conj();
                        for ap in 0..u1 {
                            g2[ap * v1 + bp] += h[(b * m + i) * u1 + ap] * vc;
                        }
                    }
                }
            }
            g = g2;
            ru = u1;
            rv = v1;
        }
        Ok(g[0])
    }

    /// Frobenius norm ‖w‖ = sqrt(⟨w, w⟩).
    pub fn norm(&self) -> f64 {
        let s = self.inner(self).expect("modes match themselves");
        s.re().max(0.0).sqrt()
    }

    /// Σ over all entries, i.e. ⟨w, 1⟩ computed from mode-summed core
    /// matrices without materializing the all-ones tensor.
    pub fn entry_sum(&self) -> T {
        let mut vec = vec![T::one()];
        for core in &self.cores {
            let (r0, m, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
            let mut next = vec![T::zero(); r1];
            for b in 0..r1 {
                let mut s = T::zero();
                for a in 0..r0 {
                    let mut row = T::zero();
                    for i in 0..m {
                        row += core[(a, i, b)];
                    }
                    s += vec[a] * row;
                }
                next[b] = s;
            }
            vec = next;
        }
        vec[0]
    }

    pub fn conj(&self) -> Self {
        TTTensor { cores: self.cores.iter().map(|c| c.mapv(|x| x.conj())).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.cores.iter().all(|c| c.iter().all(|x| x.is_finite()))
    }

    /// All interior ranks equal to one.
    pub fn is_rank_one(&self) -> bool {
        self.ranks().iter().all(|&r| r == 1)
    }

    /// For a rank-one tensor, the per-dimension factor vectors.
    pub fn rank_one_factors(&self) -> Option<Vec<Vec<T>>> {
        if !self.is_rank_one() {
            return None;
        }
        Some(
            self.cores
                .iter()
                .map(|c| (0..c.shape()[1]).map(|i| c[(0, i, 0)]).collect())
                .collect(),
        )
    }

    // ----- unfoldings ----------------------------------------------------

    pub(crate) fn left_unfold(core: &Array3<T>) -> Array2<T> {
        let (r0, m, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
        Array2::from_shape_fn((r0 * m, r1), |(row, b)| core[(row / m, row % m, b)])
    }

    pub(crate) fn right_unfold(core: &Array3<T>) -> Array2<T> {
        let (r0, m, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
        Array2::from_shape_fn((r0, m * r1), |(a, col)| core[(a, col / r1, col % r1)])
    }

    pub(crate) fn fold_left(mat: &Array2<T>, r0: usize, m: usize) -> Array3<T> {
        let r1 = mat.ncols();
        Array3::from_shape_fn((r0, m, r1), |(a, i, b)| mat[(a * m + i, b)])
    }

    pub(crate) fn fold_right(mat: &Array2<T>, m: usize, r1: usize) -> Array3<T> {
        let r0 = mat.nrows();
        Array3::from_shape_fn((r0, m, r1), |(a, i, b)| mat[(a, i * r1 + b)])
    }

    pub(crate) fn matmul(a: &Array2<T>, b: &Array2<T>) -> Array2<T> {
        let (m, k) = (a.nrows(), a.ncols());
        let n = b.ncols();
        let mut out = Array2::from_elem((m, n), T::zero());
        for i in 0..m {
            for l in 0..k {
                let av = a[(i, l)];
                if av == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += av * b[(l, j)];
                }
            }
        }
        out
    }

    pub(crate) fn conj_t(a: &Array2<T>) -> Array2<T> {
        Array2::from_shape_fn((a.ncols(), a.nrows()), |(i, j)| a[(j, i)].conj())
    }

    // ----- orthogonalization and rounding --------------------------------

    /// One QR sweep left to right. Afterwards every core except the last has
    /// orthonormal columns in its left unfolding, and the whole Frobenius
    /// norm sits in the last core.
    pub fn left_orthogonalize(&self) -> Self {
        let d = self.cores.len();
        let mut cores = self.cores.clone();
        for k in 0..d.saturating_sub(1) {
            let (r0, m) = (cores[k].shape()[0], cores[k].shape()[1]);
            let a = Self::left_unfold(&cores[k]);
            let (q, r) = T::thin_qr(&a);
            cores[k] = Self::fold_left(&q, r0, m);
            let next = Self::right_unfold(&cores[k + 1]);
            let carried = Self::matmul(&r, &next);
            let (m1, r1) = (cores[k + 1].shape()[1], cores[k + 1].shape()[2]);
            cores[k + 1] = Self::fold_right(&carried, m1, r1);
        }
        TTTensor { cores }
    }

    /// One QR sweep right to left; afterwards every core except the first has
    /// orthonormal rows in its right unfolding.
    pub fn right_orthogonalize(&self) -> Self {
        let d = self.cores.len();
        let mut cores = self.cores.clone();
        for k in (1..d).rev() {
            let (m, r1) = (cores[k].shape()[1], cores[k].shape()[2]);
            let a = Self::right_unfold(&cores[k]);
            let (q, r) = T::thin_qr(&Self::conj_t(&a));
            cores[k] = Self::fold_right(&Self::conj_t(&q), m, r1);
            let carry = Self::conj_t(&r);
            let prev = Self::left_unfold(&cores[k - 1]);
            let carried = Self::matmul(&prev, &carry);
            let (p0, pm) = (cores[k - 1].shape()[0], cores[k - 1].shape()[1]);
            cores[k - 1] = Self::fold_left(&carried, p0, pm);
        }
        TTTensor { cores }
    }

    /// SVD-based rank truncation: one orthogonalization sweep right to left,
    /// then an SVD truncation sweep left to right. The error budget
    /// ε‖w‖/√(d−1) per truncated core realizes the √(d−1) quasi-optimality
    /// bound of the TT-SVD.
    pub fn round(&self, cfg: &TruncationConfig) -> Self {
        self.round_reporting(cfg).0
    }

    pub fn round_reporting(&self, cfg: &TruncationConfig) -> (Self, RoundReport) {
        let d = self.cores.len();
        if d == 1 {
            return (self.clone(), RoundReport { achieved_rel_error: 0.0, capped: false });
        }
        let ortho = self.right_orthogonalize();
        let mut cores = ortho.cores;
        // The right-orthogonal sweep concentrates the norm in core 0.
        let norm = cores[0].iter().map(|x| x.abs() * x.abs()).sum::<f64>().sqrt();
        if norm == 0.0 {
            let z = Self::zeros(&self.modes());
            return (z, RoundReport { achieved_rel_error: 0.0, capped: false });
        }
        let delta_sq = {
            let delta = cfg.epsilon * norm / ((d - 1) as f64).sqrt();
            delta * delta
        };
        let mut discarded_sq = 0.0f64;
        let mut capped = false;
        for k in 0..d - 1 {
            let (r0, m) = (cores[k].shape()[0], cores[k].shape()[1]);
            let a = Self::left_unfold(&cores[k]);
            let (u, s, v) = T::thin_svd(&a);
            // Keep the smallest prefix whose squared tail is within budget;
            // ties keep the earlier block (descending order, prefix kept).
            let mut keep = s.len();
            let mut tail = 0.0f64;
            while keep > 1 {
                let t = tail + s[keep - 1] * s[keep - 1];
                if t > delta_sq {
                    break;
                }
                tail = t;
                keep -= 1;
            }
            if let Some(cap) = cfg.max_rank {
                if keep > cap {
                    for &sv in &s[cap..keep] {
                        tail += sv * sv;
                    }
                    keep = cap.max(1);
                    capped = true;
                }
            }
            discarded_sq += tail;
            let u_trunc = u.slice(ndarray::s![.., ..keep]).to_owned();
            cores[k] = Self::fold_left(&u_trunc, r0, m);
            // carry = diag(s) · V^H restricted to the kept block
            let vh = Self::conj_t(&v);
            let mut carry = vh.slice(ndarray::s![..keep, ..]).to_owned();
            for (j, mut row) in carry.rows_mut().into_iter().enumerate() {
                for x in row.iter_mut() {
                    *x = x.scale(s[j]);
                }
            }
            let next = Self::right_unfold(&cores[k + 1]);
            let carried = Self::matmul(&carry, &next);
            let (m1, r1) = (cores[k + 1].shape()[1], cores[k + 1].shape()[2]);
            cores[k + 1] = Self::fold_right(&carried, m1, r1);
        }
        let report = RoundReport {
            achieved_rel_error: discarded_sq.sqrt() / norm,
            capped,
        };
        (TTTensor { cores }, report)
    }
}

impl TTTensor<f64> {
    pub fn to_complex(&self) -> TTTensor<Complex64> {
        TTTensor {
            cores: self
                .cores
                .iter()
                .map(|c| c.mapv(|x| Complex64::new(x, 0.0)))
                .collect(),
        }
    }
}
