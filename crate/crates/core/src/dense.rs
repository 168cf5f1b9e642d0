//! Full (uncompressed) tensors, used as the brute-force oracle at desk scale.
//!
//! Deliberately naive: every operation touches all N entries. A cap guards
//! against accidental n^d blowups.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tt::TTTensor;

/// Default cap on the number of entries a dense tensor may hold.
pub const DEFAULT_DENSE_CAP: usize = 1_000_000;

/// Row-major full tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T> {
    modes: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> DenseTensor<T> {
    pub fn zeros(modes: &[usize]) -> Self {
        let n: usize = modes.iter().product();
        DenseTensor { modes: modes.to_vec(), data: vec![T::zero(); n] }
    }

    pub fn from_data(modes: &[usize], data: Vec<T>) -> Result<Self> {
        let n: usize = modes.iter().product();
        if data.len() != n {
            return Err(Error::InvalidConfig(format!(
                "dense data length {} does not match modes {:?}",
                data.len(),
                modes
            )));
        }
        Ok(DenseTensor { modes: modes.to_vec(), data })
    }

    pub fn from_fn(modes: &[usize], mut f: impl FnMut(&[usize]) -> T) -> Self {
        let n: usize = modes.iter().product();
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0usize; modes.len()];
        for lin in 0..n {
            Self::unravel(modes, lin, &mut idx);
            data.push(f(&idx));
        }
        DenseTensor { modes: modes.to_vec(), data }
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    fn linear_index(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.modes.len()
            || idx.iter().zip(&self.modes).any(|(&i, &m)| i >= m)
        {
            return Err(Error::IndexOutOfRange {
                index: idx.to_vec(),
                modes: self.modes.clone(),
            });
        }
        let mut lin = 0usize;
        for (&i, &m) in idx.iter().zip(&self.modes) {
            lin = lin * m + i;
        }
        Ok(lin)
    }

    fn unravel(modes: &[usize], mut lin: usize, out: &mut [usize]) {
        for k in (0..modes.len()).rev() {
            out[k] = lin % modes[k];
            lin /= modes[k];
        }
    }

    pub fn get(&self, idx: &[usize]) -> Result<T> {
        Ok(self.data[self.linear_index(idx)?])
    }

    pub fn set(&mut self, idx: &[usize], value: T) -> Result<()> {
        let lin = self.linear_index(idx)?;
        self.data[lin] = value;
        Ok(())
    }

    /// Full contraction of a TT tensor, bounded by [`DEFAULT_DENSE_CAP`].
    pub fn from_tt(w: &TTTensor<T>) -> Result<Self> {
        Self::from_tt_capped(w, DEFAULT_DENSE_CAP)
    }

    pub fn from_tt_capped(w: &TTTensor<T>, cap: usize) -> Result<Self> {
        let modes = w.modes();
        let n_f64: f64 = modes.iter().map(|&m| m as f64).product();
        if n_f64 > cap as f64 {
            return Err(Error::DenseTooLarge { n: n_f64, cap });
        }
        // Left-to-right contraction; acc holds the (prefix × r_k) matrix.
        let mut acc: Vec<T> = vec![T::one()];
        let mut rows = 1usize;
        for core in w.cores() {
            let (r0, m, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
            let mut next = vec![T::zero(); rows * m * r1];
            for p in 0..rows {
                for i in 0..m {
                    for b in 0..r1 {
                        let mut s = T::zero();
                        for a in 0..r0 {
                            s += acc[p * r0 + a] * core[(a, i, b)];
                        }
                        next[(p * m + i) * r1 + b] = s;
                    }
                }
            }
            acc = next;
            rows *= m;
        }
        DenseTensor::from_data(&modes, acc)
    }

    /// Apply `f` entrywise.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        DenseTensor {
            modes: self.modes.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Apply `f` entrywise, reporting the multi-index of the first domain violation.
    pub fn try_map(&self, op: &'static str, f: impl Fn(T) -> Option<T>) -> Result<Self> {
        let mut data = Vec::with_capacity(self.data.len());
        for (lin, &x) in self.data.iter().enumerate() {
            match f(x) {
                Some(y) => data.push(y),
                None => {
                    let mut idx = vec![0usize; self.modes.len()];
                    Self::unravel(&self.modes, lin, &mut idx);
                    return Err(Error::DomainViolation {
                        op,
                        detail: format!("entry {x:?} at index {idx:?}"),
                    });
                }
            }
        }
        Ok(DenseTensor { modes: self.modes.clone(), data })
    }

    fn check_modes(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch(self.modes.clone(), other.modes.clone()));
        }
        Ok(())
    }

    pub fn scale(&self, alpha: T) -> Self {
        self.map(|x| x * alpha)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        Ok(DenseTensor {
            modes: self.modes.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        Ok(DenseTensor {
            modes: self.modes.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        })
    }

    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        Ok(DenseTensor {
            modes: self.modes.clone(),
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a * b).collect(),
        })
    }

    pub fn sum(&self) -> T {
        self.data.iter().copied().sum()
    }

    /// ⟨self, other⟩ with conjugation on `other`.
    pub fn dot(&self, other: &Self) -> Result<T> {
        self.check_modes(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a * b.conj())
            .sum())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.abs() * x.abs()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

impl DenseTensor<f64> {
    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// (V/N)·Σ entries, the reference for the discrete integral.
    pub fn integral(&self, cell_volume: f64) -> f64 {
        self.sum() * cell_volume
    }

    /// (V/N)·⟨f, p⟩, the reference for the discrete expectation.
    pub fn expectation(&self, p: &Self, cell_volume: f64) -> Result<f64> {
        Ok(self.dot(p)? * cell_volume)
    }

    /// −(V/N)·⟨log p, p⟩ with zero entries contributing zero.
    pub fn entropy(&self, cell_volume: f64) -> f64 {
        -cell_volume
            * self
                .data
                .iter()
                .filter(|&&p| p > 0.0)
                .map(|&p| p.ln() * p)
                .sum::<f64>()
    }

    /// (V/N)·Σ p (log p − log q) with the p = 0 limit handled.
    pub fn kl_divergence(&self, q: &Self, cell_volume: f64) -> Result<f64> {
        self.check_modes(q)?;
        Ok(cell_volume
            * self
                .data
                .iter()
                .zip(&q.data)
                .filter(|(&p, _)| p > 0.0)
                .map(|(&p, &qv)| p * (p.ln() - qv.ln()))
                .sum::<f64>())
    }

    /// (V/2N)·Σ (√p − √q)².
    pub fn hellinger_sq(&self, q: &Self, cell_volume: f64) -> Result<f64> {
        self.check_modes(q)?;
        Ok(0.5
            * cell_volume
            * self
                .data
                .iter()
                .zip(&q.data)
                .map(|(&p, &qv)| {
                    let d = p.max(0.0).sqrt() - qv.max(0.0).sqrt();
                    d * d
                })
                .sum::<f64>())
    }

    /// −log((V/N)·Σ √(p q)).
    pub fn bhattacharyya(&self, q: &Self, cell_volume: f64) -> Result<f64> {
        self.check_modes(q)?;
        let bc: f64 = self
            .data
            .iter()
            .zip(&q.data)
            .map(|(&p, &qv)| (p.max(0.0) * qv.max(0.0)).sqrt())
            .sum();
        Ok(-(bc * cell_volume).ln())
    }

    /// (V/N)·Σ q f(p/q), the reference f-divergence.
    pub fn f_divergence(
        &self,
        q: &Self,
        cell_volume: f64,
        f: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        self.check_modes(q)?;
        Ok(cell_volume
            * self
                .data
                .iter()
                .zip(&q.data)
                .map(|(&p, &qv)| qv * f(p / qv))
                .sum::<f64>())
    }

    /// (V/N)·Σ [(φ(p) − φ(q)) − (p − q) φ'(q)].
    pub fn bregman(
        &self,
        q: &Self,
        cell_volume: f64,
        phi: impl Fn(f64) -> f64,
        dphi: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        self.check_modes(q)?;
        Ok(cell_volume
            * self
                .data
                .iter()
                .zip(&q.data)
                .map(|(&p, &qv)| (phi(p) - phi(qv)) - (p - qv) * dphi(qv))
                .sum::<f64>())
    }
}
