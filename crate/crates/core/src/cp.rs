//! Canonical polyadic (CP) representation: a sum of R rank-one terms.
//!
//! Kept deliberately minimal. There is no CP rank truncation here — for d > 2
//! that is an ill-posed optimization — so CP serves as a construction format
//! for separable functions and as a second representation to cross-validate
//! the TT algebra against.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tt::TTTensor;
use ndarray::Array3;

#[derive(Debug, Clone, PartialEq)]
pub struct CPTensor<T> {
    modes: Vec<usize>,
    /// factors[j][ν] is the length-M_ν vector of term j in dimension ν.
    factors: Vec<Vec<Vec<T>>>,
}

impl<T: Scalar> CPTensor<T> {
    pub fn from_factors(factors: Vec<Vec<Vec<T>>>) -> Result<Self> {
        if factors.is_empty() || factors[0].is_empty() {
            return Err(Error::EmptyInput("CP factor table"));
        }
        let modes: Vec<usize> = factors[0].iter().map(|f| f.len()).collect();
        if modes.iter().any(|&m| m == 0) {
            return Err(Error::ZeroLengthFactor(0));
        }
        for term in &factors {
            if term.len() != modes.len()
                || term.iter().zip(&modes).any(|(f, &m)| f.len() != m)
            {
                return Err(Error::InvalidConfig(
                    "CP factor lengths must agree across terms".into(),
                ));
            }
        }
        Ok(CPTensor { modes, factors })
    }

    pub fn ones(modes: &[usize]) -> Self {
        let term: Vec<Vec<T>> = modes.iter().map(|&m| vec![T::one(); m]).collect();
        CPTensor { modes: modes.to_vec(), factors: vec![term] }
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn order(&self) -> usize {
        self.modes.len()
    }

    pub fn element(&self, idx: &[usize]) -> Result<T> {
        if idx.len() != self.modes.len() || idx.iter().zip(&self.modes).any(|(&i, &m)| i >= m) {
            return Err(Error::IndexOutOfRange { index: idx.to_vec(), modes: self.modes.clone() });
        }
        let mut sum = T::zero();
        for term in &self.factors {
            let mut prod = T::one();
            for (nu, f) in term.iter().enumerate() {
                prod *= f[idx[nu]];
            }
            sum += prod;
        }
        Ok(sum)
    }

    fn check_modes(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch(self.modes.clone(), other.modes.clone()));
        }
        Ok(())
    }

    /// α·w with the d-th root of |α| spread over the dimensions of every term
    /// and the sign carried by the first dimension.
    pub fn scale(&self, alpha: T) -> Self {
        let d = self.modes.len();
        let magnitude = alpha.abs();
        if magnitude == 0.0 {
            let factors = self
                .factors
                .iter()
                .map(|t| t.iter().map(|f| vec![T::zero(); f.len()]).collect())
                .collect();
            return CPTensor { modes: self.modes.clone(), factors };
        }
        let root = magnitude.powf(1.0 / d as f64);
        let phase = alpha.scale(1.0 / magnitude);
        let factors = self
            .factors
            .iter()
            .map(|term| {
                term.iter()
                    .enumerate()
                    .map(|(nu, f)| {
                        f.iter()
                            .map(|&x| {
                                if nu == 0 {
                                    x * phase.scale(root)
                                } else {
                                    x.scale(root)
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        CPTensor { modes: self.modes.clone(), factors }
    }

    /// Concatenation of the term lists; rank r_u + r_v.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(CPTensor { modes: self.modes.clone(), factors })
    }

    /// All pairwise products of terms; rank r_u · r_v.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        let mut factors = Vec::with_capacity(self.rank() * other.rank());
        for tu in &self.factors {
            for tv in &other.factors {
                let term: Vec<Vec<T>> = tu
                    .iter()
                    .zip(tv)
                    .map(|(fu, fv)| fu.iter().zip(fv).map(|(&a, &b)| a * b).collect())
                    .collect();
                factors.push(term);
            }
        }
        Ok(CPTensor { modes: self.modes.clone(), factors })
    }

    /// Σ_j Σ_k Π_ν ⟨u_{j,ν}, v_{k,ν}⟩ with conjugation on the second argument.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_modes(other)?;
        let mut sum = T::zero();
        for tu in &self.factors {
            for tv in &other.factors {
                let mut prod = T::one();
                for (fu, fv) in tu.iter().zip(tv) {
                    let mut dot = T::zero();
                    for (&a, &b) in fu.iter().zip(fv) {
                        dot += a * b.conj();
                    }
                    prod *= dot;
                }
                sum += prod;
            }
        }
        Ok(sum)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).expect("modes agree").re().max(0.0).sqrt()
    }

    /// Exact embedding into the TT format with every interior rank equal to R.
    pub fn to_tt(&self) -> TTTensor<T> {
        let d = self.modes.len();
        let r = self.rank();
        if d == 1 {
            let m = self.modes[0];
            let mut core = Array3::from_elem((1, m, 1), T::zero());
            for term in &self.factors {
                for i in 0..m {
                    core[(0, i, 0)] += term[0][i];
                }
            }
            return TTTensor::from_cores(vec![core]).expect("valid single core");
        }
        let mut cores = Vec::with_capacity(d);
        for nu in 0..d {
            let m = self.modes[nu];
            let core = if nu == 0 {
                let mut c = Array3::from_elem((1, m, r), T::zero());
                for (j, term) in self.factors.iter().enumerate() {
                    for i in 0..m {
                        c[(0, i, j)] = term[nu][i];
                    }
                }
                c
            } else if nu == d - 1 {
                let mut c = Array3::from_elem((r, m, 1), T::zero());
                for (j, term) in self.factors.iter().enumerate() {
                    for i in 0..m {
                        c[(j, i, 0)] = term[nu][i];
                    }
                }
                c
            } else {
                let mut c = Array3::from_elem((r, m, r), T::zero());
                for (j, term) in self.factors.iter().enumerate() {
                    for i in 0..m {
                        c[(j, i, j)] = term[nu][i];
                    }
                }
                c
            };
            cores.push(core);
        }
        TTTensor::from_cores(cores).expect("valid CP embedding")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseTensor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_cp(modes: &[usize], rank: usize, seed: u64) -> CPTensor<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let factors = (0..rank)
            .map(|_| {
                modes
                    .iter()
                    .map(|&m| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect())
                    .collect()
            })
            .collect();
        CPTensor::from_factors(factors).unwrap()
    }

    fn dense_of(cp: &CPTensor<f64>) -> DenseTensor<f64> {
        DenseTensor::from_fn(cp.modes(), |idx| cp.element(idx).unwrap())
    }

    #[test]
    fn scale_add_hadamard_inner_match_dense() {
        let u = random_cp(&[4, 3, 5], 3, 1);
        let v = random_cp(&[4, 3, 5], 2, 2);
        let du = dense_of(&u);
        let dv = dense_of(&v);

        let s = u.scale(2.5);
        assert!(dense_of(&s).sub(&du.scale(2.5)).unwrap().frobenius_norm() < 1e-12);

        let a = u.add(&v).unwrap();
        assert_eq!(a.rank(), 5);
        assert!(dense_of(&a).sub(&du.add(&dv).unwrap()).unwrap().frobenius_norm() < 1e-12);

        let h = u.hadamard(&v).unwrap();
        assert_eq!(h.rank(), 6);
        assert!(dense_of(&h).sub(&du.hadamard(&dv).unwrap()).unwrap().frobenius_norm() < 1e-12);

        let ip = u.inner(&v).unwrap();
        assert!((ip - du.dot(&dv).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn identities() {
        let w = random_cp(&[3, 3], 2, 3);
        let one = CPTensor::<f64>::ones(&[3, 3]);
        assert!((one.inner(&one).unwrap() - 9.0).abs() < 1e-14);
        let h = w.hadamard(&one).unwrap();
        assert!(dense_of(&h).sub(&dense_of(&w)).unwrap().frobenius_norm() < 1e-14);
        assert!(w.inner(&w).unwrap() >= 0.0);
        // w + 0 keeps values
        let zero = w.scale(0.0);
        let sum = w.add(&zero).unwrap();
        assert!(dense_of(&sum).sub(&dense_of(&w)).unwrap().frobenius_norm() < 1e-14);
        // scale(-1) on a rank-one negates the elements
        let r1 = random_cp(&[3, 4], 1, 4);
        let neg = r1.scale(-1.0);
        assert!(dense_of(&neg).add(&dense_of(&r1)).unwrap().frobenius_norm() < 1e-13);
    }

    #[test]
    fn to_tt_is_exact() {
        let w = random_cp(&[3, 4, 3], 3, 5);
        let tt = w.to_tt();
        assert_eq!(tt.ranks(), vec![1, 3, 3, 1]);
        let diff = DenseTensor::from_tt(&tt)
            .unwrap()
            .sub(&dense_of(&w))
            .unwrap()
            .frobenius_norm();
        assert!(diff < 1e-14 * dense_of(&w).frobenius_norm().max(1.0));

        let r1 = random_cp(&[4, 4], 1, 6);
        assert_eq!(r1.to_tt().ranks(), vec![1, 1, 1]);

        let w1 = random_cp(&[5], 3, 7);
        let tt1 = w1.to_tt();
        for i in 0..5 {
            assert!((tt1.element(&[i]).unwrap() - w1.element(&[i]).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn mode_mismatch_errors() {
        let u = random_cp(&[3, 3], 2, 8);
        let v = random_cp(&[3, 4], 2, 9);
        assert!(u.add(&v).is_err());
        assert!(u.hadamard(&v).is_err());
        assert!(u.inner(&v).is_err());
    }
}
