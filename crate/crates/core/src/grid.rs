//! Centered equidistant tensor grids and their Nyquist-dual frequency grids.
//!
//! Per dimension the spatial axis is the half-open (−a, a] sampled as
//! x_k = −a + Δx·(k+1) for k = 0..M−1 with Δx = 2a/M, so x = 0 sits at
//! index M/2 − 1. The dual axis has spacing Δt = π/a and runs up to the
//! Nyquist frequency π/Δx, with the origin at the same index; the two
//! spacings satisfy Δx·Δt = 2π/M.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tt::TTTensor;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    half_widths: Vec<f64>,
    counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualGrid {
    /// Frequency spacing per dimension, π/a_ν.
    spacings: Vec<f64>,
    counts: Vec<usize>,
}

/// Build the paired spatial and frequency grids.
pub fn make_grid(half_widths: &[f64], counts: &[usize]) -> Result<(Grid, DualGrid)> {
    if half_widths.is_empty() || half_widths.len() != counts.len() {
        return Err(Error::InvalidConfig(
            "half_widths and counts must be non-empty and of equal length".into(),
        ));
    }
    for &a in half_widths {
        if !(a > 0.0) {
            return Err(Error::BadGridWidth(a));
        }
    }
    for &n in counts {
        if n < 4 || n % 2 != 0 {
            return Err(Error::BadGridSize(n));
        }
    }
    let grid = Grid { half_widths: half_widths.to_vec(), counts: counts.to_vec() };
    let dual = DualGrid {
        spacings: half_widths.iter().map(|&a| std::f64::consts::PI / a).collect(),
        counts: counts.to_vec(),
    };
    Ok((grid, dual))
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn half_width(&self, nu: usize) -> f64 {
        self.half_widths[nu]
    }

    pub fn spacing(&self, nu: usize) -> f64 {
        2.0 * self.half_widths[nu] / self.counts[nu] as f64
    }

    pub fn point(&self, nu: usize, k: usize) -> f64 {
        -self.half_widths[nu] + self.spacing(nu) * (k + 1) as f64
    }

    pub fn points(&self, nu: usize) -> Vec<f64> {
        (0..self.counts[nu]).map(|k| self.point(nu, k)).collect()
    }

    /// 0-based index of the origin per dimension: M/2 − 1.
    pub fn origin_index(&self, nu: usize) -> usize {
        self.counts[nu] / 2 - 1
    }

    /// V = Π 2a_ν, the volume of the covered hyper-rectangle.
    pub fn volume(&self) -> f64 {
        self.half_widths.iter().map(|&a| 2.0 * a).product()
    }

    /// V/N = Π Δx_ν, the weight every grid point carries in the iterated
    /// trapezoidal rule on the periodic grid. Computed without forming N,
    /// which overflows integer types long before this does.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|nu| self.spacing(nu)).product()
    }

    pub fn num_points_f64(&self) -> f64 {
        self.counts.iter().map(|&m| m as f64).product()
    }
}

impl DualGrid {
    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self, nu: usize) -> f64 {
        self.spacings[nu]
    }

    /// The highest represented frequency π/Δx_ν = (M/2)·Δt_ν.
    pub fn nyquist(&self, nu: usize) -> f64 {
        self.spacings[nu] * (self.counts[nu] / 2) as f64
    }

    pub fn point(&self, nu: usize, j: usize) -> f64 {
        -self.nyquist(nu) + self.spacings[nu] * (j + 1) as f64
    }

    pub fn points(&self, nu: usize) -> Vec<f64> {
        (0..self.counts[nu]).map(|j| self.point(nu, j)).collect()
    }

    /// 0-based index j⁰ of the zero frequency per dimension: M/2 − 1.
    pub fn origin_index(&self, nu: usize) -> usize {
        self.counts[nu] / 2 - 1
    }

    /// The multi-index of the origin across all dimensions.
    pub fn origin(&self) -> Vec<usize> {
        (0..self.dim()).map(|nu| self.origin_index(nu)).collect()
    }

    /// Reflection of an index through the origin, modulo grid periodicity.
    pub fn mirror(&self, idx: &[usize]) -> Vec<usize> {
        idx.iter()
            .enumerate()
            .map(|(nu, &j)| {
                let n = self.counts[nu];
                let j0 = self.origin_index(nu);
                (2 * j0 + n - j) % n
            })
            .collect()
    }
}

/// Evaluate a separable function given by per-dimension univariate factors:
/// the result is rank one with element Π_ν f_ν(x_{i_ν,ν}).
pub fn rank_one_on_grid<T: Scalar>(
    grid: &Grid,
    factors: &[impl Fn(f64) -> T],
) -> Result<TTTensor<T>> {
    if factors.len() != grid.dim() {
        return Err(Error::InvalidConfig(format!(
            "expected {} univariate factors, got {}",
            grid.dim(),
            factors.len()
        )));
    }
    let vecs: Vec<Vec<T>> = factors
        .iter()
        .enumerate()
        .map(|(nu, f)| grid.points(nu).into_iter().map(f).collect())
        .collect();
    TTTensor::from_rank_one_factors(&vecs)
}

/// Same for the dual grid (used for separable pcfs).
pub fn rank_one_on_dual_grid<T: Scalar>(
    dual: &DualGrid,
    factors: &[impl Fn(f64) -> T],
) -> Result<TTTensor<T>> {
    if factors.len() != dual.dim() {
        return Err(Error::InvalidConfig(format!(
            "expected {} univariate factors, got {}",
            dual.dim(),
            factors.len()
        )));
    }
    let vecs: Vec<Vec<T>> = factors
        .iter()
        .enumerate()
        .map(|(nu, f)| dual.points(nu).into_iter().map(f).collect())
        .collect();
    TTTensor::from_rank_one_factors(&vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn small_grid_matches_hand_computation() {
        let (grid, dual) = make_grid(&[PI], &[4]).unwrap();
        let x = grid.points(0);
        let expect = [-PI / 2.0, 0.0, PI / 2.0, PI];
        for (a, b) in x.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((grid.spacing(0) - PI / 2.0).abs() < 1e-15);
        assert_eq!(grid.origin_index(0), 1);
        assert!(grid.point(0, grid.origin_index(0)).abs() < 1e-15);

        assert!((dual.spacing(0) - 1.0).abs() < 1e-15);
        assert!((dual.nyquist(0) - 2.0).abs() < 1e-15);
        let t = dual.points(0);
        for (a, b) in t.iter().zip([-1.0, 0.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(dual.origin_index(0), 1);
    }

    #[test]
    fn appendix_scale_example() {
        let (grid, dual) = make_grid(&[128.0], &[512]).unwrap();
        assert!((grid.spacing(0) - 0.5).abs() < 1e-15);
        assert!((dual.nyquist(0) - PI / 0.5).abs() < 1e-12);
    }

    #[test]
    fn duality_relation_random_sizes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = rng.random_range(0.5..200.0);
            let n = 2 * rng.random_range(2..300usize);
            let (grid, dual) = make_grid(&[a], &[n]).unwrap();
            let lhs = grid.spacing(0) * dual.spacing(0) * n as f64;
            assert!((lhs - 2.0 * PI).abs() < 1e-10);
            // origin is a grid point on both sides
            assert!(grid.point(0, grid.origin_index(0)).abs() < 1e-10);
            assert!(dual.point(0, dual.origin_index(0)).abs() < 1e-10);
        }
    }

    #[test]
    fn odd_or_tiny_sizes_rejected() {
        assert!(make_grid(&[1.0], &[5]).is_err());
        assert!(make_grid(&[1.0], &[2]).is_err());
        assert!(make_grid(&[0.0], &[4]).is_err());
    }

    #[test]
    fn mirror_reflects_through_origin() {
        let (_, dual) = make_grid(&[2.0, 2.0], &[8, 8]).unwrap();
        let j0 = dual.origin();
        assert_eq!(dual.mirror(&j0), j0);
        let m = dual.mirror(&[4, 2]);
        // t(4) = Δt·(5−4) = Δt, mirror must carry −Δt which lives at index 2
        assert_eq!(m[0], 2);
        assert_eq!(dual.mirror(&m), vec![4, 2]);
    }

    #[test]
    fn constant_function_gives_unit_tensor() {
        let (grid, _) = make_grid(&[1.0, 1.0], &[4, 4]).unwrap();
        let fs: Vec<Box<dyn Fn(f64) -> f64>> = vec![Box::new(|_| 1.0), Box::new(|_| 1.0)];
        let w = rank_one_on_grid(&grid, &fs).unwrap();
        assert!((w.entry_sum() - 16.0).abs() < 1e-12);
        assert!(w.is_rank_one());
    }
}
