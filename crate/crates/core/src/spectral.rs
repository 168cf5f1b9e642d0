//! Rank-preserving dimension-wise FFT between discretized pdfs and pcfs.
//!
//! Conventions. The pcf is the probabilist's transform
//! φ(t) = ∫ p(x) e^{+i⟨x,t⟩} dx and its inverse carries the full 1/(2π)^d:
//! p(x) = (2π)^{−d} ∫ φ(t) e^{−i⟨x,t⟩} dt. On the paired grids of
//! [`crate::grid`] these become exact discrete sums; per dimension
//!
//!   Φ[j] = Δx Σ_k P[k] e^{+i x_k t_j},   P[k] = (Δt/2π) Σ_j Φ[j] e^{−i x_k t_j},
//!
//! and since Δx·Δt·M = 2π the two maps invert each other exactly. Because the
//! transform acts linearly along one mode at a time it maps TT cores to TT
//! cores and never changes ranks. The index bookkeeping reduces to rotating
//! the origin to position zero, applying the plain DFT, and rotating back.

use ndarray::Array3;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{DualGrid, Grid};
use crate::pointwise::sample_max_abs;
use crate::tt::{TTTensor, TruncationConfig};

/// Default ceiling on the sup norm of the imaginary part a pcf→pdf
/// conversion may silently discard.
pub const DEFAULT_IM_TOL: f64 = 1e-8;

#[derive(Clone, Copy)]
enum Direction {
    /// pdf → pcf: e^{+i x t} kernel, scaled by Δx per dimension.
    Forward,
    /// pcf → pdf: e^{−i x t} kernel, scaled by Δt/(2π) per dimension.
    Inverse,
}

fn check_grid<T: crate::scalar::Scalar>(
    w: &TTTensor<T>,
    grid: &Grid,
    dual: &DualGrid,
) -> Result<()> {
    let modes = w.modes();
    if modes != grid.counts() || modes != dual.counts() {
        return Err(Error::ModeMismatch(modes, grid.counts().to_vec()));
    }
    Ok(())
}

/// Apply the 1-D transform along the mode axis of every core. `shift` is the
/// 0-based origin index M/2 − 1; rotating by it aligns the centered grids
/// with the DFT's native indexing, replacing explicit phase factors.
fn transform_cores(
    w: &TTTensor<Complex64>,
    grid: &Grid,
    dual: &DualGrid,
    dir: Direction,
) -> TTTensor<Complex64> {
    let mut planner = FftPlanner::<f64>::new();
    let cores: Vec<Array3<Complex64>> = w
        .cores()
        .iter()
        .enumerate()
        .map(|(nu, core)| {
            let (r0, m, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
            let shift = m / 2 - 1;
            let scale = match dir {
                Direction::Forward => grid.spacing(nu),
                Direction::Inverse => dual.spacing(nu) / (2.0 * std::f64::consts::PI),
            };
            let fft = match dir {
                // rustfft's inverse is the unnormalized e^{+i} sum.
                Direction::Forward => planner.plan_fft_inverse(m),
                Direction::Inverse => planner.plan_fft_forward(m),
            };
            let mut out = Array3::from_elem((r0, m, r1), Complex64::new(0.0, 0.0));
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            for a in 0..r0 {
                for b in 0..r1 {
                    for (u, slot) in buf.iter_mut().enumerate() {
                        *slot = core[(a, (u + shift) % m, b)];
                    }
                    fft.process(&mut buf);
                    for j in 0..m {
                        out[(a, j, b)] = buf[(j + m - shift) % m] * scale;
                    }
                }
            }
            out
        })
        .collect();
    TTTensor::from_cores(cores).expect("transform preserves core shapes")
}

/// Discrete pdf → pcf. Ranks are preserved exactly; the output is complex.
pub fn pdf_to_pcf(p: &TTTensor<f64>, grid: &Grid, dual: &DualGrid) -> Result<TTTensor<Complex64>> {
    check_grid(p, grid, dual)?;
    Ok(transform_cores(&p.to_complex(), grid, dual, Direction::Forward))
}

/// Same transform for an already-complex tensor (used by round-trip checks).
pub fn pdf_to_pcf_complex(
    p: &TTTensor<Complex64>,
    grid: &Grid,
    dual: &DualGrid,
) -> Result<TTTensor<Complex64>> {
    check_grid(p, grid, dual)?;
    Ok(transform_cores(p, grid, dual, Direction::Forward))
}

/// Discrete pcf → pdf with [`DEFAULT_IM_TOL`].
pub fn pcf_to_pdf(
    phi: &TTTensor<Complex64>,
    grid: &Grid,
    dual: &DualGrid,
) -> Result<(TTTensor<f64>, f64)> {
    pcf_to_pdf_with_tol(phi, grid, dual, DEFAULT_IM_TOL)
}

/// Discrete pcf → pdf. The inverse transform is applied core-wise, the
/// imaginary part is split off and its sup norm estimated; if it exceeds
/// `im_tol` the pcf was not Hermitean (or grids mismatched) and an error is
/// returned instead of silently truncating.
pub fn pcf_to_pdf_with_tol(
    phi: &TTTensor<Complex64>,
    grid: &Grid,
    dual: &DualGrid,
    im_tol: f64,
) -> Result<(TTTensor<f64>, f64)> {
    check_grid(phi, grid, dual)?;
    let complex_pdf = transform_cores(phi, grid, dual, Direction::Inverse);
    let re = real_part(&complex_pdf);
    let im = imag_part(&complex_pdf);
    let (im_residual, _) = sample_max_abs(&im, 0x1234);
    if im_residual > im_tol {
        return Err(Error::ImaginaryResidual { residual: im_residual, tol: im_tol });
    }
    // The doubled ranks of the real-part embedding are redundant; rounding at
    // working precision brings them back to the ranks of the input.
    let rounded = re.round(&TruncationConfig::new(1e-13));
    Ok((rounded, im_residual))
}

/// Real part of a complex TT tensor as a real TT tensor of doubled interior
/// rank, via the 2×2 matrix representation of complex numbers: each core
/// slice A + iB becomes [[A, −B], [B, A]] and the boundary cores select the
/// real output component.
pub fn real_part(w: &TTTensor<Complex64>) -> TTTensor<f64> {
    embed_component(w, false)
}

/// Imaginary part, same construction with the other boundary selector.
pub fn imag_part(w: &TTTensor<Complex64>) -> TTTensor<f64> {
    embed_component(w, true)
}

fn embed_component(w: &TTTensor<Complex64>, imaginary: bool) -> TTTensor<f64> {
    let d = w.order();
    let cores: Vec<Array3<f64>> = w
        .cores()
        .iter()
        .enumerate()
        .map(|(k, core)| {
            let (r0, m, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
            let first = k == 0;
            let last = k == d - 1;
            let s0 = if first { 1 } else { 2 * r0 };
            let s1 = if last { 1 } else { 2 * r1 };
            let mut out = Array3::from_elem((s0, m, s1), 0.0);
            for i in 0..m {
                for a in 0..r0 {
                    for b in 0..r1 {
                        let z = core[(a, i, b)];
                        match (first, last) {
                            (true, true) => {
                                out[(0, i, 0)] = if imaginary { z.im } else { z.re };
                            }
                            (true, false) => {
                                // row selector: [Re, −Im] for the real part,
                                // [Im, Re] for the imaginary part
                                if imaginary {
                                    out[(0, i, b)] = z.im;
                                    out[(0, i, r1 + b)] = z.re;
                                } else {
                                    out[(0, i, b)] = z.re;
                                    out[(0, i, r1 + b)] = -z.im;
                                }
                            }
                            (false, true) => {
                                // column selector: [Re; Im]
                                out[(a, i, 0)] = z.re;
                                out[(r0 + a, i, 0)] = z.im;
                            }
                            (false, false) => {
                                out[(a, i, b)] = z.re;
                                out[(a, i, r1 + b)] = -z.im;
                                out[(r0 + a, i, b)] = z.im;
                                out[(r0 + a, i, r1 + b)] = z.re;
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    TTTensor::from_cores(cores).expect("embedding preserves the chain")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseTensor;
    use crate::grid::make_grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn real_imag_split_matches_entries() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let w = TTTensor::random_with(&[4, 6, 4], &[2, 3], || {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .unwrap();
        let re = real_part(&w);
        let im = imag_part(&w);
        let dw = DenseTensor::from_tt(&w).unwrap();
        let dre = DenseTensor::from_tt(&re).unwrap();
        let dim = DenseTensor::from_tt(&im).unwrap();
        for (i, &z) in dw.data().iter().enumerate() {
            assert!((z.re - dre.data()[i]).abs() < 1e-13);
            assert!((z.im - dim.data()[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn dirac_pcf_concentrates_at_origin() {
        // φ ≡ 1 inverts to the discrete delta: 1/Δx at the origin index.
        let (grid, dual) = make_grid(&[2.0], &[8]).unwrap();
        let phi = TTTensor::<Complex64>::ones(&[8]);
        let (pdf, resid) = pcf_to_pdf(&phi, &grid, &dual).unwrap();
        assert!(resid < 1e-12);
        let d = DenseTensor::from_tt(&pdf).unwrap();
        let j0 = grid.origin_index(0);
        for (k, &v) in d.data().iter().enumerate() {
            let want = if k == j0 { 1.0 / grid.spacing(0) } else { 0.0 };
            assert!((v - want).abs() < 1e-10, "k={k}: {v} vs {want}");
        }
    }

    #[test]
    fn gaussian_pair_is_exact_to_grid_accuracy() {
        // e^{−t²/2} on the dual grid inverts to (2π)^{−1/2} e^{−x²/2}.
        let (grid, dual) = make_grid(&[16.0], &[256]).unwrap();
        let phi_vals: Vec<Complex64> = dual
            .points(0)
            .iter()
            .map(|&t| Complex64::new((-0.5 * t * t).exp(), 0.0))
            .collect();
        let phi = TTTensor::from_rank_one_factors(&[phi_vals]).unwrap();
        let (pdf, resid) = pcf_to_pdf(&phi, &grid, &dual).unwrap();
        assert!(resid < 1e-12);
        let d = DenseTensor::from_tt(&pdf).unwrap();
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let mut max_err = 0.0f64;
        for (k, &v) in d.data().iter().enumerate() {
            let x = grid.point(0, k);
            max_err = max_err.max((v - norm * (-0.5 * x * x).exp()).abs());
        }
        assert!(max_err < 1e-10, "max grid error {max_err}");
    }

    #[test]
    fn forward_of_gaussian_matches_analytic_pcf() {
        let (grid, dual) = make_grid(&[16.0], &[256]).unwrap();
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let pdf_vals: Vec<f64> =
            grid.points(0).iter().map(|&x| norm * (-0.5 * x * x).exp()).collect();
        let pdf = TTTensor::from_rank_one_factors(&[pdf_vals]).unwrap();
        let phi = pdf_to_pcf(&pdf, &grid, &dual).unwrap();
        let d = DenseTensor::from_tt(&phi).unwrap();
        for (j, &v) in d.data().iter().enumerate() {
            let t = dual.point(0, j);
            let want = (-0.5 * t * t).exp();
            assert!((v.re - want).abs() < 1e-10);
            assert!(v.im.abs() < 1e-12);
        }
        // origin identity: Φ at j⁰ equals the discrete integral of the pdf
        let j0 = dual.origin();
        let at0 = phi.element(&j0).unwrap();
        let s = pdf.entry_sum() * grid.cell_volume();
        assert!((at0.re - s).abs() < 1e-12);
    }

    #[test]
    fn round_trip_and_rank_preservation() {
        let (grid, dual) = make_grid(&[3.0, 5.0, 2.0], &[8, 16, 8]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let p = TTTensor::random_with(&[8, 16, 8], &[3, 2], || rng.random_range(-1.0..1.0)).unwrap();
        let phi = pdf_to_pcf(&p, &grid, &dual).unwrap();
        assert_eq!(phi.ranks(), p.ranks());
        let (back, resid) = pcf_to_pdf(&phi, &grid, &dual).unwrap();
        assert!(resid < 1e-10);
        assert_eq!(back.ranks(), p.ranks());
        // compare densely: norms of TT differences cannot resolve below
        // sqrt(machine eps) relative because of Gram-sweep cancellation
        let err = DenseTensor::from_tt(&back)
            .unwrap()
            .sub(&DenseTensor::from_tt(&p).unwrap())
            .unwrap()
            .frobenius_norm()
            / p.norm();
        assert!(err < 1e-12, "round trip error {err}");
    }

    #[test]
    fn hermitean_symmetry_for_real_input() {
        let (grid, dual) = make_grid(&[2.0, 3.0], &[8, 12]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        let p = TTTensor::random_with(&[8, 12], &[3], || rng.random_range(-1.0..1.0)).unwrap();
        let phi = pdf_to_pcf(&p, &grid, &dual).unwrap();
        for _ in 0..100 {
            let idx = vec![rng.random_range(0..8), rng.random_range(0..12)];
            let mirrored = dual.mirror(&idx);
            let a = phi.element(&idx).unwrap();
            let b = phi.element(&mirrored).unwrap();
            assert!((a - b.conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn parseval_identity() {
        // With this scale convention ⟨P,P⟩·Πν Δx = ⟨Φ,Φ⟩·Πν Δt/(2π).
        let (grid, dual) = make_grid(&[2.0, 4.0], &[8, 16]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let p = TTTensor::random_with(&[8, 16], &[2], || rng.random_range(-1.0..1.0)).unwrap();
        let phi = pdf_to_pcf(&p, &grid, &dual).unwrap();
        let lhs = p.inner(&p).unwrap() * grid.cell_volume();
        let dual_cell: f64 = (0..2)
            .map(|nu| dual.spacing(nu) / (2.0 * std::f64::consts::PI))
            .product();
        let rhs = phi.inner(&phi).unwrap().re * dual_cell;
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn non_hermitean_pcf_rejected() {
        let (grid, dual) = make_grid(&[2.0], &[8]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let phi = TTTensor::random_with(&[8], &[], || {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
        .unwrap();
        let err = pcf_to_pdf(&phi, &grid, &dual);
        assert!(matches!(err, Err(Error::ImaginaryResidual { .. })));
    }
}
