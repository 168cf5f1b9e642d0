//! Analytic reference distributions: diagonal Gaussians with closed-form
//! KLD/Hellinger, and elliptically contoured α-stable laws accessed through
//! their characteristic function.

use num_complex::Complex64;

use crate::cross::{cross_on_grid, CrossConfig};
use crate::error::{Error, Result};
use crate::grid::{DualGrid, Grid};
use crate::pointwise::{sample_extreme, sample_max_abs};
use crate::spectral::{pcf_to_pdf_with_tol, DEFAULT_IM_TOL};
use crate::stats::DiscretePdf;
use crate::tt::{TTTensor, TruncationConfig};

/// Gaussian with diagonal covariance diag(σ²).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    pub mean: Vec<f64>,
    pub std_dev: Vec<f64>,
}

impl GaussianSpec {
    pub fn new(mean: Vec<f64>, std_dev: Vec<f64>) -> Result<Self> {
        if mean.is_empty() || mean.len() != std_dev.len() {
            return Err(Error::InvalidConfig(
                "mean and std_dev must be non-empty and of equal length".into(),
            ));
        }
        if std_dev.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidConfig("standard deviations must be positive".into()));
        }
        Ok(GaussianSpec { mean, std_dev })
    }

    /// Same mean and standard deviation in every dimension.
    pub fn isotropic(d: usize, mean: f64, std_dev: f64) -> Result<Self> {
        Self::new(vec![mean; d], vec![std_dev; d])
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn factor(&self, grid: &Grid, nu: usize) -> Vec<f64> {
        let (mu, sigma) = (self.mean[nu], self.std_dev[nu]);
        let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
        grid.points(nu)
            .into_iter()
            .map(|x| norm * (-0.5 * ((x - mu) / sigma).powi(2)).exp())
            .collect()
    }

    /// Dimensions where σ_ν < 2Δx_ν, i.e. the grid is too coarse to resolve
    /// the density and aliasing becomes a concern.
    pub fn aliasing_violations(&self, grid: &Grid) -> Vec<usize> {
        (0..self.dim()).filter(|&nu| self.std_dev[nu] < 2.0 * grid.spacing(nu)).collect()
    }

    /// The diagonal-covariance Gaussian is separable, so its grid tensor is
    /// rank one.
    pub fn pdf_tt(&self, grid: &Grid) -> Result<DiscretePdf> {
        if grid.dim() != self.dim() {
            return Err(Error::ModeMismatch(vec![self.dim()], vec![grid.dim()]));
        }
        let factors: Vec<Vec<f64>> = (0..self.dim()).map(|nu| self.factor(grid, nu)).collect();
        DiscretePdf::new(TTTensor::from_rank_one_factors(&factors)?, grid.clone())
    }

    /// log pdf as an exact sum of univariate quadratics, interior TT ranks 2.
    /// No clamping is involved: the quadratic never underflows where the
    /// density itself does.
    pub fn logpdf_tt(&self, grid: &Grid) -> Result<TTTensor<f64>> {
        if grid.dim() != self.dim() {
            return Err(Error::ModeMismatch(vec![self.dim()], vec![grid.dim()]));
        }
        let factors: Vec<Vec<f64>> = (0..self.dim())
            .map(|nu| {
                let (mu, sigma) = (self.mean[nu], self.std_dev[nu]);
                let log_norm = -((2.0 * std::f64::consts::PI).sqrt() * sigma).ln();
                grid.points(nu)
                    .into_iter()
                    .map(|x| -0.5 * ((x - mu) / sigma).powi(2) + log_norm)
                    .collect()
            })
            .collect();
        TTTensor::from_univariate_sum(&factors)
    }
}

/// Closed-form KL divergence between diagonal Gaussians:
/// ½ Σ_ν (σ1²/σ2² + (μ2−μ1)²/σ2² − 1 + log(σ2²/σ1²)).
pub fn gaussian_kld_analytic(s1: &GaussianSpec, s2: &GaussianSpec) -> Result<f64> {
    if s1.dim() != s2.dim() {
        return Err(Error::ModeMismatch(vec![s1.dim()], vec![s2.dim()]));
    }
    let mut total = 0.0;
    for nu in 0..s1.dim() {
        let c1 = s1.std_dev[nu] * s1.std_dev[nu];
        let c2 = s2.std_dev[nu] * s2.std_dev[nu];
        let dm = s2.mean[nu] - s1.mean[nu];
        total += 0.5 * (c1 / c2 + dm * dm / c2 - 1.0 + (c2 / c1).ln());
    }
    Ok(total)
}

/// Closed-form squared Hellinger distance D_H² = 1 − K_{1/2} with
/// K_{1/2} = Π_ν (C1 C2)^{1/4}/((C1+C2)/2)^{1/2} · exp(−Δμ²/(8·(C1+C2)/2)).
pub fn gaussian_hellinger_sq_analytic(s1: &GaussianSpec, s2: &GaussianSpec) -> Result<f64> {
    if s1.dim() != s2.dim() {
        return Err(Error::ModeMismatch(vec![s1.dim()], vec![s2.dim()]));
    }
    let mut log_k = 0.0;
    for nu in 0..s1.dim() {
        let c1 = s1.std_dev[nu] * s1.std_dev[nu];
        let c2 = s2.std_dev[nu] * s2.std_dev[nu];
        let cm = 0.5 * (c1 + c2);
        let dm = s1.mean[nu] - s2.mean[nu];
        log_k += 0.25 * (c1.ln() + c2.ln()) - 0.5 * cm.ln() - dm * dm / (8.0 * cm);
    }
    Ok(1.0 - log_k.exp())
}

/// Quadratic-form convention for the α-stable pcf exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadConvention {
    /// exp(i⟨t,μ⟩ − ⟨t,Ct⟩^{α/2})
    Quadratic,
    /// exp(i⟨t,μ⟩ − (⟨t,Ct⟩/2)^{α/2}); with C = I this is the halved-norm
    /// form the reference experiments were produced with, and at α = 2 it
    /// gives the standard Gaussian pcf.
    HalvedQuadratic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeMatrix {
    Identity,
    Diagonal(Vec<f64>),
    Full(Vec<Vec<f64>>),
}

impl ShapeMatrix {
    fn quad(&self, t: &[f64]) -> f64 {
        match self {
            ShapeMatrix::Identity => t.iter().map(|x| x * x).sum(),
            ShapeMatrix::Diagonal(d) => t.iter().zip(d).map(|(x, c)| c * x * x).sum(),
            ShapeMatrix::Full(c) => {
                let mut q = 0.0;
                for (i, ti) in t.iter().enumerate() {
                    for (j, tj) in t.iter().enumerate() {
                        q += ti * c[i][j] * tj;
                    }
                }
                q
            }
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        match self {
            ShapeMatrix::Identity => Ok(()),
            ShapeMatrix::Diagonal(v) => {
                if v.len() != d || v.iter().any(|&x| !(x > 0.0)) {
                    return Err(Error::InvalidConfig(
                        "diagonal shape matrix needs d positive entries".into(),
                    ));
                }
                Ok(())
            }
            ShapeMatrix::Full(m) => {
                if m.len() != d || m.iter().any(|row| row.len() != d) {
                    return Err(Error::InvalidConfig("shape matrix must be d × d".into()));
                }
                for i in 0..d {
                    if !(m[i][i] > 0.0) {
                        return Err(Error::InvalidConfig(
                            "shape matrix diagonal must be positive".into(),
                        ));
                    }
                    for j in 0..d {
                        if (m[i][j] - m[j][i]).abs() > 1e-12 * m[i][i].abs().max(1.0) {
                            return Err(Error::InvalidConfig("shape matrix must be symmetric".into()));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// Elliptically contoured α-stable law, given through its pcf.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaStableSpec {
    pub mu: Vec<f64>,
    pub shape: ShapeMatrix,
    pub alpha: f64,
    pub convention: QuadConvention,
}

impl AlphaStableSpec {
    pub fn new(mu: Vec<f64>, shape: ShapeMatrix, alpha: f64) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::InvalidConfig("mu must be non-empty".into()));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0, 2], got {alpha}")));
        }
        shape.validate(mu.len())?;
        Ok(AlphaStableSpec { mu, shape, alpha, convention: QuadConvention::HalvedQuadratic })
    }

    /// Centered isotropic spec in the experiment convention.
    pub fn isotropic(d: usize, alpha: f64) -> Result<Self> {
        Self::new(vec![0.0; d], ShapeMatrix::Identity, alpha)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn with_convention(mut self, convention: QuadConvention) -> Self {
        self.convention = convention;
        self
    }

    /// The pcf φ(t) = exp(i⟨t,μ⟩ − q(t)^{α/2}) as a callable.
    pub fn pcf(&self) -> impl Fn(&[f64]) -> Complex64 + '_ {
        let half_alpha = 0.5 * self.alpha;
        move |t: &[f64]| {
            let mut q = self.shape.quad(t);
            if self.convention == QuadConvention::HalvedQuadratic {
                q *= 0.5;
            }
            let magnitude = (-q.powf(half_alpha)).exp();
            let phase: f64 = t.iter().zip(&self.mu).map(|(a, b)| a * b).sum();
            Complex64::from_polar(magnitude, phase)
        }
    }
}

/// Diagnostics of the cross → FFT → consistency pipeline for one α-stable
/// density.
#[derive(Debug, Clone)]
pub struct AlphaStablePdf {
    pub pdf: DiscretePdf,
    /// |S(P) − 1|, the normalization check of the reference code.
    pub normalization_residual: f64,
    /// Estimated sup norm of the discarded imaginary part.
    pub im_residual: f64,
    pub cross_converged: bool,
    pub cross_error: f64,
    pub max_tt_rank: usize,
    /// Estimated smallest entry; negative at the level of the transform's
    /// ringing when the pcf is truncated at the Nyquist box.
    pub min_entry: f64,
}

/// Cross-interpolate the pcf on the dual grid and convert by the
/// dimension-wise inverse FFT. For centered laws the pcf is real and the
/// interpolation runs in real arithmetic.
pub fn alpha_stable_pdf_tt(
    spec: &AlphaStableSpec,
    grid: &Grid,
    dual: &DualGrid,
    cross_cfg: &CrossConfig,
    trunc: &TruncationConfig,
) -> Result<AlphaStablePdf> {
    if spec.dim() != grid.dim() {
        return Err(Error::ModeMismatch(vec![spec.dim()], vec![grid.dim()]));
    }
    let axes: Vec<Vec<f64>> = (0..dual.dim()).map(|nu| dual.points(nu)).collect();
    // Pin the interpolation at the frequency origin: φ(0) = 1 carries the
    // normalization, and for α < 2 the pcf has a cusp there. Random pivots
    // are drawn from the window where the pcf is alive — in high dimension
    // exp(−q^{α/2}) underflows at almost every uniformly random grid point.
    let mut cfg = cross_cfg.clone();
    if cfg.anchor.is_none() {
        cfg.anchor = Some(dual.origin());
    }
    if cfg.anchor_window.is_none() {
        let d = spec.dim() as f64;
        // typical sampled exponent q/2 ≈ d·(wΔt)²/6 stays ≤ L^{2/α}
        let live = (6.0 * 35.0f64.powf(2.0 / spec.alpha) / d).sqrt();
        let window: Vec<usize> = (0..dual.dim())
            .map(|nu| {
                let w = (live / dual.spacing(nu)).ceil() as usize;
                w.clamp(2, dual.counts()[nu] / 2)
            })
            .collect();
        cfg.anchor_window = Some(window);
    }
    let centered = spec.mu.iter().all(|&m| m == 0.0);
    // The pcf's Frobenius norm grows with the grid while the values that
    // matter sit near φ(0) = 1, so recompression of the interpolant must be
    // near-lossless; rank control belongs to the cross itself.
    let phi_trunc = TruncationConfig {
        epsilon: trunc.epsilon.min(1e-13),
        max_rank: trunc.max_rank,
    };
    let (phi, cross_converged, cross_error) = if centered {
        let pcf = spec.pcf();
        let res = cross_on_grid(move |t: &[f64]| pcf(t).re, axes, &cfg)?;
        (res.tensor.round(&phi_trunc).to_complex(), res.converged, res.validation_error)
    } else {
        let pcf = spec.pcf();
        let res = cross_on_grid(pcf, axes, &cfg)?;
        (res.tensor.round(&phi_trunc), res.converged, res.validation_error)
    };
    let mut max_tt_rank = phi.max_rank();
    // Heavy-tailed laws concentrate enormous peaks in high dimension, so the
    // imaginary-part gate scales with the density rather than being absolute.
    let (pdf_tensor, im_residual) = pcf_to_pdf_with_tol(&phi, grid, dual, f64::MAX)?;
    let peak = sample_max_abs(&pdf_tensor, 0x9ea2).0;
    if im_residual > DEFAULT_IM_TOL * peak.max(1.0) {
        return Err(Error::ImaginaryResidual {
            residual: im_residual,
            tol: DEFAULT_IM_TOL * peak.max(1.0),
        });
    }
    max_tt_rank = max_tt_rank.max(pdf_tensor.max_rank());

    // The negativity left here is the ringing of the band-limited inverse
    // transform (the pcf does not vanish at the Nyquist box). It is reported
    // for the consistency check but not removed: the level-set repair cannot
    // resolve the huge sub-dead-band tail region of a grid density and costs
    // about half of its mass, destroying the S(P) = φ(0) identity that the
    // normalization check relies on. Call [`repair_negativity`] explicitly
    // when hard non-negativity matters more than normalization.
    let (min_entry, _) = sample_extreme(&pdf_tensor, false, 0xa1fa);
    let pdf = DiscretePdf::new(pdf_tensor, grid.clone())?;
    let normalization_residual = (pdf.normalization - 1.0).abs();
    Ok(AlphaStablePdf {
        pdf,
        normalization_residual,
        im_residual,
        cross_converged,
        cross_error,
        max_tt_rank,
        min_entry,
    })
}

/// Peak value of the density, for scale-aware assertions.
pub fn pdf_peak(p: &TTTensor<f64>) -> f64 {
    sample_max_abs(p, 0x9ea1).0
}
