//! Discrete integrals, expectations, moments, consistency checks, and the
//! divergence/entropy suite over TT-represented pdfs.
//!
//! All integrals use the iterated trapezoidal rule on the periodic grid, so
//! every point carries the weight V/N and the discrete integral is
//! S(P) = (V/N)·⟨P, 1⟩, evaluated from mode-summed cores without ever
//! materializing the all-ones tensor.

use std::time::Instant;

use serde::Serialize;

use crate::cross::{apply_via_cross, tt_cross, CrossConfig, TtValueFn};
use crate::error::{Error, Result};
use crate::grid::{make_grid, Grid};
use crate::pointwise::{
    had_inverse, had_levelset, had_log, had_min, had_pow, had_sqrt_pair, sample_extreme,
    Interval, IterationConfig, LogMethod,
};
use crate::spectral::pdf_to_pcf;
use crate::tt::TTTensor;

/// A TT-represented density bound to its grid, with the cached integral.
#[derive(Debug, Clone)]
pub struct DiscretePdf {
    pub tensor: TTTensor<f64>,
    pub grid: Grid,
    /// Cached S(P).
    pub normalization: f64,
}

impl DiscretePdf {
    pub fn new(tensor: TTTensor<f64>, grid: Grid) -> Result<Self> {
        if tensor.modes() != grid.counts() {
            return Err(Error::ModeMismatch(tensor.modes(), grid.counts().to_vec()));
        }
        let normalization = discrete_integral(&tensor, &grid)?;
        Ok(DiscretePdf { tensor, grid, normalization })
    }
}

/// S(P) = (V/N)·⟨P, 1⟩.
pub fn discrete_integral(p: &TTTensor<f64>, grid: &Grid) -> Result<f64> {
    if p.modes() != grid.counts() {
        return Err(Error::ModeMismatch(p.modes(), grid.counts().to_vec()));
    }
    Ok(p.entry_sum() * grid.cell_volume())
}

/// E_P(F) = (V/N)·⟨F, P⟩.
pub fn discrete_expectation(f: &TTTensor<f64>, p: &TTTensor<f64>, grid: &Grid) -> Result<f64> {
    if f.modes() != grid.counts() {
        return Err(Error::ModeMismatch(f.modes(), grid.counts().to_vec()));
    }
    Ok(f.inner(p)? * grid.cell_volume())
}

/// Mixed raw moment E[x_{k_1}···x_{k_m}]; dimensions may repeat. The
/// coordinate product is a rank-one tensor, so the whole moment is one
/// inner product. An empty tuple gives S(P).
pub fn moment(p: &TTTensor<f64>, grid: &Grid, dims: &[usize]) -> Result<f64> {
    let d = grid.dim();
    let mut mult = vec![0u32; d];
    for &k in dims {
        if k >= d {
            return Err(Error::InvalidConfig(format!("moment dimension {k} out of range")));
        }
        mult[k] += 1;
    }
    let factors: Vec<Vec<f64>> = (0..d)
        .map(|nu| {
            grid.points(nu)
                .into_iter()
                .map(|x| if mult[nu] > 0 { x.powi(mult[nu] as i32) } else { 1.0 })
                .collect()
        })
        .collect();
    let coord = TTTensor::from_rank_one_factors(&factors)?;
    discrete_expectation(&coord, p, grid)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    /// Smallest entry (power iteration at desk scale, pivot search beyond).
    pub min_entry: f64,
    pub integral: f64,
    /// Sampled check that the forward transform of the pdf is Hermitean.
    pub hermitean_ok: bool,
}

/// Consistency checks per the repair pipeline: non-negativity, unit
/// integral, Hermitean transform. Nothing is mutated.
pub fn check_consistency(
    p: &TTTensor<f64>,
    grid: &Grid,
    cfg: &IterationConfig,
) -> Result<ConsistencyReport> {
    let integral = discrete_integral(p, grid)?;
    // Power iteration is reliable at desk scale; its Hadamard squares become
    // too expensive at the ranks the cross pipelines produce, where the
    // pivot search takes over.
    let min_entry = if p.max_rank() <= 16 && p.param_count() <= 200_000 {
        had_min(p, cfg)?.value
    } else {
        sample_extreme(p, false, 0x7777).0
    };
    let half_widths: Vec<f64> = (0..grid.dim()).map(|nu| grid.half_width(nu)).collect();
    let (g, dual) = make_grid(&half_widths, grid.counts())?;
    let phi = pdf_to_pcf(p, &g, &dual)?;
    let mut hermitean_ok = true;
    let mut rng = <rand_chacha::ChaCha12Rng as rand::SeedableRng>::seed_from_u64(0x600d);
    let scale = phi.element(&dual.origin())?.norm().max(1e-300);
    for _ in 0..100 {
        let idx: Vec<usize> = grid
            .counts()
            .iter()
            .map(|&m| rand::Rng::random_range(&mut rng, 0..m))
            .collect();
        let a = phi.element(&idx)?;
        let b = phi.element(&dual.mirror(&idx))?;
        if (a - b.conj()).norm() > 1e-8 * scale {
            hermitean_ok = false;
            break;
        }
    }
    Ok(ConsistencyReport { min_entry, integral, hermitean_ok })
}

/// P_c = P − Λ_{(−∞,0]}(P): the faulty negative values are removed and the
/// non-negative entries stay put (up to the iteration tolerance).
pub fn repair_negativity(p: &TTTensor<f64>, cfg: &IterationConfig) -> Result<TTTensor<f64>> {
    let lam = had_levelset(p, Interval::Below(0.0), cfg)?;
    Ok(p.sub(&lam)?.round(&cfg.trunc))
}

/// P_s = P / S(P); fails when the integral is not positive.
pub fn renormalize(p: &TTTensor<f64>, grid: &Grid) -> Result<TTTensor<f64>> {
    let beta = discrete_integral(p, grid)?;
    if !(beta > 0.0) {
        return Err(Error::NonPositiveIntegral(beta));
    }
    Ok(p.scale_real(1.0 / beta))
}

// --------------------------------------------------------------------------
// Divergences
// --------------------------------------------------------------------------

/// How log/sqrt of a density tensor are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionPath {
    /// Rank-one inputs take the analytic per-factor route, everything else
    /// the truncated iterations.
    Auto,
    /// Per-dimension transforms of the rank-one factors (log is a rank-2
    /// sum of univariate functions, sqrt stays rank one).
    Analytic,
    /// Hadamard-algebra iterations and series.
    Iterative,
    /// Cross interpolation of the whole integrand, the route the reference
    /// experiments use for non-separable densities.
    Cross,
    /// Seeded importance-sampled summation of the integrand, with the
    /// proposal built from the positive parts of the per-dimension marginals.
    /// The workhorse for integrands too rough to interpolate — densities
    /// reconstructed from Nyquist-truncated pcfs ring, and log/sqrt of the
    /// ringing region defeats low-rank interpolation. Exactly zero weight
    /// variance when the leading density is rank one.
    Sampled,
}

#[derive(Debug, Clone)]
pub struct DivergenceConfig {
    pub iter: IterationConfig,
    pub cross: CrossConfig,
    pub path: FunctionPath,
    pub log_method: LogMethod,
    /// Entries below this are treated as outside the support of log-based
    /// integrands; wide grids underflow Gaussian tails to exact zeros.
    pub support_floor: f64,
    /// Draw count for [`FunctionPath::Sampled`]; the seed comes from the
    /// cross configuration.
    pub sample_count: usize,
}

impl Default for DivergenceConfig {
    fn default() -> Self {
        DivergenceConfig {
            iter: IterationConfig::default(),
            cross: CrossConfig::default(),
            path: FunctionPath::Auto,
            log_method: LogMethod::Taylor,
            support_floor: 1e-30,
            sample_count: 1_000_000,
        }
    }
}

/// Per-dimension marginals Σ_{i_others} w[..] of a TT tensor, one vector per
/// mode, computed by mode-sum contractions.
pub fn marginals(w: &TTTensor<f64>) -> Vec<Vec<f64>> {
    let cores = w.cores();
    let d = cores.len();
    let mut prefix: Vec<Vec<f64>> = vec![vec![1.0]];
    for core in cores.iter().take(d - 1) {
        let (r0, m, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
        let prev = prefix.last().expect("non-empty").clone();
        let mut next = vec![0.0; r1];
        for a in 0..r0 {
            for b in 0..r1 {
                let mut s = 0.0;
                for i in 0..m {
                    s += core[(a, i, b)];
                }
                next[b] += prev[a] * s;
            }
        }
        prefix.push(next);
    }
    let mut suffix: Vec<Vec<f64>> = vec![vec![1.0]];
    for core in cores.iter().skip(1).rev() {
        let (r0, m, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
        let prev = suffix.last().expect("non-empty").clone();
        let mut next = vec![0.0; r0];
        for a in 0..r0 {
            for b in 0..r1 {
                let mut s = 0.0;
                for i in 0..m {
                    s += core[(a, i, b)];
                }
                next[a] += s * prev[b];
            }
        }
        suffix.push(next);
    }
    suffix.reverse();
    (0..d)
        .map(|k| {
            let core = &cores[k];
            let (r0, m, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
            (0..m)
                .map(|i| {
                    let mut s = 0.0;
                    for a in 0..r0 {
                        for b in 0..r1 {
                            s += prefix[k][a] * core[(a, i, b)] * suffix[k][b];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Reusable element evaluator: per-sample TT contraction without allocation.
struct Evaluator<'a> {
    tensor: &'a TTTensor<f64>,
    buf_a: Vec<f64>,
    buf_b: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(tensor: &'a TTTensor<f64>) -> Self {
        let r = tensor.max_rank();
        Evaluator { tensor, buf_a: vec![0.0; r], buf_b: vec![0.0; r] }
    }

    fn eval(&mut self, idx: &[usize]) -> f64 {
        let cores = self.tensor.cores();
        self.buf_a[0] = 1.0;
        let mut len = 1usize;
        for (k, core) in cores.iter().enumerate() {
            let (r0, r1) = (core.shape()[0], core.shape()[2]);
            debug_assert_eq!(r0, len);
            for b in 0..r1 {
                let mut s = 0.0;
                for a in 0..r0 {
                    s += self.buf_a[a] * core[(a, idx[k], b)];
                }
                self.buf_b[b] = s;
            }
            self.buf_a[..r1].copy_from_slice(&self.buf_b[..r1]);
            len = r1;
        }
        self.buf_a[0]
    }
}

/// Sequential conditional sampler on a TT tensor: dimension by dimension,
/// the conditional weights come from the running prefix vector contracted
/// with the core and the all-ones suffix. Negative parts (transform ringing)
/// are clamped, and a small uniform floor keeps the proposal supported
/// everywhere, so importance weights stay finite.
struct TtSampler<'a> {
    tensor: &'a TTTensor<f64>,
    /// suffix_k = (mode-summed cores k..d−1) · 1, one vector per boundary.
    suffixes: Vec<Vec<f64>>,
    floor: f64,
}

impl<'a> TtSampler<'a> {
    fn new(tensor: &'a TTTensor<f64>) -> Self {
        let cores = tensor.cores();
        let d = cores.len();
        let mut suffixes: Vec<Vec<f64>> = vec![vec![1.0]];
        for core in cores.iter().skip(1).rev() {
            let (r0, m, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
            let prev = suffixes.last().expect("non-empty");
            let mut next = vec![0.0; r0];
            for a in 0..r0 {
                let mut s = 0.0;
                for i in 0..m {
                    for b in 0..r1 {
                        s += core[(a, i, b)] * prev[b];
                    }
                }
                next[a] = s;
            }
            suffixes.push(next);
        }
        suffixes.reverse();
        TtSampler { tensor, suffixes, floor: 1e-3 }
    }

    /// Draw one index; returns its proposal probability.
    fn draw(&self, idx: &mut [usize], rng: &mut rand_chacha::ChaCha12Rng) -> f64 {
        let cores = self.tensor.cores();
        let d = cores.len();
        let mut prefix = vec![1.0f64];
        let mut g = 1.0f64;
        let mut weights: Vec<f64> = Vec::new();
        for k in 0..d {
            let core = &cores[k];
            let (r0, m, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
            weights.clear();
            weights.reserve(m);
            let mut total = 0.0;
            for i in 0..m {
                let mut s = 0.0;
                for a in 0..r0 {
                    let mut row = 0.0;
                    for b in 0..r1 {
                        row += core[(a, i, b)] * self.suffixes[k][b];
                    }
                    s += prefix[a] * row;
                }
                let w = s.max(0.0);
                weights.push(w);
                total += w;
            }
            // uniform floor: ringing regions keep nonzero proposal mass
            let base = total.max(1e-300) * self.floor / m as f64;
            total += base * m as f64;
            let u: f64 = rand::Rng::random_range(rng, 0.0..total);
            let mut acc = 0.0;
            let mut pick = m - 1;
            for (i, &w) in weights.iter().enumerate() {
                acc += w + base;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            idx[k] = pick;
            g *= (weights[pick] + base) / total;
            // advance the prefix with the chosen slice
            let mut next = vec![0.0f64; r1];
            for b in 0..r1 {
                let mut s = 0.0;
                for a in 0..r0 {
                    s += prefix[a] * core[(a, pick, b)];
                }
                next[b] = s;
            }
            prefix = next;
        }
        g
    }

    /// Proposal probability of a given index (for mixture weights).
    fn prob(&self, idx: &[usize]) -> f64 {
        let cores = self.tensor.cores();
        let d = cores.len();
        let mut prefix = vec![1.0f64];
        let mut g = 1.0f64;
        for k in 0..d {
            let core = &cores[k];
            let (r0, m, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
            let mut total = 0.0;
            let mut picked = 0.0;
            for i in 0..m {
                let mut s = 0.0;
                for a in 0..r0 {
                    let mut row = 0.0;
                    for b in 0..r1 {
                        row += core[(a, i, b)] * self.suffixes[k][b];
                    }
                    s += prefix[a] * row;
                }
                let w = s.max(0.0);
                if i == idx[k] {
                    picked = w;
                }
                total += w;
            }
            let base = total.max(1e-300) * self.floor / m as f64;
            g *= (picked + base) / (total + base * m as f64);
            let mut next = vec![0.0f64; r1];
            for b in 0..r1 {
                let mut s = 0.0;
                for a in 0..r0 {
                    s += prefix[a] * core[(a, idx[k], b)];
                }
                next[b] = s;
            }
            prefix = next;
        }
        g
    }
}

/// Importance-sampled Σ_i f(p_i, q_i): the proposal is an equal mixture of
/// conditional TT samplers on p and q. Returns (estimate, stderr).
fn sampled_pair_sum(
    f: impl Fn(f64, f64) -> f64,
    p: &TTTensor<f64>,
    q: &TTTensor<f64>,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if p.modes() != q.modes() {
        return Err(Error::ModeMismatch(p.modes(), q.modes()));
    }
    let d = p.order();
    let sp = TtSampler::new(p);
    let sq = TtSampler::new(q);
    let mut rng =
        <rand_chacha::ChaCha12Rng as rand::SeedableRng>::seed_from_u64(seed ^ 0x5a3ed);
    let mut pe = Evaluator::new(p);
    let mut qe = Evaluator::new(q);
    let mut idx = vec![0usize; d];
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for draw in 0..samples {
        let g = if draw % 2 == 0 {
            let gp = sp.draw(&mut idx, &mut rng);
            0.5 * (gp + sq.prob(&idx))
        } else {
            let gq = sq.draw(&mut idx, &mut rng);
            0.5 * (gq + sp.prob(&idx))
        };
        let val = f(pe.eval(&idx), qe.eval(&idx)) / g;
        sum += val;
        sum_sq += val * val;
    }
    let mean = sum / samples as f64;
    let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
    Ok((mean, (var / samples as f64).sqrt()))
}

/// One experiment/output row.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceReport {
    pub name: String,
    pub value: f64,
    pub reference: Option<f64>,
    pub err_abs: Option<f64>,
    pub err_rel: Option<f64>,
    pub max_tt_rank: usize,
    pub wall_time_s: f64,
    pub d: usize,
    pub n: usize,
}

impl DivergenceReport {
    fn new(name: &str, value: f64, max_tt_rank: usize, started: Instant, grid: &Grid) -> Self {
        DivergenceReport {
            name: name.to_string(),
            value,
            reference: None,
            err_abs: None,
            err_rel: None,
            max_tt_rank,
            wall_time_s: started.elapsed().as_secs_f64(),
            d: grid.dim(),
            n: grid.counts().iter().copied().max().unwrap_or(0),
        }
    }

    /// Attach a reference value and fill in the error columns.
    pub fn with_reference(mut self, reference: f64) -> Self {
        self.reference = Some(reference);
        self.err_abs = Some((self.value - reference).abs());
        self.err_rel = if reference != 0.0 {
            Some((self.value - reference).abs() / reference.abs())
        } else {
            None
        };
        self
    }
}

fn resolve_path(path: FunctionPath, tensors: &[&TTTensor<f64>]) -> FunctionPath {
    match path {
        FunctionPath::Auto => {
            if tensors.iter().all(|t| t.is_rank_one()) {
                FunctionPath::Analytic
            } else {
                FunctionPath::Iterative
            }
        }
        other => other,
    }
}

/// Sign-normalized rank-one factors of a positive rank-one tensor.
fn positive_rank_one_factors(p: &TTTensor<f64>, op: &'static str) -> Result<Vec<Vec<f64>>> {
    let mut factors = p.rank_one_factors().ok_or_else(|| Error::InvalidConfig(
        "analytic path requires a rank-one tensor".into(),
    ))?;
    let mut flips = 0usize;
    for f in factors.iter_mut() {
        let dominant = f.iter().fold(0.0f64, |acc, &x| if x.abs() > acc.abs() { x } else { acc });
        if dominant < 0.0 {
            for x in f.iter_mut() {
                *x = -*x;
            }
            flips += 1;
        }
    }
    if flips % 2 == 1 {
        return Err(Error::DomainViolation { op, detail: "tensor is globally negative".into() });
    }
    Ok(factors)
}

/// log P as a TT tensor, by the configured path. Entries below the support
/// floor are clamped, matching the zero-contribution convention for
/// p·log p-type integrands.
fn log_tensor(
    p: &TTTensor<f64>,
    cfg: &DivergenceConfig,
    path: FunctionPath,
) -> Result<(TTTensor<f64>, usize)> {
    match path {
        FunctionPath::Analytic => {
            let factors = positive_rank_one_factors(p, "log")?;
            // Clamp each factor at the support floor itself: tail points are
            // excluded only where the factor (and hence the density) has
            // genuinely underflowed, so log-integrands against any density
            // with mass on the grid stay unbiased.
            let floor = cfg.support_floor;
            let logs: Vec<Vec<f64>> = factors
                .iter()
                .map(|f| f.iter().map(|&x| x.max(floor).ln()).collect())
                .collect();
            let t = TTTensor::from_univariate_sum(&logs)?;
            let rank = t.max_rank();
            Ok((t, rank))
        }
        FunctionPath::Iterative => {
            let r = had_log(p, &cfg.iter, cfg.log_method)?;
            if !r.converged {
                return Err(Error::NotConverged { op: "had_log", final_step: r.final_step_norm });
            }
            let rank = r.max_rank_seen;
            Ok((r.value, rank))
        }
        FunctionPath::Cross => {
            let floor = cfg.support_floor;
            let r = apply_via_cross(move |x| x.max(floor).ln(), p, &cfg.cross)?;
            let rank = r.tensor.max_rank();
            Ok((r.tensor.round(&cfg.iter.trunc), rank))
        }
        FunctionPath::Auto | FunctionPath::Sampled => {
            unreachable!("resolved before dispatch")
        }
    }
}

/// √P as a TT tensor, by the configured path.
fn sqrt_tensor(
    p: &TTTensor<f64>,
    cfg: &DivergenceConfig,
    path: FunctionPath,
) -> Result<(TTTensor<f64>, usize)> {
    match path {
        FunctionPath::Analytic => {
            let factors = positive_rank_one_factors(p, "sqrt")?;
            let roots: Vec<Vec<f64>> = factors
                .iter()
                .map(|f| f.iter().map(|&x| x.max(0.0).sqrt()).collect())
                .collect();
            let t = TTTensor::from_rank_one_factors(&roots)?;
            Ok((t, 1))
        }
        FunctionPath::Iterative => {
            let pair = had_sqrt_pair(p, &cfg.iter)?;
            if !pair.sqrt.converged {
                return Err(Error::NotConverged {
                    op: "had_sqrt_pair",
                    final_step: pair.sqrt.final_step_norm,
                });
            }
            let rank = pair.sqrt.max_rank_seen;
            Ok((pair.sqrt.value, rank))
        }
        FunctionPath::Cross => {
            let r = apply_via_cross(move |x| x.max(0.0).sqrt(), p, &cfg.cross)?;
            let rank = r.tensor.max_rank();
            Ok((r.tensor.round(&cfg.iter.trunc), rank))
        }
        FunctionPath::Auto | FunctionPath::Sampled => {
            unreachable!("resolved before dispatch")
        }
    }
}

/// Differential entropy h ≈ −(V/N)·⟨log P, P⟩.
pub fn entropy(p: &TTTensor<f64>, grid: &Grid, cfg: &DivergenceConfig) -> Result<f64> {
    let path = resolve_path(cfg.path, &[p]);
    let floor = cfg.support_floor;
    let plogp = move |pv: f64, _qv: f64| if pv <= floor { 0.0 } else { pv * pv.ln() };
    match path {
        FunctionPath::Cross => {
            let func = TtValueFn::new(vec![p], move |v: &[f64]| plogp(v[0], 0.0))?;
            let res = tt_cross(&func, &cfg.cross)?;
            Ok(-res.tensor.entry_sum() * grid.cell_volume())
        }
        FunctionPath::Sampled => {
            let (sum, _) = sampled_pair_sum(plogp, p, p, cfg.sample_count, cfg.cross.seed)?;
            Ok(-sum * grid.cell_volume())
        }
        _ => {
            let (logp, _) = log_tensor(p, cfg, path)?;
            Ok(-discrete_expectation(&logp, p, grid)?)
        }
    }
}

/// D_KL(P‖Q) ≈ (V/N)(⟨log P, P⟩ − ⟨log Q, P⟩).
pub fn kl_divergence(
    p: &TTTensor<f64>,
    q: &TTTensor<f64>,
    grid: &Grid,
    cfg: &DivergenceConfig,
) -> Result<DivergenceReport> {
    let started = Instant::now();
    let path = resolve_path(cfg.path, &[p, q]);
    let mut max_rank = p.max_rank().max(q.max_rank());
    let floor = cfg.support_floor;
    let integrand = move |pv: f64, qv: f64| {
        if pv <= floor {
            0.0
        } else {
            pv * (pv.ln() - qv.max(floor).ln())
        }
    };
    let value = match path {
        FunctionPath::Cross => {
            let func = TtValueFn::new(vec![p, q], move |v: &[f64]| integrand(v[0], v[1]))?;
            let res = tt_cross(&func, &cfg.cross)?;
            max_rank = max_rank.max(res.tensor.max_rank());
            res.tensor.entry_sum() * grid.cell_volume()
        }
        FunctionPath::Sampled => {
            let (sum, stderr) =
                sampled_pair_sum(integrand, p, q, cfg.sample_count, cfg.cross.seed)?;
            let scale = grid.cell_volume();
            eprintln!(
                "kl (sampled, {} draws): {:.6} ± {:.2e}",
                cfg.sample_count,
                sum * scale,
                stderr * scale
            );
            sum * scale
        }
        _ => {
            let (logp, rp) = log_tensor(p, cfg, path)?;
            let (logq, rq) = log_tensor(q, cfg, path)?;
            max_rank = max_rank.max(rp).max(rq);
            discrete_expectation(&logp, p, grid)? - discrete_expectation(&logq, p, grid)?
        }
    };
    Ok(DivergenceReport::new("kl", value, max_rank, started, grid))
}

/// Squared Hellinger distance (V/2N)·⟨√P − √Q, √P − √Q⟩.
pub fn hellinger_sq(
    p: &TTTensor<f64>,
    q: &TTTensor<f64>,
    grid: &Grid,
    cfg: &DivergenceConfig,
) -> Result<DivergenceReport> {
    let started = Instant::now();
    let path = resolve_path(cfg.path, &[p, q]);
    let mut max_rank = p.max_rank().max(q.max_rank());
    let integrand = |pv: f64, qv: f64| {
        let diff = pv.max(0.0).sqrt() - qv.max(0.0).sqrt();
        diff * diff
    };
    let value = match path {
        FunctionPath::Cross => {
            let func = TtValueFn::new(vec![p, q], move |v: &[f64]| integrand(v[0], v[1]))?;
            let res = tt_cross(&func, &cfg.cross)?;
            max_rank = max_rank.max(res.tensor.max_rank());
            0.5 * res.tensor.entry_sum() * grid.cell_volume()
        }
        FunctionPath::Sampled => {
            let (sum, stderr) =
                sampled_pair_sum(integrand, p, q, cfg.sample_count, cfg.cross.seed)?;
            let scale = 0.5 * grid.cell_volume();
            eprintln!(
                "hellinger_sq (sampled, {} draws): {:.6} ± {:.2e}",
                cfg.sample_count,
                sum * scale,
                stderr * scale
            );
            sum * scale
        }
        _ => {
            let (sp, rp) = sqrt_tensor(p, cfg, path)?;
            let (sq, rq) = sqrt_tensor(q, cfg, path)?;
            max_rank = max_rank.max(rp).max(rq);
            let diff = sp.sub(&sq)?.round(&cfg.iter.trunc);
            0.5 * grid.cell_volume() * diff.inner(&diff)?
        }
    };
    Ok(DivergenceReport::new("hellinger_sq", value, max_rank, started, grid))
}

/// D_Bh = −log((V/N)·⟨√P, √Q⟩).
pub fn bhattacharyya(
    p: &TTTensor<f64>,
    q: &TTTensor<f64>,
    grid: &Grid,
    cfg: &DivergenceConfig,
) -> Result<DivergenceReport> {
    let started = Instant::now();
    let path = resolve_path(cfg.path, &[p, q]);
    let mut max_rank = p.max_rank().max(q.max_rank());
    let integrand = |pv: f64, qv: f64| (pv.max(0.0) * qv.max(0.0)).sqrt();
    let coefficient = match path {
        FunctionPath::Cross => {
            let func = TtValueFn::new(vec![p, q], move |v: &[f64]| integrand(v[0], v[1]))?;
            let res = tt_cross(&func, &cfg.cross)?;
            max_rank = max_rank.max(res.tensor.max_rank());
            res.tensor.entry_sum() * grid.cell_volume()
        }
        FunctionPath::Sampled => {
            let (sum, _) = sampled_pair_sum(integrand, p, q, cfg.sample_count, cfg.cross.seed)?;
            sum * grid.cell_volume()
        }
        _ => {
            let (sp, rp) = sqrt_tensor(p, cfg, path)?;
            let (sq, rq) = sqrt_tensor(q, cfg, path)?;
            max_rank = max_rank.max(rp).max(rq);
            grid.cell_volume() * sp.inner(&sq)?
        }
    };
    if !(coefficient > 0.0) {
        return Err(Error::DomainViolation {
            op: "bhattacharyya",
            detail: format!("non-positive coefficient {coefficient}"),
        });
    }
    Ok(DivergenceReport::new("bhattacharyya", -coefficient.ln(), max_rank, started, grid))
}

/// Convex functions φ available for the Bregman divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BregmanPhi {
    /// φ(t) = t², φ′(t) = 2t.
    Square,
    /// φ(t) = t log t, φ′(t) = log t + 1.
    NegEntropy,
}

/// D_φ = S((φ(P) − φ(Q)) − (P − Q) ⊙ φ′(Q)).
pub fn bregman(
    p: &TTTensor<f64>,
    q: &TTTensor<f64>,
    grid: &Grid,
    phi: BregmanPhi,
    cfg: &DivergenceConfig,
) -> Result<DivergenceReport> {
    let started = Instant::now();
    let path = resolve_path(cfg.path, &[p, q]);
    let trunc = &cfg.iter.trunc;
    let mut max_rank = p.max_rank().max(q.max_rank());
    let value = match (phi, path) {
        (BregmanPhi::Square, FunctionPath::Sampled) => {
            let (sum, _) = sampled_pair_sum(
                |pv, qv| (pv - qv) * (pv - qv),
                p,
                q,
                cfg.sample_count,
                cfg.cross.seed,
            )?;
            sum * grid.cell_volume()
        }
        (BregmanPhi::NegEntropy, FunctionPath::Sampled) => {
            let floor = cfg.support_floor;
            let (sum, _) = sampled_pair_sum(
                move |pv, qv| {
                    let plogp = if pv <= floor { 0.0 } else { pv * pv.ln() };
                    let qlogq = if qv <= floor { 0.0 } else { qv * qv.ln() };
                    plogp - qlogq - (pv - qv) * (qv.max(floor).ln() + 1.0)
                },
                p,
                q,
                cfg.sample_count,
                cfg.cross.seed,
            )?;
            sum * grid.cell_volume()
        }
        (BregmanPhi::Square, FunctionPath::Cross) => {
            let func = TtValueFn::new(vec![p, q], |v: &[f64]| {
                let d = v[0] - v[1];
                d * d
            })?;
            let res = tt_cross(&func, &cfg.cross)?;
            max_rank = max_rank.max(res.tensor.max_rank());
            res.tensor.entry_sum() * grid.cell_volume()
        }
        (BregmanPhi::Square, _) => {
            // (P² − Q²) − (P − Q)·2Q = (P − Q)²
            let diff = p.sub(q)?.round(trunc);
            max_rank = max_rank.max(diff.max_rank());
            grid.cell_volume() * diff.inner(&diff)?
        }
        (BregmanPhi::NegEntropy, FunctionPath::Cross) => {
            let floor = cfg.support_floor;
            let func = TtValueFn::new(vec![p, q], move |v: &[f64]| {
                let plogp = if v[0] <= floor { 0.0 } else { v[0] * v[0].ln() };
                let qlogq = if v[1] <= floor { 0.0 } else { v[1] * v[1].ln() };
                plogp - qlogq - (v[0] - v[1]) * (v[1].max(floor).ln() + 1.0)
            })?;
            let res = tt_cross(&func, &cfg.cross)?;
            max_rank = max_rank.max(res.tensor.max_rank());
            res.tensor.entry_sum() * grid.cell_volume()
        }
        (BregmanPhi::NegEntropy, _) => {
            let (logp, rp) = log_tensor(p, cfg, path)?;
            let (logq, rq) = log_tensor(q, cfg, path)?;
            max_rank = max_rank.max(rp).max(rq);
            let plogp = p.hadamard(&logp)?.round(trunc);
            let qlogq = q.hadamard(&logq)?.round(trunc);
            let diff = p.sub(q)?.round(trunc);
            let ones = TTTensor::ones(&p.modes());
            let dphi_q = logq.add(&ones)?.round(trunc);
            let integrand = plogp
                .sub(&qlogq)?
                .round(trunc)
                .sub(&diff.hadamard(&dphi_q)?.round(trunc))?
                .round(trunc);
            max_rank = max_rank.max(integrand.max_rank());
            integrand.entry_sum() * grid.cell_volume()
        }
    };
    Ok(DivergenceReport::new("bregman", value, max_rank, started, grid))
}

/// Registry of convex generators for the f-divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FDivergence {
    Kl,
    ReverseKl,
    HellingerSq,
    TotalVariation,
    Pearson,
    Neyman,
    PearsonVajda(u32),
    AbsPearsonVajda(u32),
    JensenShannon,
}

impl FDivergence {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "kl" => Some(Self::Kl),
            "reverse_kl" => Some(Self::ReverseKl),
            "hellinger_sq" => Some(Self::HellingerSq),
            "total_variation" => Some(Self::TotalVariation),
            "pearson" => Some(Self::Pearson),
            "neyman" => Some(Self::Neyman),
            "jensen_shannon" => Some(Self::JensenShannon),
            _ => {
                if let Some(k) = name.strip_prefix("pearson_vajda_") {
                    return k.parse().ok().map(Self::PearsonVajda);
                }
                if let Some(k) = name.strip_prefix("abs_pearson_vajda_") {
                    return k.parse().ok().map(Self::AbsPearsonVajda);
                }
                None
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Kl => "kl".into(),
            Self::ReverseKl => "reverse_kl".into(),
            Self::HellingerSq => "hellinger_sq".into(),
            Self::TotalVariation => "total_variation".into(),
            Self::Pearson => "pearson".into(),
            Self::Neyman => "neyman".into(),
            Self::PearsonVajda(k) => format!("pearson_vajda_{k}"),
            Self::AbsPearsonVajda(k) => format!("abs_pearson_vajda_{k}"),
            Self::JensenShannon => "jensen_shannon".into(),
        }
    }

    /// The generator as a scalar function of the ratio t = p/q.
    pub fn scalar(&self) -> impl Fn(f64) -> f64 + Copy {
        let which = *self;
        move |t: f64| match which {
            Self::Kl => {
                if t <= 0.0 {
                    0.0
                } else {
                    t * t.ln()
                }
            }
            Self::ReverseKl => -t.max(f64::MIN_POSITIVE).ln(),
            Self::HellingerSq => {
                let s = t.max(0.0).sqrt() - 1.0;
                s * s
            }
            Self::TotalVariation => 0.5 * (t - 1.0).abs(),
            Self::Pearson => (t - 1.0) * (t - 1.0),
            Self::Neyman => 1.0 / t.max(f64::MIN_POSITIVE) - 1.0,
            Self::PearsonVajda(k) => (t - 1.0).powi(k as i32),
            Self::AbsPearsonVajda(k) => (t - 1.0).abs().powi(k as i32),
            Self::JensenShannon => {
                let a = if t <= 0.0 { 0.0 } else { t * t.ln() };
                a - (t + 1.0) * ((t + 1.0) / 2.0).ln()
            }
        }
    }
}

/// D_f(P‖Q) ≈ (V/N)·⟨f(P ⊙ Q^{⊙−1}), Q⟩.
pub fn f_divergence(
    p: &TTTensor<f64>,
    q: &TTTensor<f64>,
    grid: &Grid,
    f: FDivergence,
    cfg: &DivergenceConfig,
) -> Result<DivergenceReport> {
    let started = Instant::now();
    let path = resolve_path(cfg.path, &[p, q]);
    let mut max_rank = p.max_rank().max(q.max_rank());
    let value = match path {
        FunctionPath::Sampled => {
            let scalar = f.scalar();
            let floor = cfg.support_floor;
            let (sum, _) = sampled_pair_sum(
                move |pv, qv| if qv <= floor { 0.0 } else { qv * scalar(pv / qv) },
                p,
                q,
                cfg.sample_count,
                cfg.cross.seed,
            )?;
            sum * grid.cell_volume()
        }
        FunctionPath::Cross | FunctionPath::Analytic => {
            // integrand q·f(p/q) interpolated directly; the analytic route
            // has no per-factor form for general f, so it shares this one
            let scalar = f.scalar();
            let floor = cfg.support_floor;
            let func = TtValueFn::new(vec![p, q], move |v: &[f64]| {
                let qv = v[1];
                if qv <= floor {
                    return 0.0;
                }
                qv * scalar(v[0] / qv)
            })?;
            let res = tt_cross(&func, &cfg.cross)?;
            max_rank = max_rank.max(res.tensor.max_rank());
            res.tensor.entry_sum() * grid.cell_volume()
        }
        _ => {
            let trunc = &cfg.iter.trunc;
            let qinv = had_inverse(q, &cfg.iter)?;
            max_rank = max_rank.max(qinv.max_rank_seen);
            let ratio = p.hadamard(&qinv.value)?.round(trunc);
            max_rank = max_rank.max(ratio.max_rank());
            let ones = TTTensor::ones(&p.modes());
            let f_t = match f {
                FDivergence::Kl => {
                    let lg = had_log(&ratio, &cfg.iter, cfg.log_method)?;
                    max_rank = max_rank.max(lg.max_rank_seen);
                    ratio.hadamard(&lg.value)?.round(trunc)
                }
                FDivergence::ReverseKl => {
                    let lg = had_log(&ratio, &cfg.iter, cfg.log_method)?;
                    max_rank = max_rank.max(lg.max_rank_seen);
                    lg.value.scale_real(-1.0)
                }
                FDivergence::HellingerSq => {
                    // (√t − 1)² = t − 2√t + 1
                    let pair = had_sqrt_pair(&ratio, &cfg.iter)?;
                    max_rank = max_rank.max(pair.sqrt.max_rank_seen);
                    ratio
                        .sub(&pair.sqrt.value.scale_real(2.0))?
                        .round(trunc)
                        .add(&ones)?
                        .round(trunc)
                }
                FDivergence::TotalVariation => {
                    let shifted = ratio.sub(&ones)?.round(trunc);
                    crate::pointwise::had_abs(&shifted, &cfg.iter)?.scale_real(0.5)
                }
                FDivergence::Pearson => {
                    let shifted = ratio.sub(&ones)?.round(trunc);
                    shifted.hadamard(&shifted)?.round(trunc)
                }
                FDivergence::Neyman => {
                    let rinv = had_inverse(&ratio, &cfg.iter)?;
                    max_rank = max_rank.max(rinv.max_rank_seen);
                    rinv.value.sub(&ones)?.round(trunc)
                }
                FDivergence::PearsonVajda(k) => {
                    let shifted = ratio.sub(&ones)?.round(trunc);
                    had_pow(&shifted, k as i64, &cfg.iter)?
                }
                FDivergence::AbsPearsonVajda(k) => {
                    let shifted = ratio.sub(&ones)?.round(trunc);
                    let a = crate::pointwise::had_abs(&shifted, &cfg.iter)?;
                    had_pow(&a, k as i64, &cfg.iter)?
                }
                FDivergence::JensenShannon => {
                    let lg = had_log(&ratio, &cfg.iter, cfg.log_method)?;
                    max_rank = max_rank.max(lg.max_rank_seen);
                    let tlogt = ratio.hadamard(&lg.value)?.round(trunc);
                    let tp1 = ratio.add(&ones)?.round(trunc);
                    let half_tp1 = tp1.scale_real(0.5);
                    let lg_half = had_log(&half_tp1, &cfg.iter, cfg.log_method)?;
                    max_rank = max_rank.max(lg_half.max_rank_seen);
                    tlogt.sub(&tp1.hadamard(&lg_half.value)?.round(trunc))?.round(trunc)
                }
            };
            max_rank = max_rank.max(f_t.max_rank());
            grid.cell_volume() * f_t.inner(q)?
        }
    };
    Ok(DivergenceReport::new(&f.name(), value, max_rank, started, grid))
}
