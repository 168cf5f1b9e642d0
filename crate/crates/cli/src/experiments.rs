//! Experiment implementations and report emission.

use std::time::Instant;

use ttprob::cross::CrossConfig;
use ttprob::dist::{
    alpha_stable_pdf_tt, gaussian_hellinger_sq_analytic, gaussian_kld_analytic, AlphaStableSpec,
    GaussianSpec, QuadConvention,
};
use ttprob::grid::make_grid;
use ttprob::pointwise::{
    had_exp, had_inverse, had_log, had_sign, had_sqrt_pair, IterationConfig, IterationResult,
    LogMethod, SignMethod,
};
use ttprob::stats::{
    hellinger_sq, kl_divergence, DivergenceConfig, DivergenceReport, FunctionPath,
};
use ttprob::tt::{TTTensor, TruncationConfig};
use ttprob::{dense::DenseTensor, ttjson};

use crate::config::{
    apply_common, config_hash, load_overrides, AlphaArgs, BenchArgs, Cli, Format, FuncArgs,
    GaussianArgs,
};

type AnyError = Box<dyn std::error::Error>;
type Outcome = Result<bool, AnyError>;

struct Row {
    report: DivergenceReport,
    experiment: String,
    hash: String,
}

fn emit(cli: &Cli, rows: &[Row]) -> Result<(), AnyError> {
    let mut out = String::new();
    match cli.format {
        Format::Csv => {
            out.push_str(
                "experiment,d,n,value,reference,err_abs,err_rel,max_tt_rank,wall_time_s,config_hash\n",
            );
            for row in rows {
                let r = &row.report;
                let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{:.6},{}\n",
                    row.experiment,
                    r.d,
                    r.n,
                    r.value,
                    opt(r.reference),
                    opt(r.err_abs),
                    opt(r.err_rel),
                    r.max_tt_rank,
                    r.wall_time_s,
                    row.hash
                ));
            }
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let mut v = serde_json::to_value(&row.report).expect("report serializes");
                    v["experiment"] = serde_json::Value::String(row.experiment.clone());
                    v["config_hash"] = serde_json::Value::String(row.hash.clone());
                    v
                })
                .collect();
            out = serde_json::to_string_pretty(&items)? + "\n";
        }
    }
    match &cli.out {
        Some(path) => std::fs::write(path, out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn trace_lines(cli: &Cli, label: &str, res: &IterationResult) {
    if !cli.trace {
        return;
    }
    for row in &res.trace {
        eprintln!(
            "{{\"op\":\"{label}\",\"iteration\":{},\"step_norm\":{:.6e},\"max_rank\":{}}}",
            row.iteration, row.step_norm, row.max_rank
        );
    }
}

pub fn gaussian_kld(cli: &Cli, args: &GaussianArgs) -> Outcome {
    let mut args = args.clone();
    if let Some(path) = &cli.config {
        let over = load_overrides(path)?;
        apply_common(&over, &mut args.common);
        if let Some(v) = over.sigma1 {
            args.sigma1 = v;
        }
        if let Some(v) = over.sigma2 {
            args.sigma2 = v;
        }
        if let Some(v) = over.mu1 {
            args.mu1 = v;
        }
        if let Some(v) = over.mu2 {
            args.mu2 = v;
        }
    }
    let hash = config_hash(&format!("gaussian-kld:{args:?}"));
    let mut rows = Vec::new();
    for &d in &args.common.d {
        let (grid, _) = make_grid(&vec![args.common.a; d], &vec![args.common.n; d])?;
        let s1 = GaussianSpec::isotropic(d, args.mu1, args.sigma1)?;
        let s2 = GaussianSpec::isotropic(d, args.mu2, args.sigma2)?;
        for (label, spec) in [("p", &s1), ("q", &s2)] {
            let viol = spec.aliasing_violations(&grid);
            if !viol.is_empty() {
                eprintln!(
                    "warning: {label} has sigma below 2*dx in dimensions {viol:?}; aliasing possible"
                );
            }
        }
        let p = s1.pdf_tt(&grid)?;
        let q = s2.pdf_tt(&grid)?;
        let cfg = divergence_config(&args.common, FunctionPath::Auto);
        let report = kl_divergence(&p.tensor, &q.tensor, &grid, &cfg)?
            .with_reference(gaussian_kld_analytic(&s1, &s2)?);
        rows.push(Row { report, experiment: "gaussian-kld".into(), hash: hash.clone() });
    }
    emit(cli, &rows)?;
    Ok(true)
}

pub fn gaussian_hellinger(cli: &Cli, args: &GaussianArgs) -> Outcome {
    let mut args = args.clone();
    if let Some(path) = &cli.config {
        let over = load_overrides(path)?;
        apply_common(&over, &mut args.common);
        if let Some(v) = over.sigma1 {
            args.sigma1 = v;
        }
        if let Some(v) = over.sigma2 {
            args.sigma2 = v;
        }
        if let Some(v) = over.mu1 {
            args.mu1 = v;
        }
        if let Some(v) = over.mu2 {
            args.mu2 = v;
        }
    }
    let hash = config_hash(&format!("gaussian-hellinger:{args:?}"));
    let mut rows = Vec::new();
    for &d in &args.common.d {
        let (grid, _) = make_grid(&vec![args.common.a; d], &vec![args.common.n; d])?;
        let s1 = GaussianSpec::isotropic(d, args.mu1, args.sigma1)?;
        let s2 = GaussianSpec::isotropic(d, args.mu2, args.sigma2)?;
        let p = s1.pdf_tt(&grid)?;
        let q = s2.pdf_tt(&grid)?;
        // the Hellinger table runs the coupled square-root iteration, not the
        // separable shortcut
        let cfg = divergence_config(&args.common, FunctionPath::Iterative);
        let mut report = hellinger_sq(&p.tensor, &q.tensor, &grid, &cfg)?;
        report.value = report.value.max(0.0).sqrt();
        report.name = "hellinger".into();
        let report =
            report.with_reference(gaussian_hellinger_sq_analytic(&s1, &s2)?.max(0.0).sqrt());
        rows.push(Row { report, experiment: "gaussian-hellinger".into(), hash: hash.clone() });
    }
    emit(cli, &rows)?;
    Ok(true)
}

pub fn alpha_experiment(cli: &Cli, args: &AlphaArgs, hellinger: bool) -> Outcome {
    let mut args = args.clone();
    if let Some(path) = &cli.config {
        let over = load_overrides(path)?;
        apply_common(&over, &mut args.common);
        if let Some(v) = over.alpha1 {
            args.alpha1 = v;
        }
        if let Some(v) = over.alpha2 {
            args.alpha2 = v;
        }
        if let Some(v) = &over.convention {
            args.convention = v.clone();
        }
        if let Some(v) = over.max_rank {
            args.max_rank = v;
        }
    }
    let name = if hellinger { "alpha-hellinger" } else { "alpha-kld" };
    let hash = config_hash(&format!("{name}:{args:?}"));
    let convention = match args.convention.as_str() {
        "code" => QuadConvention::HalvedQuadratic,
        "quadratic" => QuadConvention::Quadratic,
        other => return Err(format!("unknown convention \"{other}\"").into()),
    };
    let mut all_converged = true;
    let mut rows = Vec::new();
    for &d in &args.common.d {
        let started = Instant::now();
        // `a` keeps the reference code's meaning: the half-width of the
        // 512-point frequency grid whose spacing π/256·a the experiments
        // inherit. The density box is its Nyquist dual, ±256π/a.
        let box_half_width = 256.0 * std::f64::consts::PI / args.common.a;
        let (grid, dual) = make_grid(&vec![box_half_width; d], &vec![args.common.n; d])?;
        let trunc = TruncationConfig::new(args.common.eps);
        let cross = CrossConfig {
            tol: args.common.cross_tol,
            max_rank: args.max_rank,
            seed: args.common.seed,
            ..Default::default()
        };
        let mut max_rank = 0usize;
        let build = |alpha: f64, seed_shift: u64| -> Result<_, AnyError> {
            let spec = AlphaStableSpec::isotropic(d, alpha)?.with_convention(convention);
            let out = alpha_stable_pdf_tt(
                &spec,
                &grid,
                &dual,
                &CrossConfig { seed: cross.seed.wrapping_add(seed_shift), ..cross.clone() },
                &trunc,
            )?;
            eprintln!(
                "alpha={alpha}: |S-1| = {:.3e}, im residual {:.3e}, cross err {:.3e}, max rank {}",
                out.normalization_residual, out.im_residual, out.cross_error, out.max_tt_rank
            );
            Ok(out)
        };
        let p = build(args.alpha1, 1)?;
        let q = build(args.alpha2, 2)?;
        all_converged &= p.cross_converged && q.cross_converged;
        max_rank = max_rank.max(p.max_tt_rank).max(q.max_tt_rank);

        // Integrands of densities reconstructed from Nyquist-truncated pcfs
        // are too rough to interpolate; the seeded sampled path handles them.
        let mut cfg = divergence_config(&args.common, FunctionPath::Sampled);
        cfg.cross.max_rank = args.max_rank;
        cfg.cross.seed = args.common.seed.wrapping_add(3);
        let mut report = if hellinger {
            let mut r = hellinger_sq(&p.pdf.tensor, &q.pdf.tensor, &grid, &cfg)?;
            r.value = r.value.max(0.0).sqrt();
            r.name = "hellinger".into();
            r
        } else {
            kl_divergence(&p.pdf.tensor, &q.pdf.tensor, &grid, &cfg)?
        };
        report.max_tt_rank = report.max_tt_rank.max(max_rank);
        report.wall_time_s = started.elapsed().as_secs_f64();
        rows.push(Row {
            report,
            experiment: format!("{name}[{},{}]", args.alpha1, args.alpha2),
            hash: hash.clone(),
        });
    }
    emit(cli, &rows)?;
    Ok(all_converged)
}

pub fn pointwise_bench(cli: &Cli, args: &BenchArgs) -> Outcome {
    let mut args = args.clone();
    if let Some(path) = &cli.config {
        let over = load_overrides(path)?;
        apply_common(&over, &mut args.common);
    }
    let hash = config_hash(&format!("pointwise-bench:{args:?}"));
    let mut rows = Vec::new();
    let mut all_converged = true;
    for &d in &args.common.d {
        let n = args.common.n;
        let modes = vec![n; d];
        // positive random tensor with controlled entry range
        let mut state = args.common.seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut w = TTTensor::<f64>::ones(&modes);
        for _ in 0..args.rank.max(1) {
            let bump: Vec<Vec<f64>> =
                modes.iter().map(|&m| (0..m).map(|_| 2.0 * next() - 1.0).collect()).collect();
            let sup: f64 = bump
                .iter()
                .map(|f| f.iter().fold(0.0f64, |acc, &x| acc.max(x.abs())))
                .product();
            let t = TTTensor::from_rank_one_factors(&bump)?;
            w = w.add(&t.scale_real(0.4 / sup.max(1e-12) / args.rank.max(1) as f64))?;
        }
        let iter = IterationConfig::new(args.common.tol, 100, TruncationConfig::new(args.common.eps));
        let dense: Option<DenseTensor<f64>> = DenseTensor::from_tt(&w).ok();
        let mut push = |op: &str, res: IterationResult, oracle: Option<DenseTensor<f64>>| {
            trace_lines(cli, op, &res);
            all_converged &= res.converged;
            let err = match (&dense, oracle) {
                (Some(_), Some(o)) => DenseTensor::from_tt(&res.value)
                    .ok()
                    .map(|got| got.sub(&o).map(|dd| dd.max_abs()).unwrap_or(f64::NAN)),
                _ => None,
            };
            let mut report = DivergenceReport {
                name: op.into(),
                value: res.final_step_norm,
                reference: None,
                err_abs: err,
                err_rel: None,
                max_tt_rank: res.max_rank_seen,
                wall_time_s: 0.0,
                d,
                n,
            };
            report.wall_time_s = 0.0;
            rows.push(Row {
                report,
                experiment: format!("pointwise-bench[{op}]"),
                hash: hash.clone(),
            });
        };
        let t0 = Instant::now();
        let inv = had_inverse(&w, &iter)?;
        let dt_inv = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let pair = had_sqrt_pair(&w, &iter)?;
        let dt_sqrt = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let lg = had_log(&w, &iter, LogMethod::Gregory)?;
        let dt_log = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let ex = had_exp(&w, &iter)?;
        let dt_exp = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let sg = had_sign(&w, &iter, SignMethod::NewtonSchulz)?;
        let dt_sign = t0.elapsed().as_secs_f64();

        push("inverse", inv, dense.as_ref().map(|x| x.map(|v| 1.0 / v)));
        push("sqrt", pair.sqrt, dense.as_ref().map(|x| x.map(f64::sqrt)));
        push("log", lg, dense.as_ref().map(|x| x.map(f64::ln)));
        push("exp", ex, dense.as_ref().map(|x| x.map(f64::exp)));
        push("sign", sg, dense.as_ref().map(|x| x.map(f64::signum)));
        for (row, dt) in rows
            .iter_mut()
            .rev()
            .take(5)
            .zip([dt_sign, dt_exp, dt_log, dt_sqrt, dt_inv])
        {
            row.report.wall_time_s = dt;
        }
    }
    emit(cli, &rows)?;
    Ok(all_converged)
}

pub fn func(cli: &Cli, args: &FuncArgs) -> Outcome {
    let text = std::fs::read_to_string(&args.input)?;
    let w: TTTensor<f64> = ttjson::from_json_str(&text)?;
    let iter = IterationConfig::new(args.tol, 100, TruncationConfig::new(args.eps));
    let started = Instant::now();
    let (value, res): (TTTensor<f64>, Option<IterationResult>) = match args.function.as_str() {
        "inverse" => {
            let r = had_inverse(&w, &iter)?;
            (r.value.clone(), Some(r))
        }
        "sqrt" => {
            let r = had_sqrt_pair(&w, &iter)?;
            (r.sqrt.value.clone(), Some(r.sqrt))
        }
        "invsqrt" => {
            let r = had_sqrt_pair(&w, &iter)?;
            (r.inv_sqrt.value.clone(), Some(r.inv_sqrt))
        }
        "exp" => {
            let r = had_exp(&w, &iter)?;
            (r.value.clone(), Some(r))
        }
        "log" => {
            let r = had_log(&w, &iter, LogMethod::Gregory)?;
            (r.value.clone(), Some(r))
        }
        "sign" => {
            let r = had_sign(&w, &iter, SignMethod::NewtonSchulz)?;
            (r.value.clone(), Some(r))
        }
        "abs" => (ttprob::pointwise::had_abs(&w, &iter)?, None),
        "square" => (w.hadamard(&w)?.round(&iter.trunc), None),
        other => return Err(format!("unknown function \"{other}\"").into()),
    };
    let converged = res.as_ref().map(|r| r.converged).unwrap_or(true);
    if let Some(r) = &res {
        trace_lines(cli, &args.function, r);
        eprintln!(
            "{}: {} iterations, final step {:.3e}, max rank {}, {:.3}s",
            args.function,
            r.iterations,
            r.final_step_norm,
            r.max_rank_seen,
            started.elapsed().as_secs_f64()
        );
    }
    let json = ttjson::to_json_string(&value);
    match &cli.out {
        Some(path) => std::fs::write(path, json)?,
        None => println!("{json}"),
    }
    Ok(converged)
}

fn divergence_config(common: &crate::config::CommonArgs, path: FunctionPath) -> DivergenceConfig {
    let mut cfg = DivergenceConfig::default();
    cfg.iter = IterationConfig::new(common.tol, 100, TruncationConfig::new(common.eps));
    cfg.cross.tol = common.cross_tol;
    cfg.cross.seed = common.seed;
    cfg.path = path;
    cfg
}
