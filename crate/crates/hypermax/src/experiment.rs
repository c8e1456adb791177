//! Synthetic-data generation, noise injection, experiment grids over
//! expander-sampled completions, and the bound checks each run must pass.

use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::random_regular;
use crate::hypergraph::{
    build_quasi_hypergraph, build_walk_hypergraph, HyperedgeSet, QuasiRegularHypergraph,
};
use crate::maxq::{error_bound_rhs, error_bound_rhs_quasi, maxqnorm_upper};
use crate::solver::{coordinate_descent, Observations, SolverConfig, SolverTrace};
use crate::tensor::{for_each_index, DenseTensor, FactorSet};

/// Above this many entries the truth tensor stays implicit and
/// generalization error is estimated on held-out samples.
pub const EXACT_ERROR_LIMIT: usize = 10_000_000;

/// Grid description for a batch of expander-sampled completion runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    /// Part size (the tensor is hypercubic `n^t`).
    pub n: usize,
    pub t: usize,
    pub r_truth: usize,
    /// Base-graph degrees to sweep.
    pub ds: Vec<usize>,
    /// Fit ranks to sweep.
    pub r_fits: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Residual budget coefficient: `delta = delta_coeff * sqrt(|E|)`.
    pub delta_coeff: f64,
    /// RMS of the injected observation noise (0 = exact observations).
    pub noise_level: f64,
    /// Solver template; `r_fit`, `delta`, and `seed` are set per cell.
    pub solver: SolverConfig,
    /// Held-out sample count when the truth is not materialized.
    pub holdout_samples: usize,
}

impl ExperimentSpec {
    pub fn new(n: usize, t: usize, r_truth: usize) -> Self {
        Self {
            n,
            t,
            r_truth,
            ds: vec![11],
            r_fits: vec![16],
            seeds: vec![0],
            delta_coeff: 0.05,
            noise_level: 0.0,
            solver: SolverConfig::new(16),
            holdout_samples: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.t < 2 || self.r_truth == 0 {
            return Err(Error::InvalidArgument(
                "n, t, r_truth must be positive (t >= 2)".into(),
            ));
        }
        if self.ds.is_empty() || self.r_fits.is_empty() || self.seeds.is_empty() {
            return Err(Error::InvalidArgument(
                "ds, r_fits, seeds must be nonempty".into(),
            ));
        }
        if self.ds.contains(&0) || self.r_fits.contains(&0) {
            return Err(Error::InvalidArgument(
                "degrees and fit ranks must be positive".into(),
            ));
        }
        let nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if !nonneg(self.delta_coeff) || !nonneg(self.noise_level) {
            return Err(Error::InvalidArgument(
                "delta_coeff and noise_level must be >= 0".into(),
            ));
        }
        if self.holdout_samples == 0 {
            return Err(Error::InvalidArgument(
                "holdout_samples must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One completed (or failed) grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub n: usize,
    pub t: usize,
    pub d: usize,
    pub r_fit: usize,
    pub seed: u64,
    pub edges: u64,
    pub lambda: f64,
    pub gen_error: f64,
    pub maxq_ub_truth: f64,
    pub maxq_ub_est: f64,
    pub thm_rhs: f64,
    pub iters: usize,
    pub converged: bool,
    pub seconds: f64,
    /// Mean square of the truth entries; with `gen_error` this gives the
    /// mean squared error `gen_error^2 * truth_msq`.
    pub truth_msq: f64,
    /// Standard error of the gen-error estimate when it was sampled.
    pub gen_error_se: Option<f64>,
    /// Set when the cell failed; other numeric fields are then zero.
    pub error: Option<String>,
}

impl ResultRow {
    pub fn mse(&self) -> f64 {
        self.gen_error * self.gen_error * self.truth_msq
    }
}

/// Uniform `[-1, 1]` CP factors rescaled by a single scalar on the first
/// factor so the truth tensor has (estimated) RMS 1. Returns the dense
/// truth as well when it is small enough to materialize.
pub fn gen_synthetic(
    dims: &[usize],
    r: usize,
    seed: u64,
) -> Result<(FactorSet, Option<DenseTensor>)> {
    if r == 0 {
        return Err(Error::InvalidArgument("rank must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors: Vec<Array2<f64>> = dims
        .iter()
        .map(|&n| Array2::from_shape_fn((n, r), |_| rng.gen_range(-1.0..1.0)))
        .collect();
    let mut f = FactorSet::new(factors)?;
    let total: u128 = dims.iter().map(|&n| n as u128).product();
    if total <= EXACT_ERROR_LIMIT as u128 {
        let dense = f.evaluate()?;
        let rms = dense.frobenius_norm() / (dense.len() as f64).sqrt();
        if rms > 0.0 {
            f.factor_mut(0).mapv_inplace(|v| v / rms);
            // re-evaluate so dense and factors agree bit for bit
            let dense = f.evaluate()?;
            return Ok((f, Some(dense)));
        }
        Ok((f, Some(dense)))
    } else {
        let samples = 1_000_000usize;
        let mut acc = 0.0f64;
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..samples {
            for (i, &n) in dims.iter().enumerate() {
                idx[i] = rng.gen_range(0..n);
            }
            let v = f.entry(&idx);
            acc += v * v;
        }
        let rms = (acc / samples as f64).sqrt();
        if rms > 0.0 {
            f.factor_mut(0).mapv_inplace(|v| v / rms);
        }
        Ok((f, None))
    }
}

/// Observe the truth on the mask, optionally adding bounded noise.
///
/// Noise is i.i.d. uniform on `[-a, a]` with `a = noise_level * sqrt(3)`
/// (so the nominal RMS is `noise_level`), then rescaled down if the drawn
/// RMS exceeds the budget, keeping the per-entry mean-square bound exact.
pub fn sample_observations(
    truth: &FactorSet,
    mask: &HyperedgeSet,
    noise_level: f64,
    seed: u64,
) -> Result<Observations> {
    if truth.dims() != mask.dims() {
        return Err(Error::ShapeMismatch(format!(
            "truth dims {:?} vs mask dims {:?}",
            truth.dims(),
            mask.dims()
        )));
    }
    let mut idx = vec![0usize; mask.arity()];
    let mut values: Vec<f64> = mask
        .iter()
        .map(|tuple| {
            for (i, &j) in tuple.iter().enumerate() {
                idx[i] = j as usize;
            }
            truth.entry(&idx)
        })
        .collect();
    if noise_level > 0.0 && !values.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = noise_level * 3.0f64.sqrt();
        let mut noise: Vec<f64> = (0..values.len()).map(|_| rng.gen_range(-a..a)).collect();
        let rms = (noise.iter().map(|v| v * v).sum::<f64>() / noise.len() as f64).sqrt();
        if rms > noise_level {
            let scale = noise_level / rms;
            noise.iter_mut().for_each(|v| *v *= scale);
        }
        for (z, nu) in values.iter_mut().zip(&noise) {
            *z += nu;
        }
    }
    Observations::new(mask.clone(), values)
}

fn derive_seed(parts: &[u64]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &p in parts {
        h ^= p;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Exact generalization error `||That - T||_F / ||T||_F` plus the truth
/// mean square, streaming over the dense truth.
pub fn exact_gen_error(truth: &DenseTensor, estimate: &FactorSet) -> (f64, f64) {
    let mut err2 = 0.0f64;
    let mut t2 = 0.0f64;
    for_each_index(truth.dims(), |idx| {
        let tv = truth.get(idx);
        let d = estimate.entry(idx) - tv;
        err2 += d * d;
        t2 += tv * tv;
    });
    let gen = if t2 > 0.0 { (err2 / t2).sqrt() } else { 0.0 };
    (gen, t2 / truth.len() as f64)
}

fn encode_tuple(tuple: &[u32], dims: &[usize]) -> u64 {
    let mut code = 0u64;
    for (i, &j) in tuple.iter().enumerate() {
        code = code * dims[i] as u64 + j as u64;
    }
    code
}

/// Estimate the generalization error on uniformly sampled held-out indices
/// (observed edges excluded). Returns `(gen_error, truth_msq, stderr)`.
pub fn estimated_gen_error(
    truth: &FactorSet,
    estimate: &FactorSet,
    mask: &HyperedgeSet,
    samples: usize,
    seed: u64,
) -> (f64, f64, f64) {
    let dims = truth.dims();
    let observed: std::collections::HashSet<u64> = mask
        .iter()
        .map(|tuple| encode_tuple(tuple, &dims))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = vec![0usize; dims.len()];
    let mut err2_sum = 0.0f64;
    let mut err4_sum = 0.0f64;
    let mut t2_sum = 0.0f64;
    let mut taken = 0usize;
    while taken < samples {
        let mut code = 0u64;
        for (i, &n) in dims.iter().enumerate() {
            idx[i] = rng.gen_range(0..n);
            code = code * n as u64 + idx[i] as u64;
        }
        if observed.contains(&code) {
            continue;
        }
        let tv = truth.entry(&idx);
        let d = estimate.entry(&idx) - tv;
        err2_sum += d * d;
        err4_sum += d * d * d * d;
        t2_sum += tv * tv;
        taken += 1;
    }
    let m = samples as f64;
    let mse = err2_sum / m;
    let t2 = t2_sum / m;
    let gen = if t2 > 0.0 { (mse / t2).sqrt() } else { 0.0 };
    // delta-method standard error of sqrt(mse/t2) through the mse estimate
    let var_mse = (err4_sum / m - mse * mse).max(0.0) / m;
    let se = if mse > 0.0 && t2 > 0.0 {
        0.5 * gen * var_mse.sqrt() / mse
    } else {
        0.0
    };
    (gen, t2, se)
}

/// Zero-noise bound audit: mean squared error against the spectral
/// right-hand side computed from the certified truth bound.
pub fn verify_error_bound(row: &ResultRow) -> bool {
    row.error.is_none() && row.mse() <= row.thm_rhs
}

/// Noisy variant: the right-hand side gains the irreducible `4 delta^2`
/// term, with `delta` the per-entry RMS noise budget.
pub fn verify_error_bound_noisy(row: &ResultRow, delta_rms: f64) -> bool {
    row.error.is_none() && row.mse() <= row.thm_rhs + 4.0 * delta_rms * delta_rms
}

/// Run one grid cell: graph, hypergraph, truth, observations, solve.
pub fn run_cell(spec: &ExperimentSpec, d: usize, r_fit: usize, seed: u64) -> ResultRow {
    let started = Instant::now();
    let mut row = ResultRow {
        n: spec.n,
        t: spec.t,
        d,
        r_fit,
        seed,
        edges: 0,
        lambda: 0.0,
        gen_error: 0.0,
        maxq_ub_truth: 0.0,
        maxq_ub_est: 0.0,
        thm_rhs: 0.0,
        iters: 0,
        converged: false,
        seconds: 0.0,
        truth_msq: 0.0,
        gen_error_se: None,
        error: None,
    };
    match run_cell_inner(spec, d, r_fit, seed, &mut row) {
        Ok(()) => {}
        Err(e) => row.error = Some(e.to_string()),
    }
    row.seconds = started.elapsed().as_secs_f64();
    row
}

fn run_cell_inner(
    spec: &ExperimentSpec,
    d: usize,
    r_fit: usize,
    seed: u64,
    row: &mut ResultRow,
) -> Result<()> {
    let graph = random_regular(spec.n, d, derive_seed(&[seed, d as u64, 0x61]))?;
    let lambda = graph.second_eigenvalue()?;
    let hyper = build_walk_hypergraph(graph, spec.t)?;
    let mask = hyper.materialize()?;
    row.edges = hyper.edge_count();
    row.lambda = lambda;

    let dims = vec![spec.n; spec.t];
    let (truth, dense) = gen_synthetic(&dims, spec.r_truth, derive_seed(&[seed, 0x7e]))?;
    row.maxq_ub_truth = maxqnorm_upper(&truth);

    let obs = sample_observations(
        &truth,
        &mask,
        spec.noise_level,
        derive_seed(&[seed, d as u64, 0x0b]),
    )?;

    let mut cfg = spec.solver.clone();
    cfg.r_fit = r_fit;
    cfg.delta = spec.delta_coeff * (mask.len() as f64).sqrt();
    cfg.seed = derive_seed(&[seed, d as u64, r_fit as u64, 0x50]);
    let (fhat, trace) = coordinate_descent(&obs, &cfg)?;
    row.iters = trace.iters;
    row.converged = trace.converged;
    row.maxq_ub_est = maxqnorm_upper(&fhat);

    match dense {
        Some(ref t) => {
            let (gen, msq) = exact_gen_error(t, &fhat);
            row.gen_error = gen;
            row.truth_msq = msq;
        }
        None => {
            let (gen, msq, se) = estimated_gen_error(
                &truth,
                &fhat,
                &mask,
                spec.holdout_samples,
                derive_seed(&[seed, 0xe5]),
            );
            row.gen_error = gen;
            row.truth_msq = msq;
            row.gen_error_se = Some(se);
        }
    }
    row.thm_rhs = error_bound_rhs(spec.t, row.maxq_ub_truth, lambda, d as f64);
    Ok(())
}

/// Full grid product `ds x r_fits x seeds`. Individual cell failures are
/// recorded in their rows; the run continues.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.ds.len() * spec.r_fits.len() * spec.seeds.len());
    for &d in &spec.ds {
        for &r_fit in &spec.r_fits {
            for &seed in &spec.seeds {
                rows.push(run_cell(spec, d, r_fit, seed));
            }
        }
    }
    Ok(rows)
}

/// Mean and standard error of the generalization error per `(d, r_fit)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub d: usize,
    pub r_fit: usize,
    pub runs: usize,
    pub failures: usize,
    pub mean_gen_error: f64,
    pub stderr: f64,
}

pub fn aggregate(rows: &[ResultRow]) -> Vec<CellSummary> {
    let mut cells: Vec<(usize, usize)> = rows.iter().map(|r| (r.d, r.r_fit)).collect();
    cells.sort_unstable();
    cells.dedup();
    cells
        .into_iter()
        .map(|(d, r_fit)| {
            let vals: Vec<f64> = rows
                .iter()
                .filter(|r| r.d == d && r.r_fit == r_fit && r.error.is_none())
                .map(|r| r.gen_error)
                .collect();
            let failures = rows
                .iter()
                .filter(|r| r.d == d && r.r_fit == r_fit && r.error.is_some())
                .count();
            let k = vals.len();
            let mean = if k > 0 {
                vals.iter().sum::<f64>() / k as f64
            } else {
                f64::NAN
            };
            let stderr = if k > 1 {
                let var =
                    vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k as f64 - 1.0);
                (var / k as f64).sqrt()
            } else {
                0.0
            };
            CellSummary {
                d,
                r_fit,
                runs: k,
                failures,
                mean_gen_error: mean,
                stderr,
            }
        })
        .collect()
}

/// The sample-count factor `r^(2(t-1)(t^2-t-1)) / eps^(2(t-1))` (big-O
/// constant omitted) said to suffice for mean squared error `eps`.
pub fn sample_complexity_factor(t: usize, r: usize, eps: f64) -> Result<f64> {
    if t < 2 || r < 1 {
        return Err(Error::InvalidArgument("need t >= 2 and r >= 1".into()));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let exp_r = (2 * (t - 1) * (t * t - t - 1)) as f64;
    Ok((r as f64).powf(exp_r) / eps.powf(2.0 * (t as f64 - 1.0)))
}

/// Single completion over a quasi-regular chain with the matching
/// spectral bound; the analog of one regular-grid cell.
pub fn run_quasi_cell(
    hyper: &QuasiRegularHypergraph,
    r_truth: usize,
    r_fit: usize,
    delta_coeff: f64,
    noise_level: f64,
    seed: u64,
    solver_template: &SolverConfig,
) -> Result<(ResultRow, SolverTrace)> {
    let started = Instant::now();
    let mask = hyper.materialize()?;
    let dims = hyper.dims();
    let lambdas = hyper.link_lambdas()?;
    let ds = hyper.link_degrees();

    let (truth, dense) = gen_synthetic(&dims, r_truth, derive_seed(&[seed, 0x7e]))?;
    let obs = sample_observations(&truth, &mask, noise_level, derive_seed(&[seed, 0x0b]))?;

    let mut cfg = solver_template.clone();
    cfg.r_fit = r_fit;
    cfg.delta = delta_coeff * (mask.len() as f64).sqrt();
    cfg.seed = derive_seed(&[seed, 0x50]);
    let (fhat, trace) = coordinate_descent(&obs, &cfg)?;

    let maxq_truth = maxqnorm_upper(&truth);
    let (gen_error, truth_msq, se) = match dense {
        Some(ref t) => {
            let (g, m) = exact_gen_error(t, &fhat);
            (g, m, None)
        }
        None => {
            let (g, m, s) =
                estimated_gen_error(&truth, &fhat, &mask, 1_000_000, derive_seed(&[seed, 0xe5]));
            (g, m, Some(s))
        }
    };
    let row = ResultRow {
        n: dims[0],
        t: hyper.order(),
        d: ds[0],
        r_fit,
        seed,
        edges: hyper.edge_count(),
        lambda: lambdas.iter().fold(0.0f64, |a, &b| a.max(b)),
        gen_error,
        maxq_ub_truth: maxq_truth,
        maxq_ub_est: maxqnorm_upper(&fhat),
        thm_rhs: error_bound_rhs_quasi(hyper.order(), maxq_truth, &lambdas, &ds),
        iters: trace.iters,
        converged: trace.converged,
        seconds: started.elapsed().as_secs_f64(),
        truth_msq,
        gen_error_se: se,
        error: None,
    };
    Ok((row, trace))
}

/// Convenience wrapper building the chain hypergraph from link parameters.
pub fn build_chain(
    sizes: &[usize],
    degrees: &[(usize, usize)],
    seed: u64,
) -> Result<QuasiRegularHypergraph> {
    if sizes.len() != degrees.len() + 1 {
        return Err(Error::InvalidArgument(
            "need one more part size than chain links".into(),
        ));
    }
    let mut chain = Vec::with_capacity(degrees.len());
    for (i, &(d1, d2)) in degrees.iter().enumerate() {
        chain.push(crate::graph::random_biregular(
            sizes[i],
            sizes[i + 1],
            d1,
            d2,
            derive_seed(&[seed, i as u64]),
        )?);
    }
    build_quasi_hypergraph(chain)
}
