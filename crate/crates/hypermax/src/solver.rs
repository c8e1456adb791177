//! Relaxed max-quasinorm completion engine: block coordinate descent over
//! CP factors with accelerated proximal-gradient inner solves.
//!
//! The relaxed objective couples a masked least-squares data term with the
//! certified max-quasinorm surrogate `prod_i ||U^(i)||_{2,inf}`. A residual
//! slack variable is eliminated analytically (variable projection), leaving
//! the projected cost
//!
//! ```text
//!   C(U) = 1/2 (kappa (1-mu)^2 + mu^2 beta) ||M * (X - Z)||_F^2
//!          + prod_i ||U^(i)||_{2,inf} + frob_reg * sum_i ||U^(i)||_F^2
//! ```
//!
//! with `mu` a function of the current masked residual norm. The gradient
//! of the data term with the slack held at its minimizer is
//! `(1-mu) kappa * MTTKRP(residual)`, which is what the inner solves use.

use std::time::Instant;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hypergraph::HyperedgeSet;
use crate::maxq::maxqnorm_upper;
use crate::tensor::{two_inf_norm, FactorSet};

/// Hyperparameters for one completion solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// CP rank of the fit.
    pub r_fit: usize,
    /// Weight of the masked data term.
    pub kappa: f64,
    /// Smoothing weight on the residual slack.
    pub beta: f64,
    /// Absolute residual budget `||M * (X - Z)||_F <= delta`
    /// (already scaled by sqrt(|E|)). `0` is the exact-constraint mode.
    pub delta: f64,
    /// Squared-Frobenius stabilizer weight on each factor.
    pub frob_reg: f64,
    pub outer_iters: usize,
    pub inner_iters: usize,
    /// Relative cost-change tolerance for the inner solves.
    pub inner_tol: f64,
    /// Relative cost-change tolerance for the outer loop.
    pub outer_tol: f64,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(r_fit: usize) -> Self {
        Self {
            r_fit,
            kappa: 100.0,
            beta: 1.0,
            delta: 0.0,
            frob_reg: 0.01,
            outer_iters: 250,
            inner_iters: 50,
            inner_tol: 1e-7,
            outer_tol: 1e-6,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        let nonneg = |x: f64| x.is_finite() && x >= 0.0;
        if self.r_fit < 1 {
            return Err(Error::InvalidArgument("r_fit must be >= 1".into()));
        }
        if !positive(self.kappa) {
            return Err(Error::InvalidArgument("kappa must be positive".into()));
        }
        if !positive(self.beta) {
            return Err(Error::InvalidArgument("beta must be positive".into()));
        }
        if !nonneg(self.delta) {
            return Err(Error::InvalidArgument("delta must be nonnegative".into()));
        }
        if !nonneg(self.frob_reg) {
            return Err(Error::InvalidArgument(
                "frob_reg must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::new(1)
    }
}

/// Observed values on a hyperedge mask, aligned with the mask's edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    mask: HyperedgeSet,
    values: Vec<f64>,
}

impl Observations {
    pub fn new(mask: HyperedgeSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != mask.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} mask edges",
                values.len(),
                mask.len()
            )));
        }
        Ok(Self { mask, values })
    }

    pub fn mask(&self) -> &HyperedgeSet {
        &self.mask
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn rms(&self) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
        }
    }
}

/// Variable-projection weight for the eliminated residual slack.
///
/// Returns `1/(1 + beta/kappa)` while the masked residual norm is within
/// `(1 + beta/kappa) * delta`, and `delta / residual_norm` beyond it; the
/// two branches agree at the crossover.
pub fn mu(residual_norm: f64, cfg: &SolverConfig) -> f64 {
    let ratio = 1.0 + cfg.beta / cfg.kappa;
    if residual_norm <= ratio * cfg.delta {
        1.0 / ratio
    } else {
        cfg.delta / residual_norm
    }
}

/// Evaluate the CP model on the mask only (never densifies).
pub fn eval_on_mask(f: &FactorSet, mask: &HyperedgeSet) -> Vec<f64> {
    let t = f.order();
    let r = f.rank();
    let mut out = Vec::with_capacity(mask.len());
    let mut row = vec![0.0f64; r];
    for tuple in mask.iter() {
        row.iter_mut().for_each(|x| *x = 1.0);
        for (i, &j) in tuple.iter().enumerate() {
            let frow = f.factor(i).row(j as usize);
            let frow = frow.as_slice().expect("factor rows are contiguous");
            for (x, &u) in row.iter_mut().zip(frow) {
                *x *= u;
            }
        }
        out.push(row.iter().sum());
    }
    let _ = t;
    out
}

fn check_problem(f: &FactorSet, obs: &Observations) -> Result<()> {
    if f.dims() != obs.mask().dims() {
        return Err(Error::ShapeMismatch(format!(
            "factor dims {:?} vs mask dims {:?}",
            f.dims(),
            obs.mask().dims()
        )));
    }
    Ok(())
}

fn frob_sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

/// Projected total cost: data term at the current `mu`, max-quasinorm
/// surrogate, and the Frobenius stabilizer.
pub fn projected_cost(f: &FactorSet, obs: &Observations, cfg: &SolverConfig) -> Result<f64> {
    Ok(projected_cost_parts(f, obs, cfg)?.cost)
}

/// Cost together with the masked residual norm and `mu` (the trace columns).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParts {
    pub cost: f64,
    pub resid_norm: f64,
    pub mu: f64,
}

pub fn projected_cost_parts(
    f: &FactorSet,
    obs: &Observations,
    cfg: &SolverConfig,
) -> Result<CostParts> {
    check_problem(f, obs)?;
    cfg.validate()?;
    let x = eval_on_mask(f, obs.mask());
    let resid_sq: f64 = x
        .iter()
        .zip(obs.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let resid_norm = resid_sq.sqrt();
    let m = mu(resid_norm, cfg);
    let weight = 0.5 * (cfg.kappa * (1.0 - m) * (1.0 - m) + m * m * cfg.beta);
    let stabilizer: f64 = f.factors().iter().map(frob_sq).sum::<f64>() * cfg.frob_reg;
    Ok(CostParts {
        cost: weight * resid_sq + maxqnorm_upper(f) + stabilizer,
        resid_norm,
        mu: m,
    })
}

/// Gradient of the smooth part with respect to factor `mode`, with the
/// residual slack frozen at its minimizer:
/// `(1 - mu) kappa * MTTKRP(residual) + 2 frob_reg * U^(mode)`.
pub fn factor_gradient(
    f: &FactorSet,
    obs: &Observations,
    cfg: &SolverConfig,
    mode: usize,
) -> Result<Array2<f64>> {
    check_problem(f, obs)?;
    cfg.validate()?;
    let x = eval_on_mask(f, obs.mask());
    let resid: Vec<f64> = x.iter().zip(obs.values()).map(|(a, b)| a - b).collect();
    let resid_norm = resid.iter().map(|v| v * v).sum::<f64>().sqrt();
    let m = mu(resid_norm, cfg);
    let mut grad = crate::tensor::mttkrp(obs.mask().flat(), &resid, f, mode)?;
    let scale = (1.0 - m) * cfg.kappa;
    grad.mapv_inplace(|v| v * scale);
    grad += &(2.0 * cfg.frob_reg * f.factor(mode));
    Ok(grad)
}

/// Projection onto the ball `{ Y : sum_i ||y_i||_2 <= radius }` of the
/// 2,1 norm (the dual of 2,inf). Rows are shrunk toward zero by the unique
/// threshold solving `sum_i max(||x_i|| - lambda, 0) = radius`, found by
/// bisection on `[0, max ||x_i||]`.
pub fn proj_dual_ball(x: &Array2<f64>, radius: f64) -> Array2<f64> {
    assert!(radius > 0.0, "dual ball radius must be positive");
    let norms: Vec<f64> = x
        .rows()
        .into_iter()
        .map(|row| row.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let total: f64 = norms.iter().sum();
    if total <= radius {
        return x.clone();
    }
    let mut lo = 0.0f64;
    let mut hi = norms.iter().fold(0.0f64, |m, &v| m.max(v));
    // omega(lambda) = sum max(n_i - lambda, 0) - radius is nonincreasing
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let omega: f64 = norms.iter().map(|&n| (n - mid).max(0.0)).sum::<f64>() - radius;
        if omega > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let mut out = x.clone();
    for (mut row, &n) in out.rows_mut().into_iter().zip(&norms) {
        if n > lambda {
            let scale = 1.0 - lambda / n;
            row.mapv_inplace(|v| v * scale);
        } else {
            row.fill(0.0);
        }
    }
    out
}

/// Proximal operator of `s * ||.||_{2,inf}` via the Moreau decomposition
/// `prox(X) = X - s * proj_dual(X / s)`, evaluated in the equivalent
/// division-free form `X - proj_{||.||_{2,1} <= s}(X)`.
pub fn prox_two_inf(x: &Array2<f64>, s: f64) -> Array2<f64> {
    assert!(s >= 0.0, "prox scale must be nonnegative");
    if s == 0.0 {
        return x.clone();
    }
    x - &proj_dual_ball(x, s)
}

/// One block of the coordinate descent: minimize the cost over factor
/// `mode` with the others fixed, by FISTA with backtracking and restart.
pub fn apg_solve_factor(
    f: &FactorSet,
    mode: usize,
    obs: &Observations,
    cfg: &SolverConfig,
) -> Result<Array2<f64>> {
    check_problem(f, obs)?;
    cfg.validate()?;
    if mode >= f.order() {
        return Err(Error::InvalidArgument(format!(
            "mode {mode} out of range for order {}",
            f.order()
        )));
    }
    let mut ws = BlockWorkspace::new(obs.len(), f.rank());
    apg_block(f, mode, obs, cfg, &mut ws)
}

struct BlockWorkspace {
    /// Per-edge Hadamard product of the other factors' rows (len m*r).
    p: Vec<f64>,
    /// Row of the active factor per edge.
    mode_idx: Vec<u32>,
}

impl BlockWorkspace {
    fn new(m: usize, r: usize) -> Self {
        Self {
            p: vec![0.0; m * r],
            mode_idx: vec![0; m],
        }
    }
}

/// Smooth block cost `w/2 sum_e (<u_row, p_e> - z_e)^2 + frob ||U||_F^2`
/// with `w` the data weight at the frozen `mu` (constants over the block
/// dropped).
fn block_smooth_cost(u: &Array2<f64>, ws: &BlockWorkspace, z: &[f64], w: f64, frob: f64) -> f64 {
    let r = u.ncols();
    let mut acc = 0.0f64;
    for (e, &row) in ws.mode_idx.iter().enumerate() {
        let p = &ws.p[e * r..(e + 1) * r];
        let urow = u.row(row as usize);
        let urow = urow.as_slice().expect("contiguous");
        let x: f64 = urow.iter().zip(p).map(|(a, b)| a * b).sum();
        let d = x - z[e];
        acc += d * d;
    }
    0.5 * w * acc + frob * frob_sq(u)
}

/// Smooth cost and its gradient in one pass.
fn block_smooth_cost_grad(
    u: &Array2<f64>,
    ws: &BlockWorkspace,
    z: &[f64],
    w: f64,
    frob: f64,
) -> (f64, Array2<f64>) {
    let r = u.ncols();
    let mut grad = Array2::<f64>::zeros((u.nrows(), r));
    let mut acc = 0.0f64;
    for (e, &row) in ws.mode_idx.iter().enumerate() {
        let p = &ws.p[e * r..(e + 1) * r];
        let urow = u.row(row as usize);
        let urow = urow.as_slice().expect("contiguous");
        let x: f64 = urow.iter().zip(p).map(|(a, b)| a * b).sum();
        let d = x - z[e];
        acc += d * d;
        let mut grow = grad.row_mut(row as usize);
        let grow = grow.as_slice_mut().expect("contiguous");
        let scale = w * d;
        for (g, &pv) in grow.iter_mut().zip(p) {
            *g += scale * pv;
        }
    }
    grad += &(2.0 * frob * u);
    (0.5 * w * acc + frob * frob_sq(u), grad)
}

fn apg_block(
    f: &FactorSet,
    mode: usize,
    obs: &Observations,
    cfg: &SolverConfig,
    ws: &mut BlockWorkspace,
) -> Result<Array2<f64>> {
    let r = f.rank();
    let z = obs.values();

    // cache Hadamard rows of the other factors and the mode's row indices
    for (e, tuple) in obs.mask().iter().enumerate() {
        ws.mode_idx[e] = tuple[mode];
        let p = &mut ws.p[e * r..(e + 1) * r];
        p.iter_mut().for_each(|v| *v = 1.0);
        for (i, &j) in tuple.iter().enumerate() {
            if i == mode {
                continue;
            }
            let frow = f.factor(i).row(j as usize);
            let frow = frow.as_slice().expect("contiguous");
            for (x, &u) in p.iter_mut().zip(frow) {
                *x *= u;
            }
        }
    }

    // freeze mu (equivalently the slack scale) at the current iterate,
    // giving the data weight of the projected cost for this block solve
    let u0 = f.factor(mode);
    let mut resid_sq = 0.0f64;
    for (e, &row) in ws.mode_idx.iter().enumerate() {
        let p = &ws.p[e * r..(e + 1) * r];
        let urow = u0.row(row as usize);
        let urow = urow.as_slice().expect("contiguous");
        let x: f64 = urow.iter().zip(p).map(|(a, b)| a * b).sum();
        let d = x - z[e];
        resid_sq += d * d;
    }
    let m_val = mu(resid_sq.sqrt(), cfg);
    let w = cfg.kappa * (1.0 - m_val) * (1.0 - m_val) + m_val * m_val * cfg.beta;

    // scale of the nonsmooth term for this block
    let c: f64 = (0..f.order())
        .filter(|&j| j != mode)
        .map(|j| two_inf_norm(f.factor(j)))
        .product();

    let mut x_cur = u0.clone();
    let mut y = u0.clone();
    let mut theta = 1.0f64;
    let mut inv_step = 1.0f64;
    let mut f_cur = block_smooth_cost(&x_cur, ws, z, w, cfg.frob_reg) + c * two_inf_norm(&x_cur);
    if !f_cur.is_finite() {
        return Err(Error::Solver("non-finite block cost at entry".into()));
    }

    for _ in 0..cfg.inner_iters {
        let (g_y, grad) = block_smooth_cost_grad(&y, ws, z, w, cfg.frob_reg);
        // backtracking: halve the step until the quadratic majorization holds
        let (x_new, g_new) = loop {
            let cand = prox_two_inf(&(&y - &(&grad / inv_step)), c / inv_step);
            let g_cand = block_smooth_cost(&cand, ws, z, w, cfg.frob_reg);
            let diff = &cand - &y;
            let quad = g_y
                + grad
                    .iter()
                    .zip(diff.iter())
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                + 0.5 * inv_step * frob_sq(&diff);
            if g_cand <= quad + 1e-12 * quad.abs().max(1.0) {
                break (cand, g_cand);
            }
            inv_step *= 2.0;
            if inv_step > 1e18 {
                break (y.clone(), g_y);
            }
        };
        let f_new = g_new + c * two_inf_norm(&x_new);
        if !f_new.is_finite() {
            return Err(Error::Solver("non-finite block cost".into()));
        }
        if f_new > f_cur + 1e-12 * f_cur.abs().max(1.0) {
            // momentum overshot: restart from the last accepted iterate
            theta = 1.0;
            y = x_cur.clone();
            continue;
        }
        let drop = f_cur - f_new;
        let theta_new = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta_mom = (theta - 1.0) / theta_new;
        y = &x_new + &((&x_new - &x_cur) * beta_mom);
        theta = theta_new;
        x_cur = x_new;
        f_cur = f_new;
        if drop <= cfg.inner_tol * f_cur.abs().max(1.0) {
            break;
        }
        inv_step *= 0.9;
    }
    Ok(x_cur)
}

/// Rescale each column tuple so all `t` factors carry the geometric mean of
/// their column norms; the per-column product (hence the model) is
/// unchanged. Columns with any zero norm are left untouched.
pub fn rescale_columns(f: &mut FactorSet) {
    let t = f.order();
    let r = f.rank();
    for l in 0..r {
        let norms: Vec<f64> = (0..t)
            .map(|i| {
                f.factor(i)
                    .column(l)
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        if norms.contains(&0.0) {
            continue;
        }
        let gm = norms.iter().map(|n| n.ln()).sum::<f64>() / t as f64;
        let gm = gm.exp();
        for (i, &n) in norms.iter().enumerate() {
            let scale = gm / n;
            f.factor_mut(i).column_mut(l).mapv_inplace(|v| v * scale);
        }
    }
}

/// One row of the per-iteration diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub cost: f64,
    pub resid_norm: f64,
    pub mu: f64,
    pub maxq_ub: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverTrace {
    pub rows: Vec<TraceRow>,
    pub converged: bool,
    pub iters: usize,
}

/// Full coordinate descent: cycle the factor blocks, rescale columns after
/// the first sweep, stop on relative cost change or the iteration cap.
/// Deterministic for a fixed seed.
pub fn coordinate_descent(
    obs: &Observations,
    cfg: &SolverConfig,
) -> Result<(FactorSet, SolverTrace)> {
    cfg.validate()?;
    if obs.is_empty() {
        return Err(Error::InvalidArgument("empty observation mask".into()));
    }
    let dims = obs.mask().dims().to_vec();
    let t = dims.len();
    let r = cfg.r_fit;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let factors: Vec<Array2<f64>> = dims
        .iter()
        .map(|&n| Array2::from_shape_fn((n, r), |_| rng.gen_range(-1.0..1.0)))
        .collect();
    let mut f = FactorSet::new(factors)?;

    // match the initial masked RMS to the observed RMS
    let x0 = eval_on_mask(&f, obs.mask());
    let rms_x = (x0.iter().map(|v| v * v).sum::<f64>() / x0.len() as f64).sqrt();
    let rms_z = obs.rms();
    if rms_x > 0.0 && rms_z > 0.0 {
        let scale = (rms_z / rms_x).powf(1.0 / t as f64);
        for i in 0..t {
            f.factor_mut(i).mapv_inplace(|v| v * scale);
        }
    }

    let start = Instant::now();
    let mut ws = BlockWorkspace::new(obs.len(), r);
    let mut trace = SolverTrace::default();
    let mut prev_cost = f64::INFINITY;
    for outer in 0..cfg.outer_iters {
        for mode in 0..t {
            let updated = apg_block(&f, mode, obs, cfg, &mut ws)?;
            f.set_factor(mode, updated)?;
        }
        if outer == 0 {
            rescale_columns(&mut f);
        }
        let parts = projected_cost_parts(&f, obs, cfg)?;
        if !parts.cost.is_finite() {
            return Err(Error::Solver(format!(
                "non-finite cost at outer iteration {}",
                outer + 1
            )));
        }
        trace.rows.push(TraceRow {
            iter: outer + 1,
            cost: parts.cost,
            resid_norm: parts.resid_norm,
            mu: parts.mu,
            maxq_ub: maxqnorm_upper(&f),
            seconds: start.elapsed().as_secs_f64(),
        });
        trace.iters = outer + 1;
        if prev_cost.is_finite()
            && (prev_cost - parts.cost).abs() <= cfg.outer_tol * prev_cost.abs().max(1.0)
        {
            trace.converged = true;
            break;
        }
        prev_cost = parts.cost;
    }
    Ok((f, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::HyperedgeSet;
    use crate::tensor::for_each_index;
    use approx::assert_relative_eq;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn full_mask(dims: &[usize]) -> HyperedgeSet {
        let mut flat = Vec::new();
        for_each_index(dims, |idx| flat.extend(idx.iter().map(|&j| j as u32)));
        HyperedgeSet::new(dims.to_vec(), flat).unwrap()
    }

    fn random_obs(dims: &[usize], keep: f64, rng: &mut ChaCha8Rng) -> HyperedgeSet {
        let mut flat = Vec::new();
        let mut count = 0usize;
        for_each_index(dims, |idx| {
            if rng.gen::<f64>() < keep || count == 0 {
                flat.extend(idx.iter().map(|&j| j as u32));
                count += 1;
            }
        });
        HyperedgeSet::new(dims.to_vec(), flat).unwrap()
    }

    fn random_factors(rng: &mut ChaCha8Rng, dims: &[usize], r: usize) -> FactorSet {
        let factors = dims
            .iter()
            .map(|&n| Array2::from_shape_fn((n, r), |_| rng.gen_range(-1.0..1.0)))
            .collect();
        FactorSet::new(factors).unwrap()
    }

    #[test]
    fn mu_branches_and_continuity() {
        let mut cfg = SolverConfig::new(2);
        cfg.delta = 1.0;
        assert_relative_eq!(mu(0.5, &cfg), 100.0 / 101.0, max_relative = 1e-12);
        assert_relative_eq!(mu(10.0, &cfg), 0.1, max_relative = 1e-12);
        let boundary = (1.0 + cfg.beta / cfg.kappa) * cfg.delta;
        assert_relative_eq!(mu(boundary, &cfg), 1.0 / (1.0 + 0.01), max_relative = 1e-12);
        assert_relative_eq!(
            mu(boundary * (1.0 + 1e-12), &cfg),
            mu(boundary, &cfg),
            max_relative = 1e-9
        );
        // delta = 0: first branch only at exactly zero residual
        cfg.delta = 0.0;
        assert_relative_eq!(mu(0.0, &cfg), 100.0 / 101.0, max_relative = 1e-12);
        assert_eq!(mu(3.0, &cfg), 0.0);
    }

    #[test]
    fn projected_cost_exact_fit_is_penalty_plus_stabilizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dims = [3, 3, 3];
        let f = random_factors(&mut rng, &dims, 2);
        let mask = full_mask(&dims);
        let z = eval_on_mask(&f, &mask);
        let obs = Observations::new(mask, z).unwrap();
        let mut cfg = SolverConfig::new(2);
        cfg.delta = 0.5;
        let cost = projected_cost(&f, &obs, &cfg).unwrap();
        let expect = maxqnorm_upper(&f)
            + cfg.frob_reg
                * f.factors()
                    .iter()
                    .map(|u| u.iter().map(|v| v * v).sum::<f64>())
                    .sum::<f64>();
        assert_relative_eq!(cost, expect, max_relative = 1e-12);
    }

    #[test]
    fn projected_cost_zero_factors() {
        let dims = [2, 2];
        let mask = full_mask(&dims);
        let z = vec![1.0, 2.0, 3.0, 4.0];
        let obs = Observations::new(mask, z.clone()).unwrap();
        let f = FactorSet::new(vec![Array2::zeros((2, 2)), Array2::zeros((2, 2))]).unwrap();
        let mut cfg = SolverConfig::new(2);
        cfg.delta = 0.1;
        let znorm_sq: f64 = z.iter().map(|v| v * v).sum();
        let m = mu(znorm_sq.sqrt(), &cfg);
        let expect = 0.5 * (cfg.kappa * (1.0 - m) * (1.0 - m) + m * m * cfg.beta) * znorm_sq;
        assert_relative_eq!(
            projected_cost(&f, &obs, &cfg).unwrap(),
            expect,
            max_relative = 1e-12
        );
    }

    #[test]
    fn projected_cost_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dims = [3, 4, 2];
        let f = random_factors(&mut rng, &dims, 2);
        let mask = random_obs(&dims, 0.6, &mut rng);
        let z: Vec<f64> = (0..mask.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let obs = Observations::new(mask.clone(), z.clone()).unwrap();
        let mut cfg = SolverConfig::new(2);
        cfg.delta = 0.7;

        // dense oracle: materialize the tensor, subtract on the mask
        let dense = f.evaluate().unwrap();
        let mut resid_sq = 0.0;
        for (tuple, zv) in mask.iter().zip(&z) {
            let idx: Vec<usize> = tuple.iter().map(|&v| v as usize).collect();
            let d = dense.get(&idx) - zv;
            resid_sq += d * d;
        }
        let m = mu(resid_sq.sqrt(), &cfg);
        let weight = 0.5 * (cfg.kappa * (1.0 - m) * (1.0 - m) + m * m * cfg.beta);
        let stab: f64 = f
            .factors()
            .iter()
            .map(|u| u.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            * cfg.frob_reg;
        let expect = weight * resid_sq + maxqnorm_upper(&f) + stab;
        assert_relative_eq!(
            projected_cost(&f, &obs, &cfg).unwrap(),
            expect,
            max_relative = 1e-10
        );
    }

    #[test]
    fn cost_through_explicit_slack_agrees() {
        // evaluating the two-variable objective at the eliminated slack
        // reproduces the projected cost's data term
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dims = [3, 3];
        let f = random_factors(&mut rng, &dims, 2);
        let mask = full_mask(&dims);
        let z: Vec<f64> = (0..mask.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let obs = Observations::new(mask.clone(), z.clone()).unwrap();
        let mut cfg = SolverConfig::new(2);
        cfg.delta = 0.3;

        let x = eval_on_mask(&f, &mask);
        let resid: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a - b).collect();
        let rnorm = resid.iter().map(|v| v * v).sum::<f64>().sqrt();
        let m = mu(rnorm, &cfg);
        let slack: Vec<f64> = resid.iter().map(|v| m * v).collect();
        // kappa/2 ||X - Z - R||^2 + beta/2 ||R||^2
        let fit: f64 = resid
            .iter()
            .zip(&slack)
            .map(|(d, s)| cfg.kappa / 2.0 * (d - s) * (d - s) + cfg.beta / 2.0 * s * s)
            .sum();
        let weight = 0.5 * (cfg.kappa * (1.0 - m) * (1.0 - m) + m * m * cfg.beta);
        assert_relative_eq!(fit, weight * rnorm * rnorm, max_relative = 1e-10);
        // slack is always feasible for the budget
        let slack_norm = slack.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(slack_norm <= cfg.delta + 1e-12);
        // and the full projected cost is the explicit two-variable value
        // plus penalty and stabilizer
        let stab: f64 = f
            .factors()
            .iter()
            .map(|u| u.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            * cfg.frob_reg;
        assert_relative_eq!(
            projected_cost(&f, &obs, &cfg).unwrap(),
            fit + maxqnorm_upper(&f) + stab,
            max_relative = 1e-10
        );
    }

    #[test]
    fn gradient_zero_residual_is_pure_stabilizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dims = [3, 3, 2];
        let f = random_factors(&mut rng, &dims, 2);
        let mask = full_mask(&dims);
        let z = eval_on_mask(&f, &mask);
        let obs = Observations::new(mask, z).unwrap();
        let mut cfg = SolverConfig::new(2);
        cfg.delta = 1.0;
        for mode in 0..3 {
            let g = factor_gradient(&f, &obs, &cfg, mode).unwrap();
            let expect = 2.0 * cfg.frob_reg * f.factor(mode);
            for (a, b) in g.iter().zip(expect.iter()) {
                assert_relative_eq!(a, b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn gradient_single_entry_rank_one_update() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dims = [3, 3];
        let f = random_factors(&mut rng, &dims, 2);
        let mask = HyperedgeSet::new(vec![3, 3], vec![1, 2]).unwrap();
        let z = vec![0.0];
        let obs = Observations::new(mask, z).unwrap();
        let mut cfg = SolverConfig::new(2);
        cfg.delta = 0.0;
        cfg.frob_reg = 0.0;
        let x = f.entry(&[1, 2]);
        let g = factor_gradient(&f, &obs, &cfg, 0).unwrap();
        // only row 1 is touched: kappa * resid * other-factor row
        for l in 0..2 {
            let expect = cfg.kappa * x * f.factor(1)[(2, l)];
            assert_relative_eq!(g[(1, l)], expect, max_relative = 1e-12);
        }
        assert_eq!(g[(0, 0)], 0.0);
        assert_eq!(g[(2, 0)], 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for trial in 0..10 {
            let dims = [4, 3, 3];
            let f = random_factors(&mut rng, &dims, 2);
            let mask = random_obs(&dims, 0.7, &mut rng);
            let z: Vec<f64> = (0..mask.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let obs = Observations::new(mask.clone(), z.clone()).unwrap();
            let mut cfg = SolverConfig::new(2);
            // put mu solidly inside the shrinking branch
            let x = eval_on_mask(&f, &mask);
            let rnorm = x
                .iter()
                .zip(&z)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            cfg.delta = 0.4 * rnorm;
            let m = mu(rnorm, &cfg);
            let rbar: Vec<f64> = x.iter().zip(&z).map(|(a, b)| m * (a - b)).collect();

            let mode = trial % 3;
            let grad = factor_gradient(&f, &obs, &cfg, mode).unwrap();

            // frozen-slack cost as a function of the mode factor
            let cost_at = |u: &Array2<f64>| -> f64 {
                let mut g = f.clone();
                g.set_factor(mode, u.clone()).unwrap();
                let xs = eval_on_mask(&g, &mask);
                let fit: f64 = xs
                    .iter()
                    .zip(&z)
                    .zip(&rbar)
                    .map(|((xv, zv), rb)| {
                        let d = xv - zv - rb;
                        cfg.kappa / 2.0 * d * d
                    })
                    .sum();
                fit + cfg.frob_reg * frob_sq(u)
            };
            let h = 1e-6;
            let u = f.factor(mode);
            let mut max_rel: f64 = 0.0;
            for i in 0..u.nrows() {
                for j in 0..u.ncols() {
                    let mut up = u.clone();
                    let mut dn = u.clone();
                    up[(i, j)] += h;
                    dn[(i, j)] -= h;
                    let fd = (cost_at(&up) - cost_at(&dn)) / (2.0 * h);
                    let denom = fd.abs().max(grad[(i, j)].abs()).max(1e-8);
                    max_rel = max_rel.max((fd - grad[(i, j)]).abs() / denom);
                }
            }
            assert!(max_rel < 1e-5, "trial {trial}: fd mismatch {max_rel}");
        }
    }

    #[test]
    fn prox_fixed_points_and_examples() {
        let zero = Array2::<f64>::zeros((3, 2));
        assert_eq!(prox_two_inf(&zero, 1.0), zero);
        let x = array![[3.0, 4.0]];
        let p = prox_two_inf(&x, 1.0);
        assert_relative_eq!(p[(0, 0)], 2.4, max_relative = 1e-9);
        assert_relative_eq!(p[(0, 1)], 3.2, max_relative = 1e-9);

        let x2 = array![[3.0, 4.0], [0.5, 0.0]];
        let p2 = prox_two_inf(&x2, 1.0);
        assert_relative_eq!(p2[(0, 0)], 2.4, max_relative = 1e-9);
        assert_relative_eq!(p2[(0, 1)], 3.2, max_relative = 1e-9);
        assert_relative_eq!(p2[(1, 0)], 0.5, max_relative = 1e-9);
        assert_relative_eq!(p2[(1, 1)], 0.0, epsilon = 1e-12);

        // s = 0 is the identity
        assert_eq!(prox_two_inf(&x2, 0.0), x2);

        // denormal-tiny scales stay finite and close to the identity
        let p3 = prox_two_inf(&x2, 1e-300);
        assert!(p3.iter().all(|v| v.is_finite()));
        assert_relative_eq!(p3[(0, 0)], 3.0, max_relative = 1e-9);
    }

    #[test]
    fn prox_moreau_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = Array2::from_shape_fn((5, 3), |_| rng.gen_range(-2.0..2.0));
            let s = rng.gen_range(0.01..3.0);
            let p = prox_two_inf(&x, s);
            let d = proj_dual_ball(&x.mapv(|v| v / s), 1.0) * s;
            for ((a, b), c) in p.iter().zip(d.iter()).zip(x.iter()) {
                assert_relative_eq!(a + b, *c, epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn prox_first_order_optimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let obj = |y: &Array2<f64>, x: &Array2<f64>, s: f64| {
            0.5 * frob_sq(&(y - x)) + s * two_inf_norm(y)
        };
        for _ in 0..500 {
            let rows = rng.gen_range(1..6);
            let cols = rng.gen_range(1..5);
            let x = Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-2.0..2.0));
            let s = rng.gen_range(0.0..2.0);
            let y = prox_two_inf(&x, s);
            let base = obj(&y, &x, s);
            for _ in 0..20 {
                let dir = Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-1.0..1.0));
                let perturbed = &y + &(dir * 1e-4);
                assert!(obj(&perturbed, &x, s) >= base - 1e-10);
            }
        }
    }

    #[test]
    fn dual_gap_function_monotone_with_root_in_bracket() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let norms: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..3.0)).collect();
            let radius = 1.0;
            let total: f64 = norms.iter().sum();
            let omega = |l: f64| norms.iter().map(|&n| (n - l).max(0.0)).sum::<f64>() - radius;
            let hi = norms.iter().fold(0.0f64, |m, &v| m.max(v));
            let mut prev = omega(0.0);
            let steps = 64;
            for k in 1..=steps {
                let cur = omega(hi * k as f64 / steps as f64);
                assert!(cur <= prev + 1e-12);
                prev = cur;
            }
            if total > radius {
                assert!(omega(0.0) > 0.0 && omega(hi) <= 0.0);
            }
        }
    }

    #[test]
    fn apg_fixed_point_when_gradient_and_scale_vanish() {
        let dims = [3, 3];
        let mask = full_mask(&dims);
        let z = vec![0.5; 9];
        let obs = Observations::new(mask, z).unwrap();
        let mut cfg = SolverConfig::new(2);
        cfg.frob_reg = 0.0;
        cfg.delta = 0.0;
        // all-zero factors: other-factor rows vanish so the data gradient is
        // zero, and the prox scale is zero too
        let f = FactorSet::new(vec![Array2::zeros((3, 2)), Array2::zeros((3, 2))]).unwrap();
        let u = apg_solve_factor(&f, 0, &obs, &cfg).unwrap();
        assert_eq!(u, Array2::<f64>::zeros((3, 2)));
    }

    #[test]
    fn apg_never_increases_block_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for trial in 0..10 {
            let dims = [4, 3, 3];
            let f = random_factors(&mut rng, &dims, 3);
            let mask = random_obs(&dims, 0.5, &mut rng);
            let z: Vec<f64> = (0..mask.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let obs = Observations::new(mask, z).unwrap();
            let mut cfg = SolverConfig::new(3);
            cfg.delta = 0.2;
            let mode = trial % 3;

            // block objective with mu frozen at entry
            let x = eval_on_mask(&f, obs.mask());
            let rnorm = x
                .iter()
                .zip(obs.values())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let m = mu(rnorm, &cfg);
            let w = cfg.kappa * (1.0 - m) * (1.0 - m) + m * m * cfg.beta;
            let c: f64 = (0..3)
                .filter(|&j| j != mode)
                .map(|j| two_inf_norm(f.factor(j)))
                .product();
            let block_obj = |u: &Array2<f64>| {
                let mut g = f.clone();
                g.set_factor(mode, u.clone()).unwrap();
                let xs = eval_on_mask(&g, obs.mask());
                let fit: f64 = xs
                    .iter()
                    .zip(obs.values())
                    .map(|(xv, zv)| {
                        let d = xv - zv;
                        w / 2.0 * d * d
                    })
                    .sum();
                fit + cfg.frob_reg * frob_sq(u) + c * two_inf_norm(u)
            };
            let before = block_obj(f.factor(mode));
            let updated = apg_solve_factor(&f, mode, &obs, &cfg).unwrap();
            let after = block_obj(&updated);
            assert!(
                after <= before + 1e-9 * before.abs().max(1.0),
                "trial {trial}: {before} -> {after}"
            );
        }
    }

    #[test]
    fn rescale_preserves_model_and_equalizes_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut f = random_factors(&mut rng, &[4, 3, 5], 2);
        let before = f.evaluate().unwrap();
        rescale_columns(&mut f);
        let after = f.evaluate().unwrap();
        for (a, b) in before.values().iter().zip(after.values()) {
            assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-12);
        }
        for l in 0..2 {
            let norms: Vec<f64> = (0..3)
                .map(|i| {
                    f.factor(i)
                        .column(l)
                        .iter()
                        .map(|v| v * v)
                        .sum::<f64>()
                        .sqrt()
                })
                .collect();
            for pair in norms.windows(2) {
                assert_relative_eq!(pair[0], pair[1], max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn huge_delta_keeps_mu_on_first_branch_and_cost_decreases() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let dims = [4, 4, 4];
        let truth = random_factors(&mut rng, &dims, 2);
        let mask = full_mask(&dims);
        let z = eval_on_mask(&truth, &mask);
        let znorm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let obs = Observations::new(mask, z).unwrap();
        let mut cfg = SolverConfig::new(2);
        cfg.delta = 2.0 * znorm;
        cfg.outer_iters = 30;
        cfg.seed = 3;
        let (f, trace) = coordinate_descent(&obs, &cfg).unwrap();
        let ratio = 1.0 + cfg.beta / cfg.kappa;
        for row in &trace.rows {
            assert_relative_eq!(row.mu, 1.0 / ratio, max_relative = 1e-12);
        }
        // monotone after the first-iteration rescale
        for pair in trace.rows[1..].windows(2) {
            assert!(pair[1].cost <= pair[0].cost + 1e-9 * pair[0].cost.abs().max(1.0));
        }
        // with a huge budget the penalty dominates and factors shrink
        let final_norm: f64 = f.factors().iter().map(frob_sq).sum();
        let initial_norm: f64 = truth.factors().iter().map(frob_sq).sum();
        assert!(final_norm < initial_norm);
    }

    #[test]
    fn recovers_rank_one_tensor_from_full_mask() {
        let dims = [5, 5, 5];
        let (truth, _) = crate::experiment::gen_synthetic(&dims, 1, 13).unwrap();
        let mask = full_mask(&dims);
        let z = eval_on_mask(&truth, &mask);
        let obs = Observations::new(mask, z.clone()).unwrap();
        let mut cfg = SolverConfig::new(2);
        cfg.delta = 0.0;
        cfg.kappa = 1000.0;
        cfg.outer_iters = 300;
        cfg.outer_tol = 1e-9;
        cfg.seed = 5;
        let (f, _) = coordinate_descent(&obs, &cfg).unwrap();
        let xhat = eval_on_mask(&f, obs.mask());
        let err: f64 = xhat
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            / z.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err < 1e-3, "relative error {err}");
    }

    #[test]
    fn recovers_rank_one_matrix_exactly() {
        // micro matrix-completion sanity check with the data term cranked up
        let dims = [4, 4];
        let (truth, _) = crate::experiment::gen_synthetic(&dims, 1, 14).unwrap();
        let mask = full_mask(&dims);
        let z = eval_on_mask(&truth, &mask);
        let obs = Observations::new(mask, z.clone()).unwrap();
        let mut cfg = SolverConfig::new(1);
        cfg.delta = 0.0;
        cfg.kappa = 1e4;
        cfg.frob_reg = 1e-4;
        cfg.outer_iters = 400;
        cfg.outer_tol = 1e-10;
        cfg.seed = 7;
        let (f, _) = coordinate_descent(&obs, &cfg).unwrap();
        let xhat = eval_on_mask(&f, obs.mask());
        let err: f64 = xhat
            .iter()
            .zip(&z)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            / z.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn solver_is_deterministic_per_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let dims = [4, 4];
        let truth = random_factors(&mut rng, &dims, 2);
        let mask = random_obs(&dims, 0.8, &mut rng);
        let z = eval_on_mask(&truth, &mask);
        let obs = Observations::new(mask, z).unwrap();
        let mut cfg = SolverConfig::new(2);
        cfg.outer_iters = 10;
        cfg.delta = 0.1;
        let (f1, t1) = coordinate_descent(&obs, &cfg).unwrap();
        let (f2, t2) = coordinate_descent(&obs, &cfg).unwrap();
        assert_eq!(f1, f2);
        assert_eq!(t1.rows.len(), t2.rows.len());
        for (a, b) in t1.rows.iter().zip(&t2.rows) {
            assert_eq!(a.cost, b.cost);
        }
    }

    #[test]
    fn empty_mask_rejected() {
        let cfg = SolverConfig::new(1);
        let mask = HyperedgeSet::new(vec![2, 2], vec![]).unwrap();
        let obs = Observations::new(mask, vec![]).unwrap();
        assert!(coordinate_descent(&obs, &cfg).is_err());
    }
}
