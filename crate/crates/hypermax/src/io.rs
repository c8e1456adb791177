//! Text file formats: tensors, factor sets, graph edge lists, hyperedge
//! sets, observations, solver configs, experiment specs, and the CSV
//! outputs. All indices in files are 0-based; tensor values are written in
//! storage order (last index fastest) using Rust's round-trip float
//! formatting.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::experiment::{ExperimentSpec, ResultRow};
use crate::graph::{BipartiteGraph, RegularGraph};
use crate::hypergraph::HyperedgeSet;
use crate::solver::{Observations, SolverConfig, SolverTrace};
use crate::tensor::{DenseTensor, FactorSet};

fn parse<T: std::str::FromStr>(token: &str, what: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what}: {token:?}")))
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Tensor format: line 1 = order t; line 2 = dims; then one value per line
/// in storage order.
pub fn write_tensor(path: &Path, t: &DenseTensor) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{}", t.order()).unwrap();
    let dims: Vec<String> = t.dims().iter().map(|d| d.to_string()).collect();
    writeln!(out, "{}", dims.join(" ")).unwrap();
    for v in t.values() {
        writeln!(out, "{v}").unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_tensor(path: &Path) -> Result<DenseTensor> {
    let text = fs::read_to_string(path)?;
    let mut lines = content_lines(&text);
    let t: usize = parse(
        lines
            .next()
            .ok_or_else(|| Error::Parse("empty tensor file".into()))?,
        "order",
    )?;
    let dims_line = lines
        .next()
        .ok_or_else(|| Error::Parse("missing dims line".into()))?;
    let dims: Vec<usize> = dims_line
        .split_whitespace()
        .map(|s| parse(s, "dimension"))
        .collect::<Result<_>>()?;
    if dims.len() != t {
        return Err(Error::Parse(format!(
            "expected {t} dims, got {}",
            dims.len()
        )));
    }
    let values: Vec<f64> = lines.map(|l| parse(l, "value")).collect::<Result<_>>()?;
    DenseTensor::new(dims, values)
}

/// Factor format: line 1 = "t r"; then t blocks, each a line "n_i" followed
/// by n_i rows of r space-separated values.
pub fn write_factors(path: &Path, f: &FactorSet) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{} {}", f.order(), f.rank()).unwrap();
    for u in f.factors() {
        writeln!(out, "{}", u.nrows()).unwrap();
        for row in u.rows() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{}", cells.join(" ")).unwrap();
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_factors(path: &Path) -> Result<FactorSet> {
    let text = fs::read_to_string(path)?;
    let mut lines = content_lines(&text);
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty factor file".into()))?;
    let mut it = header.split_whitespace();
    let t: usize = parse(
        it.next().ok_or_else(|| Error::Parse("missing t".into()))?,
        "t",
    )?;
    let r: usize = parse(
        it.next().ok_or_else(|| Error::Parse("missing r".into()))?,
        "r",
    )?;
    let mut factors = Vec::with_capacity(t);
    for i in 0..t {
        let n: usize = parse(
            lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing size of factor {i}")))?,
            "factor rows",
        )?;
        let mut mat = Array2::<f64>::zeros((n, r));
        for row in 0..n {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing row {row} of factor {i}")))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|s| parse(s, "factor value"))
                .collect::<Result<_>>()?;
            if vals.len() != r {
                return Err(Error::Parse(format!(
                    "factor {i} row {row} has {} values, expected {r}",
                    vals.len()
                )));
            }
            for (c, v) in vals.into_iter().enumerate() {
                mat[(row, c)] = v;
            }
        }
        factors.push(mat);
    }
    FactorSet::new(factors)
}

/// Regular graph edge list: header "n d", then one "u v" edge per line.
pub fn write_regular_graph(path: &Path, g: &RegularGraph) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{} {}", g.n(), g.degree()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_regular_graph(path: &Path) -> Result<RegularGraph> {
    let text = fs::read_to_string(path)?;
    let mut lines = content_lines(&text);
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty graph file".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(Error::Parse(format!(
            "expected regular-graph header \"n d\", got {header:?}"
        )));
    }
    let n: usize = parse(head[0], "n")?;
    let d: usize = parse(head[1], "d")?;
    let mut edges = Vec::new();
    for line in lines {
        let mut it = line.split_whitespace();
        let u: u32 = parse(
            it.next()
                .ok_or_else(|| Error::Parse("missing edge endpoint".into()))?,
            "u",
        )?;
        let v: u32 = parse(
            it.next()
                .ok_or_else(|| Error::Parse("missing edge endpoint".into()))?,
            "v",
        )?;
        edges.push((u, v));
    }
    let g = RegularGraph::from_edges(n, &edges)?;
    if g.degree() != d {
        return Err(Error::Parse(format!(
            "header claims degree {d}, edges give {}",
            g.degree()
        )));
    }
    Ok(g)
}

/// Bipartite graph edge list: header "n1 n2 d1 d2", then "u v" per line with
/// u a left index and v a right index (both 0-based within their side).
pub fn write_bipartite_graph(path: &Path, g: &BipartiteGraph) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{} {} {} {}", g.n1(), g.n2(), g.d1(), g.d2()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_bipartite_graph(path: &Path) -> Result<BipartiteGraph> {
    let text = fs::read_to_string(path)?;
    let mut lines = content_lines(&text);
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty graph file".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 4 {
        return Err(Error::Parse(format!(
            "expected bipartite header \"n1 n2 d1 d2\", got {header:?}"
        )));
    }
    let n1: usize = parse(head[0], "n1")?;
    let n2: usize = parse(head[1], "n2")?;
    let d1: usize = parse(head[2], "d1")?;
    let d2: usize = parse(head[3], "d2")?;
    let mut adj_left = vec![Vec::new(); n1];
    for line in lines {
        let mut it = line.split_whitespace();
        let u: usize = parse(
            it.next()
                .ok_or_else(|| Error::Parse("missing edge endpoint".into()))?,
            "u",
        )?;
        let v: u32 = parse(
            it.next()
                .ok_or_else(|| Error::Parse("missing edge endpoint".into()))?,
            "v",
        )?;
        if u >= n1 {
            return Err(Error::Parse(format!("left index {u} out of range")));
        }
        adj_left[u].push(v);
    }
    let g = BipartiteGraph::from_left_adjacency(n2, adj_left)?;
    if g.d1() != d1 || g.d2() != d2 {
        return Err(Error::Parse(format!(
            "header claims degrees ({d1},{d2}), edges give ({},{})",
            g.d1(),
            g.d2()
        )));
    }
    Ok(g)
}

/// Hyperedge format: header "t n_1 ... n_t |E|", then one edge per line as
/// t 0-based indices.
pub fn write_hyperedges(path: &Path, h: &HyperedgeSet) -> Result<()> {
    let mut out = String::new();
    let dims: Vec<String> = h.dims().iter().map(|d| d.to_string()).collect();
    writeln!(out, "{} {} {}", h.arity(), dims.join(" "), h.len()).unwrap();
    for edge in h.iter() {
        let cells: Vec<String> = edge.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", cells.join(" ")).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_hyperedges(path: &Path) -> Result<HyperedgeSet> {
    let text = fs::read_to_string(path)?;
    let mut lines = content_lines(&text);
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty hyperedge file".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() < 3 {
        return Err(Error::Parse("hyperedge header too short".into()));
    }
    let t: usize = parse(head[0], "t")?;
    if head.len() != t + 2 {
        return Err(Error::Parse(format!(
            "hyperedge header should list {t} dims plus a count"
        )));
    }
    let dims: Vec<usize> = head[1..=t]
        .iter()
        .map(|s| parse(s, "dim"))
        .collect::<Result<_>>()?;
    let count: usize = parse(head[t + 1], "edge count")?;
    let mut flat = Vec::with_capacity(count * t);
    for line in lines {
        let vals: Vec<u32> = line
            .split_whitespace()
            .map(|s| parse(s, "index"))
            .collect::<Result<_>>()?;
        if vals.len() != t {
            return Err(Error::Parse(format!(
                "edge line has {} indices, expected {t}",
                vals.len()
            )));
        }
        flat.extend(vals);
    }
    if flat.len() != count * t {
        return Err(Error::Parse(format!(
            "header claims {count} edges, file has {}",
            flat.len() / t
        )));
    }
    HyperedgeSet::new(dims, flat)
}

/// Observations: hyperedge header, then "i_1 ... i_t value" per line.
pub fn write_observations(path: &Path, obs: &Observations) -> Result<()> {
    let mut out = String::new();
    let mask = obs.mask();
    let dims: Vec<String> = mask.dims().iter().map(|d| d.to_string()).collect();
    writeln!(out, "{} {} {}", mask.arity(), dims.join(" "), mask.len()).unwrap();
    for (edge, v) in mask.iter().zip(obs.values()) {
        let cells: Vec<String> = edge.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{} {v}", cells.join(" ")).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_observations(path: &Path) -> Result<Observations> {
    let text = fs::read_to_string(path)?;
    let mut lines = content_lines(&text);
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty observations file".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() < 3 {
        return Err(Error::Parse("observations header too short".into()));
    }
    let t: usize = parse(head[0], "t")?;
    if head.len() != t + 2 {
        return Err(Error::Parse(format!(
            "observations header should list {t} dims plus a count"
        )));
    }
    let dims: Vec<usize> = head[1..=t]
        .iter()
        .map(|s| parse(s, "dim"))
        .collect::<Result<_>>()?;
    let mut flat = Vec::new();
    let mut values = Vec::new();
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != t + 1 {
            return Err(Error::Parse(format!(
                "observation line has {} fields, expected {}",
                toks.len(),
                t + 1
            )));
        }
        for tok in &toks[..t] {
            flat.push(parse::<u32>(tok, "index")?);
        }
        values.push(parse::<f64>(toks[t], "value")?);
    }
    let mask = HyperedgeSet::new(dims, flat)?;
    Observations::new(mask, values)
}

/// Solver config: "key = value" per line, `#` comments allowed,
/// unknown keys rejected. Missing keys keep their defaults.
pub fn parse_solver_config(text: &str, base: SolverConfig) -> Result<SolverConfig> {
    let mut cfg = base;
    for line in content_lines(text) {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key = value, got {line:?}")))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "r_fit" => cfg.r_fit = parse(value, "r_fit")?,
            "kappa" => cfg.kappa = parse(value, "kappa")?,
            "beta" => cfg.beta = parse(value, "beta")?,
            "delta" => cfg.delta = parse(value, "delta")?,
            "frob_reg" => cfg.frob_reg = parse(value, "frob_reg")?,
            "outer_iters" => cfg.outer_iters = parse(value, "outer_iters")?,
            "inner_iters" => cfg.inner_iters = parse(value, "inner_iters")?,
            "inner_tol" => cfg.inner_tol = parse(value, "inner_tol")?,
            "outer_tol" => cfg.outer_tol = parse(value, "outer_tol")?,
            "seed" => cfg.seed = parse(value, "seed")?,
            other => return Err(Error::Parse(format!("unknown solver config key {other:?}"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_solver_config(path: &Path) -> Result<SolverConfig> {
    let text = fs::read_to_string(path)?;
    parse_solver_config(&text, SolverConfig::new(1))
}

fn parse_usize_list(value: &str, what: &str) -> Result<Vec<usize>> {
    value.split(',').map(|s| parse(s.trim(), what)).collect()
}

/// Experiment spec: "key = value" per line; lists are comma separated.
/// Keys: n, t, r_truth, d, r_fit, seeds, delta_coeff, noise_level,
/// holdout_samples, plus any solver config key.
pub fn parse_experiment_spec(text: &str) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::new(1, 2, 1);
    let mut solver_lines = String::new();
    for line in content_lines(text) {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key = value, got {line:?}")))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "n" => spec.n = parse(value, "n")?,
            "t" => spec.t = parse(value, "t")?,
            "r_truth" => spec.r_truth = parse(value, "r_truth")?,
            "d" => spec.ds = parse_usize_list(value, "d")?,
            "r_fit" => spec.r_fits = parse_usize_list(value, "r_fit")?,
            "seeds" => {
                spec.seeds = value
                    .split(',')
                    .map(|s| parse(s.trim(), "seed"))
                    .collect::<Result<_>>()?
            }
            "delta_coeff" => spec.delta_coeff = parse(value, "delta_coeff")?,
            "noise_level" => spec.noise_level = parse(value, "noise_level")?,
            "holdout_samples" => spec.holdout_samples = parse(value, "holdout_samples")?,
            "kappa" | "beta" | "frob_reg" | "outer_iters" | "inner_iters" | "inner_tol"
            | "outer_tol" => {
                solver_lines.push_str(line);
                solver_lines.push('\n');
            }
            other => return Err(Error::Parse(format!("unknown experiment key {other:?}"))),
        }
    }
    spec.solver = parse_solver_config(&solver_lines, spec.solver.clone())?;
    spec.validate()?;
    Ok(spec)
}

pub fn read_experiment_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = fs::read_to_string(path)?;
    parse_experiment_spec(&text)
}

/// Trace CSV with columns iter,cost,resid_norm,mu,maxq_ub,seconds.
pub fn trace_csv(trace: &SolverTrace) -> String {
    let mut out = String::from("iter,cost,resid_norm,mu,maxq_ub,seconds\n");
    for row in &trace.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.iter, row.cost, row.resid_norm, row.mu, row.maxq_ub, row.seconds
        )
        .unwrap();
    }
    out
}

pub fn write_trace_csv(path: &Path, trace: &SolverTrace) -> Result<()> {
    fs::write(path, trace_csv(trace))?;
    Ok(())
}

pub const RESULTS_HEADER: &str =
    "n,t,d,r_fit,seed,edges,lambda,gen_error,maxq_ub_truth,maxq_ub_est,thm_rhs,iters,converged,seconds,error";

/// Results CSV; one row per grid cell, failures carried in the last column.
pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.t,
            r.d,
            r.r_fit,
            r.seed,
            r.edges,
            r.lambda,
            r.gen_error,
            r.maxq_ub_truth,
            r.maxq_ub_est,
            r.thm_rhs,
            r.iters,
            r.converged,
            r.seconds,
            r.error.as_deref().unwrap_or("")
        )
        .unwrap();
    }
    out
}

pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    fs::write(path, results_csv(rows))?;
    Ok(())
}
