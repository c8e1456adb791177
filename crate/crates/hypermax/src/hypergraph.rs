//! Walk-based regular hypergraphs, quasi-regular chain hypergraphs,
//! hyperedge sets used as sampling masks, crossing counts, and the
//! spectral mixing bounds they satisfy.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, RegularGraph};
use crate::tensor::{for_each_index, DenseTensor};

/// Materialization cap for hyperedge lists.
pub const MAX_MATERIALIZED_EDGES: u64 = 10_000_000;

/// Ordered `t`-tuples of 0-based vertex indices: the sample set / mask.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperedgeSet {
    dims: Vec<usize>,
    flat: Vec<u32>,
}

impl HyperedgeSet {
    /// Validating constructor: indices in range, no duplicate tuples.
    pub fn new(dims: Vec<usize>, flat: Vec<u32>) -> Result<Self> {
        let t = dims.len();
        if t < 2 {
            return Err(Error::InvalidArgument(
                "hyperedge arity must be >= 2".into(),
            ));
        }
        if !flat.len().is_multiple_of(t) {
            return Err(Error::InvalidArgument(format!(
                "flat edge buffer length {} is not a multiple of t = {t}",
                flat.len()
            )));
        }
        let mut seen = HashSet::with_capacity(flat.len() / t);
        for tuple in flat.chunks_exact(t) {
            for (i, &j) in tuple.iter().enumerate() {
                if j as usize >= dims[i] {
                    return Err(Error::InvalidArgument(format!(
                        "index {j} out of range for axis {i} (dim {})",
                        dims[i]
                    )));
                }
            }
            if !seen.insert(tuple.to_vec()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate hyperedge {tuple:?}"
                )));
            }
        }
        Ok(Self { dims, flat })
    }

    /// Trusted constructor for internally generated (already distinct) edges.
    pub(crate) fn from_distinct(dims: Vec<usize>, flat: Vec<u32>) -> Self {
        debug_assert_eq!(flat.len() % dims.len(), 0);
        Self { dims, flat }
    }

    pub fn arity(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    /// Flat index buffer: `len()` tuples of `arity()` indices back-to-back.
    pub fn flat(&self) -> &[u32] {
        &self.flat
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.flat.chunks_exact(self.dims.len())
    }

    /// Count edges whose i-th vertex lies in `subsets[i]` for all i.
    pub fn count_crossing(&self, subsets: &[Vec<bool>]) -> Result<u64> {
        check_subsets(&self.dims, subsets)?;
        let t = self.arity();
        let mut count = 0u64;
        for tuple in self.flat.chunks_exact(t) {
            if tuple
                .iter()
                .enumerate()
                .all(|(i, &j)| subsets[i][j as usize])
            {
                count += 1;
            }
        }
        Ok(count)
    }
}

fn check_subsets(dims: &[usize], subsets: &[Vec<bool>]) -> Result<()> {
    if subsets.len() != dims.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} subsets, got {}",
            dims.len(),
            subsets.len()
        )));
    }
    for (i, s) in subsets.iter().enumerate() {
        if s.len() != dims[i] {
            return Err(Error::InvalidArgument(format!(
                "subset {i} has length {}, expected {}",
                s.len(),
                dims[i]
            )));
        }
    }
    Ok(())
}

fn subset_fraction(subset: &[bool]) -> f64 {
    subset.iter().filter(|&&b| b).count() as f64 / subset.len() as f64
}

/// `t`-partite hypergraph whose edges are the length-`(t-1)` walks of a
/// regular base graph. Walks are ordered: a walk and its reverse are
/// distinct hyperedges. Every vertex of each part has degree `d^(t-1)` and
/// `|E| = n * d^(t-1)`.
#[derive(Debug, Clone)]
pub struct WalkHypergraph {
    base: RegularGraph,
    t: usize,
    edge_count: u64,
}

pub fn build_walk_hypergraph(base: RegularGraph, t: usize) -> Result<WalkHypergraph> {
    if t < 2 {
        return Err(Error::InvalidArgument(format!(
            "order t must be >= 2, got {t}"
        )));
    }
    let mut count: u128 = base.n() as u128;
    for _ in 0..t - 1 {
        count = count.saturating_mul(base.degree() as u128);
    }
    if count > i64::MAX as u128 {
        return Err(Error::SizeCap(format!("edge count {count} exceeds 2^63")));
    }
    Ok(WalkHypergraph {
        base,
        t,
        edge_count: count as u64,
    })
}

impl WalkHypergraph {
    pub fn base(&self) -> &RegularGraph {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.t
    }

    pub fn part_size(&self) -> usize {
        self.base.n()
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.base.n(); self.t]
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    /// Per-vertex degree in every part: `d^(t-1)`.
    pub fn vertex_degree(&self) -> u64 {
        (self.base.degree() as u64).pow((self.t - 1) as u32)
    }

    /// Visit every hyperedge (walk) in lexicographic order.
    pub fn for_each_edge(&self, mut f: impl FnMut(&[u32])) {
        let t = self.t;
        let mut walk = vec![0u32; t];
        for v in 0..self.base.n() as u32 {
            walk[0] = v;
            self.extend_walk(&mut walk, 1, &mut f);
        }
    }

    fn extend_walk(&self, walk: &mut [u32], depth: usize, f: &mut impl FnMut(&[u32])) {
        if depth == self.t {
            f(walk);
            return;
        }
        let prev = walk[depth - 1] as usize;
        // sorted adjacency gives lexicographic edge order
        for i in 0..self.base.degree() {
            walk[depth] = self.base.neighbors(prev)[i];
            self.extend_walk(walk, depth + 1, f);
        }
    }

    pub fn materialize(&self) -> Result<HyperedgeSet> {
        if self.edge_count > MAX_MATERIALIZED_EDGES {
            return Err(Error::SizeCap(format!(
                "{} edges exceed materialization cap {MAX_MATERIALIZED_EDGES}",
                self.edge_count
            )));
        }
        let mut flat = Vec::with_capacity(self.edge_count as usize * self.t);
        self.for_each_edge(|walk| flat.extend_from_slice(walk));
        Ok(HyperedgeSet::from_distinct(self.dims(), flat))
    }

    /// Exact crossing count `e(W_1, ..., W_t)` by walk dynamic programming:
    /// carry integer walk counts per vertex, zeroing outside `W_i` at step i
    /// and pushing through the adjacency. Cost `O(t * n * d)`.
    pub fn count_crossing(&self, subsets: &[Vec<bool>]) -> Result<u64> {
        let dims = self.dims();
        check_subsets(&dims, subsets)?;
        let n = self.base.n();
        let mut counts = vec![0u64; n];
        for v in 0..n {
            if subsets[0][v] {
                counts[v] = 1;
            }
        }
        let mut next = vec![0u64; n];
        for gate in &subsets[1..self.t] {
            next.iter_mut().for_each(|c| *c = 0);
            for (v, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &u in self.base.neighbors(v) {
                    let u = u as usize;
                    if gate[u] {
                        next[u] += c;
                    }
                }
            }
            std::mem::swap(&mut counts, &mut next);
        }
        Ok(counts.iter().sum())
    }

    /// Brute-force crossing count by enumerating every walk. Oracle path for
    /// small instances; errors beyond the materialization cap.
    pub fn count_crossing_enumerated(&self, subsets: &[Vec<bool>]) -> Result<u64> {
        let dims = self.dims();
        check_subsets(&dims, subsets)?;
        if self.edge_count > MAX_MATERIALIZED_EDGES {
            return Err(Error::SizeCap("enumeration above cap".into()));
        }
        let mut count = 0u64;
        self.for_each_edge(|walk| {
            if walk
                .iter()
                .enumerate()
                .all(|(i, &v)| subsets[i][v as usize])
            {
                count += 1;
            }
        });
        Ok(count)
    }

    /// `| e(W)/|E| - prod alpha_i |`.
    pub fn discrepancy(&self, subsets: &[Vec<bool>]) -> Result<f64> {
        let count = self.count_crossing(subsets)?;
        let density: f64 = subsets.iter().map(|s| subset_fraction(s)).product();
        Ok((count as f64 / self.edge_count as f64 - density).abs())
    }

    /// Tight and crude mixing bounds for this hypergraph's subset fractions.
    pub fn mixing_bounds(&self, subsets: &[Vec<bool>]) -> Result<(f64, f64)> {
        let dims = self.dims();
        check_subsets(&dims, subsets)?;
        let alphas: Vec<f64> = subsets.iter().map(|s| subset_fraction(s)).collect();
        let lambda = self.base.second_eigenvalue()?;
        Ok(mixing_bound_regular(
            self.t,
            &alphas,
            lambda,
            self.base.degree() as f64,
        ))
    }
}

/// Tight and crude bounds on the walk-hypergraph mixing discrepancy.
///
/// tight = (lambda/d) * ( sqrt(a1(1-a1)a2(1-a2)) * prod_{k>=3} a_k
///         + sum_{i=3..t} sqrt(a1 a_i (1-a_i)) * prod_{k>i} a_k )
/// crude = (2t-3) * lambda / (4d), and tight <= crude always.
pub fn mixing_bound_regular(t: usize, alphas: &[f64], lambda: f64, d: f64) -> (f64, f64) {
    assert_eq!(alphas.len(), t, "need one subset fraction per part");
    let ratio = lambda / d;
    let mut tight = (alphas[0] * (1.0 - alphas[0]) * alphas[1] * (1.0 - alphas[1])).sqrt();
    for &a in &alphas[2..] {
        tight *= a;
    }
    for i in 2..t {
        let mut term = (alphas[0] * alphas[i] * (1.0 - alphas[i])).sqrt();
        for &a in &alphas[i + 1..] {
            term *= a;
        }
        tight += term;
    }
    tight *= ratio;
    let crude = (2.0 * t as f64 - 3.0) * ratio / 4.0;
    (tight, crude)
}

/// Tight and crude mixing bounds for the quasi-regular chain hypergraph.
///
/// `lambdas[k]` is the second singular value of link `k` (0-based) and
/// `ds` lists `d_1, d_2, ..., d_{2t-2}` (left/right degrees per link).
pub fn mixing_bound_quasi(t: usize, alphas: &[f64], lambdas: &[f64], ds: &[usize]) -> (f64, f64) {
    assert_eq!(alphas.len(), t);
    assert_eq!(lambdas.len(), t - 1);
    assert_eq!(ds.len(), 2 * (t - 1));
    let link_ratio = |k: usize| lambdas[k] / ((ds[2 * k] * ds[2 * k + 1]) as f64).sqrt();

    let mut tight =
        link_ratio(0) * (alphas[0] * (1.0 - alphas[0]) * alphas[1] * (1.0 - alphas[1])).sqrt();
    for &a in &alphas[2..] {
        tight *= a;
    }
    // links k = 2..t-1 in 1-based terms; 0-based link index k-1 bounds the
    // step into part k+1.
    for k in 1..t - 1 {
        let mut term = link_ratio(k) * (alphas[0] * alphas[k + 1] * (1.0 - alphas[k + 1])).sqrt();
        for &a in &alphas[k + 2..] {
            term *= a;
        }
        tight += term;
    }

    let mut crude = link_ratio(0) / 4.0;
    for k in 1..t - 1 {
        crude += link_ratio(k) / 2.0;
    }
    (tight, crude)
}

/// `t`-partite hypergraph whose edges are the paths through a chain of
/// `t-1` bipartite biregular graphs. Each vertex of part `i` has degree
/// `(prod_{k<i} d_{2k}) * (prod_{k>=i} d_{2k-1})` and
/// `|E| = n_1 * prod d_{2i-1}`.
#[derive(Debug, Clone)]
pub struct QuasiRegularHypergraph {
    chain: Vec<BipartiteGraph>,
    edge_count: u64,
}

pub fn build_quasi_hypergraph(chain: Vec<BipartiteGraph>) -> Result<QuasiRegularHypergraph> {
    if chain.is_empty() {
        return Err(Error::InvalidArgument(
            "chain must have at least one link".into(),
        ));
    }
    for w in chain.windows(2) {
        if w[0].n2() != w[1].n1() {
            return Err(Error::InvalidArgument(format!(
                "chain links disagree on part size: {} vs {}",
                w[0].n2(),
                w[1].n1()
            )));
        }
    }
    let mut count: u128 = chain[0].n1() as u128;
    for link in &chain {
        count = count.saturating_mul(link.d1() as u128);
    }
    if count > i64::MAX as u128 {
        return Err(Error::SizeCap(format!("edge count {count} exceeds 2^63")));
    }
    Ok(QuasiRegularHypergraph {
        chain,
        edge_count: count as u64,
    })
}

impl QuasiRegularHypergraph {
    pub fn order(&self) -> usize {
        self.chain.len() + 1
    }

    pub fn chain(&self) -> &[BipartiteGraph] {
        &self.chain
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.order());
        dims.push(self.chain[0].n1());
        for link in &self.chain {
            dims.push(link.n2());
        }
        dims
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    /// Degree of every vertex in part `i` (0-based part index).
    pub fn part_degree(&self, i: usize) -> u64 {
        let mut deg = 1u64;
        for (k, link) in self.chain.iter().enumerate() {
            if k < i {
                deg *= link.d2() as u64;
            } else {
                deg *= link.d1() as u64;
            }
        }
        deg
    }

    /// Degrees `d_1..d_{2t-2}` in link order.
    pub fn link_degrees(&self) -> Vec<usize> {
        let mut ds = Vec::with_capacity(2 * self.chain.len());
        for link in &self.chain {
            ds.push(link.d1());
            ds.push(link.d2());
        }
        ds
    }

    pub fn link_lambdas(&self) -> Result<Vec<f64>> {
        self.chain.iter().map(|g| g.second_singular()).collect()
    }

    pub fn for_each_edge(&self, mut f: impl FnMut(&[u32])) {
        let t = self.order();
        let mut path = vec![0u32; t];
        for v in 0..self.chain[0].n1() as u32 {
            path[0] = v;
            self.extend_path(&mut path, 1, &mut f);
        }
    }

    fn extend_path(&self, path: &mut [u32], depth: usize, f: &mut impl FnMut(&[u32])) {
        if depth == self.order() {
            f(path);
            return;
        }
        let link = &self.chain[depth - 1];
        let prev = path[depth - 1] as usize;
        for &u in link.neighbors_of_left(prev) {
            path[depth] = u;
            self.extend_path(path, depth + 1, f);
        }
    }

    pub fn materialize(&self) -> Result<HyperedgeSet> {
        if self.edge_count > MAX_MATERIALIZED_EDGES {
            return Err(Error::SizeCap(format!(
                "{} edges exceed materialization cap {MAX_MATERIALIZED_EDGES}",
                self.edge_count
            )));
        }
        let mut flat = Vec::with_capacity(self.edge_count as usize * self.order());
        self.for_each_edge(|path| flat.extend_from_slice(path));
        Ok(HyperedgeSet::from_distinct(self.dims(), flat))
    }

    pub fn count_crossing(&self, subsets: &[Vec<bool>]) -> Result<u64> {
        let dims = self.dims();
        check_subsets(&dims, subsets)?;
        let mut counts: Vec<u64> = (0..dims[0])
            .map(|v| if subsets[0][v] { 1 } else { 0 })
            .collect();
        for (step, link) in self.chain.iter().enumerate() {
            let mut next = vec![0u64; link.n2()];
            for (v, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &u in link.neighbors_of_left(v) {
                    let u = u as usize;
                    if subsets[step + 1][u] {
                        next[u] += c;
                    }
                }
            }
            counts = next;
        }
        Ok(counts.iter().sum())
    }

    pub fn count_crossing_enumerated(&self, subsets: &[Vec<bool>]) -> Result<u64> {
        let dims = self.dims();
        check_subsets(&dims, subsets)?;
        if self.edge_count > MAX_MATERIALIZED_EDGES {
            return Err(Error::SizeCap("enumeration above cap".into()));
        }
        let mut count = 0u64;
        self.for_each_edge(|path| {
            if path
                .iter()
                .enumerate()
                .all(|(i, &v)| subsets[i][v as usize])
            {
                count += 1;
            }
        });
        Ok(count)
    }

    pub fn discrepancy(&self, subsets: &[Vec<bool>]) -> Result<f64> {
        let count = self.count_crossing(subsets)?;
        let density: f64 = subsets.iter().map(|s| subset_fraction(s)).product();
        Ok((count as f64 / self.edge_count as f64 - density).abs())
    }

    pub fn mixing_bounds(&self, subsets: &[Vec<bool>]) -> Result<(f64, f64)> {
        let dims = self.dims();
        check_subsets(&dims, subsets)?;
        let alphas: Vec<f64> = subsets.iter().map(|s| subset_fraction(s)).collect();
        let lambdas = self.link_lambdas()?;
        Ok(mixing_bound_quasi(
            self.order(),
            &alphas,
            &lambdas,
            &self.link_degrees(),
        ))
    }
}

/// Normalized adjacency-tensor discrepancy
/// `| e(W) - (|E|/prod n_i) * prod |W_i| | / sqrt(prod |W_i|)`
/// for an explicit 0/1 adjacency tensor. Test oracle for tiny instances
/// (capped at 10^6 entries); returns 0 when some `W_i` is empty.
pub fn adjacency_tensor_mixing(adjacency: &DenseTensor, subsets: &[Vec<bool>]) -> Result<f64> {
    if adjacency.len() > 1_000_000 {
        return Err(Error::SizeCap(format!(
            "{} entries exceed the adjacency-tensor oracle cap",
            adjacency.len()
        )));
    }
    check_subsets(adjacency.dims(), subsets)?;
    if adjacency.values().iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::InvalidArgument(
            "adjacency tensor must be 0/1".into(),
        ));
    }
    let sizes: Vec<usize> = subsets
        .iter()
        .map(|s| s.iter().filter(|&&b| b).count())
        .collect();
    let volume: f64 = sizes.iter().map(|&s| s as f64).product();
    if volume == 0.0 {
        return Ok(0.0);
    }
    let total_entries: f64 = adjacency.dims().iter().map(|&n| n as f64).product();
    let edge_total: f64 = adjacency.values().iter().sum();
    let mut crossing = 0.0f64;
    for_each_index(adjacency.dims(), |idx| {
        if idx.iter().enumerate().all(|(i, &j)| subsets[i][j]) {
            crossing += adjacency.get(idx);
        }
    });
    Ok((crossing - edge_total / total_entries * volume).abs() / volume.sqrt())
}

/// Draw one subset per part with fraction on the grid {0, 1/n, ..., 1}.
pub fn random_subsets(dims: &[usize], rng: &mut impl rand::Rng) -> Vec<Vec<bool>> {
    dims.iter()
        .map(|&n| {
            let size = rng.gen_range(0..=n);
            let mut subset = vec![false; n];
            // partial Fisher-Yates over vertex indices
            let mut perm: Vec<usize> = (0..n).collect();
            for i in 0..size {
                let j = rng.gen_range(i..n);
                perm.swap(i, j);
                subset[perm[i]] = true;
            }
            subset
        })
        .collect()
}
