//! Random regular and bipartite biregular base graphs, plus the second
//! eigenvalue / second singular value measurements that drive every
//! mixing bound downstream.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const RESTART_BUDGET: usize = 10_000;
const DENSE_EIGEN_LIMIT: usize = 2000;
const SPECTRUM_TOL: f64 = 1e-8;

/// Simple `d`-regular graph with sorted adjacency lists.
#[derive(Debug)]
pub struct RegularGraph {
    n: usize,
    d: usize,
    adj: Vec<Vec<u32>>,
    lambda2: OnceLock<f64>,
}

impl Clone for RegularGraph {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            d: self.d,
            adj: self.adj.clone(),
            lambda2: self.lambda2.clone(),
        }
    }
}

impl RegularGraph {
    /// Build from adjacency lists, validating regularity and simplicity.
    pub fn from_adjacency(adj: Vec<Vec<u32>>) -> Result<Self> {
        let n = adj.len();
        if n < 2 {
            return Err(Error::InvalidArgument(
                "graph needs at least 2 vertices".into(),
            ));
        }
        let d = adj[0].len();
        if d == 0 || d >= n {
            return Err(Error::InvalidArgument(format!(
                "degree {d} invalid for {n} vertices"
            )));
        }
        let mut adj = adj;
        for (v, list) in adj.iter_mut().enumerate() {
            if list.len() != d {
                return Err(Error::InvalidArgument(format!(
                    "vertex {v} has degree {}, expected {d}",
                    list.len()
                )));
            }
            list.sort_unstable();
            for w in list.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::InvalidArgument(format!("multi-edge at vertex {v}")));
                }
            }
            if list.iter().any(|&u| u as usize == v) {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {v}")));
            }
            if list.iter().any(|&u| u as usize >= n) {
                return Err(Error::InvalidArgument(format!(
                    "vertex {v} has out-of-range neighbor"
                )));
            }
        }
        // symmetry
        for v in 0..n {
            for &u in &adj[v] {
                if adj[u as usize].binary_search(&(v as u32)).is_err() {
                    return Err(Error::InvalidArgument(format!(
                        "edge ({v},{u}) missing its reverse"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            d,
            adj,
            lambda2: OnceLock::new(),
        })
    }

    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u},{v}) out of range"
                )));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        Self::from_adjacency(adj)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    /// Undirected edge list with `u < v`.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.n * self.d / 2);
        for v in 0..self.n {
            for &u in &self.adj[v] {
                if (v as u32) < u {
                    out.push((v as u32, u));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &self.adj[v] {
                let u = u as usize;
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n
    }

    pub fn is_bipartite(&self) -> bool {
        let mut color = vec![-1i8; self.n];
        for start in 0..self.n {
            if color[start] >= 0 {
                continue;
            }
            color[start] = 0;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &u in &self.adj[v] {
                    let u = u as usize;
                    if color[u] < 0 {
                        color[u] = 1 - color[v];
                        stack.push(u);
                    } else if color[u] == color[v] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `max(|lambda_2|, |lambda_n|)` of the adjacency matrix, cached.
    ///
    /// Dense symmetric eigendecomposition up to 2000 vertices; above that a
    /// power iteration on the adjacency with the all-ones direction deflated.
    /// Errors on disconnected graphs (the value would equal `d`).
    pub fn second_eigenvalue(&self) -> Result<f64> {
        if let Some(&v) = self.lambda2.get() {
            return Ok(v);
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let lambda = if self.n <= DENSE_EIGEN_LIMIT {
            self.lambda_dense()
        } else {
            self.lambda_power()
        };
        let _ = self.lambda2.set(lambda);
        Ok(lambda)
    }

    fn lambda_dense(&self) -> f64 {
        let mut m = DMatrix::<f64>::zeros(self.n, self.n);
        for v in 0..self.n {
            for &u in &self.adj[v] {
                m[(v, u as usize)] = 1.0;
            }
        }
        let eig = m.symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        // drop one copy of the top eigenvalue (= d for connected graphs)
        vals[1..].iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }

    /// Power iteration on B^2 where B = A - (d/n) J; the spectral radius of
    /// B is exactly max(|lambda_2|, |lambda_n|). Squaring avoids oscillation
    /// when +lambda and -lambda are both present.
    fn lambda_power(&self) -> f64 {
        let n = self.n;
        let shift = self.d as f64 / n as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let apply_b = |x: &[f64], out: &mut Vec<f64>| {
            let total: f64 = x.iter().sum();
            out.clear();
            out.resize(n, 0.0);
            for (o, adj) in out.iter_mut().zip(&self.adj) {
                let mut acc = 0.0;
                for &u in adj {
                    acc += x[u as usize];
                }
                *o = acc - shift * total;
            }
        };
        let mut y = Vec::new();
        let mut z = Vec::new();
        let mut prev = 0.0f64;
        for _ in 0..100_000 {
            apply_b(&x, &mut y);
            apply_b(&y, &mut z);
            let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let est = {
                // Rayleigh quotient of B^2
                let num: f64 = x.iter().zip(&z).map(|(a, b)| a * b).sum();
                let den: f64 = x.iter().map(|v| v * v).sum();
                (num / den).abs().sqrt()
            };
            for v in &mut z {
                *v /= norm;
            }
            std::mem::swap(&mut x, &mut z);
            if (est - prev).abs() <= SPECTRUM_TOL * est.max(1.0) {
                return est;
            }
            prev = est;
        }
        prev
    }
}

/// Bipartite `(d1, d2)`-biregular graph stored as left-to-right adjacency.
#[derive(Debug)]
pub struct BipartiteGraph {
    n1: usize,
    n2: usize,
    d1: usize,
    d2: usize,
    adj_left: Vec<Vec<u32>>,
    lambda2: OnceLock<f64>,
}

impl Clone for BipartiteGraph {
    fn clone(&self) -> Self {
        Self {
            n1: self.n1,
            n2: self.n2,
            d1: self.d1,
            d2: self.d2,
            adj_left: self.adj_left.clone(),
            lambda2: self.lambda2.clone(),
        }
    }
}

impl BipartiteGraph {
    pub fn from_left_adjacency(n2: usize, adj_left: Vec<Vec<u32>>) -> Result<Self> {
        let n1 = adj_left.len();
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidArgument("empty vertex side".into()));
        }
        let d1 = adj_left[0].len();
        if d1 == 0 || d1 > n2 {
            return Err(Error::InvalidArgument(format!(
                "left degree {d1} invalid for right side of {n2}"
            )));
        }
        if !(n1 * d1).is_multiple_of(n2) {
            return Err(Error::InvalidArgument(format!(
                "edge count {} not divisible by right side {n2}",
                n1 * d1
            )));
        }
        let d2 = n1 * d1 / n2;
        let mut adj_left = adj_left;
        let mut right_deg = vec![0usize; n2];
        for (v, list) in adj_left.iter_mut().enumerate() {
            if list.len() != d1 {
                return Err(Error::InvalidArgument(format!(
                    "left vertex {v} has degree {}, expected {d1}",
                    list.len()
                )));
            }
            list.sort_unstable();
            for w in list.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::InvalidArgument(format!(
                        "multi-edge at left vertex {v}"
                    )));
                }
            }
            for &u in list.iter() {
                if u as usize >= n2 {
                    return Err(Error::InvalidArgument(format!(
                        "left vertex {v} has out-of-range neighbor {u}"
                    )));
                }
                right_deg[u as usize] += 1;
            }
        }
        for (u, &deg) in right_deg.iter().enumerate() {
            if deg != d2 {
                return Err(Error::InvalidArgument(format!(
                    "right vertex {u} has degree {deg}, expected {d2}"
                )));
            }
        }
        Ok(Self {
            n1,
            n2,
            d1,
            d2,
            adj_left,
            lambda2: OnceLock::new(),
        })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn neighbors_of_left(&self, v: usize) -> &[u32] {
        &self.adj_left[v]
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.n1 * self.d1);
        for v in 0..self.n1 {
            for &u in &self.adj_left[v] {
                out.push((v as u32, u));
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        // BFS over the union graph with right vertices offset by n1.
        let mut adj_right = vec![Vec::new(); self.n2];
        for v in 0..self.n1 {
            for &u in &self.adj_left[v] {
                adj_right[u as usize].push(v as u32);
            }
        }
        let total = self.n1 + self.n2;
        let mut seen = vec![false; total];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            if v < self.n1 {
                for &u in &self.adj_left[v] {
                    let w = self.n1 + u as usize;
                    if !seen[w] {
                        seen[w] = true;
                        count += 1;
                        stack.push(w);
                    }
                }
            } else {
                for &u in &adj_right[v - self.n1] {
                    let w = u as usize;
                    if !seen[w] {
                        seen[w] = true;
                        count += 1;
                        stack.push(w);
                    }
                }
            }
        }
        count == total
    }

    /// Second largest singular value of the biadjacency matrix, equal to the
    /// second largest adjacency eigenvalue of the bipartite graph. Verifies
    /// that the top singular value equals `sqrt(d1*d2)` before returning.
    pub fn second_singular(&self) -> Result<f64> {
        if let Some(&v) = self.lambda2.get() {
            return Ok(v);
        }
        if !self.is_connected() {
            return Err(Error::Disconnected);
        }
        let (sigma1, sigma2) = if self.n1.max(self.n2) <= DENSE_EIGEN_LIMIT {
            self.singular_dense()
        } else {
            self.singular_power()
        };
        let expect = ((self.d1 * self.d2) as f64).sqrt();
        if (sigma1 - expect).abs() > 1e-6 * expect.max(1.0) {
            return Err(Error::Solver(format!(
                "top singular value {sigma1} differs from sqrt(d1*d2) = {expect}"
            )));
        }
        let _ = self.lambda2.set(sigma2);
        Ok(sigma2)
    }

    fn biadjacency(&self) -> DMatrix<f64> {
        // rows index the right side, columns the left side
        let mut b = DMatrix::<f64>::zeros(self.n2, self.n1);
        for v in 0..self.n1 {
            for &u in &self.adj_left[v] {
                b[(u as usize, v)] = 1.0;
            }
        }
        b
    }

    fn singular_dense(&self) -> (f64, f64) {
        let b = self.biadjacency();
        let svd = b.svd(false, false);
        let mut vals: Vec<f64> = svd.singular_values.iter().copied().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let sigma1 = vals[0];
        let sigma2 = if vals.len() > 1 { vals[1] } else { 0.0 };
        (sigma1, sigma2)
    }

    /// Power iteration on C = B^T B - (d1 d2 / n1) J, whose spectral radius
    /// is sigma_2^2 (the top pair of B^T B lives on the all-ones vector).
    fn singular_power(&self) -> (f64, f64) {
        let n1 = self.n1;
        let shift = (self.d1 * self.d2) as f64 / n1 as f64;
        let mut adj_right = vec![Vec::new(); self.n2];
        for v in 0..n1 {
            for &u in &self.adj_left[v] {
                adj_right[u as usize].push(v as u32);
            }
        }
        let apply = |x: &[f64], out: &mut Vec<f64>| {
            let total: f64 = x.iter().sum();
            let mut mid = vec![0.0f64; self.n2];
            for (xv, adj) in x.iter().zip(&self.adj_left) {
                for &u in adj {
                    mid[u as usize] += xv;
                }
            }
            out.clear();
            out.resize(n1, 0.0);
            for u in 0..self.n2 {
                for &v in &adj_right[u] {
                    out[v as usize] += mid[u];
                }
            }
            for (o, xv) in out.iter_mut().zip(x) {
                let _ = xv;
                *o -= shift * total;
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed2);
        let mut x: Vec<f64> = (0..n1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut y = Vec::new();
        let mut prev = 0.0f64;
        let mut est = 0.0f64;
        for _ in 0..100_000 {
            apply(&x, &mut y);
            let num: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
            let den: f64 = x.iter().map(|v| v * v).sum();
            est = (num / den).max(0.0).sqrt();
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                est = 0.0;
                break;
            }
            for v in &mut y {
                *v /= norm;
            }
            std::mem::swap(&mut x, &mut y);
            if (est - prev).abs() <= SPECTRUM_TOL * est.max(1.0) {
                break;
            }
            prev = est;
        }
        (((self.d1 * self.d2) as f64).sqrt(), est)
    }
}

/// Ramanujan threshold `2 sqrt(d-1)` for a `d`-regular graph.
pub fn ramanujan_threshold(d: usize) -> f64 {
    2.0 * ((d as f64) - 1.0).sqrt()
}

/// Generate a simple connected non-bipartite `d`-regular graph on `n`
/// vertices, deterministic for a fixed seed.
///
/// Pairing model on half-edges with incremental collision avoidance;
/// attempts that get stuck, come out disconnected, or come out bipartite
/// are rejected and retried (up to a fixed restart budget). Connected
/// non-bipartite output guarantees `lambda < d` strictly.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<RegularGraph> {
    if n < 3 {
        return Err(Error::InvalidArgument("need n >= 3".into()));
    }
    if d >= n {
        return Err(Error::InvalidArgument(format!(
            "need d < n, got d={d}, n={n}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("need d >= 1".into()));
    }
    if !(n * d).is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("n*d = {} is odd", n * d)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RESTART_BUDGET {
        if let Some(adj) = try_pairing(n, d, &mut rng) {
            let g = RegularGraph {
                n,
                d,
                adj,
                lambda2: OnceLock::new(),
            };
            if g.is_connected() && !g.is_bipartite() {
                return Ok(g);
            }
        }
    }
    Err(Error::GenerationFailed(format!(
        "no simple connected non-bipartite {d}-regular graph on {n} vertices within {RESTART_BUDGET} attempts"
    )))
}

fn try_pairing(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<u32>>> {
    let mut points: Vec<u32> = (0..n)
        .flat_map(|v| std::iter::repeat_n(v as u32, d))
        .collect();
    let mut adj: Vec<Vec<u32>> = vec![Vec::with_capacity(d); n];
    let mut len = points.len();
    while len > 0 {
        let mut placed = false;
        // rejection sampling for one acceptable pair
        for _ in 0..200 {
            let i = rng.gen_range(0..len);
            let mut j = rng.gen_range(0..len - 1);
            if j >= i {
                j += 1;
            }
            let (u, v) = (points[i], points[j]);
            if u == v || adj[u as usize].contains(&v) {
                continue;
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
            let (hi, lo) = (i.max(j), i.min(j));
            points.swap(hi, len - 1);
            points.swap(lo, len - 2);
            len -= 2;
            placed = true;
            break;
        }
        if !placed {
            return None;
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    Some(adj)
}

/// Generate a simple connected `(d1, d2)`-biregular bipartite graph with
/// sides `n1`, `n2`, deterministic per seed.
pub fn random_biregular(
    n1: usize,
    n2: usize,
    d1: usize,
    d2: usize,
    seed: u64,
) -> Result<BipartiteGraph> {
    if n1 == 0 || n2 == 0 || d1 == 0 || d2 == 0 {
        return Err(Error::InvalidArgument(
            "sizes and degrees must be positive".into(),
        ));
    }
    if n1 * d1 != n2 * d2 {
        return Err(Error::InvalidArgument(format!(
            "need n1*d1 == n2*d2, got {} vs {}",
            n1 * d1,
            n2 * d2
        )));
    }
    if d1 > n2 || d2 > n1 {
        return Err(Error::InvalidArgument(
            "degree exceeds opposite side".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RESTART_BUDGET {
        if let Some(adj_left) = try_bipartite_pairing(n1, n2, d1, d2, &mut rng) {
            let g = BipartiteGraph {
                n1,
                n2,
                d1,
                d2,
                adj_left,
                lambda2: OnceLock::new(),
            };
            if g.is_connected() {
                return Ok(g);
            }
        }
    }
    Err(Error::GenerationFailed(format!(
        "no simple connected ({d1},{d2})-biregular graph on {n1}+{n2} vertices within {RESTART_BUDGET} attempts"
    )))
}

fn try_bipartite_pairing(
    n1: usize,
    n2: usize,
    d1: usize,
    d2: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Vec<u32>>> {
    let mut left: Vec<u32> = (0..n1)
        .flat_map(|v| std::iter::repeat_n(v as u32, d1))
        .collect();
    let mut right: Vec<u32> = (0..n2)
        .flat_map(|v| std::iter::repeat_n(v as u32, d2))
        .collect();
    let mut adj_left: Vec<Vec<u32>> = vec![Vec::with_capacity(d1); n1];
    let mut len = left.len();
    while len > 0 {
        let mut placed = false;
        for _ in 0..200 {
            let i = rng.gen_range(0..len);
            let j = rng.gen_range(0..len);
            let (v, u) = (left[i], right[j]);
            if adj_left[v as usize].contains(&u) {
                continue;
            }
            adj_left[v as usize].push(u);
            left.swap(i, len - 1);
            right.swap(j, len - 1);
            len -= 1;
            placed = true;
            break;
        }
        if !placed {
            return None;
        }
    }
    for list in &mut adj_left {
        list.sort_unstable();
    }
    Some(adj_left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cycle(n: usize) -> RegularGraph {
        let edges: Vec<(u32, u32)> = (0..n).map(|i| (i as u32, ((i + 1) % n) as u32)).collect();
        RegularGraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn complete_graph_forced_for_n4_d3() {
        let g = random_regular(4, 3, 0).unwrap();
        for v in 0..4 {
            let mut expect: Vec<u32> = (0..4u32).filter(|&u| u as usize != v).collect();
            expect.sort_unstable();
            assert_eq!(g.neighbors(v), expect.as_slice());
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = random_regular(10, 3, 42).unwrap();
        let b = random_regular(10, 3, 42).unwrap();
        for v in 0..10 {
            assert_eq!(a.neighbors(v), b.neighbors(v));
        }
        let c = random_regular(10, 3, 43).unwrap();
        let same = (0..10).all(|v| a.neighbors(v) == c.neighbors(v));
        assert!(!same, "different seeds should give different graphs");
    }

    #[test]
    fn degrees_are_uniform() {
        for (n, d, seed) in [(12, 3, 1), (20, 7, 2), (40, 11, 3)] {
            let g = random_regular(n, d, seed).unwrap();
            for v in 0..n {
                assert_eq!(g.neighbors(v).len(), d);
            }
            assert!(g.is_connected());
            assert!(!g.is_bipartite());
        }
    }

    #[test]
    fn infeasible_inputs_rejected() {
        assert!(random_regular(5, 3, 0).is_err()); // odd n*d
        assert!(random_regular(4, 4, 0).is_err()); // d >= n
        assert!(random_regular(2, 1, 0).is_err()); // n < 3
    }

    #[test]
    fn complete_graph_lambda_is_one() {
        // spectrum of K_n is {n-1, -1, ..., -1}
        let g = random_regular(4, 3, 0).unwrap();
        assert_relative_eq!(g.second_eigenvalue().unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn cycle_spectrum() {
        // C6 is bipartite: eigenvalues 2cos(2 pi k / 6), lambda = |-2| = 2.
        let g = cycle(6);
        assert_relative_eq!(g.second_eigenvalue().unwrap(), 2.0, epsilon = 1e-9);
        // C5: max |2cos(2 pi k/5)| over k != 0 = 2cos(2 pi/5 * 2) in abs = 2cos(pi/5)
        let g5 = cycle(5);
        let expect = 2.0 * (std::f64::consts::PI / 5.0).cos();
        assert_relative_eq!(g5.second_eigenvalue().unwrap(), expect, epsilon = 1e-9);
    }

    #[test]
    fn random_cubic_lambda_near_ramanujan() {
        let g = random_regular(100, 3, 7).unwrap();
        let lambda = g.second_eigenvalue().unwrap();
        let lo = ramanujan_threshold(3) - 0.3;
        assert!(lambda > lo && lambda < 3.0, "lambda = {lambda}");
    }

    #[test]
    fn disconnected_graph_is_an_error() {
        // two disjoint triangles
        let edges = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)];
        let g = RegularGraph::from_edges(6, &edges).unwrap();
        assert!(g.second_eigenvalue().is_err());
    }

    #[test]
    fn power_iteration_agrees_with_dense() {
        let g = random_regular(120, 5, 11).unwrap();
        let dense = g.lambda_dense();
        let power = g.lambda_power();
        assert_relative_eq!(dense, power, epsilon = 1e-6, max_relative = 1e-6);
    }

    #[test]
    fn complete_bipartite_forced() {
        let g = random_biregular(3, 3, 3, 3, 0).unwrap();
        for v in 0..3 {
            assert_eq!(g.neighbors_of_left(v), &[0, 1, 2]);
        }
        // rank-1 biadjacency: second singular value 0
        assert_relative_eq!(g.second_singular().unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn biregular_degrees() {
        let g = random_biregular(6, 4, 2, 3, 5).unwrap();
        assert_eq!((g.d1(), g.d2()), (2, 3));
        let mut right = [0usize; 4];
        for v in 0..6 {
            assert_eq!(g.neighbors_of_left(v).len(), 2);
            for &u in g.neighbors_of_left(v) {
                right[u as usize] += 1;
            }
        }
        assert!(right.iter().all(|&c| c == 3));
    }

    #[test]
    fn biregular_determinism_and_validation() {
        let a = random_biregular(6, 4, 2, 3, 9).unwrap();
        let b = random_biregular(6, 4, 2, 3, 9).unwrap();
        for v in 0..6 {
            assert_eq!(a.neighbors_of_left(v), b.neighbors_of_left(v));
        }
        assert!(random_biregular(6, 4, 2, 2, 0).is_err()); // 12 != 8
    }

    #[test]
    fn six_cycle_as_biregular_has_sigma2_one() {
        // C6 with left {0,2,4} -> local 0,1,2 and right {1,3,5} -> 0,1,2
        let adj_left = vec![vec![0, 2], vec![0, 1], vec![1, 2]];
        let g = BipartiteGraph::from_left_adjacency(3, adj_left).unwrap();
        assert_relative_eq!(g.second_singular().unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn top_singular_value_checked_on_random_instances() {
        for seed in 0..5 {
            let g = random_biregular(12, 8, 2, 3, seed).unwrap();
            // second_singular errors if sigma_1 deviates from sqrt(d1 d2)
            let s = g.second_singular().unwrap();
            assert!(s >= 0.0 && s < ((g.d1() * g.d2()) as f64).sqrt());
        }
    }

    #[test]
    fn bipartite_power_iteration_agrees_with_dense() {
        let g = random_biregular(90, 60, 2, 3, 21).unwrap();
        let (s1d, s2d) = g.singular_dense();
        let (s1p, s2p) = g.singular_power();
        assert_relative_eq!(s1d, s1p, epsilon = 1e-8);
        assert_relative_eq!(s2d, s2p, epsilon = 1e-5, max_relative = 1e-5);
    }
}
