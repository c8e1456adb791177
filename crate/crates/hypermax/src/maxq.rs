//! Max-quasinorm bounds and sign-tensor combinatorics.
//!
//! The true max-quasinorm of a tensor is never computed here (no tractable
//! algorithm is known); everything works with certified upper bounds from
//! explicit CP factorizations and the entrywise-infinity lower bound.

use crate::error::{Error, Result};
use crate::tensor::{two_inf_norm, FactorSet};

/// Upper bound on Grothendieck's constant over the reals used in all
/// error-bound computations.
pub const GROTHENDIECK_BOUND: f64 = 1.783;

/// Certified upper bound on the max-quasinorm of `evaluate(f)`:
/// the product of the factors' 2,inf norms.
pub fn maxqnorm_upper(f: &FactorSet) -> f64 {
    f.factors().iter().map(two_inf_norm).product()
}

/// Rank-based bound `r^((t^2 - t - 1)/2)` relating the max-quasinorm of a
/// rank-`r` order-`t` tensor to its entrywise infinity norm.
pub fn rank_bound(t: usize, r: usize) -> Result<f64> {
    if t < 2 {
        return Err(Error::InvalidArgument(format!("t must be >= 2, got {t}")));
    }
    if r < 1 {
        return Err(Error::InvalidArgument(format!("r must be >= 1, got {r}")));
    }
    let exponent = (t * t - t - 1) as f64 / 2.0;
    let value = (r as f64).powf(exponent);
    if !value.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "rank bound overflows for t = {t}, r = {r}"
        )));
    }
    Ok(value)
}

/// Incoherence-based bound `C^t * r^(t/2)` on the max-quasinorm of a
/// `C`-incoherent rank-`r` tensor.
pub fn incoherent_bound(c: f64, t: usize, r: usize) -> Result<f64> {
    if c <= 0.0 {
        return Err(Error::InvalidArgument("C must be positive".into()));
    }
    if t < 2 || r < 1 {
        return Err(Error::InvalidArgument("need t >= 2 and r >= 1".into()));
    }
    Ok(c.powi(t as i32) * (r as f64).powf(t as f64 / 2.0))
}

/// Completion error constant `C_t = 2^t (2t - 3) K_G^(t-1)`.
pub fn error_bound_constant(t: usize) -> f64 {
    assert!(t >= 2);
    2f64.powi(t as i32) * (2.0 * t as f64 - 3.0) * GROTHENDIECK_BOUND.powi(t as i32 - 1)
}

/// Right-hand side `C_t * maxq^2 * lambda / d` of the mean-squared-error
/// bound for completion sampled on a walk hypergraph.
pub fn error_bound_rhs(t: usize, maxq: f64, lambda: f64, d: f64) -> f64 {
    error_bound_constant(t) * maxq * maxq * lambda / d
}

/// Right-hand side of the mean-squared-error bound for completion sampled
/// on a quasi-regular chain:
/// `2^t K_G^(t-1) (lambda_1/sqrt(d1 d2) + sum_k 2 lambda_k/sqrt(d_{2k-1} d_{2k}))
///  * maxq^2`.
pub fn error_bound_rhs_quasi(t: usize, maxq: f64, lambdas: &[f64], ds: &[usize]) -> f64 {
    assert_eq!(lambdas.len(), t - 1);
    assert_eq!(ds.len(), 2 * (t - 1));
    let mut spectral = lambdas[0] / ((ds[0] * ds[1]) as f64).sqrt();
    for k in 1..t - 1 {
        spectral += 2.0 * lambdas[k] / ((ds[2 * k] * ds[2 * k + 1]) as f64).sqrt();
    }
    2f64.powi(t as i32) * GROTHENDIECK_BOUND.powi(t as i32 - 1) * spectral * maxq * maxq
}

/// All length-`t` binary strings with an even number of ones, in
/// lexicographic order. There are exactly `2^(t-1)` of them.
pub fn even_strings(t: usize) -> Result<Vec<Vec<bool>>> {
    if t < 2 {
        return Err(Error::InvalidArgument(format!("t must be >= 2, got {t}")));
    }
    if t > 62 {
        return Err(Error::SizeCap(format!(
            "t = {t} enumerates too many strings"
        )));
    }
    let mut out = Vec::with_capacity(1usize << (t - 1));
    for bits in 0u64..(1u64 << t) {
        if bits.count_ones() % 2 == 0 {
            // bit 0 of the counter is the last string position, so counting
            // up gives lexicographic order on the strings.
            let string: Vec<bool> = (0..t).map(|i| bits >> (t - 1 - i) & 1 == 1).collect();
            out.push(string);
        }
    }
    Ok(out)
}

/// `t` sign vectors defining a rank-1 sign tensor `s_1 o ... o s_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignVectorTuple {
    vectors: Vec<Vec<i8>>,
}

impl SignVectorTuple {
    pub fn new(vectors: Vec<Vec<i8>>) -> Result<Self> {
        if vectors.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least 2 sign vectors".into(),
            ));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.is_empty() {
                return Err(Error::InvalidArgument(format!("sign vector {i} is empty")));
            }
            if v.iter().any(|&s| s != 1 && s != -1) {
                return Err(Error::InvalidArgument(format!(
                    "sign vector {i} has an entry other than +-1"
                )));
            }
        }
        Ok(Self { vectors })
    }

    pub fn order(&self) -> usize {
        self.vectors.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.vectors.iter().map(|v| v.len()).collect()
    }

    pub fn vector(&self, i: usize) -> &[i8] {
        &self.vectors[i]
    }

    /// Entry of the rank-1 sign tensor at `idx`.
    pub fn entry(&self, idx: &[usize]) -> i8 {
        let mut s = 1i8;
        for (i, &j) in idx.iter().enumerate() {
            s *= self.vectors[i][j];
        }
        s
    }
}

/// Decomposition of the shifted sign tensor `S' = (S + J)/2` into
/// `2^(t-1)` indicator rank-1 terms, one per even string.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorDecomposition {
    /// `terms[j][i]` is the subset of axis-`i` indices for even string `j`.
    pub terms: Vec<Vec<Vec<usize>>>,
}

impl IndicatorDecomposition {
    /// Evaluate `sum_j prod_i 1_{W_{i,j}}` at a multi-index.
    pub fn entry(&self, idx: &[usize]) -> u64 {
        let mut total = 0u64;
        for term in &self.terms {
            if term
                .iter()
                .zip(idx)
                .all(|(subset, j)| subset.binary_search(j).is_ok())
            {
                total += 1;
            }
        }
        total
    }
}

/// Decompose `S' = (S + J)/2` of a rank-1 sign tensor into indicator
/// rank-1 terms indexed by the even strings: the `i`-th subset of string
/// `w` is `W_i = { j : s_i(j) = -1 }` when `w_i = 1` and its complement
/// otherwise.
pub fn sign_decompose(s: &SignVectorTuple) -> IndicatorDecomposition {
    let t = s.order();
    let negatives: Vec<Vec<usize>> = (0..t)
        .map(|i| {
            s.vector(i)
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v == -1)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let positives: Vec<Vec<usize>> = (0..t)
        .map(|i| {
            s.vector(i)
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v == 1)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let strings = even_strings(t).expect("order checked at construction");
    let terms = strings
        .iter()
        .map(|w| {
            (0..t)
                .map(|i| {
                    if w[i] {
                        negatives[i].clone()
                    } else {
                        positives[i].clone()
                    }
                })
                .collect()
        })
        .collect();
    IndicatorDecomposition { terms }
}
