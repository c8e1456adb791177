//! Dense tensors, CP factor sets, matricization, and the matrix products
//! (Khatri-Rao, Kronecker, Hadamard) used throughout the crate.
//!
//! Storage order is lexicographic with the **last index varying fastest**
//! (row-major). All indices are 0-based; file formats and public APIs share
//! this convention.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Hard cap on materialized dense tensors (entries).
pub const MAX_DENSE_ENTRIES: usize = 100_000_000;

/// Order-`t` dense tensor with explicit dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    values: Vec<f64>,
}

/// Visit every multi-index of `dims` in storage order (last index fastest).
pub fn for_each_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    if dims.contains(&0) {
        return;
    }
    let t = dims.len();
    let mut idx = vec![0usize; t];
    loop {
        f(&idx);
        // odometer increment
        let mut axis = t;
        while axis > 0 {
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < dims[axis] {
                break;
            }
            idx[axis] = 0;
            if axis == 0 {
                return;
            }
        }
    }
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "tensor order must be >= 2, got {}",
            dims.len()
        )));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidArgument("zero-length dimension".into()));
    }
    let len = dims
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::SizeCap("entry count overflows usize".into()))?;
    if len > MAX_DENSE_ENTRIES {
        return Err(Error::SizeCap(format!(
            "{len} entries exceeds dense cap of {MAX_DENSE_ENTRIES}"
        )));
    }
    Ok(len)
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if values.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for dims {:?}, got {}",
                len,
                dims,
                values.len()
            )));
        }
        Ok(Self { dims, values })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = check_dims(&dims)?;
        Ok(Self {
            dims,
            values: vec![0.0; len],
        })
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = check_dims(&dims)?;
        let mut values = Vec::with_capacity(len);
        for_each_index(&dims, |idx| values.push(f(idx)));
        Ok(Self { dims, values })
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Flat offset of a multi-index (last index fastest).
    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut off = 0usize;
        for (i, &j) in idx.iter().enumerate() {
            debug_assert!(j < self.dims[i]);
            off = off * self.dims[i] + j;
        }
        off
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let off = self.offset(idx);
        self.values[off] = v;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn inf_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }
}

/// Entrywise product of two same-shaped tensors.
pub fn hadamard(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    if a.dims() != b.dims() {
        return Err(Error::ShapeMismatch(format!(
            "hadamard: dims {:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let values = a.values.iter().zip(&b.values).map(|(x, y)| x * y).collect();
    DenseTensor::new(a.dims.clone(), values)
}

/// Kronecker product of two order-`t` tensors.
///
/// Output has dims `n_i * m_i`; in 0-based indices the entry at
/// `k_s = j_s + m_s * i_s` equals `a[i] * b[j]`.
pub fn kronecker(a: &DenseTensor, b: &DenseTensor) -> Result<DenseTensor> {
    if a.order() != b.order() {
        return Err(Error::ShapeMismatch(format!(
            "kronecker: order {} vs {}",
            a.order(),
            b.order()
        )));
    }
    let t = a.order();
    let dims: Vec<usize> = (0..t).map(|s| a.dims[s] * b.dims[s]).collect();
    let mut out = DenseTensor::zeros(dims)?;
    let mut k = vec![0usize; t];
    for_each_index(&a.dims, |i| {
        let av = a.get(i);
        for_each_index(&b.dims, |j| {
            for s in 0..t {
                k[s] = j[s] + b.dims[s] * i[s];
            }
            let off = out.offset(&k);
            out.values[off] = av * b.get(j);
        });
    });
    Ok(out)
}

/// CP factor set: `t` matrices, the `i`-th of shape `n_i x r`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSet {
    factors: Vec<Array2<f64>>,
}

impl FactorSet {
    pub fn new(factors: Vec<Array2<f64>>) -> Result<Self> {
        if factors.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "factor set order must be >= 2, got {}",
                factors.len()
            )));
        }
        let r = factors[0].ncols();
        if r == 0 {
            return Err(Error::InvalidArgument("rank must be >= 1".into()));
        }
        for (i, f) in factors.iter().enumerate() {
            if f.ncols() != r {
                return Err(Error::ShapeMismatch(format!(
                    "factor {i} has {} columns, expected {r}",
                    f.ncols()
                )));
            }
            if f.nrows() == 0 {
                return Err(Error::InvalidArgument(format!("factor {i} has no rows")));
            }
        }
        Ok(Self { factors })
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn rank(&self) -> usize {
        self.factors[0].ncols()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.nrows()).collect()
    }

    pub fn factors(&self) -> &[Array2<f64>] {
        &self.factors
    }

    pub fn factor(&self, mode: usize) -> &Array2<f64> {
        &self.factors[mode]
    }

    pub fn factor_mut(&mut self, mode: usize) -> &mut Array2<f64> {
        &mut self.factors[mode]
    }

    pub fn set_factor(&mut self, mode: usize, f: Array2<f64>) -> Result<()> {
        if f.ncols() != self.rank() || f.nrows() != self.factors[mode].nrows() {
            return Err(Error::ShapeMismatch(format!(
                "replacement factor {}x{} does not match {}x{}",
                f.nrows(),
                f.ncols(),
                self.factors[mode].nrows(),
                self.rank()
            )));
        }
        self.factors[mode] = f;
        Ok(())
    }

    /// Single entry `sum_l prod_i U^(i)[j_i, l]`.
    pub fn entry(&self, idx: &[usize]) -> f64 {
        let r = self.rank();
        let mut acc = 0.0;
        for l in 0..r {
            let mut p = 1.0;
            for (i, &j) in idx.iter().enumerate() {
                p *= self.factors[i][(j, l)];
            }
            acc += p;
        }
        acc
    }

    /// Materialize the full tensor.
    pub fn evaluate(&self) -> Result<DenseTensor> {
        let dims = self.dims();
        DenseTensor::from_fn(dims, |idx| self.entry(idx))
    }
}

/// Mode-`mode` matricization (0-based mode).
///
/// Column index of the multi-index `(j_1, ..., j_t)` is
/// `k = sum_{s != mode} j_s * N_s` with `N_s = prod_{m < s, m != mode} n_m`,
/// so the lowest non-mode axis varies fastest along columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MatricizedView {
    pub mode: usize,
    pub matrix: Array2<f64>,
}

fn matricize_strides(dims: &[usize], mode: usize) -> Vec<usize> {
    let t = dims.len();
    let mut strides = vec![0usize; t];
    let mut acc = 1usize;
    for s in 0..t {
        if s == mode {
            continue;
        }
        strides[s] = acc;
        acc *= dims[s];
    }
    strides
}

pub fn matricize(tensor: &DenseTensor, mode: usize) -> Result<MatricizedView> {
    let t = tensor.order();
    if mode >= t {
        return Err(Error::InvalidArgument(format!(
            "mode {mode} out of range for order-{t} tensor"
        )));
    }
    let dims = tensor.dims();
    let ncols: usize = dims
        .iter()
        .enumerate()
        .filter(|&(s, _)| s != mode)
        .map(|(_, &n)| n)
        .product();
    let strides = matricize_strides(dims, mode);
    let mut matrix = Array2::<f64>::zeros((dims[mode], ncols));
    for_each_index(dims, |idx| {
        let k: usize = idx
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != mode)
            .map(|(s, &j)| j * strides[s])
            .sum();
        matrix[(idx[mode], k)] = tensor.get(idx);
    });
    Ok(MatricizedView { mode, matrix })
}

/// Inverse of [`matricize`] for the given tensor dims.
pub fn unmatricize(view: &MatricizedView, dims: &[usize]) -> Result<DenseTensor> {
    let t = dims.len();
    let mode = view.mode;
    if mode >= t {
        return Err(Error::InvalidArgument(format!(
            "mode {mode} out of range for order-{t} dims"
        )));
    }
    let ncols: usize = dims
        .iter()
        .enumerate()
        .filter(|&(s, _)| s != mode)
        .map(|(_, &n)| n)
        .product();
    if view.matrix.nrows() != dims[mode] || view.matrix.ncols() != ncols {
        return Err(Error::ShapeMismatch(format!(
            "matricized shape {}x{} does not match dims {:?} at mode {mode}",
            view.matrix.nrows(),
            view.matrix.ncols(),
            dims
        )));
    }
    let strides = matricize_strides(dims, mode);
    let mut out = DenseTensor::zeros(dims.to_vec())?;
    for_each_index(dims, |idx| {
        let k: usize = idx
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != mode)
            .map(|(s, &j)| j * strides[s])
            .sum();
        let off = out.offset(idx);
        out.values[off] = view.matrix[(idx[mode], k)];
    });
    Ok(out)
}

/// Khatri-Rao (matching columnwise Kronecker) product.
///
/// For `a: m x n` and `b: l x n`, the result is `ml x n` with
/// `(a ⊙ b)[b_row + l * a_row, j] = a[a_row, j] * b[b_row, j]`,
/// i.e. the second operand's row index varies fastest.
pub fn khatri_rao(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    if a.ncols() != b.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "khatri_rao: column counts {} vs {}",
            a.ncols(),
            b.ncols()
        )));
    }
    let (m, n) = (a.nrows(), a.ncols());
    let l = b.nrows();
    let mut out = Array2::<f64>::zeros((m * l, n));
    for ar in 0..m {
        for br in 0..l {
            let row = br + l * ar;
            for j in 0..n {
                out[(row, j)] = a[(ar, j)] * b[(br, j)];
            }
        }
    }
    Ok(out)
}

/// Khatri-Rao product of all factors except `mode`, taken in descending
/// mode order `U^(t-1) ⊙ ... ⊙ U^(0)` (skipping `mode`). Row indexing then
/// matches the matricization column convention, so
/// `matricize(evaluate(f), mode).matrix == f.factor(mode) * K^T`.
pub fn khatri_rao_skip(factors: &FactorSet, mode: usize) -> Result<Array2<f64>> {
    let t = factors.order();
    if mode >= t {
        return Err(Error::InvalidArgument(format!(
            "mode {mode} out of range for order-{t} factor set"
        )));
    }
    let mut acc: Option<Array2<f64>> = None;
    for i in (0..t).rev() {
        if i == mode {
            continue;
        }
        acc = Some(match acc {
            None => factors.factor(i).clone(),
            Some(prev) => khatri_rao(&prev, factors.factor(i))?,
        });
    }
    Ok(acc.expect("order >= 2 leaves at least one factor"))
}

/// Maximum Euclidean norm over the rows of a matrix (the 2,inf norm).
pub fn two_inf_norm(a: &Array2<f64>) -> f64 {
    let mut best = 0.0f64;
    for row in a.rows() {
        let norm2: f64 = row.iter().map(|v| v * v).sum();
        best = best.max(norm2);
    }
    best.sqrt()
}

/// Matricized-tensor times Khatri-Rao product over a sparse residual.
///
/// `edges` holds `values.len()` index tuples of length `t` flattened
/// back-to-back. Returns `R_[mode] * K^(-mode)` without materializing the
/// Khatri-Rao factor; cost is `O(len * r * t)`. Accumulation order is fixed
/// (sequential over entries), so results are deterministic.
pub fn mttkrp(
    edges: &[u32],
    values: &[f64],
    factors: &FactorSet,
    mode: usize,
) -> Result<Array2<f64>> {
    let t = factors.order();
    if mode >= t {
        return Err(Error::InvalidArgument(format!(
            "mode {mode} out of range for order-{t} factor set"
        )));
    }
    if edges.len() != values.len() * t {
        return Err(Error::ShapeMismatch(format!(
            "edge buffer length {} does not match {} entries of arity {t}",
            edges.len(),
            values.len()
        )));
    }
    let dims = factors.dims();
    let r = factors.rank();
    let mut out = Array2::<f64>::zeros((dims[mode], r));
    let mut row = vec![0.0f64; r];
    for (e, &v) in values.iter().enumerate() {
        let tuple = &edges[e * t..(e + 1) * t];
        for (i, &ji) in tuple.iter().enumerate() {
            if (ji as usize) >= dims[i] {
                return Err(Error::InvalidArgument(format!(
                    "entry {e}: index {ji} out of bounds for axis {i} (dim {})",
                    dims[i]
                )));
            }
        }
        row.iter_mut().for_each(|x| *x = v);
        for (i, &ji) in tuple.iter().enumerate() {
            if i == mode {
                continue;
            }
            let frow = factors.factor(i).row(ji as usize);
            let frow = frow.as_slice().expect("factor rows are contiguous");
            for (x, &u) in row.iter_mut().zip(frow) {
                *x *= u;
            }
        }
        let target = tuple[mode] as usize;
        let mut orow = out.row_mut(target);
        let orow = orow.as_slice_mut().expect("output rows are contiguous");
        for (o, &x) in orow.iter_mut().zip(&row) {
            *o += x;
        }
    }
    Ok(out)
}
