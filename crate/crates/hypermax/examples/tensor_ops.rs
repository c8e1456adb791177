//! Core tensor arithmetic: CP evaluation, matricization, Khatri-Rao and
//! Kronecker products, and the norms used by the completion machinery.
//!
//! Run with `cargo run --example tensor_ops`.

use hypermax::{
    khatri_rao_skip, kronecker, matricize, two_inf_norm, unmatricize, DenseTensor, FactorSet,
};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> hypermax::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let dims = [4usize, 3, 5];
    let r = 2;

    let factors: Vec<Array2<f64>> = dims
        .iter()
        .map(|&n| Array2::from_shape_fn((n, r), |_| rng.gen_range(-1.0..1.0)))
        .collect();
    let f = FactorSet::new(factors)?;
    let t = f.evaluate()?;
    println!("CP model with dims {:?} and rank {r}", t.dims());
    println!("  frobenius norm  = {:.6}", t.frobenius_norm());
    println!("  entrywise max   = {:.6}", t.inf_norm());
    println!(
        "  factor 2,inf norms = {:?}",
        f.factors().iter().map(two_inf_norm).collect::<Vec<_>>()
    );

    // matricizing along each mode and folding back is lossless
    for mode in 0..3 {
        let m = matricize(&t, mode)?;
        let back = unmatricize(&m, t.dims())?;
        assert_eq!(back, t);
        println!(
            "  mode-{mode} matricization is {}x{} (roundtrip ok)",
            m.matrix.nrows(),
            m.matrix.ncols()
        );
    }

    // the mode-0 matricization factors through the Khatri-Rao product of
    // the remaining factors taken in descending mode order
    let k = khatri_rao_skip(&f, 0)?;
    let lhs = matricize(&t, 0)?.matrix;
    let rhs = f.factor(0).dot(&k.t());
    let max_diff = lhs
        .iter()
        .zip(rhs.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("  |T_[0] - U0 K^T|_max = {max_diff:.2e}");

    // Kronecker products multiply entrywise maxima
    let s = DenseTensor::from_fn(vec![2, 2, 2], |_| rng.gen_range(-1.0..1.0))?;
    let ts = kronecker(&t, &s)?;
    println!(
        "  |T (x) S|_inf = {:.6} = |T|_inf * |S|_inf = {:.6}",
        ts.inf_norm(),
        t.inf_norm() * s.inf_norm()
    );
    Ok(())
}
