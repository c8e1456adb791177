//! The bound calculators: rank and incoherence bounds on the
//! max-quasinorm, the completion error constant, and the sample-count
//! factor they imply.
//!
//! Run with `cargo run --example bounds_report`.

use hypermax::{
    error_bound_constant, error_bound_rhs_quasi, incoherent_bound, rank_bound,
    sample_complexity_factor,
};

fn main() -> hypermax::Result<()> {
    println!("max-qnorm upper bound vs rank, |T|_inf = 1:");
    for t in 2..=4 {
        for r in [1usize, 2, 4, 8] {
            print!("  t={t} r={r}: {:>12.4}", rank_bound(t, r)?);
        }
        println!();
    }

    println!("\nincoherent tensors (C = 1): bound C^t r^(t/2)");
    for t in 2..=4 {
        for r in [1usize, 4, 16] {
            print!("  t={t} r={r}: {:>8.2}", incoherent_bound(1.0, t, r)?);
        }
        println!();
    }

    println!("\ncompletion error constant C_t = 2^t (2t-3) K_G^(t-1):");
    for t in 2..=5 {
        println!("  C_{t} = {:.4}", error_bound_constant(t));
    }

    println!("\nsample-count factor r^(2(t-1)(t^2-t-1)) / eps^(2(t-1)),");
    println!("big-O constant omitted (eps = mean squared error target):");
    for (t, r, eps) in [(2usize, 3usize, 0.01), (3, 2, 0.01), (3, 3, 0.1)] {
        println!(
            "  t={t} r={r} eps={eps}: {:.3e}",
            sample_complexity_factor(t, r, eps)?
        );
    }

    println!("\nquasi-regular error bound for a 3-link chain, maxq = 2:");
    let rhs = error_bound_rhs_quasi(4, 2.0, &[2.1, 2.9, 2.2], &[2, 3, 3, 4, 2, 3]);
    println!("  rhs = {rhs:.4}");
    Ok(())
}
