//! Generate random regular and bipartite biregular graphs and measure how
//! close their second eigenvalues sit to the Ramanujan threshold.
//!
//! Run with `cargo run --example expander_spectra`.

use hypermax::{ramanujan_threshold, random_biregular, random_regular};

fn main() -> hypermax::Result<()> {
    println!("d-regular graphs on n = 200 vertices (5 seeds each):");
    for d in [3usize, 7, 11] {
        let threshold = ramanujan_threshold(d);
        let mut lambdas = Vec::new();
        for seed in 0..5 {
            let g = random_regular(200, d, seed)?;
            lambdas.push(g.second_eigenvalue()?);
        }
        let within = lambdas.iter().filter(|&&l| l <= threshold + 0.2).count();
        println!(
            "  d = {d:2}: lambda in [{:.4}, {:.4}], threshold 2*sqrt(d-1) = {threshold:.4}, {within}/5 within +0.2",
            lambdas.iter().cloned().fold(f64::INFINITY, f64::min),
            lambdas.iter().cloned().fold(0.0f64, f64::max),
        );
    }

    println!("\nbipartite biregular graphs:");
    for (n1, n2, d1, d2) in [(60, 40, 2, 3), (80, 60, 3, 4), (50, 50, 5, 5)] {
        let g = random_biregular(n1, n2, d1, d2, 7)?;
        let lambda = g.second_singular()?;
        let threshold = ((d1 as f64) - 1.0).sqrt() + ((d2 as f64) - 1.0).sqrt();
        println!(
            "  ({d1},{d2})-biregular on {n1}+{n2}: lambda = {lambda:.4}, threshold sqrt(d1-1)+sqrt(d2-1) = {threshold:.4}"
        );
    }
    Ok(())
}
