//! End-to-end completion of a rank-3 tensor observed along the walks of a
//! random regular expander, with the per-iteration trace and the spectral
//! error bound.
//!
//! Run with `cargo run --release --example complete_small`.

use hypermax::{
    build_walk_hypergraph, coordinate_descent, error_bound_rhs, exact_gen_error, gen_synthetic,
    maxqnorm_upper, random_regular, sample_observations, SolverConfig,
};

fn main() -> hypermax::Result<()> {
    let (n, t, d, r_truth, r_fit) = (20usize, 3usize, 7usize, 3usize, 8usize);

    let graph = random_regular(n, d, 1)?;
    let lambda = graph.second_eigenvalue()?;
    let hyper = build_walk_hypergraph(graph, t)?;
    let mask = hyper.materialize()?;
    println!(
        "sampling {} of {} entries ({:.2}%) along walks of a {d}-regular graph, lambda = {lambda:.4}",
        mask.len(),
        n.pow(t as u32),
        100.0 * mask.len() as f64 / n.pow(t as u32) as f64
    );

    let (truth, dense) = gen_synthetic(&vec![n; t], r_truth, 42)?;
    let obs = sample_observations(&truth, &mask, 0.0, 7)?;

    let mut cfg = SolverConfig::new(r_fit);
    cfg.delta = 0.05 * (mask.len() as f64).sqrt();
    cfg.seed = 3;
    let (estimate, trace) = coordinate_descent(&obs, &cfg)?;

    println!("\n iter      cost      residual      mu    maxq bound");
    for row in trace.rows.iter().step_by(25) {
        println!(
            "{:5}  {:>10.4e}  {:>10.4e}  {:.4}  {:>10.4}",
            row.iter, row.cost, row.resid_norm, row.mu, row.maxq_ub
        );
    }
    let last = trace.rows.last().unwrap();
    println!(
        "{:5}  {:>10.4e}  {:>10.4e}  {:.4}  {:>10.4}   (final)",
        last.iter, last.cost, last.resid_norm, last.mu, last.maxq_ub
    );

    let (gen_error, truth_msq) = exact_gen_error(dense.as_ref().unwrap(), &estimate);
    let maxq_truth = maxqnorm_upper(&truth);
    let rhs = error_bound_rhs(t, maxq_truth, lambda, d as f64);
    println!("\ngeneralization error     = {gen_error:.4}");
    println!(
        "mean squared error       = {:.6}",
        gen_error * gen_error * truth_msq
    );
    println!("spectral error bound     = {rhs:.2}");
    println!("max-qnorm bound truth    = {maxq_truth:.4}");
    println!(
        "max-qnorm bound estimate = {:.4}",
        maxqnorm_upper(&estimate)
    );
    Ok(())
}
