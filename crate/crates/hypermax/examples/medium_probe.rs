//! scratch probe for the n=400 t=4 configuration
use hypermax::*;

fn main() {
    let n = 400usize; let t = 4usize; let d = 12usize;
    let g = random_regular(n, d, 999).unwrap();
    let lambda = g.second_eigenvalue().unwrap();
    let h = build_walk_hypergraph(g, t).unwrap();
    let mask = h.materialize().unwrap();
    eprintln!("lambda={lambda:.3} |E|={}", mask.len());
    let (truth, _) = gen_synthetic(&vec![n; t], 3, 999).unwrap();
    let obs = sample_observations(&truth, &mask, 0.0, 999).unwrap();
    let mut cfg = SolverConfig::new(16);
    cfg.delta = 0.05 * (mask.len() as f64).sqrt();
    cfg.outer_iters = 271;
    cfg.seed = 999;
    let t0 = std::time::Instant::now();
    let (fhat, trace) = coordinate_descent(&obs, &cfg).unwrap();
    for row in trace.rows.iter().step_by(10) {
        eprintln!("{:3} cost={:.5e} resid={:.4e} mu={:.4} maxq={:.4} [{:.0}s]", row.iter, row.cost, row.resid_norm, row.mu, row.maxq_ub, row.seconds);
    }
    let last = trace.rows.last().unwrap();
    eprintln!("last {:3} cost={:.5e} resid={:.4e} mu={:.4} maxq={:.4}", last.iter, last.cost, last.resid_norm, last.mu, last.maxq_ub);
    let (gen, msq, se) = estimated_gen_error(&truth, &fhat, &mask, 1_000_000, 7);
    eprintln!("gen={gen:.4} (se {se:.5}) truth_msq={msq:.4} maxq_truth={:.3} wall={:.0}s", maxqnorm_upper(&truth), t0.elapsed().as_secs_f64());
}
