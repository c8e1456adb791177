//! Fuzz the hypergraph mixing inequality: for random subset tuples the
//! crossing-count discrepancy must stay below the spectral bound, which in
//! turn stays below the crude `(2t-3) lambda / (4d)` cap.
//!
//! Run with `cargo run --release --example mixing_fuzz`.

use hypermax::experiment::build_chain;
use hypermax::{build_walk_hypergraph, random_regular, random_subsets};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hypermax::Result<()> {
    let trials = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0);

    println!("walk hypergraphs of a 7-regular graph on 60 vertices:");
    let g = random_regular(60, 7, 1)?;
    let lambda = g.second_eigenvalue()?;
    println!("  lambda = {lambda:.4}, d = 7");
    for t in [2usize, 3, 4] {
        let h = build_walk_hypergraph(g.clone(), t)?;
        let mut worst_margin = f64::INFINITY;
        let mut max_disc = 0.0f64;
        let mut violations = 0usize;
        for _ in 0..trials {
            let subsets = random_subsets(&h.dims(), &mut rng);
            let disc = h.discrepancy(&subsets)?;
            let (tight, crude) = h.mixing_bounds(&subsets)?;
            if disc > tight + 1e-12 {
                violations += 1;
            }
            assert!(tight <= crude + 1e-12);
            worst_margin = worst_margin.min(tight - disc);
            max_disc = max_disc.max(disc);
        }
        println!(
            "  t = {t}: |E| = {:7}, {trials} trials, {violations} violations, max discrepancy {max_disc:.5}, slimmest margin {worst_margin:.5}",
            h.edge_count()
        );
    }

    println!("\nquasi-regular chain hypergraph (three biregular links):");
    let h = build_chain(&[60, 40, 30, 20], &[(2, 3), (3, 4), (2, 3)], 5)?;
    let lambdas = h.link_lambdas()?;
    println!("  link lambdas = {lambdas:?}");
    let mut violations = 0usize;
    let mut max_disc = 0.0f64;
    for _ in 0..trials {
        let subsets = random_subsets(&h.dims(), &mut rng);
        let disc = h.discrepancy(&subsets)?;
        let (tight, crude) = h.mixing_bounds(&subsets)?;
        if disc > tight + 1e-12 {
            violations += 1;
        }
        assert!(tight <= crude + 1e-12);
        max_disc = max_disc.max(disc);
    }
    println!(
        "  t = 4: |E| = {}, {trials} trials, {violations} violations, max discrepancy {max_disc:.5}",
        h.edge_count()
    );
    Ok(())
}
