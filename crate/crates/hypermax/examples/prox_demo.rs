//! The proximal operator of the 2,inf norm: rows whose Euclidean norm sits
//! at the top get shrunk toward a common level, the rest are untouched.
//!
//! Run with `cargo run --example prox_demo`.

use hypermax::{proj_dual_ball, prox_two_inf, two_inf_norm};
use ndarray::array;

fn main() {
    let x = array![
        [3.0, 4.0],  // norm 5
        [0.5, 0.0],  // norm 0.5
        [-2.0, 2.0], // norm 2.83
        [0.0, 4.5],  // norm 4.5
    ];
    println!("input row norms:");
    for row in x.rows() {
        println!(
            "  {:?} -> {:.4}",
            row.to_vec(),
            row.iter().map(|v| v * v).sum::<f64>().sqrt()
        );
    }
    for s in [0.5, 1.0, 3.0] {
        let y = prox_two_inf(&x, s);
        println!(
            "\nprox with scale s = {s}: 2,inf norm {:.4} -> {:.4}",
            two_inf_norm(&x),
            two_inf_norm(&y)
        );
        for row in y.rows() {
            println!(
                "  [{:+.4}, {:+.4}] norm {:.4}",
                row[0],
                row[1],
                row.iter().map(|v| v * v).sum::<f64>().sqrt()
            );
        }
        // Moreau decomposition: prox + s * dual-ball projection = identity
        let dual = proj_dual_ball(&x.mapv(|v| v / s), 1.0) * s;
        let recon = &y + &dual;
        let err = recon
            .iter()
            .zip(x.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        println!("  Moreau identity residual: {err:.2e}");
    }
}
