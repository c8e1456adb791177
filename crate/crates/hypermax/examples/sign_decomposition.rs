//! Decompose a shifted rank-1 sign tensor into indicator rank-1 terms
//! indexed by the even binary strings, and verify the reconstruction.
//!
//! Run with `cargo run --example sign_decomposition`.

use hypermax::{even_strings, for_each_index, sign_decompose, SignVectorTuple};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> hypermax::Result<()> {
    for t in 2..=6 {
        let strings = even_strings(t)?;
        println!("t = {t}: {} even strings", strings.len());
    }
    let shown: Vec<String> = even_strings(3)?
        .iter()
        .map(|w| w.iter().map(|&b| if b { '1' } else { '0' }).collect())
        .collect();
    println!("even strings for t = 3: {}", shown.join(", "));

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let vectors: Vec<Vec<i8>> = (0..4)
        .map(|_| {
            (0..6)
                .map(|_| if rng.gen::<bool>() { 1 } else { -1 })
                .collect()
        })
        .collect();
    let s = SignVectorTuple::new(vectors)?;
    let dec = sign_decompose(&s);
    println!(
        "\nrank-1 sign tensor with dims {:?}: {} indicator terms",
        s.dims(),
        dec.terms.len()
    );

    let mut checked = 0usize;
    let mut ones = 0usize;
    for_each_index(&s.dims(), |idx| {
        let shifted = (s.entry(idx) as i64 + 1) / 2;
        assert_eq!(dec.entry(idx) as i64, shifted);
        checked += 1;
        ones += shifted as usize;
    });
    println!("reconstruction exact on all {checked} entries ({ones} ones)");
    Ok(())
}
