//! Train on synthetic blobs and dump the solved dual as JSON. Output is
//! bit-identical with and without the `parallel` feature:
//!
//!   cargo run -p gbsvm --example train_blobs
//!   cargo run -p gbsvm --example train_blobs --no-default-features

use gbsvm::experiment::{self, ExperimentConfig};
use gbsvm::PsoConfig;

fn main() -> gbsvm::Result<()> {
    let ds = experiment::gaussian_blobs(200, 4.0, 7)?.normalize_minmax();
    let cfg = ExperimentConfig {
        pso: PsoConfig { pop: 50, max_iter: 120, seed: 7, ..Default::default() },
        ..Default::default()
    };
    let trained = experiment::train_gbsvm(&ds, &cfg, 7)?;
    let s = &trained.solution;
    println!("balls: {}", trained.ball_count);
    println!("objective: {:.17e}", s.objective);
    println!("w: {:?}", s.w.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    println!("b: {}", s.b.to_bits());
    println!(
        "alpha_head: {:?}",
        s.alpha.iter().take(8).map(|v| v.to_bits()).collect::<Vec<_>>()
    );
    println!("support: {:?}", s.support_ids);
    Ok(())
}
