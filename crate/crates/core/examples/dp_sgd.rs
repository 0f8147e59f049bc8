//! One DP-SGD aggregation step: per-example clipping followed by Gaussian
//! noise on the summed gradient.
//!
//! Run with `cargo run --example dp_sgd`.

use htmia::theory::{dp_sgd_step, GradientBatch};

fn main() {
    let gradients = vec![vec![3.0, 4.0], vec![0.3, -0.4], vec![-6.0, 8.0]];
    for sigma in [0.0, 1.0] {
        let batch = GradientBatch {
            gradients: gradients.clone(),
            clip_norm: 1.0,
            noise_multiplier: sigma,
            seed: 42,
        };
        let out = dp_sgd_step(&batch).unwrap();
        println!("sigma {sigma}: clipped norms {:?}", out.clipped_norms);
        println!("          noisy mean {:?}", out.noisy_mean);
    }
}
