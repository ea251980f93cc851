//! Probe the learned latent safety embedding.
//!
//! Trains briefly on the bundled dataset, then examines the encoder/decoder
//! pair: how the latent mean moves as one safety parameter (obstacle radius)
//! sweeps through its range, and how well the decoder reconstructs held-out
//! safety configurations. The latent code is what the policy actually sees,
//! so structure here — distinct configurations mapping to distinct codes —
//! is what lets one trained policy adapt across scenarios.
//!
//! ```bash
//! cargo run --example latent_space
//! ```

use std::path::Path;

use genosil::checkpoint::ModelSpec;
use genosil::dataset::load_dataset;
use genosil::latent::SafetyParams;
use genosil::trainer::{train, TrainConfig};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn main() -> genosil::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tiny_vehicle.jsonl");
    let dataset = load_dataset(&data)?;
    let config = TrainConfig {
        epochs: 15,
        batch_size: 64,
        latent_dim: 4,
        encoder_hidden: vec![32, 32],
        decoder_hidden: vec![32, 32],
        policy_hidden: vec![64, 64],
        ..TrainConfig::defaults(dataset.manifest.env)
    };
    println!("training a small model on the bundled dataset...");
    let (checkpoint, _) = train(&dataset, &config)?;
    let ModelSpec::Genosil {
        encoder, decoder, ..
    } = &checkpoint.model
    else {
        unreachable!("train() builds the full model");
    };
    let normalizer = &checkpoint.normalizer;

    // Sweep obstacle radius through its sampling range while everything else
    // stays fixed; the latent mean should trace a path, not sit still.
    let base = SafetyParams {
        obstacle_position: vec![1.0, 1.5],
        obstacle_velocity: vec![-0.3, -0.2],
        obstacle_radius: 0.3,
        goal: vec![3.0, -2.0],
    };
    let base_mu = encoder.encode_mean(&normalizer.normalize(&base.to_vec())?)?;
    println!("\nlatent response to obstacle radius (everything else fixed):");
    println!("{:>8} {:>24} {:>16}", "radius", "latent mean mu[0..2]", "|mu - mu_base|");
    for i in 0..6 {
        let radius = 0.3 + 0.06 * i as f64;
        let c = SafetyParams {
            obstacle_radius: radius,
            ..base.clone()
        };
        let mu = encoder.encode_mean(&normalizer.normalize(&c.to_vec())?)?;
        let delta: Vec<f64> = mu.iter().zip(&base_mu).map(|(a, b)| a - b).collect();
        println!(
            "{:>8.2} ({:>+9.4}, {:>+9.4}) {:>16.4}",
            radius, mu[0], mu[1], norm(&delta)
        );
    }

    // Encode -> decode a configuration the training set never contained and
    // report the reconstruction in raw physical units.
    println!("\nreconstruction through the bottleneck (raw units):");
    let c_raw = base.to_vec();
    let c_norm = normalizer.normalize(&c_raw)?;
    let mu = encoder.encode_mean(&c_norm)?;
    let (c_hat_norm, _) = decoder.forward(&mu)?;
    let c_hat = normalizer.denormalize(&c_hat_norm)?;
    println!("{:>12} {:>12} {:>12}", "input", "decoded", "error");
    for (a, b) in c_raw.iter().zip(&c_hat) {
        println!("{:>12.4} {:>12.4} {:>12.4}", a, b, (a - b).abs());
    }

    // Distinct configurations should land on distinct codes.
    let far = SafetyParams {
        obstacle_position: vec![-2.0, -1.0],
        obstacle_velocity: vec![0.4, 0.3],
        obstacle_radius: 0.55,
        goal: vec![-3.5, 3.0],
    };
    let mu_far = encoder.encode_mean(&normalizer.normalize(&far.to_vec())?)?;
    let sep: Vec<f64> = mu_far.iter().zip(&base_mu).map(|(a, b)| a - b).collect();
    println!(
        "\nlatent separation between two unrelated configurations: {:.4}",
        norm(&sep)
    );
    Ok(())
}
