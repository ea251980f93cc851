//! Train a small model on the bundled dataset and round-trip the checkpoint.
//!
//! Loads the tiny vehicle dataset shipped under `data/`, runs a short
//! training configuration (smaller networks and fewer epochs than the
//! defaults, so this finishes in seconds), prints the per-epoch loss table,
//! and verifies that saving and reloading the checkpoint preserves every
//! parameter bit for bit.
//!
//! ```bash
//! cargo run --example train_policy
//! ```

use std::path::Path;

use genosil::checkpoint::Checkpoint;
use genosil::dataset::load_dataset;
use genosil::trainer::{train, TrainConfig};

fn main() -> genosil::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tiny_vehicle.jsonl");
    let dataset = load_dataset(&data)?;
    println!(
        "dataset: {} episodes, {} steps ({})",
        dataset.n_demos(),
        dataset.records.len(),
        data.display()
    );

    let out_dir = std::env::temp_dir().join("genosil-examples");
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| genosil::Error::io(out_dir.display().to_string(), e))?;
    let ckpt_path = out_dir.join("tiny_checkpoint.json");

    let config = TrainConfig {
        epochs: 10,
        batch_size: 64,
        latent_dim: 4,
        encoder_hidden: vec![32, 32],
        decoder_hidden: vec![32, 32],
        policy_hidden: vec![64, 64],
        checkpoint_path: Some(ckpt_path.clone()),
        ..TrainConfig::defaults(dataset.manifest.env)
    };
    println!(
        "config: {} epochs, batch {}, lr {}, latent dim {}\n",
        config.epochs, config.batch_size, config.learning_rate, config.latent_dim
    );

    let (checkpoint, report) = train(&dataset, &config)?;
    println!(
        "{:>5} {:>10} {:>8} {:>10} {:>10}",
        "epoch", "imitation", "kl", "reconstr", "total"
    );
    for e in &report.epochs {
        println!(
            "{:>5} {:>10.4} {:>8.3} {:>10.4} {:>10.4}",
            e.epoch, e.imitation, e.kl, e.reconstruction, e.total
        );
    }
    println!(
        "\n{} optimizer steps in {:.1}s; final anneal weights beta {:.4}, gamma {:.4}",
        report.global_steps, report.wall_clock_seconds, report.final_beta, report.final_gamma
    );

    // The trainer already wrote the checkpoint; reload and compare.
    let reloaded = Checkpoint::load(&ckpt_path)?;
    assert_eq!(reloaded, checkpoint, "checkpoint must round-trip value-exact");
    println!("\ncheckpoint round-trips value-exact: {}", ckpt_path.display());
    print!("\n{}", reloaded.summary());
    Ok(())
}
