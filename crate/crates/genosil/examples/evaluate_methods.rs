//! Train both methods on the bundled dataset and compare them against the
//! expert on one shared scenario set.
//!
//! The comparison draws a fresh seeded scenario set, runs every method on
//! exactly those scenarios (the fingerprint in the report proves it), and
//! reports two rates per method: safety (no collision at any step) and reach
//! (goal reached, collision-free). With this tiny dataset and short
//! training, the learned policies are rough — the point here is the
//! harness, not the scores; `full_pipeline` trains longer.
//!
//! ```bash
//! cargo run --example evaluate_methods
//! ```

use std::path::Path;

use genosil::dataset::load_dataset;
use genosil::eval::{compare, EvalConfig, EvalPolicy, Preset};
use genosil::expert::CbfConfig;
use genosil::trainer::{train, train_gcbc, TrainConfig};

fn main() -> genosil::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tiny_vehicle.jsonl");
    let dataset = load_dataset(&data)?;
    let kind = dataset.manifest.env;
    let config = TrainConfig {
        epochs: 12,
        batch_size: 64,
        latent_dim: 4,
        encoder_hidden: vec![32, 32],
        decoder_hidden: vec![32, 32],
        policy_hidden: vec![64, 64],
        ..TrainConfig::defaults(kind)
    };

    println!("training both methods on {} episodes...", dataset.n_demos());
    let (genosil_ckpt, _) = train(&dataset, &config)?;
    let (gcbc_ckpt, _) = train_gcbc(&dataset, &config)?;

    let cbf = CbfConfig::default();
    let methods = vec![
        ("genosil".to_string(), EvalPolicy::Checkpoint(&genosil_ckpt)),
        ("gcbc".to_string(), EvalPolicy::Checkpoint(&gcbc_ckpt)),
        ("expert".to_string(), EvalPolicy::Expert(&cbf)),
    ];

    for preset in [Preset::Default, Preset::ShiftedSpeed] {
        let eval_config = EvalConfig::preset(kind, preset, 60, 2024);
        let (report, _) = compare(&methods, kind, &eval_config)?;
        println!(
            "\npreset {:?}: {} trials, scenario fingerprint {:016x}",
            preset, eval_config.n_trials, report.scenario_fingerprint
        );
        print!("{}", report.table());
    }
    println!("\nevery reach counts only collision-free trials, so reach <= safety always");
    Ok(())
}
