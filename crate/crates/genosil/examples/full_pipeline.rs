//! The whole pipeline in one process: generate, train, evaluate, inspect.
//!
//! Mirrors what the command-line tool does across four invocations, at a
//! scale that finishes in about a minute: a fresh 80-episode dataset, a
//! mid-sized model for each method, a three-way comparison on held-out
//! scenarios, and the checkpoint summary. Every stage is seeded, so the
//! numbers printed here are identical on every run.
//!
//! ```bash
//! cargo run --example full_pipeline
//! ```

use genosil::checkpoint::Checkpoint;
use genosil::dataset::{generate_dataset, load_dataset};
use genosil::env::EnvKind;
use genosil::eval::{compare, EvalConfig, EvalPolicy, Preset};
use genosil::expert::CbfConfig;
use genosil::scenario::ScenarioRanges;
use genosil::trainer::{train, train_gcbc, TrainConfig};

fn main() -> genosil::Result<()> {
    let kind = EnvKind::Vehicle;
    let dir = std::env::temp_dir().join("genosil-examples");
    std::fs::create_dir_all(&dir).map_err(|e| genosil::Error::io(dir.display().to_string(), e))?;

    // Stage 1: demonstrations.
    println!("[1/4] generating demonstrations");
    let data_path = dir.join("pipeline_demos.jsonl");
    let ranges = ScenarioRanges::defaults(kind);
    let cbf = CbfConfig::default();
    let manifest = generate_dataset(&data_path, 80, kind, &ranges, &cbf, 17)?;
    println!(
        "      kept {} episodes / {} steps ({} attempts)",
        manifest.n_kept, manifest.total_steps, manifest.attempts
    );

    // Stage 2: training, both methods on the same data and seed.
    println!("[2/4] training");
    let dataset = load_dataset(&data_path)?;
    let config = TrainConfig {
        epochs: 12,
        seed: 1,
        checkpoint_path: Some(dir.join("pipeline_genosil.json")),
        ..TrainConfig::defaults(kind)
    };
    let (genosil_ckpt, report) = train(&dataset, &config)?;
    let last = report.epochs.last().unwrap();
    println!(
        "      genosil: {} steps, final imitation {:.4}, kl {:.3}, reconstruction {:.4} ({:.0}s)",
        report.global_steps, last.imitation, last.kl, last.reconstruction, report.wall_clock_seconds
    );
    let gcbc_config = TrainConfig {
        checkpoint_path: Some(dir.join("pipeline_gcbc.json")),
        ..config.clone()
    };
    let (gcbc_ckpt, report) = train_gcbc(&dataset, &gcbc_config)?;
    let last = report.epochs.last().unwrap();
    println!(
        "      gcbc:    {} steps, final imitation {:.4} ({:.0}s)",
        report.global_steps, last.imitation, report.wall_clock_seconds
    );

    // Stage 3: held-out comparison on a speed-shifted scenario distribution.
    println!("[3/4] evaluating on the shifted-speed preset");
    let methods = vec![
        ("genosil".to_string(), EvalPolicy::Checkpoint(&genosil_ckpt)),
        ("gcbc".to_string(), EvalPolicy::Checkpoint(&gcbc_ckpt)),
        ("expert".to_string(), EvalPolicy::Expert(&cbf)),
    ];
    let eval_config = EvalConfig::preset(kind, Preset::ShiftedSpeed, 100, 7);
    let (cmp, _) = compare(&methods, kind, &eval_config)?;
    print!("{}", cmp.table());
    let report_path = dir.join("pipeline_report.json");
    cmp.save(&report_path)?;
    println!("      report -> {}", report_path.display());

    // Stage 4: the checkpoint as the tool's inspect command shows it.
    println!("[4/4] inspecting the trained checkpoint");
    let reloaded = Checkpoint::load(&dir.join("pipeline_genosil.json"))?;
    for line in reloaded.summary().lines() {
        println!("      {line}");
    }
    Ok(())
}
