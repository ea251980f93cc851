//! Generate a small expert demonstration dataset and inspect what was kept.
//!
//! Scenarios are sampled from the environment's default ranges, the
//! safety-filtered expert is rolled through each one, and only episodes that
//! reach the goal without collision are written. The manifest records the
//! ranges, seed, and discard statistics, so the dataset is self-describing
//! and exactly reproducible.
//!
//! ```bash
//! cargo run --example generate_demos
//! ```

use genosil::dataset::{generate_dataset, load_dataset, manifest_path_for};
use genosil::env::EnvKind;
use genosil::expert::CbfConfig;
use genosil::scenario::ScenarioRanges;

fn main() -> genosil::Result<()> {
    let out_dir = std::env::temp_dir().join("genosil-examples");
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| genosil::Error::io(out_dir.display().to_string(), e))?;

    for kind in [EnvKind::Vehicle, EnvKind::Manipulator] {
        let path = out_dir.join(format!("demos_{}.jsonl", kind.as_str()));
        let ranges = ScenarioRanges::defaults(kind);
        let manifest = generate_dataset(&path, 20, kind, &ranges, &CbfConfig::default(), 42)?;

        println!("environment: {}", kind.as_str());
        println!(
            "  kept {} of {} attempts ({} collided, {} timeout, {} infeasible discarded)",
            manifest.n_kept,
            manifest.attempts,
            manifest.discarded.collided,
            manifest.discarded.timeout,
            manifest.discarded.infeasible,
        );
        println!("  {} steps total -> {}", manifest.total_steps, path.display());
        println!("  manifest        -> {}", manifest_path_for(&path).display());

        // Round-trip through the loader, which re-validates every record.
        let dataset = load_dataset(&path)?;
        let first = &dataset.records[0];
        println!(
            "  first record: demo {} step {}, state {:?}",
            first.demo_id, first.step, first.state
        );
        println!(
            "  widths: state {}, safety {}, action {}\n",
            dataset.state_dim(),
            dataset.safety_width(),
            dataset.action_dim()
        );
    }
    Ok(())
}
