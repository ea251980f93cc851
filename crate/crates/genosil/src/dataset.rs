//! On-disk demonstration datasets.
//!
//! A dataset is a pair of files: a JSONL body with one record per expert step
//! and a JSON manifest carrying everything needed to interpret the body —
//! schema version, environment kind, sampling ranges, seed, and generation
//! statistics. The manifest lives next to the body
//! ([`manifest_path_for`]), so a dataset is addressed by its `.jsonl` path
//! alone.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::env::EnvKind;
use crate::error::{Error, Result};
use crate::expert::{generate_demonstrations, CbfConfig, Demonstration, DiscardStats};
use crate::latent::safety_dim;
use crate::scenario::ScenarioRanges;

/// Version written into every manifest; readers reject anything else.
pub const SCHEMA_VERSION: u32 = 1;

/// One dataset line: a single expert step, keyed by the episode it came from
/// and its position within that episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepRecord {
    pub demo_id: usize,
    pub step: usize,
    /// Agent state `s`.
    pub state: Vec<f64>,
    /// Safety parameter vector `c` observed at this step.
    pub safety: Vec<f64>,
    /// Expert action `a*`.
    pub action: Vec<f64>,
}

/// Sidecar metadata for a dataset body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub env: EnvKind,
    pub seed: u64,
    /// Episodes asked for.
    pub n_requested: usize,
    /// Episodes kept (expert reached the goal without collision).
    pub n_kept: usize,
    /// Scenarios attempted, kept and discarded together.
    pub attempts: usize,
    pub discarded: DiscardStats,
    /// Records in the body; must match the line count exactly.
    pub total_steps: usize,
    /// Sampling ranges the scenarios were drawn from; evaluation and
    /// normalization reuse these.
    pub ranges: ScenarioRanges,
}

/// Manifest path for a dataset body: `demos.jsonl` → `demos.manifest.json`.
pub fn manifest_path_for(dataset: &Path) -> PathBuf {
    dataset.with_extension("manifest.json")
}

/// A validated in-memory dataset: the manifest plus every step record in
/// episode order.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub records: Vec<StepRecord>,
}

impl Dataset {
    pub fn n_demos(&self) -> usize {
        self.manifest.n_kept
    }

    pub fn state_dim(&self) -> usize {
        self.manifest.env.state_dim()
    }

    pub fn safety_width(&self) -> usize {
        safety_dim(self.manifest.env.space_dim())
    }

    pub fn action_dim(&self) -> usize {
        self.manifest.env.action_dim()
    }
}

/// Write a dataset body and its manifest. The body goes first so an existing
/// manifest always describes complete data.
pub fn save_dataset(
    path: &Path,
    demos: &[Demonstration],
    manifest: &DatasetManifest,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut body = BufWriter::new(file);
    let mut total = 0usize;
    for (demo_id, demo) in demos.iter().enumerate() {
        for (step, s) in demo.steps.iter().enumerate() {
            let record = StepRecord {
                demo_id,
                step,
                state: s.state.clone(),
                safety: s.safety.clone(),
                action: s.action.clone(),
            };
            let line = serde_json::to_string(&record)?;
            writeln!(body, "{line}").map_err(|e| Error::io(path.display().to_string(), e))?;
            total += 1;
        }
    }
    body.flush()
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    if total != manifest.total_steps {
        return Err(Error::InvalidConfig(format!(
            "manifest declares {} steps but {} were written",
            manifest.total_steps, total
        )));
    }

    let manifest_path = manifest_path_for(path);
    let text = serde_json::to_string_pretty(manifest)?;
    std::fs::write(&manifest_path, text + "\n")
        .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
    Ok(())
}

/// Sample scenarios, roll out the expert, keep only safe successful episodes,
/// and write them as a dataset. Returns the manifest that was written.
pub fn generate_dataset(
    path: &Path,
    n_demos: usize,
    kind: EnvKind,
    ranges: &ScenarioRanges,
    cfg: &CbfConfig,
    seed: u64,
) -> Result<DatasetManifest> {
    let generation = generate_demonstrations(n_demos, kind, ranges, cfg, seed)?;
    let total_steps = generation.demos.iter().map(|d| d.steps.len()).sum();
    let manifest = DatasetManifest {
        schema_version: SCHEMA_VERSION,
        env: kind,
        seed,
        n_requested: n_demos,
        n_kept: generation.demos.len(),
        attempts: generation.attempts,
        discarded: generation.discarded,
        total_steps,
        ranges: ranges.clone(),
    };
    save_dataset(path, &generation.demos, &manifest)?;
    Ok(manifest)
}

/// Read and fully validate a dataset: schema version, record shapes, value
/// finiteness, action bounds, episode ordering, and count consistency.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let manifest_path = manifest_path_for(path);
    let manifest_text = std::fs::read_to_string(&manifest_path)
        .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
    let manifest: DatasetManifest = serde_json::from_str(&manifest_text)?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            expected: SCHEMA_VERSION,
            found: manifest.schema_version,
        });
    }
    manifest.ranges.validate(manifest.env)?;

    let env = manifest.env;
    let bounds = env.action_bounds();
    let (state_dim, safety_width, action_dim) =
        (env.state_dim(), safety_dim(env.space_dim()), env.action_dim());

    let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let reader = BufReader::new(file);
    let mut records: Vec<StepRecord> = Vec::with_capacity(manifest.total_steps);
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: StepRecord = serde_json::from_str(&line)?;
        if record.state.len() != state_dim {
            return Err(Error::DimensionMismatch {
                what: "record state",
                expected: state_dim,
                got: record.state.len(),
            });
        }
        if record.safety.len() != safety_width {
            return Err(Error::DimensionMismatch {
                what: "record safety parameters",
                expected: safety_width,
                got: record.safety.len(),
            });
        }
        if record.action.len() != action_dim {
            return Err(Error::DimensionMismatch {
                what: "record action",
                expected: action_dim,
                got: record.action.len(),
            });
        }
        let finite = record
            .state
            .iter()
            .chain(&record.safety)
            .chain(&record.action)
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::NonFinite(format!(
                "dataset record (demo {}, step {})",
                record.demo_id, record.step
            )));
        }
        if !bounds.contains(&record.action, 1e-9) {
            return Err(Error::InvalidConfig(format!(
                "action out of bounds in record (demo {}, step {})",
                record.demo_id, record.step
            )));
        }
        let expected = match records.last() {
            None => (0, 0),
            Some(prev) if record.demo_id == prev.demo_id => (prev.demo_id, prev.step + 1),
            Some(prev) => (prev.demo_id + 1, 0),
        };
        if (record.demo_id, record.step) != expected {
            return Err(Error::InvalidConfig(format!(
                "records out of order: expected demo {} step {}, found demo {} step {}",
                expected.0, expected.1, record.demo_id, record.step
            )));
        }
        records.push(record);
    }

    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if records.len() != manifest.total_steps {
        return Err(Error::InvalidConfig(format!(
            "manifest declares {} steps but the body holds {}",
            manifest.total_steps,
            records.len()
        )));
    }
    let demo_count = records.last().map_or(0, |r| r.demo_id + 1);
    if demo_count != manifest.n_kept {
        return Err(Error::InvalidConfig(format!(
            "manifest declares {} episodes but the body holds {}",
            manifest.n_kept, demo_count
        )));
    }
    Ok(Dataset { manifest, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_generation(seed: u64) -> (Vec<Demonstration>, DatasetManifest) {
        let kind = EnvKind::Vehicle;
        let ranges = ScenarioRanges::defaults(kind);
        let generation =
            generate_demonstrations(2, kind, &ranges, &CbfConfig::default(), seed).unwrap();
        let total_steps = generation.demos.iter().map(|d| d.steps.len()).sum();
        let manifest = DatasetManifest {
            schema_version: SCHEMA_VERSION,
            env: kind,
            seed,
            n_requested: 2,
            n_kept: generation.demos.len(),
            attempts: generation.attempts,
            discarded: generation.discarded.clone(),
            total_steps,
            ranges,
        };
        (generation.demos, manifest)
    }

    #[test]
    fn round_trip_preserves_every_value_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demos.jsonl");
        let (demos, manifest) = small_generation(11);
        save_dataset(&path, &demos, &manifest).unwrap();

        let loaded = load_dataset(&path).unwrap();
        assert_eq!(loaded.manifest, manifest);
        assert_eq!(loaded.records.len(), manifest.total_steps);
        let mut i = 0;
        for (demo_id, demo) in demos.iter().enumerate() {
            for (step, s) in demo.steps.iter().enumerate() {
                let r = &loaded.records[i];
                assert_eq!((r.demo_id, r.step), (demo_id, step));
                assert_eq!(r.state, s.state);
                assert_eq!(r.safety, s.safety);
                assert_eq!(r.action, s.action);
                i += 1;
            }
        }
    }

    #[test]
    fn generation_to_file_is_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let ranges = ScenarioRanges::defaults(EnvKind::Vehicle);
        let cfg = CbfConfig::default();
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        generate_dataset(&a, 2, EnvKind::Vehicle, &ranges, &cfg, 7).unwrap();
        generate_dataset(&b, 2, EnvKind::Vehicle, &ranges, &cfg, 7).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let ma = std::fs::read(manifest_path_for(&a)).unwrap();
        let mb = std::fs::read(manifest_path_for(&b)).unwrap();
        assert_eq!(ma, mb);
    }

    #[test]
    fn manifest_counts_match_request() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demos.jsonl");
        let ranges = ScenarioRanges::defaults(EnvKind::Manipulator);
        let manifest = generate_dataset(
            &path,
            3,
            EnvKind::Manipulator,
            &ranges,
            &CbfConfig::default(),
            21,
        )
        .unwrap();
        assert_eq!(manifest.n_kept, 3);
        assert_eq!(manifest.n_requested, 3);
        assert!(manifest.attempts >= 3);
        let loaded = load_dataset(&path).unwrap();
        assert_eq!(loaded.n_demos(), 3);
    }

    #[test]
    fn unsupported_schema_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demos.jsonl");
        let (demos, mut manifest) = small_generation(3);
        save_dataset(&path, &demos, &manifest).unwrap();
        manifest.schema_version = 99;
        let text = serde_json::to_string_pretty(&manifest).unwrap();
        std::fs::write(manifest_path_for(&path), text).unwrap();

        match load_dataset(&path) {
            Err(Error::SchemaVersion { expected, found }) => {
                assert_eq!(expected, SCHEMA_VERSION);
                assert_eq!(found, 99);
            }
            other => panic!("expected schema rejection, got {other:?}"),
        }
    }

    #[test]
    fn reordered_records_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demos.jsonl");
        let (demos, manifest) = small_generation(5);
        save_dataset(&path, &demos, &manifest).unwrap();

        let body = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<&str> = body.lines().collect();
        lines.swap(0, 1);
        std::fs::write(&path, lines.join("\n")).unwrap();

        match load_dataset(&path) {
            Err(Error::InvalidConfig(msg)) => assert!(msg.contains("out of order"), "{msg}"),
            other => panic!("expected ordering rejection, got {other:?}"),
        }
    }

    #[test]
    fn wrong_record_shape_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demos.jsonl");
        let (demos, manifest) = small_generation(6);
        save_dataset(&path, &demos, &manifest).unwrap();

        let body = std::fs::read_to_string(&path).unwrap();
        let mut records: Vec<StepRecord> = body
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        records[0].state.pop();
        let mangled: Vec<String> = records
            .iter()
            .map(|r| serde_json::to_string(r).unwrap())
            .collect();
        std::fs::write(&path, mangled.join("\n")).unwrap();

        match load_dataset(&path) {
            Err(Error::DimensionMismatch { what, .. }) => assert_eq!(what, "record state"),
            other => panic!("expected shape rejection, got {other:?}"),
        }
    }

    #[test]
    fn missing_manifest_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demos.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(load_dataset(&path), Err(Error::Io { .. })));
    }

    #[test]
    fn empty_body_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demos.jsonl");
        let (demos, manifest) = small_generation(8);
        save_dataset(&path, &demos, &manifest).unwrap();
        std::fs::write(&path, "").unwrap();
        assert!(matches!(load_dataset(&path), Err(Error::EmptyDataset)));
    }
}
