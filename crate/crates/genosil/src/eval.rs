//! Rollout harness, safety/reach metrics, and method comparison.
//!
//! A trial drops one policy into one sampled scenario and runs the closed
//! loop to termination. For the latent-conditioned method the conditioning
//! is recomputed every step: assemble the current safety parameters,
//! normalize, and take the encoder's posterior mean (inference uses `z = mu`,
//! no sampling). The goal-only baseline conditions on the normalized goal
//! block, and the expert runs its own barrier-filtered controller.
//!
//! Safety rate is the percentage of trials with no collision at any step;
//! reach rate is the percentage that reached the goal in a collision-free
//! episode (in this simulator contact ends the episode, so a reach is
//! collision-free by construction — the conjunction is still applied when
//! counting). Comparisons evaluate every method on the *same* scenario set,
//! recorded by fingerprint so reports can prove they shared it.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, ModelSpec};
use crate::env::{
    current_safety_params, euclidean_distance, step, EnvKind, EnvState, Scenario, Status,
};
use crate::error::{Error, Result};
use crate::expert::{CbfConfig, ExpertController};
use crate::latent::SafetyParams;
use crate::scenario::{sample_scenario, ScenarioRanges};
use crate::seeding::{fnv1a64, stream_rng};

/// Seed stream base for per-trial scenario draws.
const TRIAL_STREAM_BASE: u64 = 0x5000;

/// Which controller runs the trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Genosil,
    Gcbc,
    Expert,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::Genosil => "genosil",
            PolicyKind::Gcbc => "gcbc",
            PolicyKind::Expert => "expert",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "genosil" => Ok(PolicyKind::Genosil),
            "gcbc" => Ok(PolicyKind::Gcbc),
            "expert" => Ok(PolicyKind::Expert),
            other => Err(Error::InvalidConfig(format!(
                "unknown method '{other}' (expected 'genosil', 'gcbc', or 'expert')"
            ))),
        }
    }
}

/// Named scenario-distribution presets. The shifted variants probe
/// generalization beyond the training distribution; the shift magnitudes are
/// fixed here so runs are comparable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Training distribution.
    Default,
    /// Obstacle speed range scaled by 1.5.
    ShiftedSpeed,
    /// Obstacle radius range scaled by 1.25.
    ShiftedRadius,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Default => "default",
            Preset::ShiftedSpeed => "shifted-speed",
            Preset::ShiftedRadius => "shifted-radius",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Preset::Default),
            "shifted-speed" => Ok(Preset::ShiftedSpeed),
            "shifted-radius" => Ok(Preset::ShiftedRadius),
            other => Err(Error::InvalidConfig(format!(
                "unknown preset '{other}' (expected 'default', 'shifted-speed', or 'shifted-radius')"
            ))),
        }
    }

    pub fn ranges(self, kind: EnvKind) -> ScenarioRanges {
        let base = ScenarioRanges::defaults(kind);
        match self {
            Preset::Default => base,
            Preset::ShiftedSpeed => base.scaled_speed(1.5),
            Preset::ShiftedRadius => base.scaled_radius(1.25),
        }
    }
}

/// How many trials to run, where their scenarios come from, and the seed
/// that makes the set reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub n_trials: usize,
    pub ranges: ScenarioRanges,
    pub seed: u64,
}

impl EvalConfig {
    pub fn preset(kind: EnvKind, preset: Preset, n_trials: usize, seed: u64) -> Self {
        EvalConfig {
            n_trials,
            ranges: preset.ranges(kind),
            seed,
        }
    }

    pub fn validate(&self, kind: EnvKind) -> Result<()> {
        if self.n_trials < 1 {
            return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
        }
        self.ranges.validate(kind)
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Terminal reason.
    pub status: Status,
    /// Control steps executed before termination.
    pub steps: usize,
    /// Minimum over the episode of (center distance - contact distance);
    /// non-positive exactly for collided trials.
    pub min_clearance: f64,
}

/// One visited state with the action taken from it (`None` on the terminal
/// state, where no action is taken).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub t: usize,
    pub agent: Vec<f64>,
    pub obstacle: Vec<f64>,
    pub clearance: f64,
    pub status: Status,
    pub action: Option<Vec<f64>>,
}

/// Full state/action history of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub trial: usize,
    pub steps: Vec<TrajectoryStep>,
}

/// A controller ready to be dropped into scenarios.
#[derive(Debug, Clone, Copy)]
pub enum EvalPolicy<'a> {
    /// A trained model (either method; the checkpoint knows which).
    Checkpoint(&'a Checkpoint),
    /// The demonstration-generating expert itself.
    Expert(&'a CbfConfig),
}

impl EvalPolicy<'_> {
    pub fn kind(&self) -> PolicyKind {
        match self {
            EvalPolicy::Checkpoint(ckpt) => match ckpt.model {
                ModelSpec::Genosil { .. } => PolicyKind::Genosil,
                ModelSpec::Gcbc { .. } => PolicyKind::Gcbc,
            },
            EvalPolicy::Expert(_) => PolicyKind::Expert,
        }
    }

    /// Reject environment mismatches before any rollout happens.
    pub fn ensure_env(&self, kind: EnvKind) -> Result<()> {
        if let EvalPolicy::Checkpoint(ckpt) = self {
            if ckpt.env != kind {
                return Err(Error::EnvMismatch {
                    checkpoint: ckpt.env.as_str(),
                    requested: kind.as_str(),
                });
            }
        }
        Ok(())
    }
}

fn clearance_of(state: &EnvState, scenario: &Scenario) -> f64 {
    euclidean_distance(scenario.env.position_of(&state.agent), &state.obstacle)
        - scenario.contact_distance()
}

/// Run one closed-loop episode. Returns the trial outcome (with a
/// placeholder trial index of 0) and the visited trajectory.
pub fn rollout_trial(
    policy: &EvalPolicy<'_>,
    scenario: &Scenario,
) -> Result<(TrialRecord, Trajectory)> {
    policy.ensure_env(scenario.env)?;
    scenario.validate()?;
    let bounds = scenario.env.action_bounds();
    let space = scenario.env.space_dim();
    let mut expert = match policy {
        EvalPolicy::Expert(cfg) => Some(ExpertController::new(scenario, (*cfg).clone())?),
        EvalPolicy::Checkpoint(_) => None,
    };

    let mut state = EnvState::initial(scenario);
    let mut min_clearance = clearance_of(&state, scenario);
    let mut steps = Vec::new();
    while !state.status.is_terminal() {
        let raw = match policy {
            EvalPolicy::Checkpoint(ckpt) => {
                let c = current_safety_params(&state, scenario).to_vec();
                let c_norm = ckpt.normalizer.normalize(&c)?;
                match &ckpt.model {
                    ModelSpec::Genosil {
                        encoder, policy, ..
                    } => {
                        let z = encoder.encode_mean(&c_norm)?;
                        policy.act_raw(&state.agent, &z)?
                    }
                    ModelSpec::Gcbc { policy } => {
                        policy.act_raw(&state.agent, SafetyParams::goal_of(space, &c_norm))?
                    }
                }
            }
            EvalPolicy::Expert(_) => {
                let ctl = expert.as_mut().expect("expert controller exists");
                ctl.action_or_evade(&state, scenario)?
            }
        };
        let applied = bounds.clamped(&raw);
        steps.push(TrajectoryStep {
            t: state.elapsed,
            agent: state.agent.clone(),
            obstacle: state.obstacle.clone(),
            clearance: clearance_of(&state, scenario),
            status: state.status,
            action: Some(applied.clone()),
        });
        state = step(&state, &applied, scenario)?;
        min_clearance = min_clearance.min(clearance_of(&state, scenario));
    }
    steps.push(TrajectoryStep {
        t: state.elapsed,
        agent: state.agent.clone(),
        obstacle: state.obstacle.clone(),
        clearance: clearance_of(&state, scenario),
        status: state.status,
        action: None,
    });

    Ok((
        TrialRecord {
            trial: 0,
            status: state.status,
            steps: state.elapsed,
            min_clearance,
        },
        Trajectory { trial: 0, steps },
    ))
}

/// Percentage of trials with no collision at any timestep.
pub fn safety_rate(trials: &[TrialRecord]) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let safe = trials.iter().filter(|t| t.status != Status::Collided).count();
    Ok(100.0 * safe as f64 / trials.len() as f64)
}

/// Percentage of trials that reached the goal in a collision-free episode.
pub fn reach_rate(trials: &[TrialRecord]) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let reached = trials
        .iter()
        .filter(|t| t.status == Status::Reached && t.status != Status::Collided)
        .count();
    Ok(100.0 * reached as f64 / trials.len() as f64)
}

/// Draw the trial scenarios for a configuration: one independent seeded
/// stream per trial, so the set is reproducible and order-stable no matter
/// how rollouts are scheduled.
pub fn sample_eval_scenarios(kind: EnvKind, config: &EvalConfig) -> Result<Vec<Scenario>> {
    config.validate(kind)?;
    (0..config.n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(config.seed, TRIAL_STREAM_BASE + i as u64);
            sample_scenario(&mut rng, kind, &config.ranges)
        })
        .collect()
}

/// Order-sensitive content hash of a scenario list, used to prove that two
/// evaluations shared the same trial set.
pub fn scenario_fingerprint(scenarios: &[Scenario]) -> Result<u64> {
    let bytes = serde_json::to_vec(scenarios)?;
    Ok(fnv1a64(&bytes))
}

/// Metrics and per-trial outcomes for one method on one scenario set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub label: String,
    pub method: PolicyKind,
    pub env: EnvKind,
    pub scenario_fingerprint: u64,
    pub safety_rate: f64,
    pub reach_rate: f64,
    /// Configuration that produced the scenario set, echoed verbatim.
    pub config: EvalConfig,
    pub trials: Vec<TrialRecord>,
}

/// Evaluate one method on an explicit scenario set (shared-set comparisons
/// pass the same slice to every method). Trials run in parallel; records
/// come back in trial order.
pub fn evaluate_on(
    label: &str,
    policy: &EvalPolicy<'_>,
    scenarios: &[Scenario],
    config: &EvalConfig,
) -> Result<(EvalReport, Vec<Trajectory>)> {
    let Some(first) = scenarios.first() else {
        return Err(Error::EmptyEvaluation);
    };
    let kind = first.env;
    policy.ensure_env(kind)?;
    let mut results: Vec<(TrialRecord, Trajectory)> = scenarios
        .par_iter()
        .map(|scenario| rollout_trial(policy, scenario))
        .collect::<Result<_>>()?;
    for (i, (record, trajectory)) in results.iter_mut().enumerate() {
        record.trial = i;
        trajectory.trial = i;
    }
    let (trials, trajectories): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let report = EvalReport {
        label: label.to_string(),
        method: policy.kind(),
        env: kind,
        scenario_fingerprint: scenario_fingerprint(scenarios)?,
        safety_rate: safety_rate(&trials)?,
        reach_rate: reach_rate(&trials)?,
        config: config.clone(),
        trials,
    };
    Ok((report, trajectories))
}

/// Sample a fresh scenario set for `config` and evaluate one method on it.
pub fn run_eval(
    label: &str,
    policy: &EvalPolicy<'_>,
    kind: EnvKind,
    config: &EvalConfig,
) -> Result<(EvalReport, Vec<Trajectory>)> {
    policy.ensure_env(kind)?;
    let scenarios = sample_eval_scenarios(kind, config)?;
    evaluate_on(label, policy, &scenarios, config)
}

/// Several methods measured on one shared scenario set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub env: EnvKind,
    pub scenario_fingerprint: u64,
    pub config: EvalConfig,
    pub methods: Vec<EvalReport>,
}

impl CompareReport {
    /// Plain-text metrics table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<20} {:>8} {:>13} {:>12}\n",
            "method", "trials", "safety rate", "reach rate"
        ));
        for row in &self.methods {
            out.push_str(&format!(
                "{:<20} {:>8} {:>12.1}% {:>11.1}%\n",
                row.label,
                row.trials.len(),
                row.safety_rate,
                row.reach_rate
            ));
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(())
    }
}

/// Evaluate every labeled method on one shared, seeded scenario set.
/// Returns the comparison report and each method's trajectories (in the
/// same order as the report rows).
pub fn compare(
    methods: &[(String, EvalPolicy<'_>)],
    kind: EnvKind,
    config: &EvalConfig,
) -> Result<(CompareReport, Vec<Vec<Trajectory>>)> {
    if methods.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    for (_, policy) in methods {
        policy.ensure_env(kind)?;
    }
    let scenarios = sample_eval_scenarios(kind, config)?;
    let fingerprint = scenario_fingerprint(&scenarios)?;
    let mut rows = Vec::with_capacity(methods.len());
    let mut all_trajectories = Vec::with_capacity(methods.len());
    for (label, policy) in methods {
        let (report, trajectories) = evaluate_on(label, policy, &scenarios, config)?;
        if report.scenario_fingerprint != fingerprint {
            return Err(Error::InvalidConfig(
                "scenario fingerprint diverged across methods in one comparison".into(),
            ));
        }
        rows.push(report);
        all_trajectories.push(trajectories);
    }
    Ok((
        CompareReport {
            env: kind,
            scenario_fingerprint: fingerprint,
            config: config.clone(),
            methods: rows,
        },
        all_trajectories,
    ))
}

/// Write one JSONL file per trial under `dir`, named
/// `{label}-trial-NNNN.jsonl`; each line is one [`TrajectoryStep`].
pub fn write_trajectories(
    dir: &Path,
    label: &str,
    trajectories: &[Trajectory],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut paths = Vec::with_capacity(trajectories.len());
    for trajectory in trajectories {
        let path = dir.join(format!("{label}-trial-{:04}.jsonl", trajectory.trial));
        let mut body = String::new();
        for step in &trajectory.steps {
            body.push_str(&serde_json::to_string(step)?);
            body.push('\n');
        }
        std::fs::write(&path, body).map_err(|e| Error::io(path.display().to_string(), e))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checkpoint::CHECKPOINT_VERSION;
    use crate::expert::generate_demonstrations;
    use crate::latent::{decoder_kaiming, safety_dim, Encoder};
    use crate::policy::PolicyNet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn trial(status: Status) -> TrialRecord {
        TrialRecord {
            trial: 0,
            status,
            steps: 10,
            min_clearance: if status == Status::Collided { -0.01 } else { 0.2 },
        }
    }

    fn untrained_checkpoint(kind: EnvKind, seed: u64) -> Checkpoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c_dim = safety_dim(kind.space_dim());
        let latent = 4;
        Checkpoint {
            version: CHECKPOINT_VERSION,
            env: kind,
            seed,
            normalizer: ScenarioRanges::defaults(kind).normalizer(kind),
            model: ModelSpec::Genosil {
                encoder: Encoder::kaiming(c_dim, &[8], latent, &mut rng),
                decoder: decoder_kaiming(latent, &[8], c_dim, &mut rng),
                policy: PolicyNet::kaiming(
                    kind.state_dim(),
                    latent,
                    &[16],
                    kind.action_dim(),
                    &mut rng,
                ),
            },
            train: None,
        }
    }

    #[test]
    fn safety_rate_counts_collision_free_trials() {
        let mut trials: Vec<TrialRecord> = (0..8).map(|_| trial(Status::Reached)).collect();
        trials.extend((0..2).map(|_| trial(Status::Collided)));
        assert_eq!(safety_rate(&trials).unwrap(), 80.0);

        let all_bad: Vec<_> = (0..5).map(|_| trial(Status::Collided)).collect();
        assert_eq!(safety_rate(&all_bad).unwrap(), 0.0);
        let all_good: Vec<_> = (0..5).map(|_| trial(Status::Reached)).collect();
        assert_eq!(safety_rate(&all_good).unwrap(), 100.0);
    }

    #[test]
    fn reach_rate_requires_reaching_without_collision() {
        // 10 trials: 7 end safely (6 reached, 1 timeout), 3 collide.
        let mut trials: Vec<TrialRecord> = (0..6).map(|_| trial(Status::Reached)).collect();
        trials.push(trial(Status::Timeout));
        trials.extend((0..3).map(|_| trial(Status::Collided)));
        assert_eq!(reach_rate(&trials).unwrap(), 60.0);
        assert_eq!(safety_rate(&trials).unwrap(), 70.0);

        let all: Vec<_> = (0..4).map(|_| trial(Status::Reached)).collect();
        assert_eq!(reach_rate(&all).unwrap(), 100.0);
    }

    #[test]
    fn empty_trial_lists_are_rejected() {
        assert!(matches!(safety_rate(&[]), Err(Error::EmptyEvaluation)));
        assert!(matches!(reach_rate(&[]), Err(Error::EmptyEvaluation)));
    }

    #[test]
    fn rates_are_bounded_and_ordered_for_any_outcome_mix() {
        use proptest::prelude::*;
        proptest!(|(codes in proptest::collection::vec(0u8..3, 1..200))| {
            let trials: Vec<TrialRecord> = codes
                .iter()
                .map(|c| {
                    trial(match c {
                        0 => Status::Reached,
                        1 => Status::Collided,
                        _ => Status::Timeout,
                    })
                })
                .collect();
            let safety = safety_rate(&trials).unwrap();
            let reach = reach_rate(&trials).unwrap();
            prop_assert!((0.0..=100.0).contains(&safety));
            prop_assert!((0.0..=100.0).contains(&reach));
            prop_assert!(reach <= safety);
        });
    }

    #[test]
    fn presets_only_move_the_intended_ranges() {
        let base = ScenarioRanges::defaults(EnvKind::Vehicle);
        let speed = Preset::ShiftedSpeed.ranges(EnvKind::Vehicle);
        assert_eq!(speed.speed.0, base.speed.0 * 1.5);
        assert_eq!(speed.speed.1, base.speed.1 * 1.5);
        assert_eq!(speed.radius, base.radius);

        let radius = Preset::ShiftedRadius.ranges(EnvKind::Vehicle);
        assert_eq!(radius.radius.1, base.radius.1 * 1.25);
        assert_eq!(radius.speed, base.speed);

        for p in [Preset::Default, Preset::ShiftedSpeed, Preset::ShiftedRadius] {
            assert_eq!(Preset::parse(p.as_str()).unwrap(), p);
        }
        assert!(Preset::parse("bogus").is_err());
    }

    #[test]
    fn zero_horizon_times_out_safely_at_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ranges = ScenarioRanges::defaults(EnvKind::Vehicle);
        let mut scenario = sample_scenario(&mut rng, EnvKind::Vehicle, &ranges).unwrap();
        scenario.horizon = 0;
        let cfg = CbfConfig::default();
        let (record, trajectory) =
            rollout_trial(&EvalPolicy::Expert(&cfg), &scenario).unwrap();
        assert_eq!(record.status, Status::Timeout);
        assert_eq!(record.steps, 0);
        assert!(record.min_clearance > 0.0);
        assert_eq!(trajectory.steps.len(), 1);
        assert_eq!(trajectory.steps[0].action, None);
    }

    #[test]
    fn expert_reaches_nearly_every_sampled_vehicle_scenario() {
        let cfg = CbfConfig::default();
        let config = EvalConfig::preset(EnvKind::Vehicle, Preset::Default, 200, 501);
        let (report, _) =
            run_eval("expert", &EvalPolicy::Expert(&cfg), EnvKind::Vehicle, &config).unwrap();
        assert!(
            report.reach_rate >= 95.0,
            "expert reach rate {}",
            report.reach_rate
        );
        assert!(report.safety_rate >= report.reach_rate);
    }

    #[test]
    fn expert_replays_kept_scenarios_perfectly() {
        // Episodes kept by the dataset generator must replay through the
        // eval harness to the same reached-without-contact outcome.
        let cfg = CbfConfig::default();
        let ranges = ScenarioRanges::defaults(EnvKind::Vehicle);
        let generation =
            generate_demonstrations(12, EnvKind::Vehicle, &ranges, &cfg, 77).unwrap();
        let scenarios: Vec<Scenario> = generation
            .demos
            .iter()
            .map(|d| d.scenario.clone())
            .collect();
        let config = EvalConfig {
            n_trials: scenarios.len(),
            ranges,
            seed: 77,
        };
        let (report, _) =
            evaluate_on("expert", &EvalPolicy::Expert(&cfg), &scenarios, &config).unwrap();
        assert_eq!(report.safety_rate, 100.0);
        assert_eq!(report.reach_rate, 100.0);
        for t in &report.trials {
            assert!(t.min_clearance > 0.0);
        }
    }

    #[test]
    fn same_seed_and_policy_reproduce_the_report() {
        let ckpt = untrained_checkpoint(EnvKind::Vehicle, 8);
        let config = EvalConfig::preset(EnvKind::Vehicle, Preset::Default, 16, 99);
        let policy = EvalPolicy::Checkpoint(&ckpt);
        let (report_a, traj_a) = run_eval("m", &policy, EnvKind::Vehicle, &config).unwrap();
        let (report_b, traj_b) = run_eval("m", &policy, EnvKind::Vehicle, &config).unwrap();
        assert_eq!(report_a, report_b);
        assert_eq!(traj_a, traj_b);
    }

    #[test]
    fn environment_mismatch_is_rejected_before_rolling_out() {
        let ckpt = untrained_checkpoint(EnvKind::Vehicle, 8);
        let config = EvalConfig::preset(EnvKind::Manipulator, Preset::Default, 4, 1);
        let err = run_eval(
            "m",
            &EvalPolicy::Checkpoint(&ckpt),
            EnvKind::Manipulator,
            &config,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EnvMismatch { .. }), "got {err:?}");
    }

    #[test]
    fn identical_checkpoints_under_two_labels_give_identical_rows() {
        let ckpt = untrained_checkpoint(EnvKind::Vehicle, 21);
        let cfg = CbfConfig::default();
        let config = EvalConfig::preset(EnvKind::Vehicle, Preset::Default, 12, 5);
        let methods = vec![
            ("first".to_string(), EvalPolicy::Checkpoint(&ckpt)),
            ("second".to_string(), EvalPolicy::Checkpoint(&ckpt)),
            ("expert".to_string(), EvalPolicy::Expert(&cfg)),
        ];
        let (report, trajectories) = compare(&methods, EnvKind::Vehicle, &config).unwrap();
        assert_eq!(report.methods.len(), 3);
        assert_eq!(trajectories.len(), 3);
        let (a, b) = (&report.methods[0], &report.methods[1]);
        assert_eq!(a.safety_rate, b.safety_rate);
        assert_eq!(a.reach_rate, b.reach_rate);
        assert_eq!(a.trials, b.trials);
        // Every row proves it used the same scenario set.
        for row in &report.methods {
            assert_eq!(row.scenario_fingerprint, report.scenario_fingerprint);
        }
        let table = report.table();
        assert!(table.contains("first") && table.contains("expert"));
    }

    #[test]
    fn single_method_comparison_has_one_row() {
        let cfg = CbfConfig::default();
        let config = EvalConfig::preset(EnvKind::Manipulator, Preset::Default, 6, 9);
        let methods = vec![("expert".to_string(), EvalPolicy::Expert(&cfg))];
        let (report, _) = compare(&methods, EnvKind::Manipulator, &config).unwrap();
        assert_eq!(report.methods.len(), 1);
        assert_eq!(report.methods[0].method, PolicyKind::Expert);
    }

    #[test]
    fn recounting_trial_records_reproduces_the_reported_rates() {
        let ckpt = untrained_checkpoint(EnvKind::Vehicle, 33);
        let config = EvalConfig::preset(EnvKind::Vehicle, Preset::ShiftedSpeed, 24, 13);
        let (report, _) = run_eval(
            "m",
            &EvalPolicy::Checkpoint(&ckpt),
            EnvKind::Vehicle,
            &config,
        )
        .unwrap();
        assert_eq!(safety_rate(&report.trials).unwrap(), report.safety_rate);
        assert_eq!(reach_rate(&report.trials).unwrap(), report.reach_rate);
        assert!(report.reach_rate <= report.safety_rate);
    }

    #[test]
    fn trajectory_files_are_one_jsonl_per_trial() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = CbfConfig::default();
        let config = EvalConfig::preset(EnvKind::Vehicle, Preset::Default, 3, 41);
        let (_, trajectories) = run_eval(
            "expert",
            &EvalPolicy::Expert(&cfg),
            EnvKind::Vehicle,
            &config,
        )
        .unwrap();
        let paths = write_trajectories(dir.path(), "expert", &trajectories).unwrap();
        assert_eq!(paths.len(), 3);
        for (i, path) in paths.iter().enumerate() {
            assert!(path.file_name().unwrap().to_str().unwrap().contains(&format!("{i:04}")));
            let text = std::fs::read_to_string(path).unwrap();
            let lines: Vec<TrajectoryStep> = text
                .lines()
                .map(|l| serde_json::from_str(l).unwrap())
                .collect();
            assert_eq!(lines.len(), trajectories[i].steps.len());
            assert_eq!(lines.last().unwrap().action, None);
        }
    }
}
