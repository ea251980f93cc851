//! Scenario sampling: random start/goal pairs with an obstacle placed on an
//! interception course.
//!
//! Rather than scattering obstacles uniformly (which makes most of them
//! irrelevant), the sampler picks a crossing point partway along the
//! start-to-goal segment and back-solves the obstacle's starting position so
//! it arrives there around the same time as an agent moving at a typical
//! speed. Slow obstacles degenerate gracefully into near-static blockers
//! sitting on the path. Draws whose initial obstacle position violates the
//! clearance margins around the start or the goal are rejected and retried.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{euclidean_distance, EnvKind, Scenario};
use crate::error::{Error, Result};
use crate::latent::{safety_dim, Normalizer};

/// Sampling ranges for one environment. All scalar ranges are inclusive
/// `(lo, hi)` pairs and may be pinned degenerate (`lo == hi`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRanges {
    /// Per-axis box the agent's starting position is drawn from.
    pub start_box: Vec<(f64, f64)>,
    /// Initial-heading range in radians (vehicle only; ignored for the
    /// manipulator).
    pub heading: (f64, f64),
    /// Per-axis box the goal is drawn from.
    pub goal_box: Vec<(f64, f64)>,
    /// Obstacle radius range in meters.
    pub radius: (f64, f64),
    /// Obstacle speed range in m/s.
    pub speed: (f64, f64),
    /// Required clearance beyond contact distance between the initial
    /// obstacle position and both the start and the goal.
    pub safe_margin: f64,
    /// Start/goal pairs closer than this are redrawn.
    pub min_start_goal_dist: f64,
    /// Where along the start-to-goal segment the obstacle crosses, as a
    /// fraction of the segment length.
    pub intercept_fraction: (f64, f64),
    /// Approach-direction azimuth range in radians.
    pub approach_azimuth: (f64, f64),
    /// Vertical cosine range of the approach direction (manipulator only;
    /// ignored for the vehicle).
    pub approach_z: (f64, f64),
    /// Typical agent cruise speed used to time the interception (m/s).
    pub agent_speed_estimate: f64,
    /// Episode horizon in steps.
    pub horizon: usize,
    /// Rejection-sampling retry budget per scenario.
    pub max_attempts: usize,
}

impl ScenarioRanges {
    pub fn defaults(kind: EnvKind) -> Self {
        use std::f64::consts::PI;
        match kind {
            EnvKind::Vehicle => ScenarioRanges {
                start_box: vec![(-4.0, 4.0), (-4.0, 4.0)],
                heading: (-PI, PI),
                goal_box: vec![(-4.0, 4.0), (-4.0, 4.0)],
                radius: (0.3, 0.8),
                speed: (0.0, 0.5),
                safe_margin: 0.5,
                min_start_goal_dist: 5.0,
                intercept_fraction: (0.25, 0.75),
                approach_azimuth: (-PI, PI),
                approach_z: (-1.0, 1.0),
                agent_speed_estimate: 0.8,
                horizon: kind.default_horizon(),
                max_attempts: 500,
            },
            EnvKind::Manipulator => ScenarioRanges {
                start_box: vec![(0.15, 0.55), (-0.3, 0.3), (0.1, 0.55)],
                heading: (0.0, 0.0),
                goal_box: vec![(0.15, 0.55), (-0.3, 0.3), (0.1, 0.55)],
                radius: (0.03, 0.08),
                speed: (0.0, 0.05),
                safe_margin: 0.05,
                min_start_goal_dist: 0.35,
                intercept_fraction: (0.25, 0.75),
                approach_azimuth: (-PI, PI),
                approach_z: (-1.0, 1.0),
                agent_speed_estimate: 0.3,
                horizon: kind.default_horizon(),
                max_attempts: 500,
            },
        }
    }

    /// Multiply both ends of the obstacle speed range (distribution shift).
    pub fn scaled_speed(mut self, factor: f64) -> Self {
        self.speed = (self.speed.0 * factor, self.speed.1 * factor);
        self
    }

    /// Multiply both ends of the obstacle radius range (distribution shift).
    pub fn scaled_radius(mut self, factor: f64) -> Self {
        self.radius = (self.radius.0 * factor, self.radius.1 * factor);
        self
    }

    pub fn validate(&self, kind: EnvKind) -> Result<()> {
        let d = kind.space_dim();
        if self.start_box.len() != d || self.goal_box.len() != d {
            return Err(Error::InvalidConfig(format!(
                "start/goal boxes need {d} axes for {}",
                kind.as_str()
            )));
        }
        let ordered = |(lo, hi): (f64, f64)| lo <= hi && lo.is_finite() && hi.is_finite();
        if !self
            .start_box
            .iter()
            .chain(&self.goal_box)
            .all(|&r| ordered(r))
            || !ordered(self.heading)
            || !ordered(self.radius)
            || !ordered(self.speed)
            || !ordered(self.intercept_fraction)
            || !ordered(self.approach_azimuth)
            || !ordered(self.approach_z)
        {
            return Err(Error::InvalidConfig("range with lo > hi or non-finite bound".into()));
        }
        if self.radius.0 <= 0.0 {
            return Err(Error::InvalidConfig("obstacle radius must be positive".into()));
        }
        if self.speed.0 < 0.0 {
            return Err(Error::InvalidConfig("obstacle speed cannot be negative".into()));
        }
        if self.agent_speed_estimate <= 0.0 {
            return Err(Error::InvalidConfig("agent speed estimate must be positive".into()));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidConfig("max_attempts must be at least 1".into()));
        }
        Ok(())
    }

    /// Per-component `(lo, hi)` spans of the flat safety parameter vector
    /// under these ranges, for building the input normalizer. Obstacle
    /// positions get the start/goal hull expanded by the largest lead-in
    /// distance the interception construction can produce.
    pub fn safety_param_ranges(&self, kind: EnvKind) -> Vec<(f64, f64)> {
        let d = kind.space_dim();
        let hull: Vec<(f64, f64)> = (0..d)
            .map(|i| {
                (
                    self.start_box[i].0.min(self.goal_box[i].0),
                    self.start_box[i].1.max(self.goal_box[i].1),
                )
            })
            .collect();
        let diag = hull
            .iter()
            .map(|(lo, hi)| (hi - lo) * (hi - lo))
            .sum::<f64>()
            .sqrt();
        let max_lead =
            self.speed.1 * self.intercept_fraction.1 * diag / self.agent_speed_estimate;

        let mut ranges = Vec::with_capacity(safety_dim(d));
        for &(lo, hi) in &hull {
            ranges.push((lo - max_lead, hi + max_lead));
        }
        for _ in 0..d {
            ranges.push((-self.speed.1, self.speed.1));
        }
        ranges.push(self.radius);
        ranges.extend(self.goal_box.iter().copied());
        ranges
    }

    /// Normalizer taking raw safety parameters to roughly `[-1, 1]`.
    pub fn normalizer(&self, kind: EnvKind) -> Normalizer {
        Normalizer::from_ranges(&self.safety_param_ranges(kind))
    }
}

fn draw<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    rng.random_range(lo..=hi)
}

fn draw_box<R: Rng + ?Sized>(rng: &mut R, boxes: &[(f64, f64)]) -> Vec<f64> {
    boxes.iter().map(|&r| draw(rng, r)).collect()
}

/// Unit approach direction: a planar angle in 2D, azimuth plus vertical
/// cosine in 3D.
fn draw_direction<R: Rng + ?Sized>(rng: &mut R, ranges: &ScenarioRanges, d: usize) -> Vec<f64> {
    let azimuth = draw(rng, ranges.approach_azimuth);
    if d == 2 {
        vec![azimuth.cos(), azimuth.sin()]
    } else {
        let z = draw(rng, ranges.approach_z).clamp(-1.0, 1.0);
        let planar = (1.0 - z * z).sqrt();
        vec![planar * azimuth.cos(), planar * azimuth.sin(), z]
    }
}

/// Draw one scenario satisfying the clearance invariants, retrying up to
/// `ranges.max_attempts` times.
pub fn sample_scenario<R: Rng + ?Sized>(
    rng: &mut R,
    kind: EnvKind,
    ranges: &ScenarioRanges,
) -> Result<Scenario> {
    ranges.validate(kind)?;
    let d = kind.space_dim();
    for _ in 0..ranges.max_attempts {
        let start = draw_box(rng, &ranges.start_box);
        let goal = draw_box(rng, &ranges.goal_box);
        let dist = euclidean_distance(&start, &goal);
        if dist < ranges.min_start_goal_dist {
            continue;
        }
        let initial_state = match kind {
            EnvKind::Vehicle => {
                let heading = draw(rng, ranges.heading);
                vec![start[0], start[1], heading]
            }
            EnvKind::Manipulator => start.clone(),
        };

        let radius = draw(rng, ranges.radius);
        let speed = draw(rng, ranges.speed);
        let fraction = draw(rng, ranges.intercept_fraction);
        let direction = draw_direction(rng, ranges, d);

        // Crossing point and the time the agent typically needs to get there.
        let crossing: Vec<f64> = start
            .iter()
            .zip(&goal)
            .map(|(s, g)| s + fraction * (g - s))
            .collect();
        let time_to_cross = fraction * dist / ranges.agent_speed_estimate;
        let lead = speed * time_to_cross;
        let obstacle_position: Vec<f64> =
            crossing.iter().zip(&direction).map(|(q, u)| q - lead * u).collect();
        let obstacle_velocity: Vec<f64> = direction.iter().map(|u| speed * u).collect();

        let contact = radius + kind.agent_radius();
        let clear_of = |point: &[f64]| {
            euclidean_distance(&obstacle_position, point) - contact > ranges.safe_margin
        };
        if !clear_of(&start) || !clear_of(&goal) {
            continue;
        }

        return Ok(Scenario {
            env: kind,
            initial_state,
            obstacle_position,
            obstacle_velocity,
            obstacle_radius: radius,
            goal,
            horizon: ranges.horizon,
            dt: kind.dt(),
        });
    }
    Err(Error::SamplingExhausted {
        attempts: ranges.max_attempts,
    })
}
