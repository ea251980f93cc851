//! The two simulated tasks: a 2D ground vehicle with unicycle kinematics and
//! a 3D manipulator end-effector proxy under per-step displacement control.
//! Both share a single constant-velocity spherical obstacle and a point goal.
//!
//! Stepping is value-semantic: [`step`] consumes nothing and returns a fresh
//! [`EnvState`], so independent rollouts can run on independent workers. The
//! obstacle position is always computed in closed form from the elapsed time
//! (`p0 + elapsed * dt * v`), never by repeated addition, so long rollouts
//! accumulate no drift.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::latent::SafetyParams;
use crate::policy::ActionBounds;

/// Which task an artifact belongs to. Stored in datasets and checkpoints;
/// mixing kinds across pipeline stages is rejected at load time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Vehicle,
    Manipulator,
}

impl EnvKind {
    /// Dimension of the workspace the obstacle and goal live in.
    pub fn space_dim(self) -> usize {
        match self {
            EnvKind::Vehicle => 2,
            EnvKind::Manipulator => 3,
        }
    }

    /// Width of the agent state vector: vehicle `(x, y, theta)`,
    /// manipulator `(x, y, z)`.
    pub fn state_dim(self) -> usize {
        3
    }

    pub fn action_dim(self) -> usize {
        match self {
            EnvKind::Vehicle => 2,
            EnvKind::Manipulator => 3,
        }
    }

    /// Actuator box: vehicle speed in `[0, 1]` m/s and turn rate in
    /// `[-2, 2]` rad/s; manipulator displacement limited to 0.05 m per axis
    /// per step.
    pub fn action_bounds(self) -> ActionBounds {
        match self {
            EnvKind::Vehicle => ActionBounds::new(vec![0.0, -2.0], vec![1.0, 2.0]).unwrap(),
            EnvKind::Manipulator => {
                ActionBounds::new(vec![-0.05; 3], vec![0.05; 3]).unwrap()
            }
        }
    }

    pub fn dt(self) -> f64 {
        0.1
    }

    pub fn default_horizon(self) -> usize {
        match self {
            EnvKind::Vehicle => 300,
            EnvKind::Manipulator => 150,
        }
    }

    /// Collision radius attributed to the agent itself (disc for the
    /// vehicle, contact padding for the end-effector point).
    pub fn agent_radius(self) -> f64 {
        match self {
            EnvKind::Vehicle => 0.1,
            EnvKind::Manipulator => 0.02,
        }
    }

    pub fn goal_tolerance(self) -> f64 {
        match self {
            EnvKind::Vehicle => 0.15,
            EnvKind::Manipulator => 0.05,
        }
    }

    /// Hard position box for the manipulator end-effector; the vehicle's
    /// arena bounds only shape scenario sampling, not the dynamics.
    pub fn workspace(self) -> Option<Vec<(f64, f64)>> {
        match self {
            EnvKind::Vehicle => None,
            EnvKind::Manipulator => {
                Some(vec![(0.1, 0.6), (-0.35, 0.35), (0.05, 0.6)])
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EnvKind::Vehicle => "vehicle",
            EnvKind::Manipulator => "manipulator",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "vehicle" => Ok(EnvKind::Vehicle),
            "manipulator" => Ok(EnvKind::Manipulator),
            other => Err(Error::InvalidConfig(format!(
                "unknown environment '{other}' (expected 'vehicle' or 'manipulator')"
            ))),
        }
    }

    /// Workspace position of an agent state (drops the vehicle heading).
    pub fn position_of(self, state: &[f64]) -> &[f64] {
        match self {
            EnvKind::Vehicle => &state[..2],
            EnvKind::Manipulator => state,
        }
    }
}

/// One sampled episode configuration: where the agent starts, where it must
/// go, and what the obstacle does.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub env: EnvKind,
    pub initial_state: Vec<f64>,
    pub obstacle_position: Vec<f64>,
    pub obstacle_velocity: Vec<f64>,
    pub obstacle_radius: f64,
    pub goal: Vec<f64>,
    pub horizon: usize,
    pub dt: f64,
}

impl Scenario {
    /// Obstacle position after `elapsed` steps, in closed form.
    pub fn obstacle_at(&self, elapsed: usize) -> Vec<f64> {
        let t = elapsed as f64 * self.dt;
        self.obstacle_position
            .iter()
            .zip(&self.obstacle_velocity)
            .map(|(p, v)| p + t * v)
            .collect()
    }

    /// Contact distance: centers closer than this means collision.
    pub fn contact_distance(&self) -> f64 {
        self.obstacle_radius + self.env.agent_radius()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.env.space_dim();
        for (name, len, expected) in [
            ("initial state", self.initial_state.len(), self.env.state_dim()),
            ("obstacle position", self.obstacle_position.len(), d),
            ("obstacle velocity", self.obstacle_velocity.len(), d),
            ("goal", self.goal.len(), d),
        ] {
            if len != expected {
                let _ = name;
                return Err(Error::DimensionMismatch {
                    what: "scenario field",
                    expected,
                    got: len,
                });
            }
        }
        if !(self.obstacle_radius > 0.0) || !(self.dt > 0.0) {
            return Err(Error::InvalidConfig(
                "scenario needs positive obstacle radius and dt".into(),
            ));
        }
        Ok(())
    }
}

/// Why an episode ended, or that it has not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Running,
    Reached,
    Collided,
    Timeout,
}

impl Status {
    pub fn is_terminal(self) -> bool {
        self != Status::Running
    }
}

/// Live episode state. The obstacle position is redundantly cached (always
/// the closed-form value for `elapsed`) so per-step consumers need no
/// scenario arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub agent: Vec<f64>,
    pub obstacle: Vec<f64>,
    pub elapsed: usize,
    pub status: Status,
}

impl EnvState {
    /// Starting state, with termination already evaluated (a zero-step
    /// horizon times out immediately; a scenario born in contact collides).
    pub fn initial(scenario: &Scenario) -> EnvState {
        let mut state = EnvState {
            agent: scenario.initial_state.clone(),
            obstacle: scenario.obstacle_at(0),
            elapsed: 0,
            status: Status::Running,
        };
        state.status = check_termination(&state, scenario);
        state
    }
}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    std::f64::consts::PI - (std::f64::consts::PI - theta).rem_euclid(2.0 * std::f64::consts::PI)
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Episode status for a state, checked in the fixed order
/// collision -> reached -> timeout. Contact (distance exactly equal to the
/// combined radius) counts as collision; sitting exactly at the goal
/// tolerance counts as reached.
pub fn check_termination(state: &EnvState, scenario: &Scenario) -> Status {
    let pos = scenario.env.position_of(&state.agent);
    if euclidean_distance(pos, &state.obstacle) <= scenario.contact_distance() {
        Status::Collided
    } else if euclidean_distance(pos, &scenario.goal) <= scenario.env.goal_tolerance() {
        Status::Reached
    } else if state.elapsed >= scenario.horizon {
        Status::Timeout
    } else {
        Status::Running
    }
}

/// Advance one control step. The action is clamped to the actuator box, the
/// agent moves under its kinematics, the obstacle advances on its constant-
/// velocity line, and termination is evaluated at the new configuration.
pub fn step(state: &EnvState, action: &[f64], scenario: &Scenario) -> Result<EnvState> {
    if state.status.is_terminal() {
        return Err(Error::TerminalStep);
    }
    if action.len() != scenario.env.action_dim() {
        return Err(Error::DimensionMismatch {
            what: "action",
            expected: scenario.env.action_dim(),
            got: action.len(),
        });
    }
    let a = scenario.env.action_bounds().clamped(action);
    let agent = match scenario.env {
        EnvKind::Vehicle => {
            let (x, y, theta) = (state.agent[0], state.agent[1], state.agent[2]);
            let (v, omega) = (a[0], a[1]);
            vec![
                x + scenario.dt * v * theta.cos(),
                y + scenario.dt * v * theta.sin(),
                wrap_angle(theta + scenario.dt * omega),
            ]
        }
        EnvKind::Manipulator => {
            let workspace = scenario.env.workspace().unwrap();
            state
                .agent
                .iter()
                .zip(a.iter().zip(&workspace))
                .map(|(p, (dp, (lo, hi)))| (p + dp).clamp(*lo, *hi))
                .collect()
        }
    };
    let elapsed = state.elapsed + 1;
    let mut next = EnvState {
        agent,
        obstacle: scenario.obstacle_at(elapsed),
        elapsed,
        status: Status::Running,
    };
    next.status = check_termination(&next, scenario);
    Ok(next)
}

/// Safety parameters the policy conditions on at this moment: the CURRENT
/// obstacle position (re-read every step), the constant obstacle velocity
/// and radius, and the goal.
pub fn current_safety_params(state: &EnvState, scenario: &Scenario) -> SafetyParams {
    SafetyParams {
        obstacle_position: state.obstacle.clone(),
        obstacle_velocity: scenario.obstacle_velocity.clone(),
        obstacle_radius: scenario.obstacle_radius,
        goal: scenario.goal.clone(),
    }
}
