//! Safety-filtered expert controller and demonstration generation.
//!
//! The expert wraps a proportional goal-seeking controller with a collision-
//! cone barrier filter: at every step it solves the small quadratic program
//!
//! ```text
//! min ||u - u_nom||^2   subject to   hdot(u) + alpha * h >= 0,  u in the actuator box
//! ```
//!
//! where `h` is the collision-cone barrier over the agent/obstacle relative
//! state. The constraint is affine in the action, so the program is a
//! projection onto a half-space intersected with a box and is solved exactly
//! (closed form when the box is slack, monotone bisection when it binds).
//!
//! Because both tasks are velocity-controlled, the action changes the
//! barrier instantaneously, and the condition is imposed directly in
//! velocity space each step:
//!
//! ```text
//! h(p, v_rel(u)) >= min(0, (1 - alpha * dt) * h(p, v_rel_prev))
//! ```
//!
//! where `v_rel_prev` uses the velocity applied on the previous step. While
//! safe (`h >= 0`) the floor is zero: the commanded velocity must stay out
//! of the (padded) collision cone, and the constraint goes inactive — the
//! expert exactly equals its nominal controller — whenever the nominal
//! already does so. Only when the state is already inside the cone does the
//! classic decay floor engage, walking `h` back to zero geometrically at
//! rate `alpha` instead of demanding an instant exit. An always-on decay
//! floor would also forbid harmless *decreases* of a large `h` (the barrier
//! falls naturally throughout any approach), keeping the filter engaged on
//! most steps and leaving high-frequency steering corrections in the
//! demonstrations; the one-sided floor removes that affliction.
//!
//! The barrier is enforced at a padded radius (contact plus a fraction of
//! the agent radius), and discretization can push the separation slightly
//! inside that padded sphere, where the cone is undefined. There the barrier
//! degrades continuously to its closing-speed term `<p_rel, v_rel>` — the
//! square root vanishes at the sphere — and the floor switches to the
//! separation-barrier condition at the same rate: `<p_rel, v_rel> >= alpha *
//! dist * (r_pad - dist)`, i.e. actively retreat until the padding band is
//! cleared. Overshoot therefore cannot accumulate across steps, and the
//! physical clearance stays on the order of the padding.
//!
//! The left side is convex in the action (linear term plus a norm), so
//! linearizing it at the nominal action gives a global underestimate and the
//! resulting affine constraint is sufficient for the true condition. For the
//! vehicle, the turn rate enters the velocity map through the rotation of
//! the heading vector at a fixed reference speed, which keeps the constraint
//! affine; that anticipation term is the one uncontrolled approximation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{current_safety_params, step, EnvKind, EnvState, Scenario, Status};
use crate::error::{Error, Result};
use crate::policy::ActionBounds;
use crate::scenario::{sample_scenario, ScenarioRanges};
use crate::seeding::derive_seed;

/// Expert controller constants. Defaults follow the values used throughout
/// the test suite; all are per-second quantities independent of the env.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CbfConfig {
    /// Class-K gain on the barrier (1/s): larger lets trajectories approach
    /// the cone boundary faster.
    pub alpha: f64,
    /// Vehicle goal-attraction gain (speed per meter of distance).
    pub k_v: f64,
    /// Vehicle heading gain (turn rate per radian of bearing error).
    pub k_omega: f64,
    /// Manipulator per-step displacement toward the goal (m).
    pub step_gain: f64,
    /// Floor on the reference speed used to linearize the steering effect,
    /// so the turn rate stays authoritative even when nearly stopped (m/s).
    pub min_reference_speed: f64,
    /// Extra standoff enforced by the barrier, as a fraction of the agent
    /// radius added to the combined radius. Keeps kept episodes from grazing
    /// the obstacle at zero clearance.
    pub radius_padding_fraction: f64,
}

impl Default for CbfConfig {
    fn default() -> Self {
        CbfConfig {
            alpha: 1.0,
            k_v: 0.5,
            k_omega: 2.0,
            step_gain: 0.04,
            min_reference_speed: 0.1,
            radius_padding_fraction: 0.5,
        }
    }
}

impl CbfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidConfig("barrier gain alpha must be positive".into()));
        }
        if !(self.k_v > 0.0 && self.k_omega > 0.0 && self.step_gain > 0.0) {
            return Err(Error::InvalidConfig("controller gains must be positive".into()));
        }
        if !(self.min_reference_speed > 0.0) {
            return Err(Error::InvalidConfig("reference speed floor must be positive".into()));
        }
        if !(self.radius_padding_fraction >= 0.0 && self.radius_padding_fraction.is_finite()) {
            return Err(Error::InvalidConfig(
                "radius padding fraction must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Collision-cone barrier.
///
/// `p_rel` points from the agent to the obstacle center, `v_rel` is the
/// obstacle velocity relative to the agent, and `r` is the combined radius.
/// `h = <p_rel, v_rel> + ||v_rel|| * sqrt(||p_rel||^2 - r^2)`; negative
/// exactly when the relative velocity points inside the collision cone.
pub fn cone_barrier(p_rel: &[f64], v_rel: &[f64], r: f64) -> Result<f64> {
    let p2: f64 = p_rel.iter().map(|x| x * x).sum();
    if p2 <= r * r {
        return Err(Error::DegenerateGeometry);
    }
    let dot: f64 = p_rel.iter().zip(v_rel).map(|(p, v)| p * v).sum();
    let v_norm: f64 = v_rel.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(dot + v_norm * (p2 - r * r).sqrt())
}

/// Gradients of [`cone_barrier`] with respect to `p_rel` and `v_rel`.
/// At `v_rel = 0` the (set-valued) velocity gradient is taken as `p_rel`,
/// a valid subgradient of the convex map `v -> h(p, v)`.
pub fn cone_barrier_gradients(
    p_rel: &[f64],
    v_rel: &[f64],
    r: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let p2: f64 = p_rel.iter().map(|x| x * x).sum();
    if p2 <= r * r {
        return Err(Error::DegenerateGeometry);
    }
    let s = (p2 - r * r).sqrt();
    let v_norm: f64 = v_rel.iter().map(|x| x * x).sum::<f64>().sqrt();
    let d_p: Vec<f64> = p_rel
        .iter()
        .zip(v_rel)
        .map(|(p, v)| v + v_norm * p / s)
        .collect();
    let d_v: Vec<f64> = if v_norm < 1e-12 {
        p_rel.to_vec()
    } else {
        p_rel
            .iter()
            .zip(v_rel)
            .map(|(p, v)| p + s * v / v_norm)
            .collect()
    };
    Ok((d_p, d_v))
}

/// Exact minimizer of `||u - u_nom||^2` over
/// `{u in box : <g, u> + offset >= 0}`.
///
/// KKT form: the solution is `clamp(u_nom + lambda * g)` for the smallest
/// `lambda >= 0` making the constraint hold; `phi(lambda) = <g, clamp(u_nom
/// + lambda g)> + offset` is continuous and non-decreasing, so that lambda
/// is found in closed form when no box face binds and by bisection when one
/// does. Returns an infeasibility error when even the saturated action
/// cannot satisfy the constraint.
pub fn solve_halfspace_box_qp(
    u_nom: &[f64],
    g: &[f64],
    offset: f64,
    bounds: &ActionBounds,
) -> Result<Vec<f64>> {
    let n = u_nom.len();
    if g.len() != n || bounds.dim() != n {
        return Err(Error::DimensionMismatch {
            what: "QP vectors",
            expected: n,
            got: g.len().min(bounds.dim()),
        });
    }
    let clamp_at = |lambda: f64| -> Vec<f64> {
        (0..n)
            .map(|i| (u_nom[i] + lambda * g[i]).clamp(bounds.lo[i], bounds.hi[i]))
            .collect()
    };
    let phi = |u: &[f64]| -> f64 { g.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() + offset };

    let base = clamp_at(0.0);
    if phi(&base) >= 0.0 {
        return Ok(base);
    }

    // Half-space-only solution; exact whenever it stays inside the box.
    let g2: f64 = g.iter().map(|x| x * x).sum();
    if g2 > 0.0 {
        let lambda_free = -phi(u_nom) / g2;
        if lambda_free >= 0.0 {
            let u_free: Vec<f64> = (0..n).map(|i| u_nom[i] + lambda_free * g[i]).collect();
            if bounds.contains(&u_free, 0.0) {
                return Ok(u_free);
            }
        }
    }

    // The box binds. phi saturates once every component is pinned; if even
    // the saturated action violates the constraint the program is infeasible.
    let saturated: Vec<f64> = (0..n)
        .map(|i| {
            if g[i] > 0.0 {
                bounds.hi[i]
            } else if g[i] < 0.0 {
                bounds.lo[i]
            } else {
                base[i]
            }
        })
        .collect();
    if phi(&saturated) < 0.0 {
        return Err(Error::InfeasibleConstraint);
    }
    let lambda_sat = (0..n)
        .filter(|&i| g[i] != 0.0)
        .map(|i| (saturated[i] - u_nom[i]) / g[i])
        .fold(0.0f64, f64::max);

    // Bisect keeping phi(hi) >= 0 > phi(lo); the returned point is feasible
    // and within interval-width of the optimum.
    let (mut lo, mut hi) = (0.0, lambda_sat);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if phi(&clamp_at(mid)) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(clamp_at(hi))
}

/// Affine coefficients of the linearized barrier-decay condition: the
/// constraint on the action is `<g, u> + offset >= 0`.
struct BarrierConstraint {
    g: Vec<f64>,
    offset: f64,
}

/// One expert episode's controller; holds the velocity actually commanded on
/// the previous step, which the barrier treats as the agent's current
/// velocity. Create a fresh controller per episode.
pub struct ExpertController {
    cfg: CbfConfig,
    /// Radius the barrier enforces: contact distance plus padding.
    constraint_radius: f64,
    /// Physical contact distance, used when reporting the applied barrier.
    contact_radius: f64,
    prev_velocity: Vec<f64>,
}

impl ExpertController {
    pub fn new(scenario: &Scenario, cfg: CbfConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.alpha * scenario.dt >= 1.0 {
            return Err(Error::InvalidConfig(
                "alpha * dt must stay below 1 for the discrete decay condition".into(),
            ));
        }
        let contact_radius = scenario.contact_distance();
        if !(contact_radius > 0.0) {
            return Err(Error::InvalidConfig("combined radius must be positive".into()));
        }
        let constraint_radius =
            contact_radius + cfg.radius_padding_fraction * scenario.env.agent_radius();
        Ok(ExpertController {
            cfg,
            constraint_radius,
            contact_radius,
            prev_velocity: vec![0.0; scenario.env.space_dim()],
        })
    }

    /// Goal-seeking action ignoring the obstacle. Always inside the
    /// actuator box.
    pub fn nominal_action(&self, state: &EnvState, scenario: &Scenario) -> Vec<f64> {
        match scenario.env {
            EnvKind::Vehicle => {
                let (x, y, theta) = (state.agent[0], state.agent[1], state.agent[2]);
                let (dx, dy) = (scenario.goal[0] - x, scenario.goal[1] - y);
                let dist = (dx * dx + dy * dy).sqrt();
                let bearing_error = crate::env::wrap_angle(dy.atan2(dx) - theta);
                let omega = (self.cfg.k_omega * bearing_error).clamp(-2.0, 2.0);
                // Drive forward only when roughly facing the goal; otherwise
                // turn in place.
                let v = (self.cfg.k_v * dist).clamp(0.0, 1.0) * bearing_error.cos().max(0.0);
                vec![v, omega]
            }
            EnvKind::Manipulator => {
                let to_goal: Vec<f64> = scenario
                    .goal
                    .iter()
                    .zip(&state.agent)
                    .map(|(g, p)| g - p)
                    .collect();
                let dist = to_goal.iter().map(|x| x * x).sum::<f64>().sqrt();
                if dist < 1e-12 {
                    return vec![0.0; 3];
                }
                let scale = (self.cfg.step_gain / dist).min(1.0);
                to_goal.iter().map(|d| d * scale).collect()
            }
        }
    }

    /// Affine velocity map used inside the barrier constraint. For the
    /// manipulator this is the exact realized velocity `u / dt`; for the
    /// vehicle the realized velocity `v * e_theta` is augmented with the
    /// turn rate's anticipated rotation at a reference speed, so steering
    /// can satisfy the constraint.
    fn velocity_map(
        &self,
        action: &[f64],
        state: &EnvState,
        scenario: &Scenario,
        v_ref: f64,
    ) -> Vec<f64> {
        match scenario.env {
            EnvKind::Vehicle => {
                let theta = state.agent[2];
                let rot = v_ref * scenario.dt * action[1];
                vec![
                    action[0] * theta.cos() - rot * theta.sin(),
                    action[0] * theta.sin() + rot * theta.cos(),
                ]
            }
            EnvKind::Manipulator => action.iter().map(|a| a / scenario.dt).collect(),
        }
    }

    /// Agent velocity actually realized by executing `action` from `state`
    /// (no steering anticipation). Accounts for the workspace clamp, which
    /// can absorb part of a commanded displacement at the boundary.
    fn realized_velocity(&self, action: &[f64], state: &EnvState, scenario: &Scenario) -> Vec<f64> {
        match scenario.env {
            EnvKind::Vehicle => {
                let theta = state.agent[2];
                vec![action[0] * theta.cos(), action[0] * theta.sin()]
            }
            EnvKind::Manipulator => {
                let ws = scenario.env.workspace().expect("manipulator has a workspace");
                action
                    .iter()
                    .zip(&state.agent)
                    .zip(&ws)
                    .map(|((a, p), (lo, hi))| ((p + a).clamp(*lo, *hi) - p) / scenario.dt)
                    .collect()
            }
        }
    }

    fn relative_position(&self, state: &EnvState, scenario: &Scenario) -> Vec<f64> {
        let agent_pos = scenario.env.position_of(&state.agent);
        state
            .obstacle
            .iter()
            .zip(agent_pos)
            .map(|(o, a)| o - a)
            .collect()
    }

    /// Build one affine constraint `<g, u> + offset >= 0` inner-approximating
    /// `h(p, v_rel(u)) >= decay_floor` by linearizing the (convex in v)
    /// barrier at the relative velocity `v0`:
    ///
    /// ```text
    /// h(p, v_obs - V(u)) >= h(p, v0) + <dh/dv(v0), (v_obs - V(u)) - v0>
    /// ```
    ///
    /// so any action feasible for the linearization satisfies the true
    /// condition.
    fn barrier_constraint(
        &self,
        state: &EnvState,
        scenario: &Scenario,
        p_rel: &[f64],
        v0: &[f64],
        decay_floor: f64,
        v_ref: f64,
    ) -> Result<BarrierConstraint> {
        let dt = scenario.dt;
        let (h0, dh_dv) = self.padded_barrier(p_rel, v0)?;

        // The action enters through -<dh_dv, V(u)>; everything else is
        // constant and joins the offset.
        let g = match scenario.env {
            EnvKind::Vehicle => {
                let theta = state.agent[2];
                let g_v = -(dh_dv[0] * theta.cos() + dh_dv[1] * theta.sin());
                let g_omega =
                    -v_ref * dt * (-dh_dv[0] * theta.sin() + dh_dv[1] * theta.cos());
                vec![g_v, g_omega]
            }
            EnvKind::Manipulator => dh_dv.iter().map(|d| -d / dt).collect(),
        };
        let constant: f64 = dh_dv
            .iter()
            .zip(
                scenario
                    .obstacle_velocity
                    .iter()
                    .zip(v0)
                    .map(|(vo, v)| vo - v),
            )
            .map(|(d, diff)| d * diff)
            .sum();
        let offset = h0 + constant - decay_floor;

        Ok(BarrierConstraint { g, offset })
    }

    /// Barrier value and velocity gradient at the padded radius, extended
    /// continuously into the padding band. Outside the padded sphere this is
    /// the collision cone; at the sphere the square-root term vanishes, so
    /// inside only the closing-speed term `<p_rel, v_rel>` remains (linear —
    /// hence still convex — in the velocity). Separations at or below
    /// physical contact are degenerate.
    fn padded_barrier(&self, p_rel: &[f64], v_rel: &[f64]) -> Result<(f64, Vec<f64>)> {
        let p2: f64 = p_rel.iter().map(|x| x * x).sum();
        if p2 <= self.contact_radius * self.contact_radius {
            return Err(Error::DegenerateGeometry);
        }
        let r = self.constraint_radius;
        if p2 > r * r {
            let h = cone_barrier(p_rel, v_rel, r)?;
            let (_, dh_dv) = cone_barrier_gradients(p_rel, v_rel, r)?;
            Ok((h, dh_dv))
        } else {
            let h = p_rel.iter().zip(v_rel).map(|(p, v)| p * v).sum();
            Ok((h, p_rel.to_vec()))
        }
    }

    /// Lower bound imposed on the barrier at the commanded velocity. Outside
    /// the padded sphere the bound is one-sided: zero while the previously
    /// applied velocity was outside the cone (staying out is all safety
    /// requires), the geometric decay toward zero only when it was inside.
    /// Within the padding band the separation barrier `dist - r_pad` takes
    /// over, and its condition at the same rate demands a closing speed of
    /// at most `-alpha * (r_pad - dist)` — active retreat until the band is
    /// cleared.
    fn barrier_floor(&self, p_rel: &[f64], v_rel_prev: &[f64], dt: f64) -> Result<f64> {
        let p2: f64 = p_rel.iter().map(|x| x * x).sum();
        if p2 <= self.contact_radius * self.contact_radius {
            return Err(Error::DegenerateGeometry);
        }
        let r = self.constraint_radius;
        if p2 > r * r {
            let h_prev = cone_barrier(p_rel, v_rel_prev, r)?;
            Ok(((1.0 - self.cfg.alpha * dt) * h_prev).min(0.0))
        } else {
            let dist = p2.sqrt();
            Ok(self.cfg.alpha * dist * (r - dist))
        }
    }

    /// Linearization points for the barrier. The nominal relative velocity
    /// can sit on the cone axis (obstacle dead ahead), where the gradient
    /// collapses and a single half-space has no steering authority, so
    /// laterally swerved velocities and the previously applied one are
    /// offered as alternatives. Every candidate yields a sound inner
    /// approximation; the controller keeps the feasible result closest to
    /// the nominal action.
    fn linearization_points(
        &self,
        p_rel: &[f64],
        v_nom_rel: &[f64],
        v_rel_prev: &[f64],
    ) -> Vec<Vec<f64>> {
        let mut points = vec![v_nom_rel.to_vec()];
        let speed = v_nom_rel.iter().map(|x| x * x).sum::<f64>().sqrt();
        let delta = 0.5 * speed.max(0.1);
        let p_norm = p_rel.iter().map(|x| x * x).sum::<f64>().sqrt();
        if p_norm > 1e-12 {
            let p_hat: Vec<f64> = p_rel.iter().map(|x| x / p_norm).collect();
            let mut laterals: Vec<Vec<f64>> = Vec::new();
            if p_rel.len() == 2 {
                laterals.push(vec![-p_hat[1], p_hat[0]]);
            } else {
                // Cross the least-aligned axis with p_hat for the first
                // perpendicular, then complete the frame.
                let axis = if p_hat[0].abs() <= p_hat[1].abs().min(p_hat[2].abs()) {
                    [1.0, 0.0, 0.0]
                } else if p_hat[1].abs() <= p_hat[2].abs() {
                    [0.0, 1.0, 0.0]
                } else {
                    [0.0, 0.0, 1.0]
                };
                let mut e1 = [
                    axis[1] * p_hat[2] - axis[2] * p_hat[1],
                    axis[2] * p_hat[0] - axis[0] * p_hat[2],
                    axis[0] * p_hat[1] - axis[1] * p_hat[0],
                ];
                let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
                for v in &mut e1 {
                    *v /= n1;
                }
                let e2 = [
                    p_hat[1] * e1[2] - p_hat[2] * e1[1],
                    p_hat[2] * e1[0] - p_hat[0] * e1[2],
                    p_hat[0] * e1[1] - p_hat[1] * e1[0],
                ];
                laterals.push(e1.to_vec());
                laterals.push(e2.to_vec());
            }
            for lateral in laterals {
                // Hysteresis: offer first the side the agent is already
                // moving toward, so near-tied left/right swerves do not
                // alternate step to step. A positive component of the
                // previous agent velocity along the lateral axis shows up
                // as a negative relative-velocity shift.
                let along: f64 = self
                    .prev_velocity
                    .iter()
                    .zip(&lateral)
                    .map(|(v, e)| v * e)
                    .sum();
                let first = if along > 0.0 { -1.0 } else { 1.0 };
                for sign in [first, -first] {
                    points.push(
                        v_nom_rel
                            .iter()
                            .zip(&lateral)
                            .map(|(v, e)| v + sign * delta * e)
                            .collect(),
                    );
                }
            }
        }
        points.push(v_rel_prev.to_vec());
        points
    }

    /// Safety-filtered action for the current state. Errors with
    /// [`Error::InfeasibleConstraint`] when no in-box action satisfies the
    /// linearized barrier condition (callers discard such episodes) and
    /// [`Error::DegenerateGeometry`] if called from inside contact.
    pub fn action(&mut self, state: &EnvState, scenario: &Scenario) -> Result<Vec<f64>> {
        let (action, _) = self.action_with_barrier(state, scenario)?;
        Ok(action)
    }

    /// As [`ExpertController::action`], also exposing the barrier value at
    /// the applied velocity, `h(p, v_obs - v_applied)` (for invariance
    /// instrumentation: negative means the agent was momentarily on a
    /// collision course).
    pub fn action_with_barrier(
        &mut self,
        state: &EnvState,
        scenario: &Scenario,
    ) -> Result<(Vec<f64>, f64)> {
        let bounds = scenario.env.action_bounds();
        let u_nom = self.nominal_action(state, scenario);
        let v_ref = u_nom[0].abs().max(self.cfg.min_reference_speed);

        let p_rel = self.relative_position(state, scenario);
        let v_rel_prev: Vec<f64> = scenario
            .obstacle_velocity
            .iter()
            .zip(&self.prev_velocity)
            .map(|(vo, va)| vo - va)
            .collect();
        let decay_floor = self.barrier_floor(&p_rel, &v_rel_prev, scenario.dt)?;
        let vel_nom = self.velocity_map(&u_nom, state, scenario, v_ref);
        let v_nom_rel: Vec<f64> = scenario
            .obstacle_velocity
            .iter()
            .zip(&vel_nom)
            .map(|(vo, va)| vo - va)
            .collect();

        let mut best: Option<(Vec<f64>, f64)> = None;
        for v0 in self.linearization_points(&p_rel, &v_nom_rel, &v_rel_prev) {
            let constraint =
                self.barrier_constraint(state, scenario, &p_rel, &v0, decay_floor, v_ref)?;
            match solve_halfspace_box_qp(&u_nom, &constraint.g, constraint.offset, &bounds) {
                Ok(u) => {
                    let dist: f64 =
                        u.iter().zip(&u_nom).map(|(a, b)| (a - b) * (a - b)).sum();
                    // Earlier candidates are preferred: a later one must beat
                    // the incumbent by a clear margin, so near-tied swerve
                    // sides stay put instead of chattering.
                    if best.as_ref().is_none_or(|(_, d)| dist < 0.98 * *d) {
                        best = Some((u, dist));
                    }
                }
                Err(Error::InfeasibleConstraint) => continue,
                Err(e) => return Err(e),
            }
        }
        let Some((u, _)) = best else {
            return Err(Error::InfeasibleConstraint);
        };
        self.prev_velocity = self.realized_velocity(&u, state, scenario);
        let p_rel = self.relative_position(state, scenario);
        let v_rel_applied: Vec<f64> = scenario
            .obstacle_velocity
            .iter()
            .zip(&self.prev_velocity)
            .map(|(vo, va)| vo - va)
            .collect();
        // Report against the physical contact radius, not the padded one;
        // staying outside the padded cone makes this comfortably positive.
        let h_applied = cone_barrier(&p_rel, &v_rel_applied, self.contact_radius)?;
        Ok((u, h_applied))
    }

    /// Best-effort action for closed-loop runs that cannot discard an
    /// episode: the certified safety-filtered action when one exists,
    /// otherwise the saturated box action that raises the (linearized)
    /// barrier fastest — maximal evasion rather than a certificate.
    pub fn action_or_evade(&mut self, state: &EnvState, scenario: &Scenario) -> Result<Vec<f64>> {
        match self.action_with_barrier(state, scenario) {
            Ok((u, _)) => Ok(u),
            Err(Error::InfeasibleConstraint) => {
                let bounds = scenario.env.action_bounds();
                let u_nom = self.nominal_action(state, scenario);
                let v_ref = u_nom[0].abs().max(self.cfg.min_reference_speed);
                let p_rel = self.relative_position(state, scenario);
                let v_rel_prev: Vec<f64> = scenario
                    .obstacle_velocity
                    .iter()
                    .zip(&self.prev_velocity)
                    .map(|(vo, va)| vo - va)
                    .collect();
                let decay_floor = self.barrier_floor(&p_rel, &v_rel_prev, scenario.dt)?;
                let vel_nom = self.velocity_map(&u_nom, state, scenario, v_ref);
                let v_nom_rel: Vec<f64> = scenario
                    .obstacle_velocity
                    .iter()
                    .zip(&vel_nom)
                    .map(|(vo, va)| vo - va)
                    .collect();
                let constraint = self.barrier_constraint(
                    state, scenario, &p_rel, &v_nom_rel, decay_floor, v_ref,
                )?;
                let u: Vec<f64> = constraint
                    .g
                    .iter()
                    .zip(bounds.lo.iter().zip(&bounds.hi))
                    .map(|(g, (lo, hi))| if *g >= 0.0 { *hi } else { *lo })
                    .collect();
                self.prev_velocity = self.realized_velocity(&u, state, scenario);
                Ok(u)
            }
            Err(e) => Err(e),
        }
    }
}

/// One recorded expert step: the observation pair and the action taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoStep {
    pub state: Vec<f64>,
    pub safety: Vec<f64>,
    pub action: Vec<f64>,
}

/// One kept expert episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demonstration {
    pub scenario: Scenario,
    pub steps: Vec<DemoStep>,
    pub terminal: Status,
}

/// Roll the expert through one scenario, recording `(s, c, a*)` per step.
/// The minimum barrier value over the episode rides along for diagnostics.
pub struct ExpertRollout {
    pub demo: Demonstration,
    pub min_barrier: f64,
    pub min_clearance: f64,
}

pub fn rollout_expert(scenario: &Scenario, cfg: &CbfConfig) -> Result<ExpertRollout> {
    scenario.validate()?;
    let mut controller = ExpertController::new(scenario, cfg.clone())?;
    let mut state = EnvState::initial(scenario);
    let mut steps = Vec::new();
    let mut min_barrier = f64::INFINITY;
    let mut min_clearance = f64::INFINITY;
    while !state.status.is_terminal() {
        let c = current_safety_params(&state, scenario).to_vec();
        let (action, h) = controller.action_with_barrier(&state, scenario)?;
        min_barrier = min_barrier.min(h);
        steps.push(DemoStep {
            state: state.agent.clone(),
            safety: c,
            action: action.clone(),
        });
        state = step(&state, &action, scenario)?;
        let clearance = crate::env::euclidean_distance(
            scenario.env.position_of(&state.agent),
            &state.obstacle,
        ) - scenario.contact_distance();
        min_clearance = min_clearance.min(clearance);
    }
    Ok(ExpertRollout {
        demo: Demonstration {
            scenario: scenario.clone(),
            steps,
            terminal: state.status,
        },
        min_barrier,
        min_clearance,
    })
}

/// Why attempts were discarded during dataset generation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscardStats {
    pub collided: usize,
    pub timeout: usize,
    pub infeasible: usize,
}

/// Outcome of [`generate_demonstrations`].
#[derive(Debug)]
pub struct Generation {
    pub demos: Vec<Demonstration>,
    pub attempts: usize,
    pub discarded: DiscardStats,
}

enum AttemptOutcome {
    Kept(Box<Demonstration>),
    Collided,
    Timeout,
    Infeasible,
}

fn run_attempt(
    master_seed: u64,
    attempt: usize,
    kind: EnvKind,
    ranges: &ScenarioRanges,
    cfg: &CbfConfig,
) -> Result<AttemptOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, attempt as u64));
    let scenario = sample_scenario(&mut rng, kind, ranges)?;
    match rollout_expert(&scenario, cfg) {
        Ok(rollout) => Ok(match rollout.demo.terminal {
            Status::Reached => AttemptOutcome::Kept(Box::new(rollout.demo)),
            Status::Collided => AttemptOutcome::Collided,
            Status::Timeout | Status::Running => AttemptOutcome::Timeout,
        }),
        Err(Error::InfeasibleConstraint) | Err(Error::DegenerateGeometry) => {
            Ok(AttemptOutcome::Infeasible)
        }
        Err(e) => Err(e),
    }
}

/// Number of leading attempts used to estimate the acceptance rate before
/// committing to a long generation run.
const PROBE_ATTEMPTS: usize = 50;
/// Minimum acceptable kept/attempted ratio over the probe window.
const MIN_ACCEPTANCE: f64 = 0.10;

/// Generate `n_demos` kept demonstrations (expert reached the goal without
/// collision). Attempts are independent — attempt `k` is a pure function of
/// `(seed, k)` — so they are evaluated in parallel batches and scanned in
/// attempt order, making the output independent of worker scheduling.
pub fn generate_demonstrations(
    n_demos: usize,
    kind: EnvKind,
    ranges: &ScenarioRanges,
    cfg: &CbfConfig,
    seed: u64,
) -> Result<Generation> {
    if n_demos == 0 {
        return Err(Error::InvalidConfig("n_demos must be at least 1".into()));
    }
    ranges.validate(kind)?;
    cfg.validate()?;

    let max_attempts = 50 * n_demos + 200;
    let batch = 256;
    let mut demos = Vec::with_capacity(n_demos);
    let mut discarded = DiscardStats::default();
    let mut attempts = 0;
    let mut probe_kept = 0;

    while demos.len() < n_demos && attempts < max_attempts {
        let upper = (attempts + batch).min(max_attempts);
        let outcomes: Vec<Result<AttemptOutcome>> = (attempts..upper)
            .into_par_iter()
            .map(|k| run_attempt(seed, k, kind, ranges, cfg))
            .collect();
        for outcome in outcomes {
            attempts += 1;
            match outcome? {
                AttemptOutcome::Kept(demo) => {
                    if demos.len() < n_demos {
                        demos.push(*demo);
                        if attempts <= PROBE_ATTEMPTS {
                            probe_kept += 1;
                        }
                    }
                }
                AttemptOutcome::Collided => discarded.collided += 1,
                AttemptOutcome::Timeout => discarded.timeout += 1,
                AttemptOutcome::Infeasible => discarded.infeasible += 1,
            }
            if attempts == PROBE_ATTEMPTS
                && demos.len() >= n_demos.min(PROBE_ATTEMPTS)
            {
                // Quota filled inside the probe window; rate check moot.
                probe_kept = PROBE_ATTEMPTS;
            }
            if attempts == PROBE_ATTEMPTS
                && (probe_kept as f64) < MIN_ACCEPTANCE * PROBE_ATTEMPTS as f64
                && demos.len() < n_demos
            {
                return Err(Error::LowAcceptanceRate {
                    kept: probe_kept,
                    probed: PROBE_ATTEMPTS,
                });
            }
            if demos.len() == n_demos {
                break;
            }
        }
    }

    if demos.len() < n_demos {
        return Err(Error::SamplingExhausted {
            attempts: max_attempts,
        });
    }
    Ok(Generation {
        demos,
        attempts,
        discarded,
    })
}
