//! Roll the safety-filtered expert through one hand-built crossing scenario
//! and watch the barrier do its work.
//!
//! The obstacle drifts down across the agent's straight-line path to the
//! goal. The expert tracks its nominal goal-seeking controller until the
//! collision-cone barrier tightens, swerves while the QP constraint is
//! active, then resumes course. The printed trace shows clearance dipping
//! toward (but never reaching) contact while the barrier value stays
//! nonnegative.
//!
//! ```bash
//! cargo run --example expert_rollout
//! ```

use genosil::env::{step, EnvKind, EnvState, Scenario};
use genosil::expert::{rollout_expert, CbfConfig, ExpertController};

/// Gap between the agent and the obstacle surface; non-positive on contact.
fn clearance(state: &EnvState, scenario: &Scenario) -> f64 {
    let p = scenario.env.position_of(&state.agent);
    let dist: f64 = p
        .iter()
        .zip(&state.obstacle)
        .map(|(a, o)| (a - o) * (a - o))
        .sum::<f64>()
        .sqrt();
    dist - scenario.contact_distance()
}

fn main() -> genosil::Result<()> {
    let kind = EnvKind::Vehicle;
    let scenario = Scenario {
        env: kind,
        initial_state: vec![-4.0, 0.0, 0.0],
        obstacle_position: vec![0.5, 2.2],
        obstacle_velocity: vec![0.0, -0.55],
        obstacle_radius: 0.5,
        goal: vec![4.0, 0.0],
        horizon: kind.default_horizon(),
        dt: kind.dt(),
    };
    scenario.validate()?;

    println!("agent   start ({:+.1}, {:+.1}) heading 0.0", scenario.initial_state[0], scenario.initial_state[1]);
    println!(
        "obstacle start ({:+.1}, {:+.1}) velocity ({:+.2}, {:+.2}) radius {:.1}",
        scenario.obstacle_position[0],
        scenario.obstacle_position[1],
        scenario.obstacle_velocity[0],
        scenario.obstacle_velocity[1],
        scenario.obstacle_radius,
    );
    println!("goal    ({:+.1}, {:+.1})\n", scenario.goal[0], scenario.goal[1]);

    // Step manually so each row can show the barrier value alongside the
    // clearance; rollout_expert below repeats the same loop internally.
    let cfg = CbfConfig::default();
    let mut controller = ExpertController::new(&scenario, cfg.clone())?;
    let mut state = EnvState::initial(&scenario);
    println!(
        "{:>5} {:>18} {:>10} {:>9} {:>14}",
        "step", "agent (x, y)", "clearance", "barrier", "action (v, w)"
    );
    let mut t = 0usize;
    while !state.status.is_terminal() {
        let (action, barrier) = controller.action_with_barrier(&state, &scenario)?;
        if t % 10 == 0 {
            println!(
                "{:>5} ({:>+7.2}, {:>+6.2}) {:>10.3} {:>9.3} ({:.2}, {:>+5.2})",
                t,
                state.agent[0],
                state.agent[1],
                clearance(&state, &scenario),
                barrier,
                action[0],
                action[1]
            );
        }
        state = step(&state, &action, &scenario)?;
        t += 1;
    }
    println!("\nterminal status after {t} steps: {:?}", state.status);

    // The library's own rollout of the same scenario, with its diagnostics.
    let rollout = rollout_expert(&scenario, &cfg)?;
    println!(
        "rollout_expert: {} steps, terminal {:?}, min clearance {:.3}, min barrier {:.3}",
        rollout.demo.steps.len(),
        rollout.demo.terminal,
        rollout.min_clearance,
        rollout.min_barrier,
    );
    Ok(())
}
