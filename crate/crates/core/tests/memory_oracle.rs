mod common;

use common::{interval, recursion_gap, rel_diff, trapezoid_convolution, SmoothTrajectory, TERMS};
use viscowave::{MemoryMode, MemoryState, Params};

#[test]
fn recursion_matches_trapezoid_history() {
    let gap = recursion_gap(100, 1e-3);
    assert!(gap < 1e-6, "relative gap {gap:e}");
}

#[test]
fn recursion_gap_is_second_order() {
    let coarse = recursion_gap(100, 1e-3);
    let fine = recursion_gap(200, 5e-4);
    let order = (coarse / fine).log2();
    assert!(order >= 1.8, "order {order} ({coarse:e} -> {fine:e})");
}

#[test]
fn history_mode_is_the_trapezoid_rule() {
    let model = interval(21, &TERMS, Params::default());
    let traj = SmoothTrajectory::new(model.len(), 5);
    let mut mem = MemoryState::new(&model, &traj.at(0.0), MemoryMode::History).unwrap();
    let mut times = vec![0.0];
    let mut history = vec![traj.at(0.0)];
    // uneven steps, as after adaptive halving
    let mut t = 0.0;
    for k in 0..60 {
        let dt = if k % 3 == 0 { 2e-3 } else { 5e-4 };
        t += dt;
        let u = traj.at(t);
        mem.advance(&u, dt, &model).unwrap();
        times.push(t);
        history.push(u);
    }
    let oracle = trapezoid_convolution(&TERMS, &times, &history);
    assert!(rel_diff(&mem.convolution(), &oracle) < 1e-13);
}

/// `(∫₀ᵗ g(t-s)∇u(s)ds, ∇u_t(t)) = ½(g'◇u) + ½ d/dt{‖∇u‖²∫₀ᵗg} - ½g(t)‖∇u‖² - ½ d/dt(g◇u)`,
/// with the time derivatives taken as backward differences.
fn identity_residual(dt: f64, t_end: f64) -> f64 {
    let model = interval(41, &TERMS, Params::default());
    let traj = SmoothTrajectory::new(model.len(), 23);
    let k = model.stiffness();
    let g = |s: f64| common::prony(&TERMS, s);
    let int_g = |t: f64| -> f64 { TERMS.iter().map(|(a, b)| a / b * (1.0 - (-b * t).exp())).sum() };
    let mut mem = MemoryState::new(&model, &traj.at(0.0), MemoryMode::Recursion).unwrap();
    let steps = (t_end / dt).round() as usize;
    let mut prev = (model.grad_sq(&traj.at(0.0)) * int_g(0.0), 0.0);
    let mut residual = 0.0;
    for n in 1..=steps {
        let t = n as f64 * dt;
        let u = traj.at(t);
        mem.advance(&u, dt, &model).unwrap();
        let grad_sq = model.grad_sq(&u);
        let lhs: f64 = mem
            .convolution()
            .iter()
            .zip(k.apply(&traj.velocity(t)))
            .map(|(c, kv)| c * kv)
            .sum();
        let now = (grad_sq * int_g(t), mem.g_diamond_u(&u, &model));
        let rhs = 0.5 * mem.g_prime_diamond_u(&u, &model) + 0.5 * (now.0 - prev.0) / dt
            - 0.5 * g(t) * grad_sq
            - 0.5 * (now.1 - prev.1) / dt;
        prev = now;
        residual = (lhs - rhs).abs();
    }
    residual
}

#[test]
fn memory_identity_residual_shrinks() {
    let r: Vec<f64> = [2e-3, 1e-3, 5e-4].iter().map(|&dt| identity_residual(dt, 0.2)).collect();
    for w in r.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "{r:?}");
    }
}
