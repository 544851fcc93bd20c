//! Trajectory simulation and ensemble orchestration.
//!
//! [`SaTrajectory`] iterates `x_{k+1} = x_k + alpha_k (H(x_k) - x_k + w_k)`
//! one step at a time; [`run_trajectory`] drives it for a horizon while
//! collecting log-spaced checkpoints, jump events, the tail supremum of
//! `u_k = ||x_k - x*||`, and band upcrossings. Ensembles, phase scans, and
//! running-mean scenarios live in [`ensemble`].
//!
//! A state that leaves the finite range is recorded as a diverged-nonfinite
//! outcome, never an error: divergence scenarios are supposed to misbehave.

pub mod ensemble;

pub use ensemble::{
    phase_scan, run_ensemble, slln_scenario, EnsembleReport, EnsembleRun, PhaseRow, Scenario,
};

use crate::lyapunov::ProjectionTracker;
use crate::noise::NoiseModel;
use crate::numeric::dist;
use crate::operators::Operator;
use crate::schedules::StepSchedule;
use crate::{Error, Result};
use rand::Rng;

/// Per-trajectory diagnostic knobs.
#[derive(Debug, Clone)]
pub struct DiagnosticsConfig {
    /// Convergence radius for the tail supremum; `None` means
    /// `0.05 * (1 + u_0)`, which makes the verdict portable across scenarios
    /// with different initial distances.
    pub epsilon: Option<f64>,
    /// A step counts as a jump event when `||x_{k+1} - x_k||` reaches this;
    /// the default 4 matches the guaranteed displacement of a three-point
    /// firing under the companion schedule.
    pub jump_threshold: f64,
    /// Fraction of the horizon forming the tail window (default last 10%).
    pub tail_fraction: f64,
    /// `(D, p)` for interval-projection upcrossing tracking, when wanted.
    pub projection: Option<(f64, f64)>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            epsilon: None,
            jump_threshold: 4.0,
            tail_fraction: 0.1,
            projection: None,
        }
    }
}

/// Diagnostics for one simulated trajectory.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TrajectoryRecord {
    pub trajectory_id: u64,
    /// `(k, u_k)` at log-spaced iterate indices (16 per decade), plus the
    /// first and last iterate. Strictly increasing in `k`.
    pub checkpoints: Vec<(u64, f64)>,
    pub jump_events: u64,
    /// `sup u_k` over the tail window (infinite for nonfinite trajectories).
    pub tail_sup: f64,
    pub upcrossings: u64,
    pub final_state: Vec<f64>,
    /// Step index at which a coordinate first became non-finite.
    pub nonfinite_at: Option<u64>,
    /// `u_0`.
    pub initial_distance: f64,
}

impl TrajectoryRecord {
    pub fn is_finite(&self) -> bool {
        self.nonfinite_at.is_none()
    }
}

/// The recursion as an iterator: each `step()` performs one update and
/// returns the new state. The caller owns the RNG stream, so two iterators
/// with identical `(operator, noise, schedule, x0, stream)` replay exactly.
pub struct SaTrajectory<'a, R: Rng> {
    op: &'a Operator,
    noise: &'a NoiseModel,
    schedule: &'a StepSchedule,
    k: u64,
    x: Vec<f64>,
    drift_buf: Vec<f64>,
    rng: R,
}

impl<'a, R: Rng> SaTrajectory<'a, R> {
    pub fn new(
        op: &'a Operator,
        noise: &'a NoiseModel,
        schedule: &'a StepSchedule,
        x0: Vec<f64>,
        rng: R,
    ) -> Result<Self> {
        if noise.dim() != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                got: noise.dim(),
            });
        }
        if x0.len() != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: op.dim(),
                got: x0.len(),
            });
        }
        Ok(Self {
            op,
            noise,
            schedule,
            k: 0,
            x: x0,
            drift_buf: vec![0.0; op.dim()],
            rng,
        })
    }

    /// Current iterate index `k`.
    pub fn step_index(&self) -> u64 {
        self.k
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    /// One update `x += alpha_k (H(x) - x + w_k)`; returns the new state.
    pub fn step(&mut self) -> &[f64] {
        let alpha = self.schedule.value(self.k);
        self.op.drift_into(&self.x, &mut self.drift_buf);
        let w = self
            .noise
            .sample(self.k, &self.x, &mut self.rng)
            .expect("dimensions validated at construction");
        for i in 0..self.x.len() {
            self.x[i] += alpha * (self.drift_buf[i] + w[i]);
        }
        self.k += 1;
        &self.x
    }
}

impl<R: Rng> Iterator for SaTrajectory<'_, R> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        Some(self.step().to_vec())
    }
}

/// Checkpoint grid `{0} + {ceil(10^{j/16})} + {n-1}`, deduplicated: sixteen
/// per decade keeps memory at O(log n) per trajectory.
pub fn checkpoint_grid(n: u64) -> Vec<u64> {
    let mut ks = vec![0u64];
    let mut j = 0u32;
    loop {
        let v = 10f64.powf(f64::from(j) / 16.0).ceil() as u64;
        if v >= n {
            break;
        }
        ks.push(v);
        j += 1;
    }
    if n >= 1 {
        ks.push(n - 1);
    }
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// Runs one trajectory for `n_steps` updates, collecting diagnostics.
///
/// The fixed point (or solution set) must be known so `u_k` is measurable.
/// Once a coordinate turns non-finite the simulation stops, the remaining
/// checkpoints report `u = +inf`, and the record is flagged — not an error.
pub fn run_trajectory<R: Rng>(
    op: &Operator,
    noise: &NoiseModel,
    schedule: &StepSchedule,
    x0: &[f64],
    n_steps: u64,
    diagnostics: &DiagnosticsConfig,
    trajectory_id: u64,
    rng: R,
) -> Result<TrajectoryRecord> {
    if n_steps == 0 {
        return Err(Error::invalid("horizon must be at least 1"));
    }
    if !(diagnostics.tail_fraction > 0.0 && diagnostics.tail_fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "tail fraction must be in (0, 1], got {}",
            diagnostics.tail_fraction
        )));
    }
    if op.distance_to_solution(x0).is_none() {
        return Err(Error::MissingFixedPoint);
    }

    let mut tracker = match diagnostics.projection {
        Some((d, p)) => Some(ProjectionTracker::new(d, p)?),
        None => None,
    };

    let grid = checkpoint_grid(n_steps);
    let mut next_checkpoint = 0usize;
    let mut checkpoints = Vec::with_capacity(grid.len());
    // Tail window covers iterates k in [tail_start, n_steps].
    let tail_len = ((n_steps as f64) * diagnostics.tail_fraction).ceil() as u64;
    let tail_start = n_steps.saturating_sub(tail_len);

    let mut traj = SaTrajectory::new(op, noise, schedule, x0.to_vec(), rng)?;
    let u0 = op.distance_to_solution(x0).expect("checked above");
    if let Some(t) = tracker.as_mut() {
        t.observe(u0);
    }

    let mut tail_sup = if tail_start == 0 { u0 } else { 0.0 };
    let mut jump_events = 0u64;
    let mut nonfinite_at = None;
    let mut prev = x0.to_vec();

    for k in 0..n_steps {
        if next_checkpoint < grid.len() && grid[next_checkpoint] == k {
            let u = op.distance_to_solution(traj.state()).expect("checked");
            checkpoints.push((k, u));
            next_checkpoint += 1;
        }
        prev.copy_from_slice(traj.state());
        let x = traj.step();
        if x.iter().any(|v| !v.is_finite()) {
            nonfinite_at = Some(k);
            break;
        }
        if dist(x, &prev) >= diagnostics.jump_threshold {
            jump_events += 1;
        }
        let u = op.distance_to_solution(x).expect("checked");
        if let Some(t) = tracker.as_mut() {
            t.observe(u);
        }
        if k + 1 >= tail_start {
            tail_sup = tail_sup.max(u);
        }
    }

    if nonfinite_at.is_some() {
        tail_sup = f64::INFINITY;
        while next_checkpoint < grid.len() {
            checkpoints.push((grid[next_checkpoint], f64::INFINITY));
            next_checkpoint += 1;
        }
    }

    Ok(TrajectoryRecord {
        trajectory_id,
        checkpoints,
        jump_events,
        tail_sup,
        upcrossings: tracker.map(|t| t.upcrossings()).unwrap_or(0),
        final_state: traj.state().to_vec(),
        nonfinite_at,
        initial_distance: u0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{IidDistribution, NoiseModel};
    use crate::operators::{make_constant_mean, make_contractive_affine, make_selector_control};
    use crate::rng::trajectory_stream;

    #[test]
    fn grid_shape() {
        let g = checkpoint_grid(100_000);
        assert_eq!(g[0], 0);
        assert_eq!(*g.last().unwrap(), 99_999);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        // O(log n): 16 per decade plus endpoints.
        assert!(g.len() < 16 * 6 + 4);
        assert_eq!(checkpoint_grid(1), vec![0]);
        assert_eq!(checkpoint_grid(2), vec![0, 1]);
    }

    #[test]
    fn zero_noise_contraction_decreases_monotonically() {
        let op = make_contractive_affine(0.5, vec![0.0, 0.0], None).unwrap();
        let noise = NoiseModel::zero(2);
        let schedule = StepSchedule::polynomial(0.1, 1.0, 0.8).unwrap();
        let rec = run_trajectory(
            &op,
            &noise,
            &schedule,
            &[3.0, -4.0],
            10_000,
            &DiagnosticsConfig::default(),
            0,
            trajectory_stream(1, 0),
        )
        .unwrap();
        assert!(rec.is_finite());
        let us: Vec<f64> = rec.checkpoints.iter().map(|(_, u)| *u).collect();
        assert!(us.windows(2).all(|w| w[1] <= w[0]));
        assert!(rec.tail_sup < rec.initial_distance);
        assert_eq!(rec.jump_events, 0);
    }

    #[test]
    fn one_step_matches_exact_recursion() {
        let op = make_selector_control();
        let noise = NoiseModel::zero(2);
        let schedule = StepSchedule::polynomial(0.1, 2.0, 0.8).unwrap();
        let x0 = vec![1.5, -0.5];
        let mut traj =
            SaTrajectory::new(&op, &noise, &schedule, x0.clone(), trajectory_stream(3, 0)).unwrap();
        let got = traj.step().to_vec();
        let alpha = schedule.value(0);
        let d = op.drift(&x0);
        for i in 0..2 {
            let expect = x0[i] + alpha * d[i];
            assert!((got[i] - expect).abs() <= 1e-15 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn running_mean_identity_holds_to_twelve_digits() {
        // With alpha_n = 1/(n+1), the recursion IS the running sample mean.
        let mu = 3.0;
        let op = make_constant_mean(mu);
        let noise = NoiseModel::iid(IidDistribution::Gaussian { sigma: 1.0 }, 2.0, 1).unwrap();
        let schedule = StepSchedule::polynomial(1.0, 1.0, 1.0).unwrap();

        let mut traj = SaTrajectory::new(
            &op,
            &noise,
            &schedule,
            vec![0.0],
            trajectory_stream(7, 0),
        )
        .unwrap();
        // Oracle: replay the identical noise stream and accumulate directly.
        let mut oracle_rng = trajectory_stream(7, 0);
        let mut z_sum = 0.0f64;
        for n in 0..10_000u64 {
            let x = traj.step()[0];
            let z = mu + noise.sample(n, &[0.0], &mut oracle_rng).unwrap()[0];
            z_sum += z;
            let mean = z_sum / (n as f64 + 1.0);
            assert!(
                ((x - mean) / mean).abs() < 1e-12,
                "n={n}: recursion {x} vs mean {mean}"
            );
        }
    }

    #[test]
    fn nonfinite_is_recorded_not_thrown() {
        // A constant schedule far above 2 makes every step expand the state.
        let op = make_contractive_affine(0.5, vec![0.0], None).unwrap();
        let noise = NoiseModel::zero(1);
        let schedule = StepSchedule::constant(1e8).unwrap();
        let rec = run_trajectory(
            &op,
            &noise,
            &schedule,
            &[1.0],
            200,
            &DiagnosticsConfig::default(),
            0,
            trajectory_stream(1, 1),
        )
        .unwrap();
        assert!(!rec.is_finite());
        assert!(rec.tail_sup.is_infinite());
        assert_eq!(*rec.checkpoints.last().unwrap(), (199, f64::INFINITY));
    }

    #[test]
    fn checkpoints_nonnegative_and_finite_unless_flagged() {
        let op = make_contractive_affine(0.0, vec![0.0], None).unwrap();
        let noise = NoiseModel::three_point(0.1, 1.0, 0.8, 1.6, 0.5, 1).unwrap();
        let schedule = StepSchedule::polynomial(0.1, 1.0, 0.8).unwrap();
        let n = 20_000u64;
        let rec = run_trajectory(
            &op,
            &noise,
            &schedule,
            &[2.0],
            n,
            &DiagnosticsConfig::default(),
            0,
            trajectory_stream(23, 0),
        )
        .unwrap();
        assert!(rec.is_finite());
        let tail_start = n - (n as f64 * 0.1).ceil() as u64;
        for (k, u) in &rec.checkpoints {
            assert!(u.is_finite() && *u >= 0.0);
            // The tail supremum dominates every checkpoint in the window.
            if *k >= tail_start {
                assert!(rec.tail_sup >= *u);
            }
        }
    }

    #[test]
    fn jump_events_track_three_point_firings() {
        // Contraction to the origin with the counterexample noise: every
        // firing displaces the state by 4 +- alpha * u, and u stays small, so
        // a threshold of 3.5 counts firings exactly.
        let op = make_contractive_affine(0.0, vec![0.0], None).unwrap();
        let noise = NoiseModel::three_point(0.1, 1.0, 0.8, 1.6, 0.5, 1).unwrap();
        let schedule = StepSchedule::polynomial(0.1, 1.0, 0.8).unwrap();

        // Count firings independently by replaying the stream.
        let mut replay = trajectory_stream(11, 0);
        let mut firings = 0u64;
        let mut x = vec![5.0];
        let mut traj_rng = trajectory_stream(11, 0);
        let mut traj = SaTrajectory::new(&op, &noise, &schedule, x.clone(), traj_rng).unwrap();
        let n = 20_000u64;
        for k in 0..n {
            let w = noise.sample(k, &x, &mut replay).unwrap()[0];
            if w != 0.0 {
                firings += 1;
            }
            x = traj.step().to_vec();
        }
        drop(traj);
        traj_rng = trajectory_stream(11, 0);
        let diagnostics = DiagnosticsConfig {
            jump_threshold: 3.5,
            ..Default::default()
        };
        let rec = run_trajectory(
            &op, &noise, &schedule, &[5.0], n, &diagnostics, 0, traj_rng,
        )
        .unwrap();
        assert_eq!(rec.jump_events, firings);
        assert!(firings > 0);
    }

    #[test]
    fn firing_displacement_stays_within_drift_bound() {
        // For each firing step, | ||dx|| - 4 | <= alpha_k ||drift||.
        let op = make_contractive_affine(0.0, vec![0.0], None).unwrap();
        let noise = NoiseModel::three_point(0.1, 1.0, 0.5, 1.6, 0.5, 1).unwrap();
        let schedule = StepSchedule::polynomial(0.1, 1.0, 0.5).unwrap();
        let rng = trajectory_stream(13, 0);
        let mut check_rng = trajectory_stream(13, 0);
        let mut traj = SaTrajectory::new(&op, &noise, &schedule, vec![2.0], rng).unwrap();
        let mut x = vec![2.0];
        for k in 0..50_000u64 {
            let w = noise.sample(k, &x, &mut check_rng).unwrap()[0];
            let drift_norm = crate::numeric::norm(&op.drift(&x));
            let next = traj.step().to_vec();
            if w != 0.0 {
                let dx = dist(&next, &x);
                let slack = schedule.value(k) * drift_norm + 1e-9;
                assert!(
                    (dx - 4.0).abs() <= slack,
                    "k={k}: displacement {dx} outside 4 +- {slack}"
                );
            }
            x = next;
        }
    }

    #[test]
    fn upcrossings_counted_when_projection_enabled() {
        let op = make_contractive_affine(0.0, vec![0.0], None).unwrap();
        let noise = NoiseModel::three_point(0.1, 1.0, 0.8, 1.6, 0.5, 1).unwrap();
        let schedule = StepSchedule::polynomial(0.1, 1.0, 0.8).unwrap();
        let diagnostics = DiagnosticsConfig {
            projection: Some((0.5, 2.5)),
            ..Default::default()
        };
        let rec = run_trajectory(
            &op,
            &noise,
            &schedule,
            &[0.1],
            50_000,
            &diagnostics,
            0,
            trajectory_stream(17, 0),
        )
        .unwrap();
        // Starting at u = 0.1 < D arms the tracker; the first firing lifts u
        // above 2D = 1, so at least one full traversal must be counted.
        assert!(rec.upcrossings >= 1);
    }

    #[test]
    fn dimension_mismatches_rejected() {
        let op = make_contractive_affine(0.5, vec![0.0, 0.0], None).unwrap();
        let noise = NoiseModel::zero(1);
        let schedule = StepSchedule::polynomial(0.1, 1.0, 0.8).unwrap();
        assert!(matches!(
            SaTrajectory::new(&op, &noise, &schedule, vec![1.0, 2.0], trajectory_stream(1, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
