//! Monte Carlo ensembles over independent trajectories.
//!
//! Trajectories are embarrassingly parallel: each one owns a ChaCha stream
//! keyed by `(base_seed, trajectory_id)`, results are collected in id order,
//! and aggregation is sequential — so a report is bitwise identical for any
//! thread count. With the `parallel` feature (default) the map runs on
//! rayon; without it, a plain sequential loop produces the same bytes.

use super::{run_trajectory, DiagnosticsConfig, TrajectoryRecord};
use crate::noise::NoiseModel;
use crate::operators::Operator;
use crate::rng::trajectory_stream;
use crate::schedules::{StepSchedule, Summability};
use crate::{Error, Result};
use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Everything needed to run one ensemble.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub operator: Operator,
    pub noise: NoiseModel,
    pub schedule: StepSchedule,
    pub x0: Vec<f64>,
    pub horizon: u64,
    pub diagnostics: DiagnosticsConfig,
}

impl Scenario {
    fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        self.schedule.validate()?;
        let d = self.operator.dim();
        if self.noise.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.noise.dim(),
            });
        }
        if self.x0.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.x0.len(),
            });
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        if self.operator.distance_to_solution(&self.x0).is_none() {
            return Err(Error::MissingFixedPoint);
        }
        Ok(())
    }

    /// The convergence radius in force: explicit, or `0.05 (1 + u_0)`.
    pub fn epsilon(&self) -> f64 {
        let u0 = self
            .operator
            .distance_to_solution(&self.x0)
            .unwrap_or(f64::NAN);
        self.diagnostics.epsilon.unwrap_or(0.05 * (1.0 + u0))
    }
}

/// Aggregate statistics over an ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleReport {
    pub scenario: String,
    pub n_trajectories: u64,
    pub horizon: u64,
    /// Convergence radius used for the verdicts.
    pub epsilon: f64,
    /// Fraction with finite tail and `tail_sup <= epsilon`.
    pub converged_fraction: f64,
    /// Fraction nonfinite or with `tail_sup > 10 u_0`.
    pub diverged_fraction: f64,
    pub nonfinite_count: u64,
    pub tail_sup_median: f64,
    pub tail_sup_q10: f64,
    pub tail_sup_q90: f64,
    /// Median of `u` at the final checkpoint.
    pub median_final_u: f64,
    pub mean_jump_events: f64,
    /// Standard error of the mean jump count.
    pub jump_events_se: f64,
    /// Analytic expected firing count for three-point noise.
    pub expected_jump_count: Option<f64>,
    pub mean_upcrossings: f64,
    /// Step-size verdict at the noise's declared moment exponent, when that
    /// exponent exceeds 1 (the knife edge `p = 1` carries no verdict).
    pub admissible: Option<Summability>,
}

/// An ensemble's report plus the per-trajectory records it was built from.
#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub report: EnsembleReport,
    pub records: Vec<TrajectoryRecord>,
}

fn nearest_rank(sorted: &[f64], fraction: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let n = sorted.len();
    let idx = ((fraction * n as f64).ceil() as usize).clamp(1, n) - 1;
    sorted[idx]
}

fn map_trajectories<F>(n: u64, threads: usize, run_one: F) -> Result<Vec<TrajectoryRecord>>
where
    F: Fn(u64) -> Result<TrajectoryRecord> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        match threads {
            1 => (0..n).map(run_one).collect(),
            0 => (0..n).into_par_iter().map(run_one).collect(),
            t => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
                pool.install(|| (0..n).into_par_iter().map(run_one).collect())
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        (0..n).map(run_one).collect()
    }
}

/// Runs `n_trajectories` independent trajectories and aggregates them.
///
/// `threads`: 0 = library default parallelism, 1 = in-place sequential, any
/// other value = a dedicated pool of that size. The output is identical for
/// every choice.
pub fn run_ensemble(
    scenario: &Scenario,
    n_trajectories: u64,
    base_seed: u64,
    threads: usize,
) -> Result<EnsembleRun> {
    scenario.validate()?;
    if n_trajectories == 0 {
        return Err(Error::invalid("ensemble needs at least one trajectory"));
    }
    let records = map_trajectories(n_trajectories, threads, |id| {
        run_trajectory(
            &scenario.operator,
            &scenario.noise,
            &scenario.schedule,
            &scenario.x0,
            scenario.horizon,
            &scenario.diagnostics,
            id,
            trajectory_stream(base_seed, id),
        )
    })?;
    let report = aggregate(scenario, &records);
    Ok(EnsembleRun { report, records })
}

/// Deterministic aggregation in trajectory-id order.
fn aggregate(scenario: &Scenario, records: &[TrajectoryRecord]) -> EnsembleReport {
    let n = records.len() as f64;
    let epsilon = scenario.epsilon();

    let mut converged = 0u64;
    let mut diverged = 0u64;
    let mut nonfinite = 0u64;
    for r in records {
        if r.is_finite() && r.tail_sup <= epsilon {
            converged += 1;
        }
        if !r.is_finite() || r.tail_sup > 10.0 * r.initial_distance {
            diverged += 1;
        }
        if !r.is_finite() {
            nonfinite += 1;
        }
    }

    let mut tails: Vec<f64> = records.iter().map(|r| r.tail_sup).collect();
    tails.sort_by(f64::total_cmp);
    let mut finals: Vec<f64> = records
        .iter()
        .map(|r| r.checkpoints.last().map(|(_, u)| *u).unwrap_or(f64::NAN))
        .collect();
    finals.sort_by(f64::total_cmp);

    let jump_mean = records.iter().map(|r| r.jump_events as f64).sum::<f64>() / n;
    let jump_var = if records.len() > 1 {
        records
            .iter()
            .map(|r| {
                let d = r.jump_events as f64 - jump_mean;
                d * d
            })
            .sum::<f64>()
            / (n - 1.0)
    } else {
        0.0
    };

    let expected_jump_count = scenario.noise.expected_jump_count(scenario.horizon).ok();
    let admissible = scenario
        .noise
        .declared_p()
        .filter(|p| *p > 1.0)
        .and_then(|p| scenario.schedule.classify_summability(p).ok());

    EnsembleReport {
        scenario: scenario.name.clone(),
        n_trajectories: records.len() as u64,
        horizon: scenario.horizon,
        epsilon,
        converged_fraction: converged as f64 / n,
        diverged_fraction: diverged as f64 / n,
        nonfinite_count: nonfinite,
        tail_sup_median: nearest_rank(&tails, 0.5),
        tail_sup_q10: nearest_rank(&tails, 0.1),
        tail_sup_q90: nearest_rank(&tails, 0.9),
        median_final_u: nearest_rank(&finals, 0.5),
        mean_jump_events: jump_mean,
        jump_events_se: (jump_var / n).sqrt(),
        expected_jump_count,
        mean_upcrossings: records.iter().map(|r| r.upcrossings as f64).sum::<f64>() / n,
        admissible,
    }
}

/// One row of a phase scan over the decay exponent.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseRow {
    pub xi: f64,
    pub admissible: bool,
    pub converged_fraction: f64,
    pub mean_jumps: f64,
    pub jumps_se: f64,
    pub analytic_jumps: Option<f64>,
}

/// Runs one ensemble per `xi`, rebinding both the schedule and — for
/// three-point noise — the companion noise construction to that exponent.
/// Cell `i` uses `base_seed + i` so cells are independent.
pub fn phase_scan(
    base: &Scenario,
    xi_list: &[f64],
    n_per_cell: u64,
    base_seed: u64,
    threads: usize,
) -> Result<Vec<PhaseRow>> {
    if xi_list.is_empty() {
        return Err(Error::invalid("phase scan needs a non-empty xi list"));
    }
    let mut rows = Vec::with_capacity(xi_list.len());
    for (i, &xi) in xi_list.iter().enumerate() {
        let schedule = StepSchedule::polynomial(base.schedule.alpha, base.schedule.offset, xi)?;
        let noise = match &base.noise {
            NoiseModel::ThreePoint {
                alpha,
                offset,
                p,
                c,
                dim,
                direction,
                ..
            } => {
                let m = NoiseModel::ThreePoint {
                    alpha: *alpha,
                    offset: *offset,
                    xi,
                    p: *p,
                    c: *c,
                    dim: *dim,
                    direction: direction.clone(),
                };
                m.validate()?;
                m
            }
            other => other.clone(),
        };
        let scenario = Scenario {
            name: format!("{}__xi_{xi}", base.name),
            operator: base.operator.clone(),
            noise,
            schedule,
            x0: base.x0.clone(),
            horizon: base.horizon,
            diagnostics: base.diagnostics.clone(),
        };
        let run = run_ensemble(&scenario, n_per_cell, base_seed + i as u64, threads)?;
        rows.push(PhaseRow {
            xi,
            admissible: run.report.admissible.map(|s| s.admissible).unwrap_or(false),
            converged_fraction: run.report.converged_fraction,
            mean_jumps: run.report.mean_jump_events,
            jumps_se: run.report.jump_events_se,
            analytic_jumps: run.report.expected_jump_count,
        });
    }
    Ok(rows)
}

/// Running-mean scenario: `X_{n+1} = X_n + alpha_n (Z_n - X_n)` where
/// `Z_n = mu + w_n` for centred i.i.d. `w`. Requires `alpha_0 = 1`, which
/// makes the first update install `X_1 = Z_0` exactly regardless of the
/// nominal start.
pub fn slln_scenario(
    distribution: crate::noise::IidDistribution,
    p_declared: f64,
    mu: f64,
    schedule: StepSchedule,
    horizon: u64,
    n_trajectories: u64,
    base_seed: u64,
    threads: usize,
    epsilon: Option<f64>,
) -> Result<EnsembleRun> {
    if (schedule.value(0) - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "running-mean scenario requires alpha_0 = 1 (so X_1 = Z_0); got {}",
            schedule.value(0)
        )));
    }
    let scenario = Scenario {
        name: "running_mean".into(),
        operator: crate::operators::make_constant_mean(mu),
        noise: NoiseModel::iid(distribution, p_declared, 1)?,
        schedule,
        x0: vec![mu],
        horizon,
        diagnostics: DiagnosticsConfig {
            epsilon,
            ..Default::default()
        },
    };
    run_ensemble(&scenario, n_trajectories, base_seed, threads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::IidDistribution;
    use crate::operators::{make_contractive_affine, make_selector_control};

    fn small_scenario() -> Scenario {
        Scenario {
            name: "test".into(),
            operator: make_contractive_affine(0.0, vec![0.0], None).unwrap(),
            noise: NoiseModel::three_point(0.1, 1.0, 0.8, 1.6, 0.5, 1).unwrap(),
            schedule: StepSchedule::polynomial(0.1, 1.0, 0.8).unwrap(),
            x0: vec![1.0],
            horizon: 5_000,
            diagnostics: DiagnosticsConfig::default(),
        }
    }

    #[test]
    fn singleton_ensemble_equals_trajectory_aggregates() {
        let s = small_scenario();
        let run = run_ensemble(&s, 1, 42, 1).unwrap();
        assert_eq!(run.records.len(), 1);
        let r = &run.records[0];
        assert_eq!(run.report.mean_jump_events, r.jump_events as f64);
        assert_eq!(run.report.jump_events_se, 0.0);
        assert_eq!(run.report.tail_sup_median, r.tail_sup);
        let conv = r.is_finite() && r.tail_sup <= run.report.epsilon;
        assert_eq!(run.report.converged_fraction, if conv { 1.0 } else { 0.0 });
    }

    #[test]
    fn reports_identical_across_thread_counts() {
        let s = small_scenario();
        let a = run_ensemble(&s, 16, 7, 1).unwrap();
        let b = run_ensemble(&s, 16, 7, 4).unwrap();
        let c = run_ensemble(&s, 16, 7, 0).unwrap();
        let ja = serde_json::to_string(&a.report).unwrap();
        let jb = serde_json::to_string(&b.report).unwrap();
        let jc = serde_json::to_string(&c.report).unwrap();
        assert_eq!(ja, jb);
        assert_eq!(ja, jc);
        for (ra, rb) in a.records.iter().zip(&b.records) {
            assert_eq!(ra.checkpoints, rb.checkpoints);
            assert_eq!(ra.final_state, rb.final_state);
        }
    }

    #[test]
    fn jump_accounting_matches_binomial_sum() {
        // Contraction to the origin: firings are counted one-for-one at a
        // threshold just below 4, and firing indicators are independent
        // Bernoulli(2 q_n), so the ensemble mean sits within 3 SE of
        // sum 2 q_n with variance sum 2q(1-2q).
        let mut s = small_scenario();
        s.noise = NoiseModel::three_point(0.1, 1.0, 0.5, 1.6, 0.5, 1).unwrap();
        s.schedule = StepSchedule::polynomial(0.1, 1.0, 0.5).unwrap();
        s.diagnostics.jump_threshold = 3.5;
        s.horizon = 10_000;
        let n = 64u64;
        let run = run_ensemble(&s, n, 11, 0).unwrap();
        let analytic = run.report.expected_jump_count.unwrap();
        let mut var = 0.0;
        for k in 0..s.horizon {
            let q2 = 2.0 * s.noise.firing_probability(k).unwrap();
            var += q2 * (1.0 - q2);
        }
        let se = (var / n as f64).sqrt();
        let gap = (run.report.mean_jump_events - analytic).abs();
        assert!(gap <= 3.0 * se, "gap {gap} > 3 SE {se}");
        // Jumps never exceed firings.
        for r in &run.records {
            assert!(r.jump_events <= s.horizon);
        }
    }

    #[test]
    fn phase_scan_rows_and_admissibility() {
        let mut s = small_scenario();
        s.operator = make_selector_control();
        s.noise = s.noise.with_dim(2);
        s.x0 = vec![1.0, -1.0];
        s.horizon = 200;
        let rows = phase_scan(&s, &[0.5, 0.625, 0.8, 1.0], 4, 3, 0).unwrap();
        assert_eq!(rows.len(), 4);
        let flags: Vec<bool> = rows.iter().map(|r| r.admissible).collect();
        assert_eq!(flags, vec![false, false, true, true]);
        for r in &rows {
            assert!(r.analytic_jumps.is_some());
        }
        assert!(phase_scan(&s, &[], 4, 3, 0).is_err());
    }

    #[test]
    fn running_mean_requires_unit_first_step() {
        let bad = StepSchedule::polynomial(0.5, 1.0, 1.0).unwrap();
        assert!(slln_scenario(
            IidDistribution::Gaussian { sigma: 1.0 },
            2.0,
            3.0,
            bad,
            100,
            2,
            1,
            1,
            None
        )
        .is_err());
    }

    #[test]
    fn non_admissible_schedule_is_flagged_not_asserted() {
        // xi = 0.6 < 1/1.4: the run completes and the report carries the
        // classification; no convergence claim is made either way.
        let schedule = StepSchedule::polynomial(1.0, 1.0, 0.6).unwrap();
        let run = slln_scenario(
            IidDistribution::Pareto {
                tail: 1.5,
                scale: 1.0,
            },
            1.4,
            3.0,
            schedule,
            2_000,
            4,
            9,
            1,
            Some(0.1),
        )
        .unwrap();
        let verdict = run.report.admissible.expect("declared p = 1.4");
        assert!(verdict.sum_divergent);
        assert!(!verdict.p_power_summable);
        assert!(!verdict.admissible);
    }

    #[test]
    fn nonfinite_trajectories_become_diverged_counts() {
        let s = Scenario {
            name: "explode".into(),
            operator: make_contractive_affine(0.5, vec![0.0], None).unwrap(),
            noise: NoiseModel::zero(1),
            schedule: StepSchedule::constant(1e8).unwrap(),
            x0: vec![1.0],
            horizon: 300,
            diagnostics: DiagnosticsConfig::default(),
        };
        let run = run_ensemble(&s, 5, 1, 1).expect("never aborts");
        assert_eq!(run.report.nonfinite_count, 5);
        assert_eq!(run.report.diverged_fraction, 1.0);
        assert_eq!(run.report.converged_fraction, 0.0);
    }

    #[test]
    fn gaussian_running_mean_concentrates() {
        let schedule = StepSchedule::polynomial(1.0, 1.0, 1.0).unwrap();
        let n_steps = 100_000u64;
        let run = slln_scenario(
            IidDistribution::Gaussian { sigma: 1.0 },
            2.0,
            3.0,
            schedule,
            n_steps,
            20,
            5,
            0,
            Some(0.1),
        )
        .unwrap();
        // median |X_N - mu| <= 5 / sqrt(N).
        assert!(
            run.report.median_final_u <= 5.0 / (n_steps as f64).sqrt(),
            "median final deviation {}",
            run.report.median_final_u
        );
    }
}
