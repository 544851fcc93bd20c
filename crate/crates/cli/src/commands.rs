//! Command implementations. Every command is idempotent: identical inputs
//! produce byte-identical outputs (the SVGs embed no timestamps).

use crate::config::{self, CertifyConfig, ScenarioConfig};
use crate::{CliError, ExitCode};
use sa_lab_core::engine::{phase_scan, run_ensemble};
use sa_lab_core::lyapunov::{
    certify_drift, check_projection_drift, fourth_moment_drift_demo, norm_power_random_search,
    scalar_power_random_search,
};
use sa_lab_core::noise::NoiseModel;
use sa_lab_core::numeric::sample_annulus;
use sa_lab_core::operators::make_selector_control;
use sa_lab_core::rng::oracle_stream;
use sa_lab_core::schedules::StepSchedule;
use sa_lab_core::{plot, report};
use std::path::Path;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| {
        CliError::new(
            ExitCode::Io,
            format!("cannot write {}: {e}", path.display()),
        )
    })?;
    println!("wrote {}", path.display());
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| {
        CliError::new(
            ExitCode::Io,
            format!("cannot create output dir {}: {e}", dir.display()),
        )
    })
}

/// `run`: simulate an ensemble and emit CSV + JSON + SVG.
pub fn cmd_run(
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
    threads: usize,
) -> Result<(), CliError> {
    let cfg: ScenarioConfig = config::load(config_path)?;
    let scenario = cfg.build()?;
    ensure_dir(out_dir)?;
    let seed = seed_override.unwrap_or(cfg.seed);
    let run = run_ensemble(&scenario, cfg.n_trajectories, seed, threads)
        .map_err(|e| CliError::new(ExitCode::Config, e.to_string()))?;

    write_file(
        out_dir,
        &format!("{}.trajectories.csv", cfg.name),
        &report::trajectories_csv(&run.records),
    )?;
    write_file(
        out_dir,
        &format!("{}.summary.json", cfg.name),
        &report::summary_json(&run.report),
    )?;
    write_file(
        out_dir,
        &format!("{}.u_vs_k.svg", cfg.name),
        &plot::u_vs_k_svg(&run.records, &cfg.name),
    )?;
    println!(
        "{}: converged {:.3}, diverged {:.3}, mean jumps {:.2}",
        cfg.name,
        run.report.converged_fraction,
        run.report.diverged_fraction,
        run.report.mean_jump_events
    );
    Ok(())
}

/// `phase-scan`: one ensemble per decay exponent, CSV + SVG.
pub fn cmd_phase_scan(
    config_path: &Path,
    out_dir: &Path,
    xi_flag: Option<Vec<f64>>,
    seed_override: Option<u64>,
    threads: usize,
) -> Result<(), CliError> {
    let cfg: ScenarioConfig = config::load(config_path)?;
    let scenario = cfg.build()?;
    let xi_list = xi_flag.or_else(|| cfg.xi_list.clone()).unwrap_or_default();
    if xi_list.is_empty() {
        return Err(CliError::new(
            ExitCode::Config,
            "phase scan needs a non-empty xi list (config `xi_list` or --xi)",
        ));
    }
    ensure_dir(out_dir)?;
    let seed = seed_override.unwrap_or(cfg.seed);
    let rows = phase_scan(&scenario, &xi_list, cfg.n_trajectories, seed, threads)
        .map_err(|e| CliError::new(ExitCode::Config, e.to_string()))?;

    write_file(
        out_dir,
        &format!("{}.phase.csv", cfg.name),
        &report::phase_csv(&rows),
    )?;
    let p = scenario.noise.declared_p();
    write_file(
        out_dir,
        &format!("{}.phase.svg", cfg.name),
        &plot::phase_svg(&rows, p, &cfg.name),
    )?;
    for r in &rows {
        println!(
            "xi={:<8} admissible={:<5} converged={:.3} jumps={:.2} analytic={}",
            r.xi,
            r.admissible,
            r.converged_fraction,
            r.mean_jumps,
            r.analytic_jumps
                .map(|v| format!("{v:.2}"))
                .unwrap_or_else(|| "-".into()),
        );
    }
    Ok(())
}

/// `certify`: sampling-based drift certificate; nonzero violations exit 3.
pub fn cmd_certify(
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<(), CliError> {
    let cfg: CertifyConfig = config::load(config_path)?;
    let (op, phi) = cfg.build()?;
    ensure_dir(out_dir)?;
    let seed = seed_override.unwrap_or(cfg.seed);
    let mut rng = oracle_stream(seed);
    let cert = certify_drift(
        &op,
        &phi,
        cfg.region.r_min,
        cfg.region.r_max,
        cfg.samples as usize,
        &mut rng,
    )
    .map_err(|e| CliError::new(ExitCode::Config, e.to_string()))?;

    let mut json = serde_json::to_string_pretty(&cert).expect("certificate serialises");
    json.push('\n');
    write_file(out_dir, &format!("{}.certificate.json", cfg.name), &json)?;
    println!(
        "{}: eta_hat={:.6} L2_hat={:.6} c1_hat={:.6} c2_hat={:.6} violations={}",
        cfg.name, cert.eta_hat, cert.l2_hat, cert.c1_hat, cert.c2_hat, cert.violation_count
    );
    if cert.passes() {
        Ok(())
    } else {
        for v in cert.violations.iter().take(5) {
            println!("violation at {:?}: drift ratio {:+.6}", v.point, v.margin);
        }
        Err(CliError::new(
            ExitCode::Violation,
            format!(
                "certification failed: {} violations over {} samples",
                cert.violation_count, cert.samples
            ),
        ))
    }
}

/// Which inequality oracle to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum OracleKind {
    NormPower,
    ScalarPower,
    ProjectionDrift,
    FourthMoment,
}

const ORACLE_TOLERANCE: f64 = 1e-12;

/// `oracle`: random-search and exact-enumeration checks; violations exit 3.
pub fn cmd_oracle(which: OracleKind, trials: usize, seed: u64) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::new(ExitCode::Config, "trials must be at least 1"));
    }
    let mut rng = oracle_stream(seed);
    match which {
        OracleKind::NormPower => {
            let worst = norm_power_random_search(trials, &mut rng);
            println!("norm_power: worst relative margin {worst:+.3e} over {trials} trials");
            if worst < -ORACLE_TOLERANCE {
                return Err(CliError::new(ExitCode::Violation, "norm power bound violated"));
            }
        }
        OracleKind::ScalarPower => {
            let worst = scalar_power_random_search(trials, &mut rng);
            println!("scalar_power: worst relative margin {worst:+.3e} over {trials} trials");
            if worst < -ORACLE_TOLERANCE {
                return Err(CliError::new(
                    ExitCode::Violation,
                    "scalar power bounds violated",
                ));
            }
        }
        OracleKind::ProjectionDrift => {
            // Exact three-atom enumeration on the selector system, with the
            // noise built at the projection exponent so its p-th moment is
            // uniformly bounded. States sampled across all three band cases.
            let (d_level, p) = (0.5, 2.5);
            let op = make_selector_control();
            let noise = NoiseModel::three_point(0.1, 1.0, 0.8, p, 0.5, 2)
                .expect("fixed construction");
            let schedule = StepSchedule::polynomial(0.1, 1.0, 0.8).expect("fixed construction");
            let per_k = trials.clamp(1, 100_000);
            let mut excesses = Vec::new();
            for k in [1_000u64, 10_000, 100_000] {
                let samples: Vec<(Vec<f64>, u64)> = (0..per_k)
                    .map(|_| (sample_annulus(&mut rng, &[0.0, 0.0], 0.5 * d_level, 4.0 * d_level), k))
                    .collect();
                let worst =
                    check_projection_drift(&op, &noise, &schedule, d_level, p, &samples)
                        .map_err(|e| CliError::new(ExitCode::Config, e.to_string()))?;
                println!("projection_drift: k={k:<7} worst excess/alpha^p = {worst:.6e}");
                excesses.push(worst);
            }
            let max = excesses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = excesses.iter().copied().fold(f64::INFINITY, f64::min);
            let bounded = max.is_finite() && (max <= 0.0 || max / min.max(1e-300) <= 2.0);
            println!("projection_drift: spread factor {:.3}", max / min);
            if !bounded {
                return Err(CliError::new(
                    ExitCode::Violation,
                    "projected-moment excess grows across decades",
                ));
            }
        }
        OracleKind::FourthMoment => {
            let demo = fourth_moment_drift_demo(0.1, 1.0, trials, &mut rng);
            println!(
                "fourth_moment: terms [{:.6e}, {:.6e}, {:.6e}, {:.6e}]",
                demo.terms[0], demo.terms[1], demo.terms[2], demo.terms[3]
            );
            println!(
                "fourth_moment: exact {:.9e}  monte-carlo {:.9e} (se {:.3e}, {} draws)",
                demo.total, demo.mc_mean, demo.mc_standard_error, demo.mc_draws
            );
            if !demo.mc_within(5.0) {
                return Err(CliError::new(
                    ExitCode::Violation,
                    "monte-carlo estimate outside five standard errors",
                ));
            }
        }
    }
    Ok(())
}
