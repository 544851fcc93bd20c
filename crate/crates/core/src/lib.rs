//! Simulation and numerical-verification laboratory for stochastic approximation
//! recursions `x_{k+1} = x_k + alpha_k (H(x_k) - x_k + w_k)`.
//!
//! The crate is organised around the ingredients of that recursion:
//!
//! - [`schedules`] — polynomial step-size rules `alpha (k + K)^{-xi}` and the
//!   analytic summability classification that separates convergent from
//!   divergent step-size/noise pairings (`xi > 1/p`).
//! - [`operators`] — a zoo of fixed-point maps `H`: affine contractions,
//!   Hurwitz linear systems, a piecewise-linear selector control system,
//!   gradient maps under the PL condition, nonexpansive maps with an affine
//!   solution set, and constant maps for running-mean recursions.
//! - [`noise`] — martingale-difference and i.i.d. noise models with exact
//!   conditional-moment oracles, including the three-point construction whose
//!   jump magnitude is pinned to `alpha_n * s_n = 4`.
//! - [`lyapunov`] — sampling-based drift certification for candidate Lyapunov
//!   functions, power transforms `Phi^{p/2}`, scalar/vector power-bound
//!   inequality oracles, and the interval-projection tracker used in the
//!   `p > 2` regime.
//! - [`engine`] — trajectory simulation, reproducible Monte Carlo ensembles
//!   (bitwise deterministic for any thread count), phase scans over the decay
//!   exponent, and running-mean scenarios.
//! - [`plot`] / [`report`] — deterministic CSV/JSON/SVG emission.
//!
//! Ensembles parallelise over trajectories with rayon when the default
//! `parallel` feature is enabled; disabling it leaves a sequential fallback
//! with identical output bytes.
//!
//! ```
//! use sa_lab_core::engine::{run_ensemble, DiagnosticsConfig, Scenario};
//! use sa_lab_core::noise::NoiseModel;
//! use sa_lab_core::operators::make_contractive_affine;
//! use sa_lab_core::schedules::StepSchedule;
//!
//! let scenario = Scenario {
//!     name: "halving".into(),
//!     operator: make_contractive_affine(0.5, vec![0.0, 0.0], None)?,
//!     noise: NoiseModel::three_point(0.1, 1.0, 0.8, 1.6, 0.5, 2)?,
//!     schedule: StepSchedule::polynomial(0.1, 1.0, 0.8)?,
//!     x0: vec![1.0, -1.0],
//!     horizon: 2_000,
//!     diagnostics: DiagnosticsConfig::default(),
//! };
//! let run = run_ensemble(&scenario, 8, 42, 0)?;
//! assert_eq!(run.records.len(), 8);
//! assert!(run.report.admissible.unwrap().admissible); // 0.8 > 1/1.6
//! # Ok::<(), sa_lab_core::Error>(())
//! ```

pub mod engine;
pub mod error;
pub mod lyapunov;
pub mod noise;
pub mod numeric;
pub mod operators;
pub mod plot;
pub mod report;
pub mod rng;
pub mod schedules;

pub(crate) mod linalg;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
