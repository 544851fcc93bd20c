//! Step-size sequences `alpha_k = alpha (k + K)^{-xi}` and their summability
//! classification.
//!
//! The classification is decided symbolically from the exponents (p-series
//! test), never by truncated summation — truncation cannot distinguish slow
//! divergence from convergence, and the admissibility boundary `xi > 1/p` is
//! an exact fact about the exponents.

use crate::numeric::CompensatedSum;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Functional form of the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `alpha_k = alpha (k + K)^{-xi}` with `xi` in (0, 1].
    Polynomial,
    /// `alpha_k = alpha` for all k (contrast runs; never admissible).
    Constant,
}

/// A polynomial (or constant) step-size rule.
///
/// Invariants enforced at construction: `alpha > 0`, `K >= 1`, and for the
/// polynomial kind `xi` in (0, 1]. Values are immutable afterwards, so
/// schedules are freely shared across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSchedule {
    pub kind: ScheduleKind,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(rename = "K", default = "default_offset")]
    pub offset: f64,
    #[serde(default)]
    pub xi: f64,
}

fn default_alpha() -> f64 {
    1.0
}

fn default_offset() -> f64 {
    1.0
}

/// Result of the summability classification at a given noise moment `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summability {
    /// Does `sum alpha_k` diverge?
    pub sum_divergent: bool,
    /// Is `sum alpha_k^p` finite?
    pub p_power_summable: bool,
    /// Both conditions together; for polynomial schedules this is exactly
    /// `xi` in `(1/p, 1]`.
    pub admissible: bool,
}

impl StepSchedule {
    /// Polynomial schedule `alpha (k + K)^{-xi}`.
    pub fn polynomial(alpha: f64, offset: f64, xi: f64) -> Result<Self> {
        let s = Self {
            kind: ScheduleKind::Polynomial,
            alpha,
            offset,
            xi,
        };
        s.validate()?;
        Ok(s)
    }

    /// Constant schedule `alpha_k = alpha`.
    pub fn constant(alpha: f64) -> Result<Self> {
        let s = Self {
            kind: ScheduleKind::Constant,
            alpha,
            offset: 1.0,
            xi: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    /// Checks the construction invariants; used both by the constructors and
    /// after deserialisation.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::invalid(format!(
                "schedule alpha must be positive, got {}",
                self.alpha
            )));
        }
        if !(self.offset >= 1.0) || !self.offset.is_finite() {
            return Err(Error::invalid(format!(
                "schedule K must be >= 1, got {}",
                self.offset
            )));
        }
        match self.kind {
            ScheduleKind::Polynomial => {
                if !(self.xi > 0.0 && self.xi <= 1.0) {
                    return Err(Error::invalid(format!(
                        "polynomial schedule requires xi in (0, 1], got {}",
                        self.xi
                    )));
                }
            }
            ScheduleKind::Constant => {
                if self.xi != 0.0 {
                    return Err(Error::invalid(format!(
                        "constant schedule requires xi = 0, got {}",
                        self.xi
                    )));
                }
            }
        }
        Ok(())
    }

    /// Step size at iteration `k` (0-based): `alpha (k + K)^{-xi}`.
    /// Monotone non-increasing in `k`.
    #[inline]
    pub fn value(&self, k: u64) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.alpha,
            ScheduleKind::Polynomial => self.alpha * (k as f64 + self.offset).powf(-self.xi),
        }
    }

    /// Summability verdict against noise moment `p > 1`, by exponent
    /// comparison.
    ///
    /// Polynomial: `sum alpha_k` diverges iff `xi <= 1`, `sum alpha_k^p` is
    /// finite iff `xi * p > 1`. Constant schedules always diverge and are
    /// never p-power summable, hence never admissible.
    pub fn classify_summability(&self, p: f64) -> Result<Summability> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::invalid(format!(
                "summability classification requires p > 1, got {p}"
            )));
        }
        let (sum_divergent, p_power_summable) = match self.kind {
            ScheduleKind::Constant => (true, false),
            ScheduleKind::Polynomial => (self.xi <= 1.0, self.xi * p > 1.0),
        };
        Ok(Summability {
            sum_divergent,
            p_power_summable,
            admissible: sum_divergent && p_power_summable,
        })
    }

    /// Exact finite sum `sum_{k=0}^{N-1} value(k)^p`, accumulated in ascending
    /// `k` with compensated summation.
    pub fn partial_p_sum(&self, p: f64, n: u64) -> f64 {
        let mut acc = CompensatedSum::new();
        for k in 0..n {
            acc.add(self.value(k).powf(p));
        }
        acc.total()
    }

    /// Upper bound on `sum_{k>=0} value(k)^p` by the integral test, finite
    /// exactly when the schedule is p-power summable:
    /// `alpha^p (K^{-xi p} + K^{1 - xi p} / (xi p - 1))`.
    pub fn p_sum_upper_bound(&self, p: f64) -> Option<f64> {
        match self.kind {
            ScheduleKind::Constant => None,
            ScheduleKind::Polynomial => {
                let s = self.xi * p;
                if s <= 1.0 {
                    return None;
                }
                let ap = self.alpha.powf(p);
                Some(ap * (self.offset.powf(-s) + self.offset.powf(1.0 - s) / (s - 1.0)))
            }
        }
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        /// Polynomial schedules never increase.
        #[test]
        fn value_monotone_non_increasing(
            alpha in 1e-3..10.0f64,
            offset in 1.0..50.0f64,
            xi in 0.01..1.0f64,
            k in 0u64..100_000,
        ) {
            let s = StepSchedule::polynomial(alpha, offset, xi).unwrap();
            prop_assert!(s.value(k + 1) <= s.value(k));
            prop_assert!(s.value(k) > 0.0);
        }

        /// Admissibility is exactly the interval xi in (1/p, 1].
        #[test]
        fn admissibility_matches_exponent_interval(
            xi in 0.01..=1.0f64,
            p in 1.01..6.0f64,
        ) {
            let s = StepSchedule::polynomial(1.0, 1.0, xi).unwrap();
            let c = s.classify_summability(p).unwrap();
            prop_assert_eq!(c.admissible, xi > 1.0 / p);
            prop_assert!(c.sum_divergent);
        }

        /// Summable schedules respect the closed-form integral bound at
        /// every horizon.
        #[test]
        fn partial_sums_below_integral_bound(
            alpha in 0.01..2.0f64,
            offset in 1.0..10.0f64,
            xi in 0.55..=1.0f64,
            n in 1u64..20_000,
        ) {
            let p = 2.0;
            let s = StepSchedule::polynomial(alpha, offset, xi).unwrap();
            prop_assume!(xi * p > 1.0);
            let bound = s.p_sum_upper_bound(p).unwrap();
            prop_assert!(s.partial_p_sum(p, n) <= bound);
        }
    }
}
