//! Power-bound inequality oracles.
//!
//! Two inequalities carry the drift analysis through the non-quadratic
//! regimes; both are exposed as "gap" functions returning
//! `bound - quantity`, so a nonnegative result (up to 1e-12 relative slack)
//! certifies the inequality at that input.

use crate::numeric::{dot, norm};
use crate::{Error, Result};

/// Gap of the sub-quadratic vector bound, for `p` in (1, 2]:
///
/// `||v + u||^p <= ||v||^p + p <v, u> / ||v||^{2-p} + 2^{2-p} ||u||^p`
///
/// Returns `RHS - LHS`. Errors on `v = 0` (the middle term divides by
/// `||v||^{2-p}`).
pub fn norm_power_gap(v: &[f64], u: &[f64], p: f64) -> Result<f64> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::invalid(format!(
            "norm power bound requires p in (1, 2], got {p}"
        )));
    }
    if v.len() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            got: u.len(),
        });
    }
    let nv = norm(v);
    if nv == 0.0 {
        return Err(Error::ZeroBase);
    }
    let nu = norm(u);
    let sum: Vec<f64> = v.iter().zip(u).map(|(a, b)| a + b).collect();
    let lhs = norm(&sum).powf(p);
    let rhs = nv.powf(p) + p * dot(v, u) / nv.powf(2.0 - p) + 2f64.powf(2.0 - p) * nu.powf(p);
    Ok(rhs - lhs)
}

/// Gaps of the two-sided scalar power expansion bound, for `p >= 2`:
///
/// `(p/8)|x|^{p-2} D^2 + |D|^p / 2^{p+1}`
/// `  <= |x+D|^p - |x|^p - p |x|^{p-1} sgn(x) D`
/// `  <= 2 p^2 |x|^{p-2} D^2 + p^p |D|^p`
///
/// `lower_gap = center - lower_bound`, `upper_gap = upper_bound - center`;
/// both nonnegative when the bounds hold. The factor `|x|^{p-2}` is taken as
/// 0 at `x = 0` for every `p >= 2` (the limit from `p > 2`, and the
/// convention under which the bounds still hold at `p = 2`).
pub fn scalar_power_bounds(x: f64, delta: f64, p: f64) -> Result<PowerBoundGaps> {
    if !(p >= 2.0) {
        return Err(Error::invalid(format!(
            "scalar power bounds require p >= 2, got {p}"
        )));
    }
    let ax = x.abs();
    let ad = delta.abs();
    let x_pm2 = if x == 0.0 { 0.0 } else { ax.powf(p - 2.0) };
    let x_pm1 = if x == 0.0 { 0.0 } else { ax.powf(p - 1.0) };
    let center = (x + delta).abs().powf(p) - ax.powf(p) - p * x_pm1 * x.signum() * delta;
    let lower = 0.125 * p * x_pm2 * delta * delta + ad.powf(p) / 2f64.powf(p + 1.0);
    let upper = 2.0 * p * p * x_pm2 * delta * delta + p.powf(p) * ad.powf(p);
    Ok(PowerBoundGaps {
        lower_gap: center - lower,
        upper_gap: upper - center,
        center,
    })
}

/// Result of [`scalar_power_bounds`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBoundGaps {
    pub lower_gap: f64,
    pub upper_gap: f64,
    /// The centred expansion `|x+D|^p - |x|^p - p|x|^{p-1} sgn(x) D`.
    pub center: f64,
}

/// Random counterexample search for [`norm_power_gap`]: inputs span dims
/// 1..=4, six decades of magnitude, and `p` across (1, 2]. Returns the worst
/// gap relative to the local scale; any value at or above `-1e-12` means no
/// violation was found.
pub fn norm_power_random_search<R: rand::Rng + ?Sized>(trials: usize, rng: &mut R) -> f64 {
    let mut worst = f64::INFINITY;
    let mut done = 0usize;
    while done < trials {
        let dim = 1 + (rng.random::<u64>() % 4) as usize;
        let p = 1.0 + rng.random::<f64>().max(1e-12);
        let sv = 10f64.powf(rng.random::<f64>() * 6.0 - 3.0);
        let su = 10f64.powf(rng.random::<f64>() * 6.0 - 3.0);
        let v: Vec<f64> = (0..dim)
            .map(|_| sv * (rng.random::<f64>() * 2.0 - 1.0))
            .collect();
        let u: Vec<f64> = (0..dim)
            .map(|_| su * (rng.random::<f64>() * 2.0 - 1.0))
            .collect();
        if norm(&v) == 0.0 {
            continue;
        }
        done += 1;
        let gap = norm_power_gap(&v, &u, p).expect("nonzero base");
        let scale = norm(&v).powf(p) + norm(&u).powf(p) + 1.0;
        worst = worst.min(gap / scale);
    }
    worst
}

/// Random counterexample search for [`scalar_power_bounds`] with
/// `p` in [2, 6]; same convention as [`norm_power_random_search`].
pub fn scalar_power_random_search<R: rand::Rng + ?Sized>(trials: usize, rng: &mut R) -> f64 {
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let p = 2.0 + rng.random::<f64>() * 4.0;
        let sx = 10f64.powf(rng.random::<f64>() * 6.0 - 3.0);
        let sd = 10f64.powf(rng.random::<f64>() * 6.0 - 3.0);
        let x = sx * (rng.random::<f64>() * 2.0 - 1.0);
        let d = sd * (rng.random::<f64>() * 2.0 - 1.0);
        let g = scalar_power_bounds(x, d, p).expect("p in range");
        let scale = x.abs().powf(p) + d.abs().powf(p) + g.center.abs() + 1.0;
        worst = worst.min((g.lower_gap / scale).min(g.upper_gap / scale));
    }
    worst
}
