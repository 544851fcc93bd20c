//! Noise models for the recursion, with exact conditional-moment oracles.
//!
//! Four families:
//!
//! - `Zero` — no noise (deterministic contrast runs).
//! - `ThreePoint` — the martingale-difference counterexample construction:
//!   at step `n` the scalar noise is `+s_n`, `-s_n`, or `0` with
//!   probabilities `q_n`, `q_n`, `1 - 2 q_n`, where `s_n = (4/alpha)(n+K)^xi`
//!   and `q_n = c (n+K)^{-xi p}`. Paired with the companion polynomial
//!   schedule this pins the displacement of a firing to
//!   `alpha_n * s_n = 4` exactly, and the conditional p-th moment to the
//!   constant `2 c (4/alpha)^p`.
//! - `Iid` — centred i.i.d. noise: Gaussian, symmetric Pareto, Student-t, or
//!   the two-point atom set {+2 w.p. 1/3, -1 w.p. 2/3} whose third moment is
//!   +2 while its mean is zero.
//! - `Multiplicative` — wraps a base model as `w = (1 + lambda ||x - c||) z`,
//!   turning additive noise into state-dependent noise with declared growth
//!   constants `A_p = 2^{p-1} m_p`, `B_p = 2^{p-1} lambda^p m_p`.
//!
//! Infinite moments are a value ([`Moment::Unavailable`]), not an error:
//! heavy-tailed scenarios legitimately query moments that do not exist.
//!
//! Models are immutable. Sampling takes an exclusively-held per-trajectory
//! RNG stream owned by the caller; there is no shared mutable state.

use crate::numeric::{dist, ln_gamma, CompensatedSum};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::Distribution as _;
use serde::{Deserialize, Serialize};

fn default_dim() -> usize {
    1
}

fn default_offset() -> f64 {
    1.0
}

/// A conditional moment that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Value(f64),
    /// The moment does not exist (is infinite).
    Unavailable,
}

impl Moment {
    pub fn value(self) -> Option<f64> {
        match self {
            Moment::Value(v) => Some(v),
            Moment::Unavailable => None,
        }
    }

    pub fn expect_value(self, what: &str) -> f64 {
        match self {
            Moment::Value(v) => v,
            Moment::Unavailable => panic!("moment unavailable: {what}"),
        }
    }
}

/// Scalar law for the centred i.i.d. family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IidDistribution {
    /// Isotropic Gaussian with per-coordinate standard deviation `sigma`.
    Gaussian { sigma: f64 },
    /// Symmetric Pareto: magnitude `scale * U^{-1/tail}` (inverse CDF),
    /// sign a fair coin. Moments at or above `tail` are infinite.
    Pareto { tail: f64, scale: f64 },
    /// Student-t with `nu` degrees of freedom, scaled. Moments at or above
    /// `nu` are infinite.
    StudentT { nu: f64, scale: f64 },
    /// Atoms {+2 w.p. 1/3, -1 w.p. 2/3}: mean zero, third moment +2.
    TwoPoint,
}

/// Wire-level tag for [`IidDistribution`]; parameters travel as sibling
/// fields so that unknown-field rejection keeps working.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IidKind {
    Gaussian,
    Pareto,
    StudentT,
    TwoPoint,
}

/// Noise model for `w_k` in the recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    /// `w_k = 0`.
    Zero {
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// The three-atom martingale-difference construction (see module docs).
    /// `alpha`, `K`, `xi` should match the companion step schedule; `p >= 1`
    /// is the moment exponent the construction targets (`p = 1` is the knife
    /// edge and only meaningful for divergence scenarios); `c` in (0, 1/2]
    /// keeps `q_n <= 1/2`. Fires along `direction` (normalised internally,
    /// default first basis vector) when `dim > 1`.
    ThreePoint {
        alpha: f64,
        #[serde(rename = "K", default = "default_offset")]
        offset: f64,
        xi: f64,
        p: f64,
        c: f64,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
    },
    /// Centred i.i.d. noise, scalar along `direction` except the Gaussian,
    /// which is isotropic in `dim` dimensions. `sigma`/`scale` default to 1;
    /// `tail` (Pareto) and `nu` (Student-t) are required for their kinds and
    /// rejected elsewhere.
    Iid {
        distribution: IidKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nu: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
        /// Exponent `p > 1` at which the model declares a finite moment;
        /// must lie strictly below the tail index for heavy-tailed members.
        /// Defaults to 2 for Gaussian and two-point.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_declared: Option<f64>,
        #[serde(default = "default_dim")]
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        direction: Option<Vec<f64>>,
    },
    /// `w = (1 + lambda ||x - center||) * z` with `z` from `base`.
    /// `center` defaults to the origin; scenario builders should point it at
    /// the operator's fixed point.
    Multiplicative {
        lambda: f64,
        base: Box<NoiseModel>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
}

impl IidDistribution {
    /// Largest q for which `E|Z|^q` is finite (`None` = all q).
    fn tail_index(&self) -> Option<f64> {
        match self {
            IidDistribution::Gaussian { .. } | IidDistribution::TwoPoint => None,
            IidDistribution::Pareto { tail, .. } => Some(*tail),
            IidDistribution::StudentT { nu, .. } => Some(*nu),
        }
    }

    /// Exact `E|Z|^q` for the scalar law (the isotropic Gaussian case is
    /// handled by the caller, which knows the dimension).
    fn scalar_abs_moment(&self, q: f64) -> Moment {
        match self {
            IidDistribution::Gaussian { sigma } => gaussian_abs_moment(*sigma, 1, q),
            IidDistribution::Pareto { tail, scale } => {
                if q < *tail {
                    Moment::Value(scale.powf(q) * tail / (tail - q))
                } else {
                    Moment::Unavailable
                }
            }
            IidDistribution::StudentT { nu, scale } => {
                if q < *nu {
                    let ln = 0.5 * q * nu.ln() + ln_gamma(0.5 * (q + 1.0))
                        + ln_gamma(0.5 * (nu - q))
                        - ln_gamma(0.5 * nu)
                        - 0.5 * std::f64::consts::PI.ln();
                    Moment::Value(scale.powf(q) * ln.exp())
                } else {
                    Moment::Unavailable
                }
            }
            IidDistribution::TwoPoint => Moment::Value((2f64.powf(q) + 2.0) / 3.0),
        }
    }

    /// Atom set for finite-support members.
    fn scalar_atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            IidDistribution::TwoPoint => Some(vec![(2.0, 1.0 / 3.0), (-1.0, 2.0 / 3.0)]),
            _ => None,
        }
    }
}

/// `E||Z||^q` for an isotropic Gaussian in `dim` dimensions (chi moments):
/// `sigma^q 2^{q/2} Gamma((dim+q)/2) / Gamma(dim/2)`.
fn gaussian_abs_moment(sigma: f64, dim: usize, q: f64) -> Moment {
    let d = dim as f64;
    let ln = 0.5 * q * 2f64.ln() + ln_gamma(0.5 * (d + q)) - ln_gamma(0.5 * d);
    Moment::Value(sigma.powf(q) * ln.exp())
}

impl NoiseModel {
    /// Zero noise.
    pub fn zero(dim: usize) -> Self {
        NoiseModel::Zero { dim }
    }

    /// The three-point martingale-difference construction with companion
    /// parameters `(alpha, K, xi)` and moment exponent `p`.
    pub fn three_point(
        alpha: f64,
        offset: f64,
        xi: f64,
        p: f64,
        c: f64,
        dim: usize,
    ) -> Result<Self> {
        let m = NoiseModel::ThreePoint {
            alpha,
            offset,
            xi,
            p,
            c,
            dim,
            direction: None,
        };
        m.validate()?;
        Ok(m)
    }

    /// Centred i.i.d. model with declared moment exponent.
    pub fn iid(distribution: IidDistribution, p_declared: f64, dim: usize) -> Result<Self> {
        let (kind, sigma, tail, nu, scale) = match distribution {
            IidDistribution::Gaussian { sigma } => (IidKind::Gaussian, Some(sigma), None, None, None),
            IidDistribution::Pareto { tail, scale } => {
                (IidKind::Pareto, None, Some(tail), None, Some(scale))
            }
            IidDistribution::StudentT { nu, scale } => {
                (IidKind::StudentT, None, None, Some(nu), Some(scale))
            }
            IidDistribution::TwoPoint => (IidKind::TwoPoint, None, None, None, None),
        };
        let m = NoiseModel::Iid {
            distribution: kind,
            sigma,
            tail,
            nu,
            scale,
            p_declared: Some(p_declared),
            dim,
            direction: None,
        };
        m.validate()?;
        Ok(m)
    }

    /// Wraps `base` as multiplicative noise `w = (1 + lambda ||x - center||) z`.
    /// Rejects bases whose declared p-th moment is unavailable.
    pub fn wrap_multiplicative(
        base: NoiseModel,
        lambda: f64,
        center: Option<Vec<f64>>,
    ) -> Result<Self> {
        let m = NoiseModel::Multiplicative {
            lambda,
            base: Box::new(base),
            center,
        };
        m.validate()?;
        Ok(m)
    }

    /// Assembles the typed scalar law from the wire-level fields, rejecting
    /// missing or extraneous parameters.
    pub fn iid_distribution(&self) -> Result<IidDistribution> {
        let NoiseModel::Iid {
            distribution,
            sigma,
            tail,
            nu,
            scale,
            ..
        } = self
        else {
            return Err(Error::invalid("not an iid noise model"));
        };
        let reject_extraneous = |field: &str, value: &Option<f64>| -> Result<()> {
            if value.is_some() {
                return Err(Error::invalid(format!(
                    "field {field} is not valid for distribution {distribution:?}"
                )));
            }
            Ok(())
        };
        match distribution {
            IidKind::Gaussian => {
                reject_extraneous("tail", tail)?;
                reject_extraneous("nu", nu)?;
                reject_extraneous("scale", scale)?;
                let sigma = sigma.unwrap_or(1.0);
                if !(sigma > 0.0) {
                    return Err(Error::invalid(format!("gaussian sigma must be > 0, got {sigma}")));
                }
                Ok(IidDistribution::Gaussian { sigma })
            }
            IidKind::Pareto => {
                reject_extraneous("sigma", sigma)?;
                reject_extraneous("nu", nu)?;
                let tail = tail.ok_or_else(|| Error::invalid("pareto requires a tail index"))?;
                let scale = scale.unwrap_or(1.0);
                if !(tail > 1.0) {
                    return Err(Error::invalid(format!("pareto tail index must be > 1, got {tail}")));
                }
                if !(scale > 0.0) {
                    return Err(Error::invalid(format!("pareto scale must be > 0, got {scale}")));
                }
                Ok(IidDistribution::Pareto { tail, scale })
            }
            IidKind::StudentT => {
                reject_extraneous("sigma", sigma)?;
                reject_extraneous("tail", tail)?;
                let nu = nu.ok_or_else(|| Error::invalid("student_t requires nu"))?;
                let scale = scale.unwrap_or(1.0);
                if !(nu > 1.0) {
                    return Err(Error::invalid(format!("student-t nu must be > 1, got {nu}")));
                }
                if !(scale > 0.0) {
                    return Err(Error::invalid(format!("student-t scale must be > 0, got {scale}")));
                }
                Ok(IidDistribution::StudentT { nu, scale })
            }
            IidKind::TwoPoint => {
                reject_extraneous("sigma", sigma)?;
                reject_extraneous("tail", tail)?;
                reject_extraneous("nu", nu)?;
                reject_extraneous("scale", scale)?;
                Ok(IidDistribution::TwoPoint)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            NoiseModel::Zero { dim } => {
                if *dim == 0 {
                    return Err(Error::invalid("noise dim must be >= 1"));
                }
            }
            NoiseModel::ThreePoint {
                alpha,
                offset,
                xi,
                p,
                c,
                dim,
                direction,
            } => {
                if !(*alpha > 0.0) {
                    return Err(Error::invalid(format!(
                        "three_point alpha must be > 0, got {alpha}"
                    )));
                }
                if !(*offset >= 1.0) {
                    return Err(Error::invalid(format!(
                        "three_point K must be >= 1, got {offset}"
                    )));
                }
                if !(*xi > 0.0 && *xi <= 1.0) {
                    return Err(Error::invalid(format!(
                        "three_point xi must be in (0,1], got {xi}"
                    )));
                }
                if !(*p >= 1.0) {
                    return Err(Error::invalid(format!(
                        "three_point p must be >= 1, got {p}"
                    )));
                }
                if !(*c > 0.0 && *c <= 0.5) {
                    return Err(Error::invalid(format!(
                        "three_point c must be in (0, 1/2], got {c}"
                    )));
                }
                validate_direction(direction, *dim)?;
            }
            NoiseModel::Iid {
                p_declared,
                dim,
                direction,
                ..
            } => {
                let dist = self.iid_distribution()?;
                let p = p_declared.unwrap_or(2.0);
                if !(p > 1.0) {
                    return Err(Error::invalid(format!(
                        "iid p_declared must be > 1, got {p}"
                    )));
                }
                if let Some(tail) = dist.tail_index() {
                    if p >= tail {
                        return Err(Error::invalid(format!(
                            "iid p_declared = {p} must be strictly below the tail index {tail}"
                        )));
                    }
                }
                validate_direction(direction, *dim)?;
            }
            NoiseModel::Multiplicative {
                lambda,
                base,
                center,
            } => {
                if !(*lambda >= 0.0) {
                    return Err(Error::invalid(format!(
                        "multiplicative lambda must be >= 0, got {lambda}"
                    )));
                }
                if matches!(**base, NoiseModel::Multiplicative { .. }) {
                    return Err(Error::invalid("multiplicative wrappers do not nest"));
                }
                base.validate()?;
                let p = base.declared_p().ok_or_else(|| {
                    Error::invalid("multiplicative base must declare a moment exponent")
                })?;
                if base.conditional_moment_at_origin(0, p)? == Moment::Unavailable {
                    return Err(Error::invalid(
                        "multiplicative base must have a finite declared p-th moment",
                    ));
                }
                if let Some(c) = center {
                    if c.len() != base.dim() {
                        return Err(Error::DimensionMismatch {
                            expected: base.dim(),
                            got: c.len(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            NoiseModel::Zero { dim } => *dim,
            NoiseModel::ThreePoint { dim, .. } => *dim,
            NoiseModel::Iid { dim, .. } => *dim,
            NoiseModel::Multiplicative { base, .. } => base.dim(),
        }
    }

    /// Returns a copy with the given dimension (used when a scenario binds a
    /// 1-d noise fragment to a d-dimensional operator).
    pub fn with_dim(mut self, new_dim: usize) -> Self {
        match &mut self {
            NoiseModel::Zero { dim } => *dim = new_dim,
            NoiseModel::ThreePoint { dim, .. } => *dim = new_dim,
            NoiseModel::Iid { dim, .. } => *dim = new_dim,
            NoiseModel::Multiplicative { base, .. } => {
                let inner = std::mem::replace(&mut **base, NoiseModel::Zero { dim: 1 });
                **base = inner.with_dim(new_dim);
            }
        }
        self
    }

    /// The moment exponent `p` the model declares a finite moment at.
    pub fn declared_p(&self) -> Option<f64> {
        match self {
            NoiseModel::Zero { .. } => None,
            NoiseModel::ThreePoint { p, .. } => Some(*p),
            NoiseModel::Iid { p_declared, .. } => Some(p_declared.unwrap_or(2.0)),
            NoiseModel::Multiplicative { base, .. } => base.declared_p(),
        }
    }

    /// Declared growth constants `(A_p, B_p, p)` of the conditional bound
    /// `E[||w||^p | x] <= A_p + B_p ||x - center||^p`.
    ///
    /// Additive families have `B_p = 0` with `A_p` their exact p-th moment
    /// (for the three-point family the constant `2 c (4/alpha)^p`). The
    /// multiplicative wrapper uses `(a+b)^p <= 2^{p-1}(a^p + b^p)`.
    pub fn growth_bound(&self) -> Option<(f64, f64, f64)> {
        let p = self.declared_p()?;
        match self {
            NoiseModel::Multiplicative { lambda, base, .. } => {
                let m_p = base.conditional_moment_at_origin(0, p).ok()?.value()?;
                let f = 2f64.powf(p - 1.0);
                Some((f * m_p, f * lambda.powf(p) * m_p, p))
            }
            _ => {
                let m_p = self.conditional_moment_at_origin(0, p).ok()?.value()?;
                Some((m_p, 0.0, p))
            }
        }
    }

    /// `s_n` of the three-point construction.
    pub fn jump_size(&self, n: u64) -> Option<f64> {
        match self {
            NoiseModel::ThreePoint {
                alpha, offset, xi, ..
            } => Some(4.0 / alpha * (n as f64 + offset).powf(*xi)),
            _ => None,
        }
    }

    /// `q_n` of the three-point construction.
    pub fn firing_probability(&self, n: u64) -> Option<f64> {
        match self {
            NoiseModel::ThreePoint {
                offset, xi, p, c, ..
            } => Some(c * (n as f64 + offset).powf(-xi * p)),
            _ => None,
        }
    }

    /// `sum_{n=0}^{N-1} 2 q_n`: the expected number of non-zero firings up to
    /// the horizon, accumulated with compensated summation. Only defined for
    /// the three-point family.
    pub fn expected_jump_count(&self, horizon: u64) -> Result<f64> {
        match self {
            NoiseModel::ThreePoint { .. } => {
                let mut acc = CompensatedSum::new();
                for n in 0..horizon {
                    acc.add(2.0 * self.firing_probability(n).unwrap());
                }
                Ok(acc.total())
            }
            _ => Err(Error::UnsupportedNoise {
                op: "expected_jump_count",
            }),
        }
    }

    fn direction_or_e1(&self, dim: usize) -> Vec<f64> {
        let stored = match self {
            NoiseModel::ThreePoint { direction, .. } | NoiseModel::Iid { direction, .. } => {
                direction.clone()
            }
            _ => None,
        };
        match stored {
            Some(d) => {
                let n = crate::numeric::norm(&d);
                d.iter().map(|v| v / n).collect()
            }
            None => {
                let mut e = vec![0.0; dim];
                e[0] = 1.0;
                e
            }
        }
    }

    /// One draw from the conditional law of `w_n` given the state `x`.
    /// Deterministic given `(seed, stream, position)` of the supplied RNG.
    pub fn sample<R: Rng + ?Sized>(&self, n: u64, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let dim = self.dim();
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        Ok(self.sample_unchecked(n, x, rng))
    }

    fn sample_unchecked<R: Rng + ?Sized>(&self, n: u64, x: &[f64], rng: &mut R) -> Vec<f64> {
        let dim = self.dim();
        match self {
            NoiseModel::Zero { .. } => vec![0.0; dim],
            NoiseModel::ThreePoint { .. } => {
                let s = self.jump_size(n).unwrap();
                let q = self.firing_probability(n).unwrap();
                let u: f64 = rng.random();
                let v = if u < q {
                    s
                } else if u < 2.0 * q {
                    -s
                } else {
                    0.0
                };
                scaled_direction(&self.direction_or_e1(dim), v)
            }
            NoiseModel::Iid { .. } => {
                let dist = self.iid_distribution().expect("validated iid parameters");
                match dist {
                    IidDistribution::Gaussian { sigma } => {
                        let normal = rand_distr::Normal::new(0.0, sigma).expect("validated sigma");
                        (0..dim).map(|_| normal.sample(rng)).collect()
                    }
                    IidDistribution::Pareto { tail, scale } => {
                        let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
                        let magnitude = scale * u.powf(-1.0 / tail);
                        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        scaled_direction(&self.direction_or_e1(dim), sign * magnitude)
                    }
                    IidDistribution::StudentT { nu, scale } => {
                        let t = rand_distr::StudentT::new(nu).expect("validated nu");
                        scaled_direction(&self.direction_or_e1(dim), scale * t.sample(rng))
                    }
                    IidDistribution::TwoPoint => {
                        let u: f64 = rng.random();
                        let v = if u < 1.0 / 3.0 { 2.0 } else { -1.0 };
                        scaled_direction(&self.direction_or_e1(dim), v)
                    }
                }
            }
            NoiseModel::Multiplicative {
                lambda,
                base,
                center,
            } => {
                let u = distance_to_center(x, center.as_deref());
                let factor = 1.0 + lambda * u;
                base.sample_unchecked(n, x, rng)
                    .into_iter()
                    .map(|z| factor * z)
                    .collect()
            }
        }
    }

    /// Exact `E[||w_n||^q | x]`: atom enumeration for finite-support
    /// families, closed form otherwise. Infinite moments are reported as
    /// [`Moment::Unavailable`].
    pub fn conditional_moment(&self, n: u64, x: &[f64], q: f64) -> Result<Moment> {
        if !(q >= 1.0) {
            return Err(Error::invalid(format!(
                "moment order q must be >= 1, got {q}"
            )));
        }
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.moment_inner(n, x, q))
    }

    fn conditional_moment_at_origin(&self, n: u64, q: f64) -> Result<Moment> {
        let x = vec![0.0; self.dim()];
        if !(q >= 1.0) {
            return Err(Error::invalid(format!(
                "moment order q must be >= 1, got {q}"
            )));
        }
        Ok(self.moment_inner(n, &x, q))
    }

    fn moment_inner(&self, n: u64, x: &[f64], q: f64) -> Moment {
        match self {
            NoiseModel::Zero { .. } => Moment::Value(0.0),
            NoiseModel::ThreePoint { .. } => {
                // Atom enumeration: two atoms of magnitude s_n, one at zero.
                let s = self.jump_size(n).unwrap();
                let qn = self.firing_probability(n).unwrap();
                Moment::Value(2.0 * qn * s.powf(q))
            }
            NoiseModel::Iid { dim, .. } => {
                let dist = self.iid_distribution().expect("validated iid parameters");
                match dist {
                    IidDistribution::Gaussian { sigma } => gaussian_abs_moment(sigma, *dim, q),
                    other => other.scalar_abs_moment(q),
                }
            }
            NoiseModel::Multiplicative {
                lambda,
                base,
                center,
            } => {
                let u = distance_to_center(x, center.as_deref());
                match base.moment_inner(n, x, q) {
                    Moment::Value(m) => Moment::Value((1.0 + lambda * u).powf(q) * m),
                    Moment::Unavailable => Moment::Unavailable,
                }
            }
        }
    }

    /// Exact signed scalar moment `E[w^j]` for finite-support scalar models
    /// (atom enumeration); `None` for continuous or state-dependent laws.
    pub fn signed_scalar_moment(&self, n: u64, j: u32) -> Option<f64> {
        let atoms = self.scalar_atoms(n)?;
        Some(atoms.iter().map(|(w, p)| p * w.powi(j as i32)).sum())
    }

    /// Scalar atom set `(value, probability)` at step `n`, when the law has
    /// finite support.
    pub fn scalar_atoms(&self, n: u64) -> Option<Vec<(f64, f64)>> {
        match self {
            NoiseModel::Zero { .. } => Some(vec![(0.0, 1.0)]),
            NoiseModel::ThreePoint { .. } => {
                let s = self.jump_size(n).unwrap();
                let q = self.firing_probability(n).unwrap();
                Some(vec![(s, q), (-s, q), (0.0, 1.0 - 2.0 * q)])
            }
            NoiseModel::Iid { .. } => self
                .iid_distribution()
                .expect("validated iid parameters")
                .scalar_atoms(),
            NoiseModel::Multiplicative { .. } => None,
        }
    }

    /// Vector atom set at `(n, x)` for finite-support models, including the
    /// multiplicative wrapper of a finite-support base (atoms scale with the
    /// state). `None` when the support is infinite.
    pub fn atoms(&self, n: u64, x: &[f64]) -> Option<Vec<(Vec<f64>, f64)>> {
        match self {
            NoiseModel::Multiplicative {
                lambda,
                base,
                center,
            } => {
                let u = distance_to_center(x, center.as_deref());
                let factor = 1.0 + lambda * u;
                let inner = base.atoms(n, x)?;
                Some(
                    inner
                        .into_iter()
                        .map(|(w, p)| (w.iter().map(|v| factor * v).collect(), p))
                        .collect(),
                )
            }
            _ => {
                let dim = self.dim();
                let dir = self.direction_or_e1(dim);
                let scalars = self.scalar_atoms(n)?;
                Some(
                    scalars
                        .into_iter()
                        .map(|(w, p)| (scaled_direction(&dir, w), p))
                        .collect(),
                )
            }
        }
    }
}

fn validate_direction(direction: &Option<Vec<f64>>, dim: usize) -> Result<()> {
    if let Some(d) = direction {
        if d.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: d.len(),
            });
        }
        if crate::numeric::norm(d) <= 1e-12 {
            return Err(Error::invalid("noise direction must be non-zero"));
        }
    }
    Ok(())
}

fn scaled_direction(dir: &[f64], v: f64) -> Vec<f64> {
    dir.iter().map(|d| d * v).collect()
}

fn distance_to_center(x: &[f64], center: Option<&[f64]>) -> f64 {
    match center {
        Some(c) => dist(x, c),
        None => crate::numeric::norm(x),
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        /// A firing always displaces the iterate by exactly 4 under the
        /// companion schedule, whatever the construction parameters.
        #[test]
        fn firing_displacement_is_four(
            alpha in 0.01..2.0f64,
            offset in 1.0..10.0f64,
            xi in 0.05..=1.0f64,
            p in 1.0..4.0f64,
            n in 0u64..1_000_000,
        ) {
            let m = NoiseModel::three_point(alpha, offset, xi, p, 0.5, 1).unwrap();
            let s = crate::schedules::StepSchedule::polynomial(alpha, offset, xi).unwrap();
            let prod = s.value(n) * m.jump_size(n).unwrap();
            prop_assert!(((prod - 4.0) / 4.0).abs() < 1e-12);
            prop_assert!(m.firing_probability(n).unwrap() <= 0.5);
        }

        /// Conditional mean of the three-point atoms is exactly zero and the
        /// p-th moment matches the closed form 2 c (4/alpha)^p.
        #[test]
        fn atom_mean_zero_and_moment_constant(
            alpha in 0.01..2.0f64,
            xi in 0.05..=1.0f64,
            p in 1.0..4.0f64,
            c in 0.01..=0.5f64,
            n in 0u64..100_000,
        ) {
            let m = NoiseModel::three_point(alpha, 1.0, xi, p, c, 1).unwrap();
            let atoms = m.scalar_atoms(n).unwrap();
            let mean: f64 = atoms.iter().map(|(w, q)| w * q).sum();
            prop_assert_eq!(mean, 0.0);
            let got = m.conditional_moment(n, &[0.0], p).unwrap().expect_value("moment");
            let closed = 2.0 * c * (4.0 / alpha).powf(p);
            prop_assert!(((got - closed) / closed).abs() < 1e-11);
        }
    }
}
