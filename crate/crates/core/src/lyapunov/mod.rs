//! Lyapunov candidates and numerical drift certification.
//!
//! A certificate here is *evidence*, not proof: `certify_drift` samples an
//! annulus around the fixed point and reports the worst observed drift ratio
//! together with estimates of the sandwich constants `c1, c2` and the
//! smoothness constant `L2`. The companion submodules carry the inequality
//! oracles ([`inequalities`]), the interval-projection device for the
//! `p > 2` regime ([`projection`]), and the exact fourth-moment expansion
//! demo ([`fourth_moment`]).

pub mod fourth_moment;
pub mod inequalities;
pub mod projection;

pub use fourth_moment::{fourth_moment_drift_demo, FourthMomentDemo};
pub use inequalities::{
    norm_power_gap, norm_power_random_search, scalar_power_bounds, scalar_power_random_search,
    PowerBoundGaps,
};
pub use projection::{check_projection_drift, ProjectionStep, ProjectionTracker};

use crate::linalg::DenseMat;
use crate::numeric::{dot, sample_annulus, unit_vector};
use crate::operators::Operator;
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A candidate Lyapunov function `Phi` evaluated on displacements
/// `v = x - x*`. Nonnegative with `Phi(0) = 0` for every kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LyapunovFunction {
    /// `Phi(v) = v^T P v` for symmetric positive definite `P`.
    WeightedQuadratic {
        #[serde(rename = "P")]
        p_mat: DenseMat,
    },
    /// `Phi(v) = v^T P v` for `k.v <= 0`, `v^T (P + eta_sw k k^T) v`
    /// otherwise. Continuous across the switching plane because the added
    /// term vanishes there; the gradient formula `2Pv + 2 eta_sw max(k.v, 0) k`
    /// is likewise continuous (the one-sided choice at `k.v = 0` coincides
    /// with it).
    PiecewiseQuadratic {
        #[serde(rename = "P")]
        p_mat: DenseMat,
        eta_sw: f64,
        k: Vec<f64>,
    },
    /// `Psi(v) = base(v)^{power/2}` with recorded sandwich bounds
    /// `a1 ||v||^power <= Psi(v) <= a2 ||v||^power`.
    PowerTransform {
        base: Box<LyapunovFunction>,
        power: f64,
        a1: f64,
        a2: f64,
    },
}

impl LyapunovFunction {
    /// `Phi(v) = ||v||^2`.
    pub fn squared_norm(dim: usize) -> Self {
        LyapunovFunction::WeightedQuadratic {
            p_mat: DenseMat::identity(dim),
        }
    }

    /// `Phi(v) = v^T P v`; rejects asymmetric or non-positive-definite `P`.
    pub fn weighted_quadratic(p_rows: &[Vec<f64>]) -> Result<Self> {
        let p_mat = DenseMat::from_rows(p_rows)?;
        for i in 0..p_mat.dim {
            for j in 0..i {
                if (p_mat.get(i, j) - p_mat.get(j, i)).abs() > 1e-9 {
                    return Err(Error::invalid("quadratic weight matrix must be symmetric"));
                }
            }
        }
        if !p_mat.is_positive_definite() {
            return Err(Error::invalid(
                "quadratic weight matrix must be positive definite",
            ));
        }
        Ok(LyapunovFunction::WeightedQuadratic { p_mat })
    }

    /// The switched quadratic used for piecewise-linear drifts.
    pub fn piecewise_quadratic(p_rows: &[Vec<f64>], eta_sw: f64, k: Vec<f64>) -> Result<Self> {
        let p_mat = DenseMat::from_rows(p_rows)?;
        if k.len() != p_mat.dim {
            return Err(Error::DimensionMismatch {
                expected: p_mat.dim,
                got: k.len(),
            });
        }
        if !(eta_sw >= 0.0) {
            return Err(Error::invalid("eta_sw must be nonnegative"));
        }
        if !p_mat.is_positive_definite() {
            return Err(Error::invalid("piecewise base matrix must be positive definite"));
        }
        Ok(LyapunovFunction::PiecewiseQuadratic { p_mat, eta_sw, k })
    }

    /// `Psi = Phi^{p/2}` for `p` in (1, 2], given certified sandwich
    /// constants `c1, c2 > 0` of the base; records `a1 = c1^{p/2}`,
    /// `a2 = c2^{p/2}`.
    pub fn power_transform(self, p: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(p > 1.0 && p <= 2.0) {
            return Err(Error::invalid(format!(
                "power transform exponent must be in (1, 2], got {p}"
            )));
        }
        if !(c1 > 0.0 && c2 >= c1) {
            return Err(Error::invalid(format!(
                "power transform needs certified 0 < c1 <= c2, got c1={c1} c2={c2}"
            )));
        }
        if matches!(self, LyapunovFunction::PowerTransform { .. }) {
            return Err(Error::invalid("power transforms do not nest"));
        }
        Ok(LyapunovFunction::PowerTransform {
            base: Box::new(self),
            power: p,
            a1: c1.powf(0.5 * p),
            a2: c2.powf(0.5 * p),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            LyapunovFunction::WeightedQuadratic { p_mat } => p_mat.dim,
            LyapunovFunction::PiecewiseQuadratic { p_mat, .. } => p_mat.dim,
            LyapunovFunction::PowerTransform { base, .. } => base.dim(),
        }
    }

    /// Re-checks the construction invariants; deserialised values must pass
    /// through here before use.
    pub fn validate(&self) -> Result<()> {
        match self {
            LyapunovFunction::WeightedQuadratic { p_mat } => {
                Self::weighted_quadratic(&p_mat.to_rows()).map(|_| ())
            }
            LyapunovFunction::PiecewiseQuadratic { p_mat, eta_sw, k } => {
                Self::piecewise_quadratic(&p_mat.to_rows(), *eta_sw, k.clone()).map(|_| ())
            }
            LyapunovFunction::PowerTransform { base, power, a1, a2 } => {
                base.validate()?;
                if matches!(**base, LyapunovFunction::PowerTransform { .. }) {
                    return Err(Error::invalid("power transforms do not nest"));
                }
                if !(*power > 1.0 && *power <= 2.0) {
                    return Err(Error::invalid(format!(
                        "power transform exponent must be in (1, 2], got {power}"
                    )));
                }
                if !(*a1 > 0.0 && *a2 >= *a1) {
                    return Err(Error::invalid(format!(
                        "power transform needs 0 < a1 <= a2, got a1={a1} a2={a2}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Recorded `(a1, a2)` bounds of a power transform.
    pub fn power_bounds(&self) -> Option<(f64, f64)> {
        match self {
            LyapunovFunction::PowerTransform { a1, a2, .. } => Some((*a1, *a2)),
            _ => None,
        }
    }

    /// `Phi(v)`.
    pub fn value(&self, v: &[f64]) -> f64 {
        match self {
            LyapunovFunction::WeightedQuadratic { p_mat } => {
                let pv = p_mat.matvec(v);
                dot(v, &pv)
            }
            LyapunovFunction::PiecewiseQuadratic { p_mat, eta_sw, k } => {
                let pv = p_mat.matvec(v);
                let kv = dot(k, v);
                let switch = if kv > 0.0 { eta_sw * kv * kv } else { 0.0 };
                dot(v, &pv) + switch
            }
            LyapunovFunction::PowerTransform { base, power, .. } => {
                base.value(v).powf(0.5 * power)
            }
        }
    }

    /// Analytic gradient of `Phi` at `v`.
    pub fn gradient(&self, v: &[f64]) -> Vec<f64> {
        match self {
            LyapunovFunction::WeightedQuadratic { p_mat } => {
                let mut g = p_mat.matvec(v);
                for gi in g.iter_mut() {
                    *gi *= 2.0;
                }
                g
            }
            LyapunovFunction::PiecewiseQuadratic { p_mat, eta_sw, k } => {
                let mut g = p_mat.matvec(v);
                let kv = dot(k, v);
                let c = if kv > 0.0 { 2.0 * eta_sw * kv } else { 0.0 };
                for (gi, ki) in g.iter_mut().zip(k) {
                    *gi = 2.0 * *gi + c * ki;
                }
                g
            }
            LyapunovFunction::PowerTransform { base, power, .. } => {
                let phi = base.value(v);
                if phi <= 0.0 {
                    return vec![0.0; v.len()];
                }
                let scale = 0.5 * power * phi.powf(0.5 * power - 1.0);
                base.gradient(v).into_iter().map(|g| scale * g).collect()
            }
        }
    }

    /// Analytic sandwich constants `c1 ||v||^2 <= Phi(v) <= c2 ||v||^2`
    /// where the kind admits them in closed form.
    pub fn quadratic_bounds(&self) -> Option<(f64, f64)> {
        match self {
            LyapunovFunction::WeightedQuadratic { p_mat } => {
                let eigs = p_mat.to_nalgebra().symmetric_eigen().eigenvalues;
                let min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
                let max = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Some((min, max))
            }
            LyapunovFunction::PiecewiseQuadratic { p_mat, eta_sw, k } => {
                let eigs = p_mat.to_nalgebra().symmetric_eigen().eigenvalues;
                let min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
                // Upper form: P + eta k k^T.
                let dim = p_mat.dim;
                let mut upper = p_mat.clone();
                for i in 0..dim {
                    for j in 0..dim {
                        upper.set(i, j, upper.get(i, j) + eta_sw * k[i] * k[j]);
                    }
                }
                let eigs = upper.to_nalgebra().symmetric_eigen().eigenvalues;
                let max = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                Some((min, max))
            }
            LyapunovFunction::PowerTransform { .. } => None,
        }
    }
}

/// Drift rate inherited by the power transform: `eta_p = (p/2) eta`.
pub fn power_drift_rate(p: f64, eta: f64) -> f64 {
    0.5 * p * eta
}

/// Sampling annulus for certification, centred on the operator fixed point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Region {
    pub r_min: f64,
    pub r_max: f64,
    pub center: Vec<f64>,
}

/// A sampled point where the drift ratio failed to be negative.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub point: Vec<f64>,
    /// The observed ratio `<grad Phi, H(x) - x> / Phi` (nonnegative here).
    pub margin: f64,
}

/// Outcome of sampling-based drift certification.
#[derive(Debug, Clone, Serialize)]
pub struct DriftCertificate {
    /// Largest drift rate with no sampled violation: `-max_x rho(x)`.
    pub eta_hat: f64,
    #[serde(rename = "L2_hat")]
    pub l2_hat: f64,
    pub c1_hat: f64,
    pub c2_hat: f64,
    /// First violations encountered (capped); `violation_count` is the total.
    pub violations: Vec<Violation>,
    pub violation_count: usize,
    pub samples: usize,
    pub region: Region,
}

impl DriftCertificate {
    pub fn passes(&self) -> bool {
        self.eta_hat > 0.0 && self.violation_count == 0
    }
}

const MAX_STORED_VIOLATIONS: usize = 32;

/// Samples the annulus `r_min <= ||x - x*|| <= r_max` and measures the drift
/// ratio `rho(x) = <grad Phi(x - x*), H(x) - x> / Phi(x - x*)` at every
/// point, alongside the sandwich constants and a multiscale smoothness probe.
pub fn certify_drift<R: Rng + ?Sized>(
    op: &Operator,
    phi: &LyapunovFunction,
    r_min: f64,
    r_max: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<DriftCertificate> {
    let center = op
        .fixed_point()
        .ok_or(Error::MissingFixedPoint)?
        .to_vec();
    if !(r_min > 0.0) || !(r_max > r_min) {
        return Err(Error::DegenerateRegion { r_min, r_max });
    }
    if phi.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: phi.dim(),
        });
    }

    let mut max_rho = f64::NEG_INFINITY;
    let mut c1_hat = f64::INFINITY;
    let mut c2_hat = 0.0f64;
    let mut violations = Vec::new();
    let mut violation_count = 0usize;
    let mut drift = vec![0.0; op.dim()];

    for _ in 0..n_samples {
        let x = sample_annulus(rng, &center, r_min, r_max);
        let v: Vec<f64> = x.iter().zip(&center).map(|(a, c)| a - c).collect();
        let phi_v = phi.value(&v);
        let nsq = dot(&v, &v);
        if phi_v <= 0.0 {
            // Not even nonnegative-definite on the sample: fatal violation.
            violation_count += 1;
            if violations.len() < MAX_STORED_VIOLATIONS {
                violations.push(Violation {
                    point: x,
                    margin: f64::INFINITY,
                });
            }
            max_rho = f64::INFINITY;
            continue;
        }
        c1_hat = c1_hat.min(phi_v / nsq);
        c2_hat = c2_hat.max(phi_v / nsq);
        op.drift_into(&x, &mut drift);
        let rho = dot(&phi.gradient(&v), &drift) / phi_v;
        max_rho = max_rho.max(rho);
        if rho >= 0.0 {
            violation_count += 1;
            if violations.len() < MAX_STORED_VIOLATIONS {
                violations.push(Violation {
                    point: x,
                    margin: rho,
                });
            }
        }
    }

    // Smoothness constant from random pairs at three displacement scales,
    // rearranging Phi(y) <= Phi(x) + <grad Phi(x), y - x> + (L2/2)||y - x||^2.
    let n_pairs = (n_samples / 10).max(100);
    let mut l2_hat = 0.0f64;
    for _ in 0..n_pairs {
        let x = sample_annulus(rng, &center, r_min, r_max);
        let v: Vec<f64> = x.iter().zip(&center).map(|(a, c)| a - c).collect();
        let dir = unit_vector(rng, op.dim());
        let g = phi.gradient(&v);
        for h in [1e-2, 1e-1, 1.0] {
            let y: Vec<f64> = v.iter().zip(&dir).map(|(vi, di)| vi + h * di).collect();
            let quotient = 2.0 * (phi.value(&y) - phi.value(&v) - h * dot(&g, &dir)) / (h * h);
            l2_hat = l2_hat.max(quotient);
        }
    }

    Ok(DriftCertificate {
        eta_hat: -max_rho,
        l2_hat,
        c1_hat,
        c2_hat,
        violations,
        violation_count,
        samples: n_samples,
        region: Region {
            r_min,
            r_max,
            center,
        },
    })
}

/// Solves the continuous Lyapunov equation `A^T P + P A = -Q` by Kronecker
/// vectorisation and returns the symmetrised solution, rejecting it when it
/// is not positive definite (which certifies `A` was not Hurwitz).
pub fn solve_continuous_lyapunov(a_rows: &[Vec<f64>], q_rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let a = DenseMat::from_rows(a_rows)?;
    let q = DenseMat::from_rows(q_rows)?;
    if q.dim != a.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: q.dim,
        });
    }
    let d = a.dim;
    let at = a.to_nalgebra().transpose();
    let eye = nalgebra::DMatrix::<f64>::identity(d, d);
    let m = eye.kronecker(&at) + at.kronecker(&eye);
    let neg_q = -q.to_nalgebra();
    let rhs = nalgebra::DVector::from_column_slice(neg_q.as_slice());
    let sol = m.lu().solve(&rhs).ok_or(Error::SingularMatrix {
        context: "lyapunov equation",
    })?;
    let p = nalgebra::DMatrix::from_column_slice(d, d, sol.as_slice());
    let p = (&p + p.transpose()) * 0.5;
    let p = DenseMat::from_nalgebra(&p);
    if !p.is_positive_definite() {
        return Err(Error::invalid(
            "lyapunov solution is not positive definite; the matrix is not Hurwitz",
        ));
    }
    Ok(p.to_rows())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::dist;
    use crate::operators;
    use crate::rng::oracle_stream;

    #[test]
    fn squared_norm_values_and_gradient() {
        let phi = LyapunovFunction::squared_norm(2);
        assert_eq!(phi.value(&[0.0, 0.0]), 0.0);
        assert_eq!(phi.value(&[3.0, 4.0]), 25.0);
        assert_eq!(phi.gradient(&[3.0, 4.0]), vec![6.0, 8.0]);
        assert_eq!(phi.quadratic_bounds(), Some((1.0, 1.0)));
    }

    #[test]
    fn contractive_drift_rate_exceeds_one_minus_gamma_squared() {
        let mut rng = oracle_stream(3);
        for &gamma in &[0.0, 0.3, 0.5, 0.9] {
            let op = operators::make_contractive_affine(gamma, vec![0.0, 0.0], None).unwrap();
            let phi = LyapunovFunction::squared_norm(2);
            let cert = certify_drift(&op, &phi, 1e-3, 10.0, 20_000, &mut rng).unwrap();
            assert!(cert.passes(), "gamma={gamma}");
            let bound = 1.0 - gamma * gamma;
            assert!(
                cert.eta_hat >= bound - 1e-6,
                "gamma={gamma}: eta_hat={} < {bound}",
                cert.eta_hat
            );
            // For this map the ratio is exactly 2(1 - gamma) at every point.
            assert!((cert.eta_hat - 2.0 * (1.0 - gamma)).abs() < 1e-9);
            assert!((cert.c1_hat - 1.0).abs() < 1e-9 && (cert.c2_hat - 1.0).abs() < 1e-9);
            // ||.||^2 has L2 = 2 exactly.
            assert!((cert.l2_hat - 2.0).abs() < 1e-8);
        }
    }

    #[test]
    fn certify_requires_fixed_point_and_region() {
        let op = operators::make_nonexpansive(vec![1.0, 0.0], 1.0).unwrap();
        let phi = LyapunovFunction::squared_norm(2);
        let mut rng = oracle_stream(4);
        assert!(matches!(
            certify_drift(&op, &phi, 1e-3, 10.0, 10, &mut rng),
            Err(Error::MissingFixedPoint)
        ));
        let op = operators::make_contractive_affine(0.5, vec![0.0, 0.0], None).unwrap();
        assert!(matches!(
            certify_drift(&op, &phi, 0.0, 10.0, 10, &mut rng),
            Err(Error::DegenerateRegion { .. })
        ));
    }

    #[test]
    fn power_transform_identity_and_values() {
        let phi = LyapunovFunction::squared_norm(2);
        // Exponent 2 leaves the function unchanged.
        let psi = phi.clone().power_transform(2.0, 1.0, 1.0).unwrap();
        let mut rng = oracle_stream(5);
        for _ in 0..100 {
            let v = crate::numeric::sample_annulus(&mut rng, &[0.0, 0.0], 0.0, 5.0);
            assert!((psi.value(&v) - phi.value(&v)).abs() <= 1e-12 * (1.0 + phi.value(&v)));
        }
        // ||v|| = 2, p = 1.6: Psi = 2^{1.6}.
        let psi = LyapunovFunction::squared_norm(2)
            .power_transform(1.6, 1.0, 1.0)
            .unwrap();
        let got = psi.value(&[2.0, 0.0]);
        assert!((got - 2f64.powf(1.6)).abs() < 1e-12);
        // Rejects exponents outside (1, 2].
        assert!(LyapunovFunction::squared_norm(2)
            .power_transform(1.0, 1.0, 1.0)
            .is_err());
        assert!(LyapunovFunction::squared_norm(2)
            .power_transform(2.5, 1.0, 1.0)
            .is_err());
    }

    #[test]
    fn power_transform_sandwich_holds_on_samples() {
        let phi = LyapunovFunction::weighted_quadratic(&[vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let (c1, c2) = phi.quadratic_bounds().unwrap();
        let p = 1.6;
        let psi = phi.power_transform(p, c1, c2).unwrap();
        let (a1, a2) = psi.power_bounds().unwrap();
        assert!((a1 - c1.powf(0.8)).abs() < 1e-15);
        assert!((a2 - c2.powf(0.8)).abs() < 1e-15);
        let mut rng = oracle_stream(6);
        for _ in 0..10_000 {
            let v = crate::numeric::sample_annulus(&mut rng, &[0.0, 0.0], 1e-6, 10.0);
            let np = crate::numeric::norm(&v).powf(p);
            let val = psi.value(&v);
            assert!(a1 * np <= val * (1.0 + 1e-12) && val <= a2 * np * (1.0 + 1e-12));
        }
    }

    #[test]
    fn gradients_match_central_differences() {
        let candidates = vec![
            LyapunovFunction::weighted_quadratic(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap(),
            LyapunovFunction::piecewise_quadratic(
                &[vec![1.0, 0.0], vec![0.0, 3.0]],
                9.0,
                vec![1.0, 0.0],
            )
            .unwrap(),
            LyapunovFunction::weighted_quadratic(&[vec![1.0, 0.0], vec![0.0, 3.0]])
                .unwrap()
                .power_transform(1.6, 1.0, 3.0)
                .unwrap(),
        ];
        let mut rng = oracle_stream(8);
        for phi in &candidates {
            let mut checked = 0;
            while checked < 1000 {
                let v = crate::numeric::sample_annulus(&mut rng, &[0.0, 0.0], 0.1, 10.0);
                let h = 1e-6 * (1.0 + crate::numeric::norm(&v));
                // Stay away from the switching plane by a 10h margin.
                if matches!(phi, LyapunovFunction::PiecewiseQuadratic { .. })
                    && v[0].abs() < 10.0 * h
                {
                    continue;
                }
                checked += 1;
                let g = phi.gradient(&v);
                for i in 0..2 {
                    let mut vp = v.clone();
                    let mut vm = v.clone();
                    vp[i] += h;
                    vm[i] -= h;
                    let fd = (phi.value(&vp) - phi.value(&vm)) / (2.0 * h);
                    let scale = 1.0 + g[i].abs();
                    assert!(
                        (g[i] - fd).abs() / scale < 1e-5,
                        "component {i}: analytic {} vs fd {fd}",
                        g[i]
                    );
                }
            }
        }
    }

    #[test]
    fn piecewise_is_continuous_at_plane() {
        let phi = LyapunovFunction::piecewise_quadratic(
            &[vec![1.0, 0.0], vec![0.0, 3.0]],
            9.0,
            vec![1.0, 0.0],
        )
        .unwrap();
        for x2 in [-2.0, 0.0, 1.0, 5.0] {
            let below = phi.value(&[-1e-13, x2]);
            let above = phi.value(&[1e-13, x2]);
            assert!((below - above).abs() < 1e-10);
        }
        let (c1, c2) = phi.quadratic_bounds().unwrap();
        assert!((c1 - 1.0).abs() < 1e-9);
        assert!((c2 - 10.0).abs() < 1e-9);
    }

    #[test]
    fn lyapunov_equation_solution_certifies_linear_drift() {
        let a = vec![vec![-5.0, -4.0], vec![-1.0, -2.0]];
        let q = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let p = solve_continuous_lyapunov(&a, &q).unwrap();
        // Residual A^T P + P A + Q ~ 0.
        let pm = DenseMat::from_rows(&p).unwrap();
        let am = DenseMat::from_rows(&a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut r = if i == j { 1.0 } else { 0.0 };
                for l in 0..2 {
                    r += am.get(l, i) * pm.get(l, j) + pm.get(i, l) * am.get(l, j);
                }
                assert!(r.abs() < 1e-10, "residual ({i},{j}) = {r}");
            }
        }
        // The quadratic built from P certifies the Hurwitz operator.
        let op = operators::make_hurwitz_linear(&a, vec![0.0, 0.0]).unwrap();
        let phi = LyapunovFunction::weighted_quadratic(&p).unwrap();
        let mut rng = oracle_stream(12);
        let cert = certify_drift(&op, &phi, 1e-3, 10.0, 20_000, &mut rng).unwrap();
        assert!(cert.passes(), "eta_hat = {}", cert.eta_hat);

        // Unstable input rejected.
        assert!(solve_continuous_lyapunov(&[vec![1.0, 0.0], vec![0.0, -1.0]], &q).is_err());
    }

    #[test]
    fn pl_gradient_certifies_with_objective_gap_lyapunov() {
        // Phi = f - f* is the quadratic with matrix Q/2; drift rate 2 c mu.
        let spectrum = vec![1.0, 4.0];
        let step = 0.25;
        let op = operators::make_pl_gradient(
            crate::operators::CurvatureKind::Quadratic,
            spectrum,
            step,
            vec![0.0, 0.0],
        )
        .unwrap();
        let q = op.curvature_matrix().unwrap();
        let half_q: Vec<Vec<f64>> = q
            .iter()
            .map(|row| row.iter().map(|v| 0.5 * v).collect())
            .collect();
        let phi = LyapunovFunction::weighted_quadratic(&half_q).unwrap();
        let mut rng = oracle_stream(21);
        let cert = certify_drift(&op, &phi, 1e-3, 10.0, 20_000, &mut rng).unwrap();
        assert!(cert.passes());
        let (mu, _) = op.curvature_range().unwrap();
        assert!(cert.eta_hat >= 2.0 * step * mu - 1e-6);
    }

    #[test]
    fn certificate_serialises_with_expected_keys() {
        let op = operators::make_contractive_affine(0.5, vec![0.0], None).unwrap();
        let phi = LyapunovFunction::squared_norm(1);
        let mut rng = oracle_stream(30);
        let cert = certify_drift(&op, &phi, 1e-3, 10.0, 100, &mut rng).unwrap();
        let json = serde_json::to_value(&cert).unwrap();
        for key in [
            "eta_hat",
            "L2_hat",
            "c1_hat",
            "c2_hat",
            "violations",
            "samples",
            "region",
        ] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
    }

    #[test]
    fn distance_helpers_are_consistent() {
        // Sanity anchor for the annulus sampler used throughout this module.
        let mut rng = oracle_stream(40);
        let x = crate::numeric::sample_annulus(&mut rng, &[1.0, 1.0], 2.0, 2.0);
        assert!((dist(&x, &[1.0, 1.0]) - 2.0).abs() < 1e-12);
    }
}
