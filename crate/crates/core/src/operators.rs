//! The operator zoo: fixed-point maps `H : R^d -> R^d` with known structure.
//!
//! Each constructor records what the downstream diagnostics need — the fixed
//! point (or affine solution set), a Lipschitz constant, and for gradient
//! maps the curvature range `(mu, L)` backing the PL inequality. Evaluation
//! is a pure function; operators are immutable and freely shared across
//! threads.

use crate::linalg::DenseMat;
use crate::numeric::{dist, dot, norm};
use crate::{Error, Result};

/// Structural family of an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ContractiveAffine,
    HurwitzLinear,
    SelectorControl,
    PlGradient,
    Nonexpansive,
    ConstantMean,
}

/// Curvature kind for gradient operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureKind {
    /// `Q = diag(spectrum)`.
    Quadratic,
    /// `Q = R^T diag(spectrum) R` for a fixed rotation `R` (Givens product
    /// with angle pi/6 over adjacent coordinate pairs).
    RotatedQuadratic,
}

/// An affine subspace `{point + span(directions)}` with an orthonormal basis,
/// describing a non-unique solution set.
#[derive(Debug, Clone)]
pub struct AffineSubspace {
    pub point: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl AffineSubspace {
    /// Euclidean distance from `x` to the subspace (closed form via the
    /// orthonormal basis).
    pub fn distance(&self, x: &[f64]) -> f64 {
        let mut residual: Vec<f64> = x.iter().zip(&self.point).map(|(a, b)| a - b).collect();
        for d in &self.directions {
            let c = dot(&residual, d);
            for (r, di) in residual.iter_mut().zip(d) {
                *r -= c * di;
            }
        }
        norm(&residual)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    /// `H(x) = gamma (x - target) + target`.
    ContractiveAffine { gamma: f64, target: Vec<f64> },
    /// `H(x) = (A + I) x + b`.
    HurwitzLinear { a: DenseMat, b: Vec<f64> },
    /// `H(x) = x + A x + B min(k1.x, k2.x)` with the fixed constants below.
    SelectorControl {
        a: DenseMat,
        b: [f64; 2],
        k1: [f64; 2],
        k2: [f64; 2],
    },
    /// `H(x) = x - step * Q (x - center)`; `f(x) = 1/2 (x-c)^T Q (x-c)`.
    PlGradient {
        q: DenseMat,
        step: f64,
        center: Vec<f64>,
        mu: f64,
        l_smooth: f64,
    },
    /// `H(x) = x - eta * Q x` for PSD `Q = diag(spectrum)` with a kernel.
    Nonexpansive { spectrum: Vec<f64>, eta: f64 },
    /// `H(x) = mu` for all x.
    ConstantMean { mu: f64 },
}

/// A fixed-point map with structural metadata.
#[derive(Debug, Clone)]
pub struct Operator {
    dim: usize,
    family: Family,
    kind: Kind,
    fixed_point: Option<Vec<f64>>,
    lipschitz: Option<f64>,
    solution_set: Option<AffineSubspace>,
}

impl Operator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn fixed_point(&self) -> Option<&[f64]> {
        self.fixed_point.as_deref()
    }

    /// Lipschitz constant of `H`, where declared.
    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    /// Solution-set description for operators without a unique fixed point.
    pub fn solution_set(&self) -> Option<&AffineSubspace> {
        self.solution_set.as_ref()
    }

    /// Distance from `x` to the fixed point, or to the solution set when the
    /// fixed point is not unique. `None` if neither is known.
    pub fn distance_to_solution(&self, x: &[f64]) -> Option<f64> {
        if let Some(fp) = &self.fixed_point {
            return Some(dist(x, fp));
        }
        self.solution_set.as_ref().map(|s| s.distance(x))
    }

    /// `(mu, L)` of the PL/smoothness certificate for gradient operators.
    pub fn curvature_range(&self) -> Option<(f64, f64)> {
        match &self.kind {
            Kind::PlGradient { mu, l_smooth, .. } => Some((*mu, *l_smooth)),
            Kind::Nonexpansive { spectrum, .. } => {
                let l = spectrum.iter().copied().fold(0.0, f64::max);
                Some((0.0, l))
            }
            _ => None,
        }
    }

    /// Curvature matrix `Q` of the underlying quadratic, for gradient-type
    /// operators (`f(x) = 1/2 (x - x*)^T Q (x - x*)`).
    pub fn curvature_matrix(&self) -> Option<Vec<Vec<f64>>> {
        match &self.kind {
            Kind::PlGradient { q, .. } => Some(q.to_rows()),
            Kind::Nonexpansive { spectrum, .. } => Some(DenseMat::diagonal(spectrum).to_rows()),
            _ => None,
        }
    }

    /// The drift matrix `A` of a Hurwitz linear operator.
    pub fn linear_drift_matrix(&self) -> Option<Vec<Vec<f64>>> {
        match &self.kind {
            Kind::HurwitzLinear { a, .. } => Some(a.to_rows()),
            _ => None,
        }
    }

    /// The selector system's branch matrices `(A1, A2) = (A + B k1^T, A)`.
    pub fn selector_branches(&self) -> Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        match &self.kind {
            Kind::SelectorControl { a, b, k1, .. } => {
                let mut a1 = a.clone();
                for i in 0..2 {
                    for j in 0..2 {
                        a1.set(i, j, a.get(i, j) + b[i] * k1[j]);
                    }
                }
                Some((a1.to_rows(), a.to_rows()))
            }
            _ => None,
        }
    }

    /// `H(x) - x`, written into `out` without allocating.
    pub fn drift_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            Kind::ContractiveAffine { gamma, target } => {
                // H(x) - x = (gamma - 1)(x - target)
                for i in 0..self.dim {
                    out[i] = (gamma - 1.0) * (x[i] - target[i]);
                }
            }
            Kind::HurwitzLinear { a, b } => {
                a.matvec_into(x, out);
                for i in 0..self.dim {
                    out[i] += b[i];
                }
            }
            Kind::SelectorControl { a, b, k1, k2 } => {
                let selector = (k1[0] * x[0] + k1[1] * x[1]).min(k2[0] * x[0] + k2[1] * x[1]);
                a.matvec_into(x, out);
                out[0] += b[0] * selector;
                out[1] += b[1] * selector;
            }
            Kind::PlGradient { q, step, center, .. } => {
                let v: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
                q.matvec_into(&v, out);
                for o in out.iter_mut() {
                    *o *= -step;
                }
            }
            Kind::Nonexpansive { spectrum, eta } => {
                for i in 0..self.dim {
                    out[i] = -eta * spectrum[i] * x[i];
                }
            }
            Kind::ConstantMean { mu } => {
                out[0] = mu - x[0];
            }
        }
    }

    /// `H(x) - x`.
    pub fn drift(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.drift_into(x, &mut out);
        out
    }

    /// `H(x)`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.drift_into(x, &mut out);
        for (o, xi) in out.iter_mut().zip(x) {
            *o += xi;
        }
        out
    }

    fn check_fixed_point(&self) -> Result<()> {
        if let Some(fp) = &self.fixed_point {
            let residual = dist(&self.eval(fp), fp);
            let bound = 1e-12 * (1.0 + norm(fp));
            if residual > bound {
                return Err(Error::invalid(format!(
                    "fixed-point residual {residual:.3e} exceeds {bound:.3e}"
                )));
            }
        }
        Ok(())
    }
}

/// `H(x) = gamma (x - target) + target`: a gamma-contraction in every
/// weighted Euclidean norm, with exact fixed point `target` and exact
/// Lipschitz constant `gamma`.
///
/// `weights`, when given, are the diagonal of the norm weighting used by
/// downstream quadratic Lyapunov candidates; they must be strictly positive
/// and do not change the map itself.
pub fn make_contractive_affine(
    gamma: f64,
    target: Vec<f64>,
    weights: Option<Vec<f64>>,
) -> Result<Operator> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::invalid(format!(
            "contraction factor must be in [0, 1), got {gamma}"
        )));
    }
    let dim = target.len();
    if dim == 0 {
        return Err(Error::invalid("target must be non-empty"));
    }
    if let Some(w) = &weights {
        if w.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: w.len(),
            });
        }
        if w.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::invalid("norm weights must be strictly positive"));
        }
    }
    let op = Operator {
        dim,
        family: Family::ContractiveAffine,
        fixed_point: Some(target.clone()),
        lipschitz: Some(gamma),
        solution_set: None,
        kind: Kind::ContractiveAffine { gamma, target },
    };
    op.check_fixed_point()?;
    Ok(op)
}

/// `H(x) = (A + I) x + b` for Hurwitz `A` (all eigenvalue real parts below
/// -1e-9, checked numerically). The fixed point is `-A^{-1} b`.
pub fn make_hurwitz_linear(a_rows: &[Vec<f64>], b: Vec<f64>) -> Result<Operator> {
    let a = DenseMat::from_rows(a_rows)?;
    let dim = a.dim;
    if b.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: b.len(),
        });
    }
    let max_re = a.max_eigenvalue_real_part();
    if max_re >= -1e-9 {
        return Err(Error::NotHurwitz {
            max_real_part: max_re,
        });
    }
    let neg_b: Vec<f64> = b.iter().map(|v| -v).collect();
    let fixed_point = a.solve(&neg_b).map_err(|_| Error::SingularMatrix {
        context: "hurwitz fixed point",
    })?;
    // Lipschitz constant of H is the spectral norm of A + I.
    let mut a_plus_i = a.clone();
    for i in 0..dim {
        a_plus_i.set(i, i, a_plus_i.get(i, i) + 1.0);
    }
    let op = Operator {
        dim,
        family: Family::HurwitzLinear,
        fixed_point: Some(fixed_point),
        lipschitz: Some(a_plus_i.spectral_norm()),
        solution_set: None,
        kind: Kind::HurwitzLinear { a, b },
    };
    op.check_fixed_point()?;
    Ok(op)
}

/// The piecewise-linear selector control system with the fixed constants
/// `A = [[-5,-4],[-1,-2]]`, `B = [-3,-21]`, `k1 = [1,0]`, `k2 = [0,0]`:
/// `H(x) = x + A x + B min(k1.x, k2.x)`. The drift is `A1 x = (A + B k1^T) x`
/// on `k1.x <= 0` and `A2 x = A x` elsewhere; the origin is the fixed point.
pub fn make_selector_control() -> Operator {
    let a = DenseMat::from_rows(&[vec![-5.0, -4.0], vec![-1.0, -2.0]]).expect("fixed constants");
    let b = [-3.0, -21.0];
    let k1 = [1.0, 0.0];
    let k2 = [0.0, 0.0];
    // Globally Lipschitz with constant max(||I+A1||, ||I+A2||): the drift is
    // continuous and piecewise linear.
    let a1 = DenseMat::from_rows(&[vec![-8.0, -4.0], vec![-22.0, -2.0]]).expect("fixed constants");
    let mut h1 = a1.clone();
    let mut h2 = a.clone();
    for i in 0..2 {
        h1.set(i, i, h1.get(i, i) + 1.0);
        h2.set(i, i, h2.get(i, i) + 1.0);
    }
    let lip = h1.spectral_norm().max(h2.spectral_norm());
    Operator {
        dim: 2,
        family: Family::SelectorControl,
        fixed_point: Some(vec![0.0, 0.0]),
        lipschitz: Some(lip),
        solution_set: None,
        kind: Kind::SelectorControl { a, b, k1, k2 },
    }
}

fn rotation_matrix(dim: usize) -> DenseMat {
    // Product of Givens rotations over adjacent pairs, fixed angle pi/6.
    let theta = std::f64::consts::PI / 6.0;
    let (c, s) = (theta.cos(), theta.sin());
    let mut r = DenseMat::identity(dim);
    for k in 0..dim.saturating_sub(1) {
        let mut g = DenseMat::identity(dim);
        g.set(k, k, c);
        g.set(k + 1, k + 1, c);
        g.set(k, k + 1, -s);
        g.set(k + 1, k, s);
        // r = g * r
        let mut out = DenseMat::identity(dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = 0.0;
                for l in 0..dim {
                    acc += g.get(i, l) * r.get(l, j);
                }
                out.set(i, j, acc);
            }
        }
        r = out;
    }
    r
}

/// Gradient step `H(x) = x - step * grad f(x)` for the quadratic
/// `f(x) = 1/2 (x - center)^T Q (x - center)` with spectrum in `[mu, L]`.
/// Satisfies the PL inequality with the recorded `mu`; rejects
/// `step >= 2 / L`.
pub fn make_pl_gradient(
    kind: CurvatureKind,
    spectrum: Vec<f64>,
    step: f64,
    center: Vec<f64>,
) -> Result<Operator> {
    let dim = spectrum.len();
    if dim == 0 {
        return Err(Error::invalid("spectrum must be non-empty"));
    }
    if center.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: center.len(),
        });
    }
    let mu = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
    let l_smooth = spectrum.iter().copied().fold(0.0, f64::max);
    if !(mu > 0.0) {
        return Err(Error::invalid(format!(
            "curvature eigenvalues must be positive, min is {mu}"
        )));
    }
    if !(step > 0.0 && step < 2.0 / l_smooth) {
        return Err(Error::invalid(format!(
            "gradient step must lie in (0, 2/L) = (0, {}), got {step}",
            2.0 / l_smooth
        )));
    }
    let q = match kind {
        CurvatureKind::Quadratic => DenseMat::diagonal(&spectrum),
        CurvatureKind::RotatedQuadratic => {
            let r = rotation_matrix(dim);
            let d = DenseMat::diagonal(&spectrum);
            // Q = R^T D R
            let mut dr = DenseMat::identity(dim);
            for i in 0..dim {
                for j in 0..dim {
                    let mut acc = 0.0;
                    for l in 0..dim {
                        acc += d.get(i, l) * r.get(l, j);
                    }
                    dr.set(i, j, acc);
                }
            }
            let mut q = DenseMat::identity(dim);
            for i in 0..dim {
                for j in 0..dim {
                    let mut acc = 0.0;
                    for l in 0..dim {
                        acc += r.get(l, i) * dr.get(l, j);
                    }
                    q.set(i, j, acc);
                }
            }
            q
        }
    };
    let lip = spectrum
        .iter()
        .map(|l| (1.0 - step * l).abs())
        .fold(0.0, f64::max);
    let op = Operator {
        dim,
        family: Family::PlGradient,
        fixed_point: Some(center.clone()),
        lipschitz: Some(lip),
        solution_set: None,
        kind: Kind::PlGradient {
            q,
            step,
            center,
            mu,
            l_smooth,
        },
    };
    op.check_fixed_point()?;
    Ok(op)
}

/// Nonexpansive gradient step `H(x) = x - eta * Q x` for the PSD quadratic
/// `Q = diag(spectrum)` with a nontrivial kernel, `eta` in `(0, 2/L)`.
/// The solution set is the kernel — an affine subspace, not a point.
pub fn make_nonexpansive(spectrum: Vec<f64>, eta: f64) -> Result<Operator> {
    let dim = spectrum.len();
    if dim == 0 {
        return Err(Error::invalid("spectrum must be non-empty"));
    }
    if spectrum.iter().any(|l| *l < 0.0) {
        return Err(Error::invalid("spectrum must be positive semidefinite"));
    }
    let l_smooth = spectrum.iter().copied().fold(0.0, f64::max);
    if !(l_smooth > 0.0) {
        return Err(Error::invalid("spectrum must have a positive eigenvalue"));
    }
    if spectrum.iter().all(|l| *l > 0.0) {
        return Err(Error::invalid(
            "nonexpansive scenario requires a nontrivial kernel (a zero eigenvalue)",
        ));
    }
    if !(eta > 0.0 && eta < 2.0 / l_smooth) {
        return Err(Error::invalid(format!(
            "eta must lie in (0, 2/L) = (0, {}), got {eta}",
            2.0 / l_smooth
        )));
    }
    let directions: Vec<Vec<f64>> = spectrum
        .iter()
        .enumerate()
        .filter(|(_, l)| **l == 0.0)
        .map(|(i, _)| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect();
    let lip = spectrum
        .iter()
        .map(|l| (1.0 - eta * l).abs())
        .fold(0.0, f64::max);
    Ok(Operator {
        dim,
        family: Family::Nonexpansive,
        fixed_point: None,
        lipschitz: Some(lip),
        solution_set: Some(AffineSubspace {
            point: vec![0.0; dim],
            directions,
        }),
        kind: Kind::Nonexpansive { spectrum, eta },
    })
}

/// The constant map `H(x) = mu` (scalar), whose recursion is the weighted
/// running mean. Lipschitz constant 0, fixed point `mu`.
pub fn make_constant_mean(mu: f64) -> Operator {
    Operator {
        dim: 1,
        family: Family::ConstantMean,
        fixed_point: Some(vec![mu]),
        lipschitz: Some(0.0),
        solution_set: None,
        kind: Kind::ConstantMean { mu },
    }
}

/// PL inequality margin `||grad f(x)||^2 / 2 - mu (f(x) - f*)` for gradient
/// operators; nonnegative where the PL condition holds.
pub fn pl_margin(op: &Operator, x: &[f64]) -> Option<f64> {
    let Kind::PlGradient { q, center, mu, .. } = &op.kind else {
        return None;
    };
    let v: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
    let qv = q.matvec(&v);
    let grad_sq = dot(&qv, &qv);
    let f_gap = 0.5 * dot(&v, &qv);
    Some(0.5 * grad_sq - mu * f_gap)
}
