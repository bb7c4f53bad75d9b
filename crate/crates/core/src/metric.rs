//! Finsler metrics on a single coordinate chart.
//!
//! A [`MetricSpec`] is evaluated through [`y_derivatives`], which returns the
//! value of `F` together with its y-gradient, y-Hessian and (optionally) third
//! y-derivatives. Closed forms are used for the Riemannian, Randers, profile
//! and pullback variants; black-box metrics go through central differences
//! with one Richardson level.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FinslerError, Result};
use crate::fiber2d::profile::ProfileField;
use crate::linalg;
use crate::tolerances as tol;

pub type Point = DVector<f64>;
pub type Vector = DVector<f64>;

type MatrixFn = Arc<dyn Fn(&Point) -> DMatrix<f64> + Send + Sync>;
type VectorFn = Arc<dyn Fn(&Point) -> DVector<f64> + Send + Sync>;
type MetricFn = Arc<dyn Fn(&Point, &Vector) -> f64 + Send + Sync>;

/// Matrix-valued field on the chart.
#[derive(Clone)]
pub enum MatrixField {
    Constant(DMatrix<f64>),
    /// `exp(2 <c, x>) * base`
    Conformal { base: DMatrix<f64>, exponent: DVector<f64> },
    Function { dim: usize, f: MatrixFn },
}

impl MatrixField {
    pub fn function<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&Point) -> DMatrix<f64> + Send + Sync + 'static,
    {
        MatrixField::Function { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        match self {
            MatrixField::Constant(m) => m.nrows(),
            MatrixField::Conformal { base, .. } => base.nrows(),
            MatrixField::Function { dim, .. } => *dim,
        }
    }

    pub fn at(&self, x: &Point) -> DMatrix<f64> {
        match self {
            MatrixField::Constant(m) => m.clone(),
            MatrixField::Conformal { base, exponent } => base * (2.0 * exponent.dot(x)).exp(),
            MatrixField::Function { f, .. } => f(x),
        }
    }
}

impl fmt::Debug for MatrixField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixField::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            MatrixField::Conformal { base, exponent } => f
                .debug_struct("Conformal")
                .field("base", base)
                .field("exponent", exponent)
                .finish(),
            MatrixField::Function { dim, .. } => write!(f, "Function(dim = {dim})"),
        }
    }
}

/// One-form field (components `beta_i(x)`).
#[derive(Clone)]
pub enum VectorField {
    Constant(DVector<f64>),
    /// `constant + linear * x`
    Affine { constant: DVector<f64>, linear: DMatrix<f64> },
    /// `exp(<c, x>) * base`
    Exponential { base: DVector<f64>, exponent: DVector<f64> },
    Function { dim: usize, f: VectorFn },
}

impl VectorField {
    pub fn function<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&Point) -> DVector<f64> + Send + Sync + 'static,
    {
        VectorField::Function { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        match self {
            VectorField::Constant(v) => v.len(),
            VectorField::Affine { constant, .. } => constant.len(),
            VectorField::Exponential { base, .. } => base.len(),
            VectorField::Function { dim, .. } => *dim,
        }
    }

    pub fn at(&self, x: &Point) -> DVector<f64> {
        match self {
            VectorField::Constant(v) => v.clone(),
            VectorField::Affine { constant, linear } => constant + linear * x,
            VectorField::Exponential { base, exponent } => base * exponent.dot(x).exp(),
            VectorField::Function { f, .. } => f(x),
        }
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            VectorField::Affine { constant, linear } => f
                .debug_struct("Affine")
                .field("constant", constant)
                .field("linear", linear)
                .finish(),
            VectorField::Exponential { base, exponent } => f
                .debug_struct("Exponential")
                .field("base", base)
                .field("exponent", exponent)
                .finish(),
            VectorField::Function { dim, .. } => write!(f, "Function(dim = {dim})"),
        }
    }
}

/// A positively homogeneous function vetted by [`BlackBox::new`].
#[derive(Clone)]
pub struct BlackBox {
    dim: usize,
    f: MetricFn,
}

impl BlackBox {
    /// Wraps `f` after checking `F(x, l y) = l F(x, y)` on
    /// [`tol::HOMOGENEITY_SAMPLES`] seeded random pairs at `reference`.
    pub fn new<F>(dim: usize, f: F, reference: &Point) -> Result<Self>
    where
        F: Fn(&Point, &Vector) -> f64 + Send + Sync + 'static,
    {
        if reference.len() != dim {
            return Err(FinslerError::DimensionMismatch { expected: dim, got: reference.len() });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f1e1d);
        for _ in 0..tol::HOMOGENEITY_SAMPLES {
            let lambda: f64 = rng.random_range(0.1..10.0);
            let y = loop {
                let y = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
                if y.norm() > 0.1 {
                    break y;
                }
            };
            let v = f(reference, &y);
            let vl = f(reference, &(&y * lambda));
            if !(v > 0.0 && v.is_finite()) {
                return Err(FinslerError::InvalidMetric(format!("non-positive value {v} at y = {y:?}")));
            }
            if (vl - lambda * v).abs() > tol::HOMOGENEITY * lambda * v {
                return Err(FinslerError::InvalidMetric(format!(
                    "not positively 1-homogeneous: F(l y) = {vl}, l F(y) = {}",
                    lambda * v
                )));
            }
        }
        Ok(Self { dim, f: Arc::new(f) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn call(&self, x: &Point, y: &Vector) -> f64 {
        (self.f)(x, y)
    }
}

impl fmt::Debug for BlackBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlackBox(dim = {})", self.dim)
    }
}

/// A Finsler metric on one chart.
#[derive(Debug, Clone)]
pub enum MetricSpec {
    Riemannian(MatrixField),
    Randers { alpha: MatrixField, beta: VectorField },
    /// Two-dimensional metric `F = r f(theta)`.
    FiberProfile2D(ProfileField),
    BlackBox(BlackBox),
    /// `F(x, y) = base(x, M(x) y)`.
    Pullback { base: Box<MetricSpec>, map: MatrixField },
}

impl MetricSpec {
    pub fn euclidean(n: usize) -> Self {
        MetricSpec::Riemannian(MatrixField::Constant(DMatrix::identity(n, n)))
    }

    pub fn riemannian(a: DMatrix<f64>) -> Self {
        MetricSpec::Riemannian(MatrixField::Constant(a))
    }

    pub fn randers(alpha: DMatrix<f64>, beta: DVector<f64>) -> Self {
        MetricSpec::Randers { alpha: MatrixField::Constant(alpha), beta: VectorField::Constant(beta) }
    }

    pub fn profile(p: crate::fiber2d::FiberProfile) -> Self {
        MetricSpec::FiberProfile2D(ProfileField::Constant(p))
    }

    pub fn pullback(base: MetricSpec, map: DMatrix<f64>) -> Self {
        MetricSpec::Pullback { base: Box::new(base), map: MatrixField::Constant(map) }
    }

    pub fn dim(&self) -> usize {
        match self {
            MetricSpec::Riemannian(a) => a.dim(),
            MetricSpec::Randers { alpha, .. } => alpha.dim(),
            MetricSpec::FiberProfile2D(_) => 2,
            MetricSpec::BlackBox(b) => b.dim(),
            MetricSpec::Pullback { map, .. } => map.dim(),
        }
    }

    /// Whether closed-form derivatives are available.
    pub fn is_analytic(&self) -> bool {
        match self {
            MetricSpec::BlackBox(_) => false,
            MetricSpec::Pullback { base, .. } => base.is_analytic(),
            _ => true,
        }
    }

    /// `alpha^{ij} beta_i beta_j < 1` at `x`, for Randers metrics; `true` otherwise.
    pub fn randers_admissible(&self, x: &Point) -> Result<bool> {
        match self {
            MetricSpec::Randers { alpha, beta } => {
                let inv = linalg::inverse(&alpha.at(x))?;
                let b = beta.at(x);
                Ok(linalg::quad_form(&inv, &b) < 1.0)
            }
            _ => Ok(true),
        }
    }
}

/// y-derivatives of `F` at one `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct YJet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    /// `F_{y^i y^j y^k}` stored at `i * n * n + j * n + k`, present when order 3 was requested.
    pub third: Option<Vec<f64>>,
}

impl YJet {
    pub fn third(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.grad.len();
        self.third.as_ref().map_or(f64::NAN, |t| t[(i * n + j) * n + k])
    }
}

fn check_args(spec: &MetricSpec, x: &Point, y: &Vector) -> Result<()> {
    let n = spec.dim();
    if x.len() != n {
        return Err(FinslerError::DimensionMismatch { expected: n, got: x.len() });
    }
    if y.len() != n {
        return Err(FinslerError::DimensionMismatch { expected: n, got: y.len() });
    }
    let norm = y.norm();
    if !(norm > tol::ZERO_VECTOR) {
        return Err(FinslerError::ZeroVector { norm });
    }
    Ok(())
}

/// `F(x, y)`; errors on a zero vector or a non-positive value.
pub fn evaluate(spec: &MetricSpec, x: &Point, y: &Vector) -> Result<f64> {
    check_args(spec, x, y)?;
    let v = raw_value(spec, x, y);
    if !(v > 0.0 && v.is_finite()) {
        return Err(FinslerError::InvalidMetric(format!("F(x, y) = {v} is not positive")));
    }
    Ok(v)
}

fn raw_value(spec: &MetricSpec, x: &Point, y: &Vector) -> f64 {
    match spec {
        MetricSpec::Riemannian(a) => linalg::quad_form(&a.at(x), y).sqrt(),
        MetricSpec::Randers { alpha, beta } => {
            linalg::quad_form(&alpha.at(x), y).sqrt() + beta.at(x).dot(y)
        }
        MetricSpec::FiberProfile2D(p) => {
            let r = y.norm();
            r * p.at(x).eval(y[1].atan2(y[0])).f
        }
        MetricSpec::BlackBox(b) => b.call(x, y),
        MetricSpec::Pullback { base, map } => raw_value(base, x, &(map.at(x) * y)),
    }
}

/// Value and y-derivatives up to `order` (at most 3).
///
/// The value is not checked for positivity here; use [`evaluate`] for that.
pub fn y_derivatives(spec: &MetricSpec, x: &Point, y: &Vector, order: usize) -> Result<YJet> {
    check_args(spec, x, y)?;
    if order > 3 {
        return Err(FinslerError::Precondition(format!("derivative order {order} > 3")));
    }
    jet(spec, x, y, order)
}

fn jet(spec: &MetricSpec, x: &Point, y: &Vector, order: usize) -> Result<YJet> {
    let third = order >= 3;
    match spec {
        MetricSpec::Riemannian(a) => Ok(quadratic_norm_jet(&a.at(x), y, third)),
        MetricSpec::Randers { alpha, beta } => {
            let mut j = quadratic_norm_jet(&alpha.at(x), y, third);
            let b = beta.at(x);
            j.value += b.dot(y);
            j.grad += b;
            Ok(j)
        }
        MetricSpec::FiberProfile2D(p) => Ok(profile_jet(&p.at(x), y, third)),
        MetricSpec::BlackBox(b) => fd_jet(b, x, y, order),
        MetricSpec::Pullback { base, map } => {
            let m = map.at(x);
            let inner = jet(base, x, &(&m * y), order)?;
            Ok(pull_jet(&inner, &m))
        }
    }
}

/// Jet of `sqrt(y^T a y)`.
fn quadratic_norm_jet(a: &DMatrix<f64>, y: &Vector, third: bool) -> YJet {
    let n = y.len();
    let a = linalg::symmetrize(a);
    let ay = &a * y;
    let alpha = y.dot(&ay).sqrt();
    let grad = &ay / alpha;
    let hess = (&a - &grad * grad.transpose()) / alpha;
    let third = third.then(|| {
        let mut t = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    t[(i * n + j) * n + k] = -(hess[(i, j)] * grad[k]
                        + hess[(i, k)] * grad[j]
                        + hess[(j, k)] * grad[i])
                        / alpha;
                }
            }
        }
        t
    });
    YJet { value: alpha, grad, hess, third }
}

/// Jet of `r f(theta)` from the polar chain rule.
fn profile_jet(p: &crate::fiber2d::FiberProfile, y: &Vector, third: bool) -> YJet {
    let r = y.norm();
    let theta = y[1].atan2(y[0]);
    let (s, c) = theta.sin_cos();
    let v = p.eval(theta);
    let e = [c, s];
    let u = [-s, c];
    let h = v.f + v.f_tt;
    let h_t = v.f_t + v.f_ttt;
    let grad = DVector::from_fn(2, |i, _| v.f * e[i] + v.f_t * u[i]);
    let hess = DMatrix::from_fn(2, 2, |i, j| h / r * u[i] * u[j]);
    let third = third.then(|| {
        let mut t = vec![0.0; 8];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    t[(i * 2 + j) * 2 + k] = (h_t * u[i] * u[j] * u[k]
                        - h * (e[k] * u[i] * u[j] + e[i] * u[j] * u[k] + u[i] * e[j] * u[k]))
                        / (r * r);
                }
            }
        }
        t
    });
    YJet { value: r * v.f, grad, hess, third }
}

/// Chain rule for `G(y) = F(M y)`.
fn pull_jet(inner: &YJet, m: &DMatrix<f64>) -> YJet {
    let n = m.ncols();
    let grad = m.transpose() * &inner.grad;
    let hess = m.transpose() * &inner.hess * m;
    let third = inner.third.as_ref().map(|t3| {
        let k = m.nrows();
        let mut out = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let mut s = 0.0;
                    for a in 0..k {
                        for b in 0..k {
                            for c in 0..k {
                                s += t3[(a * k + b) * k + c] * m[(a, i)] * m[(b, j)] * m[(c, l)];
                            }
                        }
                    }
                    out[(i * n + j) * n + l] = s;
                }
            }
        }
        out
    });
    YJet { value: inner.value, grad, hess, third }
}

/// Central differences with one Richardson level: `(4 D(h/2) - D(h)) / 3`.
fn richardson<F: Fn(f64) -> f64>(d: F, h: f64) -> f64 {
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

fn fd_hessian(b: &BlackBox, x: &Point, y: &Vector, h: f64) -> DMatrix<f64> {
    let n = y.len();
    let f = |v: &Vector| b.call(x, v);
    let f0 = f(y);
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let ei = DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
        hess[(i, i)] = richardson(
            |h| (f(&(y + &ei * h)) - 2.0 * f0 + f(&(y - &ei * h))) / (h * h),
            h,
        );
        for j in 0..i {
            let ej = DVector::from_fn(n, |k, _| if k == j { 1.0 } else { 0.0 });
            let v = richardson(
                |h| {
                    (f(&(y + &ei * h + &ej * h)) - f(&(y + &ei * h - &ej * h))
                        - f(&(y - &ei * h + &ej * h))
                        + f(&(y - &ei * h - &ej * h)))
                        / (4.0 * h * h)
                },
                h,
            );
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

fn fd_jet(b: &BlackBox, x: &Point, y: &Vector, order: usize) -> Result<YJet> {
    let n = y.len();
    let norm = y.norm();
    let h1 = tol::FD_Y_STEP * norm;
    if !(h1 > f64::MIN_POSITIVE * 1e10) {
        return Err(FinslerError::StepUnderflow { norm });
    }
    let f = |v: &Vector| b.call(x, v);
    let value = f(y);
    let mut grad = DVector::zeros(n);
    let mut hess = DMatrix::zeros(n, n);
    let mut third = None;
    if order >= 1 {
        for i in 0..n {
            let ei = DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
            grad[i] = richardson(|h| (f(&(y + &ei * h)) - f(&(y - &ei * h))) / (2.0 * h), h1);
        }
    }
    if order >= 2 {
        hess = fd_hessian(b, x, y, tol::FD_Y_STEP_SECOND * norm);
    }
    if order >= 3 {
        let h3 = tol::FD_Y_STEP_THIRD * norm;
        let h2 = tol::FD_Y_STEP_SECOND * norm;
        let mut t = vec![0.0; n * n * n];
        for k in 0..n {
            let ek = DVector::from_fn(n, |m, _| if m == k { 1.0 } else { 0.0 });
            let d = |h: f64| {
                (fd_hessian(b, x, &(y + &ek * h), h2) - fd_hessian(b, x, &(y - &ek * h), h2))
                    / (2.0 * h)
            };
            let dk = (d(0.5 * h3) * 4.0 - d(h3)) / 3.0;
            for i in 0..n {
                for j in 0..n {
                    t[(i * n + j) * n + k] = dk[(i, j)];
                }
            }
        }
        // symmetrize over all index permutations
        let mut s = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let at = |a: usize, b: usize, c: usize| t[(a * n + b) * n + c];
                    s[(i * n + j) * n + k] = (at(i, j, k)
                        + at(i, k, j)
                        + at(j, i, k)
                        + at(j, k, i)
                        + at(k, i, j)
                        + at(k, j, i))
                        / 6.0;
                }
            }
        }
        third = Some(s);
    }
    Ok(YJet { value, grad, hess, third })
}

/// `g_ij = (1/2) d^2 F^2 / dy^i dy^j` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalTensor {
    pub g: DMatrix<f64>,
    /// `E = F^2 / 2`
    pub energy: f64,
    pub strictly_convex: bool,
    pub min_eigenvalue: f64,
}

impl FundamentalTensor {
    fn from_jet(j: &YJet) -> Self {
        let g = linalg::symmetrize(&(&j.grad * j.grad.transpose() + &j.hess * j.value));
        let strictly_convex = j.value > 0.0 && linalg::is_spd(&g, tol::SPD);
        let (min_eigenvalue, _) = linalg::min_eigen(&g);
        Self { energy: 0.5 * j.value * j.value, g, strictly_convex, min_eigenvalue }
    }
}

/// Fundamental tensor at `(x, y)`. A non-positive-definite result is reported
/// through `strictly_convex`, not as an error.
pub fn fundamental_tensor(spec: &MetricSpec, x: &Point, y: &Vector) -> Result<FundamentalTensor> {
    let j = y_derivatives(spec, x, y, 2)?;
    Ok(FundamentalTensor::from_jet(&j))
}

/// Scalar convexity data for 2D metrics on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarConvexity {
    pub min_f: f64,
    /// minimum of `f + f_tt` over the grid
    pub min_curvature_sum: f64,
    /// `min_f > 0 && min_curvature_sum > 0`
    pub convex: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub strictly_convex: bool,
    pub worst_eigenvalue: f64,
    pub worst_direction: Vector,
    pub scalar: Option<ScalarConvexity>,
    /// `true` when the matrix and scalar criteria agree (always `true` outside 2D).
    pub criteria_agree: bool,
}

/// Unit directions `(cos t, sin t)` at `count` equispaced angles.
pub fn theta_directions(count: usize) -> Vec<Vector> {
    (0..count)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / count as f64;
            DVector::from_vec(vec![t.cos(), t.sin()])
        })
        .collect()
}

/// Scans the fundamental tensor over `directions`. The metric is strictly
/// convex on the grid iff `F > 0` and `g` is positive definite at every
/// direction. In 2D the scalar criterion `f > 0, f + f_tt > 0` is evaluated
/// on the same grid (with `f + f_tt = r tr(F_yy)`).
pub fn convexity_scan(spec: &MetricSpec, x: &Point, directions: &[Vector]) -> Result<ConvexityReport> {
    if directions.is_empty() {
        return Err(FinslerError::Precondition("empty direction grid".into()));
    }
    let two_d = spec.dim() == 2;
    let mut strictly_convex = true;
    let mut worst = (f64::INFINITY, directions[0].clone());
    let (mut min_f, mut min_h) = (f64::INFINITY, f64::INFINITY);
    for y in directions {
        let j = y_derivatives(spec, x, y, 2)?;
        let t = FundamentalTensor::from_jet(&j);
        strictly_convex &= t.strictly_convex;
        let score = if j.value > 0.0 { t.min_eigenvalue } else { j.value.min(t.min_eigenvalue) };
        if score < worst.0 {
            worst = (score, y.clone());
        }
        if two_d {
            let r = y.norm();
            min_f = min_f.min(j.value / r);
            min_h = min_h.min(r * j.hess.trace());
        }
    }
    let scalar = two_d.then_some(ScalarConvexity {
        min_f,
        min_curvature_sum: min_h,
        convex: min_f > 0.0 && min_h > 0.0,
    });
    let criteria_agree = scalar.as_ref().is_none_or(|s| s.convex == strictly_convex);
    Ok(ConvexityReport {
        strictly_convex,
        worst_eigenvalue: worst.0,
        worst_direction: worst.1,
        scalar,
        criteria_agree,
    })
}

/// x-derivatives of the energy: `E_{x^j}` and `E_{x^l y^j}` (row `l`, column `j`),
/// by central differences with step [`tol::FD_X_STEP`] and one Richardson level.
pub fn energy_x_derivatives(spec: &MetricSpec, x: &Point, y: &Vector) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_args(spec, x, y)?;
    let n = x.len();
    let mut e_x = DVector::zeros(n);
    let mut e_xy = DMatrix::zeros(n, n);
    let energy = |xp: &Point| -> Result<(f64, DVector<f64>)> {
        let j = jet(spec, xp, y, 1)?;
        Ok((0.5 * j.value * j.value, &j.grad * j.value))
    };
    for l in 0..n {
        let el = DVector::from_fn(n, |k, _| if k == l { 1.0 } else { 0.0 });
        let diff = |h: f64| -> Result<(f64, DVector<f64>)> {
            let (ep, gp) = energy(&(x + &el * h))?;
            let (em, gm) = energy(&(x - &el * h))?;
            Ok(((ep - em) / (2.0 * h), (gp - gm) / (2.0 * h)))
        };
        let h = tol::FD_X_STEP;
        let (a_full, g_full) = diff(h)?;
        let (a_half, g_half) = diff(0.5 * h)?;
        e_x[l] = (4.0 * a_half - a_full) / 3.0;
        let row = (g_half * 4.0 - g_full) / 3.0;
        for j in 0..n {
            e_xy[(l, j)] = row[j];
        }
    }
    Ok((e_x, e_xy))
}

/// Largest relative homogeneity defect `|F(l y) - l F(y)| / (l F(y))` over the samples.
pub fn homogeneity_defect(spec: &MetricSpec, x: &Point, samples: &[(f64, Vector)]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (lambda, y) in samples {
        let v = evaluate(spec, x, y)?;
        let vl = evaluate(spec, x, &(y * *lambda))?;
        worst = worst.max((vl - lambda * v).abs() / (lambda * v));
    }
    Ok(worst)
}
