//! Randers metrics `alpha + beta`: the closedness and constant-length
//! criteria, Zermelo navigation data `(h, W)`, and linear equivalence of
//! shifted ellipsoids, which decides whether two tangent spaces are isometric.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::linalg;
use crate::metric::{BlackBox, MatrixField, MetricSpec, Point, Vector, VectorField};
use crate::tolerances as tol;

/// Uniform grid on an axis-aligned box, `steps` points per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub steps: usize,
}

impl Region {
    pub fn square(half_width: f64, steps: usize) -> Self {
        Self { lo: vec![-half_width; 2], hi: vec![half_width; 2], steps }
    }

    pub fn points(&self) -> Vec<Point> {
        let n = self.lo.len();
        let m = self.steps.max(1);
        let mut out = Vec::with_capacity(m.pow(n as u32));
        let mut idx = vec![0usize; n];
        loop {
            out.push(DVector::from_fn(n, |i, _| {
                if m == 1 {
                    0.5 * (self.lo[i] + self.hi[i])
                } else {
                    self.lo[i] + (self.hi[i] - self.lo[i]) * idx[i] as f64 / (m - 1) as f64
                }
            }));
            let mut axis = 0;
            while axis < n {
                idx[axis] += 1;
                if idx[axis] < m {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
            if axis == n {
                return out;
            }
        }
    }
}

/// Unit vectors: equispaced angles in 2D, seeded samples otherwise.
pub fn sphere_directions(n: usize, count: usize) -> Vec<Vector> {
    if n == 2 {
        return crate::metric::theta_directions(count);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 0.1 && norm <= 1.0 {
            out.push(v / norm);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedCheck {
    pub closed: bool,
    /// `max |d_i beta_j - d_j beta_i|` over the grid
    pub max_curl: f64,
}

/// `beta` is closed iff its exterior derivative vanishes on the sampled region.
pub fn randers_closed_check(beta: &VectorField, region: &Region) -> ClosedCheck {
    let n = beta.dim();
    let h = tol::FD_X_STEP;
    let mut max_curl = 0.0_f64;
    for x in region.points() {
        let grads: Vec<DVector<f64>> = (0..n)
            .map(|i| {
                let mut e = DVector::zeros(n);
                e[i] = h;
                (beta.at(&(&x + &e)) - beta.at(&(&x - &e))) / (2.0 * h)
            })
            .collect();
        for (i, gi) in grads.iter().enumerate() {
            for (j, gj) in grads.iter().enumerate().skip(i + 1) {
                max_curl = max_curl.max((gi[j] - gj[i]).abs());
            }
        }
    }
    ClosedCheck { closed: max_curl <= 1e-6, max_curl }
}

/// `alpha^{ij} beta_i beta_j`, the squared `alpha`-length of `beta`.
pub fn randers_invariant(alpha: &DMatrix<f64>, beta: &DVector<f64>) -> Result<f64> {
    if !linalg::is_spd(alpha, tol::SPD) {
        return Err(FinslerError::InvalidMetric("alpha is not positive definite".into()));
    }
    let inv = linalg::inverse(alpha)?;
    Ok(linalg::quad_form(&inv, beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstancyCheck {
    pub constant: bool,
    pub spread: f64,
    pub min: f64,
    pub max: f64,
}

/// Whether the `alpha`-length of `beta` is constant on the region.
pub fn randers_gb_check(alpha: &MatrixField, beta: &VectorField, region: &Region) -> Result<ConstancyCheck> {
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in region.points() {
        let v = randers_invariant(&alpha.at(&x), &beta.at(&x))?;
        min = min.min(v);
        max = max.max(v);
    }
    let spread = max - min;
    Ok(ConstancyCheck { constant: spread <= tol::CONSTANT_LENGTH * (1.0 + max.abs()), spread, min, max })
}

/// Riemannian metric `h` and wind `W`; unit balls of the induced metric are
/// the `h`-unit balls shifted by `W`.
#[derive(Debug, Clone)]
pub struct NavigationData {
    pub h: MatrixField,
    pub w: VectorField,
}

impl NavigationData {
    pub fn constant(h: DMatrix<f64>, w: DVector<f64>) -> Self {
        Self { h: MatrixField::Constant(h), w: VectorField::Constant(w) }
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    /// `h(W, W)`.
    pub fn invariant(&self, x: &Point) -> f64 {
        linalg::quad_form(&self.h.at(x), &self.w.at(x))
    }
}

/// The unique `F > 0` with `h(y/F - W, y/F - W) = 1`.
pub fn metric_from_navigation(nav: &NavigationData, x: &Point, y: &Vector) -> Result<f64> {
    let h = nav.h.at(x);
    let w = nav.w.at(x);
    if y.len() != h.nrows() || w.len() != h.nrows() {
        return Err(FinslerError::DimensionMismatch { expected: h.nrows(), got: y.len() });
    }
    if !linalg::is_spd(&h, tol::SPD) {
        return Err(FinslerError::InvalidMetric("h is not positive definite".into()));
    }
    let ww = linalg::quad_form(&h, &w);
    if ww >= 1.0 {
        return Err(FinslerError::InvalidMetric(format!("h(W, W) = {ww} must be below 1")));
    }
    let yy = linalg::quad_form(&h, y);
    if yy.sqrt() <= tol::ZERO_VECTOR {
        return Err(FinslerError::ZeroVector { norm: yy.sqrt() });
    }
    let yw = (y.transpose() * &h * &w)[(0, 0)];
    // positive root of u^2 h(y,y) - 2u h(y,W) + h(W,W) - 1 = 0 in u = 1/F, inverted stably
    Ok(yy / (yw + (yw * yw + yy * (1.0 - ww)).sqrt()))
}

/// The navigation metric as a [`MetricSpec`] (evaluated through [`metric_from_navigation`]).
pub fn navigation_metric(nav: &NavigationData, reference: &Point) -> Result<MetricSpec> {
    let n = nav.dim();
    for x in [reference] {
        if nav.invariant(x) >= 1.0 {
            return Err(FinslerError::InvalidMetric("h(W, W) must be below 1".into()));
        }
    }
    let nav = nav.clone();
    Ok(MetricSpec::BlackBox(BlackBox::new(
        n,
        move |x, y| metric_from_navigation(&nav, x, y).unwrap_or(f64::NAN),
        reference,
    )?))
}

/// `alpha + beta` recovered from samples of `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandersFit {
    pub alpha: DMatrix<f64>,
    pub beta: DVector<f64>,
    /// max `|F - alpha - beta|` over the samples
    pub residual: f64,
}

/// Fits `alpha^2 = y^T A y` to `(F(y) + F(-y))/2` and `beta` to `(F(y) - F(-y))/2`
/// by least squares over `samples` directions.
pub fn randers_from_samples<F>(f: F, n: usize, samples: usize) -> Result<RandersFit>
where
    F: Fn(&Vector) -> Result<f64>,
{
    let dirs = sphere_directions(n, samples.max(n * (n + 1)));
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let m = dirs.len();
    let mut qa = DMatrix::zeros(m, pairs.len());
    let mut qb = DMatrix::zeros(m, n);
    let mut ra = DVector::zeros(m);
    let mut rb = DVector::zeros(m);
    let mut vals = Vec::with_capacity(m);
    for (r, y) in dirs.iter().enumerate() {
        let (fp, fm) = (f(y)?, f(&-y)?);
        vals.push(fp);
        let a = 0.5 * (fp + fm);
        ra[r] = a * a;
        rb[r] = 0.5 * (fp - fm);
        for (c, &(i, j)) in pairs.iter().enumerate() {
            qa[(r, c)] = if i == j { y[i] * y[i] } else { 2.0 * y[i] * y[j] };
        }
        for i in 0..n {
            qb[(r, i)] = y[i];
        }
    }
    let solve = |a: DMatrix<f64>, b: DVector<f64>| -> Result<DVector<f64>> {
        a.svd(true, true).solve(&b, 1e-14).map_err(|e| FinslerError::Singular(e.to_string()))
    };
    let sa = solve(qa, ra)?;
    let beta = solve(qb, rb)?;
    let mut alpha = DMatrix::zeros(n, n);
    for (c, &(i, j)) in pairs.iter().enumerate() {
        alpha[(i, j)] = sa[c];
        alpha[(j, i)] = sa[c];
    }
    let residual = dirs
        .iter()
        .zip(&vals)
        .map(|(y, v)| (v - linalg::quad_form(&alpha, y).max(0.0).sqrt() - beta.dot(y)).abs())
        .fold(0.0_f64, f64::max);
    Ok(RandersFit { alpha, beta, residual })
}

/// Randers form of the navigation metric at `x`, by sampling.
pub fn randers_from_navigation(nav: &NavigationData, x: &Point) -> Result<RandersFit> {
    randers_from_samples(|y| metric_from_navigation(nav, x, y), nav.dim(), 64)
}

/// `{y + v : Q(y, y) = 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedEllipsoid {
    pub q: DMatrix<f64>,
    pub v: DVector<f64>,
}

impl ShiftedEllipsoid {
    pub fn new(q: DMatrix<f64>, v: DVector<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() != v.len() {
            return Err(FinslerError::DimensionMismatch { expected: q.nrows(), got: v.len() });
        }
        if !linalg::is_spd(&q, tol::SPD) {
            return Err(FinslerError::InvalidMetric("Q is not positive definite".into()));
        }
        Ok(Self { q, v })
    }

    /// `Q(v, v)`, the only linear invariant.
    pub fn invariant(&self) -> f64 {
        linalg::quad_form(&self.q, &self.v)
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// `count` boundary points.
    pub fn boundary(&self, count: usize) -> Result<Vec<Vector>> {
        let s_inv = linalg::spd_inv_sqrt(&self.q)?;
        Ok(sphere_directions(self.dim(), count).iter().map(|u| &s_inv * u + &self.v).collect())
    }

    /// `|sqrt(Q(p - v, p - v)) - 1|`.
    pub fn deviation(&self, p: &Vector) -> f64 {
        (linalg::quad_form(&self.q, &(p - &self.v)).sqrt() - 1.0).abs()
    }

    /// Map to the unit sphere shifted by `sqrt(Q(v, v)) e1`: whiten, then rotate the center.
    fn to_standard(&self) -> Result<DMatrix<f64>> {
        let s = linalg::spd_sqrt(&self.q)?;
        let w = &s * &self.v;
        Ok(linalg::align_to_first_axis(&w) * s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidMap {
    pub l: DMatrix<f64>,
    /// max deviation of the mapped boundary samples from the target
    pub max_deviation: f64,
}

/// A linear `L` with `L(e1) = e2`, which exists iff `Q(v, v)` agree.
pub fn ellipsoid_equivalence(e1: &ShiftedEllipsoid, e2: &ShiftedEllipsoid) -> Result<Option<EllipsoidMap>> {
    if e1.dim() != e2.dim() {
        return Err(FinslerError::DimensionMismatch { expected: e1.dim(), got: e2.dim() });
    }
    let (i1, i2) = (e1.invariant(), e2.invariant());
    if (i1 - i2).abs() > tol::INVARIANT_MATCH * (1.0 + i1.abs().max(i2.abs())) {
        return Ok(None);
    }
    let m1 = e1.to_standard()?;
    let m2 = e2.to_standard()?;
    let l = linalg::inverse(&m2)? * m1;
    let max_deviation = e1
        .boundary(64)?
        .iter()
        .map(|p| e2.deviation(&(&l * p)))
        .fold(0.0_f64, f64::max);
    if max_deviation > tol::BOUNDARY_DEVIATION {
        return Ok(None);
    }
    Ok(Some(EllipsoidMap { l, max_deviation }))
}

/// Fits `{y : h(y - W, y - W) = 1}` to `samples` indicatrix points of `f` by
/// least squares on `y^T Q y + l . y = 1`.
pub fn indicatrix_fit<F>(f: F, n: usize, samples: usize) -> Result<(ShiftedEllipsoid, f64)>
where
    F: Fn(&Vector) -> Result<f64>,
{
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let dirs = sphere_directions(n, samples.max(2 * (pairs.len() + n)));
    let pts = dirs.iter().map(|y| Ok(y / f(y)?)).collect::<Result<Vec<Vector>>>()?;
    let cols = pairs.len() + n;
    let mut a = DMatrix::zeros(pts.len(), cols);
    for (r, p) in pts.iter().enumerate() {
        for (c, &(i, j)) in pairs.iter().enumerate() {
            a[(r, c)] = if i == j { p[i] * p[i] } else { 2.0 * p[i] * p[j] };
        }
        for i in 0..n {
            a[(r, pairs.len() + i)] = p[i];
        }
    }
    let sol = a
        .svd(true, true)
        .solve(&DVector::from_element(pts.len(), 1.0), 1e-14)
        .map_err(|e| FinslerError::Singular(e.to_string()))?;
    let mut q = DMatrix::zeros(n, n);
    for (c, &(i, j)) in pairs.iter().enumerate() {
        q[(i, j)] = sol[c];
        q[(j, i)] = sol[c];
    }
    let lin = sol.rows(pairs.len(), n).into_owned();
    let w = -0.5 * linalg::inverse(&q)? * lin;
    let h = &q / (1.0 + linalg::quad_form(&q, &w));
    let e = ShiftedEllipsoid::new(h, w)?;
    let residual = pts.iter().map(|p| e.deviation(p)).fold(0.0_f64, f64::max);
    Ok((e, residual))
}

/// Navigation data `(h, W)` of the Randers norm `alpha + beta` at one point.
pub fn navigation_from_randers(alpha: &DMatrix<f64>, beta: &DVector<f64>) -> Result<(ShiftedEllipsoid, f64)> {
    if randers_invariant(alpha, beta)? >= 1.0 {
        return Err(FinslerError::InvalidMetric("|beta|_alpha must be below 1".into()));
    }
    let n = beta.len();
    indicatrix_fit(|y| Ok(linalg::quad_form(alpha, y).sqrt() + beta.dot(y)), n, 64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonochromaticReport {
    pub isometric: bool,
    /// `alpha^{ij} beta_i beta_j` at the two points
    pub invariants: [f64; 2],
    /// `F(x2, L y) = F(x1, y)`
    pub l: Option<DMatrix<f64>>,
    /// max `|F(x2, L y) - F(x1, y)|` over unit samples
    pub isometry_defect: Option<f64>,
}

/// Whether `(T_x1, F)` and `(T_x2, F)` are linearly isometric for `F = alpha + beta`.
pub fn monochromatic_check_randers(
    alpha: &MatrixField,
    beta: &VectorField,
    x1: &Point,
    x2: &Point,
) -> Result<MonochromaticReport> {
    let (a1, b1, a2, b2) = (alpha.at(x1), beta.at(x1), alpha.at(x2), beta.at(x2));
    let invariants = [randers_invariant(&a1, &b1)?, randers_invariant(&a2, &b2)?];
    let (e1, _) = navigation_from_randers(&a1, &b1)?;
    let (e2, _) = navigation_from_randers(&a2, &b2)?;
    let Some(map) = ellipsoid_equivalence(&e1, &e2)? else {
        return Ok(MonochromaticReport { isometric: false, invariants, l: None, isometry_defect: None });
    };
    let f = |a: &DMatrix<f64>, b: &DVector<f64>, y: &Vector| linalg::quad_form(a, y).sqrt() + b.dot(y);
    let defect = sphere_directions(b1.len(), 64)
        .iter()
        .map(|y| (f(&a2, &b2, &(&map.l * y)) - f(&a1, &b1, y)).abs())
        .fold(0.0_f64, f64::max);
    Ok(MonochromaticReport { isometric: true, invariants, l: Some(map.l), isometry_defect: Some(defect) })
}
