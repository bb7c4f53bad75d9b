//! Geodesic sprays, the Douglas and generalized-Berwald defining residuals,
//! the first- and second-order PDE systems on a tangent space, geodesics and
//! parallel transport.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::connection::{contract, Christoffel, Connection, DifferenceData};
use crate::curve::Curve;
use crate::error::{FinslerError, Result};
use crate::fiber2d::profile::ProfileField;
use crate::linalg;
use crate::metric::{
    energy_x_derivatives, evaluate, y_derivatives, BlackBox, MetricSpec, Point, Vector, YJet,
};
use crate::ode::{dopri5, OdeOptions};
use crate::tolerances as tol;

/// Spray coefficients `G^i(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SprayCoefficients {
    pub g: DVector<f64>,
}

fn jet_and_tensor(spec: &MetricSpec, x: &Point, y: &Vector) -> Result<(YJet, DMatrix<f64>)> {
    let j = y_derivatives(spec, x, y, 2)?;
    let g = linalg::symmetrize(&(&j.grad * j.grad.transpose() + &j.hess * j.value));
    if !(j.value > 0.0 && linalg::is_spd(&g, tol::SPD)) {
        let (min_eigenvalue, _) = linalg::min_eigen(&g);
        return Err(FinslerError::NotStrictlyConvex {
            direction: y.iter().copied().collect(),
            min_eigenvalue,
        });
    }
    Ok((j, g))
}

/// Solves `g (2G) = E_{x^l y^j} y^l - E_{x^j}`.
pub fn spray_coefficients(spec: &MetricSpec, x: &Point, y: &Vector) -> Result<SprayCoefficients> {
    let (_, g) = jet_and_tensor(spec, x, y)?;
    let (e_x, e_xy) = energy_x_derivatives(spec, x, y)?;
    let rhs = e_xy.transpose() * y - e_x;
    let two_g = g
        .cholesky()
        .ok_or_else(|| FinslerError::Singular("fundamental tensor".into()))?
        .solve(&rhs);
    Ok(SprayCoefficients { g: two_g * 0.5 })
}

/// Spray coefficients of a metric preserved by `gb`, with all x-derivatives
/// eliminated:
/// `2G^i = gB^i_{kl} y^k y^l + g^{ij} E_{y^m} (gB^m_{lj} - gB^m_{jl}) y^l`.
pub fn spray_from_gb(spec: &MetricSpec, gb: &Christoffel, x: &Point, y: &Vector) -> Result<SprayCoefficients> {
    let (j, g) = jet_and_tensor(spec, x, y)?;
    let n = y.len();
    let e_y = &j.grad * j.value;
    let rhs = DVector::from_fn(n, |jj, _| {
        let mut s = 0.0;
        for m in 0..n {
            for l in 0..n {
                s += e_y[m] * (gb.get(m, l, jj) - gb.get(m, jj, l)) * y[l];
            }
        }
        s
    });
    let corr = g
        .cholesky()
        .ok_or_else(|| FinslerError::Singular("fundamental tensor".into()))?
        .solve(&rhs);
    Ok(SprayCoefficients { g: (gb.quadratic(y) + corr) * 0.5 })
}

/// Decomposition `2G - D(y, y) = rho y + residual` with `residual` orthogonal to `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DouglasReport {
    pub residual: DVector<f64>,
    pub rho: f64,
}

pub fn douglas_residual(spec: &MetricSpec, d: &Christoffel, x: &Point, y: &Vector) -> Result<DouglasReport> {
    // validates that D is torsion free
    crate::connection::difference_tensors(d, d)?;
    let g = spray_coefficients(spec, x, y)?;
    let r = g.g * 2.0 - d.quadratic(y);
    let rho = r.dot(y) / y.dot(y);
    Ok(DouglasReport { residual: &r - y * rho, rho })
}

/// Component `j`: `E_{x^j} - E_{y^i} gB^i_{jk} y^k`.
pub fn gb_residual(spec: &MetricSpec, gb: &Christoffel, x: &Point, y: &Vector) -> Result<DVector<f64>> {
    let j = y_derivatives(spec, x, y, 1)?;
    let e_y = &j.grad * j.value;
    let (e_x, _) = energy_x_derivatives(spec, x, y)?;
    let n = y.len();
    let term = DVector::from_fn(n, |jj, _| {
        let mut s = 0.0;
        for i in 0..n {
            for k in 0..n {
                s += e_y[i] * gb.get(i, jj, k) * y[k];
            }
        }
        s
    });
    Ok(e_x - term)
}

/// Component `k`: `F_{y^k y^i} Gamma^i - F_{y^i} T^i_k`.
pub fn pde5_residual(spec: &MetricSpec, dd: &DifferenceData, x: &Point, y: &Vector) -> Result<DVector<f64>> {
    let j = y_derivatives(spec, x, y, 2)?;
    Ok(pde5_from_jet(&j, dd, y))
}

fn pde5_from_jet(j: &YJet, dd: &DifferenceData, y: &Vector) -> DVector<f64> {
    let c = contract(dd, y);
    &j.hess * &c.gamma_i - c.torsion_ij.transpose() * &j.grad
}

/// Entry `(k, s)`:
/// `F_{y^k y^i}(2 Gamma^i_s + T^i_s) - F_{y^s y^i}(2 Gamma^i_k + T^i_k) - 2 F_{y^i} T^i_{ks}`.
/// The returned matrix is antisymmetric; the entries with `k < s` are the system.
pub fn pde6_residual(spec: &MetricSpec, dd: &DifferenceData, x: &Point, y: &Vector) -> Result<DMatrix<f64>> {
    let j = y_derivatives(spec, x, y, 2)?;
    let c = contract(dd, y);
    let n = y.len();
    let m = &c.gamma_ij * 2.0 + &c.torsion_ij; // m[(i, s)] = 2 Gamma^i_s + T^i_s
    let hm = &j.hess * &m; // hm[(k, s)] = F_{ki} m[(i, s)]
    Ok(DMatrix::from_fn(n, n, |k, s| {
        let t: f64 = (0..n).map(|i| j.grad[i] * dd.torsion.get(i, k, s)).sum();
        hm[(k, s)] - hm[(s, k)] - 2.0 * t
    }))
}

/// `F_s(x, y) = (F(x, y) + F(x, -y)) / 2`.
pub fn symmetrize(spec: &MetricSpec) -> MetricSpec {
    match spec {
        MetricSpec::Riemannian(_) => spec.clone(),
        MetricSpec::Randers { alpha, .. } => MetricSpec::Riemannian(alpha.clone()),
        MetricSpec::FiberProfile2D(ProfileField::Constant(p)) => {
            MetricSpec::FiberProfile2D(ProfileField::Constant(p.symmetrized()))
        }
        MetricSpec::FiberProfile2D(ProfileField::Function(f)) => {
            let f = f.clone();
            MetricSpec::FiberProfile2D(ProfileField::Function(Arc::new(move |x| f(x).symmetrized())))
        }
        MetricSpec::BlackBox(b) => {
            let b = b.clone();
            let dim = b.dim();
            MetricSpec::BlackBox(
                BlackBox::new(dim, move |x, y| 0.5 * (b.call(x, y) + b.call(x, &-y)), &DVector::zeros(dim))
                    .expect("symmetrization of a vetted black box stays homogeneous"),
            )
        }
        MetricSpec::Pullback { base, map } => {
            MetricSpec::Pullback { base: Box::new(symmetrize(base)), map: map.clone() }
        }
    }
}

/// Where the geodesic equation comes from.
#[derive(Debug, Clone, Copy)]
pub enum GeodesicSource<'a> {
    /// `x'' = -2 G(x, x')`
    Metric(&'a MetricSpec),
    /// `x''^i = -Gamma^i_{jk} x'^j x'^k`
    Connection(&'a Connection),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicCurve {
    pub t: Vec<f64>,
    pub x: Vec<Point>,
    pub v: Vec<Vector>,
    /// set when integration stopped before `t_end` (convexity loss, blow-up)
    pub diagnostic: Option<String>,
}

/// Integrates a geodesic on `[0, t_end]`. With `samples > 1` the output is
/// recorded at equispaced times, otherwise at every accepted step.
pub fn integrate_geodesic(
    source: GeodesicSource<'_>,
    x0: &Point,
    y0: &Vector,
    t_end: f64,
    samples: usize,
    opts: &OdeOptions,
) -> Result<GeodesicCurve> {
    let n = x0.len();
    if y0.len() != n {
        return Err(FinslerError::DimensionMismatch { expected: n, got: y0.len() });
    }
    let dim = match source {
        GeodesicSource::Metric(m) => m.dim(),
        GeodesicSource::Connection(c) => c.dim(),
    };
    if dim != n {
        return Err(FinslerError::DimensionMismatch { expected: dim, got: n });
    }
    let rhs = |_: f64, s: &DVector<f64>| -> Result<DVector<f64>> {
        let x = s.rows(0, n).into_owned();
        let v = s.rows(n, n).into_owned();
        let acc = match source {
            GeodesicSource::Metric(m) => spray_coefficients(m, &x, &v)?.g * -2.0,
            GeodesicSource::Connection(c) => -c.at(&x).quadratic(&v),
        };
        let mut out = DVector::zeros(2 * n);
        out.rows_mut(0, n).copy_from(&v);
        out.rows_mut(n, n).copy_from(&acc);
        Ok(out)
    };
    let mut s0 = DVector::zeros(2 * n);
    s0.rows_mut(0, n).copy_from(x0);
    s0.rows_mut(n, n).copy_from(y0);
    let t_eval: Vec<f64> = if samples > 1 {
        (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect()
    } else {
        vec![]
    };
    let traj = dopri5(rhs, 0.0, s0, t_end, &t_eval, opts, |_, s| {
        (s.amax() > 1e12).then(|| "blow-up: state exceeds 1e12".to_string())
    });
    Ok(GeodesicCurve {
        x: traj.y.iter().map(|s| s.rows(0, n).into_owned()).collect(),
        v: traj.y.iter().map(|s| s.rows(n, n).into_owned()).collect(),
        t: traj.t,
        diagnostic: traj.stopped,
    })
}

/// Parallel field along a curve and the change of its Finsler length.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub t: Vec<f64>,
    pub points: Vec<Point>,
    pub field: Vec<Vector>,
    /// `F(c(t), X(t))`
    pub values: Vec<f64>,
    /// `F(c(t), X(t)) - F(c(0), X(0))`
    pub drift: Vec<f64>,
    pub max_abs_drift: f64,
    pub diagnostic: Option<String>,
}

impl TransportResult {
    /// CSV with header `t,X1,..,Xn,F,drift`.
    pub fn to_csv(&self) -> String {
        let n = self.field.first().map_or(0, |v| v.len());
        let mut s = String::from("t");
        for i in 1..=n {
            s.push_str(&format!(",X{i}"));
        }
        s.push_str(",F,drift\n");
        for k in 0..self.t.len() {
            s.push_str(&format!("{:.17e}", self.t[k]));
            for v in self.field[k].iter() {
                s.push_str(&format!(",{v:.17e}"));
            }
            s.push_str(&format!(",{:.17e},{:.17e}\n", self.values[k], self.drift[k]));
        }
        s
    }
}

/// Solves `X'^i + Gamma^i_{jk}(c) c'^j X^k = 0` along `curve`, sampled at
/// `samples` equispaced parameters, and records the drift of `F(c, X)`.
pub fn parallel_transport(
    conn: &Connection,
    curve: &Curve,
    x0: &Vector,
    metric: &MetricSpec,
    samples: usize,
    opts: &OdeOptions,
) -> Result<TransportResult> {
    curve.validate()?;
    let n = curve.dim();
    if conn.dim() != n || x0.len() != n || metric.dim() != n {
        return Err(FinslerError::DimensionMismatch { expected: n, got: x0.len() });
    }
    let t_end = curve.t_end();
    let samples = samples.max(2);
    let mut t_eval: Vec<f64> = (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect();
    let breaks = curve.breakpoints();
    // integrate piece by piece so that velocity jumps sit on interval ends
    let mut edges = vec![0.0];
    edges.extend(breaks.iter().copied());
    edges.push(t_end);
    t_eval.dedup();

    let mut ts = Vec::new();
    let mut xs: Vec<Vector> = Vec::new();
    let mut state = x0.clone();
    let mut diagnostic = None;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut local: Vec<f64> = vec![a];
        local.extend(t_eval.iter().copied().filter(|&t| t > a && t < b));
        local.push(b);
        let rhs = |t: f64, xv: &DVector<f64>| -> Result<DVector<f64>> {
            // velocity of the current piece, also at its end points
            let eps = 1e-9 * (b - a);
            let c = curve.position(t);
            let dc = curve.velocity(t.clamp(a + eps, b - eps));
            Ok(-(conn.at(&c).along(&dc) * xv))
        };
        let traj = dopri5(rhs, a, state.clone(), b, &local, opts, |_, _| None);
        if let Some(reason) = traj.stopped.clone() {
            diagnostic = Some(reason);
        }
        for (t, y) in traj.t.iter().zip(&traj.y) {
            let keep = t_eval.iter().any(|&s| (s - t).abs() <= 1e-12 * t_end.max(1.0));
            if keep && ts.last().is_none_or(|&last: &f64| *t > last) {
                ts.push(*t);
                xs.push(y.clone());
            }
        }
        match traj.y.last() {
            Some(y) if diagnostic.is_none() => state = y.clone(),
            _ => break,
        }
    }
    let points: Vec<Point> = ts.iter().map(|&t| curve.position(t)).collect();
    let values = points
        .iter()
        .zip(&xs)
        .map(|(c, x)| evaluate(metric, c, x))
        .collect::<Result<Vec<f64>>>()?;
    let f0 = values[0];
    let drift: Vec<f64> = values.iter().map(|v| v - f0).collect();
    let max_abs_drift = drift.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
    Ok(TransportResult { t: ts, points, field: xs, values, drift, max_abs_drift, diagnostic })
}
